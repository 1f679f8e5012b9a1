"""Alternating optimization of offloading selection, receive beamforming,
transmit power, and compute allocation, minimizing the weighted total
energy under per-task delay and per-node capacity constraints.

The driver `run_algorithm1` cycles three blocks until the objective
stalls: (1) the offloading selection via an LP relaxation rounded to a
binary assignment, (2) receive beamformers via successive convex
approximation of the semidefinite-relaxed subproblem (solved in closed
form through its top eigenvector, or via a conic solver), and (3) powers
and compute splits via a closed-form power update plus a smooth convex
program.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .costmodel import Plan, check_feasibility, evaluate_plan
from .errors import (BudgetExceeded, Infeasible, IrreparableCapacity,
                     NegativeDelayBudget, ScaDiverged, ScenarioInfeasible,
                     ZeroPower)
from .instance import NetworkInstance
from .linkrate import Beamformers, cross_gains, max_sinr_receiver
from .solvers import (ConicProgram, LinearProgram, solve_conic, solve_lp,
                      solve_smooth, SmoothConvexProgram, rank_one_ratio,
                      top_eigpair)

_F_EPS = 1.0  # cycles/s floor to avoid division blowups


@dataclass
class RelaxedDecision:
    """Continuous offloading fractions in [0, 1] with unit row sums."""

    alpha: np.ndarray  # (K, M)
    beta: np.ndarray   # (K, N)
    gamma: np.ndarray  # (L, N)


@dataclass
class ScaState:
    """Anchors of the convexified beamforming subproblem."""

    sinr_anchor: dict = field(default_factory=dict)  # (kind, k, node) -> SINR
    trace: list = field(default_factory=list)


@dataclass
class IterationTrace:
    """Objective values and diagnostics of accepted AO iterations."""

    xi: list = field(default_factory=list)
    statuses: list = field(default_factory=list)
    rank_one_ratios: list = field(default_factory=list)
    wallclock: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.xi)


# ---------------------------------------------------------------------------
# Per-pair rate / delay / energy tables
# ---------------------------------------------------------------------------

def _gue_rates_at_node(instance, channels, w_node, order, p, bandwidth,
                       noise):
    """Rates and interference of all ground users at one node."""
    gains = cross_gains(channels, w_node)  # [k, i]
    k_n = gains.shape[0]
    rates = np.zeros(k_n)
    interference = np.zeros(k_n)
    for k in range(k_n):
        idx = order.interferers(k)
        interference[k] = float(np.dot(p[idx], gains[k, idx]))
        if p[k] > 0:
            sinr = p[k] * gains[k, k] / (interference[k] + noise)
            rates[k] = bandwidth * math.log2(1.0 + sinr)
    return rates, interference, np.diagonal(gains).copy()


def pair_tables(instance: NetworkInstance, bf: Beamformers, p: np.ndarray,
                q: np.ndarray) -> dict:
    """Delay-minimal compute, energy, and usability of every (user, node)
    pair at the currently fixed beamformers and powers.

    A pair is usable when its transmission (plus propagation) delay leaves
    a positive compute budget achievable within the node's capacity.
    """
    sc = instance.scenario
    k_n, l_n, m_n, n_n = sc.n_gue, sc.n_sue, sc.n_bs, sc.n_sat
    d_g = np.array([t.d for t in instance.tasks_gue])
    cyc_g = np.array([t.cycles for t in instance.tasks_gue])
    d_s = np.array([t.d for t in instance.tasks_sue])
    cyc_s = np.array([t.cycles for t in instance.tasks_sue])

    out = {
        "rate_gue_bs": np.zeros((k_n, m_n)),
        "rate_gue_sat": np.zeros((k_n, n_n)),
        "rate_sue_sat": np.zeros((l_n, n_n)),
        "f_gue_bs": np.zeros((k_n, m_n)),
        "f_gue_sat": np.zeros((k_n, n_n)),
        "f_sue_sat": np.zeros((l_n, n_n)),
        "e_gue_bs": np.full((k_n, m_n), np.inf),
        "e_gue_sat": np.full((k_n, n_n), np.inf),
        "e_sue_sat": np.full((l_n, n_n), np.inf),
        "t_gue_bs": np.full((k_n, m_n), np.inf),
        "t_gue_sat": np.full((k_n, n_n), np.inf),
        "t_sue_sat": np.full((l_n, n_n), np.inf),
        "usable_gue_bs": np.zeros((k_n, m_n), dtype=bool),
        "usable_gue_sat": np.zeros((k_n, n_n), dtype=bool),
        "usable_sue_sat": np.zeros((l_n, n_n), dtype=bool),
    }

    def fill(kind, idx_user, idx_node, rate, prop, d, cyc, power, cap, z, tau):
        if rate <= 0:
            return
        t_tx = d / rate
        budget = z - prop - t_tx
        out[f"rate_{kind}"][idx_user, idx_node] = rate
        if budget <= 0:
            return
        f_req = cyc / budget
        if f_req > cap:
            return
        f_req = max(f_req, _F_EPS)
        out[f"f_{kind}"][idx_user, idx_node] = f_req
        out[f"t_{kind}"][idx_user, idx_node] = t_tx + prop + cyc / f_req
        out[f"e_{kind}"][idx_user, idx_node] = power * t_tx + tau * cyc * f_req ** 2
        out[f"usable_{kind}"][idx_user, idx_node] = True

    for m in range(m_n):
        rates, _, _ = _gue_rates_at_node(instance, instance.h_bs[m],
                                         bf.w[:, m, :], instance.orders_bs[m],
                                         p, sc.b1, sc.noise_bs)
        for k in range(k_n):
            fill("gue_bs", k, m, rates[k], 0.0, d_g[k], cyc_g[k], p[k],
                 sc.f_cap_bs, sc.z_gue, sc.tau_gro)
    for n in range(n_n):
        rates, _, _ = _gue_rates_at_node(instance, instance.g_sat[n],
                                         bf.v[:, n, :], instance.orders_sat[n],
                                         p, sc.b2, instance.delta2_sq)
        for k in range(k_n):
            prop = instance.dist_gue_sat_m[k, n] / sc.light_speed
            fill("gue_sat", k, n, rates[k], prop, d_g[k], cyc_g[k], p[k],
                 sc.f_cap_sat, sc.z_gue, sc.tau_sat)
    for l in range(l_n):
        for n in range(n_n):
            rate = sc.b3 * math.log2(1.0 + q[l] * instance.fso_slope[l, n])
            prop = instance.dist_sue_sat_m[l, n] / sc.light_speed
            fill("sue_sat", l, n, rate, prop, d_s[l], cyc_s[l], q[l],
                 sc.f_cap_sat, sc.z_sue, sc.tau_sat)
    return out


# ---------------------------------------------------------------------------
# Offloading selection
# ---------------------------------------------------------------------------

def _offload_lp(instance, tables, with_delay_rows: bool,
                fixed_choices: dict | None = None):
    """Build and solve the LP relaxation of the selection problem.

    Variables are [alpha flat, beta flat, gamma flat]; fixed_choices maps a
    user tag ('g', k) / ('s', l) to a forced variable index.
    """
    sc = instance.scenario
    k_n, l_n, m_n, n_n = sc.n_gue, sc.n_sue, sc.n_bs, sc.n_sat
    n_alpha, n_beta, n_gamma = k_n * m_n, k_n * n_n, l_n * n_n
    n_var = n_alpha + n_beta + n_gamma
    if n_var == 0:
        return RelaxedDecision(np.zeros((k_n, m_n)), np.zeros((k_n, n_n)),
                               np.zeros((l_n, n_n))), 0.0

    def ai(k, m):
        return k * m_n + m

    def bi(k, n):
        return n_alpha + k * n_n + n

    def gi(l, n):
        return n_alpha + n_beta + l * n_n + n

    c = np.zeros(n_var)
    usable = np.zeros(n_var, dtype=bool)
    t_pair = np.zeros(n_var)
    f_pair = np.zeros(n_var)
    for k in range(k_n):
        for m in range(m_n):
            j = ai(k, m)
            usable[j] = tables["usable_gue_bs"][k, m]
            c[j] = sc.rho_gue * tables["e_gue_bs"][k, m] if usable[j] else 0.0
            t_pair[j] = tables["t_gue_bs"][k, m]
            f_pair[j] = tables["f_gue_bs"][k, m]
        for n in range(n_n):
            j = bi(k, n)
            usable[j] = tables["usable_gue_sat"][k, n]
            c[j] = sc.rho_gue * tables["e_gue_sat"][k, n] if usable[j] else 0.0
            t_pair[j] = tables["t_gue_sat"][k, n]
            f_pair[j] = tables["f_gue_sat"][k, n]
    for l in range(l_n):
        for n in range(n_n):
            j = gi(l, n)
            usable[j] = tables["usable_sue_sat"][l, n]
            c[j] = sc.rho_sue * tables["e_sue_sat"][l, n] if usable[j] else 0.0
            t_pair[j] = tables["t_sue_sat"][l, n]
            f_pair[j] = tables["f_sue_sat"][l, n]

    bounds = [(0.0, 1.0) if usable[j] else (0.0, 0.0) for j in range(n_var)]
    if fixed_choices:
        for j in fixed_choices.values():
            bounds[j] = (1.0, 1.0)

    a_eq = np.zeros((k_n + l_n, n_var))
    b_eq = np.ones(k_n + l_n)
    for k in range(k_n):
        for m in range(m_n):
            a_eq[k, ai(k, m)] = 1.0
        for n in range(n_n):
            a_eq[k, bi(k, n)] = 1.0
    for l in range(l_n):
        for n in range(n_n):
            a_eq[k_n + l, gi(l, n)] = 1.0

    rows_ub = []
    rhs_ub = []
    if with_delay_rows:
        for k in range(k_n):
            row = np.zeros(n_var)
            for m in range(m_n):
                row[ai(k, m)] = t_pair[ai(k, m)] if usable[ai(k, m)] else 0.0
            for n in range(n_n):
                row[bi(k, n)] = t_pair[bi(k, n)] if usable[bi(k, n)] else 0.0
            rows_ub.append(row)
            rhs_ub.append(sc.z_gue)
        for l in range(l_n):
            row = np.zeros(n_var)
            for n in range(n_n):
                row[gi(l, n)] = t_pair[gi(l, n)] if usable[gi(l, n)] else 0.0
            rows_ub.append(row)
            rhs_ub.append(sc.z_sue)
    for m in range(m_n):
        row = np.zeros(n_var)
        for k in range(k_n):
            row[ai(k, m)] = f_pair[ai(k, m)]
        rows_ub.append(row)
        rhs_ub.append(sc.f_cap_bs)
    for n in range(n_n):
        row = np.zeros(n_var)
        for k in range(k_n):
            row[bi(k, n)] = f_pair[bi(k, n)]
        for l in range(l_n):
            row[gi(l, n)] = f_pair[gi(l, n)]
        rows_ub.append(row)
        rhs_ub.append(sc.f_cap_sat)

    lp = LinearProgram(c=c,
                       a_ub=np.array(rows_ub) if rows_ub else None,
                       b_ub=np.array(rhs_ub) if rhs_ub else None,
                       a_eq=a_eq if a_eq.size else None,
                       b_eq=b_eq if b_eq.size else None,
                       bounds=bounds)
    report = solve_lp(lp)
    if report.status != "optimal":
        return None, np.inf
    x = report.x
    return RelaxedDecision(
        alpha=x[:n_alpha].reshape(k_n, m_n) if n_alpha else np.zeros((k_n, m_n)),
        beta=x[n_alpha:n_alpha + n_beta].reshape(k_n, n_n) if n_beta else np.zeros((k_n, n_n)),
        gamma=x[n_alpha + n_beta:].reshape(l_n, n_n) if n_gamma else np.zeros((l_n, n_n)),
    ), report.objective


def solve_offload_relaxed(instance: NetworkInstance, tables: dict
                          ) -> RelaxedDecision:
    """LP relaxation of the binary selection at fixed remaining blocks.

    If the delay rows make the LP infeasible (stale powers can do this
    early in the alternation), they are dropped and the LP re-solved on
    energy, capacity, and assignment alone.
    """
    relaxed, _ = _offload_lp(instance, tables, with_delay_rows=True)
    if relaxed is None:
        relaxed, _ = _offload_lp(instance, tables, with_delay_rows=False)
    if relaxed is None:
        raise Infeasible("selection LP infeasible even without delay rows")
    return relaxed


def map_to_binary(relaxed: RelaxedDecision):
    """Round each user's row to its single largest fraction.

    Ties resolve toward BS columns first, then the lowest index (argmax on
    the concatenated [alpha | beta] row).
    """
    k_n = relaxed.alpha.shape[0]
    alpha = np.zeros_like(relaxed.alpha)
    beta = np.zeros_like(relaxed.beta)
    gamma = np.zeros_like(relaxed.gamma)
    m_n = relaxed.alpha.shape[1]
    for k in range(k_n):
        row = np.concatenate([relaxed.alpha[k], relaxed.beta[k]])
        j = int(np.argmax(row))
        if j < m_n:
            alpha[k, j] = 1.0
        else:
            beta[k, j - m_n] = 1.0
    for l in range(relaxed.gamma.shape[0]):
        gamma[l, int(np.argmax(relaxed.gamma[l]))] = 1.0
    return alpha, beta, gamma


def repair_capacity(binary, instance: NetworkInstance, relaxed: RelaxedDecision,
                    tables: dict):
    """Move users off overloaded nodes until minimum compute demands fit.

    On each overloaded node the user with the smallest relaxed fraction is
    reassigned to its cheapest usable alternative with slack.  Terminates
    within K + L moves or raises IrreparableCapacity.
    """
    sc = instance.scenario
    alpha, beta, gamma = (b.copy() for b in binary)
    k_n, l_n, m_n, n_n = sc.n_gue, sc.n_sue, sc.n_bs, sc.n_sat

    def loads():
        bs = np.array([float(np.dot(alpha[:, m], tables["f_gue_bs"][:, m]))
                       for m in range(m_n)])
        sat = np.array([
            float(np.dot(beta[:, n], tables["f_gue_sat"][:, n]))
            + float(np.dot(gamma[:, n], tables["f_sue_sat"][:, n]))
            for n in range(n_n)])
        return bs, sat

    for _ in range(k_n + l_n):
        bs_load, sat_load = loads()
        over_bs = np.flatnonzero(bs_load > sc.f_cap_bs * (1 + 1e-12))
        over_sat = np.flatnonzero(sat_load > sc.f_cap_sat * (1 + 1e-12))
        if over_bs.size == 0 and over_sat.size == 0:
            return alpha, beta, gamma

        # Candidate movers on the first overloaded node.
        if over_bs.size:
            node = int(over_bs[0])
            users = [("g", k) for k in np.flatnonzero(alpha[:, node] > 0.5)]
            frac = {("g", k): relaxed.alpha[k, node] for _, k in users}
        else:
            node = int(over_sat[0])
            users = ([("g", k) for k in np.flatnonzero(beta[:, node] > 0.5)]
                     + [("s", l) for l in np.flatnonzero(gamma[:, node] > 0.5)])
            frac = {}
            for kind, i in users:
                frac[(kind, i)] = (relaxed.beta[i, node] if kind == "g"
                                   else relaxed.gamma[i, node])

        moved = False
        for kind, i in sorted(users, key=lambda u: frac[u]):
            # Cheapest usable alternative with enough slack.
            best = None
            if kind == "g":
                for m in range(m_n):
                    need = tables["f_gue_bs"][i, m]
                    if (tables["usable_gue_bs"][i, m] and alpha[i, m] < 0.5
                            and bs_load[m] + need <= sc.f_cap_bs):
                        cost = tables["e_gue_bs"][i, m]
                        if best is None or cost < best[0]:
                            best = (cost, "bs", m)
                for n in range(n_n):
                    need = tables["f_gue_sat"][i, n]
                    if (tables["usable_gue_sat"][i, n] and beta[i, n] < 0.5
                            and sat_load[n] + need <= sc.f_cap_sat):
                        cost = tables["e_gue_sat"][i, n]
                        if best is None or cost < best[0]:
                            best = (cost, "sat", n)
                if best is not None:
                    alpha[i, :] = 0.0
                    beta[i, :] = 0.0
                    if best[1] == "bs":
                        alpha[i, best[2]] = 1.0
                    else:
                        beta[i, best[2]] = 1.0
                    moved = True
                    break
            else:
                for n in range(n_n):
                    need = tables["f_sue_sat"][i, n]
                    if (tables["usable_sue_sat"][i, n] and gamma[i, n] < 0.5
                            and sat_load[n] + need <= sc.f_cap_sat):
                        cost = tables["e_sue_sat"][i, n]
                        if best is None or cost < best[0]:
                            best = (cost, n)
                if best is not None:
                    gamma[i, :] = 0.0
                    gamma[i, best[1]] = 1.0
                    moved = True
                    break
        if not moved:
            raise IrreparableCapacity(
                f"no reassignment can relieve node overload (node {node})")
    bs_load, sat_load = loads()
    if (np.all(bs_load <= sc.f_cap_bs * (1 + 1e-12))
            and np.all(sat_load <= sc.f_cap_sat * (1 + 1e-12))):
        return alpha, beta, gamma
    raise IrreparableCapacity("capacity repair exceeded its move budget")


def _binary_objective(instance, tables, alpha, beta, gamma):
    """Energy of a binary selection under the pair tables; inf if any pair
    is unusable or a capacity row breaks."""
    sc = instance.scenario
    total = 0.0
    for k in range(sc.n_gue):
        m = np.flatnonzero(alpha[k] > 0.5)
        n = np.flatnonzero(beta[k] > 0.5)
        if m.size:
            if not tables["usable_gue_bs"][k, m[0]]:
                return np.inf
            total += sc.rho_gue * tables["e_gue_bs"][k, m[0]]
        elif n.size:
            if not tables["usable_gue_sat"][k, n[0]]:
                return np.inf
            total += sc.rho_gue * tables["e_gue_sat"][k, n[0]]
        else:
            return np.inf
    for l in range(sc.n_sue):
        n = np.flatnonzero(gamma[l] > 0.5)
        if not n.size or not tables["usable_sue_sat"][l, n[0]]:
            return np.inf
        total += sc.rho_sue * tables["e_sue_sat"][l, n[0]]
    for m in range(sc.n_bs):
        if float(np.dot(alpha[:, m], tables["f_gue_bs"][:, m])) > sc.f_cap_bs * (1 + 1e-12):
            return np.inf
    for n in range(sc.n_sat):
        load = (float(np.dot(beta[:, n], tables["f_gue_sat"][:, n]))
                + float(np.dot(gamma[:, n], tables["f_sue_sat"][:, n])))
        if load > sc.f_cap_sat * (1 + 1e-12):
            return np.inf
    return total


def bnb_offload(instance: NetworkInstance, tables: dict,
                budget: int = 4000):
    """Exact binary selection on tiny instances via best-first search with
    LP lower bounds.  Raises BudgetExceeded past `budget` LP solves."""
    sc = instance.scenario
    k_n, l_n, m_n, n_n = sc.n_gue, sc.n_sue, sc.n_bs, sc.n_sat
    n_var = k_n * (m_n + n_n) + l_n * n_n
    if n_var > 24:
        raise BudgetExceeded(f"{n_var} selection variables exceed the "
                             "24-variable exact-search scale")

    n_alpha = k_n * m_n
    n_beta = k_n * n_n

    def var_index(kind, user, node):
        if kind == "bs":
            return user * m_n + node
        if kind == "sat":
            return n_alpha + user * n_n + node
        return n_alpha + n_beta + user * n_n + node

    users = [("g", k) for k in range(k_n)] + [("s", l) for l in range(l_n)]

    def options(kind, i):
        opts = []
        if kind == "g":
            for m in range(m_n):
                if tables["usable_gue_bs"][i, m]:
                    opts.append(("bs", m))
            for n in range(n_n):
                if tables["usable_gue_sat"][i, n]:
                    opts.append(("sat", n))
        else:
            for n in range(n_n):
                if tables["usable_sue_sat"][i, n]:
                    opts.append(("sue", n))
        return opts

    def materialize(choices):
        alpha = np.zeros((k_n, m_n))
        beta = np.zeros((k_n, n_n))
        gamma = np.zeros((l_n, n_n))
        for (kind, i), (where, node) in choices.items():
            if where == "bs":
                alpha[i, node] = 1.0
            elif where == "sat":
                beta[i, node] = 1.0
            else:
                gamma[i, node] = 1.0
        return alpha, beta, gamma

    solves = 0

    def lower_bound(choices):
        nonlocal solves
        if solves >= budget:
            raise BudgetExceeded(f"branch-and-bound used all {budget} LP solves")
        solves += 1
        fixed = {key: var_index(where, key[1], node)
                 for key, (where, node) in choices.items()}
        _, obj = _offload_lp(instance, tables, with_delay_rows=False,
                             fixed_choices=fixed)
        return obj

    best_obj = np.inf
    best = None
    root_bound = lower_bound({})
    heap = [(root_bound, 0, {})]
    counter = itertools.count(1)
    while heap:
        bound, _, choices = heapq.heappop(heap)
        if bound >= best_obj - 1e-12:
            continue
        depth = len(choices)
        if depth == len(users):
            abg = materialize(choices)
            obj = _binary_objective(instance, tables, *abg)
            if obj < best_obj:
                best_obj, best = obj, abg
            continue
        kind, i = users[depth]
        for opt in options(kind, i):
            child = dict(choices)
            child[(kind, i)] = opt
            child_bound = lower_bound(child)
            if child_bound < best_obj - 1e-12:
                heapq.heappush(heap, (child_bound, next(counter), child))
    if best is None:
        raise Infeasible("no feasible binary selection exists")
    return best


# ---------------------------------------------------------------------------
# Beamforming
# ---------------------------------------------------------------------------

def _pair_problem(channels, order, p, noise, k):
    """Noise-normalized channel matrix, stacked square-root factor of the
    interference-plus-noise matrix (A with A^H A = I + sum p_i h_i h_i^H),
    and interferer indices of one (user, node) beamforming subproblem.

    The factor is kept in stacked form because forming the Gram matrix
    explicitly loses positive definiteness once interferer norms exceed
    about 1e8 times the noise floor."""
    h = channels / math.sqrt(noise)
    n_ant = h.shape[1]
    idx = order.interferers(k)
    a_mat = np.vstack([np.eye(n_ant, dtype=complex)]
                      + [math.sqrt(p[i]) * h[i].conj()[None, :] for i in idx])
    return h, a_mat, idx


def _sinr_of(w, h, idx, p, k):
    """SINR of unit receiver w by direct expansion.

    Summing p_i |w^H h_i|^2 term by term avoids the catastrophic
    cancellation a Gram-matrix quadratic form suffers when the receiver
    nearly nulls interferers 10^15 times stronger than the noise floor.
    """
    num = p[k] * abs(np.vdot(w, h[k])) ** 2
    den = float(np.vdot(w, w).real)
    for i in idx:
        den += p[i] * abs(np.vdot(w, h[i])) ** 2
    return num / den


def _sca_pair(h, a_mat, idx, p, k, method, max_outer, tol):
    """Maximize one user's SINR over the lifted matrix variable.

    The fractional objective is handled by whitening: with Q = R^H R the
    interference-plus-noise matrix (R from a QR factorization of the
    stacked square-root factor, so Q itself is never formed), u = R w
    turns the problem into maximizing p |u^H b|^2 / ||u||^2 with
    b = R^{-H} h_k, whose convexification (trace-one matrix variable,
    rank constraint dropped) is solved exactly in one step — through its
    top eigenvector (method 'eigen') or through the conic engine (method
    'conic', which also reports how close the solver's matrix block is to
    rank one).  Whitening is essential: satellite uplinks run at SINRs
    around 1e16, where anchor-weighted surrogates in the unwhitened space
    would drown the signal term below eigensolver resolution.
    """
    w0 = h[k] / np.linalg.norm(h[k])
    gamma0 = _sinr_of(w0, h, idx, p, k)

    r_mat = np.linalg.qr(a_mat, mode="r")
    b = scipy.linalg.solve_triangular(r_mat.conj().T, h[k], lower=True)
    b_outer = p[k] * np.outer(b, b.conj())
    if method == "eigen":
        _, u = top_eigpair(b_outer)
        ratio = 1.0
    else:
        dim = b_outer.shape[0]
        scale = float(np.trace(b_outer).real)
        prob = ConicProgram(
            block_dims=[dim],
            obj_blocks=[(0, -b_outer / scale)],
            trace_constraints=[{"blocks": [(0, np.eye(dim, dtype=complex))],
                                "scalars": {}, "sense": "==", "rhs": 1.0}],
        )
        report = solve_conic(prob)
        if report.status != "optimal":
            raise ScaDiverged(f"conic subproblem status {report.status}")
        w_big = report.x["blocks"][0]
        ratio = rank_one_ratio(w_big)
        _, u = top_eigpair(w_big)
    w = scipy.linalg.solve_triangular(r_mat, u, lower=False)
    w = w / np.linalg.norm(w)
    gamma = _sinr_of(w, h, idx, p, k)
    if gamma < gamma0:
        # Numerical tie at extreme SINR: keep the better of the two.
        w, gamma = w0, gamma0
    return w, gamma, ratio, [gamma0, gamma]


def sca_beamforming(instance: NetworkInstance, decision, p: np.ndarray,
                    init: ScaState | None = None, max_outer: int = 20,
                    tol: float = 1e-5, method: str = "eigen"):
    """Receive beamformers for every (user, node) pair.

    Selected pairs are optimized by the SCA loop; unselected pairs get the
    closed-form max-SINR receiver so the returned container is complete.
    Returns (Beamformers, diagnostics) where diagnostics carries per-pair
    rank-one ratios, SINRs, and surrogate-objective traces.
    """
    sc = instance.scenario
    alpha, beta, _ = decision
    k_n, m_n, n_n = sc.n_gue, sc.n_bs, sc.n_sat
    w = np.zeros((k_n, m_n, sc.n_ant_bs), dtype=complex)
    v = np.zeros((k_n, n_n, sc.n_ant_sat), dtype=complex)
    diag = {"rank_one_ratios": [], "sinr": {}, "traces": {}}

    for m in range(m_n):
        for k in range(k_n):
            if alpha[k, m] > 0.5:
                h, a_mat, idx = _pair_problem(instance.h_bs[m],
                                              instance.orders_bs[m], p,
                                              sc.noise_bs, k)
                wk, sinr, ratio, trace = _sca_pair(h, a_mat, idx, p, k,
                                                   method, max_outer, tol)
                diag["rank_one_ratios"].append(ratio)
                diag["sinr"][("bs", k, m)] = sinr
                diag["traces"][("bs", k, m)] = trace
            else:
                wk = max_sinr_receiver(k, instance.h_bs[m], p,
                                       instance.orders_bs[m], sc.noise_bs)
            w[k, m] = wk
    for n in range(n_n):
        for k in range(k_n):
            if beta[k, n] > 0.5:
                g, a_mat, idx = _pair_problem(instance.g_sat[n],
                                              instance.orders_sat[n], p,
                                              instance.delta2_sq, k)
                vk, sinr, ratio, trace = _sca_pair(g, a_mat, idx, p, k,
                                                   method, max_outer, tol)
                diag["rank_one_ratios"].append(ratio)
                diag["sinr"][("sat", k, n)] = sinr
                diag["traces"][("sat", k, n)] = trace
            else:
                vk = max_sinr_receiver(k, instance.g_sat[n], p,
                                       instance.orders_sat[n],
                                       instance.delta2_sq)
            v[k, n] = vk
    return Beamformers(w=w, v=v), diag


# ---------------------------------------------------------------------------
# Power and compute allocation
# ---------------------------------------------------------------------------

def gue_power_closed_form(instance: NetworkInstance, decision,
                          bf: Beamformers, f_gro: np.ndarray,
                          f_sat_g: np.ndarray, p_init: np.ndarray | None = None,
                          on_negative_budget: str = "pmax") -> np.ndarray:
    """Minimum transmit powers meeting each ground user's delay budget.

    For user k with residual transmission budget Z' (deadline minus compute
    and propagation delay), the required rate d/Z' inverts to
    p = (I + noise) / |w^H h|^2 * (2^{d/(B Z')} - 1), clamped at P^max.
    Users are processed in a single sweep by descending decode-order number
    at their own node, so every interference term uses the freshest powers
    of the users that actually appear in it.

    on_negative_budget: 'pmax' assigns P^max when Z' <= 0 (the compute
    split upstream is infeasible); 'raise' raises NegativeDelayBudget.
    """
    sc = instance.scenario
    alpha, beta, _ = decision
    k_n = sc.n_gue
    p = (p_init.copy() if p_init is not None
         else np.full(k_n, sc.p_max / 2.0))

    prio = np.zeros(k_n)
    node_of = {}
    for k in range(k_n):
        m = np.flatnonzero(alpha[k] > 0.5)
        if m.size:
            node_of[k] = ("bs", int(m[0]))
            prio[k] = instance.orders_bs[m[0]].priority[k]
        else:
            n = int(np.flatnonzero(beta[k] > 0.5)[0])
            node_of[k] = ("sat", n)
            prio[k] = instance.orders_sat[n].priority[k]

    for k in sorted(range(k_n), key=lambda i: -prio[i]):
        kind, node = node_of[k]
        task = instance.tasks_gue[k]
        if kind == "bs":
            channels, order = instance.h_bs[node], instance.orders_bs[node]
            wk = bf.w[k, node]
            noise, bandwidth = sc.noise_bs, sc.b1
            prop, f_alloc = 0.0, f_gro[k, node]
        else:
            channels, order = instance.g_sat[node], instance.orders_sat[node]
            wk = bf.v[k, node]
            noise, bandwidth = instance.delta2_sq, sc.b2
            prop = instance.dist_gue_sat_m[k, node] / sc.light_speed
            f_alloc = f_sat_g[k, node]

        budget = sc.z_gue - prop - (task.cycles / f_alloc if f_alloc > 0 else np.inf)
        if budget <= 0:
            if on_negative_budget == "raise":
                raise NegativeDelayBudget(
                    f"ground user {k}: compute+propagation delay exceeds the deadline")
            p[k] = sc.p_max
            continue

        gains = np.abs(channels @ wk.conj()) ** 2
        idx = order.interferers(k)
        interference = float(np.dot(p[idx], gains[idx]))
        snr_req = 2.0 ** (task.d / (bandwidth * budget)) - 1.0
        p[k] = min((interference + noise) / gains[k] * snr_req, sc.p_max)
    return p


def qtilde_from_q(q: float, snr_slope: float) -> float:
    """Reciprocal spectral efficiency of a laser-link power: 1/log2(1+q*I)."""
    if q <= 0 or snr_slope <= 0:
        raise ZeroPower("q and snr_slope must be > 0")
    return 1.0 / math.log2(1.0 + q * snr_slope)


def q_from_qtilde(qtilde: float, snr_slope: float) -> float:
    """Inverse of qtilde_from_q: q = (2^(1/qtilde) - 1) / I."""
    if qtilde <= 0 or snr_slope <= 0:
        raise ZeroPower("qtilde and snr_slope must be > 0")
    return (2.0 ** (1.0 / qtilde) - 1.0) / snr_slope


def _transmission_budget_search(d, cycles, gain, interference, noise,
                                bandwidth, z_budget, tau, f_cap, p_max, rho):
    """1-D search over the transmission-time split of one user's deadline.

    Picks transmission time t minimizing rho * (p(t) * t + tau * cycles *
    f(t)^2) with f(t) = cycles / (z_budget - t) and p(t) the exact-deadline
    power, subject to p <= p_max and f <= f_cap.  Returns (t, f, energy) or
    None when no split fits.
    """
    t_hi = z_budget - cycles / f_cap
    snr_max = p_max * gain / (interference + noise)
    t_lo = d / (bandwidth * math.log2(1.0 + snr_max)) if snr_max > 0 else np.inf
    if not np.isfinite(t_lo) or t_lo > t_hi or t_hi <= 0:
        return None
    t_lo = max(t_lo, 1e-9)

    def energy(t):
        p = (interference + noise) / gain * (2.0 ** (d / (bandwidth * t)) - 1.0)
        f = cycles / (z_budget - t)
        return rho * (p * t + tau * cycles * f ** 2)

    res = scipy.optimize.minimize_scalar(energy, bounds=(t_lo, t_hi),
                                         method="bounded",
                                         options={"xatol": 1e-9})
    t = float(np.clip(res.x, t_lo, t_hi))
    return t, cycles / (z_budget - t), float(energy(t))


def sue_power_and_compute(instance: NetworkInstance, decision,
                          bf: Beamformers, p: np.ndarray,
                          tol: float = 1e-9,
                          pin_q: np.ndarray | None = None,
                          pin_f: tuple | None = None):
    """Joint convex allocation of space-user powers and all compute splits.

    Space-user transmit powers are handled through the reciprocal spectral
    efficiency qt = 1 / log2(1 + q I); transmission energy becomes the
    convex (d / (B3 I)) qt (2^{1/qt} - 1) and transmission time qt d / B3.
    Ground users' transmission delays are constants here (powers fixed), so
    their compute variables carry delay-derived lower bounds.  Returns
    (q, f_gro, f_sat_g, f_sat_s) with entries on selected pairs only.

    pin_q pins the space-user powers (W) instead of optimizing them;
    pin_f = (f_gro, f_sat_g, f_sat_s) pins every compute variable.
    """
    sc = instance.scenario
    alpha, beta, gamma = decision
    k_n, l_n, m_n, n_n = sc.n_gue, sc.n_sue, sc.n_bs, sc.n_sat

    # Selected node and fixed transmission delay per ground user.
    gue_node = []
    gue_delay_tx = np.zeros(k_n)
    for k in range(k_n):
        m = np.flatnonzero(alpha[k] > 0.5)
        task = instance.tasks_gue[k]
        if m.size:
            m = int(m[0])
            gains = np.abs(instance.h_bs[m] @ bf.w[k, m].conj()) ** 2
            idx = instance.orders_bs[m].interferers(k)
            sinr = p[k] * gains[k] / (float(np.dot(p[idx], gains[idx])) + sc.noise_bs)
            rate = sc.b1 * math.log2(1.0 + sinr) if sinr > 0 else 0.0
            gue_node.append(("bs", m, 0.0))
        else:
            n = int(np.flatnonzero(beta[k] > 0.5)[0])
            gains = np.abs(instance.g_sat[n] @ bf.v[k, n].conj()) ** 2
            idx = instance.orders_sat[n].interferers(k)
            sinr = (p[k] * gains[k]
                    / (float(np.dot(p[idx], gains[idx])) + instance.delta2_sq))
            rate = sc.b2 * math.log2(1.0 + sinr) if sinr > 0 else 0.0
            gue_node.append(("sat", n, instance.dist_gue_sat_m[k, n] / sc.light_speed))
        gue_delay_tx[k] = task.d / rate if rate > 0 else np.inf

    sue_node = [int(np.flatnonzero(gamma[l] > 0.5)[0]) for l in range(l_n)]

    # Variable layout: [qt (L), f_g (K), f_s (L)].
    n_var = l_n + k_n + l_n
    lower = np.zeros(n_var)
    upper = np.zeros(n_var)
    d_s = np.array([t.d for t in instance.tasks_sue])
    cyc_s = np.array([t.cycles for t in instance.tasks_sue])
    cyc_g = np.array([t.cycles for t in instance.tasks_gue])
    slope = np.array([instance.fso_slope[l, sue_node[l]] for l in range(l_n)])
    prop_s = np.array([instance.dist_sue_sat_m[l, sue_node[l]] / sc.light_speed
                       for l in range(l_n)])

    for l in range(l_n):
        qt_min = qtilde_from_q(sc.q_max, slope[l])
        lower[l] = qt_min
        upper[l] = max((sc.z_sue - prop_s[l]) * sc.b3 / d_s[l], qt_min)
    for k in range(k_n):
        kind, node, prop = gue_node[k]
        budget = sc.z_gue - prop - gue_delay_tx[k]
        cap = sc.f_cap_bs if kind == "bs" else sc.f_cap_sat
        f_min = cyc_g[k] / budget if budget > 0 else np.inf
        if f_min > cap * (1 + 1e-9):
            raise Infeasible(
                f"ground user {k} needs {f_min:.3g} cycles/s, above node capacity")
        lower[l_n + k] = min(f_min, cap)
        upper[l_n + k] = cap
    for l in range(l_n):
        lower[l_n + k_n + l] = max(cyc_s[l] / (sc.z_sue - prop_s[l]), _F_EPS)
        upper[l_n + k_n + l] = sc.f_cap_sat
        if lower[l_n + k_n + l] > upper[l_n + k_n + l]:
            raise Infeasible(f"space user {l} cannot meet its deadline at any power")

    if pin_q is not None:
        for l in range(l_n):
            qt_pin = qtilde_from_q(pin_q[l], slope[l])
            lower[l] = upper[l] = qt_pin
    if pin_f is not None:
        pf_gro, pf_sat_g, pf_sat_s = pin_f
        for k in range(k_n):
            kind, node, _ = gue_node[k]
            val = pf_gro[k, node] if kind == "bs" else pf_sat_g[k, node]
            lower[l_n + k] = upper[l_n + k] = val
        for l in range(l_n):
            lower[l_n + k_n + l] = upper[l_n + k_n + l] = pf_sat_s[l, sue_node[l]]

    rho_g, rho_s = sc.rho_gue, sc.rho_sue
    tau_g_coeff = np.array([sc.tau_gro if gue_node[k][0] == "bs" else sc.tau_sat
                            for k in range(k_n)])

    def objective(x):
        qt = x[:l_n]
        f_g = x[l_n:l_n + k_n]
        f_s = x[l_n + k_n:]
        val = 0.0
        grad = np.zeros(n_var)
        for l in range(l_n):
            a = d_s[l] / (sc.b3 * slope[l])
            two = 2.0 ** (1.0 / qt[l])
            val += rho_s * a * qt[l] * (two - 1.0)
            grad[l] = rho_s * a * ((two - 1.0) - math.log(2.0) / qt[l] * two)
        val += float(np.sum(rho_g * tau_g_coeff * cyc_g * f_g ** 2))
        grad[l_n:l_n + k_n] = 2.0 * rho_g * tau_g_coeff * cyc_g * f_g
        val += float(np.sum(rho_s * sc.tau_sat * cyc_s * f_s ** 2))
        grad[l_n + k_n:] = 2.0 * rho_s * sc.tau_sat * cyc_s * f_s
        return val, grad

    constraints = []
    for l in range(l_n):
        def delay_con(x, l=l):
            qt, f_s = x[l], x[l_n + k_n + l]
            g = qt * d_s[l] / sc.b3 + cyc_s[l] / f_s + prop_s[l] - sc.z_sue
            grad = np.zeros(n_var)
            grad[l] = d_s[l] / sc.b3
            grad[l_n + k_n + l] = -cyc_s[l] / f_s ** 2
            return g, grad
        constraints.append(delay_con)
    for m in range(m_n):
        members = [k for k in range(k_n) if gue_node[k][:2] == ("bs", m)]
        if members:
            def cap_con(x, members=tuple(members)):
                g = sum(x[l_n + k] for k in members) - sc.f_cap_bs
                grad = np.zeros(n_var)
                for k in members:
                    grad[l_n + k] = 1.0
                return g, grad
            constraints.append(cap_con)
    for n in range(n_n):
        g_members = [k for k in range(k_n) if gue_node[k][:2] == ("sat", n)]
        s_members = [l for l in range(l_n) if sue_node[l] == n]
        if g_members or s_members:
            def cap_con(x, gm=tuple(g_members), sm=tuple(s_members)):
                g = (sum(x[l_n + k] for k in gm)
                     + sum(x[l_n + k_n + l] for l in sm) - sc.f_cap_sat)
                grad = np.zeros(n_var)
                for k in gm:
                    grad[l_n + k] = 1.0
                for l in sm:
                    grad[l_n + k_n + l] = 1.0
                return g, grad
            constraints.append(cap_con)

    x0 = lower.copy()
    for l in range(l_n):
        # Start at the slowest transmission the deadline allows at the
        # lower-bound compute split.
        slack = sc.z_sue - prop_s[l] - cyc_s[l] / max(upper[l_n + k_n + l], _F_EPS)
        x0[l] = float(np.clip(0.9 * slack * sc.b3 / d_s[l], lower[l], upper[l]))
        x0[l_n + k_n + l] = min(1.25 * lower[l_n + k_n + l], upper[l_n + k_n + l])
    x0[l_n:l_n + k_n] = np.minimum(lower[l_n:l_n + k_n] * (1 + 1e-9),
                                   upper[l_n:l_n + k_n])

    def best_effort():
        """Feasible-as-possible fallback when pinned blocks break the
        program; remaining slack violations surface in feasibility checks."""
        x = x0.copy()
        for l in range(l_n):
            slack = sc.z_sue - prop_s[l] - cyc_s[l] / upper[l_n + k_n + l]
            qt_want = slack * sc.b3 / d_s[l] if slack > 0 else lower[l]
            x[l] = float(np.clip(qt_want, lower[l], upper[l]))
            budget = sc.z_sue - prop_s[l] - x[l] * d_s[l] / sc.b3
            f_want = cyc_s[l] / budget if budget > 0 else upper[l_n + k_n + l]
            x[l_n + k_n + l] = float(np.clip(f_want, lower[l_n + k_n + l],
                                             upper[l_n + k_n + l]))
        x[l_n:l_n + k_n] = lower[l_n:l_n + k_n]
        return x

    if n_var == 0:
        qt_sol = np.zeros(0)
        x = np.zeros(0)
    else:
        scp = SmoothConvexProgram(objective=objective, constraints=constraints,
                                  lower=lower, upper=upper, x0=x0)
        report = solve_smooth(scp, tol=tol)
        if report.status == "optimal":
            x = report.x
        elif pin_q is not None or pin_f is not None:
            x = best_effort()
        else:
            raise Infeasible("power/compute allocation program is infeasible")
        qt_sol = np.clip(x[:l_n], lower[:l_n], upper[:l_n])

    q = np.zeros(l_n)
    for l in range(l_n):
        q[l] = q_from_qtilde(qt_sol[l], slope[l])
        if q[l] > sc.q_max * (1 + 1e-6):
            raise Infeasible(f"space user {l} power {q[l]:.3g} exceeds its cap")
        q[l] = min(q[l], sc.q_max)

    f_gro = np.zeros((k_n, m_n))
    f_sat_g = np.zeros((k_n, n_n))
    f_sat_s = np.zeros((l_n, n_n))
    for k in range(k_n):
        kind, node, _ = gue_node[k]
        if kind == "bs":
            f_gro[k, node] = x[l_n + k]
        else:
            f_sat_g[k, node] = x[l_n + k]
    for l in range(l_n):
        f_sat_s[l, sue_node[l]] = x[l_n + k_n + l]
    return q, f_gro, f_sat_g, f_sat_s


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def _resource_step(instance, decision, bf, p_prev, q_prev, f_sat_s_prev):
    """Compute splits, then powers, then the joint convex refinement."""
    sc = instance.scenario
    alpha, beta, gamma = decision
    k_n, l_n, m_n, n_n = sc.n_gue, sc.n_sue, sc.n_bs, sc.n_sat

    # Reserve satellite capacity for the space users currently parked there.
    sue_reserved = np.zeros(n_n)
    for l in range(l_n):
        n = np.flatnonzero(gamma[l] > 0.5)
        if n.size:
            prop = instance.dist_sue_sat_m[l, n[0]] / sc.light_speed
            min_f = instance.tasks_sue[l].cycles / max(sc.z_sue - prop, 1e-6)
            sue_reserved[n[0]] += min_f

    # Per-user line search over the transmission/compute time split.
    f_gro = np.zeros((k_n, m_n))
    f_sat_g = np.zeros((k_n, n_n))
    desired = np.zeros(k_n)
    for k in range(k_n):
        task = instance.tasks_gue[k]
        m = np.flatnonzero(alpha[k] > 0.5)
        if m.size:
            m = int(m[0])
            gains = np.abs(instance.h_bs[m] @ bf.w[k, m].conj()) ** 2
            idx = instance.orders_bs[m].interferers(k)
            interference = float(np.dot(p_prev[idx], gains[idx]))
            res = _transmission_budget_search(
                task.d, task.cycles, gains[k], interference, sc.noise_bs,
                sc.b1, sc.z_gue, sc.tau_gro, sc.f_cap_bs, sc.p_max, sc.rho_gue)
            if res is None:
                f_gro[k, m] = sc.f_cap_bs
            else:
                f_gro[k, m] = res[1]
            desired[k] = f_gro[k, m]
        else:
            n = int(np.flatnonzero(beta[k] > 0.5)[0])
            gains = np.abs(instance.g_sat[n] @ bf.v[k, n].conj()) ** 2
            idx = instance.orders_sat[n].interferers(k)
            interference = float(np.dot(p_prev[idx], gains[idx]))
            prop = instance.dist_gue_sat_m[k, n] / sc.light_speed
            res = _transmission_budget_search(
                task.d, task.cycles, gains[k], interference,
                instance.delta2_sq, sc.b2, sc.z_gue - prop, sc.tau_sat,
                sc.f_cap_sat, sc.p_max, sc.rho_gue)
            if res is None:
                f_sat_g[k, n] = sc.f_cap_sat
            else:
                f_sat_g[k, n] = res[1]
            desired[k] = f_sat_g[k, n]

    # Scale down within each node's remaining capacity.
    for m in range(m_n):
        members = np.flatnonzero(alpha[:, m] > 0.5)
        total = f_gro[members, m].sum()
        if total > sc.f_cap_bs:
            f_gro[members, m] *= sc.f_cap_bs / total
    for n in range(n_n):
        members = np.flatnonzero(beta[:, n] > 0.5)
        avail = max(sc.f_cap_sat - sue_reserved[n], 0.0)
        total = f_sat_g[members, n].sum()
        if total > avail:
            if avail <= 0:
                raise Infeasible(f"satellite {n} has no capacity left for ground tasks")
            f_sat_g[members, n] *= avail / total

    p = gue_power_closed_form(instance, decision, bf, f_gro, f_sat_g,
                              p_init=p_prev.copy())
    q, f_gro2, f_sat_g2, f_sat_s = sue_power_and_compute(
        instance, decision, bf, p)
    return p, q, f_gro2, f_sat_g2, f_sat_s


def _initial_state(instance: NetworkInstance):
    sc = instance.scenario
    k_n, l_n, m_n, n_n = sc.n_gue, sc.n_sue, sc.n_bs, sc.n_sat
    p = np.full(k_n, sc.p_max / 2.0)
    q = np.full(l_n, sc.q_max / 2.0)
    f_gro = np.full((k_n, m_n), sc.f_cap_bs / max(k_n, 1))
    share = sc.f_cap_sat / max(k_n + l_n, 1)
    f_sat_g = np.full((k_n, n_n), share)
    f_sat_s = np.full((l_n, n_n), share)

    w = np.zeros((k_n, m_n, sc.n_ant_bs), dtype=complex)
    v = np.zeros((k_n, n_n, sc.n_ant_sat), dtype=complex)
    for m in range(m_n):
        for k in range(k_n):
            w[k, m] = max_sinr_receiver(k, instance.h_bs[m], p,
                                        instance.orders_bs[m], sc.noise_bs)
    for n in range(n_n):
        for k in range(k_n):
            v[k, n] = max_sinr_receiver(k, instance.g_sat[n], p,
                                        instance.orders_sat[n],
                                        instance.delta2_sq)
    return p, q, f_gro, f_sat_g, f_sat_s, Beamformers(w=w, v=v)


def run_algorithm1(instance: NetworkInstance, scenario=None,
                   max_iter: int = 30, tol: float = 1e-4,
                   beamforming_method: str = "eigen"):
    """Alternating optimization driver.

    Starts from half-power, equal-share compute, and max-SINR receivers;
    cycles selection -> beamforming -> power/compute until the objective's
    relative change drops below `tol`.  An iterate is accepted only if it
    is feasible and does not increase the objective; on an increase the
    previous plan is kept and the run declared converged, which enforces
    the monotone-descent guarantee as a runtime property.
    """
    sc = scenario or instance.scenario
    p, q, f_gro, f_sat_g, f_sat_s, bf = _initial_state(instance)

    trace = IterationTrace()
    best = None  # (plan, report)
    infeasible_reasons: list[str] = []

    for it in range(max_iter):
        t0 = time.perf_counter()
        try:
            tables = pair_tables(instance, bf, p, q)
            relaxed = solve_offload_relaxed(instance, tables)
            binary = map_to_binary(relaxed)
            decision = repair_capacity(binary, instance, relaxed, tables)
            bf_new, diag = sca_beamforming(instance, decision, p,
                                           method=beamforming_method)
            p_new, q_new, f_gro_n, f_sat_g_n, f_sat_s_n = _resource_step(
                instance, decision, bf_new, p, q, f_sat_s)
        except (Infeasible, IrreparableCapacity) as exc:
            if best is not None:
                break
            infeasible_reasons.append(str(exc))
            # Re-seed powers at full budget and retry once more.
            p = np.full(sc.n_gue, sc.p_max)
            q = np.full(sc.n_sue, sc.q_max)
            continue

        plan = Plan(alpha=decision[0], beta=decision[1], gamma=decision[2],
                    beamformers=bf_new, p=p_new, q=q_new, f_gro=f_gro_n,
                    f_sat_g=f_sat_g_n, f_sat_s=f_sat_s_n)
        violations = check_feasibility(instance, plan, sc)
        if violations:
            if best is not None:
                break
            infeasible_reasons = violations
            bf, p, q, f_gro, f_sat_g, f_sat_s = (bf_new, p_new, q_new,
                                                 f_gro_n, f_sat_g_n, f_sat_s_n)
            continue

        report = evaluate_plan(instance, plan, sc)
        if best is not None and report.xi > best[1].xi * (1 + 1e-6):
            break  # keep the previous plan: monotone descent safeguard
        accepted_same = (best is not None
                         and abs(report.xi - best[1].xi)
                         <= tol * max(best[1].xi, 1e-30))
        best = (plan, report)
        trace.xi.append(report.xi)
        trace.statuses.append("ok")
        trace.rank_one_ratios.append(diag["rank_one_ratios"])
        trace.wallclock.append(time.perf_counter() - t0)
        bf, p, q, f_gro, f_sat_g, f_sat_s = (bf_new, p_new, q_new,
                                             f_gro_n, f_sat_g_n, f_sat_s_n)
        if accepted_same:
            break

    if best is None:
        raise ScenarioInfeasible("no feasible plan found by the alternation",
                                 violations=infeasible_reasons)
    return best[0], best[1], trace
