"""Comparison algorithms: each freezes one block of the alternating
optimizer (powers, beamformers, selection, or compute splits) and
optimizes the rest with the same subroutines."""

from __future__ import annotations

import numpy as np

from .costmodel import Plan, check_feasibility, evaluate_plan
from .errors import Infeasible, IrreparableCapacity, ScenarioInfeasible, ZfInfeasible
from .instance import NetworkInstance
from .linkrate import Beamformers, max_sinr_receiver
from .optimizer import (map_to_binary, pair_tables, repair_capacity,
                        gue_power_closed_form, solve_offload_relaxed,
                        sue_power_and_compute, sca_beamforming,
                        _resource_step)

BASELINE_KINDS = ("FTP", "ZFBF", "RO", "ACR", "HCO")


# ---------------------------------------------------------------------------
# Shared driver
# ---------------------------------------------------------------------------

def _finalize(instance, decision, bf, p, q, f_gro, f_sat_g, f_sat_s):
    sc = instance.scenario
    plan = Plan(alpha=decision[0], beta=decision[1], gamma=decision[2],
                beamformers=bf, p=p, q=q, f_gro=f_gro, f_sat_g=f_sat_g,
                f_sat_s=f_sat_s)
    report = evaluate_plan(instance, plan, sc)
    return plan, report


def _select(instance, bf, p, q):
    """One offloading-selection pass at fixed remaining blocks."""
    tables = pair_tables(instance, bf, p, q)
    relaxed = solve_offload_relaxed(instance, tables)
    binary = map_to_binary(relaxed)
    return repair_capacity(binary, instance, relaxed, tables)


def _ao_loop(instance, *, pin_p=None, pin_q=None, pin_f=None,
             beamformer="sca", decision_override=None, max_iter=10,
             tol=1e-4, rng=None):
    """Alternating loop with optional frozen blocks.

    pin_p / pin_q freeze transmit powers; pin_f = (f_gro, f_sat_g, f_sat_s)
    freezes compute splits; beamformer 'zf' swaps the SCA block for
    zero-forcing receivers; decision_override freezes the selection.
    Keeps the best feasible iterate; raises ScenarioInfeasible if none.
    """
    sc = instance.scenario
    p = pin_p.copy() if pin_p is not None else np.full(sc.n_gue, sc.p_max / 2.0)
    q = pin_q.copy() if pin_q is not None else np.full(sc.n_sue, sc.q_max / 2.0)
    f_sat_s = np.full((sc.n_sue, sc.n_sat),
                      sc.f_cap_sat / max(sc.n_gue + sc.n_sue, 1))

    bf = _all_max_sinr(instance, p)
    best = None
    reasons = []
    for _ in range(max_iter):
        try:
            decision = (decision_override if decision_override is not None
                        else _select(instance, bf, p, q))
            if beamformer == "zf":
                bf_new = zf_beamformers(instance, decision, p)
            else:
                bf_new, _ = sca_beamforming(instance, decision, p)

            if pin_f is not None:
                f_gro, f_sat_g, f_sat_s_n = (a.copy() for a in pin_f)
                if pin_p is None:
                    p_new = gue_power_closed_form(instance, decision, bf_new,
                                                  f_gro, f_sat_g)
                else:
                    p_new = pin_p.copy()
                q_new, _, _, _ = sue_power_and_compute(
                    instance, decision, bf_new, p_new,
                    pin_q=pin_q if pin_q is not None else None,
                    pin_f=pin_f)
                if pin_q is not None:
                    q_new = pin_q.copy()
            elif pin_p is not None or pin_q is not None:
                p_new = pin_p.copy() if pin_p is not None else None
                if p_new is None:
                    # Powers free, only q pinned: run the standard resource
                    # step, then re-solve compute with q pinned.
                    p_new, _, f_gro, f_sat_g, f_sat_s_n = _resource_step(
                        instance, decision, bf_new, p, q, f_sat_s)
                q_new, f_gro, f_sat_g, f_sat_s_n = sue_power_and_compute(
                    instance, decision, bf_new, p_new,
                    pin_q=pin_q if pin_q is not None else None)
                if pin_q is not None:
                    q_new = pin_q.copy()
            else:
                p_new, q_new, f_gro, f_sat_g, f_sat_s_n = _resource_step(
                    instance, decision, bf_new, p, q, f_sat_s)
        except (Infeasible, IrreparableCapacity) as exc:
            if best is not None:
                break
            reasons.append(str(exc))
            p = p if pin_p is not None else np.full(sc.n_gue, sc.p_max)
            q = q if pin_q is not None else np.full(sc.n_sue, sc.q_max)
            continue

        plan, report = _finalize(instance, decision, bf_new, p_new, q_new,
                                 f_gro, f_sat_g, f_sat_s_n)
        violations = check_feasibility(instance, plan, sc)
        if violations:
            if best is not None:
                break
            reasons = violations
            bf, p, q, f_sat_s = bf_new, p_new, q_new, f_sat_s_n
            continue
        if best is not None and report.xi > best[1].xi * (1 + 1e-6):
            break
        stalled = (best is not None
                   and abs(report.xi - best[1].xi) <= tol * max(best[1].xi, 1e-30))
        best = (plan, report)
        bf, p, q, f_sat_s = bf_new, p_new, q_new, f_sat_s_n
        if stalled or decision_override is not None and pin_f is not None:
            break

    if best is None:
        raise ScenarioInfeasible("baseline found no feasible plan",
                                 violations=reasons)
    return best


def _all_max_sinr(instance, p):
    sc = instance.scenario
    w = np.zeros((sc.n_gue, sc.n_bs, sc.n_ant_bs), dtype=complex)
    v = np.zeros((sc.n_gue, sc.n_sat, sc.n_ant_sat), dtype=complex)
    for m in range(sc.n_bs):
        for k in range(sc.n_gue):
            w[k, m] = max_sinr_receiver(k, instance.h_bs[m], p,
                                        instance.orders_bs[m], sc.noise_bs)
    for n in range(sc.n_sat):
        for k in range(sc.n_gue):
            v[k, n] = max_sinr_receiver(k, instance.g_sat[n], p,
                                        instance.orders_sat[n],
                                        instance.delta2_sq)
    return Beamformers(w=w, v=v)


# ---------------------------------------------------------------------------
# Zero-forcing receivers
# ---------------------------------------------------------------------------

def zf_receiver(k, channels, order, ridge: float = 0.0) -> np.ndarray:
    """Unit receive vector nulling all later-decoded users' channels.

    Exact nulling projects the user's channel onto the orthogonal
    complement of the interferers' span; with interferers >= antennas that
    is impossible and a ridge-regularized least-squares null is used
    instead (callers decide whether to flag it).
    """
    idx = order.interferers(k)
    h_k = channels[k]
    n_ant = channels.shape[1]
    if idx.size == 0:
        w = h_k
    elif idx.size < n_ant and ridge == 0.0:
        interf = channels[idx]  # (J, n_ant)
        # Orthonormal basis of the interference span, then project out.
        q_basis, _ = np.linalg.qr(interf.T)
        w = h_k - q_basis @ (q_basis.conj().T @ h_k)
    else:
        interf = channels[idx]
        reg = ridge if ridge > 0 else 1e-6 * float(np.mean(np.abs(interf) ** 2))
        cov = np.zeros((n_ant, n_ant), dtype=complex)
        for i in range(idx.size):
            cov += np.outer(interf[i], interf[i].conj())
        w = np.linalg.solve(cov + reg * np.eye(n_ant), h_k)
    norm = np.linalg.norm(w)
    if norm < 1e-15:
        raise ZfInfeasible(f"user {k}: channel lies in the interference span")
    return w / norm


def zf_beamformers(instance, decision, p) -> Beamformers:
    """Zero-forcing receivers on selected pairs, max-SINR elsewhere."""
    sc = instance.scenario
    alpha, beta, _ = decision
    bf = _all_max_sinr(instance, p)
    w, v = bf.w.copy(), bf.v.copy()
    for m in range(sc.n_bs):
        for k in range(sc.n_gue):
            if alpha[k, m] > 0.5:
                w[k, m] = zf_receiver(k, instance.h_bs[m], instance.orders_bs[m])
    for n in range(sc.n_sat):
        for k in range(sc.n_gue):
            if beta[k, n] > 0.5:
                v[k, n] = zf_receiver(k, instance.g_sat[n], instance.orders_sat[n])
    return Beamformers(w=w, v=v)


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

def run_ftp(instance: NetworkInstance, scenario=None):
    """Fixed transmit power: p and q pinned at half budget."""
    sc = scenario or instance.scenario
    return _ao_loop(instance,
                    pin_p=np.full(sc.n_gue, sc.p_max / 2.0),
                    pin_q=np.full(sc.n_sue, sc.q_max / 2.0))


def run_zfbf(instance: NetworkInstance, scenario=None):
    """Zero-forcing receive beamforming instead of the SCA block."""
    return _ao_loop(instance, beamformer="zf")


def random_decision(rng: np.random.Generator, instance: NetworkInstance):
    """Uniformly random single selection per user."""
    sc = instance.scenario
    alpha = np.zeros((sc.n_gue, sc.n_bs))
    beta = np.zeros((sc.n_gue, sc.n_sat))
    gamma = np.zeros((sc.n_sue, sc.n_sat))
    for k in range(sc.n_gue):
        j = int(rng.integers(0, sc.n_bs + sc.n_sat))
        if j < sc.n_bs:
            alpha[k, j] = 1.0
        else:
            beta[k, j - sc.n_bs] = 1.0
    for l in range(sc.n_sue):
        gamma[l, int(rng.integers(0, sc.n_sat))] = 1.0
    return alpha, beta, gamma


def run_ro(rng: np.random.Generator, instance: NetworkInstance, scenario=None):
    """Random offloading selection; all remaining blocks optimized."""
    decision = random_decision(rng, instance)
    return _ao_loop(instance, decision_override=decision)


def run_acr(instance: NetworkInstance, scenario=None):
    """Average compute: every allocation pinned at its equal share."""
    sc = scenario or instance.scenario
    f_gro = np.full((sc.n_gue, sc.n_bs), sc.f_cap_bs / max(sc.n_gue, 1))
    share = sc.f_cap_sat / max(sc.n_gue + sc.n_sue, 1)
    f_sat_g = np.full((sc.n_gue, sc.n_sat), share)
    f_sat_s = np.full((sc.n_sue, sc.n_sat), share)
    return _ao_loop(instance, pin_f=(f_gro, f_sat_g, f_sat_s))


# ---------------------------------------------------------------------------
# Heuristic constrained swarm search over the selection encoding
# ---------------------------------------------------------------------------

def _selection_energy(instance, tables, choice_g, choice_s, penalty):
    """Penalized energy of an integer selection encoding.

    choice_g[k] in [0, M+N): BS index or M+satellite index;
    choice_s[l] in [0, N).  Unusable pairs and capacity overshoot incur
    the penalty weight per violation.
    """
    sc = instance.scenario
    total = 0.0
    viol = 0.0
    bs_load = np.zeros(sc.n_bs)
    sat_load = np.zeros(sc.n_sat)
    for k in range(sc.n_gue):
        c = choice_g[k]
        if c < sc.n_bs:
            if tables["usable_gue_bs"][k, c]:
                total += sc.rho_gue * tables["e_gue_bs"][k, c]
                bs_load[c] += tables["f_gue_bs"][k, c]
            else:
                viol += 1.0
        else:
            n = c - sc.n_bs
            if tables["usable_gue_sat"][k, n]:
                total += sc.rho_gue * tables["e_gue_sat"][k, n]
                sat_load[n] += tables["f_gue_sat"][k, n]
            else:
                viol += 1.0
    for l in range(sc.n_sue):
        n = choice_s[l]
        if tables["usable_sue_sat"][l, n]:
            total += sc.rho_sue * tables["e_sue_sat"][l, n]
            sat_load[n] += tables["f_sue_sat"][l, n]
        else:
            viol += 1.0
    viol += float(np.sum(np.maximum(bs_load / sc.f_cap_bs - 1.0, 0.0)))
    viol += float(np.sum(np.maximum(sat_load / sc.f_cap_sat - 1.0, 0.0)))
    return total + penalty * viol, viol == 0.0


def run_hco(rng: np.random.Generator, instance: NetworkInstance, scenario=None,
            swarm: int = 50, iters: int = 100, inertia: float = 0.7,
            cognitive: float = 1.5, social: float = 1.5):
    """Heuristic computing offloading: particle swarm over the selection.

    Particles live in a continuous score space over each user's options;
    a particle decodes to the argmax option per user.  Fitness is the
    pair-table energy plus a penalty for constraint violations, evaluated
    at half-power max-SINR receivers.  The best feasible particle's
    selection is then handed to the full block optimization.
    """
    sc = scenario or instance.scenario
    p0 = np.full(sc.n_gue, sc.p_max / 2.0)
    q0 = np.full(sc.n_sue, sc.q_max / 2.0)
    bf = _all_max_sinr(instance, p0)
    tables = pair_tables(instance, bf, p0, q0)

    opts_g = sc.n_bs + sc.n_sat
    opts_s = sc.n_sat
    dim = sc.n_gue * opts_g + sc.n_sue * opts_s

    typical = [tables["e_gue_bs"][tables["usable_gue_bs"]],
               tables["e_gue_sat"][tables["usable_gue_sat"]],
               tables["e_sue_sat"][tables["usable_sue_sat"]]]
    typical = np.concatenate([t for t in typical if t.size])
    penalty = 1e3 * (float(np.mean(typical)) * (sc.n_gue + sc.n_sue)
                     if typical.size else 1.0)

    def decode(x):
        cg = np.zeros(sc.n_gue, dtype=int)
        for k in range(sc.n_gue):
            cg[k] = int(np.argmax(x[k * opts_g:(k + 1) * opts_g]))
        cs = np.zeros(sc.n_sue, dtype=int)
        base = sc.n_gue * opts_g
        for l in range(sc.n_sue):
            cs[l] = int(np.argmax(x[base + l * opts_s: base + (l + 1) * opts_s]))
        return cg, cs

    pos = rng.uniform(-1.0, 1.0, size=(swarm, dim))
    vel = rng.uniform(-0.5, 0.5, size=(swarm, dim))
    pbest = pos.copy()
    pbest_fit = np.full(swarm, np.inf)
    gbest = None
    gbest_fit = np.inf
    best_feasible = None
    best_feasible_fit = np.inf

    for it in range(iters + 1):
        for s in range(swarm):
            cg, cs = decode(pos[s])
            fit, feasible = _selection_energy(instance, tables, cg, cs, penalty)
            if fit < pbest_fit[s]:
                pbest_fit[s] = fit
                pbest[s] = pos[s].copy()
            if fit < gbest_fit:
                gbest_fit = fit
                gbest = pos[s].copy()
            if feasible and fit < best_feasible_fit:
                best_feasible_fit = fit
                best_feasible = (cg.copy(), cs.copy())
        if it == iters:
            break
        r1 = rng.uniform(size=(swarm, dim))
        r2 = rng.uniform(size=(swarm, dim))
        vel = (inertia * vel + cognitive * r1 * (pbest - pos)
               + social * r2 * (gbest - pos))
        pos = pos + vel

    if best_feasible is None:
        raise ScenarioInfeasible("no feasible particle found by the swarm")

    cg, cs = best_feasible
    alpha = np.zeros((sc.n_gue, sc.n_bs))
    beta = np.zeros((sc.n_gue, sc.n_sat))
    gamma = np.zeros((sc.n_sue, sc.n_sat))
    for k in range(sc.n_gue):
        if cg[k] < sc.n_bs:
            alpha[k, cg[k]] = 1.0
        else:
            beta[k, cg[k] - sc.n_bs] = 1.0
    for l in range(sc.n_sue):
        gamma[l, cs[l]] = 1.0
    return _ao_loop(instance, decision_override=(alpha, beta, gamma))
