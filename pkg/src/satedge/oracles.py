"""Independent reference implementations ("oracles") used by the CLI
self-checks and the test suite: a power-series Bessel evaluator, a grid
search for the transmit-power update, the closed-form max-SINR receiver
comparison, and exhaustive enumeration of tiny selection problems."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .channel import beam_gain
from .instance import sample_instance
from .linkrate import max_sinr_receiver
from .optimizer import (_binary_objective, bnb_offload, gue_power_closed_form,
                        map_to_binary, pair_tables, repair_capacity,
                        sca_beamforming, solve_offload_relaxed, _offload_lp)
from .scenario import from_overrides


# ---------------------------------------------------------------------------
# Bessel series oracle
# ---------------------------------------------------------------------------

def bessel_j_series(nu: int, x: float, terms: int = 40) -> float:
    """Ascending power series for J_nu(x), accurate for |x| <= 12."""
    total = 0.0
    for m in range(terms):
        total += ((-1.0) ** m / (math.factorial(m) * math.factorial(m + nu))
                  * (x / 2.0) ** (2 * m + nu))
    return total


def check_bessel(n_points: int = 200) -> list:
    """beam_gain against the series oracle plus limit/monotonicity facts."""
    failures = []
    eps3db = math.radians(0.4)
    b_max = 10 ** 1.4
    eps = np.linspace(0.0, 3.0 * eps3db, n_points)
    got = beam_gain(eps, eps3db, b_max)
    for e, g in zip(eps, got):
        u = 2.07123 * math.sin(e) / math.sin(eps3db)
        if u < 1e-8:
            want = b_max
        else:
            bracket = (bessel_j_series(1, u) / (2 * u)
                       + 36.0 * bessel_j_series(3, u) / u ** 3)
            want = b_max * bracket ** 3
        if abs(g - want) > 1e-10 * max(abs(want), 1.0):
            failures.append(f"beam gain mismatch at eps={e:.6f}: {g} vs {want}")
    if abs(got[0] - b_max) > 1e-9 * b_max:
        failures.append(f"boresight gain {got[0]} != b_max {b_max}")
    inside = got[eps <= eps3db]
    if np.any(np.diff(inside) > 1e-12):
        failures.append("gain is not nonincreasing inside the 3 dB cone")
    return failures


# ---------------------------------------------------------------------------
# Power grid-search oracle
# ---------------------------------------------------------------------------

def _single_user_instance(rng, on_bs: bool):
    ov = {"k": 1, "l": 0, "m": 1, "n": 1,
          "seed": int(rng.integers(0, 2**31))}
    sc = from_overrides(ov)
    instance = sample_instance(np.random.default_rng(sc.seed), sc)
    alpha = np.array([[1.0 if on_bs else 0.0]])
    beta = np.array([[0.0 if on_bs else 1.0]])
    gamma = np.zeros((0, 1))
    return instance, (alpha, beta, gamma)


def check_power(n_cases: int = 200, seed: int = 2024,
                grid_points: int = 10_000) -> list:
    """Closed-form power vs constrained grid search on 1-user subinstances."""
    failures = []
    rng = np.random.default_rng(seed)
    for case in range(n_cases):
        on_bs = bool(case % 2)
        instance, decision = _single_user_instance(rng, on_bs)
        sc = instance.scenario
        bf, _ = sca_beamforming(instance, decision, np.array([sc.p_max / 2]))
        task = instance.tasks_gue[0]
        # A compute split that leaves roughly half the deadline for
        # transmission.
        prop = (0.0 if on_bs else instance.dist_gue_sat_m[0, 0] / sc.light_speed)
        f_val = task.cycles / (0.5 * (sc.z_gue - prop))
        f_gro = np.array([[f_val if on_bs else 0.0]])
        f_sat_g = np.array([[0.0 if on_bs else f_val]])
        p = gue_power_closed_form(instance, decision, bf, f_gro, f_sat_g)

        if on_bs:
            gain = abs(np.vdot(bf.w[0, 0], instance.h_bs[0][0])) ** 2
            noise, bandwidth = sc.noise_bs, sc.b1
        else:
            gain = abs(np.vdot(bf.v[0, 0], instance.g_sat[0][0])) ** 2
            noise, bandwidth = instance.delta2_sq, sc.b2
        grid = np.linspace(sc.p_max / grid_points, sc.p_max, grid_points)
        rate = bandwidth * np.log2(1.0 + grid * gain / noise)
        t_total = task.d / rate + task.cycles / f_val + prop
        feasible = t_total <= sc.z_gue + 1e-12
        if not np.any(feasible):
            best = sc.p_max  # clamp case
        else:
            # Transmission energy is increasing in p: smallest feasible wins.
            best = float(grid[np.argmax(feasible)])
        step = sc.p_max / grid_points
        if abs(p[0] - best) > step + 1e-12:
            failures.append(
                f"case {case}: closed form {p[0]:.6g} vs grid {best:.6g} "
                f"(step {step:.2g})")
        if p[0] > sc.p_max + 1e-15:
            failures.append(f"case {case}: power exceeds the cap")
    return failures


# ---------------------------------------------------------------------------
# Beamforming oracle
# ---------------------------------------------------------------------------

def check_beamforming(n_instances: int = 50, seed: int = 7,
                      method: str = "eigen", rel_tol: float = 1e-3) -> list:
    """SCA beamformer SINRs vs the closed-form max-SINR receiver."""
    failures = []
    rng = np.random.default_rng(seed)
    for i in range(n_instances):
        ov = {"k": 4, "l": 0, "m": 1, "n": 1,
              "seed": int(rng.integers(0, 2**31))}
        sc = from_overrides(ov)
        instance = sample_instance(np.random.default_rng(sc.seed), sc)
        # Split users between the BS and the satellite.
        alpha = np.zeros((4, 1))
        beta = np.zeros((4, 1))
        for k in range(4):
            (alpha if k % 2 == 0 else beta)[k, 0] = 1.0
        decision = (alpha, beta, np.zeros((0, 1)))
        p = rng.uniform(0.1 * sc.p_max, sc.p_max, size=4)
        bf, diag = sca_beamforming(instance, decision, p, method=method)
        for (kind, k, node), sinr in diag["sinr"].items():
            if kind == "bs":
                channels, order, noise = (instance.h_bs[node],
                                          instance.orders_bs[node], sc.noise_bs)
            else:
                channels, order, noise = (instance.g_sat[node],
                                          instance.orders_sat[node],
                                          instance.delta2_sq)
            w_star = max_sinr_receiver(k, channels, p, order, noise)
            gains = np.abs(channels @ w_star.conj()) ** 2
            idx = order.interferers(k)
            oracle = p[k] * gains[k] / (float(np.dot(p[idx], gains[idx])) + noise)
            if abs(sinr - oracle) > rel_tol * oracle:
                failures.append(
                    f"instance {i} user {k} ({kind}): SINR {sinr:.6g} vs "
                    f"oracle {oracle:.6g}")
        for ratio in diag["rank_one_ratios"]:
            if ratio < 0.99:
                failures.append(f"instance {i}: rank-one ratio {ratio:.4f}")
    return failures


# ---------------------------------------------------------------------------
# Offloading enumeration oracle
# ---------------------------------------------------------------------------

def enumerate_selection(instance, tables):
    """Exhaustive binary optimum of the selection under the pair tables."""
    sc = instance.scenario
    k_n, l_n, m_n, n_n = sc.n_gue, sc.n_sue, sc.n_bs, sc.n_sat
    gue_opts = []
    for k in range(k_n):
        opts = ([("bs", m) for m in range(m_n) if tables["usable_gue_bs"][k, m]]
                + [("sat", n) for n in range(n_n) if tables["usable_gue_sat"][k, n]])
        gue_opts.append(opts)
    sue_opts = [[n for n in range(n_n) if tables["usable_sue_sat"][l, n]]
                for l in range(l_n)]
    best = (np.inf, None)
    for combo_g in itertools.product(*gue_opts) if k_n else [()]:
        for combo_s in itertools.product(*sue_opts) if l_n else [()]:
            alpha = np.zeros((k_n, m_n))
            beta = np.zeros((k_n, n_n))
            gamma = np.zeros((l_n, n_n))
            for k, (where, node) in enumerate(combo_g):
                (alpha if where == "bs" else beta)[k, node] = 1.0
            for l, n in enumerate(combo_s):
                gamma[l, n] = 1.0
            obj = _binary_objective(instance, tables, alpha, beta, gamma)
            if obj < best[0]:
                best = (obj, (alpha, beta, gamma))
    return best


def _tiny_instance(rng):
    ov = {"k": int(rng.integers(1, 4)), "l": int(rng.integers(0, 3)),
          "m": int(rng.integers(1, 3)), "n": int(rng.integers(1, 3)),
          "n_ant_bs": 4, "n_ant_sat": 4,
          "seed": int(rng.integers(0, 2**31))}
    sc = from_overrides(ov)
    return sample_instance(np.random.default_rng(sc.seed), sc)


def check_offload(n_instances: int = 50, seed: int = 11) -> list:
    """LP lower bound, mapped-solution quality, and exact-search agreement
    on tiny instances."""
    failures = []
    rng = np.random.default_rng(seed)
    within = 0
    total = 0
    for i in range(n_instances):
        instance = _tiny_instance(rng)
        sc = instance.scenario
        p = np.full(sc.n_gue, sc.p_max / 2)
        q = np.full(sc.n_sue, sc.q_max / 2)
        from .baselines import _all_max_sinr
        bf = _all_max_sinr(instance, p)
        tables = pair_tables(instance, bf, p, q)
        exact_obj, exact = enumerate_selection(instance, tables)
        _, lp_obj = _offload_lp(instance, tables, with_delay_rows=False)
        if exact is None:
            continue
        total += 1
        if lp_obj > exact_obj + 1e-9 * max(exact_obj, 1.0):
            failures.append(
                f"instance {i}: LP bound {lp_obj:.6g} above exact {exact_obj:.6g}")
        bnb = bnb_offload(instance, tables)
        bnb_obj = _binary_objective(instance, tables, *bnb)
        if abs(bnb_obj - exact_obj) > 1e-9 * max(exact_obj, 1.0):
            failures.append(
                f"instance {i}: exact-search objective {bnb_obj:.6g} "
                f"!= enumeration {exact_obj:.6g}")
        relaxed = solve_offload_relaxed(instance, tables)
        mapped = repair_capacity(map_to_binary(relaxed), instance, relaxed,
                                 tables)
        mapped_obj = _binary_objective(instance, tables, *mapped)
        if np.isfinite(mapped_obj) and mapped_obj <= 1.10 * exact_obj + 1e-12:
            within += 1
    if total and within < 0.9 * total:
        failures.append(
            f"mapped solution within 10% of optimum on only {within}/{total}")
    return failures


ORACLE_CHECKS = {
    "bessel": check_bessel,
    "power": check_power,
    "beamforming": check_beamforming,
    "offload": check_offload,
}
