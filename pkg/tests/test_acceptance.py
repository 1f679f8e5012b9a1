"""End-to-end acceptance gate.

Each test covers one numbered acceptance criterion and prints a single
pass/fail line.  Heavy Monte-Carlo artifacts are shared through
session-scoped fixtures so the whole gate stays within the runtime budget.
"""

import time
from unittest import mock

import numpy as np
import pytest

from conftest import make_instance
from satedge.channel import (assemble_sat_channel, beam_gain, pathloss_db,
                             rain_attenuation)
from satedge.harness import build_experiment, run_experiment
from satedge.instance import sample_instance
from satedge.optimizer import (_initial_state, map_to_binary, pair_tables,
                               q_from_qtilde, qtilde_from_q, repair_capacity,
                               run_algorithm1, sca_beamforming,
                               solve_offload_relaxed, sue_power_and_compute)
from satedge.oracles import check_beamforming, check_offload, check_power
from satedge.scenario import from_overrides

import satedge.optimizer
from satedge import solvers as solvers_mod

BASELINES = ("ftp", "zfbf", "ro", "acr", "hco")


def _criterion(num, name, ok, detail=""):
    line = f"[criterion {num:02d}] {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# Shared Monte-Carlo artifacts
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def default_traces():
    """20 optimizer runs at default scale; traces plus total wall time."""
    traces = []
    t0 = time.perf_counter()
    for seed in range(20):
        inst = make_instance(seed=seed)
        _, _, trace = run_algorithm1(inst)
        traces.append(trace)
    return traces, time.perf_counter() - t0


@pytest.fixture(scope="session")
def baseline_rows(tmp_path_factory):
    """50 trials x 5 deadlines x 6 algorithms through the harness."""
    spec = build_experiment("baseline_compare", trials=50)
    out = tmp_path_factory.mktemp("accept_baseline")
    return spec, run_experiment(spec, from_overrides({}), out, master_seed=7)


def _grouped(spec, rows):
    """rows -> {(value, algorithm): [xi per trial in order]}."""
    n_alg = len(spec.algorithms)
    per_point = spec.trials * n_alg
    table = {}
    for i, r in enumerate(rows):
        trial = (i % per_point) // n_alg
        table.setdefault((r.value, r.algorithm), []).append((trial, r))
    return {k: [r for _, r in sorted(v)] for k, v in table.items()}


@pytest.fixture(scope="session")
def trend_rows(tmp_path_factory):
    out = tmp_path_factory.mktemp("accept_trends")
    results = {}
    for exp in ("users_sweep", "bandwidth_antenna_sweep", "node_sweep",
                "datasize_capacity_sweep"):
        spec = build_experiment(exp, trials=30)
        results[exp] = (spec, run_experiment(spec, from_overrides({}),
                                             out / exp, master_seed=7))
    return results


def _curve(spec, rows, axis, variant="base"):
    """Mean objective per swept value, ordered by value."""
    means = {}
    for r in rows:
        if r.axis == axis and r.variant == variant and r.feasible:
            means.setdefault(r.value, []).append(r.xi)
    values = sorted(means)
    return values, [float(np.mean(means[v])) for v in values]


def _mostly_monotone(curve, increasing, slack=1):
    diffs = np.diff(curve)
    bad = int(np.sum(diffs < 0)) if increasing else int(np.sum(diffs > 0))
    return bad <= slack


# ---------------------------------------------------------------------------
# 1-2: convergence
# ---------------------------------------------------------------------------

def test_criterion_01_monotone_convergence(default_traces):
    traces, elapsed = default_traces
    ok = all(
        all(b <= a * (1 + 1e-6) for a, b in zip(t.xi, t.xi[1:]))
        for t in traces)
    ok = ok and elapsed < 300.0
    _criterion(1, "monotone objective over 20 seeds within budget", ok,
               f"total {elapsed:.1f}s")


def test_criterion_02_convergence_speed(default_traces):
    traces, _ = default_traces
    fast = 0
    for t in traces:
        xi = t.xi
        if len(xi) == 1:
            fast += 1
            continue
        for it in range(1, min(len(xi), 10)):
            if abs(xi[it] - xi[it - 1]) < 1e-3 * max(xi[it - 1], 1e-30):
                fast += 1
                break
    _criterion(2, "relative change < 1e-3 within 10 iterations on >= 18/20",
               fast >= 18, f"{fast}/20 seeds")


# ---------------------------------------------------------------------------
# 3: baseline dominance
# ---------------------------------------------------------------------------

def test_criterion_03_baseline_dominance(baseline_rows):
    spec, rows = baseline_rows
    table = _grouped(spec, rows)
    z_values = sorted({r.value for r in rows})

    mean_ok = True
    detail = []
    dominated = 0
    compared = 0
    for z in z_values:
        ours = table[(z, "alg1")]
        for b in BASELINES:
            theirs = table[(z, b)]
            # Means on the trials where the baseline itself is feasible.
            common = [(o.xi, t.xi) for o, t in zip(ours, theirs)
                      if o.feasible and t.feasible]
            if common:
                mean_us = float(np.mean([c[0] for c in common]))
                mean_them = float(np.mean([c[1] for c in common]))
                if mean_us > mean_them * (1 + 1e-9):
                    mean_ok = False
                    detail.append(f"{b}@{z:g}ms {mean_us:.4f}>{mean_them:.4f}")
            for o, t in zip(ours, theirs):
                compared += 1
                # A baseline that cannot produce a plan is dominated.
                if o.feasible and (not t.feasible
                                   or o.xi <= t.xi * (1 + 1e-9)):
                    dominated += 1
    share = dominated / compared
    ok = mean_ok and share >= 0.95
    _criterion(3, "mean and per-seed dominance over 5 baselines x 5 deadlines",
               ok, f"per-seed {share:.1%}" + ("; " + "; ".join(detail)
                                              if detail else ""))


# ---------------------------------------------------------------------------
# 4: figure trends
# ---------------------------------------------------------------------------

def test_criterion_04a_energy_grows_with_users(trend_rows):
    spec, rows = trend_rows["users_sweep"]
    _, k_curve = _curve(spec, rows, "k")
    _, l_curve = _curve(spec, rows, "l")
    ok = (_mostly_monotone(k_curve, increasing=True)
          and _mostly_monotone(l_curve, increasing=True))
    _criterion(4, "objective increases with either user population", ok,
               f"K curve {np.round(k_curve, 3)}, L curve {np.round(l_curve, 3)}")


def test_criterion_04b_bandwidth_and_antennas(trend_rows):
    spec, rows = trend_rows["bandwidth_antenna_sweep"]
    _, b_curve = _curve(spec, rows, "b_mhz")
    _, a_curve = _curve(spec, rows, "n_ant")
    gain_16_24 = a_curve[0] - a_curve[1]
    gain_24_32 = a_curve[1] - a_curve[2]
    ok = (_mostly_monotone(b_curve, increasing=False)
          and _mostly_monotone(a_curve, increasing=False)
          and gain_16_24 > gain_24_32)
    _criterion(4, "objective falls with bandwidth/antennas, diminishing "
               "antenna returns", ok,
               f"antenna gains {gain_16_24:.4g} > {gain_24_32:.4g}")


def test_criterion_04c_more_nodes_help(trend_rows):
    spec, rows = trend_rows["node_sweep"]
    _, m_curve = _curve(spec, rows, "m")
    _, n_curve = _curve(spec, rows, "n")
    ok = (_mostly_monotone(m_curve, increasing=False)
          and _mostly_monotone(n_curve, increasing=False))
    _criterion(4, "objective falls with extra stations or satellites", ok,
               f"M curve {np.round(m_curve, 3)}, N curve {np.round(n_curve, 3)}")


def test_criterion_04d_datasize_and_capacity(trend_rows):
    spec, rows = trend_rows["datasize_capacity_sweep"]
    scales, base_curve = _curve(spec, rows, "d_scale", "base")
    _, gro_curve = _curve(spec, rows, "d_scale", "fgro2x")
    _, sat_curve = _curve(spec, rows, "d_scale", "fsat2x")
    ok = (_mostly_monotone(base_curve, increasing=True)
          and all(g < s for g, s in zip(gro_curve, sat_curve)))
    _criterion(4, "objective grows with task size; ground capacity doubling "
               "beats satellite capacity doubling", ok,
               f"fgro2x {np.round(gro_curve, 3)} < fsat2x {np.round(sat_curve, 3)}")


# ---------------------------------------------------------------------------
# 5: rank-one recovery
# ---------------------------------------------------------------------------

def test_criterion_05_rank_one_blocks():
    rng = np.random.default_rng(77)
    ratios = []
    while len(ratios) < 100:
        sc = from_overrides({"k": 4, "l": 0, "m": 1, "n": 1,
                             "seed": int(rng.integers(0, 2 ** 31))})
        inst = sample_instance(np.random.default_rng(sc.seed), sc)
        alpha = np.zeros((4, 1))
        beta = np.zeros((4, 1))
        for k in range(4):
            (alpha if k % 2 == 0 else beta)[k, 0] = 1.0
        p = rng.uniform(0.1 * sc.p_max, sc.p_max, size=4)
        _, diag = sca_beamforming(inst, (alpha, beta, np.zeros((0, 1))), p,
                                  method="conic")
        ratios.extend(diag["rank_one_ratios"])
    worst = min(ratios[:100])
    _criterion(5, "rank-one ratio >= 0.99 across 100 relaxed terminations",
               worst >= 0.99, f"worst {worst:.6f} of {len(ratios[:100])}")


# ---------------------------------------------------------------------------
# 6-8: oracle equivalence
# ---------------------------------------------------------------------------

def test_criterion_06_beamforming_oracle():
    failures = check_beamforming(50)
    _criterion(6, "iterative beamformer matches closed-form receiver on 50 "
               "instances", not failures,
               failures[0] if failures else "0 mismatches")


def test_criterion_07_power_oracle():
    failures = check_power(200)
    _criterion(7, "closed-form power matches 10^4-point grid on 200 cases",
               not failures, failures[0] if failures else "0 mismatches")


def test_criterion_08_offload_oracle():
    failures = check_offload(50)
    _criterion(8, "selection LP bound and rounding quality on 50 tiny "
               "instances", not failures,
               failures[0] if failures else "0 mismatches")


# ---------------------------------------------------------------------------
# 9: kernel identities
# ---------------------------------------------------------------------------

def test_criterion_09_kernel_identities():
    checks = []
    checks.append(pathloss_db(1.0) == 128.1)

    import math
    b_max = 10 ** 1.4
    checks.append(abs(beam_gain(0.0, math.radians(0.4), b_max) - b_max)
                  <= 1e-9 * b_max)

    rng = np.random.default_rng(0)
    ok_rt = True
    for _ in range(100):
        q = float(rng.uniform(1e-3, 5.0))
        slope = float(rng.uniform(1.0, 1e10))
        ok_rt &= abs(q_from_qtilde(qtilde_from_q(q, slope), slope) - q) \
            <= 1e-10 * q
    checks.append(ok_rt)

    ok_rc = True
    for _ in range(100):
        rain = rain_attenuation(rng, -2.6, 1.63, 8)
        beams = beam_gain(rng.uniform(0, 0.005, 8), math.radians(0.4), b_max)
        ch = assemble_sat_channel(float(rng.uniform(10, 200)), rain, beams,
                                  float(rng.uniform(0, 1)), 40.0)
        ok_rc &= np.allclose(ch.g, ch.recompose(), rtol=1e-12)
    checks.append(ok_rc)

    checks.append(_gradients_match_finite_differences())
    _criterion(9, "kernel identities (pathloss, boresight, power transform, "
               "recomposition, gradients)", all(checks),
               f"subchecks {['PASS' if c else 'FAIL' for c in checks]}")


def _gradients_match_finite_differences():
    """Capture the smooth program built by the resource-allocation block
    and compare its analytic gradients against central differences."""
    inst = make_instance(k=3, l=2, m=1, n=2, n_ant_bs=4, n_ant_sat=4)
    p, q, _, _, _, bf = _initial_state(inst)
    tables = pair_tables(inst, bf, p, q)
    relaxed = solve_offload_relaxed(inst, tables)
    decision = repair_capacity(map_to_binary(relaxed), inst, relaxed, tables)

    captured = []
    real_solve = solvers_mod.solve_smooth

    def spy(scp, *args, **kwargs):
        captured.append(scp)
        return real_solve(scp, *args, **kwargs)

    with mock.patch.object(satedge.optimizer, "solve_smooth", spy):
        sue_power_and_compute(inst, decision, bf, p)
    assert captured, "no smooth program was built"

    scp = captured[0]
    x0 = scp.x0 if scp.x0 is not None else 0.5 * (
        scp.lower + np.minimum(scp.upper, scp.lower + 1.0))
    x0 = np.clip(np.asarray(x0, float), scp.lower, scp.upper)

    def central(fun, x):
        grad = np.zeros_like(x)
        for i in range(x.size):
            h = 1e-6 * max(1.0, abs(x[i]))
            hi = x.copy()
            lo = x.copy()
            hi[i] += h
            lo[i] -= h
            grad[i] = (fun(hi)[0] - fun(lo)[0]) / (2 * h)
        return grad

    ok = True
    for fun in [scp.objective] + list(scp.constraints):
        ana = np.asarray(fun(x0)[1], float)
        num = central(fun, x0)
        scale = max(float(np.linalg.norm(ana)), 1e-12)
        ok &= bool(np.linalg.norm(num - ana) <= 1e-5 * scale)
    return ok


# ---------------------------------------------------------------------------
# 10: determinism
# ---------------------------------------------------------------------------

def test_criterion_10_byte_identical_outputs(tmp_path):
    cfg = from_overrides({})
    spec = build_experiment("convergence", trials=3)
    run_experiment(spec, cfg, tmp_path / "a", master_seed=11)
    run_experiment(spec, cfg, tmp_path / "b", master_seed=11)
    files = sorted(p.name for p in (tmp_path / "a").iterdir()
                   if not p.name.endswith("_timing.csv"))
    same = all((tmp_path / "a" / f).read_bytes()
               == (tmp_path / "b" / f).read_bytes() for f in files)
    _criterion(10, "reruns with one master seed are byte-identical", same,
               f"{len(files)} files compared")
