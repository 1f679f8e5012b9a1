"""Alternating optimizer blocks: selection, beamforming, power/compute."""

import numpy as np
import pytest

from conftest import make_instance
from satedge.costmodel import check_feasibility, evaluate_plan
from satedge.errors import BudgetExceeded, ZeroPower
from satedge.linkrate import Beamformers
from satedge.optimizer import (RelaxedDecision, _binary_objective,
                               _initial_state, _transmission_budget_search,
                               bnb_offload, gue_power_closed_form,
                               map_to_binary, pair_tables, q_from_qtilde,
                               qtilde_from_q, run_algorithm1, sca_beamforming,
                               solve_offload_relaxed)


@pytest.fixture(scope="module")
def small():
    return make_instance(k=3, l=2, m=1, n=2, n_ant_bs=4, n_ant_sat=4)


@pytest.fixture(scope="module")
def small_tables(small):
    p, q, _, _, _, bf = _initial_state(small)
    return pair_tables(small, bf, p, q), p, q, bf


# ---------------------------------------------------------------------------
# Pair tables
# ---------------------------------------------------------------------------

def test_usable_pairs_sit_exactly_on_the_deadline(small, small_tables):
    tables, _, _, _ = small_tables
    sc = small.scenario
    for kind, z in (("gue_bs", sc.z_gue), ("gue_sat", sc.z_gue),
                    ("sue_sat", sc.z_sue)):
        mask = tables[f"usable_{kind}"]
        assert mask.any()
        # Delay-minimal compute burns the whole residual deadline.
        np.testing.assert_allclose(tables[f"t_{kind}"][mask], z, rtol=1e-9)


def test_unusable_pairs_have_infinite_cost(small, small_tables):
    tables, _, _, _ = small_tables
    for kind in ("gue_bs", "gue_sat", "sue_sat"):
        mask = tables[f"usable_{kind}"]
        assert np.all(np.isinf(tables[f"e_{kind}"][~mask]))
        assert np.all(np.isfinite(tables[f"e_{kind}"][mask]))


# ---------------------------------------------------------------------------
# Selection: relax, round, exact search
# ---------------------------------------------------------------------------

def test_relaxed_rows_sum_to_one(small, small_tables):
    tables, _, _, _ = small_tables
    relaxed = solve_offload_relaxed(small, tables)
    sums = relaxed.alpha.sum(axis=1) + relaxed.beta.sum(axis=1)
    np.testing.assert_allclose(sums, 1.0, atol=1e-7)
    np.testing.assert_allclose(relaxed.gamma.sum(axis=1), 1.0, atol=1e-7)


def test_map_to_binary_picks_largest_fraction():
    relaxed = RelaxedDecision(alpha=np.array([[0.6], [0.1]]),
                              beta=np.array([[0.4, 0.0], [0.2, 0.7]]),
                              gamma=np.array([[0.3, 0.7]]))
    alpha, beta, gamma = map_to_binary(relaxed)
    np.testing.assert_array_equal(alpha, [[1.0], [0.0]])
    np.testing.assert_array_equal(beta, [[0.0, 0.0], [0.0, 1.0]])
    np.testing.assert_array_equal(gamma, [[0.0, 1.0]])


def test_map_to_binary_tie_prefers_ground_station():
    relaxed = RelaxedDecision(alpha=np.array([[0.5]]),
                              beta=np.array([[0.5, 0.0]]),
                              gamma=np.zeros((0, 2)))
    alpha, beta, _ = map_to_binary(relaxed)
    assert alpha[0, 0] == 1.0 and not beta.any()


def test_exact_search_matches_brute_force():
    inst = make_instance(seed=3, k=2, l=1, m=1, n=1, n_ant_bs=4, n_ant_sat=4)
    p, q, _, _, _, bf = _initial_state(inst)
    tables = pair_tables(inst, bf, p, q)
    alpha, beta, gamma = bnb_offload(inst, tables)
    best = _binary_objective(inst, tables, alpha, beta, gamma)

    # Brute force over each ground user's 2 options and the space user's 1.
    lo = np.inf
    for c0 in range(2):
        for c1 in range(2):
            a = np.zeros((2, 1))
            b = np.zeros((2, 1))
            for k, c in enumerate((c0, c1)):
                (a if c == 0 else b)[k, 0] = 1.0
            g = np.ones((1, 1))
            lo = min(lo, _binary_objective(inst, tables, a, b, g))
    assert best == pytest.approx(lo, rel=1e-9)


def test_exact_search_refuses_large_instances(default_instance):
    p, q, _, _, _, bf = _initial_state(default_instance)
    tables = pair_tables(default_instance, bf, p, q)
    with pytest.raises(BudgetExceeded):
        bnb_offload(default_instance, tables)


# ---------------------------------------------------------------------------
# Beamforming
# ---------------------------------------------------------------------------

def test_sca_never_below_matched_filter(small, small_tables):
    tables, p, q, bf = small_tables
    relaxed = solve_offload_relaxed(small, tables)
    decision = map_to_binary(relaxed)
    bf_new, diag = sca_beamforming(small, decision, p)
    assert isinstance(bf_new, Beamformers)
    for trace in diag["traces"].values():
        # trace[0] is the matched-filter baseline; the result never loses.
        assert trace[-1] >= trace[0] * (1 - 1e-9)
        assert all(np.isfinite(t) and t > 0 for t in trace)


def test_sca_conic_route_produces_near_rank_one(small, small_tables):
    tables, p, _, _ = small_tables
    relaxed = solve_offload_relaxed(small, tables)
    decision = map_to_binary(relaxed)
    _, diag = sca_beamforming(small, decision, p, method="conic")
    assert diag["rank_one_ratios"]
    assert all(r >= 0.99 for r in diag["rank_one_ratios"])


# ---------------------------------------------------------------------------
# Power and compute
# ---------------------------------------------------------------------------

def test_power_closed_form_respects_budget_box(small, small_tables):
    tables, p, q, bf = small_tables
    sc = small.scenario
    relaxed = solve_offload_relaxed(small, tables)
    decision = map_to_binary(relaxed)
    f_gro = np.where(tables["f_gue_bs"] > 0, tables["f_gue_bs"] * 1.5,
                     sc.f_cap_bs)
    f_sat_g = np.where(tables["f_gue_sat"] > 0, tables["f_gue_sat"] * 1.5,
                       sc.f_cap_sat)
    p_new = gue_power_closed_form(small, decision, bf, f_gro, f_sat_g)
    assert np.all(p_new > 0) and np.all(p_new <= sc.p_max + 1e-12)


def test_power_clamped_when_deadline_unreachable(small, small_tables):
    tables, p, q, bf = small_tables
    sc = small.scenario
    relaxed = solve_offload_relaxed(small, tables)
    decision = map_to_binary(relaxed)
    # Compute so slow that the residual transmission budget is negative.
    tiny = np.full((sc.n_gue, sc.n_bs), 1.0)
    tiny_sat = np.full((sc.n_gue, sc.n_sat), 1.0)
    p_new = gue_power_closed_form(small, decision, bf, tiny, tiny_sat)
    np.testing.assert_allclose(p_new, sc.p_max)


def test_spectral_efficiency_transform_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(200):
        q = float(rng.uniform(1e-4, 10.0))
        slope = float(rng.uniform(0.1, 1e10))
        qt = qtilde_from_q(q, slope)
        assert q_from_qtilde(qt, slope) == pytest.approx(q, rel=1e-10)
    with pytest.raises(ZeroPower):
        qtilde_from_q(0.0, 1.0)
    with pytest.raises(ZeroPower):
        q_from_qtilde(-1.0, 1.0)


def test_budget_search_returns_none_when_nothing_fits():
    # Deadline shorter than the fastest possible compute: no split exists.
    out = _transmission_budget_search(
        d=1e6, cycles=1e8, gain=1.0, interference=0.0, noise=1e-14,
        bandwidth=20e6, z_budget=1e-6, tau=5e-27, f_cap=1e9, p_max=1.0,
        rho=1.0)
    assert out is None


def test_budget_search_split_is_consistent():
    out = _transmission_budget_search(
        d=1e6, cycles=1e8, gain=1e-10, interference=0.0, noise=1e-14,
        bandwidth=20e6, z_budget=0.1, tau=5e-27, f_cap=30e9, p_max=1.0,
        rho=1.0)
    assert out is not None
    t, f, energy = out
    assert 0 < t < 0.1
    assert f == pytest.approx(1e8 / (0.1 - t), rel=1e-12)
    assert energy > 0


# ---------------------------------------------------------------------------
# Full alternation
# ---------------------------------------------------------------------------

def test_alternation_on_small_instance(small):
    plan, report, trace = run_algorithm1(small)
    assert check_feasibility(small, plan, small.scenario) == []
    xi = np.array(trace.xi)
    assert np.all(np.diff(xi) <= 1e-9 * xi[:-1])  # monotone descent
    assert report.xi == pytest.approx(xi[-1])
    assert trace.iterations >= 1


def test_alternation_degenerate_single_everything():
    inst = make_instance(seed=5, k=1, l=1, m=1, n=1, n_ant_bs=4, n_ant_sat=4)
    plan, report, trace = run_algorithm1(inst)
    assert check_feasibility(inst, plan, inst.scenario) == []
    assert plan.alpha.sum() + plan.beta.sum() == 1.0
    assert plan.gamma.sum() == 1.0


def test_alternation_deterministic(small):
    _, r1, t1 = run_algorithm1(small)
    _, r2, t2 = run_algorithm1(small)
    assert r1.xi == r2.xi
    assert t1.xi == t2.xi


def test_alternation_result_matches_reevaluation(small):
    plan, report, _ = run_algorithm1(small)
    again = evaluate_plan(small, plan, small.scenario)
    assert again.xi == pytest.approx(report.xi, rel=1e-12)
