"""Optimization engines: LP, conic, smooth convex, eigen utilities."""

import numpy as np
import pytest

from satedge.errors import InfeasibleBox, NotHermitian
from satedge.solvers import (ConicProgram, LinearProgram,
                             SmoothConvexProgram, rank_one_ratio, solve_conic,
                             solve_lp, solve_smooth, top_eigpair)


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------

def test_lp_known_optimum():
    # min -x - 2y s.t. x + y <= 4, x <= 3, y <= 2  ->  (x, y) = (2, 2).
    lp = LinearProgram(c=np.array([-1.0, -2.0]),
                       a_ub=np.array([[1.0, 1.0]]), b_ub=np.array([4.0]),
                       bounds=[(0.0, 3.0), (0.0, 2.0)])
    rep = solve_lp(lp)
    assert rep.status == "optimal"
    assert rep.objective == pytest.approx(-6.0, abs=1e-8)
    np.testing.assert_allclose(rep.x, [2.0, 2.0], atol=1e-8)


def test_lp_equality_constraint():
    lp = LinearProgram(c=np.array([1.0, 1.0]),
                       a_eq=np.array([[1.0, -1.0]]), b_eq=np.array([1.0]),
                       bounds=[(0.0, None), (0.0, None)])
    rep = solve_lp(lp)
    assert rep.status == "optimal"
    np.testing.assert_allclose(rep.x, [1.0, 0.0], atol=1e-8)


def test_lp_infeasible_reported():
    lp = LinearProgram(c=np.array([1.0]),
                       a_ub=np.array([[1.0], [-1.0]]),
                       b_ub=np.array([1.0, -2.0]),
                       bounds=[(0.0, None)])
    rep = solve_lp(lp)
    assert rep.status == "infeasible"
    assert rep.objective == np.inf and rep.x is None


def test_lp_unbounded_signalled_with_inf():
    lp = LinearProgram(c=np.array([-1.0]), bounds=[(0.0, None)])
    rep = solve_lp(lp)
    assert rep.objective == -np.inf


# ---------------------------------------------------------------------------
# Conic programming
# ---------------------------------------------------------------------------

def test_conic_trace_minimization_recovers_projector():
    # min tr(C W) s.t. tr(W) == 1, W >> 0 with Hermitian C: the optimum is
    # the projector onto C's smallest eigenvector, value = lambda_min.
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    c = a + a.conj().T
    prob = ConicProgram(block_dims=[3],
                        obj_blocks=[(0, c)],
                        trace_constraints=[{"blocks": [(0, np.eye(3))],
                                            "scalars": {}, "sense": "==",
                                            "rhs": 1.0}])
    rep = solve_conic(prob)
    assert rep.status == "optimal"
    lam_min = np.linalg.eigvalsh(c)[0]
    assert rep.objective == pytest.approx(lam_min, abs=1e-6)
    w = rep.x["blocks"][0]
    assert rank_one_ratio(w) > 0.999


def test_conic_hyperbolic_constraint():
    # min s0 + s1 s.t. 4 / s0 <= s1  ->  s0 = s1 = 2.
    prob = ConicProgram(block_dims=[], n_scalars=2,
                        scalar_lb=np.array([1e-6, 1e-6]),
                        obj_scalars={0: 1.0, 1: 1.0},
                        hyperbolic=[(4.0, 0, 1)])
    rep = solve_conic(prob)
    assert rep.status == "optimal"
    np.testing.assert_allclose(rep.x["scalars"], [2.0, 2.0], atol=1e-4)


def test_conic_logarithmic_constraint():
    # min s1 s.t. 3 <= log2(1 + s1)  ->  s1 = 7.
    prob = ConicProgram(block_dims=[], n_scalars=2,
                        scalar_lb=np.array([3.0, 0.0]),
                        obj_scalars={1: 1.0},
                        logarithmic=[(0, 1, 1.0)])
    rep = solve_conic(prob)
    assert rep.status == "optimal"
    assert rep.x["scalars"][1] == pytest.approx(7.0, rel=1e-4)


def test_conic_infeasible_reported():
    prob = ConicProgram(block_dims=[], n_scalars=1,
                        scalar_lb=np.array([2.0]),
                        obj_scalars={0: 1.0},
                        trace_constraints=[{"blocks": [],
                                            "scalars": {0: 1.0},
                                            "sense": "<=", "rhs": 1.0}])
    rep = solve_conic(prob)
    assert rep.status == "infeasible"


# ---------------------------------------------------------------------------
# Smooth convex programming
# ---------------------------------------------------------------------------

def _quadratic(center):
    center = np.asarray(center, float)

    def f(x):
        d = x - center
        return float(d @ d), 2.0 * d
    return f


def test_smooth_box_constrained_quadratic():
    scp = SmoothConvexProgram(objective=_quadratic([2.0, -1.0]),
                              constraints=[],
                              lower=np.zeros(2), upper=np.ones(2))
    rep = solve_smooth(scp)
    assert rep.status == "optimal"
    np.testing.assert_allclose(rep.x, [1.0, 0.0], atol=1e-6)


def test_smooth_with_inequality_constraint():
    # min |x|^2 s.t. 1 - x0 - x1 <= 0  ->  x = (0.5, 0.5).
    def g(x):
        return 1.0 - x[0] - x[1], np.array([-1.0, -1.0])

    scp = SmoothConvexProgram(objective=_quadratic([0.0, 0.0]),
                              constraints=[g],
                              lower=np.zeros(2), upper=np.ones(2))
    rep = solve_smooth(scp)
    assert rep.status == "optimal"
    np.testing.assert_allclose(rep.x, [0.5, 0.5], atol=1e-6)
    assert rep.objective == pytest.approx(0.5, abs=1e-6)


def test_smooth_infeasible_constraints():
    def g_hi(x):
        return 2.0 - x[0], np.array([-1.0])  # needs x0 >= 2 but box is [0,1]

    scp = SmoothConvexProgram(objective=_quadratic([0.0]),
                              constraints=[g_hi],
                              lower=np.zeros(1), upper=np.ones(1))
    rep = solve_smooth(scp)
    assert rep.status == "infeasible"


def test_smooth_empty_box_rejected():
    scp = SmoothConvexProgram(objective=_quadratic([0.0]),
                              constraints=[],
                              lower=np.ones(1), upper=np.zeros(1))
    with pytest.raises(InfeasibleBox):
        solve_smooth(scp)


# ---------------------------------------------------------------------------
# Eigen utilities
# ---------------------------------------------------------------------------

def test_top_eigpair_matches_numpy():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    m = a @ a.conj().T
    lam, vec = top_eigpair(m)
    vals = np.linalg.eigvalsh(m)
    assert lam == pytest.approx(vals[-1], rel=1e-12)
    np.testing.assert_allclose(m @ vec, lam * vec, atol=1e-8 * lam)
    assert np.linalg.norm(vec) == pytest.approx(1.0, rel=1e-12)


def test_rank_one_ratio_values():
    v = np.array([1.0, 2.0, 3.0])
    assert rank_one_ratio(np.outer(v, v)) == pytest.approx(1.0, abs=1e-12)
    assert rank_one_ratio(np.eye(4)) == pytest.approx(0.25, abs=1e-12)
    assert rank_one_ratio(np.zeros((3, 3))) == 0.0


def test_non_hermitian_rejected():
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(NotHermitian):
        top_eigpair(bad)
    with pytest.raises(NotHermitian):
        rank_one_ratio(bad)
