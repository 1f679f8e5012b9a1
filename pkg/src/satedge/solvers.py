"""Thin optimization engines shared by the optimizer: linear programs,
conic programs with semidefinite matrix blocks, smooth convex programs,
and eigen utilities.

The heavy lifting is delegated to mature engines (HiGHS through scipy for
LPs, Clarabel through cvxpy for conic programs, SLSQP for smooth
programs); this module fixes the problem containers, tolerances, status
mapping, and error policy used everywhere else.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import InfeasibleBox, MaxIterationsExceeded, NotHermitian

DEFAULT_TOL = 1e-7


@dataclass
class SolverReport:
    status: str              # 'optimal' | 'infeasible' | 'max_iter'
    objective: float
    x: object                # solution container (array or dict)
    tolerance: float
    iterations: int = 0
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------

@dataclass
class LinearProgram:
    """min c@x s.t. A_ub@x <= b_ub, A_eq@x == b_eq, lb <= x <= ub."""

    c: np.ndarray
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    bounds: list | None = None  # list of (lb, ub) pairs, None = free


def solve_lp(lp: LinearProgram, tol: float = DEFAULT_TOL) -> SolverReport:
    res = scipy.optimize.linprog(
        lp.c, A_ub=lp.a_ub, b_ub=lp.b_ub, A_eq=lp.a_eq, b_eq=lp.b_eq,
        bounds=lp.bounds if lp.bounds is not None else (0, None),
        method="highs",
        options={"primal_feasibility_tolerance": tol,
                 "dual_feasibility_tolerance": tol},
    )
    if res.status == 0:
        return SolverReport("optimal", float(res.fun), np.asarray(res.x),
                            tol, int(res.nit))
    if res.status == 2:
        return SolverReport("infeasible", np.inf, None, tol, int(res.nit))
    if res.status == 3:
        # Unbounded: report as optimal at -inf so callers can detect it.
        return SolverReport("optimal", -np.inf, None, tol, int(res.nit))
    raise MaxIterationsExceeded(f"LP solver stopped: {res.message}")


# ---------------------------------------------------------------------------
# Conic programming (PSD blocks + scalar convex constraints)
# ---------------------------------------------------------------------------

@dataclass
class ConicProgram:
    """Linear objective over Hermitian PSD matrix blocks and scalars.

    Supported constraints:
      * trace-affine:  sum_j Re tr(C_j @ W_j) + a @ s  (<=|==)  rhs
      * hyperbolic:    d / s_i <= s_j          (d > 0 constant)
      * logarithmic:   s_i <= B * log2(1 + s_j)

    Matrix coefficient entries are (block_index, C) pairs; scalar entries
    are {scalar_index: coeff} dicts.
    """

    block_dims: list                       # PSD block sizes
    n_scalars: int = 0
    scalar_lb: np.ndarray | None = None
    obj_blocks: list = field(default_factory=list)    # (block, C)
    obj_scalars: dict = field(default_factory=dict)   # idx -> coeff
    trace_constraints: list = field(default_factory=list)
    # each: dict(blocks=[(b, C)], scalars={i: a}, sense='<='|'==', rhs=float)
    hyperbolic: list = field(default_factory=list)    # (d, i, j)
    logarithmic: list = field(default_factory=list)   # (i, j, B)


def solve_conic(cp_prob: ConicProgram, tol: float = DEFAULT_TOL) -> SolverReport:
    import cvxpy as cp

    blocks = [cp.Variable((d, d), hermitian=True) for d in cp_prob.block_dims]
    s = cp.Variable(cp_prob.n_scalars) if cp_prob.n_scalars else None

    constraints = [w >> 0 for w in blocks]
    if s is not None and cp_prob.scalar_lb is not None:
        constraints.append(s >= cp_prob.scalar_lb)

    def affine(block_terms, scalar_terms):
        expr = 0
        for b, c_mat in block_terms:
            expr = expr + cp.real(cp.trace(c_mat @ blocks[b]))
        for i, a in scalar_terms.items():
            expr = expr + a * s[i]
        return expr

    objective = affine(cp_prob.obj_blocks, cp_prob.obj_scalars)
    for con in cp_prob.trace_constraints:
        lhs = affine(con.get("blocks", []), con.get("scalars", {}))
        if con["sense"] == "==":
            constraints.append(lhs == con["rhs"])
        else:
            constraints.append(lhs <= con["rhs"])
    for d, i, j in cp_prob.hyperbolic:
        constraints.append(d * cp.inv_pos(s[i]) <= s[j])
    for i, j, bnd in cp_prob.logarithmic:
        constraints.append(s[i] <= bnd * cp.log1p(s[j]) / np.log(2.0))

    problem = cp.Problem(cp.Minimize(objective), constraints)
    try:
        with warnings.catch_warnings():
            # 'optimal_inaccurate' is handled explicitly below.
            warnings.simplefilter("ignore", UserWarning)
            problem.solve(solver=cp.CLARABEL, max_iter=200)
    except cp.error.SolverError as exc:
        raise MaxIterationsExceeded(str(exc)) from exc

    if problem.status in ("optimal", "optimal_inaccurate"):
        sol = {
            "blocks": [np.asarray(w.value) for w in blocks],
            "scalars": np.asarray(s.value) if s is not None else np.zeros(0),
        }
        return SolverReport("optimal", float(problem.value), sol, tol,
                            extra={"raw_status": problem.status})
    if "infeasible" in problem.status:
        return SolverReport("infeasible", np.inf, None, tol,
                            extra={"raw_status": problem.status})
    raise MaxIterationsExceeded(f"conic solver stopped: {problem.status}")


# ---------------------------------------------------------------------------
# Smooth convex programming
# ---------------------------------------------------------------------------

@dataclass
class SmoothConvexProgram:
    """min f(x) s.t. g_i(x) <= 0, lb <= x <= ub, with analytic gradients.

    objective and each constraint are callables x -> (value, gradient).
    """

    objective: object
    constraints: list
    lower: np.ndarray
    upper: np.ndarray
    x0: np.ndarray | None = None


def solve_smooth(scp: SmoothConvexProgram, tol: float = 1e-9,
                 max_iter: int = 300) -> SolverReport:
    lower = np.asarray(scp.lower, float)
    upper = np.asarray(scp.upper, float)
    if np.any(lower > upper):
        raise InfeasibleBox("empty box: some lower bound exceeds its upper bound")
    x0 = scp.x0 if scp.x0 is not None else 0.5 * (lower + np.minimum(upper, lower + 1.0))
    x0 = np.clip(x0, lower, upper)

    cons = [
        {"type": "ineq",
         "fun": (lambda x, g=g: -g(x)[0]),
         "jac": (lambda x, g=g: -np.asarray(g(x)[1]))}
        for g in scp.constraints
    ]
    with warnings.catch_warnings():
        # SLSQP probes slightly outside the box and clips back; harmless.
        warnings.filterwarnings("ignore", message=".*outside bounds.*",
                                category=RuntimeWarning)
        res = scipy.optimize.minimize(
            lambda x: scp.objective(x)[0], x0,
            jac=lambda x: np.asarray(scp.objective(x)[1]),
            bounds=list(zip(lower, upper)), constraints=cons,
            method="SLSQP", options={"maxiter": max_iter, "ftol": tol},
        )
    if res.status == 0 or res.success:
        return SolverReport("optimal", float(res.fun), np.asarray(res.x),
                            tol, int(res.nit))
    if res.status == 4:  # inequality constraints incompatible
        return SolverReport("infeasible", np.inf, None, tol, int(res.nit))
    if res.status in (8, 9):
        # Linesearch stall or iteration cap: accept the iterate when it
        # satisfies every constraint — on these convex programs it is a
        # near-optimal point stuck on a degenerate box corner.
        x = np.clip(np.asarray(res.x), lower, upper)
        feas_tol = 1e-7 * max(1.0, float(np.abs(x).max()))
        if all(g(x)[0] <= feas_tol for g in scp.constraints):
            return SolverReport("optimal", float(scp.objective(x)[0]), x,
                                tol, int(res.nit), extra={"stalled": True})
        return SolverReport("infeasible", np.inf, None, tol, int(res.nit))
    raise MaxIterationsExceeded(f"smooth solver stopped: {res.message}")


# ---------------------------------------------------------------------------
# Eigen utilities
# ---------------------------------------------------------------------------

def _require_hermitian(matrix: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    matrix = np.asarray(matrix)
    scale = max(np.linalg.norm(matrix), 1.0)
    if np.linalg.norm(matrix - matrix.conj().T) > tol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return 0.5 * (matrix + matrix.conj().T)


def top_eigpair(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and unit eigenvector of a Hermitian matrix."""
    m = _require_hermitian(matrix)
    vals, vecs = np.linalg.eigh(m)
    return float(vals[-1]), vecs[:, -1]


def rank_one_ratio(matrix: np.ndarray) -> float:
    """lambda_max / trace of a PSD matrix; 1 means exactly rank one."""
    m = _require_hermitian(matrix)
    vals = np.linalg.eigvalsh(m)
    tr = float(vals.sum())
    if tr <= 0:
        return 0.0
    return float(vals[-1] / tr)
