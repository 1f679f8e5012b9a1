"""Delay/energy accounting for the three offloading paths, the weighted
total-energy objective, and feasibility checking of complete plans."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroCompute, ZeroRate
from .linkrate import Beamformers, rate_gue_bs, rate_gue_sat, rate_sue_sat
from .scenario import ScenarioConfig

FEAS_TOL = 1e-9  # relative feasibility tolerance


@dataclass(frozen=True)
class TaskSpec:
    """One computing task: input size (bits) and complexity (cycles/bit)."""

    d: float
    c: float

    def __post_init__(self):
        if self.d <= 0 or self.c <= 0:
            raise ZeroCompute("task size and complexity must be > 0")

    @property
    def cycles(self) -> float:
        return self.d * self.c


@dataclass
class Plan:
    """Full decision tuple: selections, beamformers, powers, compute splits."""

    alpha: np.ndarray      # (K, M) binary
    beta: np.ndarray       # (K, N) binary
    gamma: np.ndarray      # (L, N) binary
    beamformers: Beamformers
    p: np.ndarray          # (K,) W
    q: np.ndarray          # (L,) W
    f_gro: np.ndarray      # (K, M) cycles/s
    f_sat_g: np.ndarray    # (K, N) cycles/s
    f_sat_s: np.ndarray    # (L, N) cycles/s


@dataclass
class CostReport:
    """Per-task delay/energy breakdown and the weighted total."""

    t_gue: np.ndarray       # (K,) s on the selected path
    e_gue: np.ndarray       # (K,) J on the selected path
    t_sue: np.ndarray       # (L,) s
    e_sue: np.ndarray       # (L,) J
    rate_gue: np.ndarray    # (K,) bit/s on the selected path
    rate_sue: np.ndarray    # (L,) bit/s
    interference_gue: np.ndarray  # (K,) W-scale link interference
    snr_slope_sue: np.ndarray     # (L,) per-watt SNR slope
    gue_on_bs: np.ndarray   # (K,) bool: True if assigned to a BS
    xi: float = 0.0


def cost_gue_bs(task: TaskSpec, rate: float, f_alloc: float, tau_chip: float,
                p: float) -> tuple[float, float]:
    """Delay and energy of a ground task processed at a BS server."""
    if rate <= 0:
        raise ZeroRate("selected path has zero rate")
    if f_alloc <= 0:
        raise ZeroCompute("selected path has zero compute allocation")
    t_tx = task.d / rate
    t = t_tx + task.cycles / f_alloc
    e = p * t_tx + tau_chip * task.cycles * f_alloc ** 2
    return t, e


def cost_gue_sat(task: TaskSpec, rate: float, f_alloc: float, tau_chip: float,
                 p: float, phi_m: float, mu: float) -> tuple[float, float]:
    """As cost_gue_bs plus the propagation delay phi/mu of the space hop."""
    t, e = cost_gue_bs(task, rate, f_alloc, tau_chip, p)
    return t + phi_m / mu, e


def cost_sue_sat(task: TaskSpec, rate: float, f_alloc: float, tau_chip: float,
                 q: float, phi_m: float, mu: float) -> tuple[float, float]:
    """Space-user task over the laser link: same structure as cost_gue_sat."""
    return cost_gue_sat(task, rate, f_alloc, tau_chip, q, phi_m, mu)


def _selected_index(row: np.ndarray) -> int | None:
    nz = np.flatnonzero(row > 0.5)
    return int(nz[0]) if nz.size else None


def evaluate_plan(instance, plan: Plan, scenario: ScenarioConfig) -> CostReport:
    """Evaluate delay/energy of every task on its selected path and the
    weighted total energy.  Unselected paths contribute exactly zero."""
    k_n, l_n = scenario.n_gue, scenario.n_sue
    t_gue = np.zeros(k_n)
    e_gue = np.zeros(k_n)
    rate_gue = np.zeros(k_n)
    interference_gue = np.zeros(k_n)
    gue_on_bs = np.zeros(k_n, dtype=bool)
    t_sue = np.zeros(l_n)
    e_sue = np.zeros(l_n)
    rate_sue = np.zeros(l_n)
    slope_sue = np.zeros(l_n)

    for k in range(k_n):
        task = instance.tasks_gue[k]
        m = _selected_index(plan.alpha[k])
        if m is not None:
            channels = instance.h_bs[m]
            order = instance.orders_bs[m]
            w = plan.beamformers.w[k, m]
            rate = rate_gue_bs(k, channels, w, plan.p, order,
                               scenario.b1, scenario.noise_bs)
            t, e = cost_gue_bs(task, rate, plan.f_gro[k, m],
                               scenario.tau_gro, plan.p[k])
            gains = np.abs(channels @ w.conj()) ** 2
            idx = order.interferers(k)
            interference_gue[k] = float(np.dot(plan.p[idx], gains[idx]))
            gue_on_bs[k] = True
        else:
            n = _selected_index(plan.beta[k])
            channels = instance.g_sat[n]
            order = instance.orders_sat[n]
            v = plan.beamformers.v[k, n]
            delta2 = getattr(instance, "delta2_sq", scenario.noise_sat)
            rate = rate_gue_sat(k, channels, v, plan.p, order,
                                scenario.b2, delta2)
            t, e = cost_gue_sat(task, rate, plan.f_sat_g[k, n],
                                scenario.tau_sat, plan.p[k],
                                instance.dist_gue_sat_m[k, n],
                                scenario.light_speed)
            gains = np.abs(channels @ v.conj()) ** 2
            idx = order.interferers(k)
            interference_gue[k] = float(np.dot(plan.p[idx], gains[idx]))
        t_gue[k], e_gue[k], rate_gue[k] = t, e, rate

    for l in range(l_n):
        task = instance.tasks_sue[l]
        n = _selected_index(plan.gamma[l])
        slope = instance.fso_slope[l, n]
        rate = rate_sue_sat(plan.q[l], slope, scenario.b3)
        t, e = cost_sue_sat(task, rate, plan.f_sat_s[l, n],
                            scenario.tau_sat, plan.q[l],
                            instance.dist_sue_sat_m[l, n],
                            scenario.light_speed)
        t_sue[l], e_sue[l], rate_sue[l], slope_sue[l] = t, e, rate, slope

    xi = (scenario.rho_gue * e_gue.sum() + scenario.rho_sue * e_sue.sum())
    return CostReport(t_gue=t_gue, e_gue=e_gue, t_sue=t_sue, e_sue=e_sue,
                      rate_gue=rate_gue, rate_sue=rate_sue,
                      interference_gue=interference_gue,
                      snr_slope_sue=slope_sue, gue_on_bs=gue_on_bs, xi=xi)


def check_feasibility(instance, plan: Plan, scenario: ScenarioConfig,
                      tol: float = FEAS_TOL) -> list[str]:
    """All constraint violations of a plan; empty list means feasible."""
    violations: list[str] = []
    k_n, l_n = scenario.n_gue, scenario.n_sue

    for name, arr in (("alpha", plan.alpha), ("beta", plan.beta),
                      ("gamma", plan.gamma)):
        if arr.size and not np.all((np.abs(arr) < tol) | (np.abs(arr - 1) < tol)):
            violations.append(f"binary: {name} has fractional entries")

    sel_gue = plan.alpha.sum(axis=1) + plan.beta.sum(axis=1) if k_n else np.zeros(0)
    for k in range(k_n):
        if abs(sel_gue[k] - 1.0) > tol:
            violations.append(f"assignment: ground user {k} selects {sel_gue[k]:g} nodes")
    for l in range(l_n):
        s = plan.gamma[l].sum()
        if abs(s - 1.0) > tol:
            violations.append(f"assignment: space user {l} selects {s:g} satellites")

    for k in range(k_n):
        if not -tol <= plan.p[k] <= scenario.p_max * (1 + tol):
            violations.append(f"power: p[{k}]={plan.p[k]:.4g} outside [0, {scenario.p_max:g}]")
    for l in range(l_n):
        if not -tol <= plan.q[l] <= scenario.q_max * (1 + tol):
            violations.append(f"power: q[{l}]={plan.q[l]:.4g} outside [0, {scenario.q_max:g}]")

    for name, arr in (("w", plan.beamformers.w), ("v", plan.beamformers.v)):
        if arr.size:
            norms = np.linalg.norm(arr, axis=-1)
            if not np.allclose(norms, 1.0, atol=1e-6):
                violations.append(f"beamformer: {name} norms deviate from 1")

    for m in range(scenario.n_bs):
        load = float(np.dot(plan.alpha[:, m], plan.f_gro[:, m])) if k_n else 0.0
        if load > scenario.f_cap_bs * (1 + tol):
            violations.append(
                f"capacity: BS {m} load {load:.4g} > {scenario.f_cap_bs:g} cycles/s")
    for n in range(scenario.n_sat):
        load = 0.0
        if k_n:
            load += float(np.dot(plan.beta[:, n], plan.f_sat_g[:, n]))
        if l_n:
            load += float(np.dot(plan.gamma[:, n], plan.f_sat_s[:, n]))
        if load > scenario.f_cap_sat * (1 + tol):
            violations.append(
                f"capacity: satellite {n} load {load:.4g} > {scenario.f_cap_sat:g} cycles/s")

    if not violations:
        report = evaluate_plan(instance, plan, scenario)
        for k in range(k_n):
            if report.t_gue[k] > scenario.z_gue * (1 + tol):
                violations.append(
                    f"delay: ground user {k} takes {report.t_gue[k]*1e3:.3f} ms "
                    f"> {scenario.z_gue*1e3:g} ms")
        for l in range(l_n):
            if report.t_sue[l] > scenario.z_sue * (1 + tol):
                violations.append(
                    f"delay: space user {l} takes {report.t_sue[l]*1e3:.3f} ms "
                    f"> {scenario.z_sue*1e3:g} ms")
    return violations
