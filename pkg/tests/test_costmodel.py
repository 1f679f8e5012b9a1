"""Delay/energy accounting and plan feasibility checking."""

import dataclasses
import types

import numpy as np
import pytest

from satedge.costmodel import (TaskSpec, check_feasibility, cost_gue_bs,
                               cost_gue_sat, cost_sue_sat, evaluate_plan)
from satedge.errors import ZeroCompute, ZeroRate
from satedge.optimizer import run_algorithm1


# ---------------------------------------------------------------------------
# Task container
# ---------------------------------------------------------------------------

def test_task_cycles_product():
    task = TaskSpec(d=1.6384e6, c=100.0)
    assert task.cycles == pytest.approx(1.6384e8, rel=1e-15)


def test_task_rejects_nonpositive():
    with pytest.raises(ZeroCompute):
        TaskSpec(d=0.0, c=100.0)
    with pytest.raises(ZeroCompute):
        TaskSpec(d=1e6, c=-1.0)


# ---------------------------------------------------------------------------
# Per-path cost formulas
# ---------------------------------------------------------------------------

def test_ground_path_delay_and_energy():
    task = TaskSpec(d=1.6384e6, c=100.0)
    t, e = cost_gue_bs(task, rate=1e8, f_alloc=1e9, tau_chip=5e-27, p=0.5)
    # 16.384 ms uplink + 163.84 ms compute.
    assert t == pytest.approx(0.016384 + 0.16384, rel=1e-12)
    # 0.5 W * 16.384 ms transmission + tau * cycles * f^2 compute.
    assert e == pytest.approx(0.5 * 0.016384 + 5e-27 * 1.6384e8 * 1e18,
                              rel=1e-12)
    assert e == pytest.approx(0.008192 + 0.8192, rel=1e-12)


def test_space_path_adds_propagation_only():
    task = TaskSpec(d=1.6384e6, c=100.0)
    t0, e0 = cost_gue_bs(task, 1e8, 1e9, 5e-27, 0.5)
    t1, e1 = cost_gue_sat(task, 1e8, 1e9, 5e-27, 0.5, 550e3, 3e8)
    assert t1 - t0 == pytest.approx(550e3 / 3e8, rel=1e-12)  # 1.8333 ms
    assert e1 == e0
    t2, _ = cost_gue_sat(task, 1e8, 1e9, 5e-27, 0.5, 2700e3, 3e8)
    assert t2 - t0 == pytest.approx(9e-3, rel=1e-12)


def test_laser_path_shares_the_structure():
    task = TaskSpec(d=1.6384e6, c=100.0)
    assert cost_sue_sat(task, 1e8, 1e9, 5e-27, 0.5, 550e3, 3e8) \
        == cost_gue_sat(task, 1e8, 1e9, 5e-27, 0.5, 550e3, 3e8)


def test_zero_rate_and_zero_compute_rejected():
    task = TaskSpec(d=1e6, c=10.0)
    with pytest.raises(ZeroRate):
        cost_gue_bs(task, 0.0, 1e9, 5e-27, 0.5)
    with pytest.raises(ZeroCompute):
        cost_gue_bs(task, 1e8, 0.0, 5e-27, 0.5)


# ---------------------------------------------------------------------------
# Plan evaluation
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def solved_small():
    from conftest import make_instance
    inst = make_instance(k=3, l=2, m=1, n=2, n_ant_bs=4, n_ant_sat=4)
    plan, report, _ = run_algorithm1(inst)
    return inst, plan, report


def test_objective_decomposes_into_energies(solved_small):
    inst, plan, report = solved_small
    sc = inst.scenario
    want = sc.rho_gue * report.e_gue.sum() + sc.rho_sue * report.e_sue.sum()
    assert report.xi == pytest.approx(want, rel=1e-12)


def test_report_shapes_and_positivity(solved_small):
    inst, plan, report = solved_small
    sc = inst.scenario
    assert report.t_gue.shape == (sc.n_gue,)
    assert report.t_sue.shape == (sc.n_sue,)
    assert np.all(report.t_gue > 0) and np.all(report.e_gue > 0)
    assert np.all(report.t_sue > 0) and np.all(report.e_sue > 0)
    assert np.all(report.rate_gue > 0) and np.all(report.rate_sue > 0)


def test_evaluation_ignores_unselected_paths(solved_small):
    inst, plan, report = solved_small
    # Scrambling compute allocations on unselected pairs changes nothing.
    noisy = dataclasses.replace(
        plan,
        f_gro=np.where(plan.alpha > 0.5, plan.f_gro, 123.0),
        f_sat_g=np.where(plan.beta > 0.5, plan.f_sat_g, 123.0),
        f_sat_s=np.where(plan.gamma > 0.5, plan.f_sat_s, 123.0))
    again = evaluate_plan(inst, noisy, inst.scenario)
    assert again.xi == report.xi
    np.testing.assert_array_equal(again.t_gue, report.t_gue)


# ---------------------------------------------------------------------------
# Feasibility checking
# ---------------------------------------------------------------------------

def test_solver_output_is_feasible(solved_small):
    inst, plan, _ = solved_small
    assert check_feasibility(inst, plan, inst.scenario) == []


def test_fractional_selection_flagged(solved_small):
    inst, plan, _ = solved_small
    bad = dataclasses.replace(plan, alpha=plan.alpha * 0.5,
                              beta=plan.beta * 0.5)
    msgs = check_feasibility(inst, bad, inst.scenario)
    assert any(m.startswith("binary") for m in msgs)
    assert any(m.startswith("assignment") for m in msgs)


def test_double_selection_flagged(solved_small):
    inst, plan, _ = solved_small
    beta = plan.beta.copy()
    beta[:, 0] = 1.0
    beta[:, 1] = 1.0
    alpha = np.zeros_like(plan.alpha)
    msgs = check_feasibility(inst, dataclasses.replace(plan, alpha=alpha,
                                                       beta=beta),
                             inst.scenario)
    assert any(m.startswith("assignment") for m in msgs)


def test_power_bound_flagged(solved_small):
    inst, plan, _ = solved_small
    p = plan.p.copy()
    p[0] = inst.scenario.p_max * 2.0
    msgs = check_feasibility(inst, dataclasses.replace(plan, p=p),
                             inst.scenario)
    assert any(m.startswith("power: p[0]") for m in msgs)


def test_capacity_overload_flagged(solved_small):
    inst, plan, _ = solved_small
    f_gro = plan.f_gro + inst.scenario.f_cap_bs  # blow past the cap
    msgs = check_feasibility(inst, dataclasses.replace(plan, f_gro=f_gro),
                             inst.scenario)
    assert any(m.startswith("capacity: BS") for m in msgs)


def test_deadline_violation_flagged(solved_small):
    inst, plan, _ = solved_small
    tight = inst.scenario.with_overrides(z_gue_ms=1e-6)
    msgs = check_feasibility(inst, plan, tight)
    assert any(m.startswith("delay: ground user") for m in msgs)


def test_non_unit_beamformer_flagged(solved_small):
    inst, plan, _ = solved_small
    # Bypass the container's construction-time validation to probe the
    # checker directly.
    w = plan.beamformers.w.copy()
    w[0, 0] *= 2.0
    bf = types.SimpleNamespace(w=w, v=plan.beamformers.v)
    msgs = check_feasibility(inst, dataclasses.replace(plan, beamformers=bf),
                             inst.scenario)
    assert any(m.startswith("beamformer") for m in msgs)
