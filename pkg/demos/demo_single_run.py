"""Optimize a single network instance and print the resulting plan.

Usage: python3 demos/demo_single_run.py [seed]
"""

import sys

import numpy as np

from satedge.costmodel import check_feasibility
from satedge.instance import sample_instance
from satedge.optimizer import run_algorithm1
from satedge.scenario import from_overrides, mix64


def main() -> int:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    scenario = from_overrides({"seed": seed})
    instance = sample_instance(np.random.default_rng(mix64(seed, 0)), scenario)

    print(f"Network: {scenario.n_gue} ground users, {scenario.n_sue} space "
          f"users, {scenario.n_bs} base stations, {scenario.n_sat} satellites")
    plan, report, trace = run_algorithm1(instance)

    print(f"\nConverged in {trace.iterations} iteration(s); "
          f"weighted total energy = {report.xi:.4f} J")
    violations = check_feasibility(instance, plan, scenario)
    print(f"Feasibility check: {'OK' if not violations else violations}")

    print("\nGround users (path, rate, delay, energy):")
    for k in range(scenario.n_gue):
        if plan.alpha[k].any():
            path = f"BS {int(np.argmax(plan.alpha[k]))}"
        else:
            path = f"satellite {int(np.argmax(plan.beta[k]))}"
        print(f"  user {k}: {path:<12} {report.rate_gue[k]/1e6:8.2f} Mbit/s  "
              f"{report.t_gue[k]*1e3:7.2f} ms  {report.e_gue[k]:.4f} J  "
              f"(p = {plan.p[k]:.3f} W)")

    print("\nSpace users (satellite, rate, delay, energy):")
    for l in range(scenario.n_sue):
        n = int(np.argmax(plan.gamma[l]))
        print(f"  user {l}: satellite {n}  {report.rate_sue[l]/1e6:8.2f} "
              f"Mbit/s  {report.t_sue[l]*1e3:7.2f} ms  "
              f"{report.e_sue[l]:.4f} J  (q = {plan.q[l]:.3g} W)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
