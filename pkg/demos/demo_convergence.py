"""Show the monotone objective trace of the alternating optimizer.

Usage: python3 demos/demo_convergence.py [n_seeds]
"""

import sys

import numpy as np

from satedge.instance import sample_instance
from satedge.optimizer import run_algorithm1
from satedge.scenario import from_overrides, mix64


def main() -> int:
    n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    scenario = from_overrides({})
    for seed in range(n_seeds):
        rng = np.random.default_rng(mix64(seed, 0))
        instance = sample_instance(rng, scenario)
        _, report, trace = run_algorithm1(instance)
        steps = " -> ".join(f"{xi:.4f}" for xi in trace.xi)
        print(f"seed {seed}: {steps}  (final {report.xi:.4f} J, "
              f"{trace.iterations} iterations)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
