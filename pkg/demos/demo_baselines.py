"""Compare the joint optimizer against the five baselines on one instance.

Usage: python3 demos/demo_baselines.py [seed]
"""

import sys

import numpy as np

from satedge.baselines import run_acr, run_ftp, run_hco, run_ro, run_zfbf
from satedge.errors import ScenarioInfeasible
from satedge.instance import sample_instance
from satedge.optimizer import run_algorithm1
from satedge.scenario import from_overrides, mix64


def main() -> int:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    scenario = from_overrides({"seed": seed})
    instance = sample_instance(np.random.default_rng(mix64(seed, 0)), scenario)
    rng = np.random.default_rng(mix64(seed, 0, "demo"))

    runs = [
        ("joint optimization", lambda: run_algorithm1(instance)[1]),
        ("fixed transmit power", lambda: run_ftp(instance)[1]),
        ("zero-forcing receivers", lambda: run_zfbf(instance)[1]),
        ("random selection", lambda: run_ro(rng, instance)[1]),
        ("equal compute shares", lambda: run_acr(instance)[1]),
        ("swarm selection search", lambda: run_hco(rng, instance)[1]),
    ]
    print(f"Weighted total energy on one instance (seed {seed}):")
    for name, fn in runs:
        try:
            print(f"  {name:<24} {fn().xi:.4f} J")
        except ScenarioInfeasible:
            print(f"  {name:<24} infeasible under its pinned block")
    return 0


if __name__ == "__main__":
    sys.exit(main())
