"""Command-line entry points: batch experiment runs, scenario validation,
and oracle self-checks."""

from __future__ import annotations

import argparse
import sys

from .errors import SatEdgeError
from .harness import (ALGORITHMS, EXPERIMENT_IDS, build_experiment,
                      run_experiment, summarize)
from .oracles import ORACLE_CHECKS
from .scenario import from_overrides, load_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satedge",
        description="Energy-aware task offloading simulator for "
                    "satellite-terrestrial edge computing")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a Monte-Carlo experiment")
    run_p.add_argument("--scenario", help="JSON scenario override file")
    run_p.add_argument("--experiment", required=True, choices=EXPERIMENT_IDS)
    run_p.add_argument("--seeds", type=int, required=True,
                       help="number of Monte-Carlo trials per sweep point")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--algorithms",
                       help="comma-separated subset of " + ",".join(ALGORITHMS))
    run_p.add_argument("--verbose", action="store_true")

    val_p = sub.add_parser("validate", help="validate a scenario file")
    val_p.add_argument("--scenario", required=True)

    orc_p = sub.add_parser("oracle", help="run a reference-oracle suite")
    orc_p.add_argument("--check", required=True, choices=sorted(ORACLE_CHECKS))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            config = load_scenario(args.scenario)
            print(f"scenario OK: K={config.n_gue} L={config.n_sue} "
                  f"M={config.n_bs} N={config.n_sat}, "
                  f"Pmax={config.p_max:g} W, B1={config.b1/1e6:g} MHz")
            return 0
        if args.command == "run":
            config = (load_scenario(args.scenario) if args.scenario
                      else from_overrides({}))
            algorithms = (args.algorithms.split(",") if args.algorithms
                          else None)
            spec = build_experiment(args.experiment, args.seeds, algorithms)
            rows = run_experiment(spec, config, args.out,
                                  verbose=args.verbose)
            for entry in summarize(rows):
                print(f"{entry['experiment']} {entry['axis']}="
                      f"{entry['value']:g} ({entry['variant']}) "
                      f"{entry['algorithm']}: mean_xi={entry['mean_xi']:.6g} J "
                      f"({entry['n_feasible']}/{entry['n']} feasible)")
            return 0
        if args.command == "oracle":
            failures = ORACLE_CHECKS[args.check]()
            if failures:
                for msg in failures:
                    print(f"FAIL: {msg}", file=sys.stderr)
                return 2
            print(f"oracle check '{args.check}' passed")
            return 0
    except SatEdgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
