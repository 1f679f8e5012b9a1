"""Experiment harness: scenario loading, seeded Monte-Carlo sweeps,
CSV persistence, and aggregation."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import run_acr, run_ftp, run_hco, run_ro, run_zfbf
from .errors import EmptyInput, ScenarioInfeasible, ValidationError
from .instance import sample_instance
from .optimizer import run_algorithm1
from .scenario import ScenarioConfig, load_scenario, mix64

EXPERIMENT_IDS = ("convergence", "baseline_compare", "users_sweep",
                  "bandwidth_antenna_sweep", "node_sweep",
                  "datasize_capacity_sweep", "custom")

ALGORITHMS = ("alg1", "ftp", "zfbf", "ro", "acr", "hco")

# The results file is a determinism contract: identical config + master
# seed must reproduce it byte for byte.  Measured wall time cannot satisfy
# that, so timings live in a separate sidecar file instead.
CSV_COLUMNS = ("experiment", "algorithm", "axis", "value", "variant",
               "seed", "xi_joules", "feasible")
TIMING_COLUMNS = CSV_COLUMNS[:-2] + ("wallclock_s",)


@dataclass(frozen=True)
class SweepPoint:
    axis: str
    value: float
    variant: str
    overrides: dict


@dataclass
class ExperimentSpec:
    experiment: str
    points: list          # of SweepPoint
    trials: int
    algorithms: tuple

    def __post_init__(self):
        if not self.points:
            raise ValidationError("experiment sweep must be nonempty")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")


@dataclass
class ResultRow:
    experiment: str
    algorithm: str
    axis: str
    value: float
    variant: str
    seed: int
    xi: float
    feasible: bool
    wallclock: float
    trace: object = field(default=None, compare=False)


def build_experiment(experiment: str, trials: int,
                     algorithms=None) -> ExperimentSpec:
    """Sweep-point layout of each named experiment."""
    if experiment not in EXPERIMENT_IDS:
        raise ValidationError(f"unknown experiment id {experiment!r}")
    pts: list[SweepPoint] = []
    if experiment == "convergence":
        pts = [SweepPoint("default", 0.0, "base", {})]
        default_algos = ("alg1",)
    elif experiment == "baseline_compare":
        pts = [SweepPoint("z_ms", z, "base", {"z_gue_ms": z, "z_sue_ms": z})
               for z in (60.0, 80.0, 100.0, 120.0, 140.0)]
        default_algos = ALGORITHMS
    elif experiment == "users_sweep":
        pts = ([SweepPoint("k", k, "base", {"k": k}) for k in (6, 10, 14)]
               + [SweepPoint("l", l, "base", {"l": l}) for l in (6, 10, 14)])
        default_algos = ("alg1",)
    elif experiment == "bandwidth_antenna_sweep":
        pts = ([SweepPoint("n_ant", a, "base",
                           {"n_ant_bs": a, "n_ant_sat": a})
                for a in (16, 24, 32)]
               + [SweepPoint("b_mhz", b, "base",
                             {"b1_mhz": b, "b2_mhz": b}) for b in (10.0, 20.0, 30.0)])
        default_algos = ("alg1",)
    elif experiment == "node_sweep":
        pts = ([SweepPoint("m", m, "base", {"m": m}) for m in (1, 2, 3)]
               + [SweepPoint("n", n, "base", {"n": n}) for n in (2, 3, 4)])
        default_algos = ("alg1",)
    elif experiment == "datasize_capacity_sweep":
        # Run in a deliberately capacity-limited regime (tight deadline,
        # caps scaled down to the loads actually drawn), so that doubling
        # either node capacity has a measurable effect on the energy curve.
        variants = {"base": {}, "fgro2x": {"f_bs_ghz": 12.0},
                    "fsat2x": {"f_sat_ghz": 8.0}}
        base = {"z_gue_ms": 60.0, "z_sue_ms": 60.0,
                "f_bs_ghz": 6.0, "f_sat_ghz": 4.0}
        base_d = (200.0, 400.0)
        for scale in (1.0, 1.5, 2.0):
            for tag, extra in variants.items():
                ov = dict(base)
                ov["d_gue_kb"] = [base_d[0] * scale, base_d[1] * scale]
                ov.update(extra)
                pts.append(SweepPoint("d_scale", scale, tag, ov))
        default_algos = ("alg1",)
    else:  # custom
        pts = [SweepPoint("default", 0.0, "base", {})]
        default_algos = ("alg1",)
    algos = tuple(algorithms) if algorithms else default_algos
    for a in algos:
        if a not in ALGORITHMS:
            raise ValidationError(f"unknown algorithm tag {a!r}")
    return ExperimentSpec(experiment=experiment, points=pts, trials=trials,
                          algorithms=algos)


def _run_one(algorithm: str, instance, row_seed: int):
    """Dispatch one (instance, algorithm) run; returns (xi, feasible, trace)."""
    rng = np.random.default_rng(row_seed)
    trace = None
    try:
        if algorithm == "alg1":
            _, report, trace = run_algorithm1(instance)
        elif algorithm == "ftp":
            _, report = run_ftp(instance)
        elif algorithm == "zfbf":
            _, report = run_zfbf(instance)
        elif algorithm == "ro":
            _, report = run_ro(rng, instance)
        elif algorithm == "acr":
            _, report = run_acr(instance)
        elif algorithm == "hco":
            _, report = run_hco(rng, instance)
        else:
            raise ValidationError(f"unknown algorithm {algorithm!r}")
    except ScenarioInfeasible:
        return math.nan, False, None
    return report.xi, True, trace


def run_experiment(spec: ExperimentSpec, config: ScenarioConfig,
                   out_dir, master_seed: int | None = None,
                   verbose: bool = False) -> list:
    """Execute a sweep and persist one CSV (plus convergence traces).

    Instances are shared across sweep points and algorithms of the same
    trial (the instance stream is keyed by (master_seed, trial) only, with
    per-entity substreams inside), so curves differ by the swept parameter
    rather than by redrawn randomness.  The recorded per-row seed mixes in
    the algorithm tag and drives only algorithm-internal randomness.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    master_seed = config.seed if master_seed is None else master_seed

    rows: list[ResultRow] = []
    for point in spec.points:
        scenario = config.with_overrides(**point.overrides)
        for trial in range(spec.trials):
            instance_rng = np.random.default_rng(mix64(master_seed, trial))
            instance = sample_instance(instance_rng, scenario)
            for algorithm in spec.algorithms:
                row_seed = mix64(master_seed, trial, algorithm)
                t0 = time.perf_counter()
                xi, feasible, trace = _run_one(algorithm, instance, row_seed)
                wall = time.perf_counter() - t0
                rows.append(ResultRow(
                    experiment=spec.experiment, algorithm=algorithm,
                    axis=point.axis, value=float(point.value),
                    variant=point.variant, seed=row_seed, xi=xi,
                    feasible=feasible, wallclock=wall, trace=trace))
                if verbose:
                    print(f"{spec.experiment} {point.axis}={point.value:g} "
                          f"({point.variant}) trial={trial} {algorithm}: "
                          f"xi={xi:.6g} feasible={feasible} [{wall:.2f}s]")

    write_rows(rows, out_dir / f"{spec.experiment}.csv")
    write_timings(rows, out_dir / f"{spec.experiment}_timing.csv")
    if spec.experiment == "convergence":
        for i, row in enumerate(r for r in rows if r.trace is not None):
            path = out_dir / f"convergence_trace_{i}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["iteration", "xi_joules"])
                for t, xi in enumerate(row.trace.xi):
                    writer.writerow([t, f"{xi:.12e}"])
    return rows


def write_rows(rows: list, path) -> None:
    """Persist rows in the fixed schema with stable formatting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([
                r.experiment, r.algorithm, r.axis, f"{r.value:.6g}",
                r.variant, r.seed,
                "nan" if math.isnan(r.xi) else f"{r.xi:.12e}",
                int(r.feasible),
            ])


def write_timings(rows: list, path) -> None:
    """Measured wall time per row; nondeterministic by nature, hence kept
    out of the byte-stable results file."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TIMING_COLUMNS)
        for r in rows:
            writer.writerow([
                r.experiment, r.algorithm, r.axis, f"{r.value:.6g}",
                r.variant, r.seed, f"{r.wallclock:.6f}",
            ])


def read_rows(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(ResultRow(
                experiment=rec["experiment"], algorithm=rec["algorithm"],
                axis=rec["axis"], value=float(rec["value"]),
                variant=rec["variant"], seed=int(rec["seed"]),
                xi=float(rec["xi_joules"]), feasible=bool(int(rec["feasible"])),
                wallclock=float(rec.get("wallclock_s", 0.0) or 0.0)))
    return rows


def summarize(rows: list) -> list:
    """Mean/std/count of the objective per (point, algorithm).

    Infeasible rows are excluded from the mean and counted separately, so
    aggregates are NaN-free.
    """
    if not rows:
        raise EmptyInput("no rows to summarize")
    groups: dict = {}
    for r in rows:
        key = (r.experiment, r.algorithm, r.axis, r.value, r.variant)
        groups.setdefault(key, []).append(r)
    table = []
    for key in sorted(groups, key=lambda k: (k[0], k[2], k[3], k[4], k[1])):
        rs = groups[key]
        vals = np.array([r.xi for r in rs if r.feasible])
        table.append({
            "experiment": key[0], "algorithm": key[1], "axis": key[2],
            "value": key[3], "variant": key[4],
            "n": len(rs), "n_feasible": int(vals.size),
            "mean_xi": float(vals.mean()) if vals.size else math.nan,
            "std_xi": float(vals.std(ddof=0)) if vals.size else math.nan,
        })
    return table


__all__ = ["ExperimentSpec", "ResultRow", "SweepPoint", "build_experiment",
           "load_scenario", "run_experiment", "summarize", "write_rows",
           "read_rows", "write_timings", "EXPERIMENT_IDS", "ALGORITHMS"]
