"""Batch experiment runner: seeded trials, timing studies, artifact emission.

An experiment is a problem family, a list of labeled solver runs, and a
trial count. Trial t of run "label" solves with seed derived as the first 8
little-endian bytes of SHA-256 of ``f"{master}\\x1f{label}\\x1f{trial}"``;
problem seeds use the reserved labels ``problem/matrix:<base>``,
``problem/solution:<base>`` and ``problem/corruption:<base>``. Every trial's
seeds depend only on its own index, so adding or removing other trials never
changes its trace.

Emitted artifacts (trajectory CSV, summary JSON, tables) sort rows by
(label, trial, iteration) and are byte-deterministic functions of the spec,
wall-clock columns excepted. Floats serialize as shortest round-trip
decimals; absent optional fields serialize as empty CSV cells.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import platform
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from ._util import atomic_write_text
from ._version import __version__
from .bounds import robustness_diagnostic
from .errors import QuantileKaczmarzError
from .linalg import extreme_singular_values, normalize_rows
from .matrixmarket import load_matrix_market
from .problems import (
    CorruptionSpec,
    FileSource,
    GeneratedSource,
    ProblemSpec,
    generate_system,
)
from .solver import (
    OnHyperplane,
    Origin,
    SelectorKind,
    SolveTrace,
    SolverConfig,
    StopRule,
    X0Policy,
    parse_selector,
    solve,
)
from .spectral import leave_one_out_sigma_min


def derive_seed(master: int, label: str, trial: int) -> int:
    """Stable 64-bit seed from (master seed, label, trial index)."""
    digest = hashlib.sha256(f"{master}\x1f{label}\x1f{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


# --------------------------------------------------------------------------
# experiment specification


@dataclass(frozen=True)
class RunSpec:
    """One labeled solver configuration; the seed is derived per trial."""

    label: str
    selector: SelectorKind
    max_iters: int
    stop: StopRule | None = None
    x0: X0Policy = field(default_factory=Origin)


ARTIFACT_KINDS = ("trajectory", "summary")


@dataclass(frozen=True)
class ExperimentSpec:
    problem: ProblemSpec
    runs: tuple[RunSpec, ...]
    trials: int = 1
    seed: int = 0
    record_every: int = 1
    fresh_problem_per_trial: bool = True
    workers: int = 1
    outputs: tuple[str, ...] = ARTIFACT_KINDS

    def __post_init__(self):
        object.__setattr__(self, "runs", tuple(self.runs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        labels = [run.label for run in self.runs]
        if len(set(labels)) != len(labels):
            raise ValueError("run labels must be unique")
        if not self.runs:
            raise ValueError("at least one run is required")
        unknown = set(self.outputs) - set(ARTIFACT_KINDS)
        if unknown:
            raise ValueError(f"unknown artifact kinds {sorted(unknown)}")


def problem_for_trial(spec: ExperimentSpec, trial: int) -> ProblemSpec:
    """The trial's problem, with seeds derived from the master seed."""
    t = trial if spec.fresh_problem_per_trial else 0
    problem = spec.problem
    source = problem.source
    if isinstance(source, GeneratedSource):
        source = dataclasses.replace(
            source, seed=derive_seed(spec.seed, f"problem/matrix:{source.seed}", t)
        )
    corruption = problem.corruption
    if corruption is not None:
        corruption = dataclasses.replace(
            corruption, seed=derive_seed(spec.seed, f"problem/corruption:{corruption.seed}", t)
        )
    return dataclasses.replace(
        problem,
        source=source,
        corruption=corruption,
        solution_seed=derive_seed(spec.seed, f"problem/solution:{problem.solution_seed}", t),
    )


# --------------------------------------------------------------------------
# running


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    traces: dict[tuple[str, int], SolveTrace]
    failures: dict[tuple[str, int], str]
    seeds: dict[tuple[str, int], int]


def run_experiment(spec: ExperimentSpec, record: bool = True) -> ExperimentResult:
    """Solve every (run, trial) pair; per-run failures do not abort the rest."""
    systems = [generate_system(problem_for_trial(spec, t)) for t in range(spec.trials)]

    jobs = [(run, trial) for trial in range(spec.trials) for run in spec.runs]
    seeds = {(run.label, trial): derive_seed(spec.seed, run.label, trial)
             for run, trial in jobs}

    def run_one(job):
        run, trial = job
        config = SolverConfig(
            selector=run.selector,
            max_iters=run.max_iters,
            seed=seeds[(run.label, trial)],
            x0=run.x0,
            stop=run.stop,
        )
        try:
            trace = solve(systems[trial], config,
                          record_every=spec.record_every, record=record)
            return (run.label, trial), trace, None
        except QuantileKaczmarzError as exc:
            return (run.label, trial), None, f"{type(exc).__name__}: {exc}"

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            outcomes = list(pool.map(run_one, jobs))
    else:
        outcomes = [run_one(job) for job in jobs]

    traces = {key: trace for key, trace, err in outcomes if err is None}
    failures = {key: err for key, trace, err in outcomes if err is not None}
    return ExperimentResult(spec=spec, traces=traces, failures=failures, seeds=seeds)


# --------------------------------------------------------------------------
# thresholds and timing


@dataclass(frozen=True)
class ThresholdResult:
    """Iterations/wall-clock to reach a squared-error target, per trial.

    ``iterations`` holds None for censored trials (target not reached);
    medians and interquartile ranges cover only the trials that reached it.
    """

    label: str
    threshold: float
    iterations: tuple[int | None, ...]
    seconds: tuple[float, ...]
    reached_fraction: float
    median_iterations: float | None
    iqr_iterations: float | None
    median_seconds: float | None
    iqr_seconds: float | None


def _median_iqr(values) -> tuple[float | None, float | None]:
    values = sorted(values)
    if not values:
        return None, None
    med = statistics.median(values)
    if len(values) == 1:
        return float(med), 0.0
    q1, q3 = np.percentile(values, [25, 75])
    return float(med), float(q3 - q1)


def time_to_threshold(spec: ExperimentSpec, threshold: float) -> list[ThresholdResult]:
    """Per run: iterations and wall-clock until the squared error reaches
    ``threshold``, censored at the run's iteration cap."""
    systems = [generate_system(problem_for_trial(spec, t)) for t in range(spec.trials)]
    results = []
    for run in spec.runs:
        iters: list[int | None] = []
        secs: list[float] = []
        for trial in range(spec.trials):
            config = SolverConfig(
                selector=run.selector,
                max_iters=run.max_iters,
                seed=derive_seed(spec.seed, run.label, trial),
                x0=run.x0,
                stop=StopRule(target_sq_error=threshold),
            )
            start = time.perf_counter()
            trace = solve(systems[trial], config, record=False)
            elapsed = time.perf_counter() - start
            reached = trace.termination == "target_sq_error"
            iters.append(trace.iterations if reached else None)
            secs.append(elapsed)
        reached_iters = [i for i in iters if i is not None]
        reached_secs = [s for s, i in zip(secs, iters) if i is not None]
        med_i, iqr_i = _median_iqr(reached_iters)
        med_s, iqr_s = _median_iqr(reached_secs)
        results.append(ThresholdResult(
            label=run.label,
            threshold=threshold,
            iterations=tuple(iters),
            seconds=tuple(secs),
            reached_fraction=len(reached_iters) / spec.trials,
            median_iterations=med_i,
            iqr_iterations=iqr_i,
            median_seconds=med_s,
            iqr_seconds=iqr_s,
        ))
    return results


@dataclass(frozen=True)
class BenchRow:
    label: str
    iters: int
    seconds: tuple[float, ...]
    seconds_median: float


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[BenchRow, ...]

    def seconds(self, label: str) -> float:
        for row in self.rows:
            if row.label == label:
                return row.seconds_median
        raise KeyError(label)

    def ratio(self, label_a: str, label_b: str) -> float:
        return self.seconds(label_a) / self.seconds(label_b)


def cost_parity_benchmark(
    problem: ProblemSpec,
    runs,
    iters: int,
    repeats: int = 5,
    seed: int = 0,
) -> BenchReport:
    """Median-of-``repeats`` wall-clock for exactly ``iters`` iterations.

    Recording is disabled and runs execute sequentially after one warmup
    pass each, so the comparison isolates the per-iteration cost.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    system = generate_system(problem)
    rows = []
    for idx, run in enumerate(runs):
        config = SolverConfig(selector=run.selector, max_iters=iters,
                              seed=derive_seed(seed, run.label, 0), x0=run.x0)
        solve(system, config, record=False)  # warmup
        times = []
        for _ in range(repeats):
            start = time.perf_counter()
            solve(system, config, record=False)
            times.append(time.perf_counter() - start)
        rows.append(BenchRow(label=run.label, iters=iters, seconds=tuple(times),
                             seconds_median=float(statistics.median(times))))
    return BenchReport(rows=tuple(rows))


# --------------------------------------------------------------------------
# diagnostics table


@dataclass(frozen=True)
class DiagnosticRow:
    matrix: str
    rows: int | None
    cols: int | None
    sigma_loo_min: float | None
    diagnostic: float | None
    error: str | None = None


def diagnostic_report(paths, q0: float, q1: float, beta: float) -> list[DiagnosticRow]:
    """Row-normalize each matrix file and report (sigma_loo_min, diagnostic).

    Per-file errors are captured in the row rather than raised, so one bad
    file does not sink the table.
    """
    out = []
    for path in paths:
        path = Path(path)
        try:
            a = load_matrix_market(path)
            a, _ = normalize_rows(a)
            m, n = a.shape
            sigma_loo = leave_one_out_sigma_min(a)
            _, sigma_max = extreme_singular_values(a)
            value = robustness_diagnostic(sigma_max, sigma_loo, q0, q1, beta, m)
            out.append(DiagnosticRow(matrix=path.stem, rows=m, cols=n,
                                     sigma_loo_min=sigma_loo, diagnostic=value))
        except (QuantileKaczmarzError, OSError, ValueError) as exc:
            out.append(DiagnosticRow(matrix=path.stem, rows=None, cols=None,
                                     sigma_loo_min=None, diagnostic=None,
                                     error=f"{type(exc).__name__}: {exc}"))
    return out


# --------------------------------------------------------------------------
# artifact emission


def _cell(value) -> str:
    """CSV cell: shortest round-trip decimals, empty for absent values."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    return str(value)


def trajectory_rows(result: ExperimentResult):
    """Flattened per-record rows sorted by (label, trial, iteration)."""
    for label, trial in sorted(result.traces):
        trace = result.traces[(label, trial)]
        for rec in trace.records:
            yield {
                "label": label,
                "trial": trial,
                "iteration": rec.iteration,
                "squared_error": rec.sq_error,
                "residual_norm": rec.residual_norm,
                "chosen_row": rec.row,
                "Q0": rec.q0_value,
                "Q1": rec.q1_value,
            }


TRAJECTORY_COLUMNS = ["label", "trial", "iteration", "squared_error",
                      "residual_norm", "chosen_row", "Q0", "Q1"]


def write_trajectory_csv(result: ExperimentResult, path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    for row in trajectory_rows(result):
        writer.writerow([_cell(row[c]) for c in TRAJECTORY_COLUMNS])
    atomic_write_text(path, buf.getvalue())


def _selector_dict(kind: SelectorKind) -> dict:
    out = {"method": kind.name}
    for f in dataclasses.fields(kind):
        out[f.name] = getattr(kind, f.name)
    return out


def _x0_dict(policy: X0Policy):
    if isinstance(policy, OnHyperplane):
        return "hyperplane" if policy.row is None else f"hyperplane:{policy.row}"
    return "origin"


def spec_to_dict(spec: ExperimentSpec) -> dict:
    problem = spec.problem
    if isinstance(problem.source, GeneratedSource):
        source = {"kind": "generated", "dist": problem.source.dist,
                  "m": problem.source.m, "n": problem.source.n, "seed": problem.source.seed}
    else:
        source = {"kind": "file", "path": str(problem.source.path)}
    problem_dict = {
        "source": source,
        "normalize": problem.normalize,
        "solution_seed": problem.solution_seed,
        "corruption": None if problem.corruption is None else {
            "beta": problem.corruption.beta,
            "low": problem.corruption.low,
            "high": problem.corruption.high,
            "scale": problem.corruption.scale,
            "seed": problem.corruption.seed,
        },
    }
    runs = []
    for run in spec.runs:
        entry = {"label": run.label, **_selector_dict(run.selector),
                 "iters": run.max_iters, "x0": _x0_dict(run.x0)}
        if run.stop is not None:
            entry["stop"] = {"target_sq_error": run.stop.target_sq_error,
                             "residual_norm": run.stop.residual_norm}
        runs.append(entry)
    return {
        "seed": spec.seed,
        "trials": spec.trials,
        "record_every": spec.record_every,
        "fresh_problem_per_trial": spec.fresh_problem_per_trial,
        "workers": spec.workers,
        "outputs": list(spec.outputs),
        "problem": problem_dict,
        "runs": runs,
    }


def spec_from_dict(data: dict) -> ExperimentSpec:
    """Parse the documented experiment JSON schema."""
    problem_data = data["problem"]
    source_data = problem_data["source"]
    if source_data.get("kind", "generated") == "file":
        source = FileSource(path=source_data["path"])
    else:
        source = GeneratedSource(
            dist=source_data["dist"], m=int(source_data["m"]), n=int(source_data["n"]),
            seed=int(source_data.get("seed", 0)),
        )
    corruption_data = problem_data.get("corruption")
    corruption = None
    if corruption_data is not None:
        corruption = CorruptionSpec(
            beta=float(corruption_data["beta"]),
            low=float(corruption_data.get("low", 0.0)),
            high=float(corruption_data.get("high", 1.0)),
            scale=float(corruption_data.get("scale", 1.0)),
            seed=int(corruption_data.get("seed", 0)),
        )
    problem = ProblemSpec(
        source=source,
        normalize=bool(problem_data.get("normalize", True)),
        corruption=corruption,
        solution_seed=int(problem_data.get("solution_seed", 0)),
    )
    runs = []
    for entry in data["runs"]:
        selector = parse_selector(entry["method"], q=entry.get("q"),
                                  q0=entry.get("q0"), q1=entry.get("q1"))
        stop_data = entry.get("stop")
        stop = None
        if stop_data is not None:
            stop = StopRule(
                target_sq_error=stop_data.get("target_sq_error"),
                residual_norm=stop_data.get("residual_norm"),
            )
        x0_data = entry.get("x0", "origin")
        if x0_data == "origin":
            x0: X0Policy = Origin()
        elif x0_data == "hyperplane":
            x0 = OnHyperplane()
        elif isinstance(x0_data, str) and x0_data.startswith("hyperplane:"):
            x0 = OnHyperplane(row=int(x0_data.split(":", 1)[1]))
        else:
            raise ValueError(f"unknown x0 policy {x0_data!r}")
        runs.append(RunSpec(label=entry["label"], selector=selector,
                            max_iters=int(entry["iters"]), stop=stop, x0=x0))
    return ExperimentSpec(
        problem=problem,
        runs=tuple(runs),
        trials=int(data.get("trials", 1)),
        seed=int(data.get("seed", 0)),
        record_every=int(data.get("record_every", 1)),
        fresh_problem_per_trial=bool(data.get("fresh_problem_per_trial", True)),
        workers=int(data.get("workers", 1)),
        outputs=tuple(data.get("outputs", ARTIFACT_KINDS)),
    )


def summary_dict(result: ExperimentResult) -> dict:
    runs = []
    for label, trial in sorted(result.traces):
        trace = result.traces[(label, trial)]
        last = trace.records[-1] if trace.records else None
        runs.append({
            "label": label,
            "trial": trial,
            "seed": result.seeds[(label, trial)],
            "iterations": trace.iterations,
            "termination": trace.termination,
            "records": len(trace.records),
            "final_sq_error": None if last is None else last.sq_error,
            "final_residual_norm": None if last is None else last.residual_norm,
        })
    failures = [{"label": label, "trial": trial, "error": err}
                for (label, trial), err in sorted(result.failures.items())]
    return {
        "schema": "quantile-kaczmarz/experiment-summary/v1",
        "spec": spec_to_dict(result.spec),
        "versions": {
            "quantile_kaczmarz": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "runs": runs,
        "failures": failures,
    }


def write_summary_json(result: ExperimentResult, path) -> None:
    atomic_write_text(path, json.dumps(summary_dict(result), sort_keys=True, indent=2) + "\n")


def write_threshold_table(results: list[ThresholdResult], path, fmt: str = "csv") -> None:
    if fmt == "json":
        payload = [dataclasses.asdict(r) for r in results]
        atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "threshold", "trials", "reached_fraction",
                     "median_iterations", "iqr_iterations",
                     "median_seconds", "iqr_seconds"])
    for r in results:
        writer.writerow([_cell(v) for v in (
            r.label, r.threshold, len(r.iterations), r.reached_fraction,
            r.median_iterations, r.iqr_iterations, r.median_seconds, r.iqr_seconds)])
    atomic_write_text(path, buf.getvalue())


def write_bench_table(report: BenchReport, path, fmt: str = "csv") -> None:
    if fmt == "json":
        payload = [dataclasses.asdict(r) for r in report.rows]
        atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "iters", "seconds_median", "seconds_per_iteration"])
    for r in report.rows:
        writer.writerow([_cell(v) for v in (
            r.label, r.iters, r.seconds_median, r.seconds_median / r.iters)])
    atomic_write_text(path, buf.getvalue())


def write_diagnostic_table(rows: list[DiagnosticRow], path, fmt: str = "csv") -> None:
    if fmt == "json":
        payload = [dataclasses.asdict(r) for r in rows]
        atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["matrix", "rows", "cols", "sigma_loo_min", "E", "error"])
    for r in rows:
        writer.writerow([_cell(v) for v in (
            r.matrix, r.rows, r.cols, r.sigma_loo_min, r.diagnostic, r.error)])
    atomic_write_text(path, buf.getvalue())


def emit_artifacts(result: ExperimentResult, outdir) -> dict[str, Path]:
    """Write the spec's requested artifacts into ``outdir``; returns paths."""
    outdir = Path(outdir)
    writers = {
        "trajectory": (outdir / "trajectory.csv", write_trajectory_csv),
        "summary": (outdir / "summary.json", write_summary_json),
    }
    paths = {}
    for kind in result.spec.outputs:
        path, writer = writers[kind]
        writer(result, path)
        paths[kind] = path
    return paths
