"""Benchmark harness: runtime/error experiments over (algorithm, size, sparsity) grids.

For every cell the harness generates planted signals, runs the requested
transform, and records wall time and the average L1 spectral error against
the known ground truth.  Signals and algorithm randomness derive from the
master seed per (size, sparsity, trial), so re-running a spec reproduces
the error columns bit for bit while timings float.  Window construction is
warmed per cell and excluded from the timed region unless requested.
"""

from __future__ import annotations

import csv
import json
import os
import platform
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .corefft import fft2d
from .engine import ConfigurationError, SfftConfig, sfft2d
from .hashing import WindowCache
from .signals import error_metric, generate_planted
from .tuner import TunerConfig, atsfft2d

__all__ = [
    "ALGORITHMS",
    "ExperimentSpec",
    "ResultRow",
    "run_experiment",
    "write_rows_csv",
    "read_rows_csv",
    "write_sidecar",
    "summarize",
    "Summary",
]

ALGORITHMS = ("dense", "sfft", "atsfft")

_CSV_FIELDS = (
    "algorithm",
    "n",
    "k",
    "trial",
    "wall_time_seconds",
    "error_metric",
    "detected_k",
    "converged",
    "b_final",
    "status",
    "setup_seconds",
)


@dataclass
class ExperimentSpec:
    """Grid definition: algorithms, sizes, sparsities, trials, master seed."""

    algorithms: tuple = ALGORITHMS
    sizes: tuple = (256,)
    sparsities: tuple = (8,)
    trials: int = 100
    seed: int = 0
    loops: int = 8
    est_loops: int = 8
    include_setup: bool = False

    def __post_init__(self):
        self.algorithms = tuple(self.algorithms)
        self.sizes = tuple(int(v) for v in self.sizes)
        self.sparsities = tuple(int(v) for v in self.sparsities)
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")
        for n in self.sizes:
            if n & (n - 1) or n < 4:
                raise ValueError(f"size {n} is not a power of 2 >= 4")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class ResultRow:
    algorithm: str
    n: int
    k: int
    trial: int
    wall_time_seconds: float
    error_metric: float
    detected_k: int | None = None
    converged: bool | None = None
    b_final: int | None = None
    status: str = "ok"
    setup_seconds: float = 0.0


def _signal_seed(master: int, n: int, k: int, trial: int) -> int:
    ss = np.random.SeedSequence([master, n, k, trial])
    return int(ss.generate_state(1)[0])


def _algo_rng(master: int, n: int, k: int, trial: int, algo: str) -> np.random.Generator:
    ss = np.random.SeedSequence([master, n, k, trial, ALGORITHMS.index(algo)])
    return np.random.default_rng(ss)


def _warm_windows(cache: WindowCache, n: int, delta_stop: float, delta_pass: float) -> float:
    start = time.perf_counter()
    b = 4
    while b <= n:
        cache.get(n, b, delta_stop, delta_pass)
        b *= 2
    return time.perf_counter() - start


def _run_one(algo: str, sig, spec: ExperimentSpec, rng, cache: WindowCache):
    """Execute one trial; returns (elapsed, error, detected_k, converged, b_final)."""
    n, k = sig.n, sig.k
    if algo == "dense":
        start = time.perf_counter()
        xhat = fft2d(sig.x)
        elapsed = time.perf_counter() - start
        approx = {key: complex(xhat[key]) for key in sig.truth}
        return elapsed, error_metric(approx, sig.truth, k), None, None, None
    if algo == "sfft":
        cfg = SfftConfig(n=n, k=k, loops=spec.loops)
        start = time.perf_counter()
        approx = sfft2d(sig.x, cfg, rng, cache=cache)
        elapsed = time.perf_counter() - start
        return elapsed, error_metric(approx, sig.truth, k), None, None, cfg.b_bins
    cfg = TunerConfig()
    start = time.perf_counter()
    approx, state = atsfft2d(sig.x, cfg, spec.est_loops, rng, cache=cache)
    elapsed = time.perf_counter() - start
    err = error_metric(approx, sig.truth, k)
    return elapsed, err, state.detected_k, state.converged, state.b_estimate


def run_experiment(spec: ExperimentSpec, *, progress=None) -> list[ResultRow]:
    """Run the full grid serially; one warm-up trial per cell is discarded.

    Infeasible cells (configuration errors) are recorded with a status flag
    and the run continues.
    """
    rows: list[ResultRow] = []
    deltas = (TunerConfig().window_delta_stop, TunerConfig().window_delta_pass)
    for n in spec.sizes:
        for k in spec.sparsities:
            for algo in spec.algorithms:
                cache = WindowCache()
                setup = 0.0
                if not spec.include_setup and algo != "dense":
                    setup = _warm_windows(cache, n, *deltas)
                for trial in range(-1, spec.trials):
                    warmup = trial < 0
                    idx = 0 if warmup else trial
                    sig = generate_planted(n, k, _signal_seed(spec.seed, n, k, idx))
                    rng = _algo_rng(spec.seed, n, k, idx, algo)
                    trial_cache = cache if not spec.include_setup else WindowCache()
                    try:
                        elapsed, err, det, conv, b_final = _run_one(
                            algo, sig, spec, rng, trial_cache
                        )
                        status = "ok"
                    except ConfigurationError as exc:
                        elapsed, err, det, conv, b_final = 0.0, float("nan"), None, None, None
                        status = f"error: {exc}"
                    if warmup:
                        continue
                    rows.append(
                        ResultRow(
                            algorithm=algo,
                            n=n,
                            k=k,
                            trial=trial,
                            wall_time_seconds=elapsed,
                            error_metric=err,
                            detected_k=det,
                            converged=conv,
                            b_final=b_final,
                            status=status,
                            setup_seconds=setup,
                        )
                    )
                    if progress is not None:
                        progress(rows[-1])
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def write_rows_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, name)) for name in _CSV_FIELDS])


def read_rows_csv(path) -> list[ResultRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append(
                ResultRow(
                    algorithm=rec["algorithm"],
                    n=int(rec["n"]),
                    k=int(rec["k"]),
                    trial=int(rec["trial"]),
                    wall_time_seconds=float(rec["wall_time_seconds"]),
                    error_metric=float(rec["error_metric"]),
                    detected_k=int(rec["detected_k"]) if rec["detected_k"] else None,
                    converged=rec["converged"] == "true" if rec["converged"] else None,
                    b_final=int(rec["b_final"]) if rec["b_final"] else None,
                    status=rec["status"],
                    setup_seconds=float(rec["setup_seconds"]),
                )
            )
    return rows


def write_sidecar(spec: ExperimentSpec, path) -> None:
    """JSON sidecar describing the spec and the measurement environment."""
    payload = {
        "spec": asdict(spec),
        "environment": {
            "sfft2d": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "platform": platform.platform(),
            "cpu_count": os.cpu_count(),
            "threads_env": os.environ.get("SFFT2D_THREADS"),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


@dataclass
class CellSummary:
    algorithm: str
    n: int
    k: int
    trials: int
    mean_time: float
    median_time: float
    mean_error: float
    median_error: float
    max_error: float
    detection_rate: float | None
    failed: int


@dataclass
class Summary:
    """Aggregates plus the paper-shaped speedup and error tables."""

    cells: dict = field(default_factory=dict)  # (algo, n, k) -> CellSummary

    def sizes(self):
        return sorted({n for _, n, _ in self.cells})

    def sparsities(self):
        return sorted({k for _, _, k in self.cells})

    def algorithms(self):
        return [a for a in ALGORITHMS if any(key[0] == a for key in self.cells)]

    def cell(self, algo, n, k):
        return self.cells.get((algo, n, k))

    def speedup(self, fast: str, slow: str, n: int, k: int) -> float | None:
        """Mean-runtime ratio slow/fast (how many times faster ``fast`` is)."""
        a = self.cell(fast, n, k)
        b = self.cell(slow, n, k)
        if a is None or b is None or a.mean_time == 0:
            return None
        return b.mean_time / a.mean_time


def summarize(rows) -> Summary:
    """Aggregate raw rows into per-cell statistics."""
    if not rows:
        raise ValueError("no rows to summarize")
    groups: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        groups.setdefault((row.algorithm, row.n, row.k), []).append(row)
    summary = Summary()
    for key, cell_rows in groups.items():
        ok = [r for r in cell_rows if r.status == "ok"]
        failed = len(cell_rows) - len(ok)
        if not ok:
            summary.cells[key] = CellSummary(
                key[0], key[1], key[2], 0, float("nan"), float("nan"),
                float("nan"), float("nan"), float("nan"), None, failed,
            )
            continue
        times = np.array([r.wall_time_seconds for r in ok])
        errs = np.array([r.error_metric for r in ok])
        detection = None
        if key[0] == "atsfft":
            hits = [r.detected_k == r.k for r in ok]
            detection = float(np.mean(hits))
        summary.cells[key] = CellSummary(
            algorithm=key[0],
            n=key[1],
            k=key[2],
            trials=len(ok),
            mean_time=float(times.mean()),
            median_time=float(np.median(times)),
            mean_error=float(errs.mean()),
            median_error=float(np.median(errs)),
            max_error=float(errs.max()),
            detection_rate=detection,
            failed=failed,
        )
    return summary


_SPEEDUP_PAIRS = (("atsfft", "sfft"), ("sfft", "dense"), ("atsfft", "dense"))


def summary_tables(summary: Summary) -> list[tuple[str, list[list[str]]]]:
    """Render the summary as titled tables (list-of-rows, first row header)."""
    tables = []
    sizes = summary.sizes()
    for k in summary.sparsities():
        header = ["metric"] + [f"n={n}" for n in sizes]
        body = []
        for algo in summary.algorithms():
            cells = [summary.cell(algo, n, k) for n in sizes]
            body.append(
                [f"{algo} mean time [s]"]
                + [f"{c.mean_time:.4g}" if c else "-" for c in cells]
            )
        for fast, slow in _SPEEDUP_PAIRS:
            if fast in summary.algorithms() and slow in summary.algorithms():
                vals = [summary.speedup(fast, slow, n, k) for n in sizes]
                body.append(
                    [f"{fast}/{slow} speedup"]
                    + [f"{v:.2f}x" if v is not None else "-" for v in vals]
                )
        tables.append((f"runtime and speedup, k={k}", [header] + body))

        body = []
        for algo in summary.algorithms():
            cells = [summary.cell(algo, n, k) for n in sizes]
            body.append(
                [f"{algo} mean error"]
                + [f"{c.mean_error:.3g}" if c else "-" for c in cells]
            )
        at_cells = [summary.cell("atsfft", n, k) for n in sizes]
        if any(at_cells):
            body.append(
                ["atsfft detection rate"]
                + [
                    f"{c.detection_rate:.2f}" if c and c.detection_rate is not None else "-"
                    for c in at_cells
                ]
            )
        tables.append((f"error, k={k}", [header] + body))
    return tables


def render_tables_text(tables) -> str:
    out = []
    for title, rows in tables:
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        out.append(title)
        for row in rows:
            out.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        out.append("")
    return "\n".join(out)


def render_tables_csv(tables) -> str:
    lines = []
    for title, rows in tables:
        lines.append(f"# {title}")
        for row in rows:
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"
