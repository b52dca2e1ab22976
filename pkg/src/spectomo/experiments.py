"""Simulation study harness: scenario grid, replicates, summaries and output files."""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from ._seeding import derive_seed
from .estimators import (
    frobenius_error,
    least_squares,
    noise_level,
    oracle,
    penalised,
    physical_threshold,
    trace_normalize,
)
from .model_selection import check_grid, cv_penalty_constant, cv_rank, cv_threshold_constant, default_grid
from .sampler import merge, split_batches
from .state_gen import StateSpec, random_rank_r_state
from . import svgplot

ESTIMATORS = ("ls", "oracle", "cv", "pen-cv", "phys-cv", "pen", "phys")
CSV_HEADER = ["rank", "n", "replicate", "estimator", "sq_error", "selected_rank", "chosen_constant"]

_STATE_KEY = 0x57A7E
_DATA_KEY = 0xDA7A


@dataclass
class ExperimentConfig:
    k: int = 4
    ranks: tuple = (1, 2, 6, 10)
    ns: tuple = (20, 100, 500, 2500)
    replicates: int = 100
    epsilon: float = 0.1
    grid: tuple = tuple(default_grid().tolist())
    batches: int = 5
    seed: int = 0
    out: str | None = None
    svg: bool = True
    workers: int = 1

    def __post_init__(self):
        self.ranks = tuple(int(r) for r in self.ranks)
        self.ns = tuple(int(n) for n in self.ns)
        self.grid = tuple(float(c) for c in check_grid(self.grid))
        d = 2**self.k
        if not 1 <= self.k <= 10:
            raise ValueError(f"k must lie in [1, 10], got {self.k}")
        if not self.ranks or any(not 1 <= r <= d for r in self.ranks):
            raise ValueError(f"ranks must be nonempty and within [1, {d}], got {self.ranks}")
        if self.batches < 2:
            raise ValueError(f"need at least 2 batches, got {self.batches}")
        if not self.ns or any(n < 1 or n % self.batches for n in self.ns):
            raise ValueError(f"every n must be a positive multiple of batches={self.batches}, got {self.ns}")
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError(f"config {path} must hold a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ranks"], out["ns"], out["grid"] = list(self.ranks), list(self.ns), list(self.grid)
        return out


PRESETS = {
    "full": ExperimentConfig(),
    "desk": ExperimentConfig(replicates=25, ns=(20, 100, 500)),
}


@dataclass(frozen=True)
class ExperimentRecord:
    rank: int
    n: int
    replicate: int
    estimator: str
    sq_error: float
    selected_rank: int
    chosen_constant: float | None = None

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if not self.sq_error >= 0:
            raise ValueError(f"squared error must be >= 0, got {self.sq_error}")

    def sort_key(self):
        return (self.rank, self.n, self.replicate, ESTIMATORS.index(self.estimator))


def true_state(config: ExperimentConfig, rank: int) -> np.ndarray:
    """The state shared by every n and replicate at this rank."""
    return random_rank_r_state(StateSpec(2**config.k, rank, derive_seed(config.seed, _STATE_KEY)))


def replicate_seed(config: ExperimentConfig, rank: int, n: int, replicate: int) -> int:
    return derive_seed(config.seed, _DATA_KEY, rank, n, replicate)


def run_replicate(rho, rank: int, n: int, replicate: int, config: ExperimentConfig) -> list[ExperimentRecord]:
    """All seven estimators on one simulated data set."""
    d = rho.shape[0]
    batches = split_batches(rho, n, replicate_seed(config, rank, n, replicate), config.batches)
    pooled = merge(batches)
    lse = least_squares(pooled)
    nu = noise_level(config.k, n, config.epsilon).nu

    def rec(name, est, sel, const=None):
        return ExperimentRecord(rank, n, replicate, name, frobenius_error(est, rho), int(sel), const)

    out = [rec("ls", lse, d)]
    est, kappa = oracle(lse, rho)
    out.append(rec("oracle", est, kappa))
    kappa, est, _ = cv_rank(batches)
    out.append(rec("cv", est, kappa))
    c, est, rep = cv_penalty_constant(batches, config.grid, config.epsilon)
    out.append(rec("pen-cv", est, rep.final_rank, c))
    c, est, rep = cv_threshold_constant(batches, config.grid, config.epsilon)
    out.append(rec("phys-cv", est, rep.final_rank, c))
    est, kappa = penalised(lse, nu)
    out.append(rec("pen", est, kappa))
    est, kappa = physical_threshold(trace_normalize(lse), nu)
    out.append(rec("phys", est, kappa))
    return out


def _task(args):
    return run_replicate(*args)


def run_experiment(config: ExperimentConfig, progress=None) -> list[ExperimentRecord]:
    """Run every (rank, n, replicate) cell; records come back sorted.

    ``progress`` is called with ``(done, total)`` after each replicate.
    """
    states = {r: true_state(config, r) for r in config.ranks}
    tasks = [
        (states[r], r, n, rep, config)
        for r in config.ranks
        for n in config.ns
        for rep in range(config.replicates)
    ]
    records = []
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for i, recs in enumerate(pool.map(_task, tasks, chunksize=4), 1):
                records.extend(recs)
                if progress:
                    progress(i, len(tasks))
    else:
        for i, t in enumerate(tasks, 1):
            records.extend(_task(t))
            if progress:
                progress(i, len(tasks))
    return sorted(records, key=ExperimentRecord.sort_key)


def aggregate(records) -> list[dict]:
    """Per (rank, n, estimator) summary statistics of the squared errors."""
    records = list(records)
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    groups: dict = {}
    for r in records:
        groups.setdefault((r.rank, r.n, r.estimator), []).append(r)
    rows = []
    for (rank, n, name) in sorted(groups, key=lambda g: (g[0], g[1], ESTIMATORS.index(g[2]))):
        grp = groups[(rank, n, name)]
        se = np.array([r.sq_error for r in grp])
        q = np.percentile(se, [0, 25, 50, 75, 100])
        hist: dict = {}
        for r in grp:
            hist[r.selected_rank] = hist.get(r.selected_rank, 0) + 1
        consts = [r.chosen_constant for r in grp if r.chosen_constant is not None]
        rows.append(
            {
                "rank": rank,
                "n": n,
                "estimator": name,
                "replicates": len(grp),
                "mean_sq_error": float(se.mean()),
                "std_error": float(se.std(ddof=1) / np.sqrt(se.size)) if se.size > 1 else 0.0,
                "min": float(q[0]),
                "q1": float(q[1]),
                "median": float(q[2]),
                "q3": float(q[3]),
                "max": float(q[4]),
                "renormalised_mse": float(n * se.mean()),
                "rank_histogram": {str(k): hist[k] for k in sorted(hist)},
                "mean_constant": float(np.mean(consts)) if consts else None,
            }
        )
    return rows


def summary_lookup(summary, rank, n, estimator) -> dict:
    for row in summary:
        if (row["rank"], row["n"], row["estimator"]) == (rank, n, estimator):
            return row
    raise KeyError((rank, n, estimator))


def _fmt_const(c):
    return "" if c is None else repr(float(c))


def write_records_csv(records, path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in records:
                w.writerow([r.rank, r.n, r.replicate, r.estimator, repr(float(r.sq_error)), r.selected_rank, _fmt_const(r.chosen_constant)])
    except OSError as exc:
        raise OSError(f"cannot write records to {path}: {exc}") from exc
    return path


def load_records_csv(path) -> list[ExperimentRecord]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CSV_HEADER:
                raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
            return [
                ExperimentRecord(
                    rank=int(row["rank"]),
                    n=int(row["n"]),
                    replicate=int(row["replicate"]),
                    estimator=row["estimator"],
                    sq_error=float(row["sq_error"]),
                    selected_rank=int(row["selected_rank"]),
                    chosen_constant=float(row["chosen_constant"]) if row["chosen_constant"] else None,
                )
                for row in reader
            ]
    except OSError as exc:
        raise OSError(f"cannot read records from {path}: {exc}") from exc


def _write_text(path: Path, text: str) -> Path:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_figures(summary, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    written = []
    ranks = sorted({row["rank"] for row in summary})
    ns = sorted({row["n"] for row in summary})
    for rank in ranks:
        for n in ns:
            boxes = {row["estimator"]: row for row in summary if row["rank"] == rank and row["n"] == n}
            if boxes:
                svg = svgplot.boxplot_svg(boxes, f"squared error, rank {rank}, n = {n}")
                written.append(_write_text(out_dir / f"boxplot_r{rank}_n{n}.svg", svg))
    for name in ESTIMATORS:
        series = {}
        for rank in ranks:
            rows = sorted((row for row in summary if row["rank"] == rank and row["estimator"] == name), key=lambda r: r["n"])
            if rows:
                series[f"rank {rank}"] = ([r["n"] for r in rows], [r["renormalised_mse"] for r in rows])
        if series:
            svg = svgplot.line_svg(series, f"n x mean squared error ({name})", "n", "n x MSE")
            written.append(_write_text(out_dir / f"renormalised_mse_{name}.svg", svg))
    for name in ("oracle", "cv", "pen-cv", "phys-cv", "pen", "phys"):
        for rank in ranks:
            panels = {}
            for row in summary:
                if row["rank"] == rank and row["estimator"] == name:
                    total = row["replicates"]
                    panels[f"n = {row['n']}"] = {k: v / total for k, v in row["rank_histogram"].items()}
            if panels:
                svg = svgplot.bar_panels_svg(panels, f"selected rank ({name}), true rank {rank}")
                written.append(_write_text(out_dir / f"rank_hist_{name}_r{rank}.svg", svg))
    return written


def emit_outputs(summary, records, out_dir, svg: bool = True, config: ExperimentConfig | None = None) -> dict:
    """Write ``records.csv``, ``summary.json`` and (optionally) SVG figures to ``out_dir``."""
    out_dir = Path(out_dir)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    paths = {"records": write_records_csv(records, out_dir / "records.csv")}
    payload = {"summary": summary}
    if config is not None:
        payload["config"] = config.to_dict()
    paths["summary"] = _write_text(out_dir / "summary.json", json.dumps(payload, indent=1) + "\n")
    paths["figures"] = write_figures(summary, out_dir) if svg else []
    return paths


def with_overrides(config: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
