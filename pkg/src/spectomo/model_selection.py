"""Cross-validation over held-out measurement batches.

Each routine holds out one batch at a time, fits on the pooled remaining
batches and scores the fit by its squared Frobenius distance to the LSE of
the held-out batch.  Because that LSE is unbiased and independent of the
fit, the average score tracks the fit's mean squared error up to a constant.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .estimators import (
    argmin_first,
    frobenius_error,
    least_squares,
    noise_level,
    penalised,
    physical_threshold,
    spectral_decompose,
    trace_normalize,
)
from .sampler import CountsDataset, merge

DEFAULT_EPSILON = 0.1


def default_grid() -> np.ndarray:
    """The 31 constants ``0.0, 0.1, ..., 3.0``."""
    return np.round(np.linspace(0.0, 3.0, 31), 12)


def check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("CV grid must be nonempty")
    if (np.diff(grid) < 0).any():
        raise ValueError("CV grid must be sorted ascending")
    if grid[0] < 0 or grid[-1] > 3:
        raise ValueError("CV grid values must lie in [0, 3]")
    return grid


@dataclass
class CvReport:
    """Criterion values per candidate, with the per-fold discrepancies behind them."""

    parameter: str
    candidates: list
    criterion: list
    fold_discrepancies: list
    selected: float
    final_rank: int
    nu: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _folds(batches) -> list[tuple[CountsDataset, CountsDataset]]:
    batches = list(batches)
    if len(batches) < 2:
        raise ValueError(f"cross-validation needs at least 2 batches, got {len(batches)}")
    k = batches[0].k
    if any(b.k != k for b in batches):
        raise ValueError("all batches must have the same qubit count")
    return [(merge(batches[:j] + batches[j + 1 :]), batches[j]) for j in range(len(batches))]


def _select(parameter, candidates, discrepancies) -> tuple[int, CvReport]:
    disc = np.asarray(discrepancies)
    crit = disc.mean(axis=0)
    best = argmin_first(crit)
    report = CvReport(
        parameter=parameter,
        candidates=[float(c) for c in candidates],
        criterion=crit.tolist(),
        fold_discrepancies=disc.tolist(),
        selected=float(candidates[best]),
        final_rank=-1,
    )
    return best, report


def cv_rank(batches):
    """Choose the truncation rank of the LSE by cross-validation.

    Returns ``(kappa, estimate, report)`` where the estimate truncates the LSE
    of all batches pooled.  Ties go to the smallest rank.
    """
    folds = _folds(batches)
    d = folds[0][1].d
    kappas = np.arange(1, d + 1)
    disc = np.empty((len(folds), d))
    for j, (train, test) in enumerate(folds):
        dec = spectral_decompose(least_squares(train))
        held = least_squares(test)
        disc[j] = [frobenius_error(dec.truncate(kappa), held) for kappa in kappas]
    best, report = _select("rank", kappas, disc)
    kappa = int(kappas[best])
    estimate = spectral_decompose(least_squares(merge(batches))).truncate(kappa)
    report.selected = kappa
    report.final_rank = kappa
    return kappa, estimate, report


def _cv_constant(batches, grid, epsilon, fit, parameter):
    grid = check_grid(grid)
    folds = _folds(batches)
    disc = np.empty((len(folds), grid.size))
    for j, (train, test) in enumerate(folds):
        lse = least_squares(train)
        nu = noise_level(train.k, train.n, epsilon).nu
        held = least_squares(test)
        disc[j] = [frobenius_error(fit(lse, c, nu)[0], held) for c in grid]
    best, report = _select(parameter, grid, disc)
    c_hat = float(grid[best])
    pooled = merge(batches)
    nu_all = noise_level(pooled.k, pooled.n, epsilon).nu
    estimate, rank = fit(least_squares(pooled), c_hat, nu_all)
    report.final_rank = int(rank)
    report.nu = nu_all
    return c_hat, estimate, report


def _fit_penalised(lse, c, nu):
    # penalty c * nu**2 on the rank, i.e. threshold sqrt(c) * nu on |lambda|
    return penalised(lse, np.sqrt(c) * nu)


def _fit_physical(lse, c, nu):
    return physical_threshold(trace_normalize(lse), c * nu)


def cv_penalty_constant(batches, grid=None, epsilon: float = DEFAULT_EPSILON):
    """Tune ``c`` in the rank penalty ``c * nu**2`` by cross-validation.

    Inside each fold ``nu`` uses the training repetitions; the final
    estimate recomputes ``nu`` from all pooled repetitions.
    """
    grid = default_grid() if grid is None else grid
    return _cv_constant(batches, grid, epsilon, _fit_penalised, "penalty_constant")


def cv_threshold_constant(batches, grid=None, epsilon: float = DEFAULT_EPSILON):
    """Tune ``c`` in the physical threshold ``c * 4 nu`` by cross-validation."""
    grid = default_grid() if grid is None else grid
    return _cv_constant(batches, grid, epsilon, _fit_physical, "threshold_constant")
