"""Least-squares tomography and its spectral post-processing.

The least-squares estimate (LSE) is the plug-in inversion of the Pauli
measurement map.  The other estimators act on its spectrum:

* ``truncate_rank`` keeps the ``kappa`` eigenvalues of largest modulus;
* ``penalised`` keeps every eigenvalue with ``|lambda| >= nu``;
* ``physical_threshold`` iteratively removes eigenvalues at or below
  ``4 nu`` and redistributes the removed mass so the result is a state.

The noise level ``nu`` is the stated operator-norm bound for the LSE,
``nu(eps)**2 = (2/n) (2/3)**k log(2**(k+1)/eps)``.  A tighter threshold
``t`` with ``t**2 / (1 + 2t/3)`` on the left-hand side arises inside the
concentration argument; the stated form is the one used for all
thresholds here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .pauli_model import _check_k, check_hermitian, hermitize, reconstruct_from_probabilities
from .sampler import CountsDataset, _write_json, frequencies, state_to_dict


@dataclass(frozen=True)
class NoiseLevel:
    k: int
    n: int
    epsilon: float
    nu_squared: float

    @property
    def nu(self) -> float:
        return math.sqrt(self.nu_squared)


def noise_level(k: int, n: int, epsilon: float = 0.1) -> NoiseLevel:
    """Operator-norm noise level of the LSE at confidence ``1 - epsilon`` (natural log)."""
    k = _check_k(k)
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if n < 1:
        raise ValueError(f"repetitions n must be >= 1, got {n!r}")
    nu2 = (2 / n) * (2 / 3) ** k * math.log(2 ** (k + 1) / epsilon)
    return NoiseLevel(k=k, n=int(n), epsilon=float(epsilon), nu_squared=nu2)


def least_squares(dataset: CountsDataset) -> np.ndarray:
    return reconstruct_from_probabilities(frequencies(dataset))


def trace_normalize(m) -> np.ndarray:
    """Closest trace-one Hermitian matrix in Frobenius norm: ``M + (1 - Tr M)/d * I``."""
    m = check_hermitian(m)
    d = m.shape[0]
    return m + (1 - np.trace(m).real) / d * np.eye(d)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs sorted by ``|lambda|`` descending; ties put the larger signed value first."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def matrix(self, values=None) -> np.ndarray:
        lam = self.eigenvalues if values is None else np.asarray(values)
        v = self.eigenvectors
        return hermitize((v * lam) @ v.conj().T)

    def truncate(self, kappa: int) -> np.ndarray:
        d = self.eigenvalues.size
        if int(kappa) != kappa or not 0 <= kappa <= d:
            raise ValueError(f"rank kappa must be an integer in [0, {d}], got {kappa!r}")
        v = self.eigenvectors[:, :kappa]
        return hermitize((v * self.eigenvalues[:kappa]) @ v.conj().T)


def _eigh(m: np.ndarray):
    try:
        return np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc


def spectral_decompose(m) -> SpectralDecomposition:
    m = check_hermitian(m, tol=1e-8)
    lam, vec = _eigh(m)
    # lexsort: last key is primary; the original index keeps solver order on exact ties
    order = np.lexsort((np.arange(lam.size), -lam, -np.abs(lam)))
    return SpectralDecomposition(eigenvalues=lam[order], eigenvectors=vec[:, order])


def truncate_rank(m, kappa: int) -> np.ndarray:
    """Best Frobenius approximation of ``m`` with rank at most ``kappa``."""
    return spectral_decompose(m).truncate(kappa)


def penalised_rank(eigenvalues, nu: float) -> int:
    """``max{kappa : lambda_kappa**2 >= nu**2}`` for modulus-sorted eigenvalues, 0 if empty."""
    lam = np.asarray(eigenvalues)
    keep = np.nonzero(lam**2 >= nu**2)[0]
    return int(keep[-1]) + 1 if keep.size else 0


def penalised(m, nu: float) -> tuple[np.ndarray, int]:
    """Rank-penalised estimate: drop eigenvalues with ``|lambda| < nu``.

    Returns the truncated matrix and the selected rank.  When no eigenvalue
    clears the threshold the result is the zero matrix with rank 0.
    """
    if nu < 0:
        raise ValueError(f"threshold nu must be nonnegative, got {nu!r}")
    dec = spectral_decompose(m)
    kappa = penalised_rank(dec.eigenvalues, nu)
    return dec.truncate(kappa), kappa


def penalised_normalized(m, nu: float) -> np.ndarray:
    return trace_normalize(penalised(m, nu)[0])


def threshold_eigenvalues(eigenvalues, threshold: float) -> np.ndarray:
    """Physical thresholding on a descending, trace-one eigenvalue vector.

    While the smallest retained value is ``<= threshold`` it is set to zero
    and the deficit ``1 - sum(retained)`` is spread evenly over the rest.
    A single remaining eigenvalue is never removed; it is set to 1.
    """
    lam = np.array(eigenvalues, dtype=float)
    m = lam.size
    while m > 0 and lam[m - 1] <= threshold:
        if m == 1:
            lam[0] = 1.0
            break
        lam[m - 1] = 0.0
        m -= 1
        lam[:m] += (1.0 - lam[:m].sum()) / m
    return lam


def physical_threshold(m, nu: float) -> tuple[np.ndarray, int]:
    """Density matrix closest to trace-one ``m`` whose nonzero eigenvalues exceed ``4 nu``.

    ``m`` should be the trace-normalised LSE.  Eigenvectors are kept, the
    spectrum is processed in decreasing signed order.  Returns the state and
    its rank.
    """
    if nu < 0:
        raise ValueError(f"threshold nu must be nonnegative, got {nu!r}")
    m = check_hermitian(m, tol=1e-8)
    tr = np.trace(m).real
    if abs(tr - 1) > 1e-8:
        raise ValueError(f"physical thresholding expects a trace-one input, got trace {tr!r}")
    lam, vec = _eigh(m)
    lam, vec = lam[::-1], vec[:, ::-1]
    new = threshold_eigenvalues(lam, 4 * nu)
    rank = int(np.count_nonzero(new))
    v = vec[:, :rank]
    return hermitize((v * new[:rank]) @ v.conj().T), rank


def frobenius_error(a, b) -> float:
    """Squared Frobenius distance ``||a - b||_2**2``."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(np.abs(a - b) ** 2))


def operator_norm(a) -> float:
    a = check_hermitian(a, tol=1e-8)
    return float(np.max(np.abs(np.linalg.eigvalsh(a))))


def oracle(m, rho_true) -> tuple[np.ndarray, int]:
    """Truncation of ``m`` closest to the true state, over ranks 1..d (smallest rank on ties)."""
    m, rho_true = np.asarray(m), np.asarray(rho_true)
    if m.shape != rho_true.shape:
        raise ValueError(f"dimension mismatch: {m.shape} vs {rho_true.shape}")
    dec = spectral_decompose(m)
    truncs = [dec.truncate(kappa) for kappa in range(1, m.shape[0] + 1)]
    errors = [frobenius_error(t, rho_true) for t in truncs]
    best = argmin_first(errors)
    return truncs[best], best + 1


# Criterion values closer than this are treated as tied (rounding noise on exact fits).
TIE_ATOL = 1e-14


def argmin_first(values, atol: float = TIE_ATOL) -> int:
    """Index of the first value within ``atol`` of the minimum."""
    values = np.asarray(values, dtype=float)
    return int(np.nonzero(values <= values.min() + atol)[0][0])


def save_estimate(estimate, path, *, method: str, selected_rank: int, nu: float | None = None, **extra):
    return _write_json(
        path,
        state_to_dict(estimate, selected_rank=int(selected_rank), nu=nu, method=method, **extra),
    )
