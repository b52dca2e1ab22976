"""Random low-rank density matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._seeding import make_rng
from .errors import GenerationError
from .pauli_model import hermitize

MAX_RETRIES = 1000

# A rank-6 spectrum on four qubits with one dominant eigenvalue and no tiny ones.
REFERENCE_RANK6_SPECTRUM = (0.47, 0.19, 0.12, 0.11, 0.07, 0.04)


@dataclass(frozen=True)
class StateSpec:
    d: int
    r: int
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not 1 <= self.r <= self.d:
            raise ValueError(f"rank must satisfy 1 <= r <= d={self.d}, got {self.r}")


def _draw_factor(d: int, r: int, rng: np.random.Generator) -> np.ndarray | None:
    t = np.zeros((d, d), dtype=complex)
    rows, cols = np.triu_indices(d, k=1)
    mask = rows < r
    rows, cols = rows[mask], cols[mask]
    z = (rng.standard_normal(rows.size) + 1j * rng.standard_normal(rows.size)) / np.sqrt(2)
    t[rows, cols] = z / d
    diag = np.arange(1, r)
    t[diag, diag] = rng.uniform(0.1, 1.0, size=r - 1) / np.sqrt(r)
    radicand = 1.0 - np.sum(np.abs(t) ** 2)
    if radicand < 0:
        return None
    t[0, 0] = np.sqrt(radicand)
    return t


def random_rank_r_state(spec: StateSpec) -> np.ndarray:
    """Density matrix ``T^dag T`` of rank ``spec.r`` from a random upper-triangular ``T``.

    Rows ``r+1..d`` of ``T`` are zero.  The first ``r`` rows carry complex
    Gaussian off-diagonal entries (variance ``1/d**2``) and diagonal entries
    ``U(0.1, 1) / sqrt(r)``; ``T_11`` is then fixed so that ``||T||_2 = 1``.
    Draws for which that is impossible are discarded and redrawn.
    """
    rng = make_rng(spec.seed, spec.d, spec.r)
    for _ in range(MAX_RETRIES):
        t = _draw_factor(spec.d, spec.r, rng)
        if t is not None:
            rho = hermitize(t.conj().T @ t)
            return rho / np.trace(rho).real
    raise GenerationError(f"no feasible factor for d={spec.d}, r={spec.r} after {MAX_RETRIES} draws")


def state_with_spectrum(eigenvalues, d: int, seed: int = 0) -> np.ndarray:
    """State with the given nonzero spectrum and Haar-random eigenvectors."""
    from .fisher_bounds import haar_unitary

    lam = np.zeros(d)
    vals = np.asarray(eigenvalues, dtype=float)
    if vals.size > d or (vals < 0).any():
        raise ValueError("spectrum must have at most d nonnegative entries")
    lam[: vals.size] = vals / vals.sum()
    u = haar_unitary(d, seed)
    return hermitize((u * lam) @ u.conj().T)


def numerical_rank(rho, tol: float = 1e-10) -> int:
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    return int(np.sum(np.linalg.eigvalsh(hermitize(rho)) > tol))
