"""Fisher information of basis measurements and the rank-r minimax bound.

A state is parametrised by ``d**2`` real numbers: the diagonal entries,
then ``Re rho_ij`` for ``i < j`` in row-major order, then ``Im rho_ij`` in
the same order.  For a measurement in the orthonormal basis given by the
columns of a unitary ``U`` the outcome probabilities are linear in these
parameters, so the Fisher matrix is ``J^T diag(1/p) J`` with ``J`` the
constant Jacobian.

At ``rho0 = diag(1/r, ..., 1/r, 0, ..., 0)`` the Haar average of this
matrix has a closed form.  The diagonal-diagonal entry coupling
``i <= r`` with ``j > r`` equals ``1`` (every outcome's diagonal
derivatives sum to one, which fixes the row sums).  The alternative value
``r/(r+1)`` can be selected with ``dd_mixed="summary"`` for comparison,
and :func:`fisher_check` reports which one the Monte Carlo average supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._seeding import make_rng
from .errors import UnsupportedParameterError

P_CUTOFF = 1e-12
_HAAR_KEY = 0x4AA2
_CHUNK_KEY = 0xC4C4

DD_MIXED_VARIANTS = ("derived", "summary")


def pair_indices(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of ``i < j`` pairs in row-major order."""
    return np.triu_indices(d, k=1)


def parameter_labels(d: int) -> list[str]:
    rows, cols = pair_indices(d)
    return (
        [f"d{i}{i}" for i in range(d)]
        + [f"re{i}{j}" for i, j in zip(rows, cols)]
        + [f"im{i}{j}" for i, j in zip(rows, cols)]
    )


def block_slices(d: int) -> dict[str, slice]:
    m = d * (d - 1) // 2
    return {"d": slice(0, d), "r": slice(d, d + m), "i": slice(d + m, d + 2 * m)}


def params_to_matrix(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    d = int(round(np.sqrt(theta.size)))
    if d * d != theta.size:
        raise ValueError("parameter vector length must be a perfect square")
    sl = block_slices(d)
    rows, cols = pair_indices(d)
    rho = np.diag(theta[sl["d"]]).astype(complex)
    off = theta[sl["r"]] + 1j * theta[sl["i"]]
    rho[rows, cols] = off
    rho[cols, rows] = off.conj()
    return rho


def matrix_to_params(rho) -> np.ndarray:
    rho = np.asarray(rho)
    rows, cols = pair_indices(rho.shape[0])
    off = rho[rows, cols]
    return np.concatenate([np.diag(rho).real, off.real, off.imag])


def metric_weights(d: int) -> np.ndarray:
    """Weights ``g`` with ``||rho||_2**2 = sum(g * theta**2)``: 1 for diagonals, 2 otherwise."""
    w = np.full(d * d, 2.0)
    w[:d] = 1.0
    return w


def invariant_trace(fisher) -> float:
    """``Tr(G^-1 I)`` for the Frobenius metric ``G``.

    Unitary conjugation of the state is an isometry of ``G`` but not of the
    plain parameter coordinates, so this, not ``Tr I``, is preserved when
    state and basis are rotated together.
    """
    fisher = np.asarray(fisher)
    d = int(round(np.sqrt(fisher.shape[0])))
    return float(np.sum(np.diag(fisher) / metric_weights(d)))


def _check_unitary(u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > 1e-10:
        raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {dev:.3g})")
    return u


def basis_jacobian(u) -> np.ndarray:
    """``J[o, a] = d p(o) / d theta_a`` for the basis given by the columns of ``u``.

    Accepts a single unitary or a stack with leading batch axes.
    """
    u = np.asarray(u, dtype=complex)
    d = u.shape[-1]
    rows, cols = pair_indices(d)
    # w[..., o, i, j] = <i|o,U> <o,U|j>
    w = np.einsum("...io,...jo->...oij", u, u.conj())
    diag = np.einsum("...ii->...i", w).real
    off = w[..., rows, cols]
    return np.concatenate([diag, 2 * off.real, 2 * off.imag], axis=-1)


def basis_probabilities(rho, u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    return np.einsum("...io,ij,...jo->...o", u.conj(), np.asarray(rho), u).real


def _fisher_from(jac: np.ndarray, p: np.ndarray) -> np.ndarray:
    inv = np.zeros_like(p)
    pos = p > P_CUTOFF
    inv[pos] = 1.0 / p[pos]
    return np.einsum("...oa,...o,...ob->...ab", jac, inv, jac)


def fisher_info_basis(rho, u) -> np.ndarray:
    """Classical Fisher matrix of the von Neumann measurement in basis ``u`` at ``rho``.

    Outcomes with probability at most ``1e-12`` are left out of the sum.
    """
    u = _check_unitary(u)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != u.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {u.shape}")
    return _fisher_from(basis_jacobian(u), basis_probabilities(rho, u))


def _haar_batch(d: int, size: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((size, d, d)) + 1j * rng.standard_normal((size, d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[..., None, :]


def haar_unitary(d: int, seed: int = 0) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with R's phases absorbed into Q."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return _haar_batch(d, 1, make_rng(seed, _HAAR_KEY, d))[0]


def reference_state(d: int, r: int) -> np.ndarray:
    if not 1 <= r <= d:
        raise ValueError(f"rank must satisfy 1 <= r <= d, got r={r}, d={d}")
    return np.diag(np.r_[np.full(r, 1 / r), np.zeros(d - r)]).astype(complex)


@dataclass
class FisherEstimate:
    """Monte Carlo mean of a Fisher matrix with per-entry standard errors."""

    mean: np.ndarray
    stderr: np.ndarray
    samples: int


def avg_fisher_mc(d: int, r: int, samples: int, seed: int = 0, chunk: int = 512) -> FisherEstimate:
    """Haar average of the basis Fisher matrix at ``diag(1/r, .., 1/r, 0, .., 0)``.

    Samples are drawn in chunks, each from its own derived generator, so the
    result depends only on ``(d, r, samples, seed, chunk)``.
    """
    if r < 2:
        raise UnsupportedParameterError("the averaged Fisher matrix diverges for r = 1")
    if r > d:
        raise ValueError(f"rank r={r} exceeds dimension d={d}")
    if samples < 2:
        raise ValueError("need at least two samples for standard errors")
    rho0 = reference_state(d, r)
    total = np.zeros((d * d, d * d))
    total_sq = np.zeros_like(total)
    done = 0
    c = 0
    while done < samples:
        size = min(chunk, samples - done)
        us = _haar_batch(d, size, make_rng(seed, _CHUNK_KEY, d, r, c))
        f = _fisher_from(basis_jacobian(us), basis_probabilities(rho0, us))
        total += f.sum(axis=0)
        total_sq += (f**2).sum(axis=0)
        done += size
        c += 1
    mean = total / samples
    var = np.clip(total_sq / samples - mean**2, 0, None) * samples / (samples - 1)
    return FisherEstimate(mean=mean, stderr=np.sqrt(var / samples), samples=samples)


def closed_form_avg_fisher(d: int, r: int, dd_mixed: str = "derived") -> np.ndarray:
    """Exact Haar-averaged Fisher matrix at ``diag(1/r, .., 1/r, 0, .., 0)``.

    Real and imaginary blocks are diagonal with values ``2r/(r+1)``, ``2``
    and ``2r/(r-1)`` depending on whether both, one or none of ``i < j``
    are ``<= r``.  The diagonal-diagonal block has diagonal ``2r/(r+1)``
    (``i <= r``) or ``2r/(r-1)`` (``i > r``) and off-diagonal ``r/(r+1)``
    or ``r/(r-1)`` inside those regions.  Across regions it is ``1`` for
    ``dd_mixed="derived"`` and ``r/(r+1)`` for ``dd_mixed="summary"``.
    Cross blocks vanish.
    """
    if r < 2:
        raise UnsupportedParameterError("the averaged Fisher matrix diverges for r = 1")
    if r > d:
        raise ValueError(f"rank r={r} exceeds dimension d={d}")
    if dd_mixed not in DD_MIXED_VARIANTS:
        raise ValueError(f"dd_mixed must be one of {DD_MIXED_VARIANTS}, got {dd_mixed!r}")
    inner = np.arange(d) < r
    dd = np.empty((d, d))
    dd[np.ix_(inner, inner)] = r / (r + 1)
    dd[np.ix_(~inner, ~inner)] = r / (r - 1)
    mixed = 1.0 if dd_mixed == "derived" else r / (r + 1)
    dd[np.ix_(inner, ~inner)] = mixed
    dd[np.ix_(~inner, inner)] = mixed
    dd[np.diag_indices(d)] = np.where(inner, 2 * r / (r + 1), 2 * r / (r - 1))

    rows, cols = pair_indices(d)
    n_inner = inner[rows].astype(int) + inner[cols].astype(int)
    off = np.choose(n_inner, [2 * r / (r - 1), 2.0, 2 * r / (r + 1)])

    out = np.zeros((d * d, d * d))
    sl = block_slices(d)
    out[sl["d"], sl["d"]] = dd
    out[sl["r"], sl["r"]] = np.diag(off)
    out[sl["i"], sl["i"]] = np.diag(off)
    return out


def rotation_block(fisher, d: int, r: int) -> np.ndarray:
    """Rows/columns of the ``i <= r < j`` real and imaginary parameters."""
    rows, cols = pair_indices(d)
    sel = np.nonzero((rows < r) & (cols >= r))[0]
    sl = block_slices(d)
    idx = np.r_[sl["r"].start + sel, sl["i"].start + sel]
    return np.asarray(fisher)[np.ix_(idx, idx)]


def minimax_bound(d: int, r: int) -> int:
    """Asymptotic lower bound ``2 r (d - r)`` on ``N`` times the worst-case MSE."""
    if not 1 <= r <= d:
        raise ValueError(f"rank must satisfy 1 <= r <= d, got r={r}, d={d}")
    return 2 * r * (d - r)


def _cross_mask(d: int) -> np.ndarray:
    sl = block_slices(d)
    labels = np.empty(d * d, dtype="<U1")
    for name, s in sl.items():
        labels[s] = name
    return labels[:, None] != labels[None, :]


def fisher_check(d: int, r: int, samples: int, seed: int = 0, rel_tol: float = 0.1, z_max: float = 3.0) -> dict:
    """Compare the Monte Carlo Fisher average against the closed forms.

    Nonzero closed-form entries must agree within ``rel_tol`` (relative);
    cross-block entries must have ``|mean| < z_max`` standard errors.
    """
    est = avg_fisher_mc(d, r, samples, seed)
    exact = closed_form_avg_fisher(d, r, "derived")
    summary = closed_form_avg_fisher(d, r, "summary")
    sl = block_slices(d)
    cross = _cross_mask(d)

    def rel_dev(target, block=None):
        m = target != 0
        if block is not None:
            m &= block
        return float(np.max(np.abs(est.mean[m] - target[m]) / np.abs(target[m])))

    blocks = {}
    for name in ("dd", "rr", "ii"):
        s = sl[name[0]]
        m = np.zeros_like(cross)
        m[s, s] = True
        blocks[name] = {"max_rel_dev": rel_dev(exact, m)}
        blocks[name]["pass"] = blocks[name]["max_rel_dev"] <= rel_tol
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(est.stderr > 0, np.abs(est.mean) / est.stderr, 0.0)
    for name, (a, b) in {"dr": ("d", "r"), "di": ("d", "i"), "ri": ("r", "i")}.items():
        zb = z[sl[a], sl[b]]
        blocks[name] = {
            "max_abs_mean": float(np.max(np.abs(est.mean[sl[a], sl[b]]))),
            "max_z": float(zb.max()),
            "pass": bool(zb.max() < z_max),
        }

    rows, cols = pair_indices(d)
    mixed = np.zeros((d, d), dtype=bool)
    inner = np.arange(d) < r
    mixed[np.ix_(inner, ~inner)] = mixed[np.ix_(~inner, inner)] = True
    mixed_mean = float(est.mean[sl["d"], sl["d"]][mixed].mean())
    rr = est.mean[sl["r"], sl["r"]].diagonal()
    ii = est.mean[sl["i"], sl["i"]].diagonal()
    return {
        "d": d,
        "r": r,
        "samples": samples,
        "seed": seed,
        "parameters": parameter_labels(d),
        "closed_form": exact.tolist(),
        "mc_mean": est.mean.tolist(),
        "mc_stderr": est.stderr.tolist(),
        "blocks": blocks,
        # per-entry errors are heavy tailed for r < i < j, so compare relatively
        "rr_vs_ii_max_rel_dev": float(np.max(np.abs(rr - ii) / np.abs(ii))),
        "dd_mixed": {
            "mc_mean": mixed_mean,
            "derived": 1.0,
            "summary": r / (r + 1),
            "closer": "derived" if abs(mixed_mean - 1.0) <= abs(mixed_mean - r / (r + 1)) else "summary",
            "summary_max_rel_dev": rel_dev(summary, np.pad(mixed, (0, d * d - d))),
        },
        "rotation_block_mean_diag": rotation_block(est.mean, d, r).diagonal().tolist(),
        "minimax_bound": minimax_bound(d, r),
        "pass": all(b["pass"] for b in blocks.values()),
    }
