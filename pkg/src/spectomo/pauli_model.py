"""Pauli-setting measurement model for k qubits.

A setting ``s`` picks one of ``x, y, z`` per qubit, an outcome ``o`` is a
vector of ``+1/-1`` results, and a Pauli label ``b`` is a word over
``I, x, y, z``.  Settings, outcomes and labels are enumerated
lexicographically with the orders ``x < y < z``, ``+1 < -1`` and
``I < x < y < z``; the first qubit is the most significant position.

Probabilities are stored as a ``(3**k, 2**k)`` array with one row per
setting, which flattens (row-major) to the settings-major vector of length
``6**k``.  Outcome ``o`` has column index ``sum_j bit_j * 2**(k-1-j)`` where
``bit_j = 0`` for ``o_j = +1``.

All heavy operations contract one qubit axis at a time with ``einsum`` so the
cost stays polynomial in ``d = 2**k`` instead of building ``4**k`` dense
Pauli matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

MAX_QUBITS = 10
SETTING_SYMBOLS = "xyz"
LABEL_SYMBOLS = "Ixyz"
OUTCOME_VALUES = (1, -1)

_SQ2 = 1 / np.sqrt(2)

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# EIGVECS[s, o] is the eigenvector |e_o^s> of sigma_s with eigenvalue +1 (o=0) or -1 (o=1).
EIGVECS = np.array(
    [
        [[_SQ2, _SQ2], [_SQ2, -_SQ2]],
        [[_SQ2, 1j * _SQ2], [_SQ2, -1j * _SQ2]],
        [[1, 0], [0, 1]],
    ],
    dtype=complex,
)

# Rows of ROTATIONS[s] are the bras <e_o^s|.
ROTATIONS = EIGVECS.conj()

# Single-qubit factor of A_b(o|s): indexed [s, o, b].
_A1 = np.zeros((3, 2, 4))
_A1[:, :, 0] = 1.0
for _s in range(3):
    _A1[_s, :, _s + 1] = OUTCOME_VALUES

# Per-qubit weight of 1 / (2**k * 3**dI(b)).
_W1 = np.array([1 / 6, 1 / 2, 1 / 2, 1 / 2])
_A1_INV = _A1 * _W1


def _check_k(k: int) -> int:
    if int(k) != k or not 1 <= k <= MAX_QUBITS:
        raise ValueError(f"qubit count must be an integer in [1, {MAX_QUBITS}], got {k!r}")
    return int(k)


def _qubits_from_dim(d: int) -> int:
    k = int(round(np.log2(d))) if d > 0 else 0
    if d < 2 or 2**k != d:
        raise ValueError(f"matrix dimension must be a power of two >= 2, got {d}")
    return _check_k(k)


def enumerate_settings(k: int) -> list[str]:
    """All ``3**k`` settings as strings such as ``"xz"``, in lexicographic order."""
    k = _check_k(k)
    return ["".join(p) for p in itertools.product(SETTING_SYMBOLS, repeat=k)]


def enumerate_outcomes(k: int) -> list[tuple[int, ...]]:
    k = _check_k(k)
    return list(itertools.product(OUTCOME_VALUES, repeat=k))


def enumerate_labels(k: int) -> list[str]:
    k = _check_k(k)
    return ["".join(p) for p in itertools.product(LABEL_SYMBOLS, repeat=k)]


def setting_index(s: str) -> int:
    idx = 0
    for ch in s:
        if ch not in SETTING_SYMBOLS:
            raise ValueError(f"invalid setting symbol {ch!r} in {s!r}")
        idx = 3 * idx + SETTING_SYMBOLS.index(ch)
    return idx


def outcome_index(o) -> int:
    idx = 0
    for v in o:
        if v not in OUTCOME_VALUES:
            raise ValueError(f"outcome entries must be +1 or -1, got {v!r}")
        idx = 2 * idx + (0 if v == 1 else 1)
    return idx


def label_index(b: str) -> int:
    idx = 0
    for ch in b:
        if ch not in LABEL_SYMBOLS:
            raise ValueError(f"invalid Pauli label symbol {ch!r} in {b!r}")
        idx = 4 * idx + LABEL_SYMBOLS.index(ch)
    return idx


def identity_degree(b: str) -> int:
    """Number of identity factors in the label ``b``."""
    return sum(ch == "I" for ch in b)


@dataclass(frozen=True)
class MeasurementDesign:
    """Enumeration of the full Pauli-setting design on ``k`` qubits."""

    k: int

    def __post_init__(self):
        _check_k(self.k)

    @property
    def d(self) -> int:
        return 2**self.k

    @property
    def n_settings(self) -> int:
        return 3**self.k

    @property
    def n_outcomes(self) -> int:
        return 2**self.k

    @property
    def settings(self) -> list[str]:
        return enumerate_settings(self.k)

    @property
    def outcomes(self) -> list[tuple[int, ...]]:
        return enumerate_outcomes(self.k)

    @property
    def labels(self) -> list[str]:
        return enumerate_labels(self.k)


def pauli_coefficient(b: str, o, s: str) -> int:
    """Entry ``A_b(o|s) = Tr(sigma_b P_o^s)``, which is -1, 0 or +1."""
    if not len(b) == len(o) == len(s):
        raise ValueError(f"label, outcome and setting lengths differ: {len(b)}, {len(o)}, {len(s)}")
    value = 1
    for bj, oj, sj in zip(b, o, s):
        if bj not in LABEL_SYMBOLS or sj not in SETTING_SYMBOLS or oj not in OUTCOME_VALUES:
            raise ValueError(f"invalid symbol in b={b!r}, o={o!r}, s={s!r}")
        if bj == "I":
            continue
        if bj != sj:
            return 0
        value *= oj
    return value


def gram_diagonal_entry(b: str, k: int) -> int:
    """Diagonal entry ``2**k * 3**dI(b)`` of ``A* A``."""
    k = _check_k(k)
    if len(b) != k:
        raise ValueError(f"label {b!r} does not have length {k}")
    return 2**k * 3 ** identity_degree(b)


@lru_cache(maxsize=None)
def _design_matrix_cached(k: int) -> np.ndarray:
    # Kronecker product of per-qubit (s, o, b) tensors, regrouped so that
    # rows run over (s_1..s_k, o_1..o_k) and columns over (b_1..b_k).
    full = reduce(np.multiply.outer, [_A1.astype(np.int64)] * k)
    # axes are (s1, o1, b1, s2, o2, b2, ...)
    order = [3 * j for j in range(k)] + [3 * j + 1 for j in range(k)] + [3 * j + 2 for j in range(k)]
    full = full.transpose(order).reshape(6**k, 4**k)
    full.setflags(write=False)
    return full


def design_matrix(k: int) -> np.ndarray:
    """Integer matrix of ``A`` with shape ``(6**k, 4**k)``, rows settings-major."""
    k = _check_k(k)
    if k > 6:
        raise ValueError("dense design matrix is limited to k <= 6")
    return _design_matrix_cached(k)


def pauli_matrix(b: str) -> np.ndarray:
    return reduce(np.kron, [PAULI[LABEL_SYMBOLS.index(ch)] for ch in b])


def hermitize(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return (m + m.conj().T) / 2


def check_hermitian(m, tol: float = 1e-9) -> np.ndarray:
    """Return the symmetrised matrix, or raise if ``m`` is not Hermitian within ``tol``."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (max |M - M^dag| = {dev:.3g})")
    return hermitize(m)


def check_density_matrix(rho, tol: float = 1e-10) -> np.ndarray:
    """Validate a density matrix and return its symmetrised copy."""
    rho = check_hermitian(rho, tol=tol)
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise ValueError(f"density matrix must have unit trace, got {tr!r}")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -tol:
        raise ValueError(f"density matrix must be positive semidefinite, min eigenvalue {lo:.3g}")
    return rho


def _sub(start: int, k: int) -> list[int]:
    return list(range(start, start + k))


def state_to_pauli_coeffs(rho) -> np.ndarray:
    """Real coefficients ``Tr(rho sigma_b) / d`` ordered by :func:`enumerate_labels`."""
    rho = check_hermitian(rho)
    d = rho.shape[0]
    k = _qubits_from_dim(d)
    rows, cols, labels = _sub(0, k), _sub(k, k), _sub(2 * k, k)
    operands = [rho.reshape((2,) * (2 * k)), rows + cols]
    for j in range(k):
        # Tr(rho sigma) = sum_{i,j} rho_ij sigma_ji
        operands += [PAULI, [labels[j], cols[j], rows[j]]]
    coeffs = np.einsum(*operands, labels, optimize=True).reshape(-1) / d
    return coeffs.real.copy()


def pauli_coeffs_to_matrix(coeffs) -> np.ndarray:
    """Inverse of :func:`state_to_pauli_coeffs`: ``sum_b coeffs[b] sigma_b``."""
    coeffs = np.asarray(coeffs)
    k = _qubits_from_dim(int(round(np.sqrt(coeffs.size))))
    if coeffs.size != 4**k:
        raise ValueError(f"coefficient vector must have length 4**k, got {coeffs.size}")
    rows, cols, labels = _sub(0, k), _sub(k, k), _sub(2 * k, k)
    operands = [coeffs.reshape((4,) * k), labels]
    for j in range(k):
        operands += [PAULI, [labels[j], rows[j], cols[j]]]
    d = 2**k
    return np.einsum(*operands, rows + cols, optimize=True).reshape(d, d)


def _setting_rotation(s: str) -> list[np.ndarray]:
    mats = []
    for ch in s:
        if ch not in SETTING_SYMBOLS:
            raise ValueError(f"invalid setting symbol {ch!r} in {s!r}")
        mats.append(ROTATIONS[SETTING_SYMBOLS.index(ch)])
    return mats


def probabilities(rho, s: str) -> np.ndarray:
    """Outcome probabilities ``<e_o^s| rho |e_o^s>`` for one setting.

    The state is conjugated qubit by qubit with the single-qubit eigenbasis
    rotations, then the diagonal is read off.
    """
    rho = check_hermitian(rho)
    k = _qubits_from_dim(rho.shape[0])
    if len(s) != k:
        raise ValueError(f"setting {s!r} does not match {k} qubits")
    mats = _setting_rotation(s)
    rows, cols, outs = _sub(0, k), _sub(k, k), _sub(2 * k, k)
    operands = [rho.reshape((2,) * (2 * k)), rows + cols]
    for j, v in enumerate(mats):
        operands += [v, [outs[j], rows[j]], v.conj(), [outs[j], cols[j]]]
    return np.einsum(*operands, outs, optimize=True).reshape(-1).real.copy()


def probability_table(rho) -> np.ndarray:
    """Probabilities for every setting, shape ``(3**k, 2**k)``."""
    rho = check_hermitian(rho)
    k = _qubits_from_dim(rho.shape[0])
    rows, cols, sets, outs = _sub(0, k), _sub(k, k), _sub(2 * k, k), _sub(3 * k, k)
    operands = [rho.reshape((2,) * (2 * k)), rows + cols]
    for j in range(k):
        operands += [ROTATIONS, [sets[j], outs[j], rows[j]], ROTATIONS.conj(), [sets[j], outs[j], cols[j]]]
    p = np.einsum(*operands, sets + outs, optimize=True)
    return p.reshape(3**k, 2**k).real.copy()


def projector(s: str, o) -> np.ndarray:
    """Rank-one projector ``P_o^s`` as a dense ``d x d`` matrix."""
    if len(s) != len(o):
        raise ValueError("setting and outcome lengths differ")
    vecs = [EIGVECS[SETTING_SYMBOLS.index(ch), OUTCOME_VALUES.index(v)] for ch, v in zip(s, o)]
    e = reduce(np.kron, vecs)
    return np.outer(e, e.conj())


def forward_map(coeffs) -> np.ndarray:
    """Apply ``A`` to a Pauli coefficient vector; returns a ``(3**k, 2**k)`` table."""
    coeffs = np.asarray(coeffs, dtype=float)
    k = _qubits_from_dim(int(round(np.sqrt(coeffs.size))))
    if coeffs.size != 4**k:
        raise ValueError(f"coefficient vector must have length 4**k, got {coeffs.size}")
    labels, sets, outs = _sub(0, k), _sub(k, k), _sub(2 * k, k)
    operands = [coeffs.reshape((4,) * k), labels]
    for j in range(k):
        operands += [_A1, [sets[j], outs[j], labels[j]]]
    return np.einsum(*operands, sets + outs, optimize=True).reshape(3**k, 2**k)


def _as_table(p) -> tuple[np.ndarray, int]:
    p = np.asarray(p, dtype=float)
    size = p.size
    k = 0
    while 6**k < size:
        k += 1
    if 6**k != size:
        raise ValueError(f"probability vector must have length 6**k, got {size}")
    k = _check_k(k)
    return p.reshape(3**k, 2**k), k


def coeffs_from_probabilities(p) -> np.ndarray:
    """Least-squares inverse of :func:`forward_map`, ``(A*A)^-1 A* p``."""
    table, k = _as_table(p)
    labels, sets, outs = _sub(0, k), _sub(k, k), _sub(2 * k, k)
    operands = [table.reshape((3,) * k + (2,) * k), sets + outs]
    for j in range(k):
        operands += [_A1_INV, [sets[j], outs[j], labels[j]]]
    return np.einsum(*operands, labels, optimize=True).reshape(-1)


def reconstruct_from_probabilities(p) -> np.ndarray:
    """Hermitian matrix ``sum_b sum_{o,s} p(o|s) A_b(o|s) / (2**k 3**dI(b)) sigma_b``.

    Accepts exact probabilities or noisy frequencies, either as a
    ``(3**k, 2**k)`` table or the flattened settings-major vector.
    """
    return hermitize(pauli_coeffs_to_matrix(coeffs_from_probabilities(p)))
