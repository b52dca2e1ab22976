"""Multinomial counts data for the Pauli-setting design, and its file formats."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._seeding import derive_seed, make_rng
from .pauli_model import _check_k, _qubits_from_dim, check_density_matrix, enumerate_settings, probability_table

DEFAULT_BATCHES = 5

# Key namespaces for derive_seed; keeps batch and row substreams disjoint.
_ROW_KEY = 0x5E771
_BATCH_KEY = 0xBA7C4


@dataclass
class CountsDataset:
    """Outcome counts ``N(o|s)``: one row per setting, one column per outcome."""

    k: int
    n: int
    counts: np.ndarray

    def __post_init__(self):
        self.k = _check_k(self.k)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        shape = (3**self.k, 2**self.k)
        if self.counts.shape != shape:
            raise ValueError(f"counts must have shape {shape}, got {self.counts.shape}")
        if self.n < 1:
            raise ValueError(f"repetitions n must be >= 1, got {self.n}")
        if (self.counts < 0).any():
            raise ValueError("counts must be nonnegative")
        sums = self.counts.sum(axis=1)
        if not (sums == self.n).all():
            raise ValueError(f"every setting row must sum to n={self.n}")

    @property
    def d(self) -> int:
        return 2**self.k

    @property
    def total(self) -> int:
        """Total number of quantum samples ``N = n * 3**k``."""
        return self.n * 3**self.k

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": int(self.n),
            "settings": enumerate_settings(self.k),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CountsDataset":
        k = int(data["k"])
        if "settings" in data and list(data["settings"]) != enumerate_settings(k):
            raise ValueError("settings must be listed in lexicographic order")
        return cls(k=k, n=int(data["n"]), counts=np.array(data["counts"], dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, CountsDataset):
            return NotImplemented
        return self.k == other.k and self.n == other.n and np.array_equal(self.counts, other.counts)


def frequencies(dataset: CountsDataset) -> np.ndarray:
    """Empirical frequencies ``f(o|s) = N(o|s) / n``."""
    return dataset.counts / dataset.n


def _multinomial_row(p: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    cdf = np.cumsum(p / p.sum())
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    # guards against cdf[-1] rounding below 1
    np.minimum(idx, p.size - 1, out=idx)
    return np.bincount(idx, minlength=p.size)


def simulate_dataset(rho, n: int, seed: int) -> CountsDataset:
    """Draw ``n`` outcomes per setting from ``rho``.

    Each row is sampled by inverse-CDF categorical draws from its own
    generator, seeded by mixing ``seed`` with the setting index.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"repetitions n must be a positive integer, got {n!r}")
    rho = check_density_matrix(rho)
    k = _qubits_from_dim(rho.shape[0])
    probs = probability_table(rho)
    counts = np.empty(probs.shape, dtype=np.int64)
    for i, row in enumerate(probs):
        counts[i] = _multinomial_row(row, int(n), make_rng(seed, _ROW_KEY, i))
    return CountsDataset(k=k, n=int(n), counts=counts)


def batch_seed(seed: int, j: int) -> int:
    return derive_seed(seed, _BATCH_KEY, j)


def split_batches(rho, n: int, seed: int, batches: int = DEFAULT_BATCHES) -> list[CountsDataset]:
    """Simulate ``batches`` independent datasets of ``n / batches`` repetitions each."""
    if batches < 1:
        raise ValueError(f"batch count must be >= 1, got {batches}")
    if n % batches:
        raise ValueError(f"n={n} is not divisible by the batch count {batches}")
    m = n // batches
    return [simulate_dataset(rho, m, batch_seed(seed, j)) for j in range(batches)]


def merge(datasets) -> CountsDataset:
    """Pool datasets by adding counts entrywise."""
    datasets = list(datasets)
    if not datasets:
        raise ValueError("cannot merge an empty list of datasets")
    k = datasets[0].k
    if any(ds.k != k for ds in datasets):
        raise ValueError("cannot merge datasets with different qubit counts")
    counts = sum(ds.counts for ds in datasets)
    return CountsDataset(k=k, n=sum(ds.n for ds in datasets), counts=counts)


# -- JSON files -------------------------------------------------------------


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"matrix must be a d x d list of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _write_json(path, payload: dict) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path} is not valid JSON: {exc}") from exc


def save_dataset(dataset: CountsDataset, path) -> Path:
    return _write_json(path, dataset.to_dict())


def load_dataset(path) -> CountsDataset:
    return CountsDataset.from_dict(_read_json(path))


def state_to_dict(rho, **extra) -> dict:
    rho = np.asarray(rho, dtype=complex)
    payload = {"k": _qubits_from_dim(rho.shape[0]), "matrix": matrix_to_json(rho)}
    payload.update(extra)
    return payload


def save_state(rho, path, **extra) -> Path:
    return _write_json(path, state_to_dict(rho, **extra))


def load_state(path) -> np.ndarray:
    data = _read_json(path)
    m = matrix_from_json(data["matrix"])
    if m.shape[0] != 2 ** int(data["k"]):
        raise ValueError(f"{path}: matrix dimension does not match k={data['k']}")
    return m
