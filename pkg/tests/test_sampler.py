import json

import numpy as np
import pytest

from spectomo import pauli_model as pm
from spectomo.sampler import (
    CountsDataset,
    frequencies,
    load_dataset,
    load_state,
    merge,
    save_dataset,
    save_state,
    simulate_dataset,
    split_batches,
)
from conftest import random_density


def test_degenerate_row():
    rho = np.diag([1.0, 0.0]).astype(complex)
    ds = simulate_dataset(rho, 37, seed=1)
    assert ds.counts[pm.setting_index("z")].tolist() == [37, 0]


def test_maximally_mixed_frequency():
    ds = simulate_dataset(np.eye(2) / 2, 100_000, seed=2)
    f = frequencies(ds)[pm.setting_index("x"), 0]
    assert abs(f - 0.5) < 0.01


@pytest.mark.parametrize("k", [1, 2, 3])
def test_rows_sum_to_n(k, rng):
    ds = simulate_dataset(random_density(2**k, rng=rng), 20, seed=3)
    assert ds.counts.shape == (3**k, 2**k)
    assert (ds.counts.sum(axis=1) == 20).all()
    assert ds.total == 20 * 3**k


def test_determinism(rng):
    rho = random_density(4, rng=rng)
    assert simulate_dataset(rho, 50, 11) == simulate_dataset(rho, 50, 11)
    assert simulate_dataset(rho, 50, 11) != simulate_dataset(rho, 50, 12)


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        simulate_dataset(np.eye(2) / 2, 0, 1)
    with pytest.raises(ValueError):
        simulate_dataset(np.eye(2), 10, 1)


def test_split_shapes():
    rho = np.eye(4) / 4
    b = split_batches(rho, 100, seed=0, batches=5)
    assert len(b) == 5 and all(x.n == 20 for x in b)
    b = split_batches(rho, 20, seed=0, batches=5)
    assert all(x.n == 4 for x in b)
    with pytest.raises(ValueError):
        split_batches(rho, 21, seed=0, batches=5)


def test_split_batches_distinct_and_reproducible(rng):
    rho = random_density(4, rng=rng)
    a = split_batches(rho, 500, seed=9)
    b = split_batches(rho, 500, seed=9)
    assert all(x == y for x, y in zip(a, b))
    assert len({x.counts.tobytes() for x in a}) == 5


def test_merge():
    rho = np.eye(4) / 4
    b = split_batches(rho, 100, seed=4)
    m = merge(b)
    assert m.n == 100 and (m.counts.sum(axis=1) == 100).all()
    assert np.array_equal(m.counts, sum(x.counts for x in b))
    assert merge([b[0]]) == b[0]
    two = merge(b[:2])
    assert two.n == 40 and (two.counts.sum(axis=1) == 40).all()


def test_merge_mismatched_k():
    a = simulate_dataset(np.eye(2) / 2, 5, 0)
    b = simulate_dataset(np.eye(4) / 4, 5, 0)
    with pytest.raises(ValueError):
        merge([a, b])
    with pytest.raises(ValueError):
        merge([])


def test_frequencies():
    ds = CountsDataset(k=1, n=20, counts=[[20, 0], [10, 10], [5, 15]])
    f = frequencies(ds)
    assert f[0].tolist() == [1.0, 0.0]
    assert f[1].tolist() == [0.5, 0.5]
    assert np.array_equal(frequencies(merge([ds, ds])), f)


def test_dataset_validation():
    with pytest.raises(ValueError):
        CountsDataset(k=1, n=10, counts=[[5, 4], [10, 0], [0, 10]])
    with pytest.raises(ValueError):
        CountsDataset(k=1, n=10, counts=[[5, 5], [10, 0]])
    with pytest.raises(ValueError):
        CountsDataset(k=1, n=10, counts=[[11, -1], [10, 0], [0, 10]])


def test_unbiasedness(rng):
    rho = random_density(4, rng=rng)
    p = pm.probability_table(rho)
    n, reps = 20, 500
    mean = np.mean([frequencies(simulate_dataset(rho, n, s)) for s in range(reps)], axis=0)
    band = 4 * np.sqrt(p * (1 - p) / (reps * n)) + 1e-12
    assert (np.abs(mean - p) <= band).all()


def test_independence_surrogate(rng):
    rho = random_density(4, rng=rng)
    p = pm.probability_table(rho).ravel()
    dev_a, dev_b = [], []
    for j in range(100):
        dev_a.append(frequencies(simulate_dataset(rho, 100, 2 * j)).ravel() - p)
        dev_b.append(frequencies(simulate_dataset(rho, 100, 2 * j + 1)).ravel() - p)
    corr = np.corrcoef(np.ravel(dev_a), np.ravel(dev_b))[0, 1]
    assert abs(corr) < 0.1


def test_rows_use_independent_substreams(rng):
    # a row's draw depends only on (seed, row index), not on the other rows
    rho1 = random_density(2, rng=rng)
    rho2 = rho1.copy()
    rho2[0, 1] = rho2[1, 0] = 0.0  # changes x and y rows only
    a, b = simulate_dataset(rho1, 50, 5), simulate_dataset(rho2, 50, 5)
    assert np.array_equal(a.counts[2], b.counts[2])


def test_dataset_file_roundtrip(tmp_path, rng):
    ds = simulate_dataset(random_density(4, rng=rng), 30, 1)
    path = save_dataset(ds, tmp_path / "d.json")
    data = json.loads(path.read_text())
    assert data["k"] == 2 and data["n"] == 30
    assert data["settings"][:3] == ["xx", "xy", "xz"]
    assert load_dataset(path) == ds


def test_dataset_file_wrong_order(tmp_path):
    ds = simulate_dataset(np.eye(2) / 2, 4, 0)
    data = ds.to_dict()
    data["settings"] = ["z", "y", "x"]
    (tmp_path / "bad.json").write_text(json.dumps(data))
    with pytest.raises(ValueError):
        load_dataset(tmp_path / "bad.json")


def test_state_file_roundtrip(tmp_path, rng):
    rho = random_density(8, rng=rng)
    path = save_state(rho, tmp_path / "s.json")
    data = json.loads(path.read_text())
    assert data["k"] == 3 and len(data["matrix"]) == 8 and len(data["matrix"][0][0]) == 2
    assert np.array_equal(load_state(path), rho)


def test_io_errors_carry_path(tmp_path):
    missing = tmp_path / "nope.json"
    with pytest.raises(OSError, match="nope.json"):
        load_dataset(missing)
    (tmp_path / "junk.json").write_text("{not json")
    with pytest.raises(ValueError, match="junk.json"):
        load_dataset(tmp_path / "junk.json")
