import itertools
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectomo import pauli_model as pm
from conftest import random_density

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)
SINGLE = {"I": I2, "x": SX, "y": SY, "z": SZ}


def kron_all(mats):
    return reduce(np.kron, mats)


def projector_reference(s, o):
    # eigenprojector of the single-qubit Pauli for eigenvalue o_j, via (I + o sigma)/2
    return kron_all([(I2 + oj * SINGLE[sj]) / 2 for sj, oj in zip(s, o)])


def brute_probabilities(rho, k):
    return np.array(
        [
            [np.trace(rho @ projector_reference(s, o)).real for o in pm.enumerate_outcomes(k)]
            for s in pm.enumerate_settings(k)
        ]
    )


# -- enumeration -------------------------------------------------------------


def test_settings_k1():
    assert pm.enumerate_settings(1) == ["x", "y", "z"]


def test_settings_k2():
    got = pm.enumerate_settings(2)
    assert got == ["xx", "xy", "xz", "yx", "yy", "yz", "zx", "zy", "zz"]


def test_settings_k4_count():
    assert len(pm.enumerate_settings(4)) == 81
    assert len(set(pm.enumerate_settings(4))) == 81


@pytest.mark.parametrize("k", [0, 11, -1, 2.5])
def test_k_out_of_range(k):
    with pytest.raises(ValueError):
        pm.enumerate_settings(k)


def test_outcome_order_and_index():
    outs = pm.enumerate_outcomes(2)
    assert outs == [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    assert [pm.outcome_index(o) for o in outs] == [0, 1, 2, 3]


def test_design_counts():
    des = pm.MeasurementDesign(3)
    assert des.d == 8
    assert len(des.settings) == 27 and len(des.outcomes) == 8
    assert len(des.labels) == 64


@pytest.mark.parametrize("k", [1, 2, 3])
def test_setting_index_matches_enumeration(k):
    for i, s in enumerate(pm.enumerate_settings(k)):
        assert pm.setting_index(s) == i


def test_bad_setting_symbol():
    with pytest.raises(ValueError):
        pm.setting_index("xw")
    rho = np.eye(2) / 2
    with pytest.raises(ValueError):
        pm.probabilities(rho, "q")


# -- coefficients A_b(o|s) ----------------------------------------------------


def test_coefficient_all_identity():
    for o in pm.enumerate_outcomes(2):
        for s in pm.enumerate_settings(2):
            assert pm.pauli_coefficient("II", o, s) == 1


def test_coefficient_hand_values():
    assert pm.pauli_coefficient("xI", (1, -1), "xy") == 1
    assert pm.pauli_coefficient("xI", (-1, -1), "xy") == -1
    for o in pm.enumerate_outcomes(2):
        assert pm.pauli_coefficient("xz", o, "xy") == 0


def test_coefficient_length_mismatch():
    with pytest.raises(ValueError):
        pm.pauli_coefficient("xI", (1,), "xy")


@pytest.mark.parametrize(
    "b,k,expected",
    [("I", 1, 6), ("x", 1, 2), ("Iz", 2, 12), ("II", 2, 36), ("xyz", 3, 8), ("IIz", 3, 72)],
)
def test_gram_diagonal_entry(b, k, expected):
    assert pm.gram_diagonal_entry(b, k) == expected


def test_gram_entry_brute_force_Iz():
    total = sum(
        pm.pauli_coefficient("Iz", o, s) ** 2 for s in pm.enumerate_settings(2) for o in pm.enumerate_outcomes(2)
    )
    assert total == 12


@pytest.mark.parametrize("k", [1, 2])
def test_gram_identity_from_coefficients(k):
    # independent of design_matrix: sum products of scalar coefficients
    labels = pm.enumerate_labels(k)
    rows = [(s, o) for s in pm.enumerate_settings(k) for o in pm.enumerate_outcomes(k)]
    a = np.array([[pm.pauli_coefficient(b, o, s) for b in labels] for s, o in rows], dtype=np.int64)
    gram = a.T @ a
    expected = np.diag([pm.gram_diagonal_entry(b, k) for b in labels])
    assert np.array_equal(gram, expected)
    assert np.array_equal(pm.design_matrix(k), a)


def test_design_matrix_k3_matches_scalar_coefficients():
    k = 3
    a = pm.design_matrix(k)
    rng = np.random.default_rng(0)
    labels = pm.enumerate_labels(k)
    settings_, outcomes = pm.enumerate_settings(k), pm.enumerate_outcomes(k)
    for _ in range(300):
        i, j, c = rng.integers(27), rng.integers(8), rng.integers(64)
        assert a[i * 8 + j, c] == pm.pauli_coefficient(labels[c], outcomes[j], settings_[i])


def test_design_matrix_read_only():
    with pytest.raises(ValueError):
        pm.design_matrix(1)[0, 0] = 5


def test_pauli_matrix_kron():
    assert np.allclose(pm.pauli_matrix("xIz"), kron_all([SX, I2, SZ]))


# -- coefficients of states ----------------------------------------------------


def test_coeffs_maximally_mixed():
    for k in (1, 2, 3):
        d = 2**k
        c = pm.state_to_pauli_coeffs(np.eye(d) / d)
        assert c[0] == pytest.approx(1 / d, abs=1e-15)
        assert np.allclose(c[1:], 0, atol=1e-15)


def test_coeffs_hand_example():
    rho = 0.5 * (I2 + 0.6 * SX)
    c = pm.state_to_pauli_coeffs(rho)
    assert np.allclose(c, [0.5, 0.3, 0.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_coeffs_roundtrip_and_direct_trace(k, rng):
    rho = random_density(2**k, rng=rng)
    c = pm.state_to_pauli_coeffs(rho)
    assert np.isrealobj(c)
    assert np.linalg.norm(pm.pauli_coeffs_to_matrix(c) - rho) < 1e-10
    d = 2**k
    for b in rng.choice(pm.enumerate_labels(k), size=6):
        direct = np.trace(rho @ kron_all([SINGLE[ch] for ch in b])) / d
        assert abs(direct.imag) < 1e-12
        assert c[pm.label_index(b)] == pytest.approx(direct.real, abs=1e-12)


def test_coeffs_reject_non_hermitian():
    with pytest.raises(ValueError):
        pm.state_to_pauli_coeffs(np.array([[0.5, 1.0], [0.0, 0.5]]))


# -- probabilities -------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3])
def test_probabilities_maximally_mixed(k):
    d = 2**k
    tab = pm.probability_table(np.eye(d) / d)
    assert np.allclose(tab, 1 / d, atol=1e-14)


def test_probabilities_z_eigenstate():
    rho = np.diag([1.0, 0.0]).astype(complex)
    assert np.allclose(pm.probabilities(rho, "z"), [1, 0], atol=1e-15)
    assert np.allclose(pm.probabilities(rho, "x"), [0.5, 0.5], atol=1e-15)


def test_probabilities_hand_example():
    rho = 0.5 * (I2 + 0.6 * SX)
    assert np.allclose(pm.probabilities(rho, "x"), [0.8, 0.2], atol=1e-14)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_fast_path_matches_projector_trace(k, rng):
    for _ in range(3):
        rho = random_density(2**k, rng=rng)
        tab = pm.probability_table(rho)
        assert np.max(np.abs(tab - brute_probabilities(rho, k))) < 1e-12
        for i, s in enumerate(pm.enumerate_settings(k)):
            assert np.max(np.abs(pm.probabilities(rho, s) - tab[i])) < 1e-12


def test_projector_matches_reference():
    for s in pm.enumerate_settings(2):
        for o in pm.enumerate_outcomes(2):
            assert np.allclose(pm.projector(s, o), projector_reference(s, o), atol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_probability_table_rows_are_distributions(k, rng):
    tab = pm.probability_table(random_density(2**k, rng=rng))
    assert tab.shape == (3**k, 2**k)
    assert np.allclose(tab.sum(axis=1), 1, atol=1e-12)
    assert tab.min() >= -1e-12 and tab.max() <= 1 + 1e-12


# -- forward map and inverse --------------------------------------------------


def test_forward_map_identity():
    for k in (1, 2):
        d = 2**k
        out = pm.forward_map(pm.state_to_pauli_coeffs(np.eye(d) / d))
        assert np.allclose(out, 1 / d, atol=1e-15)


def test_forward_map_zero():
    assert not pm.forward_map(np.zeros(16)).any()


def test_forward_map_matches_projector_trace_k2(rng):
    rho = random_density(4, rng=rng)
    out = pm.forward_map(pm.state_to_pauli_coeffs(rho))
    assert np.max(np.abs(out - brute_probabilities(rho, 2))) < 1e-12


def test_forward_map_matches_design_matrix(rng):
    c = rng.standard_normal(64)
    assert np.allclose(pm.forward_map(c).ravel(), pm.design_matrix(3) @ c, atol=1e-12)


def test_reconstruct_maximally_mixed():
    for k in (1, 2, 3):
        d = 2**k
        p = pm.probability_table(np.eye(d) / d)
        assert np.allclose(pm.reconstruct_from_probabilities(p), np.eye(d) / d, atol=1e-14)


def test_reconstruct_accepts_flat_vector(rng):
    rho = random_density(4, rng=rng)
    p = pm.probability_table(rho).ravel()
    assert p.size == 36
    assert np.linalg.norm(pm.reconstruct_from_probabilities(p) - rho) < 1e-10
    with pytest.raises(ValueError):
        pm.reconstruct_from_probabilities(np.zeros(35))


def test_reconstruct_reference_rank6_state():
    from spectomo.state_gen import REFERENCE_RANK6_SPECTRUM, state_with_spectrum

    rho = state_with_spectrum(REFERENCE_RANK6_SPECTRUM, 16, seed=7)
    rec = pm.reconstruct_from_probabilities(pm.probability_table(rho))
    assert np.linalg.norm(rec - rho) < 1e-10


def test_reconstruct_rank2_k3(rng):
    rho = random_density(8, rank=2, rng=rng)
    rec = pm.reconstruct_from_probabilities(pm.probability_table(rho))
    assert np.linalg.norm(rec - rho) < 1e-10


def test_reconstruct_matches_explicit_inverse_formula(rng):
    # sum_b sum_{s,o} p(o|s) A_b(o|s) / (2^k 3^dI(b)) sigma_b, written out term by term
    k = 2
    rho = random_density(4, rng=rng)
    p = brute_probabilities(rho, k)
    out = np.zeros((4, 4), dtype=complex)
    for b in pm.enumerate_labels(k):
        w = 0.0
        for i, s in enumerate(pm.enumerate_settings(k)):
            for j, o in enumerate(pm.enumerate_outcomes(k)):
                w += p[i, j] * pm.pauli_coefficient(b, o, s)
        out += w / pm.gram_diagonal_entry(b, k) * kron_all([SINGLE[ch] for ch in b])
    assert np.allclose(pm.reconstruct_from_probabilities(p), out, atol=1e-12)
    assert np.allclose(out, rho, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(k=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
def test_roundtrip_property(k, seed):
    rho = random_density(2**k, rng=seed)
    p = pm.forward_map(pm.state_to_pauli_coeffs(rho))
    assert np.linalg.norm(pm.reconstruct_from_probabilities(p) - rho) < 1e-10


def test_inverse_is_linear_on_arbitrary_vectors(rng):
    p1, p2 = rng.random((9, 4)), rng.random((9, 4))
    lhs = pm.reconstruct_from_probabilities(2 * p1 - 3 * p2)
    rhs = 2 * pm.reconstruct_from_probabilities(p1) - 3 * pm.reconstruct_from_probabilities(p2)
    assert np.allclose(lhs, rhs, atol=1e-12)
    assert np.allclose(lhs, lhs.conj().T)


def test_check_density_matrix():
    with pytest.raises(ValueError):
        pm.check_density_matrix(np.eye(2))
    with pytest.raises(ValueError):
        pm.check_density_matrix(np.diag([1.2, -0.2]))
    pm.check_density_matrix(np.eye(2) / 2)


def test_enumerations_are_itertools_products():
    assert pm.enumerate_labels(2) == ["".join(p) for p in itertools.product("Ixyz", repeat=2)]
