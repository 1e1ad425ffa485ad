import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bdris_wpt._validation import ContractError
from bdris_wpt.rectenna import idc
from bdris_wpt.ris import (
    Topology,
    cascade_channel,
    cascade_vectors,
    feasibility_map,
    half_dim,
    half_index,
    halfvec,
    is_feasible,
    linearization_terms,
    linearized_cascade,
    neumann_approx_inverse,
    permutation_matrix,
    scattering_from_impedance,
    symmetric_unitary_projection,
    takagi,
    unvec,
)

from conftest import complex_normal


def random_reactance(rng, M, scale=50.0):
    X = rng.standard_normal((M, M)) * scale
    return 1j * (X + X.T) / 2


def random_symmetric(rng, M):
    A = complex_normal(rng, M, M)
    return A + A.T


@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_lossless_impedance_gives_feasible_scattering(M, seed):
    rng = np.random.default_rng(seed)
    theta = scattering_from_impedance(random_reactance(rng, M))
    assert is_feasible(theta)


def test_reference_impedance_gives_j_identity():
    np.testing.assert_allclose(scattering_from_impedance(50j * np.eye(3)), 1j * np.eye(3), atol=1e-15)


def test_impedance_checks():
    with pytest.raises(ContractError):
        scattering_from_impedance(np.eye(2) * (1 + 1j))
    with pytest.raises(ContractError):
        scattering_from_impedance(np.array([[0, 1j], [0, 0]]))


def test_half_index_order():
    rows, cols = half_index(3)
    assert list(zip(rows, cols)) == [(0, 0), (0, 1), (1, 1), (0, 2), (1, 2), (2, 2)]


@given(st.integers(1, 9), st.integers(0, 2**32 - 1))
def test_halfvec_roundtrip_and_permutation(M, seed):
    rng = np.random.default_rng(seed)
    A = random_symmetric(rng, M)
    h = halfvec(A)
    assert h.shape == (half_dim(M),)
    np.testing.assert_array_equal(unvec(h, M), A)
    P = permutation_matrix(M)
    np.testing.assert_allclose(P @ h, A.reshape(-1, order="F"))
    assert P.sum() == M * M


def test_unvec_rejects_bad_length():
    with pytest.raises(ContractError):
        unvec(np.ones(4))


@given(st.integers(1, 8), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_cascade_matrix_and_vector_routes(M, N, seed):
    rng = np.random.default_rng(seed)
    theta = random_symmetric(rng, M)
    h_R, h_I = complex_normal(rng, N, M), complex_normal(rng, N, M)
    a = cascade_vectors(h_R, h_I)
    np.testing.assert_allclose(a @ halfvec(theta), cascade_channel(theta, h_R, h_I), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("exact", [True, False])
def test_neumann_matrix_and_vector_routes(exact):
    rng = np.random.default_rng(1)
    M = 5
    Z = random_reactance(rng, M)
    W = random_reactance(rng, M, 1.0)
    A = np.linalg.inv(Z + 50 * np.eye(M))
    Omega = W * 0.01 / (np.abs(W).max() * np.abs(A).sum(axis=1).max())
    h_R, h_I = complex_normal(rng, 3, M), complex_normal(rng, 3, M)
    h0, f = linearization_terms(Z, h_R, h_I, exact=exact)
    np.testing.assert_allclose(h0 - f @ halfvec(Omega), linearized_cascade(Z, Omega, h_R, h_I, exact=exact), atol=1e-13)


def test_exact_linearization_is_second_order():
    rng = np.random.default_rng(2)
    M = 6
    Z = random_reactance(rng, M)
    W = random_reactance(rng, M, 1.0)
    h_R, h_I = complex_normal(rng, 2, M), complex_normal(rng, 2, M)
    errs = []
    for d in (1e-4, 1e-3):
        Om = d * W
        exact = cascade_channel(scattering_from_impedance(Z + Om), h_R, h_I)
        errs.append(np.linalg.norm(linearized_cascade(Z, Om, h_R, h_I) - exact))
    assert errs[1] / errs[0] == pytest.approx(100, rel=0.05)


def test_neumann_rejects_large_steps():
    Z = 50j * np.eye(2)
    with pytest.raises(ContractError):
        neumann_approx_inverse(Z, 1e3j * np.ones((2, 2)))


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_takagi_reconstructs(M, seed):
    A = random_symmetric(np.random.default_rng(seed), M)
    Q, s = takagi(A)
    np.testing.assert_allclose((Q * s) @ Q.T, A, atol=1e-9 * max(1, np.linalg.norm(A)))
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(M), atol=1e-9)
    assert np.all(s >= -1e-12)


def test_takagi_degenerate_spectrum():
    rng = np.random.default_rng(5)
    theta = scattering_from_impedance(random_reactance(rng, 4))
    Q, s = takagi(theta)
    np.testing.assert_allclose(s, 1.0, atol=1e-9)
    np.testing.assert_allclose(Q @ Q.T, theta, atol=1e-9)


def test_takagi_rejects_nonsymmetric():
    with pytest.raises(ContractError):
        takagi(np.array([[0, 1], [0, 0]]))


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_projection_and_map_are_feasible(M, seed):
    rng = np.random.default_rng(seed)
    A = random_symmetric(rng, M)
    assert is_feasible(symmetric_unitary_projection(A))
    h_R, h_I = complex_normal(rng, 3, M), complex_normal(rng, 3, M)
    s = complex_normal(rng, 3)
    theta, info = feasibility_map(A, h_I, h_R, s, K=200, seed=seed, return_info=True)
    assert is_feasible(theta)
    assert idc(s, cascade_channel(theta, h_R, h_I)) == pytest.approx(info["idc"], rel=1e-9)
    assert info["idc"] >= idc(s, cascade_channel(symmetric_unitary_projection(A), h_R, h_I)) * (1 - 1e-9)


def test_map_is_seeded():
    rng = np.random.default_rng(0)
    A = random_symmetric(rng, 4)
    h_R, h_I, s = complex_normal(rng, 2, 4), complex_normal(rng, 2, 4), complex_normal(rng, 2)
    np.testing.assert_array_equal(feasibility_map(A, h_I, h_R, s, 100, 7), feasibility_map(A, h_I, h_R, s, 100, 7))


def test_topologies():
    assert Topology.fully_connected(4).zero_indices.size == 0
    assert Topology.diagonal(5).free.sum() == 5
    g = Topology.group_connected(4, 2)
    assert g.free.sum() == 2 * half_dim(2)
    assert Topology.from_name("group-2", 4).name == "group-2"
    with pytest.raises(ContractError):
        Topology.group_connected(5, 2)
    with pytest.raises(ContractError):
        Topology.from_name("ring", 4)


def test_non_finite_impedance_rejected():
    with pytest.raises(ContractError):
        scattering_from_impedance(np.full((2, 2), np.nan))
