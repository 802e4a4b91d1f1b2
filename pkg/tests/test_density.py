import math

import numpy as np
import pytest

import oracles
from isingring.density import (
    DensityMatrix,
    PureState,
    angles_all_x,
    angles_all_z,
    as_angles,
    binary_entropy,
    dephase,
    mutual_information,
    partial_trace,
    pure_density,
    reduced_state,
    relative_entropy,
    rotation_matrix,
    shannon_entropy,
    von_neumann_entropy,
)

BELL = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)


def test_rotation_matrix_unitary_and_bloch_direction():
    for theta in np.linspace(0.0, math.pi, 7):
        for phi in np.linspace(0.0, 2.0 * math.pi, 9):
            r = rotation_matrix(theta, phi)
            assert np.allclose(r.conj().T @ r, np.eye(2), atol=1e-14)
            v = r[:, 0]
            bloch = np.array(
                [
                    (v.conj() @ oracles.SX @ v).real,
                    (v.conj() @ oracles.SY @ v).real,
                    (v.conj() @ oracles.SZ @ v).real,
                ]
            )
            expected = np.array(
                [
                    math.sin(theta) * math.cos(phi),
                    math.sin(theta) * math.sin(phi),
                    math.cos(theta),
                ]
            )
            assert np.allclose(bloch, expected, atol=1e-14)


def test_rotation_matrix_columns_antipodal():
    r = rotation_matrix(1.1, 2.3)
    assert abs(np.vdot(r[:, 0], r[:, 1])) < 1e-15


def test_as_angles_coercion_and_errors():
    arr = as_angles([0.1, 0.2, 0.3, 0.4], 2)
    assert arr.shape == (2, 2)
    assert np.allclose(arr, [[0.1, 0.2], [0.3, 0.4]])
    with pytest.raises(ValueError):
        as_angles([0.1, 0.2], 2)
    assert np.allclose(angles_all_z(3), np.zeros((3, 2)))
    ax = angles_all_x(3)
    assert np.allclose(ax[:, 0], math.pi / 2.0) and np.allclose(ax[:, 1], 0.0)


def test_entropy_scalars():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert abs(shannon_entropy(np.full(8, 0.125)) - 3.0) < 1e-14
    assert shannon_entropy(np.array([1.0, 0.0])) == 0.0
    with pytest.raises(ValueError):
        shannon_entropy(np.array([1.2, -0.2]))


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.5j], [0.5j, 0.5]]), (0,))  # not Hermitian
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(2), (0,))  # trace 2
    bad = np.diag([1.5, -0.5]).astype(complex)
    with pytest.raises(ValueError):
        DensityMatrix(bad, (0,))  # negative eigenvalue
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(4) / 4.0, (0,))  # shape vs labels


def test_von_neumann_entropy_pure_and_mixed(rng):
    psi = oracles.random_pure(rng, 2)
    assert von_neumann_entropy(pure_density(psi, (0, 1))) < 1e-10
    maximally_mixed = DensityMatrix(np.eye(4) / 4.0, (0, 1))
    assert abs(von_neumann_entropy(maximally_mixed) - 2.0) < 1e-14


def test_relative_entropy_identities(rng):
    rho = DensityMatrix(oracles.random_density(rng, 2), (0, 1))
    assert relative_entropy(rho, rho) < 1e-9
    mixed = DensityMatrix(np.eye(4) / 4.0, (0, 1))
    expected = 2.0 - von_neumann_entropy(rho)
    assert abs(relative_entropy(rho, mixed) - expected) < 1e-9
    # support violation -> inf sentinel
    pure0 = pure_density(np.array([1.0, 0.0]), (0,))
    pure1 = pure_density(np.array([0.0, 1.0]), (0,))
    assert relative_entropy(pure0, pure1) == math.inf
    with pytest.raises(ValueError):
        relative_entropy(rho, pure0)


def test_relative_entropy_to_dephased_equals_entropy_gap(rng):
    """S(rho || Pi(rho)) = S(Pi(rho)) - S(rho) when Pi dephases rho."""
    rho = DensityMatrix(oracles.random_density(rng, 2), (0, 1))
    angles = [[0.7, 1.1], [2.0, 0.3]]
    pi_rho = dephase(rho, angles)
    lhs = relative_entropy(rho, pi_rho)
    rhs = von_neumann_entropy(pi_rho) - von_neumann_entropy(rho)
    assert abs(lhs - rhs) < 1e-9


def test_partial_trace_against_reference(rng):
    rho_mat = oracles.random_density(rng, 3)
    rho = DensityMatrix(rho_mat, (0, 1, 2))
    for keep in [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]:
        expected = oracles.partial_trace_dense(rho_mat, 3, keep)
        got = partial_trace(rho, keep)
        assert got.site_labels == tuple(sorted(keep))
        assert np.allclose(got.matrix, expected, atol=1e-12)


def test_partial_trace_factorizes_product_states(rng):
    a = oracles.random_density(rng, 1)
    b = oracles.random_density(rng, 1)
    rho = DensityMatrix(np.kron(a, b), (0, 1))
    assert np.allclose(partial_trace(rho, (0,)).matrix, a, atol=1e-12)
    assert np.allclose(partial_trace(rho, (1,)).matrix, b, atol=1e-12)
    with pytest.raises(ValueError):
        partial_trace(rho, ())
    with pytest.raises(ValueError):
        partial_trace(rho, (0, 5))


def test_mutual_information_anchors(rng):
    bell = pure_density(BELL, (0, 1))
    assert abs(mutual_information(bell, (0,)) - 2.0) < 1e-10
    a = oracles.random_density(rng, 1)
    b = oracles.random_density(rng, 1)
    product = DensityMatrix(np.kron(a, b), (0, 1))
    assert abs(mutual_information(product, (0,))) < 1e-10
    with pytest.raises(ValueError):
        mutual_information(bell, (0, 1))


def test_dephase_matches_projector_sum(rng):
    rho_mat = oracles.random_density(rng, 2)
    rho = DensityMatrix(rho_mat, (0, 1))
    pairs = [(0.9, 0.4), (1.7, 5.1)]
    got = dephase(rho, pairs)
    expected = oracles.dephase_matrix(rho_mat, pairs)
    assert np.allclose(got.matrix, expected, atol=1e-12)


def test_dephase_idempotent_and_z_basis_diagonal(rng):
    rho = DensityMatrix(oracles.random_density(rng, 2), (0, 1))
    once = dephase(rho, angles_all_z(2))
    twice = dephase(once, angles_all_z(2))
    assert np.allclose(once.matrix, twice.matrix, atol=1e-13)
    off_diag = once.matrix - np.diag(np.diag(once.matrix))
    assert np.max(np.abs(off_diag)) < 1e-13


def test_pure_state_validation_and_reduction():
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 1.0]), 1)  # unnormalized
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 0.0]), 2)  # wrong length
    bell = PureState(BELL, 2)
    assert bell.as_tensor().shape == (2, 2)
    for site in (0, 1):
        red = reduced_state(bell, (site,))
        assert np.allclose(red.matrix, np.eye(2) / 2.0, atol=1e-14)
    with pytest.raises(ValueError):
        reduced_state(bell, (0, 0))
    with pytest.raises(ValueError):
        reduced_state(bell, (3,))


def test_reduced_state_respects_requested_site_order(rng):
    psi = oracles.random_pure(rng, 3)
    state = PureState(psi, 3)
    fwd = reduced_state(state, (0, 2)).matrix
    rev = reduced_state(state, (2, 0)).matrix
    swap = fwd.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
    assert np.allclose(rev, swap, atol=1e-13)
