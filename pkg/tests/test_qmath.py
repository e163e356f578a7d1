import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.utils.exceptions import DimensionMismatchError, NonPhysicalStateError, SupportMismatchError
from src.utils.qmath import (
    PAULI_X,
    PAULI_Z,
    DensityMatrix,
    ProbabilityDistribution,
    ProjectiveMeasurement,
    PureState,
    decohere,
    hermitian_eigensystem,
    measurement_probabilities,
    nats_to_bits,
    psd_sqrt,
    random_density_matrix,
    random_projective_measurement,
    random_pure_state,
    relative_entropy,
    shannon_entropy,
    von_neumann_entropy,
)

UP_X = PureState(np.array([1, 1]) / math.sqrt(2))
DOWN_X = PureState(np.array([1, -1]) / math.sqrt(2))
SIGMA_X_BASIS = ProjectiveMeasurement.from_states([UP_X, DOWN_X])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def test_eigensystem_identity():
    eigenvalues, _ = hermitian_eigensystem(np.eye(2))
    assert_allclose(eigenvalues, [1, 1])


def test_eigensystem_pauli_x():
    eigenvalues, u = hermitian_eigensystem(PAULI_X)
    assert_allclose(eigenvalues, [-1, 1], atol=1e-12)
    assert_allclose(np.outer(u[:, 0], u[:, 0].conj()), DOWN_X.projector().matrix, atol=1e-12)
    assert_allclose(np.outer(u[:, 1], u[:, 1].conj()), UP_X.projector().matrix, atol=1e-12)


@pytest.mark.parametrize("dim", [2, 4, 8, 16])
def test_eigensystem_reconstruction(dim, rng):
    a = random_hermitian(dim, rng)
    eigenvalues, u = hermitian_eigensystem(a)
    assert np.all(np.diff(eigenvalues) >= 0)
    assert np.max(np.abs((u * eigenvalues) @ u.conj().T - a)) < 1e-9


def test_eigensystem_rejects_non_hermitian():
    with pytest.raises(ValueError, match="not Hermitian"):
        hermitian_eigensystem(np.array([[0, 1], [0, 0]]))


def test_density_matrix_symmetrises_small_asymmetry():
    m = np.array([[0.5, 0.1 + 1e-12], [0.1, 0.5]])
    rho = DensityMatrix(m)
    assert_allclose(rho.matrix, rho.matrix.conj().T, atol=0)


@pytest.mark.parametrize(
    "matrix",
    [
        np.array([[0.5, 0.2], [0.0, 0.5]]),
        np.array([[0.6, 0.0], [0.0, 0.6]]),
        np.diag([1.5, -0.5]),
    ],
)
def test_density_matrix_rejects_non_physical(matrix):
    with pytest.raises(NonPhysicalStateError):
        DensityMatrix(matrix)


def test_density_matrix_rejects_nan():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[np.nan, 0], [0, 1]]))


def test_pure_state_requires_unit_norm():
    with pytest.raises(NonPhysicalStateError):
        PureState(np.array([1.0, 1.0]))


def test_probability_distribution_rejects_negative_weight():
    with pytest.raises(NonPhysicalStateError):
        ProbabilityDistribution(np.array([1.2, -0.2]))


def test_von_neumann_entropy_examples():
    assert von_neumann_entropy(DensityMatrix.maximally_mixed(2)) == pytest.approx(math.log(2), abs=1e-12)
    assert von_neumann_entropy(UP_X.projector()) == pytest.approx(0.0, abs=1e-12)
    expected = -0.25 * math.log(0.25) - 0.75 * math.log(0.75)
    assert von_neumann_entropy(DensityMatrix.diagonal([0.25, 0.75])) == pytest.approx(expected, abs=1e-12)


def test_shannon_entropy_examples():
    assert shannon_entropy(np.full(6, 1 / 6)) == pytest.approx(math.log(6), abs=1e-12)
    assert shannon_entropy(np.array([1.0, 0.0, 0.0])) == 0.0
    assert shannon_entropy(np.array([0.5, 0.5])) == pytest.approx(math.log(2), abs=1e-12)
    assert nats_to_bits(math.log(2)) == pytest.approx(1.0)


def test_decohere_fixed_point_and_equal_superposition(rng):
    rho = DensityMatrix.diagonal([0.3, 0.7])
    assert_allclose(decohere(rho, ProjectiveMeasurement.computational(2)).matrix, rho.matrix, atol=1e-15)
    assert_allclose(
        decohere(UP_X.projector(), ProjectiveMeasurement.computational(2)).matrix, np.eye(2) / 2, atol=1e-15
    )


def test_decohere_matches_basis_change(rng):
    rho = random_density_matrix(3, rng)
    m = random_projective_measurement(3, rng)
    u = m.basis
    rotated = u.conj().T @ rho.matrix @ u
    in_basis = u.conj().T @ decohere(rho, m).matrix @ u
    assert_allclose(in_basis, np.diag(np.diag(rotated)), atol=1e-12)


def test_decohere_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatchError):
        decohere(random_density_matrix(2, rng), ProjectiveMeasurement.computational(3))


def test_measurement_probabilities_examples():
    one_hot = measurement_probabilities(PureState(np.array([0, 1, 0])).projector(), ProjectiveMeasurement.computational(3))
    assert_allclose(one_hot.weights, [0, 1, 0])
    assert_allclose(
        measurement_probabilities(UP_X.projector(), ProjectiveMeasurement.computational(2)).weights, [0.5, 0.5]
    )
    theta = 0.7
    rotated = PureState(math.cos(theta / 2) * UP_X.amplitudes + math.sin(theta / 2) * DOWN_X.amplitudes)
    assert_allclose(
        measurement_probabilities(rotated.projector(), SIGMA_X_BASIS).weights,
        [math.cos(theta / 2) ** 2, math.sin(theta / 2) ** 2],
        atol=1e-12,
    )


def test_decohere_properties(rng):
    for _ in range(200):
        dim = int(rng.integers(2, 5))
        rho = random_density_matrix(dim, rng, rank=int(rng.integers(1, dim + 1)))
        m = random_projective_measurement(dim, rng)
        dephased = decohere(rho, m)
        assert abs(shannon_entropy(measurement_probabilities(rho, m)) - von_neumann_entropy(dephased)) < 1e-9
        assert np.max(np.abs(decohere(dephased, m).matrix - dephased.matrix)) < 1e-10
        assert von_neumann_entropy(dephased) >= von_neumann_entropy(rho) - 1e-9
        assert abs(np.trace(dephased.matrix).real - 1) < 1e-10


def test_relative_entropy_of_state_with_itself_is_zero(rng):
    rho = random_density_matrix(3, rng)
    assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-10)


def test_relative_entropy_support_mismatch():
    with pytest.raises(SupportMismatchError):
        relative_entropy(DensityMatrix.maximally_mixed(2), DensityMatrix.diagonal([1.0, 0.0]))


def test_psd_sqrt_squares_back(rng):
    rho = random_density_matrix(4, rng)
    root = psd_sqrt(rho.matrix)
    assert_allclose(root @ root, rho.matrix, atol=1e-12)


def test_random_generators_are_physical(rng):
    assert random_pure_state(5, rng).dim == 5
    assert random_density_matrix(4, rng, rank=2).eigenvalues[:2] == pytest.approx([0, 0], abs=1e-10)
    u = random_projective_measurement(4, rng).basis
    assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)
    assert_allclose(sum(ProjectiveMeasurement(u).projectors()), np.eye(4), atol=1e-12)
    assert_allclose(PAULI_Z @ PAULI_Z, np.eye(2))
