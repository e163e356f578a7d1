import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.utils.discrimination import DiscriminationProblem, rotated_state, usd_constant, usd_povm
from src.utils.exceptions import DimensionMismatchError, NonPhysicalStateError
from src.utils.infotheory import Ensemble, ensemble_coherence, ensemble_state, holevo_information, relative_entropy_of_coherence
from src.utils.povm import (
    Povm,
    completeness_residual,
    dilate_ensemble,
    dilate_state,
    dilated_probabilities,
    effects,
    entropy_preservation_residual,
    holevo_preservation_residual,
    isometry_residual,
    naimark_dilate,
    post_measurement_holevo_gap,
    post_measurement_state,
    povm_coherence,
    povm_cxi_residual,
    povm_ensemble_coherence,
    povm_mutual_information,
    povm_probabilities,
    random_povm,
)
from src.utils.qmath import (
    DensityMatrix,
    ProbabilityDistribution,
    ProjectiveMeasurement,
    measurement_probabilities,
    random_density_matrix,
    random_projective_measurement,
    von_neumann_entropy,
)


@pytest.fixture
def rng():
    return np.random.default_rng(77)


@pytest.fixture
def z_povm():
    return Povm.from_projective(ProjectiveMeasurement.computational(2))


def random_ensemble(rng, dim, n_states):
    prior = ProbabilityDistribution.normalized(rng.dirichlet(np.ones(n_states)))
    return Ensemble(tuple(range(n_states)), prior, tuple(random_density_matrix(dim, rng) for _ in range(n_states)))


def test_povm_rejects_incomplete_set():
    with pytest.raises(NonPhysicalStateError):
        Povm((np.eye(2), np.eye(2)))


def test_povm_check_can_be_skipped():
    broken = Povm((1.1 * np.eye(2),), check=False)
    assert completeness_residual(broken) == pytest.approx(0.21)


def test_effects_of_projective_and_trivial(z_povm):
    assert_allclose(effects(z_povm), [np.diag([1, 0]), np.diag([0, 1])])
    assert_allclose(effects(Povm((np.eye(2),))), [np.eye(2)])


@pytest.mark.parametrize("theta", [0.3, math.pi / 2, 2.0, math.pi])
def test_usd_effects_complete_and_positive(theta):
    povm = usd_povm(theta)
    assert_allclose(sum(effects(povm)), np.eye(2), atol=1e-9)
    for e in effects(povm):
        assert np.linalg.eigvalsh(e).min() >= -1e-10


def test_povm_probabilities_examples(rng, z_povm):
    rho = random_density_matrix(2, rng)
    assert_allclose(povm_probabilities(rho, Povm((np.eye(2),))).weights, [1.0])
    assert_allclose(
        povm_probabilities(rho, z_povm).weights,
        measurement_probabilities(rho, ProjectiveMeasurement.computational(2)).weights,
        atol=1e-12,
    )


def test_usd_inconclusive_matches_closed_form():
    theta = math.pi / 2
    mixture = ensemble_state(DiscriminationProblem(theta).ensemble())
    p_unsure = povm_probabilities(mixture, usd_povm(theta)).weights[2]
    assert p_unsure == pytest.approx(1 - usd_constant(theta) * math.sin(theta / 2) ** 2, abs=1e-10)
    assert p_unsure == pytest.approx(math.cos(math.pi / 4), abs=1e-10)


def test_povm_probabilities_dimension_mismatch(rng, z_povm):
    with pytest.raises(DimensionMismatchError):
        povm_probabilities(random_density_matrix(3, rng), z_povm)


def test_dilation_of_projective_qubit(rng, z_povm):
    dilation = naimark_dilate(z_povm)
    assert dilation.isometry.shape == (4, 2)
    rho = random_density_matrix(2, rng)
    assert_allclose(dilated_probabilities(rho, dilation).weights, povm_probabilities(rho, z_povm).weights, atol=1e-12)


def test_dilation_of_uninformative_povm(rng):
    half = Povm((np.eye(2) / math.sqrt(2), np.eye(2) / math.sqrt(2)))
    dilation = naimark_dilate(half)
    assert isometry_residual(dilation) < 1e-9
    for _ in range(5):
        assert_allclose(dilated_probabilities(random_density_matrix(2, rng), dilation).weights, [0.5, 0.5], atol=1e-12)


def test_dilation_projectors_orthogonal_and_complete():
    dilation = naimark_dilate(usd_povm(1.0))
    projectors = dilation.dilated_projectors
    assert_allclose(sum(projectors), np.eye(6))
    assert_allclose(projectors[0] @ projectors[1], np.zeros((6, 6)))


def test_usd_dilation_preserves_statistics(rng):
    povm = usd_povm(1.0)
    dilation = naimark_dilate(povm)
    assert dilation.isometry.shape == (6, 2)
    for _ in range(50):
        rho = random_density_matrix(2, rng)
        assert_allclose(dilated_probabilities(rho, dilation).weights, povm_probabilities(rho, povm).weights, atol=1e-10)


def test_dilate_state_examples(rng):
    dilation = naimark_dilate(usd_povm(1.0))
    pure = rotated_state(0.4).projector()
    assert von_neumann_entropy(dilate_state(pure, dilation)) == pytest.approx(0.0, abs=1e-9)
    assert von_neumann_entropy(dilate_state(DensityMatrix.maximally_mixed(2), dilation)) == pytest.approx(
        math.log(2), abs=1e-9
    )
    rho = random_density_matrix(2, rng)
    lifted = dilate_state(rho, dilation).eigenvalues
    assert_allclose(lifted[-2:], rho.eigenvalues, atol=1e-9)
    assert_allclose(lifted[:-2], 0.0, atol=1e-9)
    assert entropy_preservation_residual(rho, dilation) < 1e-9


def test_povm_coherence_examples(z_povm, rng):
    assert povm_coherence(rotated_state(0.0).projector(), z_povm) == pytest.approx(math.log(2), abs=1e-9)
    assert povm_coherence(random_density_matrix(2, rng), Povm((np.eye(2),))) == pytest.approx(0.0, abs=1e-9)
    usd = usd_povm(math.pi)
    assert povm_coherence(rotated_state(0.0).projector(), usd) == pytest.approx(0.0, abs=1e-9)
    assert povm_coherence(rotated_state(math.pi).projector(), usd) == pytest.approx(0.0, abs=1e-9)


def test_povm_coherence_reduces_to_projective(rng):
    basis = random_projective_measurement(3, rng)
    rho = random_density_matrix(3, rng)
    assert povm_coherence(rho, Povm.from_projective(basis)) == pytest.approx(
        relative_entropy_of_coherence(rho, basis), abs=1e-9
    )
    ensemble = random_ensemble(rng, 3, 4)
    assert povm_ensemble_coherence(ensemble, Povm.from_projective(basis)) == pytest.approx(
        ensemble_coherence(ensemble, basis), abs=1e-9
    )


def test_random_povm_is_complete(rng):
    for dim, n in [(2, 2), (2, 4), (3, 3), (3, 4)]:
        assert completeness_residual(random_povm(dim, n, rng)) < 1e-9
    assert completeness_residual(random_povm(2, 3, rng, rank=2)) < 1e-9


def test_random_povm_needs_enough_rank(rng):
    with pytest.raises(ValueError):
        random_povm(3, 2, rng)


def test_povm_cxi_random_ensembles(rng):
    worst = 0.0
    for _ in range(100):
        dim = int(rng.integers(2, 4))
        ensemble = random_ensemble(rng, dim, int(rng.integers(2, 6)))
        povm = random_povm(dim, int(rng.integers(max(2, dim), 5)), rng)
        dilation = naimark_dilate(povm)
        worst = max(worst, abs(povm_cxi_residual(ensemble, povm)))
        assert isometry_residual(dilation) < 1e-9
        assert holevo_preservation_residual(ensemble, dilation) < 1e-9
        assert povm_ensemble_coherence(ensemble, povm) >= -1e-9
        assert holevo_information(dilate_ensemble(ensemble, dilation)) == pytest.approx(
            holevo_information(ensemble), abs=1e-9
        )
    assert worst < 1e-9


def test_higher_rank_kraus_residual_is_post_measurement_gap(rng):
    ensemble = random_ensemble(rng, 2, 3)
    povm = random_povm(2, 3, rng, rank=2)
    gap = post_measurement_holevo_gap(ensemble, povm)
    assert gap > 1e-6
    assert povm_cxi_residual(ensemble, povm) == pytest.approx(-gap, abs=1e-9)


def test_uninformative_povm_residual_equals_minus_chi(rng):
    ensemble = random_ensemble(rng, 2, 2)
    half = Povm((np.eye(2) / math.sqrt(2), np.eye(2) / math.sqrt(2)))
    assert povm_mutual_information(ensemble, half) == pytest.approx(0.0, abs=1e-12)
    assert povm_cxi_residual(ensemble, half) == pytest.approx(-holevo_information(ensemble), abs=1e-9)


def test_rank_one_povm_has_no_gap(rng):
    ensemble = random_ensemble(rng, 2, 3)
    assert post_measurement_holevo_gap(ensemble, random_povm(2, 3, rng)) == pytest.approx(0.0, abs=1e-9)


def test_post_measurement_state(z_povm):
    rho = rotated_state(0.0).projector()
    assert_allclose(post_measurement_state(rho, z_povm, 1).matrix, np.diag([0, 1]), atol=1e-12)
    with pytest.raises(ValueError):
        post_measurement_state(DensityMatrix.diagonal([1, 0]), z_povm, 1)
