"""
povm.py

General measurements as Kraus-operator sets, their Naimark dilation to a
projective measurement on system (x) ancilla, the POVM coherence defined
through that dilation, and the C = chi - I identity for POVMs.

The dilated space is indexed system-major, ancilla-minor: row s*N + j of the
isometry V = sum_j M_j (x) |j> belongs to system index s and outcome j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from .exceptions import NonPhysicalStateError
from .infotheory import Ensemble, weighted_sum, ensemble_state, holevo_information
from .qmath import (
    EIGEN_FLOOR,
    ComplexSquareMatrix,
    DensityMatrix,
    ProbabilityDistribution,
    ProjectiveMeasurement,
    as_square_matrix,
    check_dimensions,
    hermitian_function,
    psd_sqrt,
    shannon_entropy,
    von_neumann_entropy,
)

COMPLETENESS_TOL = 1e-9
POST_MEASUREMENT_FLOOR = 1e-12


def _read_only(a: np.ndarray) -> np.ndarray:
    frozen = np.array(a, copy=True)
    frozen.setflags(write=False)
    return frozen


@dataclass(frozen=True, eq=False)
class Povm:
    """
    Kraus operators {M_j} with sum_j M_j^dagger M_j = I.

    `check=False` skips the completeness check; it exists only so the
    verification harness can inject a deliberately broken measurement.
    """

    kraus: tuple[ComplexSquareMatrix, ...]
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        ops = tuple(_read_only(as_square_matrix(m)) for m in self.kraus)
        if not ops:
            raise ValueError("A POVM needs at least one outcome")
        check_dimensions(*(m.shape[0] for m in ops))
        object.__setattr__(self, "kraus", ops)
        if self.check:
            residual = completeness_residual(self)
            if residual > COMPLETENESS_TOL:
                raise NonPhysicalStateError(f"sum_j M_j^dagger M_j differs from I by {residual:.3e}")

    @classmethod
    def from_effects(cls, effects: Sequence[ArrayLike]) -> Povm:
        """Import effect operators E_j by taking Kraus operators M_j = E_j^(1/2)."""
        return cls(tuple(psd_sqrt(e) for e in effects))

    @classmethod
    def from_projective(cls, measurement: ProjectiveMeasurement) -> Povm:
        return cls(tuple(measurement.projectors()))

    @property
    def dim(self) -> int:
        return int(self.kraus[0].shape[0])

    @property
    def n_outcomes(self) -> int:
        return len(self.kraus)


@dataclass(frozen=True, eq=False)
class NaimarkDilation:
    """Isometry V ((dim*N) x dim) and the dilated projectors I (x) |j><j|."""

    isometry: np.ndarray
    dilated_projectors: tuple[np.ndarray, ...]

    @property
    def system_dim(self) -> int:
        return int(self.isometry.shape[1])

    @property
    def dilated_dim(self) -> int:
        return int(self.isometry.shape[0])


def completeness_residual(povm: Povm) -> float:
    total = sum(m.conj().T @ m for m in povm.kraus)
    return float(np.max(np.abs(total - np.eye(povm.dim))))


def isometry_residual(dilation: NaimarkDilation) -> float:
    v = dilation.isometry
    return float(np.max(np.abs(v.conj().T @ v - np.eye(dilation.system_dim))))


def effects(povm: Povm) -> list[ComplexSquareMatrix]:
    """E_j = M_j^dagger M_j."""
    return [m.conj().T @ m for m in povm.kraus]


def povm_probabilities(rho: DensityMatrix, povm: Povm) -> ProbabilityDistribution:
    """p_j = tr{rho M_j^dagger M_j}."""
    check_dimensions(rho.dim, povm.dim)
    p = np.array([np.real(np.einsum("ij,ji->", rho.matrix, e)) for e in effects(povm)])
    if p.min() < -EIGEN_FLOOR:
        raise NonPhysicalStateError(f"Negative outcome probability {p.min():.3e}")
    return ProbabilityDistribution(np.clip(p, 0.0, None))


def post_measurement_state(rho: DensityMatrix, povm: Povm, outcome: int) -> DensityMatrix:
    """rho_j = M_j rho M_j^dagger / p_j."""
    p = povm_probabilities(rho, povm).weights[outcome]
    if p < POST_MEASUREMENT_FLOOR:
        raise ValueError(f"Outcome {outcome} has probability {p:.3e}; post-measurement state undefined")
    m = povm.kraus[outcome]
    return DensityMatrix(m @ rho.matrix @ m.conj().T / p)


def naimark_dilate(povm: Povm) -> NaimarkDilation:
    n = povm.n_outcomes
    ancilla = np.eye(n)
    isometry = sum(np.kron(m, ancilla[:, [j]]) for j, m in enumerate(povm.kraus))
    projectors = tuple(_read_only(np.kron(np.eye(povm.dim), np.outer(ancilla[j], ancilla[j]))) for j in range(n))
    return NaimarkDilation(_read_only(isometry), projectors)


def dilate_state(rho: DensityMatrix, dilation: NaimarkDilation) -> DensityMatrix:
    """rho~ = V rho V^dagger."""
    check_dimensions(rho.dim, dilation.system_dim)
    v = dilation.isometry
    return DensityMatrix(v @ rho.matrix @ v.conj().T)


def dilated_probabilities(rho: DensityMatrix, dilation: NaimarkDilation) -> ProbabilityDistribution:
    lifted = dilate_state(rho, dilation).matrix
    p = np.array([np.real(np.einsum("ij,ji->", lifted, proj)) for proj in dilation.dilated_projectors])
    return ProbabilityDistribution(np.clip(p, 0.0, None))


def dilate_ensemble(ensemble: Ensemble, dilation: NaimarkDilation) -> Ensemble:
    return Ensemble(ensemble.labels, ensemble.probabilities, tuple(dilate_state(s, dilation) for s in ensemble.states))


def _block_dephase(rho: DensityMatrix, dilation: NaimarkDilation) -> DensityMatrix:
    return DensityMatrix(sum(p @ rho.matrix @ p for p in dilation.dilated_projectors))


def povm_coherence(rho: DensityMatrix, povm: Povm) -> float:
    """S(sum_j P_j rho~ P_j) - S(rho~) with P_j the dilated projectors."""
    check_dimensions(rho.dim, povm.dim)
    dilation = naimark_dilate(povm)
    lifted = dilate_state(rho, dilation)
    return von_neumann_entropy(_block_dephase(lifted, dilation)) - von_neumann_entropy(lifted)


def povm_ensemble_coherence(ensemble: Ensemble, povm: Povm) -> float:
    check_dimensions(ensemble.dim, povm.dim)
    coherences = [povm_coherence(s, povm) for s in ensemble.states]
    average = weighted_sum(ensemble.probabilities.weights, coherences)
    return average - povm_coherence(ensemble_state(ensemble), povm)


def povm_mutual_information(ensemble: Ensemble, povm: Povm) -> float:
    """I(Phi;M) = H(M) - H(M|Phi) from outcome statistics tr{rho M_j^dagger M_j}."""
    check_dimensions(ensemble.dim, povm.dim)
    marginal = shannon_entropy(povm_probabilities(ensemble_state(ensemble), povm))
    conditional = weighted_sum(
        ensemble.probabilities.weights,
        [shannon_entropy(povm_probabilities(s, povm)) for s in ensemble.states],
    )
    return marginal - conditional


def povm_cxi_residual(ensemble: Ensemble, povm: Povm) -> float:
    coherence = povm_ensemble_coherence(ensemble, povm)
    return coherence - (holevo_information(ensemble) - povm_mutual_information(ensemble, povm))


def random_povm(dim: int, n_outcomes: int, rng: np.random.Generator, rank: int = 1) -> Povm:
    """
    M_j = A_j (sum_k A_k^dagger A_k)^(-1/2) for Ginibre A_j of the given rank.

    Rank-one Kraus operators (the default) leave pure post-measurement states,
    which is the case where the POVM form of C = chi - I is exact.
    """
    if n_outcomes * rank < dim:
        raise ValueError(f"{n_outcomes} rank-{rank} operators cannot complete a {dim}-dimensional identity")
    raw = [_ginibre(dim, rank, rng) @ _ginibre(rank, dim, rng) for _ in range(n_outcomes)]
    total = sum(a.conj().T @ a for a in raw)
    inverse_sqrt = hermitian_function(total, lambda lam: 1.0 / np.sqrt(lam))
    return Povm(tuple(a @ inverse_sqrt for a in raw))


def entropy_preservation_residual(rho: DensityMatrix, dilation: NaimarkDilation) -> float:
    return abs(von_neumann_entropy(dilate_state(rho, dilation)) - von_neumann_entropy(rho))


def holevo_preservation_residual(ensemble: Ensemble, dilation: NaimarkDilation) -> float:
    return abs(holevo_information(dilate_ensemble(ensemble, dilation)) - holevo_information(ensemble))


def post_measurement_holevo_gap(ensemble: Ensemble, povm: Povm) -> float:
    """
    sum_j p_j chi(E_j), where E_j is the ensemble of post-measurement states
    rho_{j,phi} weighted by p(phi | j).

    The dilated-projector coherence satisfies C = chi - I - gap; the gap
    vanishes for rank-one Kraus operators.
    """
    check_dimensions(ensemble.dim, povm.dim)
    prior = ensemble.probabilities.weights
    conditional = np.array([povm_probabilities(s, povm).weights for s in ensemble.states])
    marginal = prior @ conditional
    terms = []
    for j in range(povm.n_outcomes):
        if marginal[j] < POST_MEASUREMENT_FLOOR:
            continue
        keep = [i for i in range(len(ensemble)) if conditional[i, j] >= POST_MEASUREMENT_FLOOR]
        posterior = ProbabilityDistribution.normalized(prior[keep] * conditional[keep, j])
        states = tuple(post_measurement_state(ensemble.states[i], povm, j) for i in keep)
        labels = tuple(ensemble.labels[i] for i in keep)
        terms.append(marginal[j] * holevo_information(Ensemble(labels, posterior, states)))
    return math.fsum(terms)


def _ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
