"""
infotheory.py

Holevo information, measurement mutual information, relative entropy of
coherence and ensemble coherence of a parameter-encoding ensemble, together
with the residual of the identity C = chi - I that ties them together.

Sums over ensemble entries are compensated (`math.fsum`) so that permuting
the entries changes no result beyond floating-point noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Hashable, Sequence

import numpy as np

from .exceptions import DimensionMismatchError
from .qmath import (
    DensityMatrix,
    ProbabilityDistribution,
    ProjectiveMeasurement,
    check_dimensions,
    decohere,
    measurement_probabilities,
    relative_entropy,
    shannon_entropy,
    von_neumann_entropy,
)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """
    Ensemble E_Phi of states rho_phi with prior p_Phi(phi).

    Labels are opaque; duplicates are allowed and treated as distinct entries.
    """

    labels: tuple[Hashable, ...]
    probabilities: ProbabilityDistribution
    states: tuple[DensityMatrix, ...]

    def __post_init__(self):
        if not (len(self.labels) == len(self.probabilities) == len(self.states)):
            raise ValueError(
                f"Ensemble has {len(self.labels)} labels, {len(self.probabilities)} probabilities "
                f"and {len(self.states)} states"
            )
        dims = {s.dim for s in self.states}
        if len(dims) != 1:
            raise DimensionMismatchError(f"Ensemble states have differing dimensions {sorted(dims)}")
        # Accepted priors may sum to 1 within DISTRIBUTION_TOL; rho_Phi needs a tighter trace.
        object.__setattr__(self, "probabilities", ProbabilityDistribution.normalized(self.probabilities.weights))

    @classmethod
    def from_entries(cls, entries: Sequence[tuple[Any, float, DensityMatrix]]) -> Ensemble:
        labels, probabilities, states = zip(*entries)
        return cls(tuple(labels), ProbabilityDistribution(np.asarray(probabilities)), tuple(states))

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self) -> int:
        return len(self.states)

    def entries(self) -> list[tuple[Hashable, float, DensityMatrix]]:
        return list(zip(self.labels, self.probabilities.weights.tolist(), self.states))

    def permuted(self, order: Sequence[int]) -> Ensemble:
        entries = self.entries()
        return Ensemble.from_entries([entries[i] for i in order])


def weighted_sum(weights: np.ndarray, values: Sequence[float]) -> float:
    return math.fsum(w * v for w, v in zip(weights, values))


def _weighted_matrix_sum(weights: np.ndarray, matrices: Sequence[np.ndarray]) -> np.ndarray:
    stack = np.stack([w * m for w, m in zip(weights, matrices)])
    real = np.apply_along_axis(math.fsum, 0, stack.real)
    imag = np.apply_along_axis(math.fsum, 0, stack.imag)
    return real + 1j * imag


def label_entropy(ensemble: Ensemble) -> float:
    """H(Phi), the Shannon entropy of the prior."""
    return shannon_entropy(ensemble.probabilities)


def ensemble_state(ensemble: Ensemble) -> DensityMatrix:
    """rho_Phi = sum_phi p(phi) rho_phi."""
    return DensityMatrix(
        _weighted_matrix_sum(ensemble.probabilities.weights, [s.matrix for s in ensemble.states])
    )


def holevo_information(ensemble: Ensemble) -> float:
    """chi = S(rho_Phi) - sum_phi p(phi) S(rho_phi)."""
    average = weighted_sum(ensemble.probabilities.weights, [von_neumann_entropy(s) for s in ensemble.states])
    return von_neumann_entropy(ensemble_state(ensemble)) - average


def conditional_measurement_entropy(ensemble: Ensemble, measurement: ProjectiveMeasurement) -> float:
    """H(M|Phi) = sum_phi p(phi) H(M | phi)."""
    check_dimensions(ensemble.dim, measurement.dim)
    entropies = [shannon_entropy(measurement_probabilities(s, measurement)) for s in ensemble.states]
    return weighted_sum(ensemble.probabilities.weights, entropies)


def mutual_information(ensemble: Ensemble, measurement: ProjectiveMeasurement) -> float:
    """I(Phi;M) = H(M) - H(M|Phi), with H(M) taken on the ensemble state."""
    check_dimensions(ensemble.dim, measurement.dim)
    marginal = shannon_entropy(measurement_probabilities(ensemble_state(ensemble), measurement))
    return marginal - conditional_measurement_entropy(ensemble, measurement)


def relative_entropy_of_coherence(rho: DensityMatrix, measurement: ProjectiveMeasurement) -> float:
    """C_M(rho) = S(Delta_M[rho]) - S(rho)."""
    check_dimensions(rho.dim, measurement.dim)
    return von_neumann_entropy(decohere(rho, measurement)) - von_neumann_entropy(rho)


def coherence_as_relative_entropy(rho: DensityMatrix, measurement: ProjectiveMeasurement) -> float:
    """
    The same coherence written as S(rho || Delta_M[rho]).

    :raises SupportMismatchError: when Delta_M[rho] does not cover the support of rho.
    """
    return relative_entropy(rho, decohere(rho, measurement))


def ensemble_coherence(ensemble: Ensemble, measurement: ProjectiveMeasurement) -> float:
    """C_M(E) = sum_phi p(phi) C_M(rho_phi) - C_M(rho_Phi)."""
    check_dimensions(ensemble.dim, measurement.dim)
    coherences = [relative_entropy_of_coherence(s, measurement) for s in ensemble.states]
    average = weighted_sum(ensemble.probabilities.weights, coherences)
    return average - relative_entropy_of_coherence(ensemble_state(ensemble), measurement)


def cxi_residual(ensemble: Ensemble, measurement: ProjectiveMeasurement) -> float:
    """C_M(E) - (chi(E) - I(Phi;M)); zero up to rounding for every valid input."""
    coherence = ensemble_coherence(ensemble, measurement)
    chi = holevo_information(ensemble)
    information = mutual_information(ensemble, measurement)
    return coherence - (chi - information)
