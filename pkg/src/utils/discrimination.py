"""
discrimination.py

Binary discrimination between the qubit states |psi_0> = |up_x> and
|psi_theta> = cos(theta/2)|up_x> + sin(theta/2)|down_x> with equal priors:
coherence landscapes over all projective bases on the Bloch sphere, the
minimum-error (Helstrom) basis, the unambiguous-discrimination POVM and
single-shot success probabilities.

Both states have real amplitudes in the sigma_z basis, so they and the
Helstrom pair lie on the sigma_x / sigma_z great circle (azimuth 0 or pi).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.optimize import minimize_scalar

from .exceptions import DegenerateInputError
from .infotheory import Ensemble, ensemble_coherence, holevo_information
from .povm import Povm, effects, povm_ensemble_coherence, povm_probabilities
from .qmath import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityMatrix,
    ProbabilityDistribution,
    ProjectiveMeasurement,
    PureState,
)

logger = logging.getLogger(__name__)

UP_X = np.array([1.0, 1.0], dtype=np.complex128) / math.sqrt(2)
DOWN_X = np.array([1.0, -1.0], dtype=np.complex128) / math.sqrt(2)

DEFAULT_LANDSCAPE_GRID = (181, 91)

REPORT_COLUMNS = [
    "theta",
    "chi_nats",
    "projective_coherence_normalized",
    "usd_coherence_normalized",
    "projective_error",
    "usd_error",
]


@dataclass(frozen=True)
class BlochDirection:
    """Unit vector given by polar angle in [0, pi] and azimuth in [0, 2 pi)."""

    polar: float
    azimuth: float

    def __post_init__(self):
        if not 0.0 <= self.polar <= math.pi:
            raise ValueError(f"Polar angle {self.polar} outside [0, pi]")
        if not 0.0 <= self.azimuth < 2 * math.pi:
            raise ValueError(f"Azimuth {self.azimuth} outside [0, 2 pi)")

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> BlochDirection:
        x, y, z = np.asarray(vector, dtype=float) / np.linalg.norm(vector)
        polar = math.acos(min(1.0, max(-1.0, z)))
        azimuth = math.atan2(y, x) % (2 * math.pi)
        return cls(polar, azimuth if azimuth < 2 * math.pi else 0.0)

    @property
    def vector(self) -> np.ndarray:
        return np.array(
            [
                math.sin(self.polar) * math.cos(self.azimuth),
                math.sin(self.polar) * math.sin(self.azimuth),
                math.cos(self.polar),
            ]
        )


@dataclass(frozen=True)
class DiscriminationProblem:
    """Equal-prior discrimination of psi_0 and psi_theta, theta in [0, pi]."""

    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"Separation angle {self.theta} outside [0, pi]")

    def ensemble(self) -> Ensemble:
        return Ensemble(
            (0.0, self.theta),
            ProbabilityDistribution(np.array([0.5, 0.5])),
            (rotated_state(0.0).projector(), rotated_state(self.theta).projector()),
        )


@dataclass(frozen=True)
class LandscapeSample:
    direction: BlochDirection
    coherence: float
    normalized: float


def rotated_state(theta: float) -> PureState:
    """cos(theta/2)|up_x> + sin(theta/2)|down_x>, in sigma_z coordinates."""
    return PureState(math.cos(theta / 2) * UP_X + math.sin(theta / 2) * DOWN_X)


def basis_from_direction(direction: BlochDirection) -> ProjectiveMeasurement:
    """Basis {|+d>, |-d>} of the eigenstates of d . sigma."""
    half = direction.polar / 2
    phase = np.exp(1j * direction.azimuth)
    plus = np.array([math.cos(half), phase * math.sin(half)])
    minus = np.array([math.sin(half), -phase * math.cos(half)])
    return ProjectiveMeasurement(np.column_stack([plus, minus]))


def bloch_projector(direction: BlochDirection) -> np.ndarray:
    """(I + d . sigma) / 2."""
    x, y, z = direction.vector
    return (np.eye(2) + x * PAULI_X + y * PAULI_Y + z * PAULI_Z) / 2


def landscape_grid(n_polar: int, n_azimuth: int) -> tuple[np.ndarray, np.ndarray]:
    if n_polar < 2 or n_azimuth < 2:
        raise ValueError(f"Landscape grid needs at least 2 x 2 nodes, got {n_polar} x {n_azimuth}")
    polar = np.linspace(0.0, math.pi, n_polar)
    azimuth = 2 * math.pi * np.arange(n_azimuth) / n_azimuth
    return polar, azimuth


def _landscape_row(args: tuple[float, float, np.ndarray, float]) -> list[LandscapeSample]:
    theta, polar, azimuths, chi = args
    ensemble = DiscriminationProblem(theta).ensemble()
    row = []
    for azimuth in azimuths:
        direction = BlochDirection(float(polar), float(azimuth))
        coherence = ensemble_coherence(ensemble, basis_from_direction(direction))
        row.append(LandscapeSample(direction, coherence, coherence / chi if chi > 0 else 0.0))
    return row


def coherence_landscape(
    problem: DiscriminationProblem,
    grid: tuple[int, int] = DEFAULT_LANDSCAPE_GRID,
    workers: int = 1,
) -> list[LandscapeSample]:
    """
    Ensemble coherence of every grid basis, normalised by the Holevo information.

    Samples are ordered by (polar index, azimuth index) whatever the number of
    worker processes.
    """
    polar, azimuth = landscape_grid(*grid)
    chi = holevo_information(problem.ensemble())
    tasks = [(problem.theta, p, azimuth, chi) for p in polar]
    logger.info(f"Landscape for theta={problem.theta:.6f}: {grid[0]} x {grid[1]} bases, chi={chi:.6f}")
    if workers > 1:
        with Pool(processes=workers) as pool:
            rows = pool.map(_landscape_row, tasks)
    else:
        rows = [_landscape_row(t) for t in tasks]
    return [sample for row in rows for sample in row]


def landscape_argmin(samples: Sequence[LandscapeSample]) -> LandscapeSample:
    """First sample (in grid order) attaining the minimum coherence."""
    return samples[int(np.argmin([s.coherence for s in samples]))]


def landscape_frame(samples: Sequence[LandscapeSample]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "polar": [s.direction.polar for s in samples],
            "azimuth": [s.direction.azimuth for s in samples],
            "coherence_nats": [s.coherence for s in samples],
            "normalized": [s.normalized for s in samples],
        }
    )


def axis_angle(a: BlochDirection | np.ndarray, b: BlochDirection | np.ndarray) -> float:
    """Angle between the measurement axes through a and b (antipodes identified)."""
    va = a.vector if isinstance(a, BlochDirection) else np.asarray(a)
    vb = b.vector if isinstance(b, BlochDirection) else np.asarray(b)
    cosine = abs(float(np.dot(va, vb))) / (np.linalg.norm(va) * np.linalg.norm(vb))
    return math.acos(min(1.0, cosine))


def great_circle_direction(angle: float) -> np.ndarray:
    """Bloch vector of rotated_state(angle): angle measured from sigma_x towards sigma_z."""
    return np.array([math.cos(angle), 0.0, math.sin(angle)])


def helstrom_basis(theta: float) -> ProjectiveMeasurement:
    """Pi_0 = rho_(theta/2 - pi/2), Pi_theta = rho_(theta/2 + pi/2)."""
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"Separation angle {theta} outside [0, pi]")
    return ProjectiveMeasurement.from_states(
        [rotated_state(theta / 2 - math.pi / 2), rotated_state(theta / 2 + math.pi / 2)]
    )


def great_circle_basis(angle: float) -> ProjectiveMeasurement:
    return ProjectiveMeasurement.from_states([rotated_state(angle), rotated_state(angle + math.pi)])


def numeric_helstrom_angle(theta: float, n_seed: int = 180, tol: float = 1e-10) -> float:
    """
    Minimum-coherence axis on the sigma_x / sigma_z great circle, in [0, pi).

    A uniform grid seeds the search; bounded golden-section/parabolic
    refinement (scipy's Brent method) polishes the best cell.
    """
    ensemble = DiscriminationProblem(theta).ensemble()
    step = math.pi / n_seed
    seeds = step * np.arange(n_seed)

    def objective(angle: float) -> float:
        return ensemble_coherence(ensemble, great_circle_basis(angle))

    best = float(seeds[int(np.argmin([objective(a) for a in seeds]))])
    result = minimize_scalar(objective, bounds=(best - step, best + step), method="bounded", options={"xatol": tol})
    return float(result.x) % math.pi


def helstrom_axis_angle(theta: float) -> float:
    """Analytic minimum-coherence axis theta/2 + pi/2, reduced to [0, pi)."""
    return (theta / 2 + math.pi / 2) % math.pi


def _check_usd_angle(theta: float) -> None:
    if theta == 0.0:
        raise DegenerateInputError("theta = 0: the states coincide and the USD measurement is vacuous")
    if not 0.0 < theta <= math.pi:
        raise ValueError(f"Separation angle {theta} outside (0, pi]")


def usd_constant(theta: float) -> float:
    """c = 1 / lambda_max(rho_pi + rho_(theta+pi))."""
    _check_usd_angle(theta)
    total = rotated_state(math.pi).projector().matrix + rotated_state(theta + math.pi).projector().matrix
    return 1.0 / float(linalg.eigvalsh(total)[-1])


def usd_povm(theta: float) -> Povm:
    """Outcomes (0, theta, ?) with effects c rho_(theta+pi), c rho_pi, I - c (rho_(theta+pi) + rho_pi)."""
    c = usd_constant(theta)
    e_zero = c * rotated_state(theta + math.pi).projector().matrix
    e_theta = c * rotated_state(math.pi).projector().matrix
    e_unsure = np.eye(2) - e_zero - e_theta
    return Povm.from_effects([e_zero, e_theta, e_unsure])


def usd_inconclusive_probability(theta: float) -> float:
    """p_? on the equal mixture of the two hypotheses."""
    mixture = DensityMatrix(sum(s.matrix for s in DiscriminationProblem(theta).ensemble().states) / 2)
    return float(povm_probabilities(mixture, usd_povm(theta)).weights[2])


def projective_success_probability(theta: float) -> float:
    """(1/2)(tr{Pi_0 rho_0} + tr{Pi_theta rho_theta}) in the Helstrom basis."""
    pi_zero, pi_theta = helstrom_basis(theta).projectors()
    rho_zero, rho_theta = DiscriminationProblem(theta).ensemble().states
    return 0.5 * (_expectation(pi_zero, rho_zero) + _expectation(pi_theta, rho_theta))


def usd_success_probability(theta: float) -> float:
    """Definite outcomes are trusted; the inconclusive one is a fair coin flip."""
    e_zero, e_theta, e_unsure = effects(usd_povm(theta))
    rho_zero, rho_theta = DiscriminationProblem(theta).ensemble().states
    return 0.5 * (_expectation(e_zero + e_unsure / 2, rho_zero) + _expectation(e_theta + e_unsure / 2, rho_theta))


def helstrom_bound(theta: float) -> float:
    """Optimal success probability (1/2)(1 + ||rho_0/2 - rho_theta/2||_1)."""
    rho_zero, rho_theta = DiscriminationProblem(theta).ensemble().states
    difference = (rho_zero.matrix - rho_theta.matrix) / 2
    return 0.5 * (1.0 + float(np.sum(np.abs(linalg.eigvalsh(difference)))))


def _expectation(operator: np.ndarray, rho: DensityMatrix) -> float:
    return float(np.real(np.einsum("ij,ji->", operator, rho.matrix)))


def coherence_vs_theta_report(theta_grid: Sequence[float]) -> pd.DataFrame:
    """
    Per theta: chi, the best projective and the USD ensemble coherence (both
    normalised by chi) and the single-shot error probabilities.
    """
    rows = []
    for theta in theta_grid:
        problem = DiscriminationProblem(float(theta))
        ensemble = problem.ensemble()
        chi = holevo_information(ensemble)
        projective = ensemble_coherence(ensemble, helstrom_basis(problem.theta))
        usd = povm_ensemble_coherence(ensemble, usd_povm(problem.theta))
        rows.append(
            {
                "theta": problem.theta,
                "chi_nats": chi,
                "projective_coherence_normalized": projective / chi,
                "usd_coherence_normalized": usd / chi,
                "projective_error": 1.0 - projective_success_probability(problem.theta),
                "usd_error": 1.0 - usd_success_probability(problem.theta),
            }
        )
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)
