"""
qmath.py

Dense complex linear algebra and the quantum state / measurement primitives
that the information-theoretic modules build on. All entropies are returned
in nats; `nats_to_bits` converts for presentation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg
from scipy.special import entr
from scipy.stats import unitary_group

from .exceptions import DimensionMismatchError, NonPhysicalStateError, SupportMismatchError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-10
EIGEN_FLOOR = 1e-10
DISTRIBUTION_TOL = 1e-9
SUPPORT_FLOOR = 1e-12

ComplexSquareMatrix = NDArray[np.complex128]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def as_square_matrix(a: ArrayLike) -> ComplexSquareMatrix:
    """Coerce `a` to a finite complex square matrix or raise `ValueError`."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"Expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("Matrix contains NaN or Inf entries")
    return m


def hermitian_asymmetry(a: ComplexSquareMatrix) -> float:
    """Max-norm of A - A^dagger."""
    return float(np.max(np.abs(a - a.conj().T)))


def _read_only(a: NDArray) -> NDArray:
    frozen = np.array(a, copy=True)
    frozen.setflags(write=False)
    return frozen


def check_dimensions(*dims: int) -> None:
    if len(set(dims)) > 1:
        raise DimensionMismatchError(f"Dimension mismatch: {dims}")


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector in C^dim."""

    amplitudes: NDArray[np.complex128]

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise ValueError("State amplitudes must be a non-empty finite vector")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_TOL:
            raise NonPhysicalStateError(f"State norm {norm:.12g} differs from 1")
        object.__setattr__(self, "amplitudes", _read_only(v))

    @classmethod
    def normalized(cls, v: ArrayLike) -> PureState:
        v = np.asarray(v, dtype=np.complex128).reshape(-1)
        return cls(v / np.linalg.norm(v))

    @property
    def dim(self) -> int:
        return int(self.amplitudes.size)

    def overlap(self, other: PureState) -> complex:
        """<self|other>."""
        check_dimensions(self.dim, other.dim)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Hermitian, positive semi-definite, unit-trace operator.

    Asymmetry up to `HERMITIAN_TOL` is removed by symmetrising (A + A^dagger)/2;
    anything larger is rejected, as are traces off by more than `TRACE_TOL`
    and eigenvalues below -`EIGEN_FLOOR`.
    """

    matrix: ComplexSquareMatrix

    def __post_init__(self):
        m = as_square_matrix(self.matrix)
        asymmetry = hermitian_asymmetry(m)
        if asymmetry > HERMITIAN_TOL:
            raise NonPhysicalStateError(f"Matrix is not Hermitian: ||A - A^dagger||_max = {asymmetry:.3e}")
        m = (m + m.conj().T) / 2
        trace = float(np.trace(m).real)
        if abs(trace - 1.0) > TRACE_TOL:
            raise NonPhysicalStateError(f"Trace {trace:.12g} differs from 1")
        object.__setattr__(self, "matrix", _read_only(m))
        smallest = float(self.eigenvalues[0])
        if smallest < -EIGEN_FLOOR:
            raise NonPhysicalStateError(f"Non-physical state: eigenvalue {smallest:.3e} < 0")

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def diagonal(cls, probabilities: ArrayLike) -> DensityMatrix:
        return cls(np.diag(np.asarray(probabilities, dtype=np.complex128)))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @cached_property
    def eigenvalues(self) -> NDArray[np.float64]:
        """Ascending spectrum."""
        return linalg.eigvalsh(self.matrix)

    @property
    def purity(self) -> float:
        return float(np.real(np.einsum("ij,ji->", self.matrix, self.matrix)))


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Orthonormal basis {|m>}, stored as the columns of a unitary matrix."""

    basis: ComplexSquareMatrix

    def __post_init__(self):
        u = as_square_matrix(self.basis)
        residual = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
        if residual > NORM_TOL:
            raise NonPhysicalStateError(f"Basis vectors are not orthonormal (residual {residual:.3e})")
        object.__setattr__(self, "basis", _read_only(u))

    @classmethod
    def from_states(cls, states: Sequence[PureState]) -> ProjectiveMeasurement:
        return cls(np.column_stack([s.amplitudes for s in states]))

    @classmethod
    def computational(cls, dim: int) -> ProjectiveMeasurement:
        return cls(np.eye(dim, dtype=np.complex128))

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    def vectors(self) -> list[PureState]:
        return [PureState(self.basis[:, m]) for m in range(self.dim)]

    def projectors(self) -> list[ComplexSquareMatrix]:
        return [np.outer(self.basis[:, m], self.basis[:, m].conj()) for m in range(self.dim)]


@dataclass(frozen=True, eq=False)
class ProbabilityDistribution:
    """Non-negative weights summing to one within `DISTRIBUTION_TOL`."""

    weights: NDArray[np.float64]

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise ValueError("Weights must be a non-empty finite vector")
        if np.any(w < 0):
            raise NonPhysicalStateError(f"Negative probability weight {w.min():.3e}")
        total = math.fsum(w)
        if abs(total - 1.0) > DISTRIBUTION_TOL:
            raise NonPhysicalStateError(f"Weights sum to {total:.12g}, not 1")
        object.__setattr__(self, "weights", _read_only(w))

    @classmethod
    def normalized(cls, values: ArrayLike) -> ProbabilityDistribution:
        v = np.asarray(values, dtype=np.float64)
        return cls(v / math.fsum(v))

    def __len__(self) -> int:
        return int(self.weights.size)


def hermitian_eigensystem(a: ArrayLike) -> tuple[NDArray[np.float64], ComplexSquareMatrix]:
    """
    Eigen-decomposition A = U diag(lambda) U^dagger of a Hermitian matrix.

    :return: eigenvalues in ascending order and the unitary U whose columns
             are the matching eigenvectors.
    :raises ValueError: if ||A - A^dagger||_max exceeds `HERMITIAN_TOL`.
    """
    m = as_square_matrix(a)
    asymmetry = hermitian_asymmetry(m)
    if asymmetry > HERMITIAN_TOL:
        raise ValueError(f"Matrix is not Hermitian: ||A - A^dagger||_max = {asymmetry:.3e}")
    eigenvalues, eigenvectors = linalg.eigh((m + m.conj().T) / 2)
    return eigenvalues, eigenvectors


def hermitian_function(a: ArrayLike, func: Callable[[NDArray[np.float64]], NDArray]) -> ComplexSquareMatrix:
    """Apply `func` to the spectrum of a Hermitian matrix."""
    eigenvalues, u = hermitian_eigensystem(a)
    return (u * func(eigenvalues)) @ u.conj().T


def psd_sqrt(a: ArrayLike) -> ComplexSquareMatrix:
    """Unique positive square root of a PSD matrix."""
    eigenvalues, u = hermitian_eigensystem(a)
    if eigenvalues[0] < -EIGEN_FLOOR:
        raise NonPhysicalStateError(f"Operator is not positive semi-definite: eigenvalue {eigenvalues[0]:.3e}")
    return (u * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ u.conj().T


def spectrum_entropy(eigenvalues: ArrayLike) -> float:
    """-sum lambda log lambda with 0 log 0 := 0; tiny negatives are clamped."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if lam.min() < -EIGEN_FLOOR:
        raise NonPhysicalStateError(f"Non-physical state: eigenvalue {lam.min():.3e} < 0")
    return math.fsum(entr(np.clip(lam, 0.0, None)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    return spectrum_entropy(rho.eigenvalues)


def shannon_entropy(p: ProbabilityDistribution | ArrayLike) -> float:
    if not isinstance(p, ProbabilityDistribution):
        p = ProbabilityDistribution(p)
    return math.fsum(entr(p.weights))


def nats_to_bits(value: float) -> float:
    return value / math.log(2)


def _basis_diagonal(rho: DensityMatrix, measurement: ProjectiveMeasurement) -> NDArray[np.float64]:
    check_dimensions(rho.dim, measurement.dim)
    u = measurement.basis
    return np.real(np.einsum("im,ij,jm->m", u.conj(), rho.matrix, u))


def measurement_probabilities(rho: DensityMatrix, measurement: ProjectiveMeasurement) -> ProbabilityDistribution:
    """p_m = <m|rho|m>."""
    p = _basis_diagonal(rho, measurement)
    if p.min() < -EIGEN_FLOOR:
        raise NonPhysicalStateError(f"Negative outcome probability {p.min():.3e}")
    return ProbabilityDistribution(np.clip(p, 0.0, None))


def decohere(rho: DensityMatrix, measurement: ProjectiveMeasurement) -> DensityMatrix:
    """Delta_M[rho] = sum_m <m|rho|m> |m><m|."""
    p = _basis_diagonal(rho, measurement)
    u = measurement.basis
    return DensityMatrix((u * p) @ u.conj().T)


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """
    Quantum relative entropy tr{rho log rho - rho log sigma}.

    :raises SupportMismatchError: if rho has weight (above `SUPPORT_FLOOR`)
                                  on the kernel of sigma.
    """
    check_dimensions(rho.dim, sigma.dim)
    lam, u = hermitian_eigensystem(rho.matrix)
    mu, v = hermitian_eigensystem(sigma.matrix)
    lam = np.clip(lam, 0.0, None)
    # weight of rho on each eigenvector of sigma
    weights = np.abs(u.conj().T @ v) ** 2
    sigma_weight = lam @ weights
    kernel = mu <= SUPPORT_FLOOR
    if np.any(sigma_weight[kernel] > SUPPORT_FLOOR):
        raise SupportMismatchError("support(rho) is not contained in support(sigma)")
    cross = math.fsum(sigma_weight[~kernel] * np.log(mu[~kernel]))
    return -spectrum_entropy(lam) - cross


def random_pure_state(dim: int, rng: np.random.Generator) -> PureState:
    return PureState.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Ginibre-distributed mixed state of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_projective_measurement(dim: int, rng: np.random.Generator) -> ProjectiveMeasurement:
    """Basis drawn from the Haar measure."""
    return ProjectiveMeasurement(unitary_group.rvs(dim, random_state=rng))
