"""
hgmetrology.py

Bayesian localisation of a Gaussian point source by photodetection in
Hermite-Gauss (HG) modes displaced by a shift theta.

A photon emitted at phi has wavefunction psi_phi(x) = (2 pi)^(-1/4) exp(-(x - phi)^2 / 4).
Measuring in the HG basis of width sigma_h centred on theta yields outcome q
with probability c_q(phi, theta)^2, c_q = integral h_q(x - theta) psi_phi(x) dx.
The basis is truncated at n_modes; the remaining mass 1 - sum c_q^2 is kept as
one extra "overflow" outcome so every likelihood column stays normalised.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from multiprocessing import Pool
from typing import TYPE_CHECKING, Sequence

import numpy as np
import pandas as pd
from numpy.polynomial.legendre import leggauss
from numpy.typing import NDArray
from scipy.signal import argrelextrema
from scipy.special import entr

from .exceptions import ImpossibleObservationError, QuadratureError, TruncationError
from .infotheory import Ensemble
from .qmath import ProbabilityDistribution, PureState

if TYPE_CHECKING:
    from .strategies import ShiftStrategy

logger = logging.getLogger(__name__)

MAX_MODE_INDEX = 60
QUADRATURE_TOL = 1e-8
OVERFLOW_WARNING = 0.01
OVERFLOW_LIMIT = 0.05
MARGINAL_FLOOR = 1e-300
TIE_TOL = 1e-10


@dataclass(frozen=True)
class ModeSettings:
    """HG basis width, truncation and the quadrature used for overlaps."""

    sigma_h: float = 2.0
    n_modes: int = 20
    quadrature_nodes: int = 400
    quadrature_range: float = 30.0

    def __post_init__(self):
        if self.sigma_h <= 0:
            raise ValueError(f"sigma_h must be positive, got {self.sigma_h}")
        if not 1 <= self.n_modes <= MAX_MODE_INDEX + 1:
            raise ValueError(f"n_modes must lie in [1, {MAX_MODE_INDEX + 1}], got {self.n_modes}")
        if self.quadrature_nodes < 2 or self.quadrature_range <= 0:
            raise ValueError("Quadrature needs at least two nodes and a positive range")


@dataclass(frozen=True, eq=False)
class SourceGrid:
    """Evenly spaced phi values with prior or posterior weights."""

    phis: NDArray[np.float64]
    weights: ProbabilityDistribution

    def __post_init__(self):
        phis = np.array(self.phis, dtype=np.float64).reshape(-1)
        if phis.size != len(self.weights):
            raise ValueError(f"{phis.size} grid points but {len(self.weights)} weights")
        if phis.size > 1:
            steps = np.diff(phis)
            if np.any(steps <= 0):
                raise ValueError("Grid points must be strictly increasing")
            if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
                raise ValueError("Grid points must be equally spaced")
        phis.setflags(write=False)
        object.__setattr__(self, "phis", phis)

    def __len__(self) -> int:
        return int(self.phis.size)

    def with_weights(self, weights: NDArray[np.float64]) -> SourceGrid:
        return SourceGrid(self.phis, ProbabilityDistribution(weights))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"phi": self.phis, "weight": self.weights.weights})


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """
    Outcome amplitudes and likelihoods p(m | phi) for one shift.

    Rows are HG indices 0..n_modes-1 followed by the overflow outcome;
    columns follow the source grid.
    """

    shift: float
    amplitudes: NDArray[np.float64]
    overflow: NDArray[np.float64]

    @cached_property
    def cond_probs(self) -> NDArray[np.float64]:
        return self.amplitudes**2

    @property
    def n_outcomes(self) -> int:
        return int(self.amplitudes.shape[0])


@dataclass(frozen=True, eq=False)
class ModelBank:
    """Measurement models for a fixed list of candidate shifts."""

    thetas: NDArray[np.float64]
    models: tuple[MeasurementModel, ...]

    @cached_property
    def amplitudes(self) -> NDArray[np.float64]:
        return np.stack([m.amplitudes for m in self.models])

    @cached_property
    def column_entropies(self) -> NDArray[np.float64]:
        """H(p(. | phi)) per (shift, phi); equal to the coherence of each pure state."""
        return entr(self.amplitudes**2).sum(axis=1)

    def __len__(self) -> int:
        return len(self.models)


@dataclass(frozen=True, eq=False)
class AmseCurve:
    """Mean and variance (over sequences) of e(m) after each of k = 1..K measurements."""

    strategy: str
    mean: NDArray[np.float64]
    variance: NDArray[np.float64]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "k": np.arange(1, self.mean.size + 1),
                "strategy": self.strategy,
                "amse": self.mean,
                "variance": self.variance,
            }
        )


def default_prior(
    n_points: int = 50,
    lower: float = -2.0,
    upper: float = 2.0,
    centers: Sequence[float] = (-1.0, 1.0),
    width: float = 0.5,
) -> SourceGrid:
    """
    Equal mixture of Gaussians exp(-(phi - mu)^2 / (2 width^2)) sampled on an
    even grid and normalised.

    For a symmetric range the grid is made exactly antisymmetric so that the
    weights of phi and -phi agree bit for bit.
    """
    raw = np.linspace(lower, upper, n_points)
    phis = (raw - raw[::-1]) / 2 if math.isclose(lower, -upper) else raw
    density = sum(np.exp(-((phis - mu) ** 2) / (2 * width**2)) for mu in centers) / len(centers)
    return SourceGrid(phis, ProbabilityDistribution.normalized(density))


def delta_prior(phis: NDArray[np.float64], index: int) -> SourceGrid:
    weights = np.zeros(len(phis))
    weights[index] = 1.0
    return SourceGrid(phis, ProbabilityDistribution(weights))


def photon_wavefunction(x: NDArray[np.float64] | float, phi: NDArray[np.float64] | float) -> NDArray[np.float64]:
    return (2 * math.pi) ** -0.25 * np.exp(-((np.asarray(x) - phi) ** 2) / 4)


def hg_modes(n_modes: int, x: NDArray[np.float64] | float, sigma_h: float) -> NDArray[np.float64]:
    """
    Modes h_0..h_{n_modes-1} evaluated at x, shape (n_modes, *x.shape).

    Uses the normalised Hermite-function recurrence in u = x / (sqrt(2) sigma_h):
    psi_{q+1} = sqrt(2/(q+1)) u psi_q - sqrt(q/(q+1)) psi_{q-1}.
    """
    if not 1 <= n_modes <= MAX_MODE_INDEX + 1:
        raise ValueError(f"Mode index above the recurrence ceiling {MAX_MODE_INDEX}")
    u = np.asarray(x, dtype=np.float64) / (math.sqrt(2) * sigma_h)
    modes = np.empty((n_modes, *u.shape))
    modes[0] = math.pi**-0.25 * np.exp(-(u**2) / 2)
    if n_modes > 1:
        modes[1] = math.sqrt(2) * u * modes[0]
    for q in range(1, n_modes - 1):
        modes[q + 1] = math.sqrt(2 / (q + 1)) * u * modes[q] - math.sqrt(q / (q + 1)) * modes[q - 1]
    return modes / math.sqrt(math.sqrt(2) * sigma_h)


def hg_mode(q: int, x: NDArray[np.float64] | float, sigma_h: float) -> NDArray[np.float64]:
    """h_q(x) = (2 pi sigma_h^2)^(-1/4) (2^q q!)^(-1/2) H_q(x / (sqrt 2 sigma_h)) exp(-x^2 / (4 sigma_h^2))."""
    if not 0 <= q <= MAX_MODE_INDEX:
        raise ValueError(f"Mode index {q} outside [0, {MAX_MODE_INDEX}]")
    return hg_modes(q + 1, x, sigma_h)[q]


def mode_profile_frame(
    settings: ModeSettings,
    phis: Sequence[float],
    x_max: float = 12.0,
    n_points: int = 481,
    n_modes: int = 4,
) -> pd.DataFrame:
    """
    |h_q(x)|^2 for q < `n_modes` and psi_phi(x)^2 for each source position in
    `phis`, sampled on an even grid over [-x_max, x_max].
    """
    if n_points < 2 or x_max <= 0:
        raise ValueError("Profiles need at least two points and a positive x_max")
    x = np.linspace(-x_max, x_max, n_points)
    columns = {"x": x}
    for q, mode in enumerate(hg_modes(n_modes, x, settings.sigma_h)):
        columns[f"hg_{q}_sq"] = mode**2
    for phi in phis:
        columns[f"psi_sq_phi_{phi:g}"] = photon_wavefunction(x, phi) ** 2
    return pd.DataFrame(columns)


@lru_cache(maxsize=16)
def gauss_legendre(n_nodes: int, half_range: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Gauss-Legendre nodes and weights on [-half_range, half_range]."""
    nodes, weights = leggauss(n_nodes)
    nodes, weights = half_range * nodes, half_range * weights
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _overlap_matrix(phis: NDArray[np.float64], theta: float, settings: ModeSettings, n_nodes: int) -> NDArray[np.float64]:
    x, w = gauss_legendre(n_nodes, settings.quadrature_range)
    modes = hg_modes(settings.n_modes, x - theta, settings.sigma_h)
    photons = photon_wavefunction(x[None, :], np.asarray(phis, dtype=np.float64)[:, None])
    return (modes * w) @ photons.T


def overlap_matrix(phis: NDArray[np.float64], theta: float, settings: ModeSettings) -> NDArray[np.float64]:
    """
    c_q(phi, theta) for every grid phi, shape (n_modes, len(phis)).

    :raises QuadratureError: if doubling the node count moves any coefficient by more than 1e-8.
    """
    coarse = _overlap_matrix(phis, theta, settings, settings.quadrature_nodes)
    fine = _overlap_matrix(phis, theta, settings, 2 * settings.quadrature_nodes)
    change = float(np.max(np.abs(fine - coarse)))
    if change > QUADRATURE_TOL:
        raise QuadratureError(f"Overlap integrals at theta={theta} changed by {change:.3e} under node doubling")
    return coarse


def overlap_coefficients(phi: float, theta: float, settings: ModeSettings) -> NDArray[np.float64]:
    return overlap_matrix(np.array([phi]), theta, settings)[:, 0]


def measurement_model(theta: float, phis: NDArray[np.float64], settings: ModeSettings) -> MeasurementModel:
    """
    Likelihoods p(m | phi) = c_m(phi, theta)^2 plus the overflow outcome.

    :raises TruncationError: if any phi leaves more than 5% of its mass outside the truncated basis.
    """
    coefficients = overlap_matrix(phis, theta, settings)
    overflow = np.clip(1.0 - np.sum(coefficients**2, axis=0), 0.0, None)
    worst = float(overflow.max())
    if worst > OVERFLOW_LIMIT:
        raise TruncationError(f"Overflow mass {worst:.3e} at theta={theta} exceeds {OVERFLOW_LIMIT}", theta)
    if worst > OVERFLOW_WARNING:
        logger.warning(f"Truncation at {settings.n_modes} modes leaves {worst:.3e} overflow mass at theta={theta}")
    amplitudes = np.vstack([coefficients, np.sqrt(overflow)])
    amplitudes = amplitudes / np.linalg.norm(amplitudes, axis=0)
    amplitudes.setflags(write=False)
    overflow.setflags(write=False)
    return MeasurementModel(float(theta), amplitudes, overflow)


def build_model_bank(phis: NDArray[np.float64], thetas: Sequence[float], settings: ModeSettings) -> ModelBank:
    thetas = np.asarray(thetas, dtype=np.float64)
    logger.debug(f"Building {thetas.size} measurement models at {settings.n_modes} modes")
    return ModelBank(thetas, tuple(measurement_model(float(t), phis, settings) for t in thetas))


def hg_ensemble(prior: SourceGrid, theta: float, settings: ModeSettings) -> Ensemble:
    """Pure states with outcome-basis amplitudes (c_0..c_{N-1}, overflow) weighted by the prior."""
    model = measurement_model(theta, prior.phis, settings)
    states = tuple(PureState(model.amplitudes[:, i]).projector() for i in range(len(prior)))
    return Ensemble(tuple(prior.phis.tolist()), prior.weights, states)


def _pure_ensemble_coherence(
    amplitudes: NDArray[np.float64], column_entropies: NDArray[np.float64], weights: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Ensemble coherence and Holevo information of real pure-state ensembles in
    the outcome basis, batched over the leading (shift) axis.

    With pure states C(rho_phi) = H(p(.|phi)) and chi = S(rho_Phi), so
    C = sum_phi w H(p(.|phi)) - H(p_M) + S(rho_Phi).
    """
    average = column_entropies @ weights
    marginal = np.einsum("tmp,p->tm", amplitudes**2, weights)
    rho = np.einsum("tmp,p,tnp->tmn", amplitudes, weights, amplitudes)
    spectrum = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    chi = entr(spectrum).sum(axis=1)
    return average - entr(marginal).sum(axis=1) + chi, chi


def hg_ensemble_coherence(model: MeasurementModel, weights: ProbabilityDistribution) -> tuple[float, float]:
    """(ensemble coherence, chi) in nats for the prior `weights` measured with `model`."""
    amplitudes = model.amplitudes[None]
    coherence, chi = _pure_ensemble_coherence(amplitudes, entr(amplitudes**2).sum(axis=1), weights.weights)
    return float(coherence[0]), float(chi[0])


def bank_coherences(bank: ModelBank, grid: SourceGrid) -> NDArray[np.float64]:
    coherence, _ = _pure_ensemble_coherence(bank.amplitudes, bank.column_entropies, grid.weights.weights)
    return coherence


def shift_grid(theta_min: float, theta_max: float, step: float) -> NDArray[np.float64]:
    """Inclusive grid rounded to 10 decimals so that 0 and +-theta appear exactly."""
    return np.round(np.arange(theta_min, theta_max + step / 2, step), 10)


def coherence_vs_shift(prior: SourceGrid, thetas: Sequence[float], settings: ModeSettings) -> pd.DataFrame:
    bank = build_model_bank(prior.phis, thetas, settings)
    coherence, chi = _pure_ensemble_coherence(bank.amplitudes, bank.column_entropies, prior.weights.weights)
    logger.info(f"Coherence scan over {len(bank)} shifts: min {coherence.min():.6f}, chi {chi.mean():.6f} nats")
    return pd.DataFrame({"theta": bank.thetas, "coherence_nats": coherence, "chi_nats": chi})


def locate_optimal_shifts(curve: pd.DataFrame) -> tuple[float, float]:
    """
    (theta_opt1, theta_opt2): the two deepest positive local minima of a
    coherence-vs-shift curve, in increasing theta.
    """
    coherence = curve["coherence_nats"].to_numpy()
    thetas = curve["theta"].to_numpy()
    (minima,) = argrelextrema(coherence, np.less)
    positive = [i for i in minima if thetas[i] > 0]
    if len(positive) < 2:
        raise ValueError(f"Expected two positive local minima, found {len(positive)}")
    deepest = sorted(positive, key=lambda i: coherence[i])[:2]
    opt1, opt2 = sorted(float(thetas[i]) for i in deepest)
    logger.info(f"Optimal shifts: theta_opt1={opt1}, theta_opt2={opt2}")
    return opt1, opt2


def bayes_update(grid: SourceGrid, model: MeasurementModel, outcome: int) -> SourceGrid:
    """p(phi | m) = p(m | phi) p(phi) / p(m)."""
    if model.amplitudes.shape[1] != len(grid):
        raise ValueError(f"Model covers {model.amplitudes.shape[1]} grid points, grid has {len(grid)}")
    joint = model.cond_probs[outcome] * grid.weights.weights
    marginal = math.fsum(joint)
    if marginal <= MARGINAL_FLOOR:
        raise ImpossibleObservationError(f"Outcome {outcome} at theta={model.shift} has zero marginal probability")
    posterior = joint / marginal
    return grid.with_weights(posterior / math.fsum(posterior))


def mmse_estimate(grid: SourceGrid) -> float:
    """Posterior mean."""
    estimate = math.fsum(grid.phis * grid.weights.weights)
    return min(max(estimate, float(grid.phis[0])), float(grid.phis[-1]))


def sequence_error(grid: SourceGrid, estimate: float) -> float:
    """e = sum_phi (estimate - phi)^2 p(phi | m)."""
    return math.fsum((grid.phis - estimate) ** 2 * grid.weights.weights)


def posterior_after(prior: SourceGrid, theta: float, outcome: int, settings: ModeSettings) -> SourceGrid:
    return bayes_update(prior, measurement_model(theta, prior.phis, settings), outcome)


def choose_adaptive_shift(grid: SourceGrid, bank: ModelBank) -> int:
    """
    Index of the bank shift with minimum ensemble coherence for `grid`.

    Values within 1e-10 of the minimum tie; ties go to the smallest |theta|,
    then to negative theta.
    """
    coherence = bank_coherences(bank, grid)
    candidates = np.flatnonzero(coherence <= coherence.min() + TIE_TOL)
    return int(min(candidates, key=lambda i: (abs(bank.thetas[i]), bank.thetas[i])))


def _inverse_cdf(probabilities: NDArray[np.float64], u: float) -> int:
    index = int(np.searchsorted(np.cumsum(probabilities), u, side="right"))
    return min(index, int(np.flatnonzero(probabilities)[-1]))


def simulate_sequence(
    strategy: ShiftStrategy,
    bank: ModelBank,
    prior: SourceGrid,
    n_measurements: int,
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    """
    One simulated run: draw the true phi from the prior, then measure,
    update and record e(m) after each of `n_measurements` shots.
    """
    true_index = _inverse_cdf(prior.weights.weights, rng.random())
    posterior = prior
    errors = np.empty(n_measurements)
    for k in range(n_measurements):
        model = bank.models[strategy.choose(posterior, bank)]
        outcome = _inverse_cdf(model.cond_probs[:, true_index], rng.random())
        posterior = bayes_update(posterior, model, outcome)
        errors[k] = sequence_error(posterior, mmse_estimate(posterior))
    return errors


_sequence_context: dict = {}


def _init_sequence_worker(strategy: ShiftStrategy, bank: ModelBank, prior: SourceGrid, n_measurements: int) -> None:
    """Hands the per-strategy inputs to a worker once instead of with every task."""
    _sequence_context.update(strategy=strategy, bank=bank, prior=prior, n_measurements=n_measurements)


def _run_sequence(args: tuple[int, int]) -> NDArray[np.float64]:
    seed, index = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    ctx = _sequence_context
    return simulate_sequence(ctx["strategy"], ctx["bank"], ctx["prior"], ctx["n_measurements"], rng)


def simulate_amse(
    strategies: Sequence[ShiftStrategy],
    prior: SourceGrid,
    settings: ModeSettings,
    n_sequences: int,
    n_measurements: int,
    seed: int,
    workers: int = 1,
) -> list[AmseCurve]:
    """
    AMSE curves for each strategy.

    Sequence i of every strategy uses the random stream (seed, i), so the
    strategies see the same true phi values and the same uniform draws.
    """
    if n_sequences < 1 or n_measurements < 1:
        raise ValueError("n_sequences and n_measurements must be positive")
    curves = []
    for strategy in strategies:
        bank = build_model_bank(prior.phis, strategy.shifts(), settings)
        context = (strategy, bank, prior, n_measurements)
        tasks = [(seed, i) for i in range(n_sequences)]
        logger.info(f"Simulating {n_sequences} x {n_measurements} for strategy {strategy.label}")
        if workers > 1:
            with Pool(processes=workers, initializer=_init_sequence_worker, initargs=context) as pool:
                errors = pool.map(_run_sequence, tasks)
        else:
            _init_sequence_worker(*context)
            errors = [_run_sequence(t) for t in tasks]
        by_step = np.ascontiguousarray(np.array(errors).T)
        mean = by_step.mean(axis=1)
        variance = by_step.var(axis=1)
        logger.info(f"{strategy.label}: AMSE after {n_measurements} measurements = {mean[-1]:.6g}")
        curves.append(AmseCurve(strategy.label, mean, variance))
    return curves


def amse_frame(curves: Sequence[AmseCurve]) -> pd.DataFrame:
    return pd.concat([c.to_frame() for c in curves], ignore_index=True)
