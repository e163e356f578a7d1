import logging
import math
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.utils.config_loader import ConfigLoader
from src.utils.discrimination import (
    DiscriminationProblem,
    axis_angle,
    coherence_landscape,
    coherence_vs_theta_report,
    great_circle_direction,
    helstrom_axis_angle,
    landscape_argmin,
    landscape_frame,
    numeric_helstrom_angle,
    projective_success_probability,
    usd_inconclusive_probability,
    usd_success_probability,
)
from src.utils.exceptions import InvariantViolationError
from src.utils.hgmetrology import (
    ModeSettings,
    SourceGrid,
    amse_frame,
    coherence_vs_shift,
    default_prior,
    locate_optimal_shifts,
    mode_profile_frame,
    posterior_after,
    shift_grid,
    simulate_amse,
)
from src.utils.infotheory import Ensemble, cxi_residual, holevo_information
from src.utils.povm import (
    Povm,
    dilated_probabilities,
    isometry_residual,
    naimark_dilate,
    povm_cxi_residual,
    povm_probabilities,
    random_povm,
)
from src.utils.qmath import ProbabilityDistribution, random_density_matrix, random_projective_measurement
from src.utils.reporting import write_reports
from src.utils.types_custom import BlochSummary, Config, CxiVerifyReport, HgConfig, HgSummary
from src.utils.units import in_log_base, to_log_base, value_in_log_base

logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")

CXI_TOL = 1e-9


def _trial_rng(seed: int, *index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *index]))


def _random_ensemble(dim: int, n_states: int, rng: np.random.Generator) -> Ensemble:
    prior = ProbabilityDistribution.normalized(rng.dirichlet(np.ones(n_states)))
    states = tuple(random_density_matrix(dim, rng) for _ in range(n_states))
    return Ensemble(tuple(range(n_states)), prior, states)


def _corrupt(povm: Povm) -> Povm:
    """Scales every Kraus operator by 1.1; used only by the self-test."""
    return Povm(tuple(1.1 * m for m in povm.kraus), check=False)


def run_cxi_verify(config: Config, seed: int) -> CxiVerifyReport:
    """
    Randomised check of C = chi - I for projective measurements and POVMs.

    Trial i of each family draws from the stream (seed, family, i). A trial
    that raises is counted as a failure and its (seed, family, i) recorded.

    :param config: The configuration dictionary.
    :param seed: Master seed.
    :return: The report, also written as `cxi_verify.json`.
    """
    cfg = config["cxi_verify"]
    trials: int = cfg["trials"]
    failed: list[list[int]] = []
    projective_max = povm_max = isometry_max = statistics_max = 0.0

    for trial in range(trials):
        rng = _trial_rng(seed, 0, trial)
        try:
            dim = int(rng.integers(2, cfg["max_dim"] + 1))
            ensemble = _random_ensemble(dim, int(rng.integers(2, cfg["max_states"] + 1)), rng)
            residual = abs(cxi_residual(ensemble, random_projective_measurement(dim, rng)))
        except Exception as e:
            logging.error(f"Projective trial {trial} (seed {seed}) raised: {e}")
            failed.append([seed, 0, trial])
            continue
        projective_max = max(projective_max, residual)
        if residual >= CXI_TOL:
            failed.append([seed, 0, trial])

    for trial in range(trials):
        rng = _trial_rng(seed, 1, trial)
        try:
            dim = int(rng.integers(2, cfg["povm_max_dim"] + 1))
            ensemble = _random_ensemble(dim, int(rng.integers(2, cfg["max_states"] + 1)), rng)
            n_outcomes = int(rng.integers(max(2, dim), max(cfg["povm_max_outcomes"], dim) + 1))
            povm = random_povm(dim, n_outcomes, rng)
            if cfg["self_test"] and trial == 0:
                logging.warning("Self-test: injecting a POVM that violates completeness")
                povm = _corrupt(povm)
            dilation = naimark_dilate(povm)
            residuals = (
                abs(povm_cxi_residual(ensemble, povm)),
                isometry_residual(dilation),
                max(
                    float(np.max(np.abs(povm_probabilities(s, povm).weights - dilated_probabilities(s, dilation).weights)))
                    for s in ensemble.states
                ),
            )
        except Exception as e:
            logging.error(f"POVM trial {trial} (seed {seed}) raised: {e}")
            failed.append([seed, 1, trial])
            continue
        povm_max = max(povm_max, residuals[0])
        isometry_max = max(isometry_max, residuals[1])
        statistics_max = max(statistics_max, residuals[2])
        if max(residuals) >= CXI_TOL:
            failed.append([seed, 1, trial])

    report: CxiVerifyReport = {
        "trials": trials,
        "povm_trials": trials,
        "failures": len(failed),
        "failed_seeds": failed,
        "max_projective_residual": projective_max,
        "max_povm_residual": povm_max,
        "max_isometry_residual": isometry_max,
        "max_statistics_residual": statistics_max,
        "tolerance": CXI_TOL,
        "passed": not failed,
    }
    logging.info(
        f"CXI verification: {trials} projective + {trials} POVM trials, {len(failed)} failures, "
        f"max residuals {projective_max:.3e} / {povm_max:.3e}"
    )
    write_reports({}, {"cxi_verify": report}, config)
    return report


def check_cxi_report(report: CxiVerifyReport) -> None:
    """
    :raises InvariantViolationError: if the report records any failure.
    """
    if not report["passed"]:
        raise InvariantViolationError(
            f"{report['failures']} CXI trials failed (tolerance {report['tolerance']:g}); "
            f"offending (seed, family, trial): {report['failed_seeds']}"
        )


def _theta_label(theta_over_pi: float) -> str:
    return f"{theta_over_pi:g}pi"


def run_bloch(config: Config) -> list[BlochSummary]:
    """
    Landscapes for each configured theta plus the projective/USD comparison table.

    :param config: The configuration dictionary.
    :return: One summary per theta, also written as `bloch_summary.json`.
    """
    cfg = config["bloch"]
    log_base: str = config["output"]["log_base"]
    grid = (cfg["landscape"]["n_polar"], cfg["landscape"]["n_azimuth"])
    landscape_table = in_log_base(log_base, ["coherence_nats"])(landscape_frame)
    comparison_table = in_log_base(log_base, ["chi_nats"])(coherence_vs_theta_report)

    tables: dict[str, pd.DataFrame] = {}
    summaries: list[BlochSummary] = []
    for theta_over_pi in cfg["thetas_over_pi"]:
        problem = DiscriminationProblem(theta_over_pi * math.pi)
        logging.info(f"Processing theta = {_theta_label(theta_over_pi)}")
        samples = coherence_landscape(problem, grid, workers=cfg["workers"])
        tables[f"landscape_{_theta_label(theta_over_pi)}"] = landscape_table(samples)

        best = landscape_argmin(samples)
        analytic = great_circle_direction(helstrom_axis_angle(problem.theta))
        chi = holevo_information(problem.ensemble())
        summary: BlochSummary = {
            "theta": problem.theta,
            "chi": value_in_log_base(chi, log_base),
            "argmin_polar": best.direction.polar,
            "argmin_azimuth": best.direction.azimuth,
            "argmin_axis_offset": axis_angle(best.direction, analytic),
            "numeric_helstrom_angle": numeric_helstrom_angle(problem.theta),
            "helstrom_success": projective_success_probability(problem.theta),
            "usd_success": usd_success_probability(problem.theta) if problem.theta > 0 else 0.5,
            "usd_inconclusive": usd_inconclusive_probability(problem.theta) if problem.theta > 0 else 1.0,
        }
        logging.info(f"theta={_theta_label(theta_over_pi)}: chi={summary['chi']:.6f} {log_base}, "
                     f"argmin offset {math.degrees(summary['argmin_axis_offset']):.3f} deg")
        summaries.append(summary)

    n = cfg["report_points"]
    tables["coherence_vs_theta"] = comparison_table(math.pi * np.arange(1, n + 1) / n)
    write_reports(tables, {"bloch_summary": {"log_base": log_base, "thetas": summaries}}, config)
    return summaries


def _mode_settings(hg: HgConfig) -> ModeSettings:
    return ModeSettings(**hg["modes"])


def resolve_shift(value: Union[float, str], optima: Optional[Tuple[float, float]]) -> float:
    """
    Maps the symbolic shifts "opt1"/"opt2" to the located optima; numbers pass through.

    :raises ValueError: for any other string, or a symbolic shift with no optima supplied.
    """
    if isinstance(value, str):
        if value not in ("opt1", "opt2"):
            raise ValueError(f"Unknown symbolic shift: {value}")
        if optima is None:
            raise ValueError(f"Shift {value} needs the optimal shifts of the prior coherence curve")
        return optima[0] if value == "opt1" else optima[1]
    return float(value)


def _needs_optima(hg: HgConfig) -> bool:
    shifts = [s.get("theta") for s in hg["simulation"]["strategies"]] + [hg["posterior"]["theta"]]
    return any(isinstance(s, str) for s in shifts)


def _prior(hg: HgConfig) -> SourceGrid:
    return default_prior(**hg["prior"])


def _scan_thetas(hg: HgConfig) -> np.ndarray:
    scan = hg["coherence"]
    return shift_grid(scan["theta_min"], scan["theta_max"], scan["theta_step"])


def run_hg_coherence(config: Config) -> HgSummary:
    """
    Prior and posterior tables and their coherence-vs-shift curves.

    :param config: The configuration dictionary.
    :return: Located optima and the coherence/chi at theta = 0.
    """
    hg = config["hg"]
    log_base: str = config["output"]["log_base"]
    settings = _mode_settings(hg)
    prior = _prior(hg)
    thetas = _scan_thetas(hg)

    curve = coherence_vs_shift(prior, thetas, settings)
    optima = locate_optimal_shifts(curve)
    post_theta = resolve_shift(hg["posterior"]["theta"], optima)
    posterior = posterior_after(prior, post_theta, hg["posterior"]["outcome"], settings)
    logging.info(f"Posterior after outcome {hg['posterior']['outcome']} at theta={post_theta}")
    post_curve = coherence_vs_shift(posterior, thetas, settings)

    at_zero = curve.iloc[int(np.argmin(np.abs(curve["theta"].to_numpy())))]
    entropy_columns = ["coherence_nats", "chi_nats"]
    tables = {
        "prior": prior.to_frame(),
        "posterior": posterior.to_frame(),
        "mode_profiles": mode_profile_frame(settings, **hg["profiles"]),
        "coherence_prior": to_log_base(curve, log_base, entropy_columns),
        "coherence_posterior": to_log_base(post_curve, log_base, entropy_columns),
    }
    summary: HgSummary = {
        "theta_opt1": optima[0],
        "theta_opt2": optima[1],
        "coherence_at_zero": value_in_log_base(float(at_zero["coherence_nats"]), log_base),
        "chi": value_in_log_base(float(at_zero["chi_nats"]), log_base),
    }
    write_reports(tables, {"hg_coherence": {"log_base": log_base, **summary}}, config)
    return summary


def build_strategies(loader: ConfigLoader, optima: Optional[Tuple[float, float]]) -> list:
    """
    Instantiates the configured strategies, resolving symbolic shifts.

    :param loader: The config loader instance.
    :param optima: (theta_opt1, theta_opt2), or None when no strategy needs them.
    """
    sim = loader.settings["hg"]["simulation"]
    strategies = []
    for entry in sim["strategies"]:
        kwargs = {}
        if "label" in entry:
            kwargs["label"] = entry["label"]
        if entry["name"] == "AdaptiveShiftStrategy":
            kwargs.update(bound=sim["adaptive"]["bound"], step=sim["adaptive"]["step"])
        else:
            kwargs["theta"] = resolve_shift(entry["theta"], optima)
        strategies.append(loader.get_strategy_instance(entry["name"], **kwargs))
    return strategies


def run_hg_simulate(
    config: Config, loader: ConfigLoader, seed: int, optima: Optional[Tuple[float, float]] = None
) -> dict[str, float]:
    """
    Monte-Carlo AMSE curves for every configured strategy.

    :param config: The configuration dictionary.
    :param loader: The config loader instance.
    :param seed: Master seed.
    :param optima: Precomputed optimal shifts; located from the prior curve when needed and absent.
    :return: AMSE after the last measurement, per strategy label.
    """
    hg = config["hg"]
    sim = hg["simulation"]
    settings = _mode_settings(hg)
    prior = _prior(hg)
    if optima is None and _needs_optima(hg):
        optima = locate_optimal_shifts(coherence_vs_shift(prior, _scan_thetas(hg), settings))

    strategies = build_strategies(loader, optima)
    curves = simulate_amse(
        strategies, prior, settings, sim["n_sequences"], sim["n_measurements"], seed, workers=sim["workers"]
    )
    final = {c.strategy: float(c.mean[-1]) for c in curves}
    report = {"seed": seed, "n_sequences": sim["n_sequences"], "n_measurements": sim["n_measurements"],
              "final_amse": final}
    write_reports({"amse": amse_frame(curves)}, {"hg_simulation": report}, config)
    return final


def run_hg(config: Config, loader: ConfigLoader, seed: int) -> HgSummary:
    """
    Coherence scan followed by the simulation, sharing the located optima.
    """
    summary = run_hg_coherence(config)
    optima = (summary["theta_opt1"], summary["theta_opt2"])
    summary["final_amse"] = run_hg_simulate(config, loader, seed, optima)
    return summary