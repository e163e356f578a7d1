"""
types_custom.py

`TypedDict` shapes for the configuration sections and for the scalar reports
written as JSON. They document the nested dictionaries the loader produces
and let static checkers follow them.
"""

from typing import List, TypedDict, Union


class OutputConfig(TypedDict):
    directory: str
    log_base: str


class CxiVerifyConfig(TypedDict):
    trials: int
    max_dim: int
    max_states: int
    povm_max_dim: int
    povm_max_outcomes: int
    seed: int | None
    self_test: bool


class LandscapeConfig(TypedDict):
    n_polar: int
    n_azimuth: int


class BlochConfig(TypedDict):
    thetas_over_pi: List[float]
    landscape: LandscapeConfig
    report_points: int
    workers: int


class PriorConfig(TypedDict):
    n_points: int
    lower: float
    upper: float
    centers: List[float]
    width: float


class ModesConfig(TypedDict):
    sigma_h: float
    n_modes: int
    quadrature_nodes: int
    quadrature_range: float


class ProfilesConfig(TypedDict):
    x_max: float
    n_points: int
    n_modes: int
    phis: List[float]


class CoherenceScanConfig(TypedDict):
    theta_min: float
    theta_max: float
    theta_step: float


class PosteriorConfig(TypedDict):
    theta: Union[float, str]
    outcome: int


class AdaptiveConfig(TypedDict):
    bound: float
    step: float


class StrategyConfig(TypedDict, total=False):
    name: str
    theta: Union[float, str]
    label: str


class SimulationConfig(TypedDict):
    n_sequences: int
    n_measurements: int
    seed: int | None
    workers: int
    adaptive: AdaptiveConfig
    strategies: List[StrategyConfig]


class HgConfig(TypedDict):
    prior: PriorConfig
    modes: ModesConfig
    profiles: ProfilesConfig
    coherence: CoherenceScanConfig
    posterior: PosteriorConfig
    simulation: SimulationConfig


class Config(TypedDict):
    output: OutputConfig
    cxi_verify: CxiVerifyConfig
    bloch: BlochConfig
    hg: HgConfig


class CxiVerifyReport(TypedDict):
    trials: int
    povm_trials: int
    failures: int
    failed_seeds: List[List[int]]
    max_projective_residual: float
    max_povm_residual: float
    max_isometry_residual: float
    max_statistics_residual: float
    tolerance: float
    passed: bool


class BlochSummary(TypedDict):
    theta: float
    chi: float
    argmin_polar: float
    argmin_azimuth: float
    argmin_axis_offset: float
    numeric_helstrom_angle: float
    helstrom_success: float
    usd_success: float
    usd_inconclusive: float


class HgSummary(TypedDict, total=False):
    theta_opt1: float
    theta_opt2: float
    coherence_at_zero: float
    chi: float
    final_amse: dict[str, float]
