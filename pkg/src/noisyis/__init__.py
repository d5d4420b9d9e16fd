"""Importance sampling with mean-one multiplicative weight noise.

Estimators (standard, noisy, self-normalized, SIR resampling), exact
variance accounting against a quadrature oracle, and a replicate-study
harness, all on deterministic counter-based random streams.
"""

from .backends import BACKEND
from .bench import StudyCell, StudyResult, StudySpec, SweepRow, run_study, sweep_gamma
from .errors import (
    ConfigError,
    DegenerateWeights,
    NoDensity,
    NoisyISError,
    OracleDivergence,
    SupportViolation,
)
from .estimator import (
    EstimateReport,
    VarianceBudget,
    draw_weighted,
    estimate_is,
    estimate_noisy_is,
    estimate_snis,
    sir_resample,
    snis_stats,
    variance_budget,
)
from .model import Density, Integrand, WeightedDraw, draw_batch, log_weight
from .noise import NoiseChannel, log_density, sample_noise, var_exp_z
from .oracle import (
    QuadratureSpec,
    integrate,
    oracle_discrete_snis,
    oracle_mean,
    oracle_second_moment_fw,
    oracle_sigma2,
)

__all__ = [
    "BACKEND",
    "ConfigError",
    "DegenerateWeights",
    "Density",
    "EstimateReport",
    "Integrand",
    "NoDensity",
    "NoiseChannel",
    "NoisyISError",
    "OracleDivergence",
    "QuadratureSpec",
    "StudyCell",
    "StudyResult",
    "StudySpec",
    "SupportViolation",
    "SweepRow",
    "VarianceBudget",
    "WeightedDraw",
    "draw_batch",
    "draw_weighted",
    "estimate_is",
    "estimate_noisy_is",
    "estimate_snis",
    "integrate",
    "log_density",
    "log_weight",
    "oracle_discrete_snis",
    "oracle_mean",
    "oracle_second_moment_fw",
    "oracle_sigma2",
    "run_study",
    "sample_noise",
    "sir_resample",
    "snis_stats",
    "sweep_gamma",
    "variance_budget",
]
