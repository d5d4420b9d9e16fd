"""The four estimators plus variance accounting.

estimate_is / estimate_noisy_is average f(x) w(x) exp(z) without any
shift (shifting would change the estimate; supported problems keep
|log w + z| well under 700). The self-normalized path max-shifts the
log-weights because the shift cancels in the ratio. The report's
estimator_kind names the effective estimator, so an identity channel
yields a report indistinguishable from the clean run, field for field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from . import noise as noise_mod
from . import oracle as oracle_mod
from .backends import kernels
from .errors import DegenerateWeights, SupportViolation
from .model import Density, Integrand, WeightedDraw, draw_batch, log_weight_batch
from .noise import NoiseChannel
from .rng import STREAM_RESAMPLE, sample_blocks

KIND_IS = "is"
KIND_NOISY_IS = "noisy_is"
KIND_SNIS = "snis"
KIND_NOISY_SNIS = "noisy_snis"


@dataclass(frozen=True)
class EstimateReport:
    estimate: float
    std_error: float
    ci_lo: float
    ci_hi: float
    ess: float
    n: int
    estimator_kind: str


@dataclass(frozen=True)
class VarianceBudget:
    """The exact decomposition sigma2_bar = sigma2 + var_exp_z * second_moment_fw."""

    sigma2: float
    var_exp_z: float
    second_moment_fw: float
    sigma2_bar: float

    @classmethod
    def from_components(
        cls, sigma2: float, var_exp_z: float, second_moment_fw: float
    ) -> "VarianceBudget":
        return cls(sigma2, var_exp_z, second_moment_fw, sigma2 + var_exp_z * second_moment_fw)


def _z_quantile(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return NormalDist().inv_cdf(1.0 - alpha / 2.0)


def _require_dominates(target: Density, proposal: Density) -> None:
    # exact within the closed family: support containment is dominance
    t_lo, t_hi = target.support()
    p_lo, p_hi = proposal.support()
    if t_lo < p_lo or t_hi > p_hi:
        raise SupportViolation(
            f"proposal support [{p_lo}, {p_hi}] does not dominate "
            f"target support [{t_lo}, {t_hi}]"
        )


def _prepare(target, proposal, f, channel, n, seed):
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    _require_dominates(target, proposal)
    x = draw_batch(proposal, n, seed)
    logw = log_weight_batch(target, proposal, x)
    z = noise_mod.sample_noise(channel, n, seed)
    fvals = np.ascontiguousarray(f(x), dtype=np.float64)
    return x, logw, z, fvals


def estimate_is(
    target: Density,
    proposal: Density,
    f: Integrand,
    n: int,
    seed: int,
    alpha: float = 0.05,
) -> EstimateReport:
    """Standard importance sampling: mean of f(x_i) w(x_i) with a CLT interval."""
    return estimate_noisy_is(target, proposal, f, NoiseChannel.identity(), n, seed, alpha)


def estimate_noisy_is(
    target: Density,
    proposal: Density,
    f: Integrand,
    channel: NoiseChannel,
    n: int,
    seed: int,
    alpha: float = 0.05,
) -> EstimateReport:
    """Noisy importance sampling: mean of f(x_i) w(x_i) exp(z_i).

    The x stream is independent of the noise stream, so on a fixed seed
    the identity channel reproduces estimate_is bit for bit.
    """
    _, logw, z, fvals = _prepare(target, proposal, f, channel, n, seed)
    est, term_var, ess = kernels.is_core(fvals, logw, z)
    se = math.sqrt(term_var / n)
    zq = _z_quantile(alpha)
    kind = KIND_IS if channel.is_identity else KIND_NOISY_IS
    return EstimateReport(est, se, est - zq * se, est + zq * se, ess, n, kind)


def snis_stats(log_weights: np.ndarray, f_values: np.ndarray):
    """Self-normalized statistics from explicit (noisy) log-weights.

    Returns (estimate, std_error, ess). Invariant under adding any
    constant to all log-weights: every quantity depends on the
    log-weights only through their differences from the max.
    """
    log_weights = np.ascontiguousarray(log_weights, dtype=np.float64)
    f_values = np.ascontiguousarray(f_values, dtype=np.float64)
    if log_weights.size == 0:
        raise ValueError("need at least one draw")
    shift = float(np.max(log_weights))
    if shift == -math.inf or math.isnan(shift):
        raise DegenerateWeights("all log-weights are -inf")
    est, delta_var, ess = kernels.snis_core(f_values, log_weights)
    return est, math.sqrt(delta_var), ess


def estimate_snis(
    target: Density,
    proposal: Density,
    f: Integrand,
    channel: NoiseChannel,
    n: int,
    seed: int,
    alpha: float = 0.05,
) -> EstimateReport:
    """Self-normalized IS: sum(w f)/sum(w) on (noisy) weights.

    The standard error is the delta-method plug-in sqrt(sum what^2
    (f - est)^2); it is reported as an approximation, not an exact
    finite-sample quantity.
    """
    _, logw, z, fvals = _prepare(target, proposal, f, channel, n, seed)
    est, se, ess = snis_stats(logw + z, fvals)
    zq = _z_quantile(alpha)
    kind = KIND_SNIS if channel.is_identity else KIND_NOISY_SNIS
    return EstimateReport(est, se, est - zq * se, est + zq * se, ess, n, kind)


def draw_weighted(
    target: Density,
    proposal: Density,
    channel: NoiseChannel,
    n: int,
    seed: int,
) -> list[WeightedDraw]:
    """Materialize per-draw records (x, z, log_w) for resampling workflows."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    _require_dominates(target, proposal)
    x = draw_batch(proposal, n, seed)
    logw = log_weight_batch(target, proposal, x)
    z = noise_mod.sample_noise(channel, n, seed)
    return [WeightedDraw(float(xi), float(zi), float(lwi)) for xi, zi, lwi in zip(x, z, logw)]


def sir_resample(draws, m: int, seed: int) -> np.ndarray:
    """Sampling importance resampling: m draws with replacement from the
    weighted atoms, probabilities proportional to exp(log_w_noisy).

    Inverse-CDF multinomial over atoms in input order; deterministic
    given the seed.
    """
    draws = list(draws)
    if not draws:
        raise ValueError("draws must be nonempty")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    logw = np.array([d.log_w_noisy for d in draws], dtype=np.float64)
    shift = float(np.max(logw))
    if shift == -math.inf or math.isnan(shift):
        raise DegenerateWeights("all log-weights are -inf")
    xs = np.array([d.x for d in draws], dtype=np.float64)
    u = sample_blocks(m, seed, STREAM_RESAMPLE, lambda gen, k: gen.random(k))
    return xs[kernels.sir_positions(logw, u)]


def variance_budget(
    target: Density,
    proposal: Density,
    f: Integrand,
    channel: NoiseChannel,
) -> VarianceBudget:
    """Oracle-backed variance decomposition for one problem/channel pair."""
    sigma2 = oracle_mod.oracle_sigma2(target, proposal, f)
    m2 = oracle_mod.oracle_second_moment_fw(target, proposal, f)
    return VarianceBudget.from_components(sigma2, noise_mod.var_exp_z(channel), m2)
