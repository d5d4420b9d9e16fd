"""Densities, integrands, and evaluated importance weights.

A Density is role-free: the same object can serve as target or
proposal. All weight arithmetic stays in log space; nothing here ever
exponentiates a log-weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .backends import kernels
from .errors import SupportViolation
from .rng import STREAM_X, sample_blocks

GAUSSIAN = "gaussian"
GAUSSIAN_MIXTURE = "gaussian_mixture"
UNIFORM = "uniform"

_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Density:
    """Closed family of univariate densities: gaussian, gaussian mixture, uniform.

    The family is deliberately closed so every representable problem
    admits exact moment bookkeeping downstream.
    """

    family: str
    components: tuple[tuple[float, float, float], ...] = ()  # (weight, mean, variance)
    lo: float = 0.0
    hi: float = 0.0

    @classmethod
    def gaussian(cls, mean: float, variance: float) -> "Density":
        if not variance > 0:
            raise ValueError(f"gaussian variance must be > 0, got {variance}")
        return cls(GAUSSIAN, ((1.0, float(mean), float(variance)),))

    @classmethod
    def gaussian_mixture(cls, components) -> "Density":
        comps = tuple((float(w), float(m), float(v)) for w, m, v in components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        total = 0.0
        for w, _, v in comps:
            if not 0.0 < w <= 1.0:
                raise ValueError(f"mixture weight must be in (0, 1], got {w}")
            if not v > 0:
                raise ValueError(f"mixture variance must be > 0, got {v}")
            total += w
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"mixture weights must sum to 1, got {total!r}")
        return cls(GAUSSIAN_MIXTURE, comps)

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "Density":
        lo, hi = float(lo), float(hi)
        if not hi > lo:
            raise ValueError(f"uniform needs hi > lo, got [{lo}, {hi}]")
        return cls(UNIFORM, (), lo, hi)

    # -- moments ------------------------------------------------------

    def mean(self) -> float:
        if self.family == UNIFORM:
            return 0.5 * (self.lo + self.hi)
        return sum(w * m for w, m, _ in self.components)

    def variance(self) -> float:
        if self.family == UNIFORM:
            width = self.hi - self.lo
            return width * width / 12.0
        mu = self.mean()
        return sum(w * (v + m * m) for w, m, v in self.components) - mu * mu

    def support(self) -> tuple[float, float]:
        if self.family == UNIFORM:
            return (self.lo, self.hi)
        return (-math.inf, math.inf)

    # -- evaluation ---------------------------------------------------

    def log_pdf(self, x):
        """Log-density at x (scalar or float64 array)."""
        if isinstance(x, np.ndarray):
            return self._log_pdf_array(np.ascontiguousarray(x, dtype=np.float64))
        return self._log_pdf_scalar(float(x))

    def _log_pdf_scalar(self, x: float) -> float:
        if self.family == UNIFORM:
            if self.lo <= x <= self.hi:
                return -math.log(self.hi - self.lo)
            return -math.inf
        if self.family == GAUSSIAN:
            _, m, v = self.components[0]
            d = x - m
            return -0.5 * (d * d) / v - 0.5 * math.log(2.0 * math.pi * v)
        best = -math.inf
        terms = []
        for w, m, v in self.components:
            d = x - m
            t = math.log(w) - 0.5 * (d * d) / v - 0.5 * math.log(2.0 * math.pi * v)
            terms.append(t)
            if t > best:
                best = t
        return best + math.log(sum(math.exp(t - best) for t in terms))

    def _log_pdf_array(self, x: np.ndarray) -> np.ndarray:
        if self.family == UNIFORM:
            return kernels.uniform_logpdf(x, self.lo, self.hi)
        if self.family == GAUSSIAN:
            _, m, v = self.components[0]
            return kernels.gaussian_logpdf(x, m, v)
        log_w, means, variances = self._component_arrays()
        return kernels.mixture_logpdf(x, log_w, means, variances)

    def _component_arrays(self):
        log_w = np.array([math.log(w) for w, _, _ in self.components])
        means = np.array([m for _, m, _ in self.components])
        variances = np.array([v for _, _, v in self.components])
        return log_w, means, variances

    # -- sampling -----------------------------------------------------

    def sample_fill(self, gen: np.random.Generator, m: int) -> np.ndarray:
        """Draw m values from this density using gen alone."""
        if self.family == UNIFORM:
            return self.lo + (self.hi - self.lo) * gen.random(m)
        if self.family == GAUSSIAN:
            _, mu, v = self.components[0]
            return mu + math.sqrt(v) * gen.standard_normal(m)
        weights = np.array([w for w, _, _ in self.components])
        means = np.array([mu for _, mu, _ in self.components])
        sds = np.sqrt([v for _, _, v in self.components])
        cum = np.cumsum(weights)
        # component choice first, then the normal draw: fixed consumption order
        comp = np.searchsorted(cum, gen.random(m), side="right")
        comp = np.minimum(comp, len(self.components) - 1)
        return means[comp] + sds[comp] * gen.standard_normal(m)


@dataclass(frozen=True)
class Integrand:
    """Deterministic f: real -> real from a small closed family."""

    form: str
    threshold: float = 0.0
    coeffs: tuple[float, ...] = ()
    c: float = 0.0

    @classmethod
    def identity(cls) -> "Integrand":
        return cls("identity")

    @classmethod
    def square(cls) -> "Integrand":
        return cls("square")

    @classmethod
    def indicator(cls, threshold: float) -> "Integrand":
        return cls("indicator", threshold=float(threshold))

    @classmethod
    def polynomial(cls, coeffs) -> "Integrand":
        # coeffs[i] multiplies x**i
        coeffs = tuple(float(a) for a in coeffs)
        if not coeffs:
            raise ValueError("polynomial needs at least one coefficient")
        return cls("polynomial", coeffs=coeffs)

    @classmethod
    def constant(cls, c: float) -> "Integrand":
        return cls("constant", c=float(c))

    def __call__(self, x):
        if self.form == "identity":
            return x
        if self.form == "square":
            return x * x
        if self.form == "indicator":
            if isinstance(x, np.ndarray):
                return np.where(x > self.threshold, 1.0, 0.0)
            return 1.0 if x > self.threshold else 0.0
        if self.form == "polynomial":
            acc = np.zeros_like(x) if isinstance(x, np.ndarray) else 0.0
            for a in reversed(self.coeffs):
                acc = acc * x + a
            return acc
        if isinstance(x, np.ndarray):
            return np.full(x.shape, self.c)
        return self.c


@dataclass(frozen=True)
class WeightedDraw:
    """One (x, z) record with its clean and noisy log-weight.

    log_w_noisy is defined as the float addition log_w + z; z = 0 means
    no noise channel was active.
    """

    x: float
    z: float
    log_w: float
    log_w_noisy: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "log_w_noisy", self.log_w + self.z)


def log_weight(target: Density, proposal: Density, x: float) -> float:
    """log w(x) = log target(x) - log proposal(x); never exponentiates.

    Raises SupportViolation when the proposal cannot produce x. The
    proposal must dominate the target, so target mass outside the
    proposal support is an error rather than a zero.
    """
    lq = proposal.log_pdf(x)
    if lq == -math.inf:
        lt = target.log_pdf(x)
        if lt > -math.inf:
            raise SupportViolation(
                f"proposal support does not dominate target at x={x!r}"
            )
        raise SupportViolation(f"x={x!r} lies outside the proposal support")
    return target.log_pdf(x) - lq


def log_weight_batch(target: Density, proposal: Density, xs: np.ndarray) -> np.ndarray:
    """Vectorized log-weights with the same support contract as log_weight."""
    lq = proposal.log_pdf(xs)
    bad = np.isneginf(lq)
    if bad.any():
        x_bad = xs[bad][0]
        raise SupportViolation(f"x={x_bad!r} lies outside the proposal support")
    return target.log_pdf(xs) - lq


def draw_batch(proposal: Density, n: int, seed: int) -> np.ndarray:
    """n i.i.d. draws from the proposal, a pure function of (seed, n)."""
    return sample_blocks(n, seed, STREAM_X, proposal.sample_fill)
