"""Mean-one multiplicative noise channels on log-weights.

A channel g(z) must satisfy E_g[exp(Z)] = 1 so that multiplying weights
by exp(Z) leaves estimators unbiased. The lognormal family centers a
Gaussian at -gamma^2/2; the two-point family is the minimal discrete
law with the same property and guards the variance bookkeeping against
lognormal-only shortcuts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoDensity
from .rng import STREAM_NOISE, sample_blocks

IDENTITY = "identity"
LOGNORMAL = "lognormal"
TWO_POINT = "two_point"

_MEAN_ONE_TOL = 1e-12


@dataclass(frozen=True)
class NoiseChannel:
    family: str
    gamma: float = 0.0
    a: float = 1.0
    b: float = 1.0
    p: float = 0.5

    @classmethod
    def identity(cls) -> "NoiseChannel":
        return cls(IDENTITY)

    @classmethod
    def lognormal(cls, gamma: float) -> "NoiseChannel":
        gamma = float(gamma)
        if gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {gamma}")
        return cls(LOGNORMAL, gamma=gamma)

    @classmethod
    def two_point(cls, a: float, b: float, p: float) -> "NoiseChannel":
        a, b, p = float(a), float(b), float(p)
        if a <= 0 or b <= 0:
            raise ValueError(f"two_point atoms must be > 0, got a={a}, b={b}")
        if not 0.0 < p < 1.0:
            raise ValueError(f"two_point p must be in (0, 1), got {p}")
        mean = p * a + (1.0 - p) * b
        if abs(mean - 1.0) > _MEAN_ONE_TOL:
            raise ValueError(
                f"two_point violates the mean-one constraint: p*a+(1-p)*b = {mean!r}"
            )
        return cls(TWO_POINT, a=a, b=b, p=p)

    @property
    def is_identity(self) -> bool:
        """True when Z is identically 0 (exp(Z) = 1 surely)."""
        if self.family == IDENTITY:
            return True
        if self.family == LOGNORMAL:
            return self.gamma == 0.0
        return self.a == 1.0 and self.b == 1.0


def var_exp_z(channel: NoiseChannel) -> float:
    """Exact var_g[exp(Z)]: the coefficient of the variance inflation term."""
    if channel.family == LOGNORMAL:
        return math.exp(channel.gamma * channel.gamma) - 1.0
    if channel.family == TWO_POINT:
        p, a, b = channel.p, channel.a, channel.b
        return p * a * a + (1.0 - p) * b * b - 1.0
    return 0.0


def log_density(channel: NoiseChannel, z):
    """log g(z); scalar or array.

    Identity and lognormal(gamma=0) have no density (Z is a point mass
    at 0) and raise NoDensity.
    """
    if channel.is_identity:
        raise NoDensity(f"channel {channel.family} has no density to evaluate")
    if channel.family == LOGNORMAL:
        g2 = channel.gamma * channel.gamma
        mean, var = -0.5 * g2, g2
        if isinstance(z, np.ndarray):
            d = z - mean
            return -0.5 * (d * d) / var - 0.5 * np.log(2.0 * np.pi * var)
        d = float(z) - mean
        return -0.5 * (d * d) / var - 0.5 * math.log(2.0 * math.pi * var)
    la, lb = math.log(channel.a), math.log(channel.b)
    lp, lq = math.log(channel.p), math.log1p(-channel.p)
    if isinstance(z, np.ndarray):
        out = np.full(z.shape, -np.inf)
        out[z == la] = lp
        out[z == lb] = lq
        return out
    if z == la:
        return lp
    if z == lb:
        return lq
    return -math.inf


def sample_noise(channel: NoiseChannel, n: int, seed: int) -> np.ndarray:
    """n i.i.d. draws of Z from g, on the noise stream of `seed`.

    Degenerate channels return zeros without touching the generator, so
    noisy and clean runs on one seed consume identical randomness.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if channel.is_identity:
        return np.zeros(n, dtype=np.float64)
    if channel.family == LOGNORMAL:
        gamma = channel.gamma
        loc = -0.5 * gamma * gamma

        def fill(gen, m):
            return loc + gamma * gen.standard_normal(m)

    else:
        la, lb, p = math.log(channel.a), math.log(channel.b), channel.p

        def fill(gen, m):
            return np.where(gen.random(m) < p, la, lb)

    return sample_blocks(n, seed, STREAM_NOISE, fill)
