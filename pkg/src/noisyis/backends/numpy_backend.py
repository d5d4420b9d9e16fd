"""Pure-numpy kernels (fallback backend).

Mirrors numba_backend function for function. Reductions use the same
fixed-chunk pairwise tree, so sums are bit-identical to the jitted
backend; elementwise exp/log go through numpy's SIMD loops and may
differ from libm in the last ulp.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

CHUNK = 1024


def _tree(buf: np.ndarray) -> float:
    # buf is owned scratch, length a power of two
    p = buf.size
    while p > 1:
        p //= 2
        np.add(buf[:p], buf[p : 2 * p], out=buf[:p])
    return float(buf[0])


def _pow2_pad(a: np.ndarray) -> np.ndarray:
    p = 1
    while p < a.size:
        p *= 2
    buf = np.zeros(p, dtype=np.float64)
    buf[: a.size] = a
    return buf


def pairwise_sum(a: np.ndarray) -> float:
    """Deterministic chunked pairwise sum.

    Chunks of CHUNK elements are reduced by a zero-padded halving tree,
    then the chunk partials are reduced by the same tree. The result is a
    pure function of the input values, independent of how chunks are
    scheduled across workers.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    n = a.size
    if n == 0:
        return 0.0
    nchunks = (n + CHUNK - 1) // CHUNK
    if nchunks == 1:
        return _tree(_pow2_pad(a))
    buf = np.zeros(nchunks * CHUNK, dtype=np.float64)
    buf[:n] = a
    m = buf.reshape(nchunks, CHUNK)
    w = CHUNK
    while w > 1:
        w //= 2
        np.add(m[:, :w], m[:, w : 2 * w], out=m[:, :w])
    return _tree(_pow2_pad(np.ascontiguousarray(m[:, 0])))


def gaussian_logpdf(x: np.ndarray, mean: float, var: float) -> np.ndarray:
    c = 0.5 * np.log(2.0 * np.pi * var)
    d = x - mean
    return -0.5 * (d * d) / var - c


def mixture_logpdf(
    x: np.ndarray,
    log_w: np.ndarray,
    means: np.ndarray,
    variances: np.ndarray,
) -> np.ndarray:
    k = log_w.size
    comp = np.empty((k, x.size), dtype=np.float64)
    for j in range(k):
        comp[j] = log_w[j] + gaussian_logpdf(x, means[j], variances[j])
    m = comp.max(axis=0)
    acc = np.zeros(x.size, dtype=np.float64)
    for j in range(k):
        acc += np.exp(comp[j] - m)
    return m + np.log(acc)


def uniform_logpdf(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    inside = (x >= lo) & (x <= hi)
    return np.where(inside, -np.log(hi - lo), -np.inf)


def _kong_ess(s: float, q: float, n: int) -> float:
    # (sum w)^2 / sum w^2, clamped: Cauchy-Schwarz bounds it by n in exact
    # arithmetic but the last rounding can tip it over. All-zero weights
    # count as equal, hence ess = n.
    if q <= 0.0:
        return float(n)
    ess = s * s / q
    return float(n) if ess > n else ess


def is_core(fvals: np.ndarray, logw: np.ndarray, z: np.ndarray):
    """Unnormalized estimator core: mean of f*exp(logw+z) plus spread/ESS.

    Returns (estimate, term_var, ess) with term_var the (n-1)-divisor
    sample variance of the terms.
    """
    n = fvals.size
    lwn = logw + z
    w = np.exp(lwn)
    t = fvals * w
    est = pairwise_sum(t) / n
    dev = t - est
    term_var = pairwise_sum(dev * dev) / (n - 1)
    s = pairwise_sum(w)
    q = pairwise_sum(w * w)
    return est, term_var, _kong_ess(s, q, n)


def snis_core(fvals: np.ndarray, logw: np.ndarray):
    """Self-normalized core on noisy log-weights.

    Weights are exponentiated after subtracting the max log-weight (the
    shift cancels in every ratio). The estimate is anchored at fvals[0]
    so a constant integrand comes back exactly.

    Returns (estimate, delta_var, ess) with delta_var the delta-method
    plug-in sum(what_i^2 (f_i - est)^2).
    """
    n = fvals.size
    shift = np.max(logw)
    w = np.exp(logw - shift)
    s = pairwise_sum(w)
    anchor = fvals[0]
    est = anchor + pairwise_sum(w * (fvals - anchor)) / s
    q = w * (fvals - est)
    delta_var = pairwise_sum(q * q) / (s * s)
    wsq = pairwise_sum(w * w)
    return est, delta_var, _kong_ess(s, wsq, n)


def sir_positions(logw: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF multinomial over atoms in input order."""
    shift = np.max(logw)
    w = np.exp(logw - shift)
    cum = np.cumsum(w)
    total = cum[-1]
    idx = np.searchsorted(cum, u * total, side="right")
    return np.minimum(idx, logw.size - 1).astype(np.int64)
