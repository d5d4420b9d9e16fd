"""Numba-jitted kernels (default backend).

Loop bodies perform the same floating-point operations in the same
order as numpy_backend, and the pairwise reduction is bit-identical
across the two. Kernels are cached to disk so CLI subprocesses do not
recompile.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"

CHUNK = 1024


@njit(cache=True, nogil=True)
def _tree(buf):
    p = buf.size
    while p > 1:
        p //= 2
        for i in range(p):
            buf[i] = buf[i] + buf[i + p]
    return buf[0]


@njit(cache=True, nogil=True)
def _pow2_pad(a):
    p = 1
    while p < a.size:
        p *= 2
    buf = np.zeros(p, dtype=np.float64)
    buf[: a.size] = a
    return buf


@njit(cache=True, nogil=True)
def pairwise_sum(a):
    """Deterministic chunked pairwise sum (see numpy_backend)."""
    n = a.size
    if n == 0:
        return 0.0
    nchunks = (n + CHUNK - 1) // CHUNK
    if nchunks == 1:
        return _tree(_pow2_pad(a))
    partials = np.empty(nchunks, dtype=np.float64)
    scratch = np.empty(CHUNK, dtype=np.float64)
    for c in range(nchunks):
        lo = c * CHUNK
        hi = min(n, lo + CHUNK)
        m = hi - lo
        for i in range(m):
            scratch[i] = a[lo + i]
        for i in range(m, CHUNK):
            scratch[i] = 0.0
        w = CHUNK
        while w > 1:
            w //= 2
            for i in range(w):
                scratch[i] = scratch[i] + scratch[i + w]
        partials[c] = scratch[0]
    return _tree(_pow2_pad(partials))


@njit(cache=True, nogil=True)
def gaussian_logpdf(x, mean, var):
    c = 0.5 * np.log(2.0 * np.pi * var)
    out = np.empty(x.size, dtype=np.float64)
    for i in range(x.size):
        d = x[i] - mean
        out[i] = -0.5 * (d * d) / var - c
    return out


@njit(cache=True, nogil=True)
def mixture_logpdf(x, log_w, means, variances):
    k = log_w.size
    consts = np.empty(k, dtype=np.float64)
    for j in range(k):
        consts[j] = 0.5 * np.log(2.0 * np.pi * variances[j])
    out = np.empty(x.size, dtype=np.float64)
    comp = np.empty(k, dtype=np.float64)
    for i in range(x.size):
        m = -np.inf
        for j in range(k):
            d = x[i] - means[j]
            comp[j] = log_w[j] + (-0.5 * (d * d) / variances[j] - consts[j])
            if comp[j] > m:
                m = comp[j]
        acc = 0.0
        for j in range(k):
            acc += np.exp(comp[j] - m)
        out[i] = m + np.log(acc)
    return out


@njit(cache=True, nogil=True)
def uniform_logpdf(x, lo, hi):
    c = -np.log(hi - lo)
    out = np.empty(x.size, dtype=np.float64)
    for i in range(x.size):
        out[i] = c if (x[i] >= lo) and (x[i] <= hi) else -np.inf
    return out


@njit(cache=True, nogil=True)
def _kong_ess(s, q, n):
    if q <= 0.0:
        return float(n)
    ess = s * s / q
    return float(n) if ess > n else ess


@njit(cache=True, nogil=True)
def is_core(fvals, logw, z):
    """Unnormalized estimator core (see numpy_backend.is_core)."""
    n = fvals.size
    w = np.empty(n, dtype=np.float64)
    t = np.empty(n, dtype=np.float64)
    for i in range(n):
        w[i] = np.exp(logw[i] + z[i])
        t[i] = fvals[i] * w[i]
    est = pairwise_sum(t) / n
    dev = np.empty(n, dtype=np.float64)
    for i in range(n):
        d = t[i] - est
        dev[i] = d * d
    term_var = pairwise_sum(dev) / (n - 1)
    wsq = np.empty(n, dtype=np.float64)
    for i in range(n):
        wsq[i] = w[i] * w[i]
    s = pairwise_sum(w)
    q = pairwise_sum(wsq)
    return est, term_var, _kong_ess(s, q, n)


@njit(cache=True, nogil=True)
def snis_core(fvals, logw):
    """Self-normalized core (see numpy_backend.snis_core)."""
    n = fvals.size
    shift = np.max(logw)
    w = np.empty(n, dtype=np.float64)
    for i in range(n):
        w[i] = np.exp(logw[i] - shift)
    s = pairwise_sum(w)
    anchor = fvals[0]
    num = np.empty(n, dtype=np.float64)
    for i in range(n):
        num[i] = w[i] * (fvals[i] - anchor)
    est = anchor + pairwise_sum(num) / s
    q = np.empty(n, dtype=np.float64)
    for i in range(n):
        qi = w[i] * (fvals[i] - est)
        q[i] = qi * qi
    delta_var = pairwise_sum(q) / (s * s)
    wsq = np.empty(n, dtype=np.float64)
    for i in range(n):
        wsq[i] = w[i] * w[i]
    return est, delta_var, _kong_ess(s, pairwise_sum(wsq), n)


@njit(cache=True, nogil=True)
def sir_positions(logw, u):
    """Inverse-CDF multinomial over atoms in input order."""
    n = logw.size
    shift = np.max(logw)
    cum = np.empty(n, dtype=np.float64)
    acc = 0.0
    for i in range(n):
        acc += np.exp(logw[i] - shift)
        cum[i] = acc
    total = cum[n - 1]
    idx = np.searchsorted(cum, u * total, side="right")
    out = np.empty(u.size, dtype=np.int64)
    for i in range(u.size):
        out[i] = idx[i] if idx[i] < n else n - 1
    return out
