"""Deterministic ground truth for every moment the estimators reference.

Moments are computed by adaptive quadrature (QUADPACK via scipy) over
finite bounds wide enough that the truncated tail mass is far below the
error tolerance: k standard deviations per gaussian component (k = 12
by default), exact bounds for uniforms, and effective-decay widths for
squared-weight integrands. Discrete references use exactly-rounded
accumulation (math.fsum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate as _scipy_integrate

from .errors import DegenerateWeights, OracleDivergence
from .model import Density, Integrand, UNIFORM

_ABS_FLOOR = 1e-12
DEFAULT_K_SD = 12.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Bounds and error contract for one adaptive integration."""

    lo: float
    hi: float
    rel_tol: float = 1e-10
    max_subdivisions: int = 2**16

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")


def integrate(fn, spec: QuadratureSpec, break_points=()) -> float:
    """Integrate fn over spec's bounds, honoring its error contract.

    Raises OracleDivergence if quadrature fails to converge or the
    reported error exceeds rel_tol * |result| (with a small absolute
    floor so zero-valued integrals remain representable).
    """
    pts = sorted(p for p in break_points if spec.lo < p < spec.hi)
    result = _scipy_integrate.quad(
        fn,
        spec.lo,
        spec.hi,
        epsabs=_ABS_FLOOR,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        points=pts if pts else None,
        full_output=1,
    )
    if len(result) == 4:
        raise OracleDivergence(f"quadrature did not converge: {result[3]}")
    value, err, _ = result
    if err > max(spec.rel_tol * abs(value), _ABS_FLOOR):
        raise OracleDivergence(
            f"quadrature error {err!r} exceeds tolerance for result {value!r}"
        )
    return value


def _plain_bounds(density: Density, k_sd: float) -> tuple[float, float]:
    if density.family == UNIFORM:
        return density.lo, density.hi
    los = [m - k_sd * math.sqrt(v) for _, m, v in density.components]
    his = [m + k_sd * math.sqrt(v) for _, m, v in density.components]
    return min(los), max(his)


def _require_weight_integrable(target: Density, proposal: Density) -> None:
    t_lo, t_hi = target.support()
    p_lo, p_hi = proposal.support()
    if t_lo < p_lo or t_hi > p_hi:
        raise OracleDivergence(
            "proposal support does not cover the target; squared weights diverge"
        )
    if target.family == UNIFORM or proposal.family == UNIFORM:
        return  # compact target support, integrand bounded
    v_qmax = max(v for _, _, v in proposal.components)
    for _, _, v_c in target.components:
        if 2.0 / v_c - 1.0 / v_qmax <= 0.0:
            raise OracleDivergence(
                "squared weights not integrable: widest proposal component "
                f"variance {v_qmax} must exceed half the target component "
                f"variance {v_c}"
            )


def _weight_bounds(
    target: Density, proposal: Density, k_sd: float
) -> tuple[tuple[float, float], list[float]]:
    """Bounds and break points for integrands proportional to pi^2/q."""
    if target.family == UNIFORM:
        return (target.lo, target.hi), []
    # both gaussian-family: the integrand decays at the rate of
    # pi^2/q_widest around analytically known centers
    _, mu_q, v_q = max(proposal.components, key=lambda c: c[2])
    lo, hi = _plain_bounds(target, k_sd)
    points = [m for _, m, _ in target.components]
    for _, mu_c, v_c in target.components:
        a = 1.0 / v_c - 1.0 / (2.0 * v_q)
        b = mu_c / v_c - mu_q / (2.0 * v_q)
        center = b / a
        sd_eff = math.sqrt(1.0 / (2.0 * a))
        lo = min(lo, center - k_sd * sd_eff)
        hi = max(hi, center + k_sd * sd_eff)
        points.append(center)
    return (lo, hi), points


def oracle_mean(
    target: Density,
    f: Integrand,
    spec: QuadratureSpec | None = None,
    k_sd: float = DEFAULT_K_SD,
) -> float:
    """E_target[f(X)] by quadrature."""
    if spec is None:
        lo, hi = _plain_bounds(target, k_sd)
        spec = QuadratureSpec(lo, hi)
    points = [m for _, m, _ in target.components]
    if f.form == "indicator":
        points.append(f.threshold)
    return integrate(lambda x: f(x) * math.exp(target.log_pdf(x)), spec, points)


def oracle_second_moment_fw(
    target: Density,
    proposal: Density,
    f: Integrand,
    spec: QuadratureSpec | None = None,
    k_sd: float = DEFAULT_K_SD,
) -> float:
    """E_proposal[(f(X) w(X))^2] = integral of f^2 pi^2 / q."""
    _require_weight_integrable(target, proposal)
    if spec is None:
        (lo, hi), points = _weight_bounds(target, proposal, k_sd)
        spec = QuadratureSpec(lo, hi)
    else:
        points = [m for _, m, _ in target.components]
    if f.form == "indicator":
        points = points + [f.threshold]

    def integrand(x: float) -> float:
        fx = f(x)
        return fx * fx * math.exp(2.0 * target.log_pdf(x) - proposal.log_pdf(x))

    return integrate(integrand, spec, points)


def oracle_sigma2(
    target: Density,
    proposal: Density,
    f: Integrand,
    k_sd: float = DEFAULT_K_SD,
) -> float:
    """var_proposal[f(X) w(X)]: second moment minus squared target mean."""
    m2 = oracle_second_moment_fw(target, proposal, f, k_sd=k_sd)
    mu = oracle_mean(target, f, k_sd=k_sd)
    return m2 - mu * mu


def oracle_discrete_snis(atoms, f: Integrand) -> float:
    """Softmax-weighted mean over an explicit finite support.

    Exhaustive reference for the self-normalized estimator: weights are
    softmaxed after a max-shift and accumulated with math.fsum, so the
    only rounding left is one exp per atom and the final division.
    """
    atoms = list(atoms)
    if not atoms:
        raise ValueError("atoms must be nonempty")
    shift = max(lw for _, lw in atoms)
    if shift == -math.inf or math.isnan(shift):
        raise DegenerateWeights("all atoms carry log-weight -inf")
    weights = [math.exp(lw - shift) for _, lw in atoms]
    total = math.fsum(weights)
    return math.fsum(w * f(x) for w, (x, _) in zip(weights, atoms)) / total
