import math

import numpy as np
import pytest

from noisyis import (
    DegenerateWeights,
    Density,
    Integrand,
    OracleDivergence,
    QuadratureSpec,
    draw_batch,
    integrate,
    oracle_discrete_snis,
    oracle_mean,
    oracle_second_moment_fw,
    oracle_sigma2,
)
from noisyis.model import log_weight_batch

from conftest import CANONICAL_M2, CANONICAL_SIGMA2, bundled_problems, canonical_problem


# ---------------------------------------------------------------- oracle_mean


def test_mean_standard_normal_second_moment():
    assert math.isclose(oracle_mean(Density.gaussian(0, 1), Integrand.square()), 1.0, rel_tol=1e-10)


def test_mean_of_gaussian_is_mu():
    assert math.isclose(oracle_mean(Density.gaussian(3, 4), Integrand.identity()), 3.0, rel_tol=1e-10)
    assert math.isclose(oracle_mean(Density.gaussian(3, 4), Integrand.square()), 13.0, rel_tol=1e-10)


def test_mean_of_mixture():
    mix = Density.gaussian_mixture([(0.5, -1.0, 1.0), (0.5, 2.0, 1.0)])
    # 0.5*(-1) + 0.5*2
    assert math.isclose(oracle_mean(mix, Integrand.identity()), 0.5, rel_tol=1e-8)


def test_mean_handles_zero_valued_integrals():
    assert abs(oracle_mean(Density.gaussian(0, 1), Integrand.identity())) < 1e-10


# ---------------------------------------------------------------- moments


def test_sigma2_constant_integrand_same_density():
    d = Density.gaussian(0.5, 2.0)
    assert abs(oracle_sigma2(d, d, Integrand.constant(3.0))) < 1e-8


def test_sigma2_identity_standard_normal():
    d = Density.gaussian(0, 1)
    assert math.isclose(oracle_sigma2(d, d, Integrand.identity()), 1.0, rel_tol=1e-10)


def test_second_moment_constant_same_density():
    d = Density.gaussian(0, 1)
    assert math.isclose(oracle_second_moment_fw(d, d, Integrand.constant(1.0)), 1.0, rel_tol=1e-10)


def test_second_moment_uniform_pair():
    # int_0^1 (1 / (1/2))^2 * (1/2) dx = 2
    target = Density.uniform(0.0, 1.0)
    proposal = Density.uniform(0.0, 2.0)
    assert math.isclose(
        oracle_second_moment_fw(target, proposal, Integrand.constant(1.0)), 2.0, rel_tol=1e-10
    )


def test_canonical_closed_forms():
    target, proposal, f = canonical_problem()
    assert math.isclose(oracle_second_moment_fw(target, proposal, f), CANONICAL_M2, rel_tol=1e-8)
    assert math.isclose(oracle_sigma2(target, proposal, f), CANONICAL_SIGMA2, rel_tol=1e-8)


def test_canonical_monte_carlo_cross_check():
    # independent route: 1e7-draw sample second moment of (f w)
    target, proposal, f = canonical_problem()
    x = draw_batch(proposal, 10**7, 99)
    fw = f(x) * np.exp(log_weight_batch(target, proposal, x))
    assert abs(np.mean(fw * fw) - CANONICAL_M2) <= 0.01 * CANONICAL_M2


def test_oracle_self_consistency():
    for target, proposal, f, _ in bundled_problems():
        sigma2 = oracle_sigma2(target, proposal, f)
        m2 = oracle_second_moment_fw(target, proposal, f)
        mu = oracle_mean(target, f)
        assert math.isclose(sigma2, m2 - mu * mu, rel_tol=1e-8, abs_tol=1e-12)


def test_bundled_truths_match_quadrature():
    for target, _, f, truth in bundled_problems():
        assert math.isclose(oracle_mean(target, f), truth, rel_tol=1e-8, abs_tol=1e-12)


def test_truncation_insensitive_to_wider_bounds():
    # 12-SD bounds against 14-SD bounds
    target, proposal, f = canonical_problem()
    a = oracle_second_moment_fw(target, proposal, f, k_sd=12.0)
    b = oracle_second_moment_fw(target, proposal, f, k_sd=14.0)
    assert abs(a - b) < 1e-9 * abs(b)
    c = oracle_mean(target, f, k_sd=12.0)
    d = oracle_mean(target, f, k_sd=14.0)
    assert abs(c - d) < 1e-9 * abs(d)


# ---------------------------------------------------------------- divergence


def test_narrow_proposal_diverges():
    target = Density.gaussian(0, 1)
    with pytest.raises(OracleDivergence):
        oracle_sigma2(target, Density.gaussian(0, 0.4), Integrand.square())
    # the boundary case v_q = v_t / 2 diverges too (polynomial tail)
    with pytest.raises(OracleDivergence):
        oracle_second_moment_fw(target, Density.gaussian(0, 0.5), Integrand.square())


def test_uncovered_support_diverges():
    with pytest.raises(OracleDivergence):
        oracle_second_moment_fw(
            Density.gaussian(0, 1), Density.uniform(-1, 1), Integrand.identity()
        )
    with pytest.raises(OracleDivergence):
        oracle_second_moment_fw(
            Density.uniform(0, 2), Density.uniform(0, 1), Integrand.identity()
        )


def test_compact_target_under_gaussian_proposal_converges():
    val = oracle_second_moment_fw(
        Density.uniform(-1, 1), Density.gaussian(0, 1), Integrand.constant(1.0)
    )
    assert val > 1.0  # weights vary, so the second moment exceeds E[w]^2


# ---------------------------------------------------------------- quadrature


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(1.0, 1.0)
    with pytest.raises(ValueError):
        QuadratureSpec(0.0, 1.0, rel_tol=0.0)


def test_integrate_honors_error_contract():
    spec = QuadratureSpec(0.0, 1.0)
    assert math.isclose(integrate(lambda x: 3.0 * x * x, spec), 1.0, rel_tol=1e-10)


# ---------------------------------------------------------------- discrete


def test_discrete_snis_single_atom():
    assert oracle_discrete_snis([(4.0, -7.3)], Integrand.identity()) == 4.0


def test_discrete_snis_hand_normalized():
    atoms = [(0.0, math.log(1.0)), (1.0, math.log(2.0)), (2.0, math.log(7.0))]
    # weights normalize to (0.1, 0.2, 0.7): 0*0.1 + 1*0.2 + 2*0.7
    got = oracle_discrete_snis(atoms, Integrand.identity())
    assert math.isclose(got, 1.6, rel_tol=1e-15)


def test_discrete_snis_equal_weights():
    atoms = [(1.0, -2.0), (2.0, -2.0), (3.0, -2.0)]
    got = oracle_discrete_snis(atoms, Integrand.square())
    assert math.isclose(got, 14.0 / 3.0, rel_tol=1e-15)


def test_discrete_snis_degenerate_and_empty():
    with pytest.raises(DegenerateWeights):
        oracle_discrete_snis([(1.0, -math.inf), (2.0, -math.inf)], Integrand.identity())
    with pytest.raises(ValueError):
        oracle_discrete_snis([], Integrand.identity())


def test_discrete_snis_ignores_minus_inf_atoms():
    atoms = [(5.0, 0.0), (100.0, -math.inf)]
    assert oracle_discrete_snis(atoms, Integrand.identity()) == 5.0
