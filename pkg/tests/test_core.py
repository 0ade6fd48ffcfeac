import math

import pytest
from hypothesis import given, strategies as st

from lorenzlab import (InvalidParameterError, Params, alpha_from_alpha_hat,
                       alpha_hat_from_alpha, derive_constants,
                       validate_params)


def test_classic_constants():
    c = derive_constants(Params())
    assert c.chi == pytest.approx(2.0 / 11.0, rel=1e-15)
    assert c.eta == pytest.approx(0.55, rel=1e-15)
    assert c.gamma == pytest.approx(16.0 / 33.0, rel=1e-15)
    # nu = sqrt(chi^5 sigma), evaluated by hand for sigma=10
    assert c.nu == pytest.approx(math.sqrt((2.0 / 11.0) ** 5 * 10.0), rel=1e-15)
    assert c.nu == pytest.approx(0.044575197518230886, rel=1e-13)
    assert c.zstar == pytest.approx(1.834710743801653, rel=1e-13)
    # zstar = 2 + chi^2 sigma (rho-1) = 2 - 20/121 for rho = 1/2
    assert c.zstar == pytest.approx(2.0 - 20.0 / 121.0, rel=1e-15)


def test_gamma_chi_ratio_is_beta_exactly():
    # time rescaling maps the z relaxation rate back onto beta
    for sigma, beta in [(10.0, 8.0 / 3.0), (3.0, 1.0), (25.0, 4.0)]:
        c = derive_constants(Params(sigma=sigma, beta=beta))
        assert c.gamma / c.chi == pytest.approx(beta, rel=1e-15)


def test_zstar_negative_rho():
    c = derive_constants(Params(rho=-3.0))
    assert c.zstar == pytest.approx(0.6776859504132231, rel=1e-13)
    assert c.zstar < 1.0


def test_unit_conversion_factor():
    p = Params()
    assert alpha_from_alpha_hat(1.0, p) == pytest.approx(
        0.14095915130949452, rel=1e-13)
    assert alpha_from_alpha_hat(27.7, p) == pytest.approx(
        3.904568491272998, rel=1e-13)


def test_conversion_round_trip():
    p = Params(sigma=7.0, beta=2.0, rho=0.3)
    for ahat in (0.0, 0.25, 10.0, 40.0):
        assert alpha_hat_from_alpha(alpha_from_alpha_hat(ahat, p), p) == \
            pytest.approx(ahat, rel=1e-14, abs=1e-14)


def test_derived_consts_recover_params():
    p = Params(sigma=12.5, beta=3.1, rho=-0.7, alpha_hat=5.0)
    c = derive_constants(p)
    assert c.sigma == pytest.approx(p.sigma, rel=1e-13)
    assert c.beta == pytest.approx(p.beta, rel=1e-13)
    assert c.rho == pytest.approx(p.rho, rel=1e-12)
    assert c.alpha_hat_of(c.alpha) == pytest.approx(p.alpha_hat, rel=1e-13)


@given(sigma=st.floats(0.5, 100.0), beta=st.floats(0.1, 20.0),
       rho=st.floats(-10.0, 0.999))
def test_recovery_property(sigma, beta, rho):
    c = derive_constants(Params(sigma=sigma, beta=beta, rho=rho))
    assert math.isclose(c.sigma, sigma, rel_tol=1e-10)
    assert math.isclose(c.beta, beta, rel_tol=1e-10)
    assert math.isclose(c.rho, rho, rel_tol=1e-8, abs_tol=1e-8)


def test_validate_params_messages():
    bad = Params(sigma=-1.0, beta=0.0, rho=float("nan"), alpha_hat=-2.0)
    problems = validate_params(bad)
    assert len(problems) == 4
    assert validate_params(Params()) == []


def test_derive_constants_rejects_bad_params():
    with pytest.raises(InvalidParameterError):
        derive_constants(Params(sigma=0.0))
    with pytest.raises(InvalidParameterError):
        derive_constants(Params(alpha_hat=-1.0))
    with pytest.raises(InvalidParameterError):
        alpha_from_alpha_hat(-0.5, Params())
