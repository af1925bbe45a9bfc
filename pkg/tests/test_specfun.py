import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from bureshall.specfun import (
    DomainError,
    PoleError,
    beta_complete,
    digamma,
    exp_integral,
    exp_integral_scaled,
    inc_beta,
    log_gamma,
)

EULER = 0.5772156649015328606


def test_log_gamma_values():
    lg, sign = log_gamma(1.0)
    assert lg == pytest.approx(0.0, abs=1e-15) and sign == 1
    lg, sign = log_gamma(0.5)
    assert lg == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14) and sign == 1
    # reflection-formula oracle: Gamma(-3/2) = 4 sqrt(pi) / 3
    lg, sign = log_gamma(-1.5)
    assert sign == 1
    assert math.exp(lg) == pytest.approx(4.0 * math.sqrt(math.pi) / 3.0, rel=1e-13)


def test_log_gamma_accuracy_grid():
    for x in np.linspace(0.5, 50.0, 100):
        lg, sign = log_gamma(float(x))
        want = float(mp.log(mp.gamma(x)))
        assert sign == 1
        assert abs(math.exp(lg - want) - 1.0) < 1e-13


def test_log_gamma_poles():
    for x in (0.0, -1.0, -7.0):
        with pytest.raises(PoleError):
            log_gamma(x)


def test_digamma_values():
    assert digamma(1.0) == pytest.approx(-EULER, abs=1e-13)
    assert digamma(0.5) == pytest.approx(-EULER - 2.0 * math.log(2.0), abs=1e-13)
    assert digamma(3.0) == pytest.approx(-EULER + 1.5, abs=1e-13)


def test_digamma_recurrence():
    rng = np.random.default_rng(7)
    for _ in range(200):
        x = float(rng.uniform(0.01, 99.0))
        assert digamma(x + 1.0) - digamma(x) == pytest.approx(1.0 / x, abs=1e-12)


def test_digamma_pole():
    with pytest.raises(PoleError):
        digamma(-2.0)


def test_exp_integral_small_z_limit():
    # E_a(z) -> 1/(a-1) as z -> 0+ for a > 1
    assert exp_integral(2.0, 1e-8) == pytest.approx(1.0, abs=1e-5)
    assert exp_integral(5.0, 1e-8) == pytest.approx(0.25, abs=1e-5)


def _exp_integral_quad(a, z):
    # independent oracle: adaptive quadrature of the defining integral
    val, err = integrate.quad(
        lambda t: math.exp(-z * t) / t**a, 1.0, np.inf, limit=400, epsabs=1e-14, epsrel=1e-13
    )
    return val


def test_exp_integral_quadrature_oracle():
    assert exp_integral(1.0, 1.0) == pytest.approx(_exp_integral_quad(1.0, 1.0), rel=1e-10)
    assert exp_integral(1.0, 1.0) == pytest.approx(0.2193839344, abs=1e-10)
    got = exp_integral(0.5, 1.0)
    assert got == pytest.approx(_exp_integral_quad(0.5, 1.0), rel=1e-10)
    assert got == pytest.approx(math.sqrt(math.pi) * math.erfc(1.0), rel=1e-12)


def test_exp_integral_recurrence():
    # E_(a+1)(z) = (e^-z - z E_a(z)) / a
    for a in np.arange(0.5, 20.5, 0.5):
        for z in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0):
            lhs = exp_integral(float(a) + 1.0, z)
            rhs = (math.exp(-z) - z * exp_integral(float(a), z)) / float(a)
            assert lhs == pytest.approx(rhs, abs=1e-9 * max(1.0, abs(rhs)))


def _scaled_reference(a, z):
    # e^z E_a(z) = int_0^inf e^(-z s) (1+s)^(-a) ds at 60 digits
    with mp.workdps(60):
        zz = mp.mpf(z)
        pts = sorted({mp.mpf("1e-6") / zz, mp.mpf("0.01") / zz, 1 / zz, 10 / zz, 100 / zz})
        return float(mp.quad(lambda s: mp.e ** (-zz * s) * (1 + s) ** (-a), [0, *pts, mp.inf]))


def test_exp_integral_scaled_full_range():
    for a in (0.5, 1.5, 5.0, 20.0, 60.0, 120.0):
        for z in (1e-8, 0.01, 0.9, 1.0, 3.0, 40.0, 120.0, 700.0):
            got = exp_integral_scaled(a, z)
            want = _scaled_reference(a, z)
            assert got == pytest.approx(want, rel=1e-10), (a, z)


def test_exp_integral_domain():
    with pytest.raises(DomainError):
        exp_integral(2.0, 0.0)
    with pytest.raises(DomainError):
        exp_integral(2.0, -1.0)


def test_inc_beta_identity_cases():
    for z in (0.0, 0.1, 0.6, 1.0):
        assert inc_beta(1.0, 1.0, z) == pytest.approx(z, abs=1e-14)
    # complete-beta boundary
    assert inc_beta(2.5, 3.5, 1.0) == pytest.approx(beta_complete(2.5, 3.5), rel=1e-13)


def test_inc_beta_polynomial_oracle():
    # int_0^0.5 u (1-u)^2 du = u^2/2 - 2u^3/3 + u^4/4 at 0.5
    want = 0.5**2 / 2 - 2 * 0.5**3 / 3 + 0.5**4 / 4
    assert inc_beta(2.0, 3.0, 0.5) == pytest.approx(want, rel=1e-12)
    assert inc_beta(2.0, 3.0, 0.5) == pytest.approx(0.0572916667, abs=1e-9)


def test_inc_beta_matches_quadrature_grid():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 100:
        a = float(rng.uniform(0.2, 8.0))
        b = float(rng.uniform(0.2, 8.0))
        z = float(rng.uniform(0.02, 0.98))
        want, _ = integrate.quad(
            lambda u: u ** (a - 1.0) * (1.0 - u) ** (b - 1.0), 0.0, z, limit=200, epsabs=1e-13
        )
        assert inc_beta(a, b, z) == pytest.approx(want, rel=1e-8), (a, b, z)
        checked += 1


def test_inc_beta_continuation_negative_a():
    # continuation for negative non-integer a matches the hypergeometric value
    with mp.workdps(40):
        for a, b, z in [(-0.5, 1.5, 0.3), (-2.5, 0.5, 0.7), (-6.5, 30.5, 0.44), (30.5, -6.5, 0.56)]:
            want = float(mp.betainc(mp.mpf(a), mp.mpf(b), 0, mp.mpf(z)))
            assert inc_beta(a, b, z) == pytest.approx(want, rel=1e-11), (a, b, z)


def test_inc_beta_domain_and_poles():
    with pytest.raises(DomainError):
        inc_beta(1.0, 1.0, 1.5)
    with pytest.raises(DomainError):
        inc_beta(1.0, 1.0, -0.1)
    with pytest.raises(PoleError):
        inc_beta(-2.0, 1.0, 0.5)
