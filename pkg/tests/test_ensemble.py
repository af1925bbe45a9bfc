import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from bureshall.ensemble import (
    EnsembleParams,
    kernel_G,
    kernel_f,
    kernel_g,
    log_jpd_unrestricted,
    normalization_C,
    normalization_C_exact,
    normalization_CF,
    normalization_CF_exact,
)
from bureshall.exact import ExactScalar, gamma_exact
from bureshall.pfaffian import pf_H_closed, pf_H_closed_exact
from bureshall.specfun import DomainError


def test_params_derived_quantities():
    p = EnsembleParams.from_dims(3, 5)
    assert p.alpha == pytest.approx(5 - 3 - 0.5)
    # the two closed forms of the fixed-trace exponent agree
    assert p.gamma_param == pytest.approx((3 - 1) * (2 * 5 - 3 + 1) / 2)
    assert p.gamma_exact == Fraction(8)
    assert p.N == 4 and p.N % 2 == 0
    assert EnsembleParams.from_dims(4, 4).N == 4


def test_params_validation():
    with pytest.raises(DomainError):
        EnsembleParams.from_dims(3, 2)
    with pytest.raises(DomainError):
        EnsembleParams.from_dims(0, 2)
    with pytest.raises(DomainError):
        EnsembleParams.from_alpha(2, -1.0)


def test_relaxed_alpha_params():
    p = EnsembleParams.from_alpha(2, 0.37)
    assert not p.has_exact_track
    with pytest.raises(ValueError):
        _ = p.gamma_exact
    # half-integer alpha regains the exact track
    assert EnsembleParams.from_alpha(2, 1.5).has_exact_track


def test_normalization_C_n1():
    for m in (1, 2, 6):
        p = EnsembleParams.from_dims(1, m)
        assert normalization_C(p) == pytest.approx(1.0 / math.gamma(p.alpha + 1.0), rel=1e-13)


def test_de_bruijn_identity_float():
    p = EnsembleParams.from_dims(2, 2)
    assert normalization_C(p) * 2 * pf_H_closed(p) == pytest.approx(1.0, rel=1e-13)


def test_de_bruijn_identity_exact_all():
    one = ExactScalar.one()
    for n in range(1, 9):
        for m in range(n, 9):
            p = EnsembleParams.from_dims(n, m)
            prod = normalization_C_exact(p) * math.factorial(n) * pf_H_closed_exact(p)
            assert (prod - one).is_zero, (n, m)


def test_normalization_C_exact_pi_power():
    p = EnsembleParams.from_dims(4, 7)
    assert normalization_C_exact(p).pi_half_power == -4


def test_CF_ratio():
    for (n, m) in [(1, 1), (2, 2), (3, 5), (6, 8)]:
        p = EnsembleParams.from_dims(n, m)
        ratio = normalization_CF_exact(p) / normalization_C_exact(p)
        assert (ratio - gamma_exact(p.trace_power_exact)).is_zero


def test_CF_n1_is_one():
    p = EnsembleParams.from_dims(1, 4)
    assert (normalization_CF_exact(p) - ExactScalar.one()).is_zero
    assert normalization_CF(p) == pytest.approx(1.0, rel=1e-13)


def test_CF_float_matches_exact():
    p = EnsembleParams.from_dims(2, 2)
    assert normalization_CF(p) == pytest.approx(
        normalization_CF_exact(p).to_float(), rel=1e-12
    )


def test_kernel_g_properties():
    rng = np.random.default_rng(23)
    assert kernel_g(1.3, 1.3) == 0.0
    for _ in range(100):
        x, y = rng.uniform(1e-3, 50.0, size=2)
        assert kernel_g(x, y) == -kernel_g(y, x)
        assert abs(kernel_g(x, y)) <= 1.0
    with pytest.raises(DomainError):
        kernel_g(0.0, 0.0)


def test_kernel_f_value():
    p = EnsembleParams.from_dims(2, 2)  # alpha = -1/2
    assert kernel_f(p, 1, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)
    with pytest.raises(DomainError):
        kernel_f(p, 1, 0.0)


def test_kernel_G_matches_defining_integral():
    for (n, m) in [(2, 2), (4, 5), (6, 7)]:
        p = EnsembleParams.from_dims(n, m)
        for j in range(1, min(n, 6) + 1):
            for lam in (0.1, 1.0, 5.0, 20.0):
                want, _ = integrate.quad(
                    lambda v: kernel_f(p, j, v) * (lam - v) / (lam + v),
                    0.0,
                    np.inf,
                    limit=400,
                    epsabs=1e-13,
                    epsrel=1e-12,
                )
                assert kernel_G(p, j, lam) == pytest.approx(want, rel=1e-7), (n, m, j, lam)


def test_kernel_G_example():
    # j=1, alpha=1/2: Gamma(3/2) (2 e E_(3/2)(1) - 1)
    p = EnsembleParams.from_alpha(1, 0.5)
    want, _ = integrate.quad(
        lambda v: kernel_f(p, 1, v) * (1.0 - v) / (1.0 + v), 0.0, np.inf, limit=400
    )
    assert kernel_G(p, 1, 1.0) == pytest.approx(want, rel=1e-9)


def test_log_jpd_normalization_n1():
    p = EnsembleParams.from_dims(1, 3)
    val, _ = integrate.quad(lambda x: math.exp(log_jpd_unrestricted(p, [x])), 0, np.inf)
    assert val == pytest.approx(1.0, abs=1e-9)


def test_log_jpd_degenerate_configs():
    p = EnsembleParams.from_dims(2, 2)
    assert log_jpd_unrestricted(p, [1.0, 1.0]) == -math.inf
    assert log_jpd_unrestricted(p, [-1.0, 2.0]) == -math.inf
