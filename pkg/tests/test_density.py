import math

import numpy as np
import pytest
from scipy import integrate

from bureshall.density import (
    UnsupportedParamsError,
    correlation_unrestricted,
    default_cutoff,
    fixed_moment,
    level_density_fixed,
    level_density_unrestricted,
    tabulate_density,
    unrestricted_moment,
)
from bureshall.ensemble import EnsembleParams, log_jpd_unrestricted, normalization_CF
from bureshall.specfun import DomainError


def test_unrestricted_n1_gamma_density():
    # single eigenvalue: R_1 = x^a e^-x / Gamma(a+1)
    for m in (1, 3, 6):
        p = EnsembleParams.from_dims(1, m)
        for lam in (0.05, 0.7, 3.0, 12.0):
            want = math.exp(p.alpha * math.log(lam) - lam) / math.gamma(p.alpha + 1.0)
            assert level_density_unrestricted(p, lam) == pytest.approx(want, rel=1e-12)


def test_unrestricted_n2_jpd_quadrature_oracle():
    p = EnsembleParams.from_dims(2, 2)
    for lam in (0.5, 1.0, 3.0):
        want, _ = integrate.quad(
            lambda y: 2.0 * math.exp(log_jpd_unrestricted(p, [lam, y])),
            0.0,
            60.0,
            limit=400,
            points=[lam],
            epsabs=1e-12,
        )
        assert level_density_unrestricted(p, lam) == pytest.approx(want, rel=1e-9)


def test_unrestricted_mass():
    for (n, m) in [(1, 2), (2, 2), (3, 5), (5, 5), (8, 8)]:
        p = EnsembleParams.from_dims(n, m)
        assert unrestricted_moment(p, 0.0) == pytest.approx(n, abs=1e-7)


def test_fixed_n2_closed_form():
    # delta-constraint reduction: R = 2 C^F mu^a (1-mu)^a (1-2 mu)^2
    for m in (2, 3, 5):
        p = EnsembleParams.from_dims(2, m)
        cf = normalization_CF(p)
        a = p.alpha
        for mu in (0.01, 0.25, 0.5, 0.77, 0.99):
            want = 2.0 * cf * mu**a * (1.0 - mu) ** a * (1.0 - 2.0 * mu) ** 2
            assert level_density_fixed(p, mu) == pytest.approx(want, abs=1e-10 * max(1, want))


def test_fixed_mass_and_trace():
    for (n, m) in [(2, 2), (3, 4), (5, 7), (8, 8)]:
        p = EnsembleParams.from_dims(n, m)
        assert fixed_moment(p, 0.0) == pytest.approx(n, abs=1e-7)
        assert fixed_moment(p, 1.0) == pytest.approx(1.0, abs=1e-7)


def test_fixed_n1_unsupported():
    p = EnsembleParams.from_dims(1, 4)
    with pytest.raises(UnsupportedParamsError):
        level_density_fixed(p, 0.5)


def test_fixed_domain():
    p = EnsembleParams.from_dims(2, 2)
    for mu in (0.0, 1.0, -0.3, 1.5):
        with pytest.raises(DomainError):
            level_density_fixed(p, mu)


def test_fixed_nonnegative_grid():
    grid = np.linspace(1e-4, 1.0 - 1e-4, 250)
    for (n, m) in [(2, 2), (3, 3), (4, 6), (8, 8)]:
        p = EnsembleParams.from_dims(n, m)
        vals = np.array([level_density_fixed(p, float(u)) for u in grid])
        assert vals.min() >= -1e-10, (n, m, vals.min())


def test_laplace_consistency():
    # fixed-trace moments map to unrestricted moments through gamma ratios
    from scipy.special import gammaln

    for (n, m) in [(2, 2), (3, 4), (4, 6)]:
        p = EnsembleParams.from_dims(n, m)
        q = p.trace_power
        for w in (1.0, 2.0, 3.0):
            lhs = fixed_moment(p, w)
            rhs = math.exp(gammaln(q) - gammaln(q + w)) * unrestricted_moment(p, w)
            assert lhs == pytest.approx(rhs, rel=1e-8), (n, m, w)


def test_endpoint_exponent_alpha_minus_half():
    # for alpha=-1/2 the fixed density diverges as mu^(-1/2): mu^(1/2) R stays finite
    p = EnsembleParams.from_dims(3, 3)
    vals = [math.sqrt(mu) * level_density_fixed(p, mu) for mu in (1e-4, 1e-6, 1e-8)]
    assert vals[1] == pytest.approx(vals[2], rel=1e-3)
    assert vals[2] > 0.0


def test_correlation_r1_matches_level_density():
    for (n, m) in [(1, 2), (2, 2), (3, 4), (4, 6), (5, 5)]:
        p = EnsembleParams.from_dims(n, m)
        for lam in (0.4, 1.7, 6.0):
            assert correlation_unrestricted(p, [lam]) == pytest.approx(
                level_density_unrestricted(p, lam), rel=1e-9
            )


def test_correlation_full_order_is_jpd():
    p = EnsembleParams.from_dims(2, 2)
    for pts in ([0.5, 1.5], [1.0, 3.0], [0.2, 7.0]):
        want = 2.0 * math.exp(log_jpd_unrestricted(p, pts))
        assert correlation_unrestricted(p, pts) == pytest.approx(want, rel=1e-10)


def test_correlation_level_repulsion():
    p = EnsembleParams.from_dims(2, 2)
    prev = None
    for eps in (1e-1, 1e-2, 1e-3):
        val = correlation_unrestricted(p, [1.0, 1.0 + eps])
        # Vandermonde factor forces ~eps^2 decay at coincidence
        if prev is not None:
            assert val < prev / 50.0
        prev = val
    assert prev < 1e-5


def test_correlation_input_validation():
    p = EnsembleParams.from_dims(2, 2)
    with pytest.raises(DomainError):
        correlation_unrestricted(p, [])
    with pytest.raises(DomainError):
        correlation_unrestricted(p, [1.0, 1.0])
    with pytest.raises(DomainError):
        correlation_unrestricted(p, [1.0, -2.0])


def test_tabulate_fixed_defaults():
    p = EnsembleParams.from_dims(2, 2)
    curve = tabulate_density(p, "fixed_trace", points=128)
    assert curve.xs.shape == (128,)
    assert np.all(np.diff(curve.xs) > 0)
    assert curve.xs[0] > 0.0 and curve.xs[-1] < 1.0
    assert curve.normalization == pytest.approx(2.0, abs=1e-6)
    assert curve.marginal_normalization == pytest.approx(1.0, abs=1e-6)
    rows = list(curve.rows())
    assert all(r1 >= 0.0 and marg >= 0.0 for _, r1, marg in rows)


def test_tabulate_unrestricted_n1_gamma_curve():
    p = EnsembleParams.from_dims(1, 3)
    curve = tabulate_density(p, "unrestricted", points=64)
    for x, r1, marg in curve.rows():
        want = math.exp(p.alpha * math.log(x) - x) / math.gamma(p.alpha + 1.0)
        assert r1 == pytest.approx(want, rel=1e-10)
        assert marg == pytest.approx(want, rel=1e-10)
    assert curve.xs[-1] < default_cutoff(p)


def test_tabulate_validation():
    p = EnsembleParams.from_dims(2, 2)
    with pytest.raises(DomainError):
        tabulate_density(p, "nonsense")
    with pytest.raises(DomainError):
        tabulate_density(p, "fixed_trace", points=1)
    with pytest.raises(DomainError):
        tabulate_density(p, "fixed_trace", grid=[0.5, 0.4])
    with pytest.raises(DomainError):
        tabulate_density(p, "fixed_trace", grid=[0.5, 1.5])
    with pytest.raises(UnsupportedParamsError):
        tabulate_density(EnsembleParams.from_dims(1, 2), "fixed_trace")


def test_tabulate_respects_thread_env(monkeypatch):
    p = EnsembleParams.from_dims(2, 3)
    base = tabulate_density(p, "fixed_trace", points=32)
    monkeypatch.setenv("BURESHALL_THREADS", "4")
    threaded = tabulate_density(p, "fixed_trace", points=32)
    assert np.array_equal(base.values, threaded.values)
