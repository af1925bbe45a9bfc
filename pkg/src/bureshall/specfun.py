"""Scalar special functions shared by every analytic formula in the package.

Provides log-gamma with sign, digamma, the generalized exponential integral
E_a(z) = int_1^inf e^(-z t) / t^a dt for real order a, and the incomplete
beta function B_z(a, b) = int_0^z u^(a-1) (1-u)^(b-1) du extended by a
power-series continuation to negative non-integer a.
"""

from __future__ import annotations

import math

from scipy import special as _sp

__all__ = [
    "DomainError",
    "PoleError",
    "log_gamma",
    "digamma",
    "exp_integral",
    "exp_integral_scaled",
    "inc_beta",
    "beta_complete",
]

_MAXIT_CF = 1000
_MAXIT_SERIES = 200_000
_CF_EPS = 1e-16
_TINY = 1e-300


class DomainError(ValueError):
    """Argument outside the supported domain."""


class PoleError(DomainError):
    """Evaluation exactly at a pole."""


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def log_gamma(x: float) -> tuple[float, int]:
    """Return (ln|Gamma(x)|, sign of Gamma(x)).

    exp of the first element times the second reproduces Gamma(x).
    """
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma pole at x={x}")
    return float(_sp.gammaln(x)), int(_sp.gammasgn(x))


def digamma(x: float) -> float:
    """Digamma function psi(x) = d/dx ln Gamma(x)."""
    if _is_nonpositive_integer(x):
        raise PoleError(f"digamma pole at x={x}")
    return float(_sp.digamma(x))


def _expint_cf_scaled(a: float, z: float) -> float:
    # Modified Lentz continued fraction for e^z E_a(z); reliable for z >= 1
    # and order not much larger than z.  Partial numerators -i(a-1+i) only
    # become large around i ~ a, so early deltas sit deceptively at 1; the
    # minimum iteration count guards against that premature exit.
    min_iters = 6 + int(a)
    b = z + a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT_CF + 1):
        an = -i * (a - 1.0 + i)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _CF_EPS and i >= min_iters:
            return h
    raise DomainError(f"exponential integral continued fraction stalled at a={a}, z={z}")


def _expint_series_scaled(a: float, z: float) -> float:
    # Small-z expansion, returned as e^z E_a(z).
    if a == round(a):
        return _expint_series_integer(int(round(a)), z) * math.exp(z)
    one_minus_a = 1.0 - a
    s = 0.0
    t = 1.0  # (-z)^k / k!
    k = 0
    while True:
        term = t / (one_minus_a + k)
        s += term
        k += 1
        t *= -z / k
        if abs(t) < 1e-18 * (abs(s) + _TINY) and k > 3:
            break
        if k > 400:
            raise DomainError(f"exponential integral series stalled at a={a}, z={z}")
    lg, sg = log_gamma(one_minus_a)
    lead_log = lg + (a - 1.0) * math.log(z)
    lead = sg * math.exp(lead_log) if lead_log < 700.0 else sg * math.inf
    return (lead - s) * math.exp(z)


def _expint_series_integer(n: int, z: float) -> float:
    # E_n(z) for integer n >= 0 and z < 1 (classical psi/log expansion).
    if n == 0:
        return math.exp(-z) / z
    nm1 = n - 1
    psi_n = -_EULER + sum(1.0 / i for i in range(1, n))
    lead = (-z) ** nm1 / math.factorial(nm1) * (-math.log(z) + psi_n)
    s = 0.0
    t = 1.0  # (-z)^k / k!
    for k in range(0, 400):
        if k != nm1:
            s += t / (k - nm1)
        t *= -z / (k + 1)
        if abs(t) < 1e-18 * (abs(s) + 1.0) and k > nm1 + 3:
            break
    return lead - s


_EULER = 0.5772156649015328606


def exp_integral(a: float, z: float) -> float:
    """Generalized exponential integral E_a(z), real order a >= 0."""
    return exp_integral_scaled(a, z) * math.exp(-z)


def exp_integral_scaled(a: float, z: float) -> float:
    """Overflow-safe product e^z * E_a(z).

    The plain factors overflow/underflow for z up to 700 while the product
    stays O(1/z); the continued fraction produces it directly.  Orders much
    larger than z are reached through the stable upward recurrence
    e^z E_(a+1)(z) = (1 - z e^z E_a(z)) / a.
    """
    if z <= 0.0:
        raise DomainError(f"exponential integral requires z > 0, got {z}")
    if z < 1.0:
        return _expint_series_scaled(a, z)
    if a <= z + 2.0:
        return _expint_cf_scaled(a, z)
    steps = int(math.ceil(a - (z + 1.0)))
    base = a - steps
    h = _expint_cf_scaled(base, z)
    for _ in range(steps):
        h = (1.0 - z * h) / base
        base += 1.0
    return h


def beta_complete(a: float, b: float) -> float:
    """Complete beta function Gamma(a)Gamma(b)/Gamma(a+b), signed.

    Poles of 1/Gamma(a+b) map to an exact zero; poles of Gamma(a) or
    Gamma(b) raise.
    """
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        raise PoleError(f"beta pole at a={a}, b={b}")
    if _is_nonpositive_integer(a + b):
        return 0.0
    la, sa = log_gamma(a)
    lb, sb = log_gamma(b)
    lab, sab = log_gamma(a + b)
    return sa * sb * sab * math.exp(la + lb - lab)


def _inc_beta_series(a: float, b: float, z: float) -> float:
    # B_z(a, b) = z^a * sum_{k>=0} (1-b)_k z^k / (k! (a+k)); converges for z < 1.
    s = 1.0 / a
    t = 1.0
    k = 0
    while True:
        k += 1
        t *= (k - b) * z / k
        term = t / (a + k)
        s += term
        if abs(term) < 1e-17 * (abs(s) + _TINY) and k > abs(b) + 3:
            break
        if k >= _MAXIT_SERIES:
            raise DomainError(f"incomplete beta series stalled at a={a}, b={b}, z={z}")
    return math.exp(a * math.log(z)) * s


def inc_beta(a: float, b: float, z: float) -> float:
    """Incomplete beta B_z(a,b), analytically continued in a.

    Matches the defining integral for a > 0; for negative non-integer a the
    power-series continuation is returned.  z in [0, 1].

    Routing: positive parameters go through the regularized routine; the
    continuation series has a non-negative-term head whenever b <= 1, so it
    is used directly except very near z = 1, where the reflection
    B(a,b) - B_(1-z)(b,a) takes over (its series argument is then small
    enough that alternating heads cannot grow).
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"inc_beta requires z in [0,1], got {z}")
    if _is_nonpositive_integer(a):
        raise PoleError(f"inc_beta pole at a={a}")
    if z == 0.0:
        return 0.0
    if z == 1.0:
        return beta_complete(a, b)
    if a > 0.0 and b > 0.0:
        return float(_sp.betainc(a, b, z)) * beta_complete(a, b)
    if z <= 0.98 or _is_nonpositive_integer(b):
        return _inc_beta_series(a, b, z)
    return beta_complete(a, b) - _inc_beta_series(b, a, 1.0 - z)
