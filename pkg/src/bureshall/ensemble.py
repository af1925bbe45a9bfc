"""Ensemble parameterization, normalization constants, and scalar kernels.

The two-parameter family is indexed by the density-matrix dimension n and
the environment dimension m >= n; alpha = m - n - 1/2 controls the
eigenvalue weight and gamma = (n-1)(n+2*alpha+2)/2 the fixed-trace
exponents.  All gamma-function ratios are evaluated in log space so the
constants stay representable for dimensions up to ~60.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from scipy import special as _sp

from .exact import ExactScalar, gamma_exact
from .specfun import DomainError, exp_integral_scaled

__all__ = [
    "EnsembleParams",
    "normalization_C",
    "normalization_CF",
    "log_normalization_C",
    "log_normalization_CF",
    "normalization_C_exact",
    "normalization_CF_exact",
    "kernel_f",
    "kernel_g",
    "kernel_G",
    "log_jpd_unrestricted",
]


@dataclass(frozen=True)
class EnsembleParams:
    """Dimensions (n, m) and the derived constants used by every formula.

    Constructed via from_dims (integer m, exact track available) or
    from_alpha (real alpha > -1, float track only).
    """

    n: int
    alpha: float
    m: int | None = None
    alpha_exact: Fraction | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"need n >= 1, got n={self.n}")
        if self.alpha <= -1.0:
            raise DomainError(f"need alpha > -1, got alpha={self.alpha}")
        if self.m is not None and self.m < self.n:
            raise DomainError(f"need m >= n, got n={self.n}, m={self.m}")

    @classmethod
    def from_dims(cls, n: int, m: int) -> "EnsembleParams":
        n, m = int(n), int(m)
        alpha = Fraction(2 * (m - n) - 1, 2)
        return cls(n=n, alpha=float(alpha), m=m, alpha_exact=alpha)

    @classmethod
    def from_alpha(cls, n: int, alpha: float) -> "EnsembleParams":
        """Relaxed parameterization alpha > -1; exact-track results unavailable."""
        n = int(n)
        alpha = float(alpha)
        alpha_exact = None
        # half-integer alphas re-enter the exact track
        if (2 * alpha) == round(2 * alpha):
            alpha_exact = Fraction(int(round(2 * alpha)), 2)
        return cls(n=n, alpha=alpha, m=None, alpha_exact=alpha_exact)

    @property
    def N(self) -> int:
        """Pfaffian dimension: n for even n, n+1 for odd n."""
        return self.n if self.n % 2 == 0 else self.n + 1

    @property
    def gamma_param(self) -> float:
        return (self.n - 1) * (self.n + 2.0 * self.alpha + 2.0) / 2.0

    @property
    def gamma_exact(self) -> Fraction:
        self._require_exact()
        return Fraction(self.n - 1) * (self.n + 2 * self.alpha_exact + 2) / 2

    @property
    def trace_power(self) -> float:
        """Exponent n(n+2*alpha+1)/2 = alpha + gamma + 1 in the Laplace relation."""
        return self.n * (self.n + 2.0 * self.alpha + 1.0) / 2.0

    @property
    def trace_power_exact(self) -> Fraction:
        self._require_exact()
        return Fraction(self.n) * (self.n + 2 * self.alpha_exact + 1) / 2

    @property
    def has_exact_track(self) -> bool:
        return self.alpha_exact is not None

    def _require_exact(self):
        if self.alpha_exact is None:
            raise ValueError("exact track requires half-integer alpha (integer m)")


@lru_cache(maxsize=None)
def log_normalization_C(params: EnsembleParams) -> float:
    """ln C for the unrestricted-trace eigenvalue density (C is positive)."""
    n, a = params.n, params.alpha
    out = (n * n + 2.0 * a * n) * math.log(2.0) - 0.5 * n * math.log(math.pi)
    for j in range(1, n + 1):
        out += _sp.gammaln(j + a + 0.5) - _sp.gammaln(j + 1) - _sp.gammaln(j + 2.0 * a + 1.0)
    return out


def normalization_C(params: EnsembleParams) -> float:
    return math.exp(log_normalization_C(params))


@lru_cache(maxsize=None)
def log_normalization_CF(params: EnsembleParams) -> float:
    """ln C^(F) for the fixed-trace density: C^(F) = Gamma(alpha+gamma+1) * C."""
    return float(_sp.gammaln(params.trace_power)) + log_normalization_C(params)


def normalization_CF(params: EnsembleParams) -> float:
    return math.exp(log_normalization_CF(params))


@lru_cache(maxsize=None)
def normalization_C_exact(params: EnsembleParams) -> ExactScalar:
    """Exact C; carries pi_half_power = -n."""
    params._require_exact()
    n, a = params.n, params.alpha_exact
    two_pow = n * n + 2 * a * n
    if two_pow.denominator != 1:
        raise ValueError("unexpected non-integer power of two")
    coef = Fraction(2) ** int(two_pow)
    for j in range(1, n + 1):
        num = gamma_exact(j + a + Fraction(1, 2))
        if num.pi_half_power != 0:
            raise ValueError("unexpected pi power in normalization product")
        coef *= num.const
        coef /= gamma_exact(j + 1).const * gamma_exact(j + 2 * a + 1).const
    return ExactScalar(-n, coef)


@lru_cache(maxsize=None)
def normalization_CF_exact(params: EnsembleParams) -> ExactScalar:
    return gamma_exact(params.trace_power_exact) * normalization_C_exact(params)


def kernel_f(params: EnsembleParams, j: int, lam: float) -> float:
    """Weight kernel f_j(x) = x^(j+alpha-1) e^(-x)."""
    if lam <= 0.0:
        raise DomainError(f"kernel_f requires lambda > 0, got {lam}")
    return math.exp((j + params.alpha - 1.0) * math.log(lam) - lam)


def kernel_g(x: float, y: float) -> float:
    """Antisymmetric two-point kernel g(x, y) = (y - x)/(y + x)."""
    if x + y == 0.0:
        raise DomainError("kernel_g undefined at x + y = 0")
    return (y - x) / (y + x)


def kernel_G(params: EnsembleParams, j: int, lam: float) -> float:
    """One-sided transform G_j(x) = int f_j(v) g(v, x) dv over v > 0.

    Closed form Gamma(j+alpha) * (2 x e^x E_(j+alpha)(x) - 1), computed with
    the exponentially scaled integral so e^x never overflows.
    """
    if lam <= 0.0:
        raise DomainError(f"kernel_G requires lambda > 0, got {lam}")
    a = j + params.alpha
    scaled = exp_integral_scaled(a, lam)
    return math.gamma(a) * (2.0 * lam * scaled - 1.0)


def log_jpd_unrestricted(params: EnsembleParams, lams) -> float:
    """Log of the normalized unrestricted joint eigenvalue density."""
    n, a = params.n, params.alpha
    if len(lams) != n:
        raise DomainError(f"expected {n} eigenvalues, got {len(lams)}")
    if any(x <= 0.0 for x in lams):
        return -math.inf
    out = log_normalization_C(params)
    for i in range(n):
        for k in range(i + 1, n):
            diff = abs(lams[k] - lams[i])
            if diff == 0.0:
                return -math.inf
            out += 2.0 * math.log(diff) - math.log(lams[k] + lams[i])
    for x in lams:
        out += a * math.log(x) - x
    return out
