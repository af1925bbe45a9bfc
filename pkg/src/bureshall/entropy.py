"""Average entropies of the fixed-trace ensemble and their verification.

The averages come out of the same Pfaffian-minor expansion as the level
density, with kernels eta (power-sum entropies) and xi (their derivative at
order one).  Everything with integer order on the exact track produces an
ExactScalar whose float value feeds the reports; the independent
unrestricted-density quadrature route cross-checks the sums, and the two
closed-form conjecture identities are verified in exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from scipy import special as _sp

from .density import unrestricted_moment
from .ensemble import EnsembleParams, log_normalization_C
from .exact import ExactScalar, digamma_exact, gamma_exact
from .pfaffian import log_pf_H_minor, pf_H_closed_exact, pf_H_minor_exact
from .specfun import DomainError

__all__ = [
    "EntropyReport",
    "IdentityCheck",
    "avg_hct",
    "avg_hct_exact",
    "avg_von_neumann",
    "avg_von_neumann_exact",
    "avg_purity",
    "avg_purity_exact",
    "hs_von_neumann",
    "hs_von_neumann_exact",
    "hs_purity",
    "hs_purity_exact",
    "conjecture_von_neumann",
    "conjecture_von_neumann_exact",
    "conjecture_purity",
    "conjecture_purity_exact",
    "purity_difference_exact",
    "verify_conjecture_identities",
    "avg_hct_via_unrestricted",
    "entropy_report",
]


# ---------------------------------------------------------------------------
# kernels (exact track)


def _eta_exact(params: EnsembleParams, j: int, k: int, omega: int) -> ExactScalar:
    a = params.alpha_exact
    coef = Fraction(j - k + omega) / (j + k + 2 * a + omega)
    return gamma_exact(j + a + omega) * gamma_exact(k + a) * coef


def _eta_border_exact(params: EnsembleParams, j: int, omega: int) -> ExactScalar:
    return -gamma_exact(j + params.alpha_exact + omega)


def _xi_exact(params: EnsembleParams, j: int, k: int) -> ExactScalar:
    a = params.alpha_exact
    coef = Fraction(j - k + 1) / (j + k + 2 * a + 1)
    pure = gamma_exact(j + a + 1) * gamma_exact(k + a) * coef
    return pure * digamma_exact(j + a + 1)


def _xi_border_exact(params: EnsembleParams, j: int) -> ExactScalar:
    a = params.alpha_exact
    return -(gamma_exact(j + a + 1) * digamma_exact(j + a + 1))


def _kernel_sum_exact(params: EnsembleParams, pair_fn, border_fn) -> ExactScalar:
    """sum over j<k of (-1)^(j+k) [K(j,k) - K(k,j)] Pf[H^(j,k)], exactly."""
    total = ExactScalar.zero()
    n, N = params.n, params.N
    for j in range(1, N):
        for k in range(j + 1, N + 1):
            if k <= n:
                bracket = pair_fn(params, j, k) - pair_fn(params, k, j)
            else:
                bracket = border_fn(params, j)
            term = bracket * pf_H_minor_exact(params, j, k)
            if (j + k) % 2:
                term = -term
            total = total + term
    return total


@lru_cache(maxsize=None)
def _inv_pf_h_exact(params: EnsembleParams) -> ExactScalar:
    # n! C = 1 / Pf[H]
    return ExactScalar.one() / pf_H_closed_exact(params)


# ---------------------------------------------------------------------------
# HCT entropy


@lru_cache(maxsize=None)
def avg_hct_exact(params: EnsembleParams, omega: int) -> ExactScalar:
    """Exact average power-sum entropy for integer order omega >= 2."""
    params._require_exact()
    omega = int(omega)
    if omega < 2:
        raise DomainError("exact track needs integer omega >= 2; use avg_von_neumann for omega=1")
    q = params.trace_power_exact  # alpha + gamma + 1
    s = _kernel_sum_exact(
        params, lambda p, j, k: _eta_exact(p, j, k, omega), lambda p, j: _eta_border_exact(p, j, omega)
    )
    # n! C^(F) / Gamma(alpha+gamma+omega+1) = n! C / ((q) (q+1) ... (q+omega-1))
    rising = Fraction(1)
    for t in range(omega):
        rising *= q + t
    pref = _inv_pf_h_exact(params) / rising
    return (ExactScalar.one() - pref * s) / (omega - 1)


def _hct_sum_float(params: EnsembleParams, omega: float) -> float:
    # float track of the normalized eta sum: n! C^(F) Sigma / Gamma(a+g+w+1)
    n, a, N = params.n, params.alpha, params.N
    log_pref = (
        float(_sp.gammaln(n + 1))
        + log_normalization_C(params)
        + float(_sp.gammaln(params.trace_power))
        - float(_sp.gammaln(params.trace_power + omega))
    )
    lgam = [float(_sp.gammaln(j + a)) for j in range(1, n + 1)]
    lgam_w = [float(_sp.gammaln(j + a + omega)) for j in range(1, n + 1)]

    def eta(jj, kk, logw):
        coef = (jj - kk + omega) / (jj + kk + 2.0 * a + omega)
        return coef * math.exp(lgam_w[jj - 1] + lgam[kk - 1] + log_pref + logw)

    total = 0.0
    for j in range(1, N):
        for k in range(j + 1, N + 1):
            sign = -1.0 if (j + k) % 2 else 1.0
            logw = log_pf_H_minor(params, j, k)
            if k <= n:
                total += sign * (eta(j, k, logw) - eta(k, j, logw))
            else:
                total -= sign * math.exp(lgam_w[j - 1] + log_pref + logw)
    return total


def avg_hct(params: EnsembleParams, omega: float) -> float:
    """Average HCT entropy <S_omega>; omega > 0, omega != 1."""
    if omega <= 0.0:
        raise DomainError(f"HCT order must be positive, got {omega}")
    if omega == 1.0:
        raise DomainError("omega=1 is the von Neumann limit; use avg_von_neumann")
    if params.has_exact_track and float(omega).is_integer() and omega >= 2:
        return avg_hct_exact(params, int(omega)).to_float()
    return (1.0 - _hct_sum_float(params, omega)) / (omega - 1.0)


def avg_hct_via_unrestricted(params: EnsembleParams, omega: float, rel_tol: float = 1e-8) -> float:
    """<S_omega> through the unrestricted-density moment (independent route).

    Raises if the two quadrature resolutions disagree beyond rel_tol.
    """
    if omega <= 0.0 or omega == 1.0:
        raise DomainError(f"need omega > 0, omega != 1, got {omega}")
    mom = unrestricted_moment(params, omega, npts=256)
    mom_lo = unrestricted_moment(params, omega, npts=192)
    err = abs(mom - mom_lo)
    if err > rel_tol * max(abs(mom), 1.0):
        raise ArithmeticError(
            f"unrestricted moment quadrature did not converge: estimate {mom}, error {err:.3e}"
        )
    ratio = math.exp(
        float(_sp.gammaln(params.trace_power)) - float(_sp.gammaln(params.trace_power + omega))
    )
    return (1.0 - ratio * mom) / (omega - 1.0)


# ---------------------------------------------------------------------------
# von Neumann entropy


@lru_cache(maxsize=None)
def avg_von_neumann_exact(params: EnsembleParams) -> ExactScalar:
    """Exact average von Neumann entropy of the fixed-trace ensemble."""
    params._require_exact()
    q = params.trace_power_exact
    pref = _inv_pf_h_exact(params) / q  # n! C^(F) / Gamma(q+1)
    # order-one normalization self-check: catches kernel-assembly sign errors
    s_eta1 = _kernel_sum_exact(
        params, lambda p, j, k: _eta_exact(p, j, k, 1), lambda p, j: _eta_border_exact(p, j, 1)
    )
    if not (pref * s_eta1 - ExactScalar.one()).is_zero:
        raise ArithmeticError("order-one kernel normalization failed; kernel assembly is wrong")
    s_xi = _kernel_sum_exact(params, _xi_exact, _xi_border_exact)
    out = digamma_exact(q + 1) - pref * s_xi
    if out.euler != 0 or out.pi_half_power != 0:
        raise ArithmeticError(f"euler-gamma/pi failed to cancel in <S_1>: {out.canonical()}")
    return out


def avg_von_neumann(params: EnsembleParams) -> float:
    """Average von Neumann entropy; float value derived from the exact track."""
    if params.has_exact_track:
        return avg_von_neumann_exact(params).to_float()
    eps = 1e-6
    return 0.5 * (avg_hct(params, 1.0 + eps) + avg_hct(params, 1.0 - eps))


# ---------------------------------------------------------------------------
# purity, linear entropy, Hilbert-Schmidt comparison, conjectures


def avg_purity_exact(params: EnsembleParams) -> ExactScalar:
    out = ExactScalar.one() - avg_hct_exact(params, 2)
    if not out.is_pure or out.pi_half_power != 0:
        raise ArithmeticError(f"average purity must be rational, got {out.canonical()}")
    return out


def avg_purity(params: EnsembleParams) -> float:
    if params.has_exact_track:
        return avg_purity_exact(params).to_float()
    return 1.0 - avg_hct(params, 2.0)


def hs_von_neumann_exact(n: int, m: int) -> ExactScalar:
    _check_dims(n, m)
    out = digamma_exact(m * n + 1) - digamma_exact(m + 1) - ExactScalar.from_rational(
        Fraction(n - 1, 2 * m)
    )
    return out


def hs_von_neumann(n: int, m: int) -> float:
    return hs_von_neumann_exact(n, m).to_float()


def hs_purity_exact(n: int, m: int) -> ExactScalar:
    _check_dims(n, m)
    return ExactScalar.from_rational(Fraction(m + n, m * n + 1))


def hs_purity(n: int, m: int) -> float:
    return hs_purity_exact(n, m).to_float()


def conjecture_von_neumann_exact(n: int, m: int) -> ExactScalar:
    """Conjectured closed form psi(mn - n^2/2 + 1) - psi(m + 1/2)."""
    _check_dims(n, m)
    return digamma_exact(Fraction(2 * m * n - n * n + 2, 2)) - digamma_exact(
        Fraction(2 * m + 1, 2)
    )


def conjecture_von_neumann(n: int, m: int) -> float:
    return conjecture_von_neumann_exact(n, m).to_float()


def conjecture_purity_exact(n: int, m: int) -> ExactScalar:
    """Conjectured closed form [2m(2m+n) - (n^2-1)] / [2m(2mn - n^2 + 2)]."""
    _check_dims(n, m)
    num = 2 * m * (2 * m + n) - (n * n - 1)
    den = 2 * m * (2 * m * n - n * n + 2)
    return ExactScalar.from_rational(Fraction(num, den))


def conjecture_purity(n: int, m: int) -> float:
    return conjecture_purity_exact(n, m).to_float()


def purity_difference_exact(n: int, m: int) -> ExactScalar:
    """Closed form of <S_P>_BH - <S_P>_HS (non-negative, zero only at n=1)."""
    _check_dims(n, m)
    num = (m * n - 1) * (n * n - 1)
    den = 2 * m * (m * n + 1) * (2 * m * n - n * n + 2)
    return ExactScalar.from_rational(Fraction(num, den))


def _check_dims(n: int, m: int):
    if not (1 <= n <= m):
        raise DomainError(f"need 1 <= n <= m, got n={n}, m={m}")


# ---------------------------------------------------------------------------
# conjecture verification


@dataclass(frozen=True)
class IdentityCheck:
    """Exact residuals of the two closed-form sum identities."""

    params: EnsembleParams
    vn_residual: ExactScalar
    purity_residual: ExactScalar

    @property
    def vn_ok(self) -> bool:
        return self.vn_residual.is_zero

    @property
    def purity_ok(self) -> bool:
        return self.purity_residual.is_zero

    @property
    def all_ok(self) -> bool:
        return self.vn_ok and self.purity_ok


def verify_conjecture_identities(
    params: EnsembleParams,
    xi_kernel=None,
    xi_border=None,
    eta_kernel=None,
    eta_border=None,
) -> IdentityCheck:
    """Check both conjecture-equivalent sum identities in exact arithmetic.

    The kernel arguments exist so tests can inject tampered kernels as a
    negative control; production callers leave them as None.
    """
    params._require_exact()
    if params.m is None:
        raise DomainError("identity verification needs integer dimensions (n, m)")
    n, m = params.n, params.m
    xi_kernel = xi_kernel if xi_kernel is not None else _xi_exact
    xi_border = xi_border if xi_border is not None else _xi_border_exact
    eta_kernel = eta_kernel if eta_kernel is not None else (
        lambda p, j, k: _eta_exact(p, j, k, 2)
    )
    eta_border = eta_border if eta_border is not None else (
        lambda p, j: _eta_border_exact(p, j, 2)
    )

    pf_h = pf_H_closed_exact(params)
    lhs_vn = _kernel_sum_exact(params, xi_kernel, xi_border)
    rhs_vn = pf_h * Fraction(n * (2 * m - n), 2) * digamma_exact(Fraction(2 * m + 1, 2))
    lhs_pur = _kernel_sum_exact(params, eta_kernel, eta_border)
    rhs_pur = pf_h * Fraction(
        n * (2 * m - n) * (2 * m * (2 * m + n) - (n * n - 1)), 8 * m
    )
    return IdentityCheck(
        params=params,
        vn_residual=lhs_vn - rhs_vn,
        purity_residual=lhs_pur - rhs_pur,
    )


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class EntropyReport:
    """One quantity for one (n, m) cell: both ensembles plus the conjecture."""

    params: EnsembleParams
    quantity: str  # "von_neumann" | "purity" | "linear" | "hct"
    omega: float | None
    bures_hall: float
    bures_hall_exact: ExactScalar | None
    hilbert_schmidt: float | None
    hilbert_schmidt_exact: ExactScalar | None
    conjecture_value: float | None
    conjecture_exact: ExactScalar | None
    difference: float | None

    @property
    def conjecture_matches(self) -> bool | None:
        if self.bures_hall_exact is None or self.conjecture_exact is None:
            return None
        return (self.bures_hall_exact - self.conjecture_exact).is_zero


def entropy_report(params: EnsembleParams, quantity: str, omega: float | None = None) -> EntropyReport:
    if params.m is None:
        raise DomainError("reports need integer dimensions (n, m)")
    n, m = params.n, params.m
    if quantity == "von_neumann":
        bh = avg_von_neumann_exact(params)
        hs = hs_von_neumann_exact(n, m)
        conj = conjecture_von_neumann_exact(n, m)
    elif quantity == "purity":
        bh = avg_purity_exact(params)
        hs = hs_purity_exact(n, m)
        conj = conjecture_purity_exact(n, m)
    elif quantity == "linear":
        bh = avg_hct_exact(params, 2)
        hs = ExactScalar.one() - hs_purity_exact(n, m)
        conj = ExactScalar.one() - conjecture_purity_exact(n, m)
    elif quantity == "hct":
        if omega is None:
            raise DomainError("hct report needs omega")
        if float(omega).is_integer() and omega >= 2:
            bh = avg_hct_exact(params, int(omega))
        else:
            bh = None
        hs = conj = None
    else:
        raise DomainError(f"unknown quantity {quantity!r}")

    bh_float = bh.to_float() if bh is not None else avg_hct(params, float(omega))
    hs_float = hs.to_float() if hs is not None else None
    conj_float = conj.to_float() if conj is not None else None
    return EntropyReport(
        params=params,
        quantity=quantity,
        omega=omega,
        bures_hall=bh_float,
        bures_hall_exact=bh,
        hilbert_schmidt=hs_float,
        hilbert_schmidt_exact=hs,
        conjecture_value=conj_float,
        conjecture_exact=conj,
        difference=(bh_float - hs_float) if hs_float is not None else None,
    )
