"""Pfaffian evaluation: a generic O(N^3) elimination algorithm for float
matrices, a division-free expansion for exact entries, and the closed-form
products for the kernel moment matrix H and its minors.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from .ensemble import EnsembleParams
from .exact import ExactScalar, gamma_exact
from .specfun import DomainError

__all__ = [
    "pfaffian_generic",
    "build_H",
    "build_H_exact",
    "pf_H_closed",
    "pf_H_closed_exact",
    "pf_H_minor",
    "pf_H_minor_exact",
    "log_pf_H",
    "log_pf_H_minor",
]


def _check_skew_float(a: np.ndarray, tol: float) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("pfaffian requires a square matrix")
    if a.shape[0] % 2 != 0:
        raise DomainError(f"pfaffian requires even dimension, got {a.shape[0]}")
    scale = np.abs(a).max() if a.size else 0.0
    if a.size and np.abs(a + a.T).max() > tol * max(scale, 1.0):
        raise DomainError("matrix is not skew-symmetric within tolerance")


def _pfaffian_ltl(a: np.ndarray) -> float:
    # Parlett-Reid skew-symmetric elimination with partial pivoting, after
    # exact power-of-two equilibration (entries of the kernel moment matrix
    # span many orders of magnitude and would otherwise cost ~4 digits).
    # Extended precision buys back the digits lost when the Pfaffian is many
    # orders of magnitude below the entries (the kernel moment matrix at
    # n=m=8 amplifies roundoff by ~5e7); power-of-two equilibration keeps
    # pivots well scaled and is exact.
    a = np.array(a, dtype=np.longdouble)
    dim = a.shape[0]
    row_max = np.abs(a).max(axis=1)
    exps = np.round(0.5 * np.log2(np.where(row_max > 0.0, row_max, 1.0)).astype(float)).astype(int)
    a *= np.exp2(-exps.astype(np.longdouble))[:, None]
    a *= np.exp2(-exps.astype(np.longdouble))[None, :]
    pf = np.longdouble(1.0)
    for k in range(0, dim - 1, 2):
        pivot = k + 1 + int(np.argmax(np.abs(a[k + 1 :, k])))
        if pivot != k + 1:
            a[[k + 1, pivot], :] = a[[pivot, k + 1], :]
            a[:, [k + 1, pivot]] = a[:, [pivot, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0.0:
            return 0.0
        pf *= a[k, k + 1]
        if k + 2 < dim:
            tau = a[k, k + 2 :] / a[k, k + 1]
            col = a[k + 2 :, k + 1]
            a[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    return math.ldexp(float(pf), int(exps.sum()))


def _pfaffian_expand(rows) -> object:
    # Division-free Laplace-type expansion over pairings; exponential but
    # the exact track only meets dimensions up to ~12.
    dim = len(rows)
    memo: dict[tuple[int, ...], object] = {}

    def rec(idx: tuple[int, ...]):
        if not idx:
            return None  # multiplicative identity marker
        if idx in memo:
            return memo[idx]
        first = idx[0]
        acc = None
        for pos in range(1, len(idx)):
            entry = rows[first][idx[pos]]
            sub = rec(idx[:pos][1:] + idx[pos + 1 :])
            contrib = entry if sub is None else entry * sub
            if pos % 2 == 0:
                contrib = -contrib
            acc = contrib if acc is None else acc + contrib
        memo[idx] = acc
        return acc

    return rec(tuple(range(dim)))


def pfaffian_generic(a, tol: float = 1e-12):
    """Pfaffian of a skew-symmetric matrix.

    Float arrays go through Parlett-Reid elimination; anything else (exact
    scalars, Fractions) through a division-free expansion.  Pf[A]^2 = det[A];
    the empty matrix gives 1.
    """
    if isinstance(a, np.ndarray) and a.dtype != object:
        _check_skew_float(a, tol)
        if a.shape[0] == 0:
            return 1.0
        return _pfaffian_ltl(a)
    rows = [list(r) for r in a]
    dim = len(rows)
    if any(len(r) != dim for r in rows):
        raise DomainError("pfaffian requires a square matrix")
    if dim % 2 != 0:
        raise DomainError(f"pfaffian requires even dimension, got {dim}")
    if dim == 0:
        return 1
    out = _pfaffian_expand(rows)
    return out


_SQRT_PI_LONG = np.sqrt(np.longdouble("3.141592653589793238462643383279502884"))


def _fraction_to_longdouble(fr: Fraction) -> np.longdouble:
    # double-double split keeps ~106 bits before the final rounding
    hi = float(fr)
    lo = float(fr - Fraction(hi))
    return np.longdouble(hi) + np.longdouble(lo)


def _exact_to_longdouble(s: ExactScalar) -> np.longdouble:
    if not s.is_pure:
        raise ValueError("only pure scalars convert to longdouble")
    return _fraction_to_longdouble(s.const) * _SQRT_PI_LONG ** s.pi_half_power


def build_H(params: EnsembleParams) -> np.ndarray:
    """Kernel moment matrix H_(j,k) = (k-j)/(j+k+2*alpha) Gamma(j+a)Gamma(k+a).

    For odd n the matrix is bordered by a row/column of Gamma(j+alpha) so the
    dimension N is always even.  With half-integer alpha the entries are
    produced in extended precision from their exact values: the Pfaffian
    amplifies entry roundoff by ~1e7 at n=m=8, so double-precision entries
    would already cost more digits than the elimination itself.
    """
    n, a, N = params.n, params.alpha, params.N
    h = np.zeros((N, N), dtype=np.longdouble)
    if params.has_exact_track:
        ae = params.alpha_exact
        gam = [_exact_to_longdouble(gamma_exact(j + ae)) for j in range(1, n + 1)]
        coef = lambda j, k: _fraction_to_longdouble(Fraction(k - j) / (j + k + 2 * ae))
    else:
        gam = [np.longdouble(math.gamma(j + a)) for j in range(1, n + 1)]
        coef = lambda j, k: np.longdouble(k - j) / np.longdouble(j + k + 2.0 * a)
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            h[j - 1, k - 1] = coef(j, k) * gam[j - 1] * gam[k - 1]
            h[k - 1, j - 1] = -h[j - 1, k - 1]
    if N == n + 1:
        for j in range(1, n + 1):
            h[j - 1, N - 1] = gam[j - 1]
            h[N - 1, j - 1] = -gam[j - 1]
    return h


def build_H_exact(params: EnsembleParams) -> list[list[ExactScalar]]:
    """Exact-track moment matrix (entries rational * powers of sqrt(pi))."""
    params._require_exact()
    n, a, N = params.n, params.alpha_exact, params.N
    zero = ExactScalar.zero()
    h = [[zero for _ in range(N)] for _ in range(N)]
    gam = [gamma_exact(j + a) for j in range(1, n + 1)]
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            coef = Fraction(k - j) / (j + k + 2 * a)
            val = gam[j - 1] * gam[k - 1] * coef
            h[j - 1][k - 1] = val
            h[k - 1][j - 1] = -val
    if N == n + 1:
        for j in range(1, n + 1):
            h[j - 1][N - 1] = gam[j - 1]
            h[N - 1][j - 1] = -gam[j - 1]
    return h


def _surviving_indices(params: EnsembleParams, j: int, k: int) -> list[int]:
    if not (1 <= j < k <= params.N):
        raise DomainError(f"minor indices need 1 <= j < k <= N={params.N}, got ({j}, {k})")
    return [l for l in range(1, params.n + 1) if l != j and l != k]


@lru_cache(maxsize=None)
def log_pf_H(params: EnsembleParams) -> float:
    """ln Pf[H] (always positive for alpha > -1)."""
    return _log_restricted_product(params, tuple(range(1, params.n + 1)))


@lru_cache(maxsize=None)
def log_pf_H_minor(params: EnsembleParams, j: int, k: int) -> float:
    """ln Pf[H^(j,k)] where rows/columns j and k are removed."""
    return _log_restricted_product(params, tuple(_surviving_indices(params, j, k)))


def _log_restricted_product(params: EnsembleParams, idx: tuple[int, ...]) -> float:
    a = params.alpha
    out = 0.0
    for l in idx:
        out += float(_sp.gammaln(l + a))
    for p, r in enumerate(idx):
        for s in idx[p + 1 :]:
            out += math.log(s - r) - math.log(r + s + 2.0 * a)
    return out


def pf_H_closed(params: EnsembleParams) -> float:
    """Closed-form Pf[H]; equals 1/(n! C)."""
    return math.exp(log_pf_H(params))


def pf_H_minor(params: EnsembleParams, j: int, k: int) -> float:
    """Closed-form Pf of the minor with rows/columns j, k removed."""
    return math.exp(log_pf_H_minor(params, j, k))


def _restricted_product_exact(params: EnsembleParams, idx: tuple[int, ...]) -> ExactScalar:
    params._require_exact()
    a = params.alpha_exact
    coef = Fraction(1)
    for p, r in enumerate(idx):
        for s in idx[p + 1 :]:
            coef *= Fraction(s - r) / (r + s + 2 * a)
    out = ExactScalar.from_rational(coef)
    for l in idx:
        out = out * gamma_exact(l + a)
    return out


@lru_cache(maxsize=None)
def pf_H_closed_exact(params: EnsembleParams) -> ExactScalar:
    return _restricted_product_exact(params, tuple(range(1, params.n + 1)))


@lru_cache(maxsize=None)
def pf_H_minor_exact(params: EnsembleParams, j: int, k: int) -> ExactScalar:
    return _restricted_product_exact(params, tuple(_surviving_indices(params, j, k)))
