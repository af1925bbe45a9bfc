"""Analytic spectral densities and correlation functions.

Level density of the unrestricted-trace ensemble through the Pfaffian-minor
expansion, the fixed-trace level density through its inverse-Laplace closed
form, and r-point correlations through the block-Pfaffian representation.

The expansion weights (normalization times Pfaffian minors times gamma
factors) are assembled in exact arithmetic and rounded once, so each term
carries only a couple of ulps of error; the alternating sums then lose
digits only to genuine cancellation, which a monitor redirects to 30-digit
arithmetic.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp
import numpy as np
from scipy import special as _sp

from .ensemble import (
    EnsembleParams,
    kernel_f,
    kernel_g,
    kernel_G,
    log_normalization_C,
)
from .exact import ExactScalar, gamma_exact
from .pfaffian import (
    build_H,
    log_pf_H,
    log_pf_H_minor,
    pf_H_closed_exact,
    pf_H_minor_exact,
    pfaffian_generic,
)
from .specfun import DomainError, exp_integral_scaled, inc_beta

__all__ = [
    "DensityCurve",
    "UnsupportedParamsError",
    "level_density_unrestricted",
    "level_density_fixed",
    "correlation_unrestricted",
    "tabulate_density",
    "unrestricted_moment",
    "fixed_moment",
    "default_cutoff",
]

_CANCEL_LIMIT = 1e6
_MP_DPS = 30


class UnsupportedParamsError(ValueError):
    """Raised where a formula degenerates (n=1 fixed trace is a point mass at 1)."""


def default_cutoff(params: EnsembleParams) -> float:
    """Eigenvalue cutoff n + 2*alpha + 10*sqrt(n); the density beyond is negligible."""
    return params.n + 2.0 * params.alpha + 10.0 * math.sqrt(params.n)


def _pairs(params: EnsembleParams):
    for j in range(1, params.N):
        for k in range(j + 1, params.N + 1):
            yield j, k, (-1.0 if (j + k) % 2 else 1.0)


def _to_finite_float(s: ExactScalar) -> float | None:
    try:
        v = s.to_float()
    except OverflowError:
        return None
    if v == 0.0 or math.isinf(v):
        return None
    return v


@lru_cache(maxsize=None)
def _minor_weight_exact(params: EnsembleParams, j: int, k: int) -> ExactScalar:
    # n! C Pf[H^(j,k)] = Pf[H^(j,k)] / Pf[H]
    return pf_H_minor_exact(params, j, k) / pf_H_closed_exact(params)


def _minor_weight(params: EnsembleParams, j: int, k: int) -> float:
    if params.has_exact_track:
        v = _to_finite_float(_minor_weight_exact(params, j, k))
        if v is not None:
            return v
    return math.exp(
        float(_sp.gammaln(params.n + 1))
        + log_normalization_C(params)
        + log_pf_H_minor(params, j, k)
    )


@lru_cache(maxsize=None)
def _unres_weights(params: EnsembleParams):
    """Per pair (j, k): sign and weights w, w*Gamma(k+a), w*Gamma(j+a)."""
    n, a = params.n, params.alpha
    out = []
    for j, k, sign, in _pairs(params):
        w = _minor_weight(params, j, k)
        if k <= n:
            if params.has_exact_track:
                ae = params.alpha_exact
                we = _minor_weight_exact(params, j, k)
                wgk = _to_finite_float(we * gamma_exact(k + ae))
                wgj = _to_finite_float(we * gamma_exact(j + ae))
            else:
                wgk = wgj = None
            if wgk is None:
                wgk = w * math.gamma(k + a)
            if wgj is None:
                wgj = w * math.gamma(j + a)
            out.append((j, k, sign, w, wgk, wgj))
        else:
            out.append((j, k, sign, w, 0.0, 0.0))
    return tuple(out)


def level_density_unrestricted(params: EnsembleParams, lam: float) -> float:
    """One-point correlation R_1 of the unrestricted-trace ensemble."""
    if lam <= 0.0:
        raise DomainError(f"level density requires lambda > 0, got {lam}")
    n, a = params.n, params.alpha
    expml = math.exp(-lam)
    fpow = [math.pow(lam, j + a - 1.0) * expml for j in range(1, n + 1)]
    bracket = [2.0 * lam * exp_integral_scaled(j + a, lam) - 1.0 for j in range(1, n + 1)]
    total = 0.0
    for j, k, sign, w, wgk, wgj in _unres_weights(params):
        if k <= n:
            total += sign * (wgk * fpow[j - 1] * bracket[k - 1] - wgj * fpow[k - 1] * bracket[j - 1])
        else:
            total -= sign * w * fpow[j - 1]
    return total


@lru_cache(maxsize=None)
def _fixed_weights(params: EnsembleParams):
    """Coefficient tables of the fixed-trace expansion.

    ca[(j,k)] multiplies 2 mu^(j+k+2a-1) B_(1-mu)(gam-j, 1-k-a); cb[(j,k)]
    multiplies mu^(j+a-1) (1-mu)^(gam-j); border[j] multiplies the same
    border monomial.  All carry n! C^(F) Pf[H^(j,k)] with their gamma
    factors folded in.
    """
    n, a = params.n, params.alpha
    gam = params.gamma_param
    ca: dict[tuple[int, int], float] = {}
    cb: dict[tuple[int, int], float] = {}
    border: dict[int, float] = {}

    def build_exact():
        ae = params.alpha_exact
        game = params.gamma_exact
        trace_g = gamma_exact(params.trace_power_exact)
        for j, k, _sign in _pairs(params):
            we = _minor_weight_exact(params, j, k) * trace_g
            orientations = ((j, k), (k, j)) if k <= n else ()
            for jj, kk in orientations:
                base = we * gamma_exact(kk + ae)
                va = _to_finite_float(base / gamma_exact(game - jj))
                vb = _to_finite_float(base / gamma_exact(game - jj + 1))
                if va is None or vb is None:
                    raise OverflowError
                ca[(jj, kk)] = va
                cb[(jj, kk)] = vb
            if k > n:
                vb = _to_finite_float(we / gamma_exact(game - j + 1))
                if vb is None:
                    raise OverflowError
                border[j] = vb

    def build_float():
        lg_trace = float(_sp.gammaln(params.trace_power))
        for j, k, _sign in _pairs(params):
            logw = (
                float(_sp.gammaln(n + 1))
                + log_normalization_C(params)
                + log_pf_H_minor(params, j, k)
                + lg_trace
            )
            orientations = ((j, k), (k, j)) if k <= n else ()
            for jj, kk in orientations:
                base = logw + float(_sp.gammaln(kk + a))
                sa, la = _signed_rgamma_log(gam - jj)
                sb, lb = _signed_rgamma_log(gam - jj + 1.0)
                ca[(jj, kk)] = sa * math.exp(base + la) if sa else 0.0
                cb[(jj, kk)] = sb * math.exp(base + lb) if sb else 0.0
            if k > n:
                sb, lb = _signed_rgamma_log(gam - j + 1.0)
                border[j] = sb * math.exp(logw + lb) if sb else 0.0

    if params.has_exact_track:
        try:
            build_exact()
        except (OverflowError, ValueError):
            ca.clear(), cb.clear(), border.clear()
            build_float()
    else:
        build_float()
    return ca, cb, border


def _signed_rgamma_log(x: float) -> tuple[int, float]:
    # (sign, log) of 1/Gamma(x); poles contribute an exact zero
    if x <= 0.0 and x == math.floor(x):
        return 0, -math.inf
    return int(_sp.gammasgn(x)), -float(_sp.gammaln(x))


def _fixed_terms(params: EnsembleParams, mu: float) -> list[float]:
    n, a = params.n, params.alpha
    gam = params.gamma_param
    ca, cb, border = _fixed_weights(params)
    one_m = 1.0 - mu
    mupow = [math.pow(mu, j + a - 1.0) for j in range(1, n + 1)]
    compow = [math.pow(one_m, gam - j) for j in range(1, n + 1)]
    terms = []
    for j, k, sign in _pairs(params):
        if k <= n:
            for jj, kk, s in ((j, k, sign), (k, j, -sign)):
                c1 = ca[(jj, kk)]
                if c1 != 0.0:
                    bc = inc_beta(gam - jj, 1.0 - kk - a, one_m)
                    terms.append(s * 2.0 * c1 * math.pow(mu, jj + kk + 2.0 * a - 1.0) * bc)
                c2 = cb[(jj, kk)]
                if c2 != 0.0:
                    terms.append(-s * c2 * mupow[jj - 1] * compow[jj - 1])
        else:
            c3 = border.get(j, 0.0)
            if c3 != 0.0:
                terms.append(-sign * c3 * mupow[j - 1] * compow[j - 1])
    return terms


def _level_density_fixed_mp(params: EnsembleParams, mu: float) -> float:
    # 30-digit evaluation used when the float track cancels catastrophically.
    n, N = params.n, params.N
    with mp.workdps(_MP_DPS):
        a = mp.mpf(params.alpha)
        gam = (n - 1) * (n + 2 * a + 2) / 2
        x = mp.mpf(mu)
        c = mp.power(2, n * n + 2 * a * n) / mp.pi ** mp.mpf(0.5 * n)
        for j in range(1, n + 1):
            c *= mp.gamma(j + a + mp.mpf(1) / 2) / (mp.gamma(j + 1) * mp.gamma(j + 2 * a + 1))
        cf = mp.gamma(n * (n + 2 * a + 1) / 2) * c

        def minor(j, k):
            idx = [l for l in range(1, n + 1) if l not in (j, k)]
            out = mp.mpf(1)
            for p, r in enumerate(idx):
                for s in idx[p + 1 :]:
                    out *= mp.mpf(s - r) / (r + s + 2 * a)
            for l in idx:
                out *= mp.gamma(l + a)
            return out

        def psi_jk(j, k):
            t3 = (1 - x) ** (gam - j) / mp.gamma(gam - j + 1)
            bc = mp.betainc(gam - j, 1 - k - a, 0, 1 - x)
            t12 = 2 * x ** (k + a) * bc / mp.gamma(gam - j)
            return mp.gamma(k + a) * x ** (j + a - 1) * (t12 - t3)

        total = mp.mpf(0)
        for j in range(1, N):
            for k in range(j + 1, N + 1):
                sign = -1 if (j + k) % 2 else 1
                if k <= n:
                    bracket = psi_jk(j, k) - psi_jk(k, j)
                else:
                    bracket = -(x ** (j + a - 1)) * (1 - x) ** (gam - j) / mp.gamma(gam - j + 1)
                total += sign * bracket * minor(j, k)
        total *= mp.factorial(n) * cf
        return float(total)


def level_density_fixed(params: EnsembleParams, mu: float) -> float:
    """One-point correlation R_1^(F) of the fixed-trace ensemble on (0, 1)."""
    if params.n == 1:
        raise UnsupportedParamsError(
            "n=1 fixed-trace spectrum is a unit point mass at mu=1; no density exists"
        )
    if not 0.0 < mu < 1.0:
        raise DomainError(f"fixed-trace density requires 0 < mu < 1, got {mu}")
    terms = _fixed_terms(params, mu)
    total = math.fsum(terms)
    peak = max(abs(t) for t in terms)
    if peak > _CANCEL_LIMIT * max(abs(total), 1e-300):
        return _level_density_fixed_mp(params, mu)
    return total


def correlation_unrestricted(params: EnsembleParams, points) -> float:
    """r-point correlation function R_r of the unrestricted ensemble.

    Assembled as the Pfaffian of the (N+2r)-dimensional block matrix with
    kernel blocks F, G, g and moment block H.
    """
    pts = [float(x) for x in points]
    r = len(pts)
    if r < 1:
        raise DomainError("need at least one evaluation point")
    if any(x <= 0.0 for x in pts):
        raise DomainError("correlation points must be positive")
    if len(set(pts)) != r:
        raise DomainError("correlation points must be pairwise distinct")
    n, N = params.n, params.N
    dim = N + 2 * r
    m = np.zeros((dim, dim))

    def f_val(j, lam):
        return 0.0 if j == n + 1 else kernel_f(params, j, lam)

    def g_val(j, lam):
        return -1.0 if j == n + 1 else kernel_G(params, j, lam)

    for i, lam in enumerate(pts):
        for k in range(1, N + 1):
            m[i, 2 * r + k - 1] = f_val(k, lam)
            m[r + i, 2 * r + k - 1] = g_val(k, lam)
            m[2 * r + k - 1, i] = -m[i, 2 * r + k - 1]
            m[2 * r + k - 1, r + i] = -m[r + i, 2 * r + k - 1]
    for i, li in enumerate(pts):
        for i2, lk in enumerate(pts):
            if i != i2:
                m[r + i, r + i2] = kernel_g(li, lk)
    m[2 * r :, 2 * r :] = build_H(params)

    pf = pfaffian_generic(m)
    if pf == 0.0:
        return 0.0
    prefactor_log = float(_sp.gammaln(n + 1)) + log_normalization_C(params)
    sign = -1.0 if (r * (r - 1) // 2) % 2 else 1.0
    return sign * math.copysign(1.0, pf) * math.exp(prefactor_log + math.log(abs(pf)))


# ---------------------------------------------------------------------------
# moments by quadrature on singularity-removing substitutions


@lru_cache(maxsize=None)
def _gl_nodes(npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return x, w


@lru_cache(maxsize=None)
def _fixed_quad_table(params: EnsembleParams, npts: int = 256):
    # mu = sin^2(theta) removes both endpoint singularities exactly
    x, w = _gl_nodes(npts)
    theta = 0.25 * math.pi * (x + 1.0)
    wt = 0.25 * math.pi * w
    mus = np.sin(theta) ** 2
    jac = np.sin(2.0 * theta)
    dens = np.array([level_density_fixed(params, float(u)) for u in mus])
    return mus, wt * jac * dens


@lru_cache(maxsize=None)
def _unres_quad_table(params: EnsembleParams, npts: int = 256):
    # lambda = u^2 removes the lambda^alpha endpoint singularity
    upper = math.sqrt(default_cutoff(params) + 40.0)
    x, w = _gl_nodes(npts)
    u = 0.5 * upper * (x + 1.0)
    wt = 0.5 * upper * w
    lams = u**2
    dens = np.array([level_density_unrestricted(params, float(l)) for l in lams])
    return lams, wt * 2.0 * u * dens


def fixed_moment(params: EnsembleParams, power: float = 0.0, npts: int = 256) -> float:
    """int_0^1 mu^power R_1^(F)(mu) dmu by endpoint-aware Gauss quadrature."""
    mus, wd = _fixed_quad_table(params, npts)
    if power == 0.0:
        return float(np.sum(wd))
    return float(np.sum(wd * mus**power))


def unrestricted_moment(params: EnsembleParams, power: float = 0.0, npts: int = 256) -> float:
    """int_0^inf lambda^power R_1(lambda) dlambda by Gauss quadrature."""
    lams, wd = _unres_quad_table(params, npts)
    if power == 0.0:
        return float(np.sum(wd))
    return float(np.sum(wd * lams**power))


# ---------------------------------------------------------------------------
# curve tabulation


@dataclass(frozen=True)
class DensityCurve:
    """Sampled R_1 curve with its quadrature mass as metadata.

    `values` holds the raw R_1 evaluations (tiny negative excursions from
    cancellation are kept); `rows()` clamps them for export and adds the
    marginal column R_1/n.
    """

    ensemble: str
    params: EnsembleParams
    xs: np.ndarray
    values: np.ndarray
    marginal: bool
    normalization: float

    @property
    def marginal_normalization(self) -> float:
        return self.normalization / self.params.n

    def rows(self):
        clamped = np.where(self.values < 0.0, 0.0, self.values)
        marg = clamped / self.params.n
        return zip(self.xs.tolist(), clamped.tolist(), marg.tolist())


def _thread_count() -> int:
    raw = os.environ.get("BURESHALL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _evaluate_grid(fn, xs):
    workers = _thread_count()
    if workers == 1:
        return np.array([fn(float(x)) for x in xs])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(fn, [float(x) for x in xs])))


def tabulate_density(
    params: EnsembleParams,
    ensemble: str,
    points: int = 512,
    marginal: bool = False,
    grid=None,
) -> DensityCurve:
    """Evaluate a density on a default or explicit grid.

    Fixed-trace grids are Chebyshev-spaced on (0, 1) to resolve the endpoint
    behavior; unrestricted grids are midpoints on (0, cutoff).  The recorded
    normalization comes from the quadrature routines, not from the grid.
    """
    if ensemble not in ("unrestricted", "fixed_trace"):
        raise DomainError(f"unknown ensemble tag {ensemble!r}")
    if grid is None:
        if points < 2:
            raise DomainError("need at least 2 grid points")
        if ensemble == "fixed_trace":
            ks = np.arange(1, points + 1)
            xs = np.sin(0.5 * math.pi * ks / (points + 1)) ** 2
        else:
            cutoff = default_cutoff(params)
            xs = (np.arange(points) + 0.5) * cutoff / points
    else:
        xs = np.asarray(grid, dtype=float)
        if xs.size < 2 or np.any(np.diff(xs) <= 0.0):
            raise DomainError("explicit grid must be >= 2 strictly increasing points")

    if ensemble == "fixed_trace":
        if np.any(xs <= 0.0) or np.any(xs >= 1.0):
            raise DomainError("fixed-trace grid must lie inside (0, 1)")
        values = _evaluate_grid(lambda u: level_density_fixed(params, u), xs)
        mass = fixed_moment(params, 0.0)
    else:
        if np.any(xs <= 0.0):
            raise DomainError("unrestricted grid must be positive")
        values = _evaluate_grid(lambda u: level_density_unrestricted(params, u), xs)
        mass = unrestricted_moment(params, 0.0)

    return DensityCurve(
        ensemble=ensemble,
        params=params,
        xs=xs,
        values=values,
        marginal=marginal,
        normalization=mass,
    )
