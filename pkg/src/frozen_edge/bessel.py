"""Bessel functions J_alpha of real order alpha > -1, their zeros, and the
hard-edge limit functions and limit covariances built from them.

J_alpha(z) uses the power series for z < 12 and Miller's backward recurrence,
normalised by (z/2)^alpha = sum_m c_m J_{alpha+2m}(z), for z >= 12.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from . import _jit
from .errors import BracketingError, DomainError
from .params import EnsembleParams, Family
from .quadrature import QuadResult, integrate_graded

SWITCH = 12.0
RESCALE = 1e250


# -- double-double helpers (work on floats and, elementwise, on arrays) ------

def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    c = 134217729.0 * a
    ah = c - (c - a)
    al = a - ah
    c = 134217729.0 * b
    bh = c - (c - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(ah, al, bh, bl):
    s = ah + bh
    bb = s - ah
    e = (ah - (s - bb)) + (bh - bb) + al + bl
    hi = s + e
    return hi, e - (hi - s)


def _dd_mul(ah, al, bh, bl):
    p = ah * bh
    c = 134217729.0 * ah
    xh = c - (c - ah)
    xl = ah - xh
    c = 134217729.0 * bh
    yh = c - (c - bh)
    yl = bh - yh
    e = ((xh * yh - p) + xh * yl + xl * yh) + xl * yl
    e = e + ah * bl + al * bh
    hi = p + e
    return hi, e - (hi - p)


def _dd_div(ah, al, bh, bl):
    # one correction step: q = a/b + (a - q1 b)/b
    q1 = ah / bh
    p = q1 * bh
    c = 134217729.0 * q1
    xh = c - (c - q1)
    xl = q1 - xh
    c = 134217729.0 * bh
    yh = c - (c - bh)
    yl = bh - yh
    pe = ((xh * yh - p) + xh * yl + xl * yh) + xl * yl + q1 * bl
    r = ((ah - p) - pe) + al
    q2 = r / bh
    hi = q1 + q2
    return hi, q2 - (hi - q1)


_two_sum_nb = _jit.njit(_two_sum)
_two_prod_nb = _jit.njit(_two_prod)
_dd_add_nb = _jit.njit(_dd_add)
_dd_mul_nb = _jit.njit(_dd_mul)
_dd_div_nb = _jit.njit(_dd_div)


# -- scalar kernels (compiled by numba when available) ---------------------

SERIES_CUTOFF = 1e-22


def _series_impl(alpha, z):
    # Returns (J_alpha, J'_alpha). The term ratios and both partial sums are
    # carried in double-double so cancellation near z = 12 costs nothing.
    if z == 0.0:
        if alpha == 0.0:
            return 1.0, 0.0
        if alpha > 0.0:
            d = 0.0
            if alpha == 1.0:
                d = 0.5
            elif alpha < 1.0:
                d = math.inf
            return 0.0, d
        return math.inf, -math.inf
    h = 0.5 * z
    qh, ql = _two_prod_nb(h, h)
    qh, ql = -qh, -ql
    t0 = math.exp(alpha * math.log(h) - math.lgamma(alpha + 1.0))
    rh, rl = 1.0, 0.0
    sh, sl = 1.0, 0.0
    dh, dl = _two_sum_nb(0.0, alpha)
    rmax = 1.0
    m = 0
    while True:
        m += 1
        eh, el = _two_sum_nb(float(m), alpha)
        eh, el = _dd_mul_nb(eh, el, float(m), 0.0)
        fh, fl = _dd_div_nb(qh, ql, eh, el)
        rh, rl = _dd_mul_nb(rh, rl, fh, fl)
        sh, sl = _dd_add_nb(sh, sl, rh, rl)
        ch, cl = _two_sum_nb(2.0 * m, alpha)
        ch, cl = _dd_mul_nb(ch, cl, rh, rl)
        dh, dl = _dd_add_nb(dh, dl, ch, cl)
        rmax = max(rmax, abs(rh))
        # past the peak term the series decays super-exponentially
        if (m > h and abs(rh) <= SERIES_CUTOFF * rmax) or m > 400:
            break
    return t0 * (sh + sl), t0 * (dh + dl) / z


_series = _jit.njit(_series_impl)


def _miller_impl(alpha, z):
    # Returns (J_alpha, J_{alpha+1}) for z >= SWITCH by backward recurrence.
    top = int(z + 25.0 + math.sqrt(40.0 * z))
    top += top % 2
    half = top // 2
    # c_m for sum_m c_m J_{alpha+2m} = (z/2)^alpha
    c = np.empty(half + 1)
    c[0] = math.gamma(alpha + 1.0)
    g = c[0]
    for m in range(1, half + 1):
        if m > 1:
            g *= (alpha + m - 1) / m
        c[m] = (alpha + 2 * m) * g
    j_next = 0.0
    j_cur = 1e-300
    norm = 0.0
    j_one = 0.0
    for k in range(top, 0, -1):
        # j_cur holds the unnormalised J_{alpha+k}
        if k % 2 == 0:
            norm += c[k // 2] * j_cur
        if k == 1:
            j_one = j_cur
        j_prev = 2.0 * (alpha + k) / z * j_cur - j_next
        j_next = j_cur
        j_cur = j_prev
        if abs(j_cur) > RESCALE:
            j_cur /= RESCALE
            j_next /= RESCALE
            norm /= RESCALE
            j_one /= RESCALE
    norm += c[0] * j_cur
    scale = math.exp(alpha * math.log(0.5 * z)) / norm
    return j_cur * scale, j_one * scale


_miller = _jit.njit(_miller_impl)


def _jv_scalar_impl(alpha, z):
    if z < SWITCH:
        return _series(alpha, z)[0]
    return _miller(alpha, z)[0]


def _jvp_scalar_impl(alpha, z):
    if z < SWITCH:
        return _series(alpha, z)[1]
    v, v1 = _miller(alpha, z)
    return alpha / z * v - v1


def _jv_vec_numba_impl(alpha, z):
    out = np.empty(z.shape[0])
    for i in range(z.shape[0]):
        if z[i] < SWITCH:
            out[i] = _series(alpha, z[i])[0]
        else:
            out[i] = _miller(alpha, z[i])[0]
    return out


def _jvp_vec_numba_impl(alpha, z):
    out = np.empty(z.shape[0])
    for i in range(z.shape[0]):
        if z[i] < SWITCH:
            out[i] = _series(alpha, z[i])[1]
        else:
            v, v1 = _miller(alpha, z[i])
            out[i] = alpha / z[i] * v - v1
    return out


_jv_vec_numba = _jit.njit(_jv_vec_numba_impl)
_jvp_vec_numba = _jit.njit(_jvp_vec_numba_impl)


# -- vectorised numpy fallback ----------------------------------------------

def _series_numpy(alpha, z):
    v = np.empty_like(z)
    d = np.empty_like(z)
    zero = z == 0.0
    for i in np.flatnonzero(zero):
        v[i], d[i] = _series_impl(alpha, 0.0)
    zz = z[~zero]
    if zz.size:
        h = 0.5 * zz
        qh, ql = _two_prod(h, h)
        qh, ql = -qh, -ql
        t0 = np.exp(alpha * np.log(h) - math.lgamma(alpha + 1.0))
        one = np.ones_like(zz)
        rh, rl = one.copy(), 0.0 * one
        sh, sl = one.copy(), 0.0 * one
        dh, dl = _two_sum(0.0 * one, alpha)
        rmax = one.copy()
        hmax = float(np.max(h))
        for m in range(1, 401):
            eh, el = _two_sum(float(m), alpha)
            eh, el = _dd_mul(eh, el, float(m), 0.0)
            fh, fl = _dd_div(qh, ql, eh, el)
            rh, rl = _dd_mul(rh, rl, fh, fl)
            sh, sl = _dd_add(sh, sl, rh, rl)
            ch, cl = _two_sum(2.0 * m, alpha)
            ch, cl = _dd_mul(ch, cl, rh, rl)
            dh, dl = _dd_add(dh, dl, ch, cl)
            rmax = np.maximum(rmax, np.abs(rh))
            if m > hmax and np.all(np.abs(rh) <= SERIES_CUTOFF * rmax):
                break
        v[~zero] = t0 * (sh + sl)
        d[~zero] = t0 * (dh + dl) / zz
    return v, d


def _miller_numpy(alpha, z):
    top = int(np.max(z) + 25.0 + math.sqrt(40.0 * np.max(z)))
    top += top % 2
    half = top // 2
    c = np.empty(half + 1)
    c[0] = math.gamma(alpha + 1.0)
    g = c[0]
    for m in range(1, half + 1):
        if m > 1:
            g *= (alpha + m - 1) / m
        c[m] = (alpha + 2 * m) * g
    j_next = np.zeros_like(z)
    j_cur = np.full_like(z, 1e-300)
    norm = np.zeros_like(z)
    j_one = np.zeros_like(z)
    for k in range(top, 0, -1):
        if k % 2 == 0:
            norm += c[k // 2] * j_cur
        if k == 1:
            j_one = j_cur.copy()
        j_prev = 2.0 * (alpha + k) / z * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        big = np.abs(j_cur) > RESCALE
        if np.any(big):
            f = np.where(big, 1.0 / RESCALE, 1.0)
            j_cur, j_next, norm, j_one = j_cur * f, j_next * f, norm * f, j_one * f
    norm += c[0] * j_cur
    scale = np.exp(alpha * np.log(0.5 * z)) / norm
    return j_cur * scale, j_one * scale


def _jv_vec_numpy(alpha, z):
    out = np.empty_like(z)
    lo = z < SWITCH
    if np.any(lo):
        out[lo] = _series_numpy(alpha, z[lo])[0]
    if np.any(~lo):
        out[~lo] = _miller_numpy(alpha, z[~lo])[0]
    return out


def _jvp_vec_numpy(alpha, z):
    out = np.empty_like(z)
    lo = z < SWITCH
    if np.any(lo):
        out[lo] = _series_numpy(alpha, z[lo])[1]
    if np.any(~lo):
        zz = z[~lo]
        v, v1 = _miller_numpy(alpha, zz)
        out[~lo] = alpha / zz * v - v1
    return out


def _check_order(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > -1.0 or not math.isfinite(alpha):
        raise DomainError(f"Bessel order must exceed -1, got {alpha}")
    return alpha


def _prepare(alpha, z):
    alpha = _check_order(alpha)
    arr = np.asarray(z, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("Bessel argument must be non-negative")
    return alpha, arr


def bessel_j(alpha: float, z):
    """J_alpha(z) for z >= 0; scalar in, scalar out."""
    alpha, arr = _prepare(alpha, z)
    flat = np.ascontiguousarray(arr.reshape(-1))
    out = _jit.pick(_jv_vec_numba, _jv_vec_numpy)(alpha, flat).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def bessel_jp(alpha: float, z):
    """J'_alpha(z): series derivative below the switch, (alpha/z)J_alpha - J_{alpha+1} above."""
    alpha, arr = _prepare(alpha, z)
    flat = np.ascontiguousarray(arr.reshape(-1))
    out = _jit.pick(_jvp_vec_numba, _jvp_vec_numpy)(alpha, flat).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def bessel_j_series(alpha: float, z: float) -> float:
    """Series branch only (any z >= 0); used to test the branch overlap."""
    alpha, _ = _prepare(alpha, z)
    return float(_jit.pick(_series, _series_impl)(alpha, float(z))[0])


def bessel_j_recurrence(alpha: float, z: float) -> float:
    """Backward-recurrence branch only (z > 0)."""
    alpha, _ = _prepare(alpha, z)
    if z <= 0:
        raise DomainError("backward recurrence needs z > 0")
    return float(_jit.pick(_miller, _miller_impl)(alpha, float(z))[0])


# -- zeros -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BesselZeroTable:
    alpha: float
    zeros: np.ndarray
    derivs: np.ndarray

    def __len__(self) -> int:
        return self.zeros.shape[0]

    def j(self, r: int) -> float:
        """r-th positive zero, 1-based."""
        return float(self.zeros[r - 1])

    def jp(self, r: int) -> float:
        return float(self.derivs[r - 1])


def _scan_grid(upper: float) -> np.ndarray:
    near = np.geomspace(1e-4, 0.05, 40)
    far = np.arange(0.1, upper + 0.05, 0.05)
    return np.concatenate([near, far])


def _refine(alpha: float, lo: float, hi: float) -> float:
    f_lo = bessel_j(alpha, lo)
    x = 0.5 * (lo + hi)
    for _ in range(200):
        fx = bessel_j(alpha, x)
        if fx == 0.0:
            return x
        if (fx > 0) == (f_lo > 0):
            lo, f_lo = x, fx
        else:
            hi = x
        step = fx / bessel_jp(alpha, x)
        cand = x - step
        # Newton inside the bracket, bisection otherwise
        nxt = cand if lo < cand < hi else 0.5 * (lo + hi)
        if abs(nxt - x) <= 2e-16 * x:
            return nxt
        x = nxt
        if hi - lo <= 4e-16 * hi:
            return 0.5 * (lo + hi)
    raise BracketingError(f"zero of J_{alpha} in [{lo}, {hi}] did not converge")


@functools.lru_cache(maxsize=64)
def _zeros_cached(alpha: float, r_max: int) -> BesselZeroTable:
    # zeros are spaced by more than pi/2 for alpha > -1; McMahon bound for the scan length
    upper = (r_max + 0.5 * alpha + 1.0) * math.pi + 2.0
    grid = _scan_grid(upper)
    vals = bessel_j(alpha, grid)
    flips = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    if flips.size < r_max:
        raise BracketingError(f"found only {flips.size} sign changes of J_{alpha} below {upper:.1f}")
    zs = np.array([_refine(alpha, grid[i], grid[i + 1]) for i in flips[:r_max]])
    if np.any(np.diff(zs) <= 0):
        raise BracketingError("zeros are not strictly increasing")
    ds = bessel_jp(alpha, zs)
    zs.setflags(write=False)
    ds.setflags(write=False)
    return BesselZeroTable(alpha, zs, ds)


def bessel_zeros(alpha: float, r_max: int) -> BesselZeroTable:
    """First ``r_max`` positive zeros of J_alpha and J'_alpha there."""
    alpha = _check_order(alpha)
    if r_max < 1:
        raise DomainError("r_max must be at least 1")
    return _zeros_cached(alpha, int(r_max))


# -- limit functions -----------------------------------------------------------

def limit_fn_jacobi(alpha: float, r: int, y):
    """-sqrt(2)/J'(j_r) * sqrt(1-y) * J_alpha(j_r (1-y))."""
    tab = bessel_zeros(alpha, r)
    y = np.asarray(y, dtype=float)
    u = 1.0 - y
    out = -math.sqrt(2.0) / tab.jp(r) * np.sqrt(u) * bessel_j(alpha, tab.j(r) * u)
    return float(out) if np.ndim(out) == 0 else out


def limit_fn_laguerre(nu: float, r: int, y):
    """-J_{nu-1}(j_r sqrt(1-y)) / J'_{nu-1}(j_r), j_r a zero of J_{nu-1}."""
    order = nu - 1.0
    tab = bessel_zeros(order, r)
    y = np.asarray(y, dtype=float)
    out = -bessel_j(order, tab.j(r) * np.sqrt(1.0 - y)) / tab.jp(r)
    return float(out) if np.ndim(out) == 0 else out


# -- limit covariances --------------------------------------------------------

class LimitKind(str, enum.Enum):
    JACOBI_TRIG = "jacobi-trig"
    JACOBI_ALG = "jacobi-algebraic"
    LAGUERRE_HARD = "laguerre"


@dataclass(frozen=True)
class LimitValue:
    kind: LimitKind
    r: int
    s: int
    value: float
    quad_error_estimate: float


def _kernel_integral(order: float, r: int, s: int) -> QuadResult:
    # (J'_r J'_s)^-1 int_0^1 u/(1-u^2) J(j_r u) J(j_s u) du
    lo, hi = min(r, s), max(r, s)
    tab = bessel_zeros(order, hi)
    jr, js = tab.j(lo), tab.j(hi)

    def integrand(u):
        return u / ((1.0 - u) * (1.0 + u)) * bessel_j(order, jr * u) * bessel_j(order, js * u)

    res = integrate_graded(integrand, left_power=1.0 + 2.0 * order)
    scale = tab.jp(lo) * tab.jp(hi)
    return QuadResult(res.value / scale, res.error / abs(scale), res.levels)


def _order_for(kind: LimitKind, params) -> float:
    if isinstance(params, EnsembleParams):
        if kind is LimitKind.LAGUERRE_HARD:
            if params.family is not Family.LAGUERRE:
                raise DomainError("Laguerre limit needs Laguerre parameters")
        elif not params.family.is_jacobi:
            raise DomainError("Jacobi limit needs Jacobi parameters")
        return params.bessel_order
    val = float(params)
    return val - 1.0 if kind is LimitKind.LAGUERRE_HARD else val


def limit_cov(kind, params, r: int, s: int) -> LimitValue:
    """Hard-edge limit of the (r, s) covariance entry.

    ``params`` is an :class:`EnsembleParams` or a bare number (alpha for the
    Jacobi kinds, nu for the Laguerre kind).
    """
    kind = LimitKind(kind)
    if r < 1 or s < 1:
        raise DomainError("r and s must be positive")
    order = _order_for(kind, params)
    _check_order(order)
    base = _kernel_integral(order, r, s)
    value, err = base.value, base.error
    if kind is LimitKind.JACOBI_ALG:
        tab = bessel_zeros(order, max(r, s))
        div = 4.0 * tab.j(min(r, s)) * tab.j(max(r, s))
        value, err = value / div, err / div
    return LimitValue(kind, int(r), int(s), float(value), float(err))


def limit_orthonormality(alpha_or_nu: float, family, r_max: int) -> np.ndarray:
    """Gram matrix of the limit functions in L^2([0, 1]).

    Both families reduce, via y = 1-u and y = 1-u^2 respectively, to
    2/(J'_r J'_s) int_0^1 u J(j_r u) J(j_s u) du.
    """
    if r_max < 1:
        raise DomainError("r_max must be at least 1")
    fam = Family(family) if not isinstance(family, Family) else family
    order = float(alpha_or_nu) - 1.0 if fam is Family.LAGUERRE else float(alpha_or_nu)
    tab = bessel_zeros(order, r_max)
    gram = np.empty((r_max, r_max))
    for r in range(1, r_max + 1):
        for s in range(r, r_max + 1):
            jr, js = tab.j(r), tab.j(s)
            res = integrate_graded(
                lambda u: u * bessel_j(order, jr * u) * bessel_j(order, js * u),
                left_power=1.0 + 2.0 * order,
            )
            gram[r - 1, s - 1] = gram[s - 1, r - 1] = 2.0 * res.value / (tab.jp(r) * tab.jp(s))
    return gram
