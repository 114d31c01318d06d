"""Symmetric eigenvalue kernels.

Implicit-shift QL for symmetric tridiagonal matrices, Sturm-sequence
bisection as the fallback, and Householder reduction of dense symmetric
matrices to tridiagonal form.
"""
from __future__ import annotations

import math

import numpy as np

from . import _jit
from .errors import ConvergenceFailure

QL_MAX_SWEEPS = 60


def _tql_impl(d, e, max_sweeps):
    # Returns (eigenvalues, failed_index); failed_index == -1 on success.
    n = d.shape[0]
    d = d.copy()
    f = np.zeros(n)
    f[: n - 1] = e[: n - 1]
    eps = 2.220446049250313e-16
    for ll in range(n):
        it = 0
        while True:
            m = ll
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(f[m]) <= eps * dd:
                    break
                m += 1
            if m == ll:
                break
            if it == max_sweeps:
                return d, ll
            it += 1
            g = (d[ll + 1] - d[ll]) / (2.0 * f[ll])
            r = math.hypot(g, 1.0)
            g = d[m] - d[ll] + f[ll] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            early = False
            while i >= ll:
                ff = s * f[i]
                b = c * f[i]
                r = math.hypot(ff, g)
                f[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    f[m] = 0.0
                    early = True
                    break
                s = ff / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if early:
                continue
            d[ll] -= p
            f[ll] = g
            f[m] = 0.0
    return np.sort(d), -1


_tql_numba = _jit.njit(_tql_impl)


def _sturm_bisect_numba_impl(d, e, lo, hi):
    n = d.shape[0]
    out = np.empty(n)
    e2 = np.zeros(n)
    for i in range(1, n):
        e2[i] = e[i - 1] * e[i - 1]
    for k in range(n):
        a = lo
        b = hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            cnt = 0
            q = d[0] - mid
            if q < 0.0:
                cnt += 1
            for i in range(1, n):
                if q == 0.0:
                    q = 1e-300
                q = d[i] - mid - e2[i] / q
                if q < 0.0:
                    cnt += 1
            if cnt > k:
                b = mid
            else:
                a = mid
        out[k] = 0.5 * (a + b)
    return out


_sturm_numba = _jit.njit(_sturm_bisect_numba_impl)


def _sturm_numpy(d, e, lo, hi):
    n = d.shape[0]
    e2 = np.concatenate([[0.0], np.asarray(e[: n - 1]) ** 2])
    k = np.arange(n)
    a = np.full(n, lo)
    b = np.full(n, hi)
    for _ in range(200):
        mid = 0.5 * (a + b)
        cnt = np.zeros(n, dtype=np.int64)
        q = d[0] - mid
        cnt += q < 0
        for i in range(1, n):
            q = np.where(q == 0.0, 1e-300, q)
            q = d[i] - mid - e2[i] / q
            cnt += q < 0
        upper = cnt > k
        b = np.where(upper, mid, b)
        a = np.where(upper, a, mid)
        if np.all((0.5 * (a + b) <= a) | (0.5 * (a + b) >= b)):
            break
    return 0.5 * (a + b)


def _gershgorin(d, e):
    n = d.shape[0]
    rad = np.zeros(n)
    if n > 1:
        ae = np.abs(e[: n - 1])
        rad[:-1] += ae
        rad[1:] += ae
    lo = float(np.min(d - rad))
    hi = float(np.max(d + rad))
    pad = 4 * np.finfo(float).eps * max(abs(lo), abs(hi), 1.0)
    return lo - pad, hi + pad


def sturm_eigvalsh_tridiagonal(d, e) -> np.ndarray:
    """All eigenvalues of the symmetric tridiagonal (d, e) by bisection."""
    d = np.ascontiguousarray(d, dtype=float)
    e = np.ascontiguousarray(e, dtype=float)
    if d.shape[0] == 1:
        return d.copy()
    lo, hi = _gershgorin(d, e)
    return _jit.pick(_sturm_numba, _sturm_numpy)(d, e, lo, hi)


def eigvalsh_tridiagonal(d, e, max_sweeps: int = QL_MAX_SWEEPS, fallback: bool = True) -> np.ndarray:
    """Ascending eigenvalues of the symmetric tridiagonal matrix (d, e).

    ``d`` holds the n diagonal entries and ``e`` the n-1 off-diagonal ones.
    Implicit QL is tried first; if any eigenvalue needs more than
    ``max_sweeps`` sweeps, Sturm bisection takes over (or
    :class:`ConvergenceFailure` is raised when ``fallback`` is false).
    """
    d = np.ascontiguousarray(d, dtype=float)
    e = np.ascontiguousarray(e, dtype=float)
    n = d.shape[0]
    if n == 0:
        return d.copy()
    if e.shape[0] < n - 1:
        raise ValueError("off-diagonal must have n-1 entries")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e[: n - 1]))):
        raise ValueError("non-finite tridiagonal entries")
    vals, failed = _jit.pick(_tql_numba, _tql_impl)(d, e, max_sweeps)
    if failed < 0:
        return vals
    if not fallback:
        raise ConvergenceFailure(f"QL iteration exceeded {max_sweeps} sweeps at eigenvalue {failed}")
    return sturm_eigvalsh_tridiagonal(d, e)


def _householder_numba_impl(a):
    n = a.shape[0]
    a = a.copy()
    v = np.empty(n)
    p = np.empty(n)
    for k in range(n - 2):
        m = n - k - 1
        alpha = 0.0
        for i in range(k + 1, n):
            alpha += a[i, k] * a[i, k]
        alpha = math.sqrt(alpha)
        if alpha == 0.0:
            continue
        x0 = a[k + 1, k]
        if x0 > 0:
            alpha = -alpha
        # v = x - alpha e1, H = I - 2 v v^T / (v^T v)
        for i in range(m):
            v[i] = a[k + 1 + i, k]
        v[0] -= alpha
        vv = 0.0
        for i in range(m):
            vv += v[i] * v[i]
        if vv == 0.0:
            continue
        beta = 2.0 / vv
        for i in range(m):
            s = 0.0
            for j in range(m):
                s += a[k + 1 + i, k + 1 + j] * v[j]
            p[i] = beta * s
        pv = 0.0
        for i in range(m):
            pv += p[i] * v[i]
        c = 0.5 * beta * pv
        for i in range(m):
            p[i] -= c * v[i]
        for i in range(m):
            for j in range(m):
                a[k + 1 + i, k + 1 + j] -= v[i] * p[j] + p[i] * v[j]
        a[k + 1, k] = alpha
        a[k, k + 1] = alpha
        for i in range(k + 2, n):
            a[i, k] = 0.0
            a[k, i] = 0.0
    d = np.empty(n)
    e = np.zeros(max(n - 1, 1))
    for i in range(n):
        d[i] = a[i, i]
    for i in range(n - 1):
        e[i] = a[i + 1, i]
    return d, e


_householder_numba = _jit.njit(_householder_numba_impl)


def _householder_numpy(a):
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vv = v @ v
        if vv == 0.0:
            continue
        beta = 2.0 / vv
        sub = a[k + 1 :, k + 1 :]
        p = beta * (sub @ v)
        p -= 0.5 * beta * (p @ v) * v
        sub -= np.outer(v, p) + np.outer(p, v)
        a[k + 1, k] = a[k, k + 1] = alpha
        a[k + 2 :, k] = 0.0
        a[k, k + 2 :] = 0.0
    d = np.diag(a).copy()
    e = np.diag(a, -1).copy() if n > 1 else np.zeros(1)
    return d, e


def tridiagonalize(a):
    """Householder reduction of a dense symmetric matrix: returns (d, e)."""
    a = np.ascontiguousarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    return _jit.pick(_householder_numba, _householder_numpy)(a)


def eigvalsh(a) -> np.ndarray:
    """Ascending eigenvalues of a dense symmetric matrix (Householder + QL)."""
    d, e = tridiagonalize(a)
    return eigvalsh_tridiagonal(d, e)
