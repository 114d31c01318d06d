"""Orthonormal Jacobi and Laguerre polynomials: recurrences, evaluation, zeros.

Tables follow the convention ``x p_k = a_{k+1} p_{k+1} + b_k p_k + a_k p_{k-1}``
with ``p_0 = 1``. The array ``a`` is stored with a dummy ``a[0] = 0`` so
that ``a[k]`` is the coefficient a_k.

Jacobi polynomials are orthonormal for the probability measure with
density proportional to (1-x)^alpha (1+x)^beta on [-1, 1]; Laguerre
polynomials carry the parameter nu - 1, i.e. weight x^(nu-1) e^(-x) on
(0, inf).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _jit
from .errors import ConvergenceFailure, DimensionMismatchError, DomainError
from .linalg import eigvalsh_tridiagonal

NEWTON_MAX_STEPS = 8
_RESCALE_EXP = 500
_RESCALE_AT = 2.0**_RESCALE_EXP


@dataclass(frozen=True, eq=False)
class RecurrenceTable:
    kind: str
    a: np.ndarray
    b: np.ndarray
    alpha: float | None = None
    beta: float | None = None
    nu: float | None = None

    @property
    def n_max(self) -> int:
        return self.b.shape[0] - 1

    @property
    def bessel_order(self) -> float:
        return self.alpha if self.kind == "jacobi" else self.nu - 1.0

    def describe(self) -> dict:
        if self.kind == "jacobi":
            return {"kind": "jacobi", "alpha": self.alpha, "beta": self.beta}
        return {"kind": "laguerre", "nu": self.nu}


@dataclass(frozen=True, eq=False)
class ZeroSet:
    table: RecurrenceTable
    zeros: np.ndarray
    polish_residuals: np.ndarray

    @property
    def n(self) -> int:
        return self.zeros.shape[0]

    def __len__(self) -> int:
        return self.n


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def jacobi_recurrence(alpha: float, beta: float, n_max: int) -> RecurrenceTable:
    if not (alpha > -1 and beta > -1):
        raise DomainError(f"Jacobi parameters need alpha, beta > -1 (got {alpha}, {beta})")
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    alpha = float(alpha)
    beta = float(beta)
    s = alpha + beta
    k = np.arange(1, n_max + 1, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        num = 4.0 * k * (k + s) * (k + alpha) * (k + beta)
        den = (2 * k + s + 1) * (2 * k + s - 1)
        a_k = np.sqrt(num / den) / (2 * k + s)
        kk = np.arange(0, n_max + 1, dtype=float)
        b = (beta**2 - alpha**2) / ((2 * kk + s) * (2 * kk + s + 2))
    # k = 1 has a removable 0/0 when alpha + beta = -1
    a_k[0] = 2.0 / (s + 2.0) * math.sqrt((1 + alpha) * (1 + beta) / (s + 3.0))
    b[0] = (beta - alpha) / (s + 2.0)
    a = np.concatenate([[0.0], a_k])
    return RecurrenceTable("jacobi", _readonly(a), _readonly(b), alpha=alpha, beta=beta)


def laguerre_recurrence(nu: float, n_max: int) -> RecurrenceTable:
    """Orthonormal Laguerre polynomials with parameter nu - 1.

    Diagonal b_k = 2k + nu, off-diagonal a_k = sqrt(k (k + nu - 1)).
    """
    if not nu > 0:
        raise DomainError(f"Laguerre parameter needs nu > 0 (got {nu})")
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    nu = float(nu)
    k = np.arange(0, n_max + 1, dtype=float)
    a = np.sqrt(k * (k + nu - 1.0))
    a[0] = 0.0
    b = 2.0 * k + nu
    return RecurrenceTable("laguerre", _readonly(a), _readonly(b), nu=nu)


def recurrence_for(params) -> RecurrenceTable:
    """Table of depth N+1 for an :class:`EnsembleParams`."""
    n = params.dim_n
    if params.family.is_jacobi:
        return jacobi_recurrence(params.alpha, params.beta, n + 1)
    return laguerre_recurrence(params.nu, n + 1)


# ---------------------------------------------------------------- kernels


def _value_deriv_numba_impl(a, b, n, x):
    m = x.shape[0]
    pn = np.empty(m)
    dpn = np.empty(m)
    pm1 = np.empty(m)
    sexp = np.zeros(m, dtype=np.int64)
    big = 2.0**500
    tiny = 2.0**-500
    for i in range(m):
        xi = x[i]
        p_prev = 0.0
        p = 1.0
        d_prev = 0.0
        d = 0.0
        e = 0
        for k in range(n):
            p_next = ((xi - b[k]) * p - a[k] * p_prev) / a[k + 1]
            d_next = ((xi - b[k]) * d + p - a[k] * d_prev) / a[k + 1]
            p_prev = p
            p = p_next
            d_prev = d
            d = d_next
            if abs(p) > big or abs(d) > big:
                p *= tiny
                p_prev *= tiny
                d *= tiny
                d_prev *= tiny
                e += 500
        pn[i] = p
        dpn[i] = d
        pm1[i] = p_prev
        sexp[i] = e
    return pn, dpn, pm1, sexp


_value_deriv_numba = _jit.njit(_value_deriv_numba_impl)


def _value_deriv_numpy(a, b, n, x):
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    d_prev = np.zeros_like(x)
    d = np.zeros_like(x)
    e = np.zeros(x.shape, dtype=np.int64)
    for k in range(n):
        p_next = ((x - b[k]) * p - a[k] * p_prev) / a[k + 1]
        d_next = ((x - b[k]) * d + p - a[k] * d_prev) / a[k + 1]
        p_prev, p = p, p_next
        d_prev, d = d, d_next
        hit = (np.abs(p) > _RESCALE_AT) | (np.abs(d) > _RESCALE_AT)
        if hit.any():
            f = np.where(hit, 2.0**-_RESCALE_EXP, 1.0)
            p, p_prev, d, d_prev = p * f, p_prev * f, d * f, d_prev * f
            e += np.where(hit, _RESCALE_EXP, 0)
    return p, d, p_prev, e


def _value_table_numba_impl(a, b, n, x):
    m = x.shape[0]
    out = np.empty((m, n + 1))
    big = 2.0**500
    tiny = 2.0**-500
    for i in range(m):
        xi = x[i]
        out[i, 0] = 1.0
        p_prev = 0.0
        p = 1.0
        for k in range(n):
            p_next = ((xi - b[k]) * p - a[k] * p_prev) / a[k + 1]
            p_prev = p
            p = p_next
            out[i, k + 1] = p
            if abs(p) > big:
                for j in range(k + 2):
                    out[i, j] *= tiny
                p *= tiny
                p_prev *= tiny
        mx = 0.0
        for j in range(n + 1):
            if abs(out[i, j]) > mx:
                mx = abs(out[i, j])
        for j in range(n + 1):
            out[i, j] /= mx
    return out


_value_table_numba = _jit.njit(_value_table_numba_impl)


def _value_table_numpy(a, b, n, x):
    out = np.empty((x.shape[0], n + 1))
    out[:, 0] = 1.0
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    for k in range(n):
        p_next = ((x - b[k]) * p - a[k] * p_prev) / a[k + 1]
        p_prev, p = p, p_next
        out[:, k + 1] = p
        hit = np.abs(p) > _RESCALE_AT
        if hit.any():
            f = np.where(hit, 2.0**-_RESCALE_EXP, 1.0)
            out[:, : k + 2] *= f[:, None]
            p, p_prev = p * f, p_prev * f
    return out / np.max(np.abs(out), axis=1, keepdims=True)


def values_and_derivative(table: RecurrenceTable, n: int, x):
    """Scaled (p_n, p_n', p_{n-1}) at the points ``x`` plus binary exponents.

    The true values are ``np.ldexp(v, exponent)``; ratios need no unscaling.
    """
    if not 0 <= n <= table.n_max:
        raise DimensionMismatchError(f"degree {n} outside table depth {table.n_max}")
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))
    return _jit.pick(_value_deriv_numba, _value_deriv_numpy)(table.a, table.b, n, x)


def value_table(table: RecurrenceTable, n: int, x) -> np.ndarray:
    """Rows ``c_i (p_0(x_i), ..., p_n(x_i))`` with row scale c_i > 0 chosen so max |row| = 1."""
    if not 0 <= n <= table.n_max:
        raise DimensionMismatchError(f"degree {n} outside table depth {table.n_max}")
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))
    return _jit.pick(_value_table_numba, _value_table_numpy)(table.a, table.b, n, x)


def eval_orthonormal(table: RecurrenceTable, degree: int, x):
    """Orthonormal polynomial of the given degree at ``x`` (scalar or array)."""
    scalar = np.ndim(x) == 0
    p, _, _, e = values_and_derivative(table, degree, x)
    out = np.ldexp(p, e)
    return float(out[0]) if scalar else out


def eval_orthonormal_derivative(table: RecurrenceTable, degree: int, x):
    scalar = np.ndim(x) == 0
    _, d, _, e = values_and_derivative(table, degree, x)
    out = np.ldexp(d, e)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------- zeros


def _residual(p, e):
    with np.errstate(over="ignore"):
        return np.abs(np.ldexp(p, e))


def find_zeros(table: RecurrenceTable, n: int) -> ZeroSet:
    """Zeros of p_n as eigenvalues of the n x n Jacobi matrix, Newton-polished.

    Polishing stops per zero once a Newton step no longer lowers |p_n| or the
    step falls below a few ulps; running out of the step budget first is a
    :class:`ConvergenceFailure`.
    """
    if not 1 <= n <= table.n_max:
        raise DimensionMismatchError(f"n={n} outside 1..{table.n_max}")
    d = np.array(table.b[:n])
    e = np.array(table.a[1:n])
    z = eigvalsh_tridiagonal(d, e)

    gaps = np.full(n, np.inf)
    if n > 1:
        sep = np.diff(z)
        gaps[:-1] = sep
        gaps[1:] = np.minimum(gaps[1:], sep)

    p, dp, _, ex = values_and_derivative(table, n, z)
    res = _residual(p, ex)
    done = np.zeros(n, dtype=bool)
    for _ in range(NEWTON_MAX_STEPS):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            step = p[idx] / dp[idx]
        bad = ~np.isfinite(step) | (np.abs(step) > 0.5 * gaps[idx])
        done[idx[bad]] = True
        idx, step = idx[~bad], step[~bad]
        if idx.size == 0:
            break
        cand = z[idx] - step
        pc, dpc, _, exc = values_and_derivative(table, n, cand)
        rc = _residual(pc, exc)
        better = rc < res[idx]
        acc = idx[better]
        z[acc] = cand[better]
        res[acc] = rc[better]
        p[acc] = pc[better]
        dp[acc] = dpc[better]
        tiny_step = np.abs(step) <= 4 * np.spacing(np.abs(cand))
        done[idx[~better | tiny_step]] = True
    if not done.all():
        raise ConvergenceFailure(
            f"Newton polish did not settle within {NEWTON_MAX_STEPS} steps for {int((~done).sum())} zeros"
        )

    if n > 1 and not np.all(np.diff(z) > 0):
        raise ConvergenceFailure("zeros lost strict ordering after polishing")
    if table.kind == "jacobi":
        if not (z[0] > -1.0 and z[-1] < 1.0):
            raise ConvergenceFailure("Jacobi zeros escaped (-1, 1)")
    elif not z[0] > 0.0:
        raise ConvergenceFailure("Laguerre zeros must be positive")
    return ZeroSet(table, _readonly(z), _readonly(res))


def gauss_weights(table: RecurrenceTable, zeros: ZeroSet) -> np.ndarray:
    """Christoffel numbers 1 / sum_k p_k(z_i)^2 of the probability measure."""
    n = zeros.n
    v = value_table(table, n - 1, zeros.zeros)
    # rows are scaled by 1/c_i with c_i = max |p_k(z_i)|; undo via p_0 = 1
    return v[:, 0] ** 2 / np.sum(v * v, axis=1)


def jacobi_refined_order(n: int, alpha: float, beta: float) -> float:
    """Effective order in the asymptotic theta_r ~ j_r / rho for the largest zeros."""
    return math.sqrt((n + (alpha + beta + 1) / 2) ** 2 + (1 - alpha**2 - 3 * beta**2) / 12)


def hard_edge_zero_check(zeros: ZeroSet, bessel_zeros, r_max: int, refined: bool = False) -> np.ndarray:
    """Distance of the r_max edge zeros from their Bessel-zero predictions.

    Jacobi: |z_{N-r+1} - (1 - j_r^2 / (2N^2))|, or with ``refined`` the
    distance to cos(j_r / rho) with the refined order rho. Laguerre:
    |z_r - j_r^2 / (4N + 2nu)|. ``bessel_zeros`` must belong to order alpha
    (Jacobi) or nu - 1 (Laguerre).
    """
    table = zeros.table
    jz = getattr(bessel_zeros, "zeros", bessel_zeros)
    order = getattr(bessel_zeros, "alpha", None)
    if order is not None and not math.isclose(order, table.bessel_order, abs_tol=1e-14):
        raise DimensionMismatchError(
            f"Bessel zeros of order {order} do not match polynomial order {table.bessel_order}"
        )
    jz = np.asarray(jz, dtype=float)
    n = zeros.n
    if r_max < 0 or r_max > n or r_max > jz.shape[0]:
        raise DimensionMismatchError(f"r_max={r_max} exceeds N={n} or the {jz.shape[0]} Bessel zeros given")
    if r_max == 0:
        return np.empty(0)
    j = jz[:r_max]
    z = zeros.zeros
    if table.kind == "jacobi":
        edge = z[n - np.arange(1, r_max + 1)]
        if refined:
            rho = jacobi_refined_order(n, table.alpha, table.beta)
            return np.abs(edge - np.cos(j / rho))
        return np.abs(edge - (1.0 - j**2 / (2.0 * n * n)))
    return np.abs(z[:r_max] - j**2 / (4.0 * n + 2.0 * table.nu))
