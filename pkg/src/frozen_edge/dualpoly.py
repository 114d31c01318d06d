"""Dual orthogonal polynomials and the orthogonal eigenvector matrices T_N.

For a fixed N the dual family Q_{0,N}, ..., Q_{N-1,N} runs the three-term
recurrence of the original family backwards: step k uses a_{N-k},
b_{N-k-1}, a_{N-k-1}. Values follow the normalisation used for the
eigenvectors, i.e. Q_{0,N} = 1/sqrt(h_N) (Jacobi) or
1/sqrt(N(N+nu-1)) (Laguerre).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DimensionMismatchError, PositivityError
from .orthopoly import RecurrenceTable, ZeroSet, value_table, values_and_derivative

WEIGHT_SUM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DualEvaluation:
    table: RecurrenceTable
    n: int
    x: float
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class OrthoMatrix:
    n: int
    entries: np.ndarray
    max_orthogonality_residual: float

    @classmethod
    def from_entries(cls, entries: np.ndarray) -> "OrthoMatrix":
        n = entries.shape[0]
        resid = float(np.max(np.abs(entries.T @ entries - np.eye(n))))
        entries.setflags(write=False)
        return cls(n, entries, resid)


@dataclass(frozen=True, eq=False)
class DualWeights:
    weights: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))


def jacobi_h(n: int, alpha: float, beta: float) -> float:
    """Normalising constant h_N of the Jacobi eigenvectors."""
    s = alpha + beta
    if n == 1:
        # (N + alpha + beta) / (2N + alpha + beta - 1) is 0/0 at s = -1
        return 4.0 * (1 + alpha) * (1 + beta) / (2 + s) ** 2
    return 4.0 * n * (n + alpha) * (n + beta) * (n + s) / ((2 * n + s) ** 2 * (2 * n + s - 1))


def dual_start(table: RecurrenceTable, n: int) -> float:
    """Q_{0,N}."""
    if table.kind == "jacobi":
        return 1.0 / math.sqrt(jacobi_h(n, table.alpha, table.beta))
    return 1.0 / math.sqrt(n * (n + table.nu - 1.0))


def _check_depth(table: RecurrenceTable, n: int) -> None:
    if n < 1 or n > table.n_max:
        raise DimensionMismatchError(f"N={n} exceeds table depth {table.n_max}")


def dual_eval_all(table: RecurrenceTable, n: int, x: float) -> DualEvaluation:
    """Q_{0,N}(x), ..., Q_{N-1,N}(x) by the reversed recurrence.

    The forward dual recurrence is exact in exact arithmetic but can be
    badly unstable at large zeros of the Laguerre family; at zeros use
    :func:`dual_values_at_zeros`.
    """
    _check_depth(table, n)
    a, b = table.a, table.b
    q = np.empty(n)
    q[0] = dual_start(table, n)
    prev = 0.0
    for k in range(n - 1):
        nxt = ((x - b[n - k - 1]) * q[k] - a[n - k] * prev) / a[n - k - 1]
        prev = q[k]
        q[k + 1] = nxt
    q.setflags(write=False)
    return DualEvaluation(table, n, float(x), q)


def dual_values_at_zeros(table: RecurrenceTable, zeros: ZeroSet) -> np.ndarray:
    """Matrix ``Q[i, k] = Q_{k,N}(z_i)`` at the zeros of p_N.

    At a zero of p_N the reversed recurrence is solved by
    Q_{k,N}(z) = Q_{0,N} p_{N-1-k}(z) / p_{N-1}(z), which only needs the
    forward recurrence of the original family.
    """
    n = zeros.n
    _check_depth(table, n)
    v = value_table(table, n - 1, zeros.zeros)
    rev = v[:, ::-1]
    return dual_start(table, n) * rev / rev[:, :1]


def dual_christoffel(table: RecurrenceTable, n: int, zeros: ZeroSet) -> DualWeights:
    """Dual Christoffel numbers w_i = p_{N-1}(z_i) / (a_N p_N'(z_i))."""
    _check_depth(table, n)
    if zeros.n != n or zeros.table.kind != table.kind:
        raise DimensionMismatchError("zeros do not belong to this table and degree")
    p, dp, pm1, _ = values_and_derivative(table, n, zeros.zeros)
    w = pm1 / (table.a[n] * dp)
    if not np.all(w > 0):
        raise PositivityError("non-positive dual Christoffel number")
    if abs(np.sum(w) - 1.0) > WEIGHT_SUM_TOL * max(1, n):
        raise ConsistencyError(f"dual Christoffel numbers sum to {np.sum(w)!r}")
    w.setflags(write=False)
    return DualWeights(w)


def edge_factor(table: RecurrenceTable, z: np.ndarray) -> np.ndarray:
    """sqrt(1 - z^2) for Jacobi, sqrt(z) for Laguerre."""
    if table.kind == "jacobi":
        return np.sqrt((1.0 - z) * (1.0 + z))
    return np.sqrt(z)


def build_t_matrix(params, table: RecurrenceTable, zeros: ZeroSet) -> OrthoMatrix:
    """T[i, j] = edge_factor(z_i) * Q_{j,N}(z_i) (0-based j)."""
    n = zeros.n
    if params is not None and params.dim_n != n:
        raise DimensionMismatchError(f"params.dim_n={params.dim_n} but {n} zeros given")
    q = dual_values_at_zeros(table, zeros)
    t = edge_factor(table, zeros.zeros)[:, None] * q
    return OrthoMatrix.from_entries(t)
