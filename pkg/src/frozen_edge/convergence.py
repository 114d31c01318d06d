"""Finite-N step functions, spectral weights and scaled covariance sequences.

Rows of T_N scaled by sqrt(N) define step functions on [0, 1) that converge
to the Bessel limit functions; the scaled hard-edge covariance entries
converge to the limit integrals of :mod:`frozen_edge.bessel`.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._jit import max_threads
from .bessel import LimitKind, LimitValue, bessel_zeros, limit_cov, limit_fn_jacobi, limit_fn_laguerre
from .dualpoly import build_t_matrix
from .errors import DomainError
from .frozencov import assemble
from .orthopoly import find_zeros, recurrence_for
from .params import EnsembleParams, Family

DEFAULT_GRID = (25, 50, 100, 200)
Y_MAX = 0.8


@dataclass(frozen=True, eq=False)
class StepFn:
    """Piecewise constant function with value samples[k] on [k/N, (k+1)/N)."""

    n: int
    r: int
    samples: np.ndarray

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        idx = np.clip(np.floor(y * self.n).astype(int), 0, self.n - 1)
        return self.samples[idx]

    def l2_norm(self) -> float:
        return float(math.sqrt(math.fsum(self.samples**2) / self.n))

    def inner(self, other: "StepFn") -> float:
        if other.n != self.n:
            raise DomainError("step functions on different grids")
        return math.fsum(self.samples * other.samples) / self.n

    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) / self.n


def _t_rows(params: EnsembleParams):
    table = recurrence_for(params)
    zeros = find_zeros(table, params.dim_n)
    return build_t_matrix(params, table, zeros).entries


def step_fn(params: EnsembleParams, r: int, t_matrix: np.ndarray | None = None) -> StepFn:
    """Step function f_{N,r} built from one row of T_N.

    Jacobi uses the row of the r-th largest zero; Laguerre the row of the
    r-th smallest zero with the alternating sign (-1)^k.
    """
    n = params.dim_n
    if not 1 <= r <= n:
        raise DomainError(f"need 1 <= r <= N, got r={r}, N={n}")
    t = _t_rows(params) if t_matrix is None else t_matrix
    if params.family is Family.LAGUERRE:
        samples = math.sqrt(n) * t[r - 1] * (-1.0) ** np.arange(n)
    else:
        samples = math.sqrt(n) * t[n - r]
    samples = np.array(samples)
    samples.setflags(write=False)
    return StepFn(n, r, samples)


def limit_function(params: EnsembleParams, r: int) -> Callable[[np.ndarray], np.ndarray]:
    if params.family is Family.LAGUERRE:
        return lambda y: limit_fn_laguerre(params.nu, r, y)
    return lambda y: limit_fn_jacobi(params.alpha, r, y)


def stepfn_sup_error(params: EnsembleParams, r: int, y_max: float = Y_MAX, t_matrix=None) -> float:
    """max |f_{N,r} - f_r| over cell midpoints in [0, y_max]."""
    f = step_fn(params, r, t_matrix)
    y = f.midpoints()
    y = y[y <= y_max]
    return float(np.max(np.abs(f(y) - limit_function(params, r)(y))))


@dataclass(frozen=True, eq=False)
class HWeights:
    """Discrete weight h_N (as a step function) and its limit h(y) = 1/(2y(2-y))."""

    step: StepFn
    alpha: float
    beta: float

    @staticmethod
    def limit(y):
        y = np.asarray(y, dtype=float)
        return 1.0 / (2.0 * y * (2.0 - y))

    def bound(self, y):
        """min(N/2, 1/(2y))."""
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            return np.minimum(self.step.n / 2.0, 1.0 / (2.0 * y))

    def bound_holds(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.all(self.step(y) <= self.bound(y) * (1 + 1e-15)))

    def sup_error(self, y_lo: float = 0.1, y_hi: float = 1.0, per_cell: int = 20) -> float:
        n = self.step.n
        y = np.linspace(y_lo, y_hi, per_cell * n + 1)
        y = y[y < 1.0] if y_hi >= 1.0 else y
        return float(np.max(np.abs(self.step(y) - self.limit(y))))


def h_weights(n: int, alpha: float, beta: float) -> HWeights:
    """h_N(y) = N^2 / (2(k+1)(2N+alpha+beta-k)) on [k/N, (k+1)/N)."""
    if n < 1:
        raise DomainError("n must be positive")
    k = np.arange(n, dtype=float)
    samples = n * n / (2.0 * (k + 1) * (2 * n + alpha + beta - k))
    samples.setflags(write=False)
    return HWeights(StepFn(n, 0, samples), float(alpha), float(beta))


def spectral_sum(params: EnsembleParams, r: int, s: int, t_matrix=None) -> float:
    """(1/N) sum_k h_N(k/N) f_{N,r}(k/N) f_{N,s}(k/N) for the trig Jacobi family."""
    if params.family is Family.LAGUERRE:
        raise DomainError("the h_N representation is stated for Jacobi ensembles")
    t = _t_rows(params) if t_matrix is None else t_matrix
    h = h_weights(params.dim_n, params.alpha, params.beta).step.samples
    fr = step_fn(params, r, t).samples
    fs = step_fn(params, s, t).samples
    return math.fsum(h * fr * fs) / params.dim_n


def _fit_rate(ns: Sequence[int], errs: Sequence[float]) -> float:
    errs = np.asarray(errs, dtype=float)
    if np.any(errs <= 0) or not np.all(np.isfinite(errs)):
        return math.nan
    return float(np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(errs), 1)[0])


def _scaled_entry(params: EnsembleParams, sigma: np.ndarray, r: int, s: int) -> float:
    n = params.dim_n
    if params.family is Family.LAGUERRE:
        return n * float(sigma[r - 1, s - 1])
    entry = float(sigma[n - r, n - s])
    if params.family is Family.JACOBI_TRIGONOMETRIC:
        return n * n * entry
    return entry


_KIND = {
    Family.JACOBI_TRIGONOMETRIC: LimitKind.JACOBI_TRIG,
    Family.JACOBI_ALGEBRAIC: LimitKind.JACOBI_ALG,
    Family.LAGUERRE: LimitKind.LAGUERRE_HARD,
}


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    params: EnsembleParams
    r: int
    s: int
    n_grid: tuple[int, ...]
    finite_values: np.ndarray
    limit: LimitValue
    abs_errors: np.ndarray
    fitted_rate: float
    sup_errors_stepfn: np.ndarray
    settings: dict = field(default_factory=dict)

    @property
    def relative_errors(self) -> np.ndarray:
        return self.abs_errors / abs(self.limit.value)

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.abs_errors) < 0))

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "r": self.r,
            "s": self.s,
            "n_grid": list(self.n_grid),
            "finite_values": self.finite_values.tolist(),
            "limit": {
                "kind": self.limit.kind.value,
                "value": self.limit.value,
                "quad_error_estimate": self.limit.quad_error_estimate,
            },
            "abs_errors": self.abs_errors.tolist(),
            "fitted_rate": None if math.isnan(self.fitted_rate) else self.fitted_rate,
            "sup_errors_stepfn": self.sup_errors_stepfn.tolist(),
            "strictly_decreasing": self.strictly_decreasing,
            "settings": self.settings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "error"])
        for n, e in zip(self.n_grid, self.abs_errors):
            w.writerow([n, repr(float(e))])
        return buf.getvalue()


def scaled_cov_sequence(
    params: EnsembleParams,
    r: int,
    s: int,
    n_grid: Sequence[int] = DEFAULT_GRID,
    y_max: float = Y_MAX,
) -> ConvergenceReport:
    """Scaled hard-edge covariance entries along ``n_grid`` versus their limit.

    Scaling: N^2 (trig Jacobi), 1 (algebraic Jacobi), N (Laguerre); the
    entry is (N-r+1, N-s+1) for Jacobi and (r, s) for Laguerre.
    """
    grid = tuple(int(n) for n in n_grid)
    if len(grid) < 3:
        raise DomainError("rate fit needs at least three grid points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("n_grid must be strictly increasing")
    if min(r, s) < 1 or max(r, s) > grid[0]:
        raise DomainError("r and s must lie in 1..min(n_grid)")
    limit = limit_cov(_KIND[params.family], params, r, s)

    def one(n: int) -> tuple[float, float]:
        p = params.with_n(n)
        sc = assemble(p)
        t = sc.t_matrix.entries
        return _scaled_entry(p, sc.sigma_direct, r, s), max(stepfn_sup_error(p, q, y_max, t) for q in {r, s})

    with ThreadPoolExecutor(max_workers=max_threads()) as pool:
        results = list(pool.map(one, grid))
    values = np.array([v for v, _ in results])
    sups = [e for _, e in results]
    errs = np.abs(values - limit.value)
    settings = {"y_max": y_max, "n_grid": list(grid)}
    return ConvergenceReport(params, r, s, grid, values, limit, errs, _fit_rate(grid, errs), np.array(sups), settings)


@dataclass(frozen=True, eq=False)
class EdgeScalingReport:
    """N^4 sigma_{N-r+1,N-s+1} in algebraic coordinates against 4 j_r j_s L_trig."""

    params: EnsembleParams
    r: int
    s: int
    n_grid: tuple[int, ...]
    scaled_values: np.ndarray
    target: float
    rel_errors: np.ndarray


def algebraic_edge_scaling(
    params: EnsembleParams, r: int, s: int, n_grid: Sequence[int] = DEFAULT_GRID
) -> EdgeScalingReport:
    """Since Sigma = D Sigma~ D with D_ii ~ 2 j_i / N near the edge, the
    algebraic entries decay like N^-4; this reports the rescaled sequence."""
    if params.family is not Family.JACOBI_ALGEBRAIC:
        raise DomainError("edge scaling diagnostic is for algebraic Jacobi coordinates")
    trig = limit_cov(LimitKind.JACOBI_TRIG, params, r, s).value
    tab = bessel_zeros(params.alpha, max(r, s))
    target = 4.0 * tab.j(r) * tab.j(s) * trig
    grid = tuple(int(n) for n in n_grid)
    vals = []
    for n in grid:
        sc = assemble(params.with_n(n))
        vals.append(n**4 * float(sc.sigma_direct[n - r, n - s]))
    vals = np.array(vals)
    return EdgeScalingReport(params, r, s, grid, vals, target, np.abs(vals - target) / abs(target))


@dataclass(frozen=True, eq=False)
class ZeroAsymptotics:
    """Deviations of the r-th hard-edge zero from its leading-order expansions."""

    params: EnsembleParams
    r: int
    n_grid: tuple[int, ...]
    deviations: dict
    claimed_orders: dict

    def slopes(self) -> dict:
        return {k: _fit_rate(self.n_grid, v) for k, v in self.deviations.items()}


def zero_asymptotics(params: EnsembleParams, r: int, n_grid: Sequence[int] = (50, 100, 200)) -> ZeroAsymptotics:
    """Jacobi: z_{N-r+1} = 1 - j^2/(2N^2) + O(N^-3), 1 - z^2 = j^2/N^2 + O(N^-3),
    sqrt(1 - z^2) = j/N + O(N^-2). Laguerre: z_r = j^2/(4N+2nu) + O(N^-3),
    z_r = j^2/(4N) + O(N^-2)."""
    grid = tuple(int(n) for n in n_grid)
    j = bessel_zeros(params.bessel_order, r).j(r)
    dev: dict[str, list[float]] = {}
    for n in grid:
        p = params.with_n(n)
        z = find_zeros(recurrence_for(p), n).zeros
        if params.family is Family.LAGUERRE:
            zr = z[r - 1]
            items = {
                "z_refined": abs(zr - j * j / (4 * n + 2 * params.nu)),
                "z_leading": abs(zr - j * j / (4 * n)),
            }
        else:
            zr = z[n - r]
            one_minus_sq = (1 - zr) * (1 + zr)
            items = {
                "z": abs(zr - (1 - j * j / (2 * n * n))),
                "one_minus_z_squared": abs(one_minus_sq - j * j / (n * n)),
                "sqrt_one_minus_z_squared": abs(math.sqrt(one_minus_sq) - j / n),
            }
        for key, v in items.items():
            dev.setdefault(key, []).append(v)
    orders = (
        {"z_refined": -3, "z_leading": -2}
        if params.family is Family.LAGUERRE
        else {"z": -3, "one_minus_z_squared": -3, "sqrt_one_minus_z_squared": -2}
    )
    return ZeroAsymptotics(params, r, grid, {k: np.array(v) for k, v in dev.items()}, orders)
