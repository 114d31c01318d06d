"""Quadrature on [a, b] for integrands with an algebraic endpoint singularity.

The primary rule is composite Gauss-Legendre (15 points per panel) on a
mesh graded geometrically toward the left endpoint. Tanh-sinh quadrature
is provided as an independent cross-check.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import QuadratureError
from .orthopoly import find_zeros, gauss_weights, jacobi_recurrence

GAUSS_ORDER = 15
MAX_LEVELS = 20
ATOL = 1e-10
RTOL = 1e-9


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    levels: int


@functools.lru_cache(maxsize=8)
def gauss_legendre(n: int = GAUSS_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] from the Legendre Jacobi matrix."""
    table = jacobi_recurrence(0.0, 0.0, n)
    zs = find_zeros(table, n)
    w = 2.0 * gauss_weights(table, zs)
    x = np.array(zs.zeros)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _mesh(a: float, b: float, level: int) -> np.ndarray:
    # geometric breakpoints toward a (ratio 1/2), each panel split 2^min(level,4) times
    n_geo = 6 + 3 * level
    frac = np.concatenate([[0.0], 0.5 ** np.arange(n_geo, 0, -1), [1.0]])
    split = 2 ** min(level, 4)
    pts = [frac[0]]
    for lo, hi in zip(frac[:-1], frac[1:]):
        pts.extend(lo + (hi - lo) * np.arange(1, split + 1) / split)
    return a + (b - a) * np.asarray(pts)


def _composite(f, brk: np.ndarray) -> float:
    x, w = gauss_legendre()
    lo, hi = brk[:-1, None], brk[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return float(math.fsum((half * w[None, :] * vals).ravel()))


def integrate_graded(
    f: Callable[[np.ndarray], np.ndarray],
    a: float = 0.0,
    b: float = 1.0,
    atol: float = ATOL,
    rtol: float = RTOL,
    max_levels: int = MAX_LEVELS,
    left_power: float | None = None,
) -> QuadResult:
    """Integrate ``f`` (vectorised) over [a, b], refining the graded mesh.

    Stops once two successive refinements differ by at most
    max(atol, rtol*|value|); the difference is returned as the error.

    If the integrand is known to behave like (x-a)^p with p < 0 near a,
    pass ``left_power=p``: x = a + (b-a) t^q with q = 2/(1+p) turns it into
    a t^1 behaviour before the graded rule is applied.
    """
    if left_power is not None and left_power < 0:
        if left_power <= -1:
            raise QuadratureError("integrand is not integrable at the left endpoint")
        q = 2.0 / (1.0 + left_power)
        g = f
        span = b - a

        def f(t):
            return g(a + span * t**q) * (span * q * t ** (q - 1.0))

        a, b = 0.0, 1.0
    prev = _composite(f, _mesh(a, b, 0))
    if not math.isfinite(prev):
        raise QuadratureError("non-finite integrand value")
    for level in range(1, max_levels + 1):
        cur = _composite(f, _mesh(a, b, level))
        err = abs(cur - prev)
        if not math.isfinite(cur):
            raise QuadratureError("non-finite integrand value")
        if err <= max(atol, rtol * abs(cur)):
            return QuadResult(cur, err, level)
        prev = cur
    raise QuadratureError(f"no convergence after {max_levels} refinements (last change {err:.3e})")


def integrate_tanh_sinh(
    f: Callable[[np.ndarray], np.ndarray],
    a: float = 0.0,
    b: float = 1.0,
    tol: float = 1e-12,
    max_levels: int = 12,
) -> QuadResult:
    """Double-exponential quadrature; nodes never touch the endpoints.

    Nodes reach down to about 1e-226 from ``a`` but only to about 1e-16
    from ``b``, so put the stronger endpoint singularity on the left.
    """
    d = 0.5 * (b - a)
    t_max = 6.5

    def rule(step: float, offset: float) -> float:
        t = np.arange(offset, t_max + step / 2, step)
        t = np.concatenate([-t[::-1], t[t > 0]]) if offset == 0 else np.concatenate([-t[::-1], t])
        s = 0.5 * math.pi * np.sinh(t)
        q = np.exp(-2.0 * np.abs(s))
        wgt = 2.0 * math.pi * np.cosh(t) * q / (1.0 + q) ** 2  # (pi/2) cosh t sech^2 s
        # distances to the endpoints, d(1 + tanh s) and d(1 - tanh s), without cancellation
        pts = np.where(s < 0, a + d * np.exp(s) / np.cosh(s), b - d * np.exp(-s) / np.cosh(s))
        # nodes that round onto an endpoint carry weights below 1e-20
        keep = (pts > a) & (pts < b)
        vals = np.asarray(f(pts[keep]), dtype=float)
        return float(math.fsum(wgt[keep] * vals)) * d

    h = 1.0
    total = rule(h, 0.0) * h
    prev = total
    for level in range(1, max_levels + 1):
        h *= 0.5
        total = 0.5 * total + h * rule(2 * h, h)
        if abs(total - prev) <= tol * max(1.0, abs(total)):
            return QuadResult(total, abs(total - prev), level)
        prev = total
    raise QuadratureError("tanh-sinh did not converge")
