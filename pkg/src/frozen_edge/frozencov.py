"""Inverse covariance matrices of the frozen Jacobi and Laguerre ensembles.

Three families are covered:
  * Jacobi, algebraic coordinates: S with entries built from the zeros z_i.
  * Jacobi, trigonometric coordinates: S~ = D S D, D = diag(2 sqrt(1 - z_i^2)).
  * Laguerre in radial coordinates r_i = sqrt(z_i).

:func:`assemble` also produces the covariance by two independent routes,
the closed-form spectral decomposition and a Cholesky solve.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _jit
from .dualpoly import OrthoMatrix, build_t_matrix
from .errors import (
    ConsistencyError,
    DegenerateSpacingError,
    DimensionMismatchError,
    DomainError,
    NotPositiveDefiniteError,
)
from .orthopoly import ZeroSet, find_zeros, recurrence_for
from .params import EnsembleParams, Family

SPACING_TOL = 1e-13
CONJUGATION_TOL = 1e-10

KIND_ALGEBRAIC = 0
KIND_TRIG = 1
KIND_LAGUERRE = 2


def _cascade_sum(buf, n):
    # Pairwise summation in place; buf[:n] is destroyed.
    while n > 1:
        half = n // 2
        for k in range(half):
            buf[k] = buf[2 * k] + buf[2 * k + 1]
        if n % 2 == 1:
            buf[half] = buf[n - 1]
            n = half + 1
        else:
            n = half
    return buf[0] if n == 1 else 0.0


_cascade_sum_numba = _jit.njit(_cascade_sum)


def _assemble_numba_impl(z, kind, p1, p2):
    # p1, p2: (alpha, beta) for Jacobi, (nu, unused) for Laguerre.
    n = z.shape[0]
    s = np.empty((n, n))
    buf = np.empty(max(2 * n, 1))
    if kind == KIND_LAGUERRE:
        r = np.sqrt(z)
        for i in range(n):
            m = 0
            for l in range(n):
                if l != i:
                    dm = r[i] - r[l]
                    dp = r[i] + r[l]
                    buf[m] = 1.0 / (dm * dm)
                    buf[m + 1] = 1.0 / (dp * dp)
                    m += 2
                    s[i, l] = 1.0 / (dp * dp) - 1.0 / (dm * dm)
            s[i, i] = 1.0 + p1 / z[i] + _cascade_sum_numba(buf, m)
        return s
    for i in range(n):
        m = 0
        for l in range(n):
            if l != i:
                dz = z[i] - z[l]
                buf[m] = 1.0 / (dz * dz)
                m += 1
                s[i, l] = -1.0 / (dz * dz)
        rep = _cascade_sum_numba(buf, m)
        omz = 1.0 - z[i]
        opz = 1.0 + z[i]
        if kind == KIND_ALGEBRAIC:
            s[i, i] = rep + 0.5 * (p1 + 1.0) / (omz * omz) + 0.5 * (p2 + 1.0) / (opz * opz)
        else:
            s[i, i] = 4.0 * omz * opz * rep + 2.0 * (p1 + 1.0) * opz / omz + 2.0 * (p2 + 1.0) * omz / opz
    if kind == KIND_TRIG:
        w = np.sqrt((1.0 - z) * (1.0 + z))
        for i in range(n):
            for l in range(n):
                if l != i:
                    s[i, l] *= 4.0 * w[i] * w[l]
    return s


_assemble_numba = _jit.njit(_assemble_numba_impl)


def _assemble_numpy(z, kind, p1, p2):
    n = z.shape[0]
    off = ~np.eye(n, dtype=bool)
    with np.errstate(divide="ignore"):
        if kind == KIND_LAGUERRE:
            r = np.sqrt(z)
            inv_m = np.where(off, 1.0 / (r[:, None] - r[None, :]) ** 2, 0.0)
            inv_p = np.where(off, 1.0 / (r[:, None] + r[None, :]) ** 2, 0.0)
            s = inv_p - inv_m
            # np.sum is pairwise along a contiguous axis
            diag = 1.0 + p1 / z + np.sum(np.concatenate([inv_m, inv_p], axis=1), axis=1)
            s[np.diag_indices(n)] = diag
            return s
        inv = np.where(off, 1.0 / (z[:, None] - z[None, :]) ** 2, 0.0)
    rep = np.sum(inv, axis=1)
    omz, opz = 1.0 - z, 1.0 + z
    if kind == KIND_ALGEBRAIC:
        s = -inv
        diag = rep + 0.5 * (p1 + 1.0) / omz**2 + 0.5 * (p2 + 1.0) / opz**2
    else:
        w = np.sqrt(omz * opz)
        s = -4.0 * np.outer(w, w) * inv
        diag = 4.0 * omz * opz * rep + 2.0 * (p1 + 1.0) * opz / omz + 2.0 * (p2 + 1.0) * omz / opz
    s[np.diag_indices(n)] = diag
    return s


def _zeros_array(zeros) -> np.ndarray:
    z = np.ascontiguousarray(zeros.zeros if isinstance(zeros, ZeroSet) else zeros, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise DimensionMismatchError("zeros must be a non-empty 1-d sequence")
    if z.size > 1:
        gaps = np.abs(np.diff(np.sort(z)))
        scale = np.maximum(1.0, np.abs(np.sort(z)[:-1]))
        if np.any(gaps < SPACING_TOL * scale):
            raise DegenerateSpacingError("nearly coincident zeros")
    return z


def _check_table(zeros, kind: str, **expected) -> None:
    if not isinstance(zeros, ZeroSet):
        return
    t = zeros.table
    if t.kind != kind:
        raise DomainError(f"zeros come from a {t.kind} table, expected {kind}")
    for key, val in expected.items():
        if not math.isclose(getattr(t, key), val, rel_tol=0, abs_tol=1e-15):
            raise DomainError(f"zeros were computed for {key}={getattr(t, key)}, not {val}")


def _build(z, kind, p1, p2) -> np.ndarray:
    s = _jit.pick(_assemble_numba, _assemble_numpy)(z, kind, float(p1), float(p2))
    # exact symmetry; both triangles are computed from the same expression
    return 0.5 * (s + s.T)


def inv_cov_jacobi_algebraic(zeros, alpha: float, beta: float) -> np.ndarray:
    """S for the algebraic Jacobi ensemble."""
    _check_table(zeros, "jacobi", alpha=alpha, beta=beta)
    if not np.all(np.abs(_zeros_array(zeros)) < 1):
        raise DomainError("Jacobi zeros must lie in (-1, 1)")
    return _build(_zeros_array(zeros), KIND_ALGEBRAIC, alpha, beta)


def conjugator(zeros) -> np.ndarray:
    """Diagonal of D = diag(2 sqrt(1 - z_i^2))."""
    z = _zeros_array(zeros)
    return 2.0 * np.sqrt((1.0 - z) * (1.0 + z))


def inv_cov_jacobi_trig(zeros, alpha: float, beta: float) -> np.ndarray:
    """S~ for trigonometric coordinates, cross-checked against D S D."""
    z = _zeros_array(zeros)
    s_tilde = _build(z, KIND_TRIG, alpha, beta)
    s_alg = inv_cov_jacobi_algebraic(zeros, alpha, beta)
    d = conjugator(z)
    dsd = d[:, None] * s_alg * d[None, :]
    gap = np.max(np.abs(s_tilde - dsd))
    if gap > CONJUGATION_TOL * np.max(np.abs(s_tilde)):
        raise ConsistencyError(f"S~ and D S D differ by {gap:.3e}")
    return s_tilde


def inv_cov_laguerre(zeros, nu: float) -> np.ndarray:
    """S for the Laguerre ensemble; zeros are those of L_N^(nu-1)."""
    _check_table(zeros, "laguerre", nu=nu)
    z = _zeros_array(zeros)
    if not np.all(z > 0):
        raise DomainError("Laguerre zeros must be positive")
    return _build(z, KIND_LAGUERRE, nu, 0.0)


def eigenvalues_closed_form(params: EnsembleParams) -> np.ndarray:
    """lambda_k, k = 1..N: 2k(2N+alpha+beta+1-k) for Jacobi, 2k for Laguerre."""
    k = np.arange(1, params.dim_n + 1, dtype=float)
    if params.family is Family.LAGUERRE:
        return 2.0 * k
    return 2.0 * k * (2 * params.dim_n + params.alpha + params.beta + 1 - k)


@dataclass(frozen=True, eq=False)
class SpectralCov:
    """Inverse covariance, its spectrum and the covariance by two routes.

    For the algebraic Jacobi family the closed-form spectrum and ``t_matrix``
    belong to S~ = D S D, so the spectral route returns D S~^{-1} D.
    """

    params: EnsembleParams
    zeros: ZeroSet
    s_matrix: np.ndarray
    eigenvalues: np.ndarray
    t_matrix: OrthoMatrix
    sigma_spectral: np.ndarray
    sigma_direct: np.ndarray
    route_discrepancy: float
    d_diag: np.ndarray | None = field(default=None)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "zeros": self.zeros.zeros.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "s_matrix": self.s_matrix.tolist(),
            "sigma": self.sigma_direct.tolist(),
            "sigma_spectral": self.sigma_spectral.tolist(),
            "route_discrepancy": self.route_discrepancy,
            "orthogonality_residual": self.t_matrix.max_orthogonality_residual,
        }


def spd_inverse(s: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive-definite matrix via Cholesky."""
    try:
        factor = scipy.linalg.cho_factor(s, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"Cholesky factorization failed: {exc}") from exc
    eye = np.eye(s.shape[0])
    inv = scipy.linalg.cho_solve(factor, eye)
    # one step of iterative refinement
    inv += scipy.linalg.cho_solve(factor, eye - s @ inv)
    return 0.5 * (inv + inv.T)


def _readonly(*arrays):
    for a in arrays:
        if a is not None:
            a.setflags(write=False)


def assemble(params: EnsembleParams) -> SpectralCov:
    table = recurrence_for(params)
    zeros = find_zeros(table, params.dim_n)
    t = build_t_matrix(params, table, zeros)
    lam = eigenvalues_closed_form(params)
    spectral = (t.entries / lam[None, :]) @ t.entries.T
    spectral = 0.5 * (spectral + spectral.T)
    d = None
    if params.family is Family.LAGUERRE:
        s = inv_cov_laguerre(zeros, params.nu)
    elif params.family is Family.JACOBI_TRIGONOMETRIC:
        s = inv_cov_jacobi_trig(zeros, params.alpha, params.beta)
    else:
        s = inv_cov_jacobi_algebraic(zeros, params.alpha, params.beta)
        d = conjugator(zeros)
        spectral = d[:, None] * spectral * d[None, :]
    direct = spd_inverse(s)
    disc = float(np.max(np.abs(spectral - direct)))
    _readonly(s, lam, spectral, direct, d)
    return SpectralCov(params, zeros, s, lam, t, spectral, direct, disc, d)


def matrix_to_csv(m: np.ndarray) -> str:
    """Row-major CSV with shortest round-trip float formatting."""
    buf = io.StringIO()
    for row in np.atleast_2d(m):
        buf.write(",".join(repr(float(v)) for v in row))
        buf.write("\n")
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [line.split(",") for line in text.strip().splitlines() if line.strip()]
    return np.array([[float(v) for v in row] for row in rows])


def matrix_to_json(m: np.ndarray) -> str:
    return json.dumps(np.atleast_2d(m).tolist())
