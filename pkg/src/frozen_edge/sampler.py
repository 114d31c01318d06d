"""Random-walk Metropolis sampling of the finite-coupling ensembles.

Used to check the freezing CLTs empirically: for large coupling the
centred and scaled samples should have covariance close to Sigma_N.

Chain coordinates:
  * algebraic Jacobi: x on the alcove -1 < x_1 < ... < x_N < 1
  * trigonometric Jacobi: t with pi/2 > t_1 > ... > t_N > 0
  * Laguerre: y = x / sqrt(2 beta) with 0 < y_1 < ... < y_N, where the
    fluctuations live on the scale 1/sqrt(2 beta)
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from . import _jit
from .errors import DomainError, TuningError
from .frozencov import assemble
from .params import EnsembleParams, Family

KIND_ALGEBRAIC = 0
KIND_TRIG = 1
KIND_LAGUERRE = 2

_KINDS = {
    Family.JACOBI_ALGEBRAIC: KIND_ALGEBRAIC,
    Family.JACOBI_TRIGONOMETRIC: KIND_TRIG,
    Family.LAGUERRE: KIND_LAGUERRE,
}

ACCEPT_LO = 0.05
ACCEPT_HI = 0.7
BLOCK = 4096


@dataclass(frozen=True)
class ChainConfig:
    n_samples: int = 1_000_000
    burn_in: int = 100_000
    thinning: int = 10
    proposal_scale: float = 1.5  # in units of the CLT standard deviation per coordinate
    seed: int = 0
    n_chains: int = 16

    def __post_init__(self):
        if self.n_samples <= 0:
            raise DomainError("n_samples must be positive")
        if self.burn_in < 0:
            raise DomainError("burn_in must be non-negative")
        if self.thinning < 1:
            raise DomainError("thinning must be at least 1")
        if not self.proposal_scale > 0:
            raise DomainError("proposal_scale must be positive")
        if self.seed < 0:
            raise DomainError("seed must be unsigned")
        if self.n_chains < 1:
            raise DomainError("n_chains must be at least 1")

    @property
    def per_chain(self) -> int:
        return -(-self.n_samples // self.n_chains)


@dataclass(frozen=True, eq=False)
class EmpiricalCLT:
    params: EnsembleParams
    coupling: float
    n_retained: int
    sample_mean: np.ndarray
    empirical_cov: np.ndarray
    reference_cov: np.ndarray
    max_entry_deviation: float
    acceptance_rate: float
    config: ChainConfig

    def within(self, rel: float = 0.1, abs_floor: float = 0.02) -> bool:
        """Every entry within max(rel*|ref|, abs_floor) of the reference."""
        tol = np.maximum(rel * np.abs(self.reference_cov), abs_floor)
        return bool(np.all(np.abs(self.empirical_cov - self.reference_cov) <= tol))

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "coupling": self.coupling,
            "n_retained": self.n_retained,
            "sample_mean": self.sample_mean.tolist(),
            "empirical_cov": self.empirical_cov.tolist(),
            "reference_cov": self.reference_cov.tolist(),
            "max_entry_deviation": self.max_entry_deviation,
            "acceptance_rate": self.acceptance_rate,
            "config": {
                "n_samples": self.config.n_samples,
                "burn_in": self.config.burn_in,
                "thinning": self.config.thinning,
                "proposal_scale": self.config.proposal_scale,
                "seed": self.config.seed,
                "n_chains": self.config.n_chains,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# -- log densities in chain coordinates ----------------------------------------

def _logp_impl(kind, x, p1, p2, c):
    n = x.shape[0]
    s = 0.0
    if kind == KIND_ALGEBRAIC:
        if x[0] <= -1.0 or x[n - 1] >= 1.0:
            return -math.inf
        ea = 0.5 * (p1 + 1.0) * c - 0.5
        eb = 0.5 * (p2 + 1.0) * c - 0.5
        for i in range(n):
            s += ea * math.log(1.0 - x[i]) + eb * math.log(1.0 + x[i])
        for i in range(n - 1):
            for j in range(i + 1, n):
                d = x[j] - x[i]
                if d <= 0.0:
                    return -math.inf
                s += c * math.log(d)
        return s
    if kind == KIND_TRIG:
        if x[0] >= 0.5 * math.pi or x[n - 1] <= 0.0:
            return -math.inf
        for i in range(n):
            s += c * (p1 - p2) * math.log(math.sin(x[i])) + c * (p2 + 1.0) * math.log(math.sin(2.0 * x[i]))
        for i in range(n - 1):
            for j in range(i + 1, n):
                if x[j] >= x[i]:
                    return -math.inf
                # cos 2t_j - cos 2t_i = 2 sin(t_i + t_j) sin(t_i - t_j)
                s += c * math.log(2.0 * math.sin(x[i] + x[j]) * math.sin(x[i] - x[j]))
        return s
    # Laguerre, scaled coordinates
    if x[0] <= 0.0:
        return -math.inf
    for i in range(n):
        s += 2.0 * p1 * c * math.log(x[i]) - c * x[i] * x[i]
    for i in range(n - 1):
        for j in range(i + 1, n):
            d = x[j] - x[i]
            if d <= 0.0:
                return -math.inf
            s += 2.0 * c * math.log(d * (x[j] + x[i]))
    return s


_logp_numba = _jit.njit(_logp_impl)


def _logp_numpy(kind, x, p1, p2, c):
    # x has shape (chains, N); returns one value per chain
    n = x.shape[1]
    iu, ju = np.triu_indices(n, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == KIND_ALGEBRAIC:
            ok = (x[:, 0] > -1.0) & (x[:, -1] < 1.0)
            d = x[:, ju] - x[:, iu]
            ok &= np.all(d > 0, axis=1)
            ea = 0.5 * (p1 + 1.0) * c - 0.5
            eb = 0.5 * (p2 + 1.0) * c - 0.5
            s = np.sum(ea * np.log1p(-x) + eb * np.log1p(x), axis=1) + c * np.sum(np.log(d), axis=1)
        elif kind == KIND_TRIG:
            ok = (x[:, 0] < 0.5 * math.pi) & (x[:, -1] > 0.0)
            ok &= np.all(x[:, iu] > x[:, ju], axis=1)
            ti, tj = x[:, iu], x[:, ju]
            s = np.sum(c * (p1 - p2) * np.log(np.sin(x)) + c * (p2 + 1.0) * np.log(np.sin(2.0 * x)), axis=1)
            s += c * np.sum(np.log(2.0 * np.sin(ti + tj) * np.sin(ti - tj)), axis=1)
        else:
            ok = x[:, 0] > 0.0
            d = x[:, ju] - x[:, iu]
            ok &= np.all(d > 0, axis=1)
            s = np.sum(2.0 * p1 * c * np.log(x) - c * x * x, axis=1)
            s += 2.0 * c * np.sum(np.log(d * (x[:, ju] + x[:, iu])), axis=1)
    return np.where(ok, s, -np.inf)


# -- chain kernels -----------------------------------------------------------------

def _block_numba_impl(kind, x, lp, step, p1, p2, c, normals, log_u, thin, phase, record, out, counts, accepted):
    n_steps = normals.shape[0]
    n_chains, n = x.shape
    prop = np.empty(n)
    for ch in range(n_chains):
        cnt = 0
        ph = phase[ch]
        for b in range(n_steps):
            for i in range(n):
                prop[i] = x[ch, i] + step[i] * normals[b, ch, i]
            lpp = _logp_numba(kind, prop, p1, p2, c)
            if log_u[b, ch] < lpp - lp[ch]:
                for i in range(n):
                    x[ch, i] = prop[i]
                lp[ch] = lpp
                accepted[ch] += 1
            if record:
                ph += 1
                if ph == thin:
                    ph = 0
                    for i in range(n):
                        out[ch, cnt, i] = x[ch, i]
                    cnt += 1
        counts[ch] = cnt
        phase[ch] = ph


_block_numba = _jit.njit(_block_numba_impl)


def _block_numpy(kind, x, lp, step, p1, p2, c, normals, log_u, thin, phase, record, out, counts, accepted):
    n_steps = normals.shape[0]
    counts[:] = 0
    for b in range(n_steps):
        prop = x + step[None, :] * normals[b]
        lpp = _logp_numpy(kind, prop, p1, p2, c)
        acc = log_u[b] < lpp - lp
        x[acc] = prop[acc]
        lp[acc] = lpp[acc]
        accepted += acc
        if record:
            phase += 1
            hit = phase == thin
            if np.any(hit):
                phase[hit] = 0
                out[hit, counts[hit]] = x[hit]
                counts[hit] += 1


# -- public API ------------------------------------------------------------------

def log_density(params: EnsembleParams, point, coupling: float) -> float:
    """Unnormalised log density at ``point`` in the ensemble's own coordinates.

    Jacobi (algebraic): x in the alcove, coupling kappa.
    Jacobi (trigonometric): t in the trigonometric alcove, coupling kappa.
    Laguerre: x in the type-B chamber, coupling beta.
    Points outside the open domain give -inf.
    """
    x = np.asarray(point, dtype=float).reshape(-1)
    if x.shape[0] != params.dim_n:
        raise DomainError(f"point has {x.shape[0]} coordinates, expected {params.dim_n}")
    if not coupling > 0:
        raise DomainError("coupling must be positive")
    kind = _KINDS[params.family]
    if kind == KIND_LAGUERRE:
        # density in x: prod (x_j^2 - x_i^2)^{2b} prod x_i^{2 nu b} e^{-x_i^2/2}
        scale = math.sqrt(2.0 * coupling)
        y = x / scale
        val = _logp_impl(kind, y, params.nu, 0.0, coupling)
        if not math.isfinite(val):
            return -math.inf
        n = params.dim_n
        return val + math.log(scale) * (2.0 * coupling * n * (n - 1) + 2.0 * params.nu * coupling * n)
    p2 = params.beta
    return float(_logp_impl(kind, x, params.alpha, p2, coupling))


def _centre(params: EnsembleParams, zeros: np.ndarray) -> np.ndarray:
    if params.family is Family.JACOBI_TRIGONOMETRIC:
        return 0.5 * np.arccos(zeros)
    if params.family is Family.LAGUERRE:
        return np.sqrt(zeros)
    return zeros.copy()


def check_domain(params: EnsembleParams, pts: np.ndarray) -> bool:
    """All rows of ``pts`` (chain coordinates) strictly inside the domain."""
    kind = _KINDS[params.family]
    if kind == KIND_TRIG:
        ok = (pts[:, 0] < 0.5 * math.pi) & (pts[:, -1] > 0) & np.all(np.diff(pts, axis=1) < 0, axis=1)
    elif kind == KIND_LAGUERRE:
        ok = (pts[:, 0] > 0) & np.all(np.diff(pts, axis=1) > 0, axis=1)
    else:
        ok = (pts[:, 0] > -1) & (pts[:, -1] < 1) & np.all(np.diff(pts, axis=1) > 0, axis=1)
    return bool(np.all(ok))


def run_chain(
    params: EnsembleParams,
    coupling: float,
    config: ChainConfig = ChainConfig(),
    sample_stream: TextIO | None = None,
) -> EmpiricalCLT:
    """Run ``config.n_chains`` Metropolis chains and compare the empirical
    covariance of the centred, scaled samples with Sigma_N.

    Retained samples may be streamed as CSV rows to ``sample_stream``.
    """
    if not coupling > 0:
        raise DomainError("coupling must be positive")
    kind = _KINDS[params.family]
    spec = assemble(params)
    centre = _centre(params, spec.zeros.zeros)
    out_scale = math.sqrt(2.0 * coupling) if kind == KIND_LAGUERRE else math.sqrt(coupling)
    p1 = params.nu if kind == KIND_LAGUERRE else params.alpha
    p2 = 0.0 if kind == KIND_LAGUERRE else params.beta
    n, n_chains = params.dim_n, config.n_chains
    # per-coordinate step: proposal_scale times the CLT standard deviation in chain coordinates
    step = config.proposal_scale * np.sqrt(np.diag(spec.sigma_direct)) / out_scale

    rng = np.random.Generator(np.random.PCG64(config.seed))
    x = np.tile(centre, (n_chains, 1))
    lp = np.array([_logp_impl(kind, x[0], p1, p2, coupling)] * n_chains)
    phase = np.zeros(n_chains, dtype=np.int64)
    counts = np.zeros(n_chains, dtype=np.int64)
    accepted = np.zeros(n_chains, dtype=np.int64)
    out = np.empty((n_chains, BLOCK // config.thinning + 1, n))
    kernel = _jit.pick(_block_numba, _block_numpy)
    writer = csv.writer(sample_stream, lineterminator="\n") if sample_stream is not None else None

    def advance(steps: int, record: bool) -> None:
        normals = rng.standard_normal((steps, n_chains, n))
        log_u = np.log1p(-rng.random((steps, n_chains)))
        kernel(kind, x, lp, step, float(p1), float(p2), float(coupling), normals, log_u,
               config.thinning, phase, record, out, counts, accepted)

    left = config.burn_in
    while left > 0:
        advance(min(BLOCK, left), False)
        left -= BLOCK
    accepted[:] = 0

    target = config.per_chain
    kept = 0
    total_steps = 0
    sum_d = np.zeros(n)
    sum_dd = np.zeros((n, n))
    while kept < target:
        need = (target - kept) * config.thinning - phase[0]
        steps = min(BLOCK, max(need, 1))
        advance(steps, True)
        total_steps += steps
        m = int(min(counts[0], target - kept))
        if m == 0:
            continue
        pts = out[:, :m, :]
        if not check_domain(params, pts.reshape(-1, n)):
            raise DomainError("a retained sample left the domain")
        d = out_scale * (pts - centre)
        sum_d += d.sum(axis=(0, 1))
        sum_dd += np.einsum("cki,ckj->ij", d, d)
        if writer is not None:
            for row in d.reshape(-1, n):
                writer.writerow([repr(float(v)) for v in row])
        kept += m

    total = kept * n_chains
    mean = sum_d / total
    cov = sum_dd / total - np.outer(mean, mean)
    cov = 0.5 * (cov + cov.T)
    rate = float(accepted.sum() / (total_steps * n_chains))
    if not ACCEPT_LO <= rate <= ACCEPT_HI:
        hint = "decrease" if rate < ACCEPT_LO else "increase"
        raise TuningError(
            f"acceptance rate {rate:.3f} outside [{ACCEPT_LO}, {ACCEPT_HI}]; {hint} proposal_scale "
            f"(currently {config.proposal_scale})"
        )
    ref = np.array(spec.sigma_direct)
    dev = float(np.max(np.abs(cov - ref)))
    return EmpiricalCLT(params, float(coupling), total, mean, cov, ref, dev, rate, config)
