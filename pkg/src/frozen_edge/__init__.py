"""Covariance matrices of frozen Jacobi and Laguerre ensembles and their
Bessel hard-edge limits."""
from __future__ import annotations

__version__ = "0.1.0"

from .bessel import (
    BesselZeroTable,
    LimitKind,
    LimitValue,
    bessel_j,
    bessel_jp,
    bessel_zeros,
    limit_cov,
    limit_fn_jacobi,
    limit_fn_laguerre,
    limit_orthonormality,
)
from .convergence import (
    ConvergenceReport,
    StepFn,
    algebraic_edge_scaling,
    h_weights,
    scaled_cov_sequence,
    spectral_sum,
    step_fn,
    zero_asymptotics,
)
from .dualpoly import DualEvaluation, DualWeights, OrthoMatrix, build_t_matrix, dual_christoffel, dual_eval_all
from .errors import (
    ConsistencyError,
    ConvergenceFailure,
    DomainError,
    FrozenEdgeError,
    NotPositiveDefiniteError,
    TuningError,
)
from .frozencov import SpectralCov, assemble, inv_cov_jacobi_algebraic, inv_cov_jacobi_trig, inv_cov_laguerre
from .orthopoly import RecurrenceTable, ZeroSet, find_zeros, jacobi_recurrence, laguerre_recurrence, recurrence_for
from .params import EnsembleParams, Family
from .sampler import ChainConfig, EmpiricalCLT, log_density, run_chain

__all__ = [name for name in dir() if not name.startswith("_")]
