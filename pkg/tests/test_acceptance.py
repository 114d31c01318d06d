"""One test per acceptance criterion, each at its pinned tolerance.

Every test records a line "PASS criterion k: ..." or "FAIL criterion k: ..."
that is printed in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from frozen_edge import (
    ChainConfig,
    EnsembleParams,
    assemble,
    bessel_zeros,
    find_zeros,
    limit_cov,
    limit_orthonormality,
    recurrence_for,
    run_chain,
    scaled_cov_sequence,
    spectral_sum,
)
from frozen_edge.convergence import algebraic_edge_scaling, stepfn_sup_error, zero_asymptotics
from frozen_edge.frozencov import conjugator, inv_cov_jacobi_algebraic, inv_cov_jacobi_trig
from frozen_edge.linalg import eigvalsh

JACOBI_GRID = [(0.0, 0.0), (0.5, 1.5), (-0.5, 2.0)]
LAGUERRE_GRID = [0.5, 1.0, 3.0]
N_GRID = [5, 20, 100]


@pytest.fixture
def report(record_property):
    def emit(k, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
        print(line)
        record_property("acceptance", line)
        return ok

    return emit


def _trig(alpha, beta, n):
    return EnsembleParams.jacobi(alpha, beta, n, trig=True)


def test_c01_jacobi_spectrum(report):
    worst = 0.0
    for alpha, beta in JACOBI_GRID:
        for n in N_GRID:
            sc = assemble(_trig(alpha, beta, n))
            ref = np.sort(sc.eigenvalues)
            k = np.arange(1, n + 1)
            assert np.allclose(np.sort(2 * k * (2 * n + alpha + beta + 1 - k)), ref, rtol=0, atol=0)
            for vals in (np.linalg.eigvalsh(sc.s_matrix), eigvalsh(sc.s_matrix)):
                worst = max(worst, float(np.max(np.abs(np.sort(vals) - ref) / ref)))
    assert report(1, worst <= 1e-8, f"max relative eigenvalue error {worst:.2e} (tol 1e-8)")


def test_c02_laguerre_spectrum(report):
    worst = 0.0
    for nu in LAGUERRE_GRID:
        for n in N_GRID:
            s = assemble(EnsembleParams.laguerre(nu, n)).s_matrix
            ref = 2.0 * np.arange(1, n + 1)
            for vals in (np.linalg.eigvalsh(s), eigvalsh(s)):
                worst = max(worst, float(np.max(np.abs(np.sort(vals) - ref) / ref)))
    assert report(2, worst <= 1e-8, f"max relative eigenvalue error {worst:.2e} (tol 1e-8)")


def test_c03_eigenvectors(report):
    worst = 0.0
    cases = [_trig(a, b, n) for a, b in JACOBI_GRID for n in N_GRID]
    cases += [EnsembleParams.laguerre(nu, n) for nu in LAGUERRE_GRID for n in N_GRID]
    for params in cases:
        sc = assemble(params)
        t = sc.t_matrix.entries
        res = np.max(np.abs(sc.s_matrix @ t - t * sc.eigenvalues[None, :]), axis=0) / sc.eigenvalues
        worst = max(worst, float(np.max(res)))
    assert report(3, worst <= 1e-6, f"max ||S t_j - lambda_j t_j||_inf / lambda_j = {worst:.2e} (tol 1e-6)")


def test_c04_conjugation(report):
    worst = 0.0
    for alpha, beta in JACOBI_GRID:
        for n in N_GRID:
            zs = find_zeros(recurrence_for(_trig(alpha, beta, n)), n)
            st = inv_cov_jacobi_trig(zs, alpha, beta)
            d = conjugator(zs)
            dsd = d[:, None] * inv_cov_jacobi_algebraic(zs, alpha, beta) * d[None, :]
            worst = max(worst, float(np.max(np.abs(st - dsd)) / np.max(np.abs(st))))
    assert report(4, worst <= 1e-10, f"max relative |S~ - DSD| = {worst:.2e} (tol 1e-10)")


def test_c05_orthogonality(report):
    worst = 0.0
    for n in N_GRID + [200]:
        for params in [_trig(a, b, n) for a, b in JACOBI_GRID] + [EnsembleParams.laguerre(nu, n) for nu in LAGUERRE_GRID]:
            worst = max(worst, assemble(params).t_matrix.max_orthogonality_residual)
    assert report(5, worst <= 1e-8, f"max |T^T T - I| = {worst:.2e} (tol 1e-8)")


def test_c06_route_agreement(report):
    worst = 0.0
    for n in N_GRID:
        cases = [EnsembleParams.jacobi(a, b, n, trig=t) for a, b in JACOBI_GRID for t in (False, True)]
        cases += [EnsembleParams.laguerre(nu, n) for nu in LAGUERRE_GRID]
        for params in cases:
            sc = assemble(params)
            worst = max(worst, sc.route_discrepancy / float(np.max(np.abs(sc.sigma_direct))))
    assert report(6, worst <= 1e-7, f"max relative route discrepancy {worst:.2e} (tol 1e-7)")


def test_c07_gram_identity(report):
    worst = 0.0
    for alpha in (-0.5, 0.0, 0.5, 2.0):
        worst = max(worst, float(np.max(np.abs(limit_orthonormality(alpha, "jacobi-trig", 6) - np.eye(6)))))
    for nu in (1.0, 2.0):
        worst = max(worst, float(np.max(np.abs(limit_orthonormality(nu, "laguerre", 6) - np.eye(6)))))
    assert report(7, worst <= 1e-8, f"max |G - I| for r, s <= 6 = {worst:.2e} (tol 1e-8)")


def test_c08_trig_convergence(report):
    start = time.perf_counter()
    rep = scaled_cov_sequence(_trig(0.0, 0.0, 25), 1, 1, [25, 50, 100, 200])
    elapsed = time.perf_counter() - start
    ok = rep.strictly_decreasing and rep.fitted_rate <= -0.8 and elapsed < 60
    errs = ", ".join(f"{e:.3e}" for e in rep.abs_errors)
    assert report(8, ok, f"errors [{errs}], rate {rep.fitted_rate:.3f} (<= -0.8), {elapsed:.1f}s (< 60s)")


def test_c09_algebraic_limit(report):
    worst = 0.0
    parts = []
    for alpha in (0.0, 0.5):
        target = limit_cov("jacobi-algebraic", alpha, 1, 1).value
        j = bessel_zeros(alpha, 1).j(1)
        assert target == pytest.approx(limit_cov("jacobi-trig", alpha, 1, 1).value / (4 * j * j), rel=1e-15)
        for beta in (0.0, 1.0):
            sigma_nn = float(assemble(EnsembleParams.jacobi(alpha, beta, 200)).sigma_direct[-1, -1])
            rel = abs(sigma_nn - target) / target
            worst = max(worst, rel)
            parts.append(f"({alpha},{beta}) sigma_NN={sigma_nn:.3e} vs {target:.4f}")
    ok = worst <= 0.02
    assert report(9, ok, f"max relative gap {worst:.3f} (tol 0.02); " + "; ".join(parts))


def test_c09_diagnostic_edge_scaling():
    # what the algebraic entries do converge to: N^4 sigma_NN -> 4 j^2 times the trig limit
    for alpha, beta in [(0.0, 0.0), (0.5, 1.0)]:
        rep = algebraic_edge_scaling(EnsembleParams.jacobi(alpha, beta, 25), 1, 1)
        assert np.all(np.diff(rep.rel_errors) < 0)
        assert rep.rel_errors[-1] <= 0.05


def test_c10_laguerre_convergence(report):
    ok = True
    parts = []
    for nu in (1.0, 2.0):
        rep = scaled_cov_sequence(EnsembleParams.laguerre(nu, 25), 1, 1, [25, 50, 100, 200])
        gap = float(rep.relative_errors[-1])
        ok &= rep.strictly_decreasing and gap <= 0.02
        parts.append(f"nu={nu}: final gap {gap:.4f}, decreasing={rep.strictly_decreasing}")
    assert report(10, ok, "; ".join(parts) + " (tol 0.02)")


def test_c11_step_function_sup(report):
    worst = 0.0
    for template in [EnsembleParams.jacobi(0, 0, 1), EnsembleParams.jacobi(0.5, 1.5, 1),
                     EnsembleParams.laguerre(1.0, 1), EnsembleParams.laguerre(2.5, 1)]:
        for r in (1, 2, 3):
            e50 = stepfn_sup_error(template.with_n(50), r, 0.8)
            e200 = stepfn_sup_error(template.with_n(200), r, 0.8)
            worst = max(worst, e200 / e50)
    assert report(11, worst <= 1 / 3, f"max sup(N=200)/sup(N=50) = {worst:.3f} (tol 1/3)")


def test_c12_zero_asymptotics(report):
    worst3, worst2 = -math.inf, -math.inf
    for params in [EnsembleParams.jacobi(0, 0, 1), EnsembleParams.jacobi(0.5, 1.5, 1),
                   EnsembleParams.laguerre(1.0, 1), EnsembleParams.laguerre(2.5, 1)]:
        for r in (1, 2):
            za = zero_asymptotics(params, r, (50, 100, 200))
            for key, slope in za.slopes().items():
                if za.claimed_orders[key] == -3:
                    worst3 = max(worst3, slope)
                else:
                    worst2 = max(worst2, slope)
    ok = worst3 <= -2.5 and worst2 <= -1.5
    assert report(12, ok, f"worst slope {worst3:.2f} for O(N^-3) claims (<= -2.5), {worst2:.2f} for O(N^-2) claims (<= -1.5)")


def test_c13_spectral_sum(report):
    worst = 0.0
    for alpha, beta in JACOBI_GRID:
        params = _trig(alpha, beta, 40)
        sc = assemble(params)
        t = sc.t_matrix.entries
        for r, s in [(1, 1), (1, 2), (2, 3), (3, 3)]:
            direct = 40**2 * sc.sigma_direct[40 - r, 40 - s]
            worst = max(worst, abs(spectral_sum(params, r, s, t) - direct) / abs(direct))
    assert report(13, worst <= 1e-9, f"max relative mismatch {worst:.2e} (tol 1e-9)")


def test_c14_monte_carlo(report):
    start = time.perf_counter()
    ok = True
    parts = []
    for params in [EnsembleParams.jacobi(0, 0, 1), EnsembleParams.jacobi(0, 0, 2),
                   EnsembleParams.laguerre(1.0, 1), EnsembleParams.laguerre(1.0, 2)]:
        res = run_chain(params, 1e4, ChainConfig(n_samples=1_000_000))
        within = res.within(0.1, 0.02)
        ok &= within and res.n_retained >= 1_000_000
        parts.append(f"{params.family.value} N={params.dim_n}: dev {res.max_entry_deviation:.4f}, acc {res.acceptance_rate:.2f}")
    elapsed = time.perf_counter() - start
    assert report(14, ok, "; ".join(parts) + f" ({elapsed:.0f}s)")
