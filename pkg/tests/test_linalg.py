import numpy as np
import pytest

from frozen_edge import linalg
from frozen_edge.errors import ConvergenceFailure


def _random_tridiagonal(n, seed):
    rng = np.random.default_rng(seed)
    return rng.normal(size=n), rng.normal(size=max(n - 1, 0))


@pytest.mark.parametrize("n", [1, 2, 5, 50, 200])
def test_ql_matches_lapack(backend, n):
    d, e = _random_tridiagonal(n, n)
    ref = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    vals = linalg.eigvalsh_tridiagonal(d, e)
    assert np.max(np.abs(vals - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))
    assert np.all(np.diff(vals) >= 0)


@pytest.mark.parametrize("n", [1, 3, 40])
def test_sturm_bisection_matches_lapack(backend, n):
    d, e = _random_tridiagonal(n, 100 + n)
    ref = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    assert np.allclose(linalg.sturm_eigvalsh_tridiagonal(d, e), ref, rtol=0, atol=1e-12)


def test_sweep_cap_falls_back_or_raises(backend):
    d, e = _random_tridiagonal(30, 7)
    ref = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    assert np.allclose(linalg.eigvalsh_tridiagonal(d, e, max_sweeps=0), ref, atol=1e-12)
    with pytest.raises(ConvergenceFailure):
        linalg.eigvalsh_tridiagonal(d, e, max_sweeps=0, fallback=False)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        linalg.eigvalsh_tridiagonal([1.0, 2.0, 3.0], [1.0])
    with pytest.raises(ValueError):
        linalg.eigvalsh_tridiagonal([1.0, np.nan], [1.0])
    with pytest.raises(ValueError):
        linalg.tridiagonalize(np.ones((2, 3)))


@pytest.mark.parametrize("n", [1, 2, 6, 60])
def test_householder_preserves_spectrum(backend, n):
    rng = np.random.default_rng(n)
    a = rng.normal(size=(n, n))
    a = a + a.T
    d, e = linalg.tridiagonalize(a)
    assert d.shape == (n,)
    assert np.allclose(linalg.eigvalsh(a), np.linalg.eigvalsh(a), atol=1e-11 * max(1, n))


def test_repeated_eigenvalues(backend):
    vals = linalg.eigvalsh_tridiagonal(np.full(6, 2.0), np.zeros(5))
    assert np.array_equal(vals, np.full(6, 2.0))
