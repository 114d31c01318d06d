import io
import math

import numpy as np
import pytest

from frozen_edge import ChainConfig, EnsembleParams, log_density, run_chain
from frozen_edge.errors import DomainError, TuningError
from frozen_edge.sampler import check_domain

QUICK = ChainConfig(n_samples=20_000, burn_in=2_000, n_chains=4)


def test_log_density_examples():
    assert log_density(EnsembleParams.jacobi(0, 0, 1), [0.0], 2.0) == 0.0
    # (2^2 - 1^2)^(2*3) * 1^6 * 2^6 * exp(-(1 + 4)/2)
    val = log_density(EnsembleParams.laguerre(1, 2), [1.0, 2.0], 3.0)
    assert val == pytest.approx(6 * math.log(6) - 2.5, rel=1e-14)


@pytest.mark.parametrize(
    "params,point",
    [
        (EnsembleParams.jacobi(0, 0, 2), [0.3, 0.3]),
        (EnsembleParams.jacobi(0, 0, 2), [0.5, 0.2]),
        (EnsembleParams.jacobi(0, 0, 2), [-1.0, 0.2]),
        (EnsembleParams.jacobi(0, 0, 2, trig=True), [0.2, 0.5]),
        (EnsembleParams.jacobi(0, 0, 2, trig=True), [1.6, 0.5]),
        (EnsembleParams.laguerre(1, 2), [0.0, 1.0]),
        (EnsembleParams.laguerre(1, 2), [1.0, 1.0]),
    ],
)
def test_log_density_rejects_boundary_and_disorder(params, point):
    assert log_density(params, point, 10.0) == -math.inf


def test_log_density_argument_checks():
    with pytest.raises(DomainError):
        log_density(EnsembleParams.jacobi(0, 0, 2), [0.1], 2.0)
    with pytest.raises(DomainError):
        log_density(EnsembleParams.jacobi(0, 0, 1), [0.1], 0.0)


def test_config_validation():
    for bad in [dict(n_samples=0), dict(proposal_scale=0.0), dict(thinning=0), dict(burn_in=-1), dict(n_chains=0)]:
        with pytest.raises(DomainError):
            ChainConfig(**bad)
    assert ChainConfig(n_samples=10, n_chains=4).per_chain == 3


def test_fixed_seed_is_bit_identical():
    p = EnsembleParams.jacobi(0.5, 1.5, 2)
    a = run_chain(p, 1e4, QUICK)
    b = run_chain(p, 1e4, QUICK)
    c = run_chain(p, 1e4, ChainConfig(n_samples=20_000, burn_in=2_000, n_chains=4, seed=1))
    assert np.array_equal(a.empirical_cov, b.empirical_cov)
    assert not np.array_equal(a.empirical_cov, c.empirical_cov)


def test_backends_produce_the_same_chain():
    from frozen_edge import _jit

    if not _jit.HAVE_NUMBA:
        pytest.skip("numba not installed")
    p = EnsembleParams.laguerre(1.5, 2)
    cfg = ChainConfig(n_samples=2_000, burn_in=500, n_chains=2)
    covs = []
    for name in ("numba", "numpy"):
        with _jit.use_backend(name):
            covs.append(run_chain(p, 1e4, cfg).empirical_cov)
    assert np.array_equal(covs[0], covs[1])


def test_streamed_samples():
    buf = io.StringIO()
    res = run_chain(EnsembleParams.jacobi(0, 0, 2, trig=True), 1e4, QUICK, sample_stream=buf)
    rows = np.loadtxt(io.StringIO(buf.getvalue()), delimiter=",")
    assert rows.shape == (res.n_retained, 2)
    assert np.allclose(np.cov(rows.T, bias=True), res.empirical_cov, atol=1e-12)


def test_check_domain():
    p = EnsembleParams.jacobi(0, 0, 2)
    assert check_domain(p, np.array([[-0.5, 0.5]]))
    assert not check_domain(p, np.array([[0.5, -0.5]]))


@pytest.mark.parametrize("scale", [0.01, 40.0])
def test_tuning_error(scale):
    cfg = ChainConfig(n_samples=5_000, burn_in=500, n_chains=2, proposal_scale=scale)
    with pytest.raises(TuningError):
        run_chain(EnsembleParams.jacobi(0, 0, 1), 1e4, cfg)


def test_n1_variances():
    cfg = ChainConfig(n_samples=1_000_000)
    res = run_chain(EnsembleParams.jacobi(0, 0, 1), 1e4, cfg)
    assert res.empirical_cov[0, 0] == pytest.approx(1.0, rel=0.05)
    res = run_chain(EnsembleParams.laguerre(1, 1), 1e4, cfg)
    assert res.empirical_cov[0, 0] == pytest.approx(0.5, rel=0.05)
    assert 0 < res.acceptance_rate < 1
    assert np.array_equal(res.empirical_cov, res.empirical_cov.T)


def test_n3_within_tolerance():
    res = run_chain(EnsembleParams.jacobi(0.5, 1.5, 3), 1e4, ChainConfig(n_samples=1_000_000))
    assert res.within(0.1, 0.02)
