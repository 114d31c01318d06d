"""Wall-clock comparison of the numba and numpy backends.

    python benchmarks/bench_backends.py [--repeat 5] [--quick]

The first numba call of each kernel is excluded (it compiles or loads the
on-disk cache). Reported times are the best of ``--repeat`` runs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from frozen_edge import ChainConfig, EnsembleParams, _jit, assemble, bessel_j, run_chain
from frozen_edge.linalg import eigvalsh_tridiagonal, tridiagonalize


def _best(fn, repeat: int) -> float:
    fn()  # warm-up
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(quick: bool):
    rng = np.random.default_rng(0)
    n_ql, n_hh, n_cov = (200, 100, 100) if quick else (1000, 300, 300)
    d, e = rng.standard_normal(n_ql), rng.standard_normal(n_ql - 1)
    a = rng.standard_normal((n_hh, n_hh))
    a = a + a.T
    x = np.linspace(0.0, 60.0, 20_000 if quick else 200_000)
    samples = 20_000 if quick else 200_000
    return [
        (f"QL eigenvalues, n={n_ql}", lambda: eigvalsh_tridiagonal(d, e)),
        (f"Householder, n={n_hh}", lambda: tridiagonalize(a)),
        (f"assemble trig Jacobi, N={n_cov}", lambda: assemble(EnsembleParams.jacobi(0.5, 1.5, n_cov, trig=True))),
        (f"assemble Laguerre, N={n_cov}", lambda: assemble(EnsembleParams.laguerre(1.0, n_cov))),
        (f"Bessel J_0.5 on {x.size} points", lambda: bessel_j(0.5, x)),
        (f"Metropolis N=2, {samples} samples",
         lambda: run_chain(EnsembleParams.jacobi(0, 0, 2), 1e4, ChainConfig(n_samples=samples, burn_in=2000))),
    ]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)
    if not _jit.HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
        return 1
    print(f"{'kernel':<40} {'numba [s]':>11} {'numpy [s]':>11} {'speed-up':>9}")
    for name, fn in cases(args.quick):
        timings = {}
        for backend in ("numba", "numpy"):
            with _jit.use_backend(backend):
                timings[backend] = _best(fn, args.repeat)
        ratio = timings["numpy"] / timings["numba"]
        print(f"{name:<40} {timings['numba']:>11.4f} {timings['numpy']:>11.4f} {ratio:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
