"""Command-line entry point: ``frozen-edge <subcommand> [options]``.

Exit codes: 0 success, 1 usage, 2 domain error, 3 check failed,
4 sampler tuning failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import __version__, _jit
from .bessel import LimitKind, bessel_zeros, limit_cov, limit_orthonormality
from .convergence import DEFAULT_GRID, Y_MAX, scaled_cov_sequence
from .errors import DomainError, FrozenEdgeError
from .frozencov import assemble, matrix_to_csv
from .orthopoly import find_zeros, recurrence_for
from .params import EnsembleParams, Family
from .quadrature import integrate_tanh_sinh
from .sampler import ChainConfig, run_chain

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_CHECK = 3
EXIT_TUNING = 4

GRAM_TOL = 1e-8
CROSS_TOL = 1e-9
SAMPLE_REL_TOL = 0.1
SAMPLE_ABS_TOL = 0.02

_FAMILIES = {
    "jacobi": Family.JACOBI_ALGEBRAIC,
    "jacobi-algebraic": Family.JACOBI_ALGEBRAIC,
    "jacobi-trig": Family.JACOBI_TRIGONOMETRIC,
    "laguerre": Family.LAGUERRE,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for domain errors here
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default="-", help="output path ('-' for stdout)")


def _ensemble(p: argparse.ArgumentParser, need_n: bool = True) -> None:
    p.add_argument("--family", choices=sorted(_FAMILIES), required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--nu", type=float)
    if need_n:
        p.add_argument("--n", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="frozen-edge", description="Frozen Jacobi/Laguerre ensembles and their hard-edge limits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("zeros", help="zeros of the degree-N polynomial")
    _ensemble(p)
    _common(p)

    p = sub.add_parser("cov", help="inverse covariance, spectrum and covariance")
    _ensemble(p)
    p.add_argument("--matrix", choices=("sigma", "s", "sigma-spectral", "t"), default="sigma",
                   help="matrix written in CSV mode")
    _common(p)

    p = sub.add_parser("limit", help="hard-edge limit integrals")
    p.add_argument("--kind", choices=("jacobi-trig", "jacobi-algebraic", "laguerre", "ratio", "gram"), required=True)
    p.add_argument("--alpha", type=float, help="Bessel order for the Jacobi kinds and ratio")
    p.add_argument("--nu", type=float, help="Laguerre parameter")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--r-max", type=int, default=4, help="size of the Gram matrix")
    p.add_argument("--cross-check", action="store_true", help="recompute with tanh-sinh quadrature")
    p.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    _common(p)

    p = sub.add_parser("converge", help="scaled covariance sequence versus the limit")
    _ensemble(p, need_n=False)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--grid", type=_int_list, default=list(DEFAULT_GRID))
    p.add_argument("--y-max", type=float, default=Y_MAX)
    _common(p)

    p = sub.add_parser("sample", help="Metropolis check of the freezing CLT")
    _ensemble(p)
    d = ChainConfig()
    p.add_argument("--coupling", type=float, required=True)
    p.add_argument("--samples", type=int, default=d.n_samples)
    p.add_argument("--burn-in", type=int, default=d.burn_in)
    p.add_argument("--thinning", type=int, default=d.thinning)
    p.add_argument("--proposal-scale", type=float, default=d.proposal_scale)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--chains", type=int, default=d.n_chains)
    p.add_argument("--samples-csv", default=None, help="stream retained samples to this CSV file")
    p.add_argument("--rel-tol", type=float, default=SAMPLE_REL_TOL)
    p.add_argument("--abs-tol", type=float, default=SAMPLE_ABS_TOL)
    _common(p)
    return parser


def _params(args, n: int | None = None) -> EnsembleParams:
    fam = _FAMILIES[args.family]
    dim = args.n if n is None else n
    if fam is Family.LAGUERRE:
        if args.nu is None:
            raise DomainError("--nu is required for the Laguerre family")
        return EnsembleParams.laguerre(args.nu, dim)
    if args.alpha is None or args.beta is None:
        raise DomainError("--alpha and --beta are required for Jacobi families")
    return EnsembleParams.jacobi(args.alpha, args.beta, dim, trig=fam is Family.JACOBI_TRIGONOMETRIC)


def _metadata(args, defaults: dict) -> dict:
    arguments = {k: v for k, v in vars(args).items() if k not in ("output", "func")}
    return {
        "tool": "frozen-edge",
        "version": __version__,
        "command": args.command,
        "backend": _jit.backend(),
        "arguments": arguments,
        "defaults": defaults,
    }


def _csv_header(meta: dict) -> str:
    return "".join(f"# {k}: {json.dumps(v, sort_keys=True)}\n" for k, v in meta.items())


def _num(v: float) -> str:
    return repr(float(v))


def _cmd_zeros(args) -> tuple[int, dict, str]:
    params = _params(args)
    zs = find_zeros(recurrence_for(params), params.dim_n)
    payload = {
        "params": params.to_dict(),
        "zeros": zs.zeros.tolist(),
        "polish_residuals": np.asarray(zs.polish_residuals).tolist(),
    }
    rows = "index,zero\n" + "".join(f"{i + 1},{_num(z)}\n" for i, z in enumerate(zs.zeros))
    return EXIT_OK, payload, rows


def _cmd_cov(args) -> tuple[int, dict, str]:
    sc = assemble(_params(args))
    payload = sc.to_dict()
    chosen = {
        "sigma": sc.sigma_direct,
        "s": sc.s_matrix,
        "sigma-spectral": sc.sigma_spectral,
        "t": sc.t_matrix.entries,
    }[args.matrix]
    return EXIT_OK, payload, matrix_to_csv(chosen)


def _order_arg(args, kind: LimitKind) -> float:
    if kind is LimitKind.LAGUERRE_HARD:
        if args.nu is None:
            raise DomainError("--nu is required for the Laguerre limit")
        return args.nu
    if args.alpha is None:
        raise DomainError("--alpha is required for the Jacobi limits")
    return args.alpha


def _cmd_limit(args) -> tuple[int, dict, str]:
    if args.kind == "gram":
        if args.nu is not None:
            fam, val = Family.LAGUERRE, args.nu
        elif args.alpha is not None:
            fam, val = Family.JACOBI_ALGEBRAIC, args.alpha
        else:
            raise DomainError("--alpha or --nu is required for the Gram matrix")
        gram = limit_orthonormality(val, fam, args.r_max)
        tol = GRAM_TOL if args.tol is None else args.tol
        dev = float(np.max(np.abs(gram - np.eye(args.r_max))))
        ok = dev <= tol
        payload = {"family": fam.value, "parameter": val, "gram": gram.tolist(),
                   "max_deviation_from_identity": dev, "tolerance": tol, "passed": ok}
        return (EXIT_OK if ok else EXIT_CHECK), payload, matrix_to_csv(gram)

    if args.kind == "ratio":
        alpha = _order_arg(args, LimitKind.JACOBI_TRIG)
        trig = limit_cov(LimitKind.JACOBI_TRIG, alpha, args.r, args.s)
        alg = limit_cov(LimitKind.JACOBI_ALG, alpha, args.r, args.s)
        tab = bessel_zeros(alpha, max(args.r, args.s))
        expected = 1.0 / (4.0 * tab.j(args.r) * tab.j(args.s))
        ratio = alg.value / trig.value
        tol = 1e-14 if args.tol is None else args.tol
        ok = abs(ratio - expected) <= tol * abs(expected)
        payload = {"alpha": alpha, "r": args.r, "s": args.s, "ratio": ratio, "expected": expected,
                   "jacobi_trig": trig.value, "jacobi_algebraic": alg.value, "passed": ok}
        rows = f"ratio,expected\n{_num(ratio)},{_num(expected)}\n"
        return (EXIT_OK if ok else EXIT_CHECK), payload, rows

    kind = LimitKind(args.kind)
    val = _order_arg(args, kind)
    lv = limit_cov(kind, val, args.r, args.s)
    payload = {"kind": kind.value, "parameter": val, "r": lv.r, "s": lv.s,
               "value": lv.value, "quad_error_estimate": lv.quad_error_estimate}
    code = EXIT_OK
    if args.cross_check:
        other = _tanh_sinh_limit(kind, val, args.r, args.s)
        tol = CROSS_TOL if args.tol is None else args.tol
        ok = abs(other - lv.value) <= tol * max(1.0, abs(lv.value))
        payload["cross_check"] = {"method": "tanh-sinh", "value": other, "tolerance": tol, "passed": ok}
        code = EXIT_OK if ok else EXIT_CHECK
    rows = "kind,r,s,value,quad_error_estimate\n" + f"{kind.value},{lv.r},{lv.s},{_num(lv.value)},{_num(lv.quad_error_estimate)}\n"
    return code, payload, rows


def _tanh_sinh_limit(kind: LimitKind, val: float, r: int, s: int) -> float:
    from .bessel import bessel_j

    order = val - 1.0 if kind is LimitKind.LAGUERRE_HARD else val
    tab = bessel_zeros(order, max(r, s))
    jr, js = tab.j(r), tab.j(s)
    res = integrate_tanh_sinh(lambda u: u / ((1 - u) * (1 + u)) * bessel_j(order, jr * u) * bessel_j(order, js * u))
    out = res.value / (tab.jp(r) * tab.jp(s))
    if kind is LimitKind.JACOBI_ALG:
        out /= 4.0 * jr * js
    return out


def _cmd_converge(args) -> tuple[int, dict, str]:
    grid = args.grid
    params = _params(args, n=min(grid) if grid else 1)
    rep = scaled_cov_sequence(params, args.r, args.s, grid, args.y_max)
    payload = rep.to_dict()
    code = EXIT_OK if rep.strictly_decreasing else EXIT_CHECK
    return code, payload, rep.to_csv()


def _cmd_sample(args) -> tuple[int, dict, str]:
    params = _params(args)
    cfg = ChainConfig(n_samples=args.samples, burn_in=args.burn_in, thinning=args.thinning,
                      proposal_scale=args.proposal_scale, seed=args.seed, n_chains=args.chains)
    if args.samples_csv:
        with open(args.samples_csv, "w", encoding="utf-8", newline="") as fh:
            res = run_chain(params, args.coupling, cfg, sample_stream=fh)
    else:
        res = run_chain(params, args.coupling, cfg)
    ok = res.within(args.rel_tol, args.abs_tol)
    payload = res.to_dict()
    payload["check"] = {"rel_tol": args.rel_tol, "abs_tol": args.abs_tol, "passed": ok}
    return (EXIT_OK if ok else EXIT_CHECK), payload, matrix_to_csv(res.empirical_cov)


_COMMANDS = {
    "zeros": _cmd_zeros,
    "cov": _cmd_cov,
    "limit": _cmd_limit,
    "converge": _cmd_converge,
    "sample": _cmd_sample,
}

_DEFAULTS = {
    "zeros": {},
    "cov": {"matrix": "sigma"},
    "limit": {"gram_tol": GRAM_TOL, "cross_check_tol": CROSS_TOL, "quadrature": "graded Gauss-Legendre 15"},
    "converge": {"grid": list(DEFAULT_GRID), "y_max": Y_MAX},
    "sample": {"rel_tol": SAMPLE_REL_TOL, "abs_tol": SAMPLE_ABS_TOL, **dataclasses.asdict(ChainConfig())},
}


def _emit(args, meta: dict, payload: dict, rows: str) -> None:
    if args.format == "json":
        text = json.dumps({"metadata": meta, "result": _clean(payload)}, indent=2) + "\n"
    else:
        text = _csv_header(meta) + rows
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _clean(obj):
    # JSON has no NaN/inf
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        code, payload, rows = _COMMANDS[args.command](args)
    except FrozenEdgeError as exc:
        print(f"frozen-edge {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"frozen-edge {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        _emit(args, _metadata(args, _DEFAULTS[args.command]), payload, rows)
    except OSError as exc:
        print(f"frozen-edge {args.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
