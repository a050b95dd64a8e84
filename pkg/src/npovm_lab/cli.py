"""Command-line interface.

Exit codes: 0 success, 2 usage/config error, 3 output I/O error,
4 numerical-invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .condition import (
    GLOBAL_PHASE,
    EXACT,
    XX_MEASUREMENT,
    check_sufficient_condition,
)
from .encodings import (
    PRESETS,
    UNITARY,
    apply_channel,
    hamiltonian_derivative,
    make_encoding,
)
from .errors import DomainError, InvariantViolation
from .fisher import max_qfi_unitary, qfi_pure_unitary, qfi_sld
from .runner import (
    OptimizerConfig,
    SweepConfig,
    load_sweep_config,
    reproduce,
    run_sweep,
)
from .strategies import GENERAL, POSITIVE, embed_positive_params, optimize_fisher
from .tensor import kron, pure_density

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INVARIANT = 4

STATES = {
    "zero": np.array([1, 0], dtype=complex),
    "one": np.array([0, 1], dtype=complex),
    "plus": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "minus": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "iplus": np.array([1, 1j], dtype=complex) / np.sqrt(2),
}

BUILTIN_MATRICES = {
    "identity2": np.eye(2, dtype=complex),
    "identity4": np.eye(4, dtype=complex),
    "hadamard2": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "cnot": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                     dtype=complex),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
                     dtype=complex),
    "xx_um": XX_MEASUREMENT,
}


def load_matrix(spec: str) -> np.ndarray:
    """Builtin name or path to a whitespace-separated row-major file of
    re,im pairs."""
    if spec in BUILTIN_MATRICES:
        return BUILTIN_MATRICES[spec]
    path = Path(spec)
    if not path.exists():
        raise DomainError(f"matrix '{spec}' is neither a builtin name nor a file")
    tokens = path.read_text(encoding="utf-8").split()
    values = []
    for tok in tokens:
        re_s, _, im_s = tok.partition(",")
        values.append(complex(float(re_s), float(im_s) if im_s else 0.0))
    dim = int(round(len(values) ** 0.5))
    if dim * dim != len(values):
        raise DomainError(f"matrix file '{spec}' holds {len(values)} entries, not a square count")
    return np.array(values, dtype=complex).reshape(dim, dim)


def _parse_fixed(pairs: list[str]) -> dict:
    fixed = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep:
            raise DomainError(f"--fixed expects key=value, got '{pair}'")
        fixed[key] = float(value)
    return fixed


def _optimizer_from_args(args) -> OptimizerConfig:
    return OptimizerConfig(
        restarts=args.restarts, max_iters=args.max_iters, seed=args.seed,
        simplex_tol=args.simplex_tol, warm_start_sld=not args.no_warm_start,
        fd_step=args.fd_step)


def _add_optimizer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iters", type=int, default=2000, dest="max_iters")
    p.add_argument("--simplex-tol", type=float, default=1e-8, dest="simplex_tol")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fd-step", type=float, default=1e-4, dest="fd_step")
    p.add_argument("--no-warm-start", action="store_true")
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="npovm-lab")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("qfi", help="QFI of an encoded state")
    q.add_argument("--encoding", required=True, choices=sorted(PRESETS))
    q.add_argument("--theta", type=float, required=True)
    q.add_argument("--state", default="plus", choices=sorted(STATES))
    q.add_argument("--fixed", action="append", metavar="KEY=VALUE")
    q.add_argument("--fd-step", type=float, default=1e-4, dest="fd_step")

    o = sub.add_parser("optimize", help="optimize Fisher information at one point")
    o.add_argument("--encoding", required=True, choices=sorted(PRESETS))
    o.add_argument("--theta", type=float, required=True)
    o.add_argument("--class", dest="klass", default="both",
                   choices=[POSITIVE, GENERAL, "both"])
    o.add_argument("--fixed", action="append", metavar="KEY=VALUE")
    _add_optimizer_flags(o)

    s = sub.add_parser("sweep", help="run a sweep from a TOML config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--restarts", type=int, default=None)
    s.add_argument("--jobs", type=int, default=None)

    r = sub.add_parser("reproduce", help="run the canned figure sweeps")
    r.add_argument("figure", choices=["fig2", "fig3"])
    r.add_argument("--out", default="out")
    _add_optimizer_flags(r)

    c = sub.add_parser("check-condition", help="check the POVM-sufficiency condition")
    c.add_argument("--u", required=True, help="preparation unitary (builtin or file)")
    c.add_argument("--u2", required=True, help="auxiliary unitary (builtin or file)")
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--phase", default="global", choices=["exact", "global"])
    return parser


def _cmd_qfi(args) -> int:
    enc = make_encoding(args.encoding, _parse_fixed(args.fixed))
    psi = STATES[args.state]
    rho = pure_density(psi)
    step = args.fd_step
    r0 = apply_channel(rho, enc, args.theta)
    rp = apply_channel(rho, enc, args.theta + step)
    rm = apply_channel(rho, enc, args.theta - step)
    print(f"qfi_sld = {repr(qfi_sld(r0, (rp - rm) / (2 * step)))}")
    if enc.kind == UNITARY:
        hdot = hamiltonian_derivative(enc, args.theta)
        print(f"qfi_pure_unitary = {repr(qfi_pure_unitary(psi, hdot))}")
        value, _ = max_qfi_unitary(hdot)
        print(f"max_qfi_unitary = {repr(value)}")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    enc = make_encoding(args.encoding, _parse_fixed(args.fixed))
    cfg = _optimizer_from_args(args)
    classes = [POSITIVE, GENERAL] if args.klass == "both" else [args.klass]
    positive_report = None
    for klass in classes:
        extra = ()
        if klass == GENERAL and positive_report is not None:
            extra = (embed_positive_params(positive_report.params_at_opt),)
        report = optimize_fisher(klass, enc, args.theta, cfg, extra_starts=extra)
        if klass == POSITIVE:
            positive_report = report
        print(f"{klass}: fi = {repr(report.fi)}  delta_theta = {repr(report.delta_theta)}  "
              f"converged = {report.converged}  restarts_used = {report.restarts_used}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = load_sweep_config(args.config)
    if args.seed is not None or args.restarts is not None:
        opt = cfg.optimizer
        opt = OptimizerConfig(
            restarts=args.restarts if args.restarts is not None else opt.restarts,
            max_iters=opt.max_iters, simplex_tol=opt.simplex_tol,
            seed=args.seed if args.seed is not None else opt.seed,
            warm_start_sld=opt.warm_start_sld, fd_step=opt.fd_step)
        cfg = SweepConfig(
            encoding_id=cfg.encoding_id, grid_start=cfg.grid_start,
            grid_stop=cfg.grid_stop, grid_count=cfg.grid_count,
            output_path=cfg.output_path, classes=cfg.classes, fixed=cfg.fixed,
            optimizer=opt, estimated_param=cfg.estimated_param,
            jobs=args.jobs if args.jobs is not None else cfg.jobs)
    elif args.jobs is not None:
        cfg = SweepConfig(
            encoding_id=cfg.encoding_id, grid_start=cfg.grid_start,
            grid_stop=cfg.grid_stop, grid_count=cfg.grid_count,
            output_path=cfg.output_path, classes=cfg.classes, fixed=cfg.fixed,
            optimizer=cfg.optimizer, estimated_param=cfg.estimated_param,
            jobs=args.jobs)
    csv_path, manifest_path = run_sweep(cfg, output_path=args.out)
    print(f"wrote {csv_path}")
    print(f"wrote {manifest_path}")
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    cfg = _optimizer_from_args(args)
    summary = reproduce(args.figure, args.out, optimizer=cfg, jobs=args.jobs)
    for path in summary["csv_files"]:
        print(f"wrote {path}")
    if "parabola_fits" in summary:
        for enc_id, fit in summary["parabola_fits"].items():
            a, b = fit["fit"]
            ra, rb = fit["reference"]
            print(f"{enc_id}: fitted A1={a:.4g} A2={b:.4g}  (reference A1={ra} A2={rb})")
    if "h_curve_argmin" in summary:
        for key, val in summary["h_curve_argmin"].items():
            print(f"advantage argmin over h at {key}: {val:.4g}")
    return EXIT_OK


def _cmd_check_condition(args) -> int:
    u = load_matrix(args.u)
    u2 = load_matrix(args.u2)
    phase = GLOBAL_PHASE if args.phase == "global" else EXACT
    report = check_sufficient_condition(u, u2, tol=args.tol, phase=phase)
    print(report)
    return EXIT_OK


def cli_entry(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "qfi":
            return _cmd_qfi(args)
        if args.command == "optimize":
            return _cmd_optimize(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "reproduce":
            return _cmd_reproduce(args)
        if args.command == "check-condition":
            return _cmd_check_condition(args)
        parser.error(f"unknown command {args.command}")
    except (DomainError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IOError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantViolation as exc:
        print(f"numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_USAGE


def main() -> None:
    sys.exit(cli_entry())


if __name__ == "__main__":
    main()
