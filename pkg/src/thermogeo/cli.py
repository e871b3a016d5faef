"""Command-line entry point ``thermogeo``.

Exit codes: 0 success, 1 failed verification, 2 solver failure,
3 invalid input.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import InputError, SolverError, ThermogeoError

EXIT_OK, EXIT_VERIFY, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2, 3
TOL_ENV = "THERMOGEO_TOL"


def _run_one(path: str, out: str | None, tol: float | None) -> tuple[int, str]:
    from .scenario import parse_scenario, run

    try:
        sc = parse_scenario(path)
        rep = run(sc, out, tol)
    except InputError as exc:
        return EXIT_INPUT, f"{path}: input error: {exc}"
    except SolverError as exc:
        return EXIT_SOLVER, f"{path}: solver error: {exc}"
    except ThermogeoError as exc:  # pragma: no cover - every error is one of the above
        return EXIT_SOLVER, f"{path}: error: {exc}"
    status = "ok" if rep.passed() else "completed with failing checks"
    verdicts = ", ".join(f"{k}={v}" for k, v in sorted(rep.verdicts.items()))
    return EXIT_OK, (f"{path}: {sc.kind} {status}; {verdicts or 'no verdicts'}; "
                     f"{len(rep.artifact_paths)} files in {Path(rep.artifact_paths[-1]).parent}; "
                     f"{rep.wall_time_ms} ms")


def _tolerance(flag: float | None) -> float | None:
    if flag is not None:
        return flag
    env = os.environ.get(TOL_ENV)
    if env is None or env == "":
        return None
    try:
        value = float(env)
    except ValueError:
        raise InputError(f"{TOL_ENV}={env!r} is not a number") from None
    return value


def _cmd_run(args) -> int:
    try:
        tol = _tolerance(args.tol)
        if tol is not None and not tol > 0:
            raise InputError("tolerance must be positive")
        if args.jobs < 1:
            raise InputError("--jobs must be at least 1")
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    paths = args.scenarios
    outs: list[str | None]
    if len(paths) == 1:
        outs = [args.out]
    else:
        stems = [Path(p).stem for p in paths]
        if len(set(stems)) != len(stems):
            print("input error: scenario file names must be distinct in batch mode", file=sys.stderr)
            return EXIT_INPUT
        outs = [None if args.out is None else str(Path(args.out) / s) for s in stems]
        if args.out is None:
            outs = [_batch_default(p, s) for p, s in zip(paths, stems)]
    if args.jobs == 1 or len(paths) == 1:
        results = [_run_one(p, o, tol) for p, o in zip(paths, outs)]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, paths, outs, [tol] * len(paths)))
    code = EXIT_OK
    for rc, msg in results:
        print(msg, file=sys.stderr if rc else sys.stdout)
        code = max(code, rc)
    return code


def _batch_default(path: str, stem: str) -> str | None:
    """Isolated directory ``<output_dir>/<stem>`` for batch runs without ``--out``."""
    from .scenario import parse_scenario

    try:
        return str(Path(parse_scenario(path).output_dir) / stem)
    except ThermogeoError:
        return None  # the worker reports the error


def _cmd_verify(args) -> int:
    from .acceptance import run_all

    results = run_all()
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermogeo",
                                     description="Geometric thermal-stress scenarios and checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one or more scenario files")
    r.add_argument("scenarios", nargs="+", help="scenario JSON files")
    r.add_argument("--out", help="output directory (per-scenario subdirectories in batch mode)")
    r.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    r.add_argument("--tol", type=float, help=f"override default tolerances (also {TOL_ENV})")
    r.set_defaults(func=_cmd_run)
    v = sub.add_parser("verify", help="run the built-in acceptance checks")
    v.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
