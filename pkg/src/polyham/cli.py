"""Command-line interface.

Exit codes: 0 success (or "is Hamiltonian"), 1 negative verdict or runtime
failure, 2 usage, input or structural error (bad file, odd dimension).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import DEFAULT_SEED, run_bench
from .dynamics import energy_drift, simulate
from .errors import (
    MemoryCapExceeded,
    NoConvergence,
    NotAnEquilibrium,
    NotHamiltonian,
    OddDimension,
    ParseError,
    PolyhamError,
    SingularJacobian,
)
from .hamiltonian import (
    PolyHamiltonian,
    PolySystem,
    build_system,
    eval_rhs,
    extract_hamiltonian,
    system_is_hamiltonian,
)
from .polyparse import emit_hamiltonian, emit_system, parse_file
from .stability import classify_equilibrium, is_equilibrium, newton_refine
from .tensor import DEFAULT_TOL

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(obj, out=None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load(path: str, want: type):
    try:
        obj = parse_file(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not isinstance(obj, want):
        kind = "system" if want is PolySystem else "Hamiltonian"
        raise UsageError(f"{path} does not contain a {kind}")
    return obj


def _point(text: str, dim: int) -> np.ndarray:
    try:
        x = np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"bad point {text!r}: {exc}") from exc
    if x.shape != (dim,):
        raise UsageError(f"point {text!r} has {x.size} coordinates, system has {dim}")
    return x


def _write_pair(out: str, text: str, obj: dict) -> None:
    path = Path(out)
    json_path = path.with_suffix(".json")
    if json_path == path:
        path = path.with_suffix(".txt")
    path.write_text(text, encoding="utf-8")
    json_path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def cmd_check(args) -> int:
    system = _load(args.system, PolySystem)
    ok, witness = system_is_hamiltonian(system, args.tol)
    report = {
        "file": args.system,
        "dim": system.dim,
        "orders": sorted(system.tensors),
        "hamiltonian": ok,
        "witness": None if witness is None else witness.to_json(),
        "tol": args.tol,
    }
    _emit(report)
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_extract(args) -> int:
    system = _load(args.system, PolySystem)
    try:
        H = extract_hamiltonian(system, args.tol)
    except NotHamiltonian as exc:
        _emit({"error": "NotHamiltonian", "message": str(exc),
               "witness": exc.witness.to_json() if exc.witness else None})
        return EXIT_NEGATIVE
    text = emit_hamiltonian(H)
    if args.out:
        _write_pair(args.out, text, H.to_json())
    if args.json:
        _emit(H.to_json())
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_build(args) -> int:
    H = _load(args.hamiltonian, PolyHamiltonian)
    system = build_system(H)
    text = emit_system(system)
    if args.out:
        _write_pair(args.out, text, system.to_json())
    if args.json:
        _emit(system.to_json())
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_stability(args) -> int:
    system = _load(args.system, PolySystem)
    if not args.at:
        raise UsageError("give at least one --at point")
    points = [_point(p, system.dim) for p in args.at]
    try:
        H = extract_hamiltonian(system, args.tol)
    except NotHamiltonian as exc:
        _emit({"error": "NotHamiltonian", "message": str(exc)})
        return EXIT_NEGATIVE
    results = []
    for x in points:
        entry = {"requested": x.tolist()}
        try:
            if args.refine:
                x = newton_refine(system, x)
            if not is_equilibrium(system, x, args.tol):
                raise NotAnEquilibrium(f"{x.tolist()} is not an equilibrium")
            entry.update(classify_equilibrium(H, x, args.tol).to_json())
        except (NotAnEquilibrium, NoConvergence, SingularJacobian) as exc:
            entry.update({
                "error": type(exc).__name__,
                "message": str(exc),
                "residual": eval_rhs(system, x).tolist(),
            })
        results.append(entry)
    _emit({"file": args.system, "tol": args.tol, "points": results})
    return EXIT_OK


def cmd_simulate(args) -> int:
    system = _load(args.system, PolySystem)
    x0 = _point(args.x0, system.dim)
    if args.h <= 0 or args.steps < 0:
        raise UsageError("--h must be positive and --steps non-negative")
    H = None
    if args.energy == "auto":
        try:
            H = extract_hamiltonian(system, args.tol)
        except NotHamiltonian as exc:
            sys.stderr.write(f"error: {exc}\n")
            return EXIT_NEGATIVE
    elif args.energy:
        H = _load(args.energy, PolyHamiltonian)
    try:
        traj = simulate(system, x0, args.h, args.steps)
    except NoConvergence as exc:
        sys.stderr.write(f"error: NoConvergence at step {exc.step}: {exc}\n")
        return EXIT_NEGATIVE
    csv_text = traj.to_csv(H)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    if H is not None:
        sys.stderr.write(f"energy drift: {energy_drift(H, traj):.6e}\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    result = run_bench(args.dim, args.order, args.trials, args.seed)
    if args.json:
        _emit(result.to_json(), args.out)
    else:
        text = result.table() + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative tolerance (default 1e-9)")
    common.add_argument("--out", help="output path")
    common.add_argument("--json", action="store_true", help="JSON instead of text output")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed (default 42)")

    parser = argparse.ArgumentParser(prog="polyham", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="test whether a system is Hamiltonian")
    p.add_argument("system")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("extract", parents=[common], help="recover the Hamiltonian of a system")
    p.add_argument("system")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("build", parents=[common], help="Hamilton's equations of a Hamiltonian")
    p.add_argument("hamiltonian")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("stability", parents=[common], help="classify equilibria")
    p.add_argument("system")
    p.add_argument("--at", action="append", default=[], metavar="C1,...,CN")
    p.add_argument("--refine", action="store_true", help="Newton-refine each point first")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("simulate", parents=[common], help="implicit midpoint trajectory as CSV")
    p.add_argument("system")
    p.add_argument("--x0", required=True, metavar="C1,...,CN")
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--energy", metavar="FILE|auto", help="append an H column")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", parents=[common], help="time tensor vs finite-difference Hessians")
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--trials", type=int, default=5)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol <= 0:
        parser.error("--tol must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (ParseError, OddDimension, MemoryCapExceeded) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE
    except (PolyhamError, ValueError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
