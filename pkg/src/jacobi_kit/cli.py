"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on bad input
(unreadable or invalid structure files, parse errors, membership errors).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .chardist import DistributionProbe, FlowError, char_rank, conserved_drift, flow, sharp_rank
from .config import RunConfig, default_seed
from .expr import EvaluationError, ParseError, format_expr, parse_expr
from .homogenize import poissonize, verify_homogeneous
from .limits import CylindricalFunction, cyl_bracket, level_structure
from .report import VerificationReport
from .structure import (
    StructureError,
    dumps,
    hamiltonian_field,
    jacobi_bracket,
    jacobi_map_check,
    parse_function,
    read_structure,
    verify_structure,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _emit(args, text: str, payload: dict) -> None:
    if args.machine:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _report(args, report: VerificationReport) -> int:
    _emit(args, report.to_text(), report.to_dict())
    return EXIT_OK if report.passed else EXIT_FAIL


def _write_or_print(args, text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        if not args.machine:
            print(f"wrote {out}")
        else:
            _emit(args, "", {"written": out})
    else:
        sys.stdout.write(text)


def _point(text: str, dim: int) -> np.ndarray:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse point {text!r}") from None
    if len(values) != dim:
        raise InputError(f"point needs {dim} coordinates, got {len(values)}")
    return np.array(values)


def _config(args) -> RunConfig:
    try:
        return RunConfig(args.seed, args.samples, args.tol, args.trials, args.deg, args.machine)
    except ValueError as exc:
        raise InputError(str(exc)) from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify(args) -> int:
    cfg = _config(args)
    s = read_structure(args.path, cfg)
    return _report(args, verify_structure(s, cfg))


def cmd_bracket(args) -> int:
    s = read_structure(args.path, _config(args))
    f, g = parse_function(args.f, s), parse_function(args.g, s)
    text = format_expr(jacobi_bracket(s, f, g), s.chart)
    _emit(args, text, {"bracket": text})
    return EXIT_OK


def cmd_hamiltonian(args) -> int:
    s = read_structure(args.path, _config(args))
    X = hamiltonian_field(s, parse_function(args.f, s))
    comps = [format_expr(c, s.chart) for c in X.components()]
    text = "\n".join(f"{name}: {c}" for name, c in zip(s.chart.names, comps))
    _emit(args, text, {"components": dict(zip(s.chart.names, comps))})
    return EXIT_OK


def cmd_poissonize(args) -> int:
    cfg = _config(args)
    s = read_structure(args.path, cfg)
    hps = poissonize(s, scaled=not args.unscaled)
    if args.check:
        return _report(args, verify_homogeneous(hps, cfg))
    _write_or_print(args, dumps(hps.structure), args.out)
    return EXIT_OK


def cmd_conformal(args) -> int:
    from .structure import conformal_transform

    cfg = _config(args)
    s = read_structure(args.path, cfg)
    t = conformal_transform(s, parse_function(args.phi, s), cfg)
    if args.check:
        return _report(args, verify_structure(t, cfg))
    _write_or_print(args, dumps(t), args.out)
    return EXIT_OK


def cmd_rank(args) -> int:
    s = read_structure(args.path, _config(args))
    p = _point(args.point, s.dim)
    family = [parse_function(f, s) for f in args.family] if args.family else None
    r = sharp_rank(s, p) if args.sharp else char_rank(DistributionProbe(s, p, family))
    _emit(args, str(r), {"rank": r, "point": p.tolist(), "kind": "sharp" if args.sharp else "characteristic"})
    return EXIT_OK


def cmd_flow(args) -> int:
    s = read_structure(args.path, _config(args))
    H = parse_function(args.H, s)
    x0 = _point(args.start, s.dim)
    try:
        traj = flow(s, H, x0, args.T, args.h)
    except FlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    Path(args.out).write_text(traj.to_table(), encoding="utf-8")
    payload = {
        "trajectory": args.out,
        "samples": len(traj.times),
        "final": [float(v) for v in traj.final],
        "error_estimate": traj.error_estimate,
    }
    lines = [f"wrote {args.out} ({len(traj.times)} samples)", f"final point: {payload['final']}",
             f"step-halving error estimate: {traj.error_estimate:.3e}"]
    if args.casimir:
        drift = conserved_drift(traj, parse_function(args.casimir, s))
        payload["casimir_drift"] = drift
        lines.append(f"casimir drift: {drift:.3e}")
    _emit(args, "\n".join(lines), payload)
    return EXIT_OK


def cmd_catalog(args) -> int:
    if args.list or not args.name:
        names = sorted(catalog.CATALOG)
        _emit(args, "\n".join(names), {"structures": names})
        return EXIT_OK
    try:
        s = catalog.build(args.name, *args.params)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(str(exc).strip('"')) from None
    _write_or_print(args, dumps(s), args.out)
    return EXIT_OK


def _cyl(text: str) -> CylindricalFunction:
    level, sep, body = text.partition(":")
    if not sep or not level.strip().isdigit():
        raise InputError(f"cylindrical function must look like LEVEL:EXPR, got {text!r}")
    m = int(level)
    try:
        return CylindricalFunction(m, parse_expr(body, level_structure(m).chart))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_cyl_bracket(args) -> int:
    h = cyl_bracket(_cyl(args.f), _cyl(args.g))
    text = format_expr(h.expr, level_structure(h.level).chart)
    _emit(args, f"[level {h.level}] {text}", {"level": h.level, "bracket": text})
    return EXIT_OK


def cmd_map_check(args) -> int:
    cfg = _config(args)
    src, dst = read_structure(args.src, cfg), read_structure(args.dst, cfg)
    phi = [parse_function(c, src) for c in args.map]
    if len(phi) != dst.dim:
        raise InputError(f"map needs {dst.dim} components, got {len(phi)}")
    return _report(args, jacobi_map_check(src, dst, phi, args.tests, cfg))


# ---------------------------------------------------------------------------
# parser


def _global_flags(parser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(default_seed()), help="random seed (env JACOBI_KIT_SEED)")
    parser.add_argument("--samples", type=int, default=d(200), help="sample points for numeric zero tests")
    parser.add_argument("--tol", type=float, default=d(1e-9), help="relative tolerance for sampled tests")
    parser.add_argument("--trials", type=int, default=d(50), help="random function pairs/triples per check")
    parser.add_argument("--deg", type=int, default=d(3), help="degree bound of random test polynomials")
    parser.add_argument("--machine", action="store_true", default=d(False), help="emit JSON instead of text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jacobi-kit", description="Partial Jacobi structures toolkit.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the four structure checks")
    p.add_argument("path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bracket", parents=[common], help="Jacobi bracket {f, g}")
    p.add_argument("path")
    p.add_argument("f")
    p.add_argument("g")
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("hamiltonian", parents=[common], help="Hamiltonian vector field X_f")
    p.add_argument("path")
    p.add_argument("f")
    p.set_defaults(func=cmd_hamiltonian)

    p = sub.add_parser("poissonize", parents=[common], help="homogeneous Poisson structure on M x R")
    p.add_argument("path")
    p.add_argument("-o", "--out")
    p.add_argument("--check", action="store_true", help="verify instead of emitting the structure")
    p.add_argument("--unscaled", action="store_true", help="drop the exp(-t) factor (negative control)")
    p.set_defaults(func=cmd_poissonize)

    p = sub.add_parser("conformal", parents=[common], help="conformal transform by a nowhere-zero phi")
    p.add_argument("path")
    p.add_argument("--phi", required=True)
    p.add_argument("-o", "--out")
    p.add_argument("--check", action="store_true", help="verify the transformed structure")
    p.set_defaults(func=cmd_conformal)

    p = sub.add_parser("rank", parents=[common], help="rank of the characteristic distribution at a point")
    p.add_argument("path")
    p.add_argument("--point", required=True, help="comma-separated coordinates")
    p.add_argument("--family", nargs="+", help="generating functions (default: 1 and the flat coordinates)")
    p.add_argument("--sharp", action="store_true", help="rank of the sharp map instead")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("flow", parents=[common], help="RK4 flow of a Hamiltonian field")
    p.add_argument("path")
    p.add_argument("--H", required=True, help="Hamiltonian function")
    p.add_argument("--from", dest="start", required=True, help="comma-separated start point")
    p.add_argument("--T", type=float, default=1.0, help="duration")
    p.add_argument("--h", type=float, default=1e-3, help="step size")
    p.add_argument("-o", "--out", default="trajectory.tsv")
    p.add_argument("--casimir", help="function whose drift along the trajectory is reported")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("catalog", parents=[common], help="emit a built-in structure")
    p.add_argument("name", nargs="?")
    p.add_argument("params", nargs="*", type=int)
    p.add_argument("-o", "--out")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("cyl-bracket", parents=[common], help="bracket of cylindrical functions LEVEL:EXPR")
    p.add_argument("f")
    p.add_argument("g")
    p.set_defaults(func=cmd_cyl_bracket)

    p = sub.add_parser("map-check", parents=[common], help="check that a map is a Jacobi map")
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--map", nargs="+", required=True, help="target coordinates as expressions over src")
    p.add_argument("--tests", type=int, default=None)
    p.set_defaults(func=cmd_map_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, StructureError, ParseError, EvaluationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
