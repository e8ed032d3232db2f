"""Command-line frontend: ``ostrohj analyze | integrate | check | builtin``."""
from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .builtins import BUILTINS, BuiltinModel, get_builtin
from .dynamics import (ParameterPath, diagnostics, integrate, parse_init, path_independence_check,
                       project_initial)
from .errors import ClosureDiverged, InconsistentSystem, OstroError
from .hjpde import build_hj_system, integrability_closure
from .model import LagrangianModel, ostrogradski, parse_model
from .report import AnalysisReport, dumps, run_analysis, to_latex
from .symexpr import DEFAULT_SAMPLES, DEFAULT_SEED

EXIT_OK, EXIT_INPUT, EXIT_CLOSURE, EXIT_MISMATCH, EXIT_CHECK_FAIL = 0, 1, 2, 3, 4


class InputError(Exception):
    """Bad command-line input (unreadable file, malformed flag)."""


# ------------------------------------------------------------------ inputs


def _parse_param(text: str):
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected NAME=RATIONAL, got {text!r}")
    try:
        return name.strip(), Fraction(value.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{value.strip()!r} is not a rational number") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def load_source(src: str, params=()) -> tuple[LagrangianModel, Optional[BuiltinModel]]:
    """Resolve ``builtin:NAME`` or a model file path, then apply parameter overrides."""
    builtin = None
    if src.startswith("builtin:"):
        try:
            builtin = get_builtin(src[len("builtin:"):])
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
        m = builtin.model()
    else:
        m = parse_model(_read(src), src)
    if params:
        m = m.with_params(dict(params))
    return m, builtin


def _init_text(args, builtin) -> tuple[str, str]:
    if args.init:
        return _read(args.init), args.init
    if builtin is None:
        raise InputError("--init is required for model files")
    return builtin.init, f"builtin:{builtin.name}/init"


def _path(arg: Optional[str], default: Optional[str], what: str) -> ParameterPath:
    if arg:
        return ParameterPath.parse(_read(arg), arg)
    if default is None:
        raise InputError(f"{what} is required for model files")
    return ParameterPath.parse(default, f"<default {what}>")


def _closed_system(m: LagrangianModel, args, omit_secondaries: bool = False):
    ostro = ostrogradski(m, args.samples, random.Random(args.seed))
    sys0 = build_hj_system(m, ostro)
    if omit_secondaries:
        return sys0, None
    return integrability_closure(sys0)


# ------------------------------------------------------------------ commands


def run_analyze(args, out) -> int:
    names = [f"builtin:{n}" for n in BUILTINS] if args.all_builtins else [args.src]
    if not names or names == [None]:
        raise InputError("analyze needs a model source or --all-builtins")
    code = EXIT_OK
    rendered = {}
    for src in names:
        m, _ = load_source(src, args.param)
        try:
            a = run_analysis(m, seed=args.seed, samples=args.samples)
        except (ClosureDiverged, InconsistentSystem) as exc:
            print(f"{src}: closure failed: {exc}", file=sys.stderr)
            code = max(code, EXIT_CLOSURE)
            continue
        rep = AnalysisReport.from_analysis(a)
        if not a.equivalence.equivalent:
            print(f"{src}: Dirac/HJ mismatch: {'; '.join(a.equivalence.failures)}", file=sys.stderr)
            code = max(code, EXIT_MISMATCH)
        if args.format == "json":
            rendered[m.name] = rep.to_dict()
        elif args.format == "latex":
            rendered[m.name] = to_latex(a)
        else:
            rendered[m.name] = rep.to_text()
    if args.format == "json":
        payload = next(iter(rendered.values())) if not args.all_builtins and rendered else rendered
        if rendered:
            out.write(dumps(payload))
    else:
        out.write("\n".join(rendered.values()))
    return code


def run_integrate(args, out) -> int:
    m, builtin = load_source(args.src, args.param)
    sys_, closure = _closed_system(m, args)
    text, origin = _init_text(args, builtin)
    raw = parse_init(text, m, origin)
    init, changes = project_initial(sys_, raw)
    path = _path(args.path, builtin.path_a if builtin else None, "--path")
    traj = integrate(sys_, init, path, args.steps, strict=args.strict, reproject=args.reproject)
    if args.out == "-":
        out.write(traj.to_csv())
    else:
        traj.to_csv(args.out)
    diag = diagnostics(traj) if len(traj.s) == 1 or len(traj.s) >= 9 else None
    lines = [f"model {m.name}: closure {closure.final_status.value}, {args.steps} RK4 steps",
             "path: " + ", ".join(f"{k} [{v[1][0]:g} -> {v[1][-1]:g}]"
                                  for k, v in path.breakpoints.items())]
    for name, (old, new) in changes.items():
        lines.append(f"projected {name}: {old:.17g} -> {new:.17g}")
    fin = traj.state[-1]
    lines.append("final: t = %.17g, " % traj.t[-1] + ", ".join(
        f"{s.text} = {v:.17g}" for s, v in zip(m.phase_symbols, fin)) + f", Z = {traj.Z[-1]:.17g}")
    drift = traj.drift
    lines.append(f"max constraint drift: {max(drift.values(), default=0.0):.3g}")
    if diag is not None:
        el = "n/a" if diag.el_residual is None else f"{diag.el_residual:.3g}"
        lines.append(f"Euler-Lagrange residual: {el}")
        lines.append(f"action: Z = {diag.Z:.17g}, integral L dt = {diag.action_integral:.17g}, "
                     f"relative difference {diag.action_relative_error:.3g}")
        lines.append(f"energy residual |P0 + H0|: {diag.energy_residual:.3g}")
        lines += [f"note: {n}" for n in diag.notes]
    lines += [f"note: {n}" for n in traj.notes]
    print("\n".join(lines), file=sys.stderr if args.out == "-" else out)
    return EXIT_OK


def run_check(args, out) -> int:
    m, builtin = load_source(args.src, args.param)
    sys_, _ = _closed_system(m, args, omit_secondaries=args.omit_secondaries)
    text, origin = _init_text(args, builtin)
    init, _ = project_initial(sys_, parse_init(text, m, origin))
    pa = _path(args.path_a, builtin.path_a if builtin else None, "--path-a")
    pb = _path(args.path_b, builtin.path_b if builtin else None, "--path-b")
    rep = path_independence_check(sys_, init, pa, pb, steps=args.steps, tol=args.tol)
    verdict = "PASS" if rep.passed else "FAIL"
    lines = [f"{verdict}: max |diff| = {rep.max_diff:.3e} (tol {args.tol:g}, {args.steps} steps)"]
    if args.omit_secondaries:
        lines.append("sabotage mode: integrability conditions not imposed")
    lines.append(f"{'component':>12}  {'path A':>24}  {'path B':>24}  {'diff':>10}  compared")
    for name, a, b, d, used in rep.table():
        lines.append(f"{name:>12}  {a:24.17g}  {b:24.17g}  {d:10.3e}  {'yes' if used else 'no'}")
    if rep.excluded:
        lines.append("not compared (moved by parameterless first-class secondaries): " + ", ".join(rep.excluded))
    out.write("\n".join(lines) + "\n")
    return EXIT_OK if rep.passed else EXIT_CHECK_FAIL


def run_builtin(args, out) -> int:
    if args.action == "list":
        for name, b in BUILTINS.items():
            out.write(f"{name:15} {b.description}\n")
        return EXIT_OK
    if not args.name:
        raise InputError("builtin show needs a name")
    try:
        b = get_builtin(args.name)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    e = b.expected
    out.write(b.text)
    out.write(f"# expected: {e.primaries} primary, {e.secondaries} secondary, {e.first_class} first class, "
              f"{e.second_class} second class, {e.free_parameters} free parameters\n")
    out.write("# default init\n" + b.init)
    out.write("# default path A\n" + b.path_a + "# default path B\n" + b.path_b)
    return EXIT_OK


# ------------------------------------------------------------------ parser


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "latex"), default="text")
    common.add_argument("--param", action="append", type=_parse_param, default=[],
                        metavar="NAME=RATIONAL", help="override a model parameter")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                        help="random points for rank and surface sampling")

    p = _Parser(prog="ostrohj", description="Hamilton-Jacobi analysis and integration of second-order Lagrangians.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="constraint and HJ analysis")
    a.add_argument("src", nargs="?", help="model file or builtin:NAME")
    a.add_argument("--all-builtins", action="store_true")
    a.set_defaults(func=run_analyze)

    i = sub.add_parser("integrate", parents=[common], help="integrate along a parameter path")
    i.add_argument("src")
    i.add_argument("--init")
    i.add_argument("--path")
    i.add_argument("--steps", type=int, default=10_000)
    i.add_argument("--out", default="-", help="CSV destination ('-' for stdout)")
    i.add_argument("--reproject", action="store_true", help="project back onto the constraint surface each step")
    i.add_argument("--strict", action="store_true", help="reject paths for determined parameters")
    i.set_defaults(func=run_integrate)

    c = sub.add_parser("check", parents=[common], help="path-independence check")
    c.add_argument("src")
    c.add_argument("--init")
    c.add_argument("--path-a")
    c.add_argument("--path-b")
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--steps", type=int, default=10_000)
    c.add_argument("--omit-secondaries", action="store_true", help=argparse.SUPPRESS)
    c.set_defaults(func=run_check)

    b = sub.add_parser("builtin", parents=[common], help="list or show builtin models")
    b.add_argument("action", choices=("list", "show"))
    b.add_argument("name", nargs="?")
    b.set_defaults(func=run_builtin)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (ClosureDiverged, InconsistentSystem) as exc:
        print(f"error: closure failed: {exc}", file=sys.stderr)
        return EXIT_CLOSURE
    except (InputError, OstroError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
