"""Command-line front end: ``spuridium solve | classify | sumrule``.

Exit codes: 0 success, 2 bad configuration or unreadable report, 3 numerical
failure. Output files are written atomically, so a failed run leaves none.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .config import FORMATS, MAP_KINDS, PROBLEMS, SOLVERS, START_KINDS, RunConfig
from .errors import ConfigError, InvalidArgument, SpuridiumError
from .report import parse_report, write_atomic

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("spuridium")

# flag dest -> (section, key)
_FLAG_MAP = {
    "problem": ("problem", "name"),
    "omega": ("problem", "omega"),
    "z": ("problem", "z"),
    "ell": ("problem", "ell"),
    "lam": ("problem", "lam"),
    "a": ("problem", "a"),
    "v0": ("problem", "v0"),
    "width": ("problem", "width"),
    "kappa": ("problem", "kappa"),
    "c": ("problem", "c"),
    "soft_core": ("problem", "soft_core"),
    "center": ("problem", "center"),
    "n": ("basis", "n_basis"),
    "scan": ("basis", "scan"),
    "box": ("basis", "box_length"),
    "map": ("basis", "map_kind"),
    "map_strength": ("basis", "map_strength"),
    "solver": ("solver", "kind"),
    "max_iter": ("solver", "max_iter"),
    "seed": ("solver", "seed"),
    "start": ("solver", "start"),
    "tol_bound": ("diagnostics", "tol_bound"),
    "plateau_factor": ("diagnostics", "plateau_factor"),
    "zero_floor": ("diagnostics", "zero_floor"),
    "oversampling": ("diagnostics", "oversampling"),
    "output": ("output", "path"),
    "format": ("output", "format"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _scan(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"scan must be comma-separated integers: {text!r}") from exc


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its values")
    g = p.add_argument_group("problem")
    g.add_argument("--problem", choices=PROBLEMS)
    g.add_argument("--omega", type=float, help="oscillator frequency")
    g.add_argument("--z", type=float, help="nuclear charge")
    g.add_argument("--ell", type=int, help="orbital angular momentum")
    g.add_argument("--lambda", dest="lam", type=float, help="Poschl-Teller strength")
    g.add_argument("--a", type=float, help="Poschl-Teller inverse width")
    g.add_argument("--v0", type=float, help="square-well depth")
    g.add_argument("--width", type=float, help="square-well width")
    g.add_argument("--kappa", type=int, help="Dirac angular quantum number")
    g.add_argument("--c", type=float, help="speed of light (a.u.)")
    g.add_argument("--soft-core", type=float, help="Coulomb soft-core radius")
    g.add_argument("--center", type=float, help="well centre (default: box/2)")
    g = p.add_argument_group("basis")
    g.add_argument("--n", type=int, help="basis size")
    g.add_argument("--scan", type=_scan, help="comma-separated increasing basis sizes")
    g.add_argument("--box", type=float, help="box length L")
    g.add_argument("--map", choices=MAP_KINDS)
    g.add_argument("--map-strength", type=float)
    g = p.add_argument_group("solver")
    g.add_argument("--solver", choices=SOLVERS)
    g.add_argument("--max-iter", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--start", choices=START_KINDS)
    _add_diag_flags(p)
    _add_output_flags(p)


def _add_diag_flags(p):
    g = p.add_argument_group("diagnostics")
    g.add_argument("--tol-bound", type=float)
    g.add_argument("--plateau-factor", type=float)
    g.add_argument("--zero-floor", type=float)
    if p.prog.endswith("classify"):
        return
    g.add_argument("--oversampling", type=int)


def _add_output_flags(p):
    p.add_argument("--output", "-o", help="output path (default: stdout)")
    p.add_argument("--format", choices=FORMATS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spuridium", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_run_flags(sub.add_parser("solve", help="solve, test every state and classify"))
    p = sub.add_parser("classify", help="re-classify an existing report")
    p.add_argument("report", help="report file written by solve")
    _add_diag_flags(p)
    _add_output_flags(p)
    _add_run_flags(sub.add_parser("sumrule", help="TRK sum per basis size"))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = RunConfig.from_json(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    overrides: dict[str, dict] = {}
    for dest, (section, key) in _FLAG_MAP.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides.setdefault(section, {})[key] = value
    if "basis" in overrides:
        # --n and --scan replace each other rather than conflict with a file value
        if "n_basis" in overrides["basis"]:
            overrides["basis"].setdefault("scan", [])
        elif "scan" in overrides["basis"]:
            overrides["basis"].setdefault("n_basis", None)
    cfg.update(overrides)
    return cfg.validate()


def _emit(text: str, path: str | None):
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    from .runner import solve

    cfg = config_from_args(args)
    report = solve(cfg)
    _emit(report.render(cfg.output.format), cfg.output.path)
    return 0


def cmd_classify(args) -> int:
    from .runner import apply_classification

    try:
        with open(args.report) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read report: {exc}") from exc
    report, fmt = parse_report(text)
    cfg = RunConfig.from_dict(report.config)
    diag = {k: getattr(args, k) for k in ("tol_bound", "plateau_factor", "zero_floor")
            if getattr(args, k) is not None}
    cfg.update({"diagnostics": diag})
    try:
        cfg.validate()
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from exc
    report.config = cfg.to_dict()
    d = cfg.diagnostics
    apply_classification(report.sort(), d.tol_bound, d.plateau_factor, d.zero_floor)
    _emit(report.render(args.format or fmt), args.output)
    return 0


def cmd_sumrule(args) -> int:
    from .runner import sumrule

    cfg = config_from_args(args)
    rep = sumrule(cfg)
    _emit(rep.render(cfg.output.format), cfg.output.path)
    return 0


_COMMANDS = {"solve": cmd_solve, "classify": cmd_classify, "sumrule": cmd_sumrule}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"spuridium: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"spuridium: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SpuridiumError, np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"spuridium: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except json.JSONDecodeError as exc:
        print(f"spuridium: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
