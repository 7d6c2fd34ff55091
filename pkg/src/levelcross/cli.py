"""Command-line front end: ``levelcross {decompose,sweep,crossings,hydrogen}``.

Exit codes: 0 success, 2 configuration or parse error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import hydrogen as hy
from .adjacency import accumulate, components, pattern_of, to_dot
from .arith import as_fraction, check_precision
from .errors import ModelError
from .flow import DEFAULT_LADDER, SweepGrid, classify_all, detect_candidates, reports_to_json, sweep
from .parametric import ParametricMatrix, build_model_h, build_model_h0, build_model_hprime, load_model

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
BUILTIN_MODELS = ("h0", "h", "hprime", "hydrogen")
MODEL_GRID = ("g", "0", "2", 400, "linear")
HYDROGEN_GRID = ("rho", "100", "10000", 200, "log")
DEFAULT_THRESHOLD = "0.25"


class ConfigError(Exception):
    """Bad command-line configuration (exit code 2)."""


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    input: str | None = None
    assignments: dict[str, Fraction] = field(default_factory=dict)
    grid: SweepGrid | None = None
    precision: int = 16
    ladder: tuple[int, ...] = DEFAULT_LADDER
    threshold: Fraction | None = None
    out: str | None = None
    fmt: str | None = None
    threads: int = 1

    def __post_init__(self):
        if (self.model is None) == (self.input is None):
            raise ConfigError("give exactly one of --model and --input")
        if self.command in ("sweep", "crossings", "hydrogen") and self.grid is None:
            raise ConfigError(f"{self.command} needs a parameter grid")

    @property
    def is_hydrogen(self) -> bool:
        return self.model == "hydrogen"


def _fraction(text: str, flag: str) -> Fraction:
    try:
        return as_fraction(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{flag}: {exc}") from None


def _ladder(text: str) -> tuple[int, ...]:
    try:
        ladder = tuple(int(s) for s in text.split(","))
    except ValueError:
        raise ConfigError(f"--ladder must be comma-separated integers, got {text!r}") from None
    for d in ladder:
        _precision(d, "--ladder")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError(f"--ladder must be strictly ascending, got {text!r}")
    return ladder


def _precision(d: int, flag: str) -> int:
    try:
        return check_precision(d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{flag}: {exc}") from None


def _assignments(items: Sequence[str]) -> dict[str, Fraction]:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise ConfigError(f"--set expects name=value, got {item!r}")
        out[name.strip()] = _fraction(value, f"--set {name}")
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    command = args.command
    model = "hydrogen" if command == "hydrogen" else args.model
    inp = None if command == "hydrogen" else args.input
    if command != "hydrogen" and model is None and inp is None:
        raise ConfigError("give exactly one of --model and --input")
    grid = None
    if command != "decompose":
        defaults = HYDROGEN_GRID if model == "hydrogen" else MODEL_GRID
        param = getattr(args, "param", None) or defaults[0]
        start = args.start if args.start is not None else defaults[1]
        end = args.end if args.end is not None else defaults[2]
        steps = args.steps if args.steps is not None else defaults[3]
        spacing = args.spacing or defaults[4]
        try:
            grid = SweepGrid(param, _fraction(start, "--from"), _fraction(end, "--to"), steps, spacing)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if model == "hydrogen" and (grid.start < hy.RHO_MIN or grid.end > hy.RHO_MAX):
            raise ConfigError(f"rho grid must lie within [{hy.RHO_MIN}, {hy.RHO_MAX}]")
    threshold = getattr(args, "threshold", None)
    threads = getattr(args, "threads", None) or os.cpu_count() or 1
    if threads < 1:
        raise ConfigError("--threads must be positive")
    return RunConfig(
        command=command,
        model=model,
        input=inp,
        assignments=_assignments(getattr(args, "set", None)),
        grid=grid,
        precision=_precision(getattr(args, "precision", 16), "--precision"),
        ladder=_ladder(args.ladder) if getattr(args, "ladder", None) else DEFAULT_LADDER,
        threshold=None if threshold is None else _fraction(threshold, "--threshold"),
        out=args.out,
        fmt=getattr(args, "format", None),
        threads=threads,
    )


def _builtin(name: str, args) -> ParametricMatrix:
    if name == "h0":
        return build_model_h0()
    if name == "h":
        return build_model_h(_fraction(args.c2, "--c2"))
    if name == "hprime":
        return build_model_hprime(_fraction(args.E1, "--E1"), _fraction(args.E2, "--E2"), _fraction(args.C, "--C"))
    return hy.build_subspace_I()


def _load(cfg: RunConfig, args) -> ParametricMatrix:
    if cfg.model is not None:
        return _builtin(cfg.model, args)
    try:
        return load_model(cfg.input)
    except OSError as exc:
        raise ConfigError(f"cannot read {cfg.input}: {exc.strerror}") from None


def _fixed(m: ParametricMatrix, cfg: RunConfig) -> dict[str, Any]:
    unknown = sorted(set(cfg.assignments) - set(m.params))
    if unknown:
        raise ConfigError(f"--set names unknown parameter(s): {', '.join(unknown)}")
    if cfg.is_hydrogen:
        return dict(cfg.assignments)
    path = cfg.grid.param
    if path not in m.params:
        raise ConfigError(f"sweep parameter {path!r} is not a parameter of the model")
    missing = [p for p in m.params if p != path and p not in cfg.assignments]
    if missing:
        raise ConfigError(f"no value for parameter(s) {', '.join(missing)}; use --set name=value")
    return {k: v for k, v in cfg.assignments.items() if k != path}


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _partition_text(parts) -> str:
    sets = " ".join("{" + ",".join(str(k) for k in p) + "}" for p in parts)
    if len(parts) == 1:
        return "irreducible: 1 component " + sets
    return f"reducible: {len(parts)} components {sets}"


def cmd_decompose(cfg: RunConfig, args) -> int:
    if cfg.is_hydrogen:
        u, labels = hy.build_adjacency_fz0(), [f"Psi{s.index}" for s in hy.build_states()]
    else:
        m = _load(cfg, args)
        u, labels = pattern_of(m), None
    parts = components(u)
    print(_partition_text(parts))
    dot = to_dot(u, labels if args.labels else None, args.self_loops)
    if args.dot:
        _write(dot, args.dot)
    if args.accumulated:
        _write(accumulate(u).to_json() + "\n", args.accumulated)
    if cfg.fmt == "dot":
        _write(dot, cfg.out)
    elif cfg.fmt == "json":
        doc = {"reducible": len(parts) > 1, "components": parts}
        _write(json.dumps(doc) + "\n", cfg.out)
    elif cfg.fmt not in (None,):
        raise ConfigError(f"decompose cannot write format {cfg.fmt!r}")
    return EXIT_OK


def _flow(cfg: RunConfig, args):
    m = _load(cfg, args)
    if cfg.is_hydrogen:
        flow = hy.potential_curves(cfg.grid, cfg.precision, workers=cfg.threads)
        return m, {}, flow
    fixed = _fixed(m, cfg)
    return m, fixed, sweep(m, cfg.grid, fixed, cfg.precision, workers=cfg.threads)


def cmd_sweep(cfg: RunConfig, args) -> int:
    _, _, flow = _flow(cfg, args)
    fmt = cfg.fmt or "csv"
    if fmt == "csv":
        _write(flow.to_csv(cfg.precision), cfg.out)
    elif fmt == "json":
        _write(flow.to_json(cfg.precision), cfg.out)
    else:
        raise ConfigError(f"sweep cannot write format {fmt!r}")
    return EXIT_OK


def _reports(cfg: RunConfig, m, fixed, flow):
    if cfg.is_hydrogen:
        return hy.hydrogen_crossings(flow, cfg.ladder, cfg.threshold, workers=cfg.threads)
    threshold = cfg.threshold if cfg.threshold is not None else Fraction(DEFAULT_THRESHOLD)
    cands = detect_candidates(flow, threshold)
    return classify_all(m, fixed, cands, cfg.ladder, workers=cfg.threads)


def cmd_crossings(cfg: RunConfig, args) -> int:
    if cfg.fmt not in (None, "json"):
        raise ConfigError(f"crossings writes JSON only, not {cfg.fmt!r}")
    m, fixed, flow = _flow(cfg, args)
    reports = _reports(cfg, m, fixed, flow)
    _write(reports_to_json(reports), cfg.out)
    _summarise(reports, flow.grid.param)
    return EXIT_OK


def _summarise(reports, param: str) -> None:
    for r in reports:
        loc = "n/a" if r.location is None else f"{float(r.location):.10g}"
        a, b = r.candidate.curves
        print(f"curves {a},{b}: {r.verdict} at {param}={loc}", file=sys.stderr)


def cmd_hydrogen(cfg: RunConfig, args) -> int:
    m, fixed, flow = _flow(cfg, args)
    _write(flow.to_csv(cfg.precision), cfg.out)
    if args.emit_graph:
        labels = [f"Psi{s.index}" for s in hy.build_states()]
        _write(to_dot(hy.build_adjacency_fz0(), labels, name="U_Fz0"), args.emit_graph)
    if not args.no_crossings:
        reports = _reports(cfg, m, fixed, flow)
        if args.report:
            _write(reports_to_json(reports), args.report)
        _summarise(reports, flow.grid.param)
    return EXIT_OK


COMMANDS = {"decompose": cmd_decompose, "sweep": cmd_sweep, "crossings": cmd_crossings, "hydrogen": cmd_hydrogen}


def _model_options(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model", choices=BUILTIN_MODELS, help="built-in model")
    src.add_argument("--input", metavar="PATH", help="model file (JSON)")
    p.add_argument("--c2", default="0.3", help="C2 coupling of model h (default 0.3)")
    p.add_argument("--E1", default="1", help="E1 of model hprime")
    p.add_argument("--E2", default="2", help="E2 of model hprime")
    p.add_argument("--C", default="1", help="coupling coefficient of model hprime")
    p.add_argument("--set", action="append", metavar="NAME=VALUE", help="fix a model parameter (repeatable)")


def _grid_options(p: argparse.ArgumentParser, with_param: bool = True) -> None:
    if with_param:
        p.add_argument("--param", help="path parameter (default g, or rho for hydrogen)")
    p.add_argument("--from", dest="start", help="grid start")
    p.add_argument("--to", dest="end", help="grid end")
    p.add_argument("--steps", type=int, help="number of grid points (>= 2)")
    p.add_argument("--spacing", choices=("linear", "log"))
    p.add_argument("--precision", type=int, default=16, help="decimal digits (default 16)")
    p.add_argument("--threads", type=int, help="worker processes (default: all cores)")


def _crossing_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ladder", help="precision ladder, e.g. 16,50,128")
    p.add_argument("--threshold", help=f"gap threshold for candidates (default {DEFAULT_THRESHOLD}, hydrogen: H)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levelcross", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="adjacency components and reducibility")
    _model_options(p)
    p.add_argument("--dot", metavar="PATH", help="write the adjacency graph as DOT")
    p.add_argument("--accumulated", metavar="PATH", help="write U + ... + U^n as JSON")
    p.add_argument("--self-loops", action="store_true", help="keep diagonal self-loops in DOT")
    p.add_argument("--labels", action="store_true", help="use state labels as DOT node names")
    p.add_argument("--out")
    p.add_argument("--format", choices=("dot", "json"))

    p = sub.add_parser("sweep", help="eigenvalue curves over a grid (CSV)")
    _model_options(p)
    _grid_options(p)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("crossings", help="detect and classify crossings (JSON)")
    _model_options(p)
    _grid_options(p)
    _crossing_options(p)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json",))

    p = sub.add_parser("hydrogen", help="2S-2S F_z=0 potential curves")
    _grid_options(p, with_param=False)
    _crossing_options(p)
    p.add_argument("--out", help="curve CSV (default stdout)")
    p.add_argument("--report", metavar="PATH", help="write crossing reports as JSON")
    p.add_argument("--emit-graph", metavar="PATH", help="write the 24-state adjacency graph as DOT")
    p.add_argument("--no-crossings", action="store_true", help="skip crossing classification")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return COMMANDS[cfg.command](cfg, args)
    except (ConfigError, ModelError, json.JSONDecodeError) as exc:
        print(f"levelcross: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError) as exc:
        print(f"levelcross: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"levelcross: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
