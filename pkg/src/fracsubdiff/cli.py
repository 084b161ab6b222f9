"""Command-line front end.

Every subcommand that writes files records its resolved arguments under the
``"config"`` key of its JSON sidecar; passing that file back with
``--config`` repeats the run. Flags given on the command line override the
replayed values. Errors are reported as one JSON object on stderr with a
nonzero exit status.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import amplification_sweep, max_error, stability_report
from .fracweights import combined_weights, weight_table
from .harness import (
    PRESETS,
    StudyConfig,
    emit_profile,
    preset,
    run_study,
    study_csv_text,
    write_profile_csv,
    write_study_json,
)
from .problem import PAPER_EXAMPLE, load_problem
from .solver import GhostPolicy, SchemeKind, solve, write_levels_csv, write_metadata, write_solution_csv

__all__ = ["main", "build_parser", "parse_number"]

# arguments that steer the invocation rather than the computation
_NOT_REPLAYED = {"config", "out", "force", "command", "workers"}


class CLIError(Exception):
    def __init__(self, message: str, kind: str = "usage", status: int = 2):
        super().__init__(message)
        self.kind = kind
        self.status = status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message)


def parse_number(text: str) -> float:
    """Parse ``"0.001"`` or ``"1/1000"``; fractions are converted once, exactly."""
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}") from None


def parse_number_list(text: str) -> list[float]:
    return [parse_number(t) for t in str(text).split(",") if t.strip()]


def parse_pair(text: str) -> tuple[float, float]:
    parts = str(text).split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"pair must be 'alpha,beta', got {text!r}")
    return parse_number(parts[0]), parse_number(parts[1])


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, help="output directory (default: timestamped under ./runs)")
    p.add_argument("--force", action="store_true", help="write into an existing non-empty directory")
    p.add_argument("--config", type=Path, help="replay the 'config' section of a metadata JSON")


def _add_coefficients(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", type=SchemeKind.parse, default=SchemeKind.COMPACT6)
    p.add_argument("--alpha", type=parse_number, required=False)
    p.add_argument("--beta", type=parse_number, required=False)
    p.add_argument("--a", dest="A", type=parse_number, default=1.0, help="coefficient of the alpha term")
    p.add_argument("--b", dest="B", type=parse_number, default=1.0, help="coefficient of the beta term")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracsubdiff", description="Compact schemes for two-term fractional subdiffusion.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", help="run one solve and write the solution history")
    p.add_argument("--problem", default=PAPER_EXAMPLE, help="'paper-example' or a JSON problem file")
    p.add_argument("--scheme", type=SchemeKind.parse, default=SchemeKind.COMPACT6)
    p.add_argument("--alpha", type=parse_number)
    p.add_argument("--beta", type=parse_number)
    p.add_argument("--tau", type=parse_number)
    p.add_argument("--N", type=int)
    p.add_argument("--h", type=parse_number)
    p.add_argument("--M", type=int)
    p.add_argument("--ghosts", type=GhostPolicy, default=GhostPolicy.EXTRAPOLATE)
    p.add_argument("--profile-x", type=parse_number, help="also write values over time at this x")
    p.add_argument("--profile-t", type=parse_number, help="also write values over x at this t")
    p.add_argument("--levels", action="store_true", help="also write one CSV per time level")
    _add_output(p)

    for name, fixed, varied in (("converge-time", "fixed_h", "taus"), ("converge-space", "fixed_tau", "hs")):
        p = sub.add_parser(name, help=f"refinement study ({'time' if fixed == 'fixed_h' else 'space'})")
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--problem", default=None)
        p.add_argument("--scheme", type=SchemeKind.parse, default=None)
        p.add_argument("--pair", dest="pairs", type=parse_pair, action="append", help="alpha,beta (repeatable)")
        p.add_argument(f"--{fixed.replace('_', '-')}", dest="fixed", type=parse_number)
        p.add_argument(f"--{varied}", dest="varied", type=parse_number_list, help="comma-separated steps")
        p.add_argument("--ghosts", type=GhostPolicy, default=None)
        p.add_argument("--timing", action="store_true", help="write wall-clock seconds into study.csv")
        p.add_argument("--workers", type=int, default=None, help="thread count for independent solves")
        _add_output(p)

    p = sub.add_parser("stability-check", help="evaluate the stability condition and symbol sweep")
    _add_coefficients(p)
    p.add_argument("--tau", type=parse_number)
    p.add_argument("--h", type=parse_number)
    p.add_argument("--samples", type=int, default=1001)
    _add_output(p)

    p = sub.add_parser("symbol-sweep", help="tabulate Q, P and P/Q over sigma in [0, 1]")
    _add_coefficients(p)
    p.add_argument("--tau", type=parse_number)
    p.add_argument("--h", type=parse_number)
    p.add_argument("--samples", type=int, default=1001)
    _add_output(p)

    p = sub.add_parser("weights-dump", help="print raw and shifted weights for one order")
    p.add_argument("--order", type=parse_number)
    p.add_argument("--n", type=int)
    _add_output(p)
    parser.subcommands = sub.choices
    return parser


def _jsonable(v):
    if isinstance(v, (SchemeKind, GhostPolicy)):
        return v.value
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    return v


def _config_echo(args: argparse.Namespace) -> dict:
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in _NOT_REPLAYED}


def _parse(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise CLIError("a subcommand is required")
    if getattr(args, "config", None) is None:
        return args
    path = args.config
    if not path.is_file():
        raise CLIError(f"config file not found: {path}", kind="io", status=1)
    try:
        saved = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CLIError(f"config file is not valid JSON: {exc}") from None
    if saved.get("command") not in (None, args.command):
        raise CLIError(f"config was written by '{saved.get('command')}', not '{args.command}'")
    cfg = saved.get("config", saved)
    # re-parse with the saved values as defaults so explicit flags still win
    sub = parser.subcommands[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for k, v in cfg.items():
        if k in _NOT_REPLAYED or k not in known:
            continue
        if k == "pairs" and "--pair" in argv:
            # --pair appends, so a replayed list would merge with the new one
            continue
        if k == "pairs" and v is not None:
            v = [tuple(p) for p in v]
        elif isinstance(v, str) and known[k].type is not None:
            v = known[k].type(v)
        defaults[k] = v
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _out_dir(args: argparse.Namespace) -> Path:
    out = args.out
    if out is None:
        out = Path("runs") / f"{args.command}-{datetime.now().strftime('%Y%m%d-%H%M%S-%f')}"
    if out.exists():
        if not out.is_dir():
            raise CLIError(f"output path exists and is not a directory: {out}", kind="io", status=1)
        if any(out.iterdir()) and not args.force:
            raise CLIError(f"output directory {out} is not empty; pass --force to overwrite", kind="io", status=1)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CLIError(f"cannot write to {out}: {exc}", kind="io", status=1) from None
    return out


def _resolve_count(extent: float, step, count, step_name: str, count_name: str) -> tuple[float, int]:
    if step is None and count is None:
        raise CLIError(f"give --{step_name} or --{count_name}")
    if count is not None and count < 0:
        raise CLIError(f"--{count_name} must be non-negative")
    if step is not None and not step > 0:
        raise CLIError(f"--{step_name} must be positive")
    if count is None:
        count = int(round(extent / step))
        if count < 1 or abs(count * step - extent) > 1e-9 * extent:
            raise CLIError(f"--{step_name} {step!r} does not divide the extent {extent!r}")
    elif step is not None and count > 0 and abs(extent / count - step) > 1e-12 * step:
        raise CLIError(f"--{step_name} {step!r} and --{count_name} {count} are inconsistent")
    return (extent / count if count else extent), count


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise CLIError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _dump(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _cmd_solve(args) -> int:
    spec = load_problem(args.problem, args.alpha, args.beta)
    _, M = _resolve_count(spec.length, args.h, args.M, "h", "M")
    _, N = _resolve_count(spec.horizon, args.tau, args.N, "tau", "N")
    out = _out_dir(args)
    hist = solve(spec, args.scheme, M, N, args.ghosts)
    e_inf = max_error(hist, spec.exact) if spec.exact is not None else None
    write_solution_csv(hist, out / "solution.csv")
    if args.levels:
        write_levels_csv(hist, out / "levels")
    extra = {"command": "solve", "config": _config_echo(args)}
    for mode, coord in (("fixed-x", args.profile_x), ("fixed-t", args.profile_t)):
        if coord is None:
            continue
        rows, snapped, dist = emit_profile(hist, mode, coord)
        name = f"profile_{mode.split('-')[1]}.csv"
        write_profile_csv(rows, mode, out / name)
        extra.setdefault("profiles", []).append(
            {"mode": mode, "requested": coord, "snapped": snapped, "snap_distance": dist, "file": name}
        )
    write_metadata(hist, out / "metadata.json", e_inf=e_inf, extra=extra)
    print(json.dumps({"out": str(out), "e_inf": e_inf, "M": M, "N": N, "wall_seconds": hist.wall_seconds}))
    return 0


def _study_config(args) -> StudyConfig:
    if args.preset:
        base = preset(args.preset).to_dict()
    else:
        base = {"problem": PAPER_EXAMPLE, "scheme": SchemeKind.COMPACT6, "ghosts": GhostPolicy.EXTRAPOLATE}
    fixed_key = "fixed_h" if args.command == "converge-time" else "fixed_tau"
    if args.preset and PRESETS[args.preset].kind != ("temporal" if fixed_key == "fixed_h" else "spatial"):
        raise CLIError(f"preset {args.preset} does not match {args.command}")
    overrides = {
        "problem": args.problem,
        "scheme": args.scheme,
        "pairs": args.pairs,
        fixed_key: args.fixed,
        "varied": args.varied,
        "ghosts": args.ghosts,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    base["timing"] = bool(args.timing)
    for key in ("pairs", fixed_key, "varied"):
        if base.get(key) is None:
            raise CLIError(f"study needs {key} (give it explicitly or use --preset)")
    try:
        return StudyConfig.from_dict(base)
    except ValueError as exc:
        raise CLIError(str(exc)) from None


def _cmd_study(args) -> int:
    config = _study_config(args)
    out = _out_dir(args)
    result = run_study(config, args.workers)
    text = study_csv_text(result)
    (out / "study.csv").write_text(text)
    write_study_json(result, out / "study.json", extra={"command": args.command, "config": _config_echo(args)})
    sys.stdout.write(text)
    failed = [r for r in result.rows if r.error]
    if failed:
        raise CLIError(f"{len(failed)} study cell(s) failed; see study.json", kind="solve", status=1)
    return 0


def _cmd_stability(args) -> int:
    _require(args, "alpha", "beta", "tau", "h")
    report = stability_report(args.scheme, args.alpha, args.beta, args.A, args.B, args.tau, args.h, args.samples)
    payload = report.to_dict()
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        out = _out_dir(args)
        (out / "stability.json").write_text(text)
        _dump({"command": args.command, "config": _config_echo(args)}, out / "run.json")
    sys.stdout.write(text)
    return 0


def _cmd_sweep(args) -> int:
    _require(args, "alpha", "beta", "tau", "h")
    if args.samples < 2:
        raise CLIError("--samples must be at least 2")
    w = combined_weights(args.alpha, args.beta, args.A, args.B, args.tau, args.h, 1)
    sigma = np.linspace(0.0, 1.0, args.samples)
    worst, p_ok, table = amplification_sweep(args.scheme, float(w[0]), float(w[1]), sigma)
    lines = ["sigma,Q,P,ratio"] + [",".join(format(float(v), ".17g") for v in row) for row in table]
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        out = _out_dir(args)
        (out / "sweep.csv").write_text(text)
        _dump(
            {"command": args.command, "config": _config_echo(args), "worst_ratio": worst, "p_nonnegative": p_ok},
            out / "run.json",
        )
    sys.stdout.write(text)
    return 0


def _cmd_weights(args) -> int:
    _require(args, "order", "n")
    if args.n < 0:
        raise CLIError("--n must be non-negative")
    table = weight_table(args.order, args.n)
    lines = ["ell,raw,shifted"] + [
        f"{i},{format(float(r), '.17g')},{format(float(s), '.17g')}"
        for i, (r, s) in enumerate(zip(table.raw, table.shifted))
    ]
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        out = _out_dir(args)
        (out / "weights.csv").write_text(text)
        _dump({"command": args.command, "config": _config_echo(args)}, out / "run.json")
    sys.stdout.write(text)
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "converge-time": _cmd_study,
    "converge-space": _cmd_study,
    "stability-check": _cmd_stability,
    "symbol-sweep": _cmd_sweep,
    "weights-dump": _cmd_weights,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
        return _COMMANDS[args.command](args)
    except CLIError as exc:
        err = {"error": exc.kind, "message": str(exc)}
        status = exc.status
    except FileNotFoundError as exc:
        err = {"error": "io", "message": str(exc)}
        status = 1
    except (ValueError, ArithmeticError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        status = 1
    sys.stderr.write(json.dumps(err) + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
