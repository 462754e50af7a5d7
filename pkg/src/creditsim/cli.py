"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 internal invariant
violation (a bug).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import serialize
from .analysis import SweepSpec, log_spaced, submodular_limit_profile, sweep, sweep_csv
from .decision import ModelParams, choose_strategy, threshold_unit_value, utilities
from .economy import LedgerError
from .engine import ConfigError, SimConfig, run

EXIT_USAGE = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


def load_json(path: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _params_from_args(args: argparse.Namespace) -> ModelParams:
    values: dict[str, Any] = {}
    if args.config:
        data = load_json(args.config)
        if isinstance(data, dict) and "params" in data:
            data = data["params"]
        if not isinstance(data, dict):
            raise UsageError(f"{args.config}: expected an object with c_r, p, c_p, c_w, r")
        unknown = sorted(set(data) - {"c_r", "p", "c_p", "c_w", "r"})
        if unknown:
            raise UsageError(f"{args.config}: unknown field(s) {', '.join(unknown)}")
        values.update(data)
    for name, flag in (("c_r", "cr"), ("p", "p"), ("c_p", "cp"), ("c_w", "cw"), ("r", "r")):
        if getattr(args, flag) is not None:
            values[name] = getattr(args, flag)
    missing = [name for name in ("c_r", "p", "c_p", "c_w", "r") if name not in values]
    if missing:
        raise UsageError("missing parameter(s): " + ", ".join(missing))
    try:
        return ModelParams(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_threshold(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    u_star = threshold_unit_value(params)
    if u_star == float("inf"):
        reason = "p = 0" if params.p == 0 else "r = 0"
        print(f"u* = never ({reason})")
    else:
        print(f"u* = {serialize.csv_real(u_star)}")
    if args.u is not None:
        if args.u < 0:
            raise UsageError("--u must be >= 0")
        strategy = choose_strategy(params, args.u)
        util = utilities(params, args.u)
        print(f"strategy = {strategy.value}, U2 = {serialize.csv_real(util.u2)}")
        print(f"U1 = {serialize.csv_real(util.u1)}, U3 = {serialize.csv_real(util.u3)}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    data = load_json(args.config)
    try:
        config = SimConfig.from_dict(data)
    except ConfigError as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    result = run(config)
    write_text(args.csv, result.to_csv())
    write_text(args.summary, result.summary_json())
    tick = "none" if result.collapse_tick is None else str(result.collapse_tick)
    print(f"collapse_tick = {tick}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    data = load_json(args.config)
    try:
        spec = SweepSpec.from_dict(data)
    except ConfigError as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    write_text(args.out, sweep_csv(sweep(spec, workers=args.workers)))
    return 0


def cmd_limit(args: argparse.Namespace) -> int:
    if not args.alpha > 0:
        raise UsageError("--alpha must be > 0")
    if args.max_n < 1 or args.points < 1:
        raise UsageError("--max-n and --points must be >= 1")
    profile = submodular_limit_profile(args.alpha, args.beta, log_spaced(args.max_n, args.points))
    lines = ["kind,n,u"]
    lines += [f"point,{n},{serialize.csv_real(u)}" for n, u in profile.points]
    lines.append(f"n_max,{serialize.csv_real(profile.n_max)},{serialize.csv_real(profile.u_at_max)}")
    write_text(args.out, "\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="creditsim",
        description="Reporting incentives under diminishing credit value.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="reporting threshold u* and strategy choice", allow_abbrev=False)
    p.add_argument("--config", help="JSON file with c_r, p, c_p, c_w, r (flags override)")
    p.add_argument("--cr", type=float, help="cost to read one comment")
    p.add_argument("--p", type=float, help="probability a comment is malicious")
    p.add_argument("--cp", type=float, help="mental cost of a malicious comment")
    p.add_argument("--cw", type=float, help="cost to write a report")
    p.add_argument("--r", type=float, help="credits per processed report")
    p.add_argument("--u", type=float, help="unit value of a credit; also print the choice")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("simulate", help="run one simulation from a JSON config", allow_abbrev=False)
    p.add_argument("config", help="SimConfig JSON file")
    p.add_argument("--csv", required=True, help="tick CSV output path")
    p.add_argument("--summary", required=True, help="summary JSON output path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="closed forms and simulations over a parameter grid", allow_abbrev=False)
    p.add_argument("config", help="sweep JSON file (axes, models, template)")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--workers", type=int, default=1, help="parallel cell workers")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("limit", help="submodular unit-value profile", allow_abbrev=False)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--points", type=int, default=25, help="number of log-spaced points")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_limit)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LedgerError as exc:
        print(f"{parser.prog} {args.command}: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
