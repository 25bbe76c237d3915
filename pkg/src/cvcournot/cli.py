"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, List, Optional

from . import __version__
from .equilibrium import finite_a_optimum
from .model import (
    GAMMA_LIMIT_EPS,
    QUARTER_PI,
    NonConvergence,
    NumericalError,
    ParameterError,
    info_from_ratio,
    make_infinite_market,
    make_market,
)
from .optics import PoissonTruncation
from .oracle import OracleConfig, best_response_oracle
from .payoffs import (
    bayes_payoffs,
    classical_apparatus_payoffs,
    lossy_payoffs,
    quantum_apparatus_payoffs_finite,
    quantum_apparatus_payoffs_limit,
)
from .sweep import (
    SCHEMA_VERSION,
    SweepSpec,
    figure_specs,
    oracle_game,
    run_sweep,
    solve_point,
    sweep_transitions,
    to_csv,
    transitions_json,
)

EXIT_INVALID = 2
EXIT_NUMERICAL = 3

GAME_NAMES = {
    "symmetric-classical": "symmetric_classical",
    "symmetric-quantum": "symmetric_quantum",
    "bayes": "bayes",
    "asym-loss": "asym_loss",
}
BOOLEAN_KEYS = {"gamma_limit", "no_oracle"}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


def read_config(path: str) -> Dict[str, str]:
    """Parse a ``key = value`` file; keys mirror the long flags (``-`` or ``_``)."""
    out: Dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _resolve_gamma(args) -> Optional[float]:
    if getattr(args, "gamma_limit", False):
        return QUARTER_PI - GAMMA_LIMIT_EPS
    return args.gamma


def _point_params(args) -> Dict[str, float]:
    p = {"k": args.k, "theta": args.theta, "delta_over_k": args.dk, "eta": args.eta}
    gamma = _resolve_gamma(args)
    p["gamma"] = 0.0 if gamma is None else gamma
    return {key: value for key, value in p.items() if value is not None}


REQUIRED = {"bayes": ("delta_over_k", "--dk"), "asym_loss": ("eta", "--eta")}


def cmd_equilibrium(args) -> dict:
    game = GAME_NAMES[args.game]
    params = _point_params(args)
    if game in REQUIRED and REQUIRED[game][0] not in params:
        raise ParameterError(f"game {args.game} needs {REQUIRED[game][1]}")
    closed = solve_point(game, params)
    out = {"schema_version": SCHEMA_VERSION, "game": args.game, "params": params, **closed.as_dict()}
    if not args.no_oracle:
        try:
            oracle = best_response_oracle(oracle_game(game, params), OracleConfig())
        except NonConvergence as exc:
            raise CliError(str(exc), EXIT_NUMERICAL) from exc
        out["oracle"] = {
            "x_star": dict(zip(oracle.labels, oracle.x_star)),
            "residual": oracle.residual,
            "iterations": oracle.iterations,
            "max_strategy_diff": max(abs(a - b) for a, b in zip(oracle.x_star, closed.x_star)),
        }
    return out


def cmd_payoff(args) -> dict:
    gamma = _resolve_gamma(args)
    gamma = 0.0 if gamma is None else gamma
    x1, x2 = args.x1, args.x2
    if x1 < 0 or x2 < 0:
        raise ParameterError("strategies x1, x2 must be >= 0")
    apparatus = args.apparatus
    if apparatus == "classical":
        pair = classical_apparatus_payoffs(x1, x2, gamma, args.k)._asdict()
    elif apparatus == "quantum-limit":
        pair = quantum_apparatus_payoffs_limit(x1, x2, gamma, make_infinite_market(args.k))._asdict()
    elif apparatus == "quantum-finite":
        if args.a is None or args.c is None:
            raise ParameterError("quantum-finite payoffs need --a and --c")
        pair = quantum_apparatus_payoffs_finite(x1, x2, gamma, make_market(args.a, args.c))._asdict()
    elif apparatus == "lossy":
        pair = lossy_payoffs(x1, x2, gamma, args.eta if args.eta is not None else 1.0, args.k)._asdict()
    else:
        if args.dk is None:
            raise ParameterError("bayes payoffs need --dk")
        info = info_from_ratio(args.theta, args.dk, args.k)
        pair = bayes_payoffs(x1, x2, gamma, info)._asdict()
    return {"schema_version": SCHEMA_VERSION, "apparatus": apparatus, "x1": x1, "x2": x2, "gamma": gamma, **pair}


def _sweep_spec(args) -> SweepSpec:
    game = GAME_NAMES[args.game]
    fixed = {key: value for key, value in _point_params(args).items() if key != args.variable}
    lo, hi = args.range
    kwargs = {}
    if args.variable2:
        fixed.pop(args.variable2, None)
        lo2, hi2 = args.range2
        kwargs = dict(variable2=args.variable2, lo2=lo2, hi2=hi2, steps2=args.steps2)
    return SweepSpec(game, args.variable, lo, hi, args.steps, fixed, **kwargs)


def _write(path: str, text: str) -> None:
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from exc


def cmd_sweep(args) -> dict:
    if args.figure:
        specs = figure_specs(args.figure, args.steps)
        root, ext = os.path.splitext(args.out)
        targets = {label: f"{root}_{label}{ext or '.csv'}" for label in specs}
    else:
        if args.game is None or args.variable is None or args.range is None:
            raise ParameterError("sweep needs --figure or all of --game, --variable, --range")
        specs = {"sweep": _sweep_spec(args)}
        targets = {"sweep": args.out}
    summary = {"schema_version": SCHEMA_VERSION, "files": {}, "transitions": {}}
    for label, spec in specs.items():
        result = run_sweep(spec)
        _write(targets[label], to_csv(result))
        found = sweep_transitions(result)
        summary["files"][label] = targets[label]
        summary["transitions"][label] = [t.__dict__ for t in found]
        if found:
            root, _ = os.path.splitext(targets[label])
            _write(root + ".transitions.json", transitions_json(found))
        for t in found:
            print(
                f"{label}: kink in {t.series} at {spec.variable}={t.location:.6g} "
                f"(slope {t.left_slope:.6g} -> {t.right_slope:.6g})",
                file=sys.stderr,
            )
    return summary


def cmd_finite_a_optimum(args) -> dict:
    market = make_market(args.a, args.c)
    gamma = _resolve_gamma(args)
    gamma = QUARTER_PI - GAMMA_LIMIT_EPS if gamma is None else gamma
    opt = finite_a_optimum(market, gamma, PoissonTruncation(tail_bound=args.tail_bound))
    return {
        "schema_version": SCHEMA_VERSION,
        "a": market.a,
        "c": market.c,
        "k": market.k,
        "gamma": gamma,
        "x_opt": opt.x_opt,
        "u_opt": opt.u_opt,
        "m_max": list(opt.m_max),
        "certified_tail": opt.tail,
    }


def _add_gamma(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=float, help="beam-splitter angle in radians, [0, pi/4)")
    p.add_argument(
        "--gamma-limit",
        action="store_true",
        help=f"use gamma = pi/4 - {GAMMA_LIMIT_EPS:g} (the pi/4 limit from below)",
    )


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=float, default=1.0, help="margin k = a - c (default 1)")
    p.add_argument("--theta", type=float, default=0.5, help="probability firm 2 is high-cost")
    p.add_argument("--dk", type=float, default=None, help="cost asymmetry delta/k")
    p.add_argument("--eta", type=float, default=None, help="firm 2 transmissivity in (0, 1]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvcournot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibrium", allow_abbrev=False, help="closed-form equilibrium at one parameter point")
    p.add_argument("--config", help="key = value file mirroring these flags")
    p.add_argument("--game", choices=sorted(GAME_NAMES), required=True)
    _add_gamma(p)
    _add_params(p)
    p.add_argument("--no-oracle", action="store_true", help="skip the best-response cross-check")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("payoff", allow_abbrev=False, help="payoffs for given strategies")
    p.add_argument("--config", help="key = value file mirroring these flags")
    p.add_argument(
        "--apparatus",
        choices=["classical", "quantum-limit", "quantum-finite", "lossy", "bayes"],
        default="classical",
    )
    p.add_argument("--x1", type=float, required=True)
    p.add_argument("--x2", type=float, required=True)
    p.add_argument("--a", type=float)
    p.add_argument("--c", type=float)
    _add_gamma(p)
    _add_params(p)
    p.set_defaults(func=cmd_payoff)

    p = sub.add_parser("sweep", allow_abbrev=False, help="sweep one or two parameters and write CSV")
    p.add_argument("--config", help="key = value file mirroring these flags")
    p.add_argument("--figure", choices=["fig1", "fig2", "fig3a", "fig3b", "fig4"])
    p.add_argument("--game", choices=sorted(GAME_NAMES))
    p.add_argument("--variable", choices=["gamma", "delta_over_k", "eta"])
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--steps", type=int, default=201)
    p.add_argument("--variable2", choices=["gamma", "delta_over_k", "eta"])
    p.add_argument("--range2", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--steps2", type=int, default=201)
    p.add_argument("--out", required=True, help="CSV path (a stem for --figure)")
    _add_gamma(p)
    _add_params(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("finite-a-optimum", allow_abbrev=False, help="best common strategy for a finite market")
    p.add_argument("--config", help="key = value file mirroring these flags")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--tail-bound", type=float, default=1e-12)
    _add_gamma(p)
    p.set_defaults(func=cmd_finite_a_optimum)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: List[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config or not known.command:
        return
    values = read_config(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sub = subparsers.choices.get(known.command)
    if sub is None:
        return
    dests = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        if key not in dests:
            raise CliError(f"{known.config}: unknown key {key!r} for {known.command}")
        action = dests[key]
        if key in BOOLEAN_KEYS:
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        elif action.nargs == 2:
            defaults[key] = [action.type(v) for v in value.replace(",", " ").split()]
        elif key == "game":
            defaults[key] = value.replace("_", "-")
        else:
            defaults[key] = value
    for action in sub._actions:
        if action.dest in defaults:
            action.required = False
    sub.set_defaults(**defaults)


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if getattr(args, "gamma_limit", False) and args.gamma is not None:
            raise ParameterError("give either --gamma or --gamma-limit, not both")
        result = args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ParameterError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    json.dump(result, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
