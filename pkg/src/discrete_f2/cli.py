"""Command line front end: ``thm1``, ``thm2`` and ``check``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import jsonschema

from . import diffeo
from .certificate import Certificate
from .certify import (
    ObstructionParams,
    PLAction,
    UnknownClaim,
    norm0_discreteness_certificate,
    obstruction_report,
    revalidate,
    strong_discreteness_certificate,
    uniform_discreteness_certificate,
)
from .diffeo import InfeasibleConstruction
from .pingpong import (
    AdmissibleWordPair,
    ChainError,
    PingPongSystem,
    WindowExhausted,
    breakpoints_csv,
    build_chain,
    default_window,
    discreteness_certificate,
    lipschitz_certificate,
    parse_rational,
    small_ball_certificate,
    verify_conditions,
)
from .schedule import ScheduleError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INFEASIBLE = 2
EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_NOINPUT = 66

# tail index from which the default chain keeps g within the Lipschitz bound
THM2_TAIL_FROM = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 64 instead of argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return value


def _positive_int(text: str) -> int:
    value = _nonneg_int(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _rational(text: str) -> Fraction:
    try:
        value = parse_rational(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="discrete-f2", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t1 = sub.add_parser("thm1", help="C^1 construction along the word-pair ladder")
    t1.add_argument("--config", type=Path, help="JSON file with keys C, margin, pairs, grid, out")
    t1.add_argument("--C", type=_positive_float, dest="C")
    t1.add_argument("--margin", type=_positive_float)
    t1.add_argument("--pairs", type=_nonneg_int)
    t1.add_argument("--grid", type=_positive_int, help="CSV sample points")
    t1.add_argument("--out", type=Path)

    t2 = sub.add_parser("thm2", help="exact piecewise-linear ping-pong construction")
    t2.add_argument("--config", type=Path, help="JSON file with the same keys as the flags")
    t2.add_argument("--L", type=_positive_int, dest="L")
    t2.add_argument("--epsilon", type=_rational, help="small-ball scale as p/q")
    t2.add_argument("--powers", type=int, choices=(2, 4), help="f powers checked in condition (ii)")
    t2.add_argument("--obstruction", action="store_true", help="add the C^1 obstruction report")
    t2.add_argument("--window", type=_positive_int, help="chain window N_max")
    t2.add_argument("--U", default=None, help="word U over f, g (default ffgff)")
    t2.add_argument("--V", default=None, help="word V over f, g (default fgf)")
    t2.add_argument("--out", type=Path)

    ck = sub.add_parser("check", help="re-validate a stored certificate")
    ck.add_argument("certificate", type=Path)
    return parser


THM1_DEFAULTS = {"C": 1.5, "margin": 0.01, "pairs": 200, "grid": 2001, "out": "out"}
THM2_DEFAULTS = {"L": 4, "epsilon": None, "powers": 4, "obstruction": False, "window": None, "U": None, "V": None, "out": "out"}


def _merge(args: argparse.Namespace, defaults: dict) -> dict:
    """Flags override the config file, which overrides defaults."""
    config = dict(defaults)
    if args.config is not None:
        try:
            loaded = json.loads(args.config.read_text())
        except FileNotFoundError:
            raise UsageError(f"config file {args.config} not found") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(loaded) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        config.update(loaded)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            config[key] = value
    return config


def _validate_thm1(cfg: dict) -> dict:
    try:
        cfg["C"] = float(cfg["C"])
        cfg["margin"] = float(cfg["margin"])
        cfg["pairs"] = int(cfg["pairs"])
        cfg["grid"] = int(cfg["grid"])
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if not cfg["C"] > 0:
        raise UsageError("C must be positive")
    if not 0 < cfg["margin"] <= 1:
        raise UsageError("margin must lie in (0, 1]")
    if cfg["pairs"] < 0 or cfg["grid"] < 2:
        raise UsageError("pairs must be >= 0 and grid >= 2")
    return cfg


def _validate_thm2(cfg: dict) -> dict:
    try:
        cfg["L"] = int(cfg["L"])
        cfg["powers"] = int(cfg["powers"])
        if cfg["epsilon"] is not None:
            cfg["epsilon"] = parse_rational(cfg["epsilon"])
        if cfg["window"] is not None:
            cfg["window"] = int(cfg["window"])
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None
    if cfg["L"] < 1:
        raise UsageError("L must be positive")
    if cfg["powers"] not in (2, 4):
        raise UsageError("powers must be 2 or 4")
    if cfg["epsilon"] is not None and not 0 < cfg["epsilon"] <= 1:
        raise UsageError("epsilon must lie in (0, 1]")
    return cfg


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}") from None
    return out


def _report(cert: Certificate, path: Path) -> bool:
    cert.write(path)
    print(f"{cert.claim_id}: {cert.status} -> {path}")
    return cert.passed


def cmd_thm1(cfg: dict) -> int:
    cfg = _validate_thm1(cfg)
    out = _out_dir(cfg["out"])
    try:
        construction = diffeo.build(cfg["pairs"], cfg["C"], cfg["margin"])
    except (InfeasibleConstruction, ScheduleError) as exc:
        print(f"construction infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    diffeo.sample_csv(construction, out / "thm1_generators.csv", cfg["grid"])
    cert = uniform_discreteness_certificate(construction, cfg["C"], cfg["margin"])
    ok = _report(cert, out / "thm1_uniform_discreteness.json")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_thm2(cfg: dict) -> int:
    cfg = _validate_thm2(cfg)
    out = _out_dir(cfg["out"])
    try:
        if cfg["U"] or cfg["V"]:
            default = AdmissibleWordPair.default()
            pair = AdmissibleWordPair.parse(cfg["U"] or str(default.U), cfg["V"] or str(default.V))
        else:
            pair = AdmissibleWordPair.default()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    L = cfg["L"]
    window = cfg["window"] if cfg["window"] is not None else default_window(L, pair)
    try:
        chain = build_chain("default", window)
        system = PingPongSystem.build(chain)
        powers = range(1, cfg["powers"] + 1)
        certs = [
            (verify_conditions(system.f, system.g, chain, powers), "thm2_conditions.json"),
            (discreteness_certificate(pair, system.f, system.g, chain, L), "thm2_discreteness.json"),
            (lipschitz_certificate(system.g, chain, tail_from=THM2_TAIL_FROM), "thm2_lipschitz.json"),
        ]
        action = PLAction(system, pair)
        certs.append((strong_discreteness_certificate(action, None, Fraction(1, 20), L), "thm2_strong_discreteness.json"))
        if cfg["epsilon"] is not None:
            certs.append((small_ball_certificate(cfg["epsilon"], pair, L), "thm2_small_ball.json"))
        if cfg["obstruction"]:
            count = 2 if cfg["powers"] == 2 else 3
            params = ObstructionParams(1, Fraction(99, 100), Fraction(101, 100), count)
            certs.append((obstruction_report(params, chain), f"thm2_obstruction_{count}.json"))
    except (ChainError, WindowExhausted) as exc:
        print(f"construction infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    breakpoints_csv(system.f, out / "thm2_f.csv")
    breakpoints_csv(system.g, out / "thm2_g.csv")
    results = [_report(cert, out / name) for cert, name in certs]
    return EXIT_OK if all(results) else EXIT_FAIL


def cmd_check(path: Path) -> int:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        print(f"no such certificate: {path}", file=sys.stderr)
        return EXIT_NOINPUT
    except json.JSONDecodeError as exc:
        print(f"not JSON: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    try:
        cert = Certificate.from_dict(raw)
    except jsonschema.ValidationError as exc:
        print(f"schema violation: {exc.message}", file=sys.stderr)
        return EXIT_DATAERR
    try:
        same, fresh = revalidate(cert)
    except UnknownClaim as exc:
        print(f"unknown claim_id {exc}", file=sys.stderr)
        return EXIT_DATAERR
    except (KeyError, TypeError, ValueError) as exc:
        print(f"certificate inputs cannot be replayed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if not same:
        print(f"{cert.claim_id}: NOT reproduced (fresh status {fresh.status})")
        return EXIT_FAIL
    print(f"{cert.claim_id}: reproduced, status {cert.status}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "thm1":
            return cmd_thm1(_merge(args, THM1_DEFAULTS))
        if args.command == "thm2":
            return cmd_thm2(_merge(args, THM2_DEFAULTS))
        return cmd_check(args.certificate)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
