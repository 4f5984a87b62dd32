"""Command-line front end.

Exit codes: 0 success, 1 I/O or validation error, 2 size-limit refusal
(including non-integer powers in exact mode), 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import condenser as con
from . import extractor as ext
from . import game as gm
from .errors import SizeLimitError, SolverError, ValidationError
from .model import (DEFAULT_LIMIT, AnalysisParams, dumps_report, format_text, load_family,
                    random_family, save_family)
from .verify import run_all

EXIT_OK, EXIT_INPUT, EXIT_LIMIT, EXIT_SOLVER = 0, 1, 2, 3


def _q_list(text: str) -> list[int]:
    try:
        qs = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad Q list {text!r}") from exc
    if not qs or min(qs) < 1:
        raise argparse.ArgumentTypeError("Q values must be positive integers")
    return qs


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", help="family JSON file")
    common.add_argument("--k", type=float, default=None, help="input min-entropy")
    common.add_argument("--k-prime", type=float, default=0.0, help="output min-entropy")
    common.add_argument("--eps", type=float, default=0.0, help="error parameter")
    common.add_argument("--q", type=_q_list, default=[1], help="adversary dimensions, e.g. 1,2,4")
    common.add_argument("--tol", type=float, default=1e-7, help="SDP tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="enumeration limit")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker count (accepted for compatibility; runs are single-threaded)")
    common.add_argument("--iters", type=int, default=30, help="see-saw iterations")
    common.add_argument("--restarts", type=int, default=4, help="see-saw restarts")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings")

    p = argparse.ArgumentParser(prog="qpext", description="Extractor and condenser analysis.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze-ext", parents=[common], help="extractor report")
    sub.add_parser("analyze-cond", parents=[common], help="condenser report")
    sub.add_parser("game", parents=[common], help="two-player game report")
    sub.add_parser("verify", parents=[common], help="run the property suites")
    rf = sub.add_parser("rand-family", parents=[common], help="write a random family")
    rf.add_argument("--n", type=int, required=True)
    rf.add_argument("--m", type=int, required=True)
    rf.add_argument("--d", type=int, default=0)
    rf.add_argument("--strong-m-prime", type=int, default=None)
    return p


def _need_family(args):
    if not args.family:
        raise ValidationError("--family is required")
    return load_family(args.family)


def _params(args, fam) -> AnalysisParams:
    if args.k is None:
        raise ValidationError("--k is required")
    return AnalysisParams(args.k, args.k_prime, args.eps, max(args.q), args.tol, args.seed,
                          args.limit).validate(fam)


def cmd_analyze_ext(args) -> dict:
    fam = _need_family(args)
    prm = _params(args, fam)
    rep = ext.analyze_extractor(fam, prm.k, args.q, args.iters, args.restarts, prm.seed,
                                prm.tol, prm.enumeration_limit)
    return rep.to_dict(args.timings)


def _game_section(fam, args, prm) -> dict:
    try:
        q = min(max(args.q), 4)
        return gm.sandwich_check(fam, prm.k, prm.k_prime, q, args.iters, args.restarts,
                                 prm.seed, prm.tol, prm.enumeration_limit)
    except SizeLimitError as exc:
        return {"skipped": str(exc)}


def cmd_analyze_cond(args) -> dict:
    fam = _need_family(args)
    prm = _params(args, fam)
    rep = con.analyze_condenser(fam, prm.k, prm.k_prime, prm.eps, args.q, args.iters, args.restarts,
                                prm.seed, prm.tol, prm.enumeration_limit)
    rep.game = _game_section(fam, args, prm)
    return rep.to_dict(args.timings)


def cmd_game(args) -> dict:
    fam = _need_family(args)
    prm = _params(args, fam)
    g = gm.build_game(fam, prm.k, prm.k_prime)
    t0 = time.perf_counter()
    omega = gm.classical_value(g, prm.enumeration_limit)[0]
    out = {"game.gamma": g.gamma, "game.gamma_prime": g.gamma_prime, "game.classical_value": omega}
    for i, q in enumerate(sorted(set(args.q))):
        if q > 4:
            raise ValidationError("game see-saw supports Q <= 4")
        val, _ = gm.entangled_value_lower(g, q, None, args.iters, args.restarts, prm.seed + i,
                                          prm.tol, prm.enumeration_limit)
        out[f"game.entangled_lower.q{q}"] = val
    sw = gm.sandwich_check(fam, prm.k, prm.k_prime, 1, args.iters, args.restarts, prm.seed,
                           prm.tol, prm.enumeration_limit)
    for key in ("scaled_norm", "classical_ok", "ratio"):
        out[f"game.{key}"] = sw[key]
    if args.timings:
        out["timings.total"] = time.perf_counter() - t0
    return out


def cmd_verify(args) -> tuple[dict, bool]:
    res = run_all(args.seed)
    out, all_ok = {}, True
    for suite, checks in res.items():
        passed = sum(1 for _, ok in checks if ok)
        out[f"{suite}.passed"] = passed
        out[f"{suite}.failed"] = len(checks) - passed
        for name, ok in checks:
            if not ok:
                all_ok = False
                out[f"{suite}.failures"] = out.get(f"{suite}.failures", []) + [name]
    out["all_passed"] = all_ok
    return out, all_ok


def cmd_rand_family(args) -> None:
    fam = random_family(args.n, args.m, args.d, args.seed, args.limit, args.strong_m_prime)
    if args.out:
        save_family(fam, args.out)
    else:
        sys.stdout.write(json.dumps(fam.to_dict()) + "\n")


def _emit(report: dict, args) -> None:
    text = dumps_report(report) if args.format == "json" else format_text(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rand-family":
            cmd_rand_family(args)
            return EXIT_OK
        if args.command == "verify":
            report, ok = cmd_verify(args)
            _emit(report, args)
            return EXIT_OK if ok else EXIT_INPUT
        handler = {"analyze-ext": cmd_analyze_ext, "analyze-cond": cmd_analyze_cond,
                   "game": cmd_game}[args.command]
        _emit(handler(args), args)
        return EXIT_OK
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
