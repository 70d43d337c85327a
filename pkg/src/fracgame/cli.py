"""Command-line harness: scenario checks, game runs, and experiment sweeps.

Verbs
-----
check            validate a scenario file / builtin and probe its conditions
run              one seeded game run of both control-with-guide procedures
sweep-deviation  proximity sweep of the mutual aiming procedures
sweep-value      convergence of the guide-game value along shrinking h
theorem1         two-sided value sandwich against seeded random adversaries

Exit codes: 0 = pass, 1 = tolerance failure, 2 = configuration error.
All measured output goes to files under --out (deterministic for a fixed
seed); progress and wall-clock timings go to stderr only.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dynamics import BlowUpError
from .experiments import (
    emit,
    emit_trajectory,
    run_lemma2_experiment,
    run_single,
    run_theorem1_experiment,
    run_value_sweep,
)
from .fractional import SeriesConvergenceError
from .scenarios import ScenarioValidationError, resolve_scenario
from .value import BudgetExceededError

__all__ = ["main"]


def _fraction(text: str) -> float:
    """Parse a step size given as a decimal ("0.03125") or ratio ("1/32")."""
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            value = float(num) / float(den)
        except (ValueError, ZeroDivisionError) as exc:
            raise argparse.ArgumentTypeError(f"bad fraction {text!r}: {exc}") from exc
    else:
        try:
            value = float(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad number {text!r}") from exc
    if not value > 0:
        raise argparse.ArgumentTypeError(f"step {text!r} must be positive")
    return value


def _fraction_list(text: str) -> list[float]:
    return [_fraction(part) for part in text.split(",") if part.strip()]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracgame",
        description="Feedback game runs and acceptance experiments for "
        "fractional-order controlled systems.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("scenario", help="builtin scenario name or path to a JSON file")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--seed", type=int, default=42, help="adversary seed (default 42)")

    p_check = sub.add_parser("check", help="validate a scenario and probe its conditions")
    p_check.add_argument("scenario")
    p_check.add_argument("--out", default=None, help="optional directory for the probe report")

    p_run = sub.add_parser("run", help="one seeded run of both guide procedures")
    common(p_run)
    p_run.add_argument("--h", type=_fraction, default=1 / 32, help="guide lattice step")
    p_run.add_argument("--diam", type=_fraction, default=1 / 32, help="control partition step")
    p_run.add_argument("--epsilon", type=float, default=0.01, help="positional-law accuracy")
    p_run.add_argument("--zeta", type=float, default=0.1, help="target accuracy")
    p_run.add_argument("--value-steps", type=int, default=4, help="guide-game tree depth")

    p_dev = sub.add_parser("sweep-deviation", help="mutual-aiming proximity sweep")
    common(p_dev)
    p_dev.add_argument("--k-min", type=int, default=4, help="coarsest dyadic level")
    p_dev.add_argument("--k-max", type=int, default=8, help="finest dyadic level")
    p_dev.add_argument("--adversaries", type=int, default=20)
    p_dev.add_argument("--xi", type=float, default=0.1, help="finest-point deviation target")

    p_val = sub.add_parser("sweep-value", help="guide-game value convergence")
    common(p_val)
    p_val.add_argument(
        "--h-list",
        type=_fraction_list,
        default=[1 / 8, 1 / 16, 1 / 32, 1 / 64],
        help='comma-separated steps, e.g. "1/8,1/16,1/32,1/64"',
    )
    p_val.add_argument("--value-steps", type=int, default=4)
    p_val.add_argument("--shrink", type=float, default=1.3, help="required Cauchy shrink factor")

    p_thm = sub.add_parser("theorem1", help="two-sided value sandwich experiment")
    common(p_thm)
    p_thm.add_argument("--h", type=_fraction, default=1 / 32)
    p_thm.add_argument("--diam", type=_fraction, default=1 / 32)
    p_thm.add_argument("--epsilon", type=float, default=0.01)
    p_thm.add_argument("--zeta", type=float, default=0.1)
    p_thm.add_argument("--adversaries", type=int, default=20)
    p_thm.add_argument("--value-steps", type=int, default=4)
    p_thm.add_argument(
        "--switches",
        type=int,
        default=None,
        help="interior switch count per adversary (default: switch every step)",
    )
    return parser


def _do_check(args: argparse.Namespace) -> int:
    spec, report = resolve_scenario(args.scenario)
    payload = {
        "scenario": spec.name,
        "config": spec.to_dict(),
        "results": {
            "lipschitz_ratio": report.lipschitz_ratio,
            "lipschitz_bound": report.lipschitz_bound,
            "growth_ratio": report.growth_ratio,
            "growth_bound": report.growth_bound,
            "isaacs_max_gap": report.isaacs.max_gap,
            "warnings": list(report.warnings),
        },
        "pass": report.ok,
    }
    text = json.dumps(payload, sort_keys=True, indent=2)
    print(text)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"check_{spec.name}.json").write_text(text + "\n")
    return 0 if report.ok else 1


def _do_run(args: argparse.Namespace) -> int:
    spec, _ = resolve_scenario(args.scenario)
    report, first, second = run_single(
        spec,
        h=args.h,
        diam=args.diam,
        epsilon=args.epsilon,
        zeta=args.zeta,
        seed=args.seed,
        value_steps=args.value_steps,
    )
    paths = emit(report, args.out)
    out = Path(args.out)
    paths.append(emit_trajectory(first, out / f"run_{spec.name}_first.csv"))
    paths.append(emit_trajectory(second, out / f"run_{spec.name}_second.csv"))
    _announce(report.passed, report.runtime_s, paths)
    return 0 if report.passed else 1


def _do_sweep_deviation(args: argparse.Namespace) -> int:
    if args.k_min > args.k_max:
        raise ScenarioValidationError("k-range", f"k-min {args.k_min} > k-max {args.k_max}")
    spec, _ = resolve_scenario(args.scenario)
    report = run_lemma2_experiment(
        spec,
        sweep=[(2.0**-k, 2.0**-k) for k in range(args.k_min, args.k_max + 1)],
        n_adversaries=args.adversaries,
        seed=args.seed,
        xi=args.xi,
    )
    paths = emit(report, args.out)
    _announce(report.passed, report.runtime_s, paths, report.notes)
    return 0 if report.passed else 1


def _do_sweep_value(args: argparse.Namespace) -> int:
    spec, _ = resolve_scenario(args.scenario)
    report = run_value_sweep(
        spec,
        h_list=args.h_list,
        value_steps=args.value_steps,
        shrink=args.shrink,
    )
    paths = emit(report, args.out)
    _announce(report.passed, report.runtime_s, paths, report.notes)
    return 0 if report.passed else 1


def _do_theorem1(args: argparse.Namespace) -> int:
    spec, _ = resolve_scenario(args.scenario)
    report = run_theorem1_experiment(
        spec,
        h=args.h,
        diam=args.diam,
        zeta=args.zeta,
        epsilon=args.epsilon,
        n_adversaries=args.adversaries,
        seed=args.seed,
        value_steps=args.value_steps,
        adversary_switches=args.switches,
    )
    paths = emit(report, args.out)
    _announce(report.passed, report.runtime_s, paths, report.notes)
    return 0 if report.passed else 1


def _announce(
    passed: bool,
    runtime_s: float | None,
    paths: list[Path],
    notes: tuple[str, ...] = (),
) -> None:
    for p in paths:
        print(p)
    for note in notes:
        print(f"note: {note}")
    print("PASS" if passed else "FAIL")
    if runtime_s is not None:
        print(f"runtime: {runtime_s:.1f} s", file=sys.stderr)


_VERBS = {
    "check": _do_check,
    "run": _do_run,
    "sweep-deviation": _do_sweep_deviation,
    "sweep-value": _do_sweep_value,
    "theorem1": _do_theorem1,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses its own exit codes
        return 0 if exc.code in (0, None) else 2
    try:
        return _VERBS[args.verb](args)
    except (
        ScenarioValidationError,
        FileNotFoundError,
        ValueError,
        BudgetExceededError,
        BlowUpError,
        SeriesConvergenceError,
    ) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover - exercised via the console script
    sys.exit(main())
