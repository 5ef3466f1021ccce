"""Command-line entry point.

Subcommands:
    run     execute a Monte Carlo scenario and emit plot-ready CSV
    verify  run the numerical invariant and inequality suites
    slopes  fit high-SNR slopes from a previously written CSV

Exit codes: 0 success, 1 configuration error (including bad flags),
2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import ConfigError, InvalidInputError, SecMimoError
from .grassmann import FeedbackSchedule
from .harness import (
    fitted_slopes_from_rows,
    read_csv,
    render_csv,
    run_experiment,
    scenario_config,
    write_csv,
)
from .verification import run_verification


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="secmimo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a Monte Carlo scenario")
    run_p.add_argument(
        "--scenario",
        choices=("slope", "saturation", "gap_vs_bits", "custom"),
        default=None,
        help="experiment family (default slope)",
    )
    run_p.add_argument(
        "--nr",
        action="append",
        type=int,
        default=None,
        help="receiver antenna count; repeat for several curves",
    )
    run_p.add_argument("--snr-min", type=float, default=None, help="sweep start in dB")
    run_p.add_argument("--snr-max", type=float, default=None, help="sweep end in dB")
    run_p.add_argument("--snr-step", type=float, default=None, help="sweep step in dB")
    run_p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per point")
    run_p.add_argument("--seed", type=int, default=None, help="experiment seed")
    run_p.add_argument("--rho", type=float, default=None, help="information power fraction")
    run_p.add_argument(
        "--epsilon", type=float, default=None, help="margin of the scaled bit schedule"
    )
    run_p.add_argument("--nf", type=int, default=None, help="fixed feedback bit budget")
    run_p.add_argument("--out", default=None, help="output CSV path (stdout if omitted)")
    run_p.add_argument(
        "--config", default=None, help="JSON file with the same keys; flags override it"
    )
    run_p.set_defaults(func=_cmd_run)

    verify_p = sub.add_parser("verify", help="run the invariant/lemma verification suites")
    verify_p.add_argument("--trials", type=int, default=100)
    verify_p.add_argument("--seed", type=int, default=1)
    verify_p.set_defaults(func=_cmd_verify)

    slopes_p = sub.add_parser("slopes", help="fit per-curve SDoF slopes from a results CSV")
    slopes_p.add_argument("csv", help="CSV file produced by `secmimo run`")
    slopes_p.set_defaults(func=_cmd_slopes)
    return parser


_CONFIG_KEYS = (
    "scenario",
    "nr",
    "snr_min",
    "snr_max",
    "snr_step",
    "trials",
    "seed",
    "rho",
    "epsilon",
    "nf",
    "out",
)


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
    return data


def _cmd_run(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}

    def setting(key, default=None):
        flag = getattr(args, key)
        if flag is not None:
            return flag
        return file_cfg.get(key, default)

    scenario = setting("scenario", "slope")
    n_r_list = setting("nr")
    if isinstance(n_r_list, int):
        n_r_list = [n_r_list]
    epsilon = setting("epsilon")
    nf = setting("nf")
    if scenario == "slope" and nf is not None:
        raise ConfigError("slope scenario scales bits with power; use --epsilon, not --nf")
    if scenario == "saturation" and epsilon is not None:
        raise ConfigError("saturation scenario uses a fixed budget; use --nf, not --epsilon")

    overrides = {}
    for key in ("snr_min", "snr_max", "snr_step", "trials", "seed", "rho"):
        value = setting(key)
        if value is not None:
            overrides[key] = value
    out_path = setting("out")
    if out_path is not None:
        overrides["out_path"] = out_path
    if scenario == "slope":
        overrides["schedule"] = FeedbackSchedule.scaled(epsilon if epsilon is not None else 0.0)
    elif scenario == "saturation":
        overrides["schedule"] = FeedbackSchedule.fixed(nf if nf is not None else 30)
    elif scenario == "custom":
        if nf is not None:
            overrides["schedule"] = FeedbackSchedule.fixed(nf)
        else:
            overrides["schedule"] = FeedbackSchedule.scaled(
                epsilon if epsilon is not None else 0.0
            )

    cfg = scenario_config(scenario, n_r_list, **overrides)
    result = run_experiment(cfg)
    if cfg.out_path:
        write_csv(result, cfg.out_path)
        print(f"wrote {len(result.rows)} rows to {cfg.out_path}")
        for key, fit in sorted(result.slopes.items()):
            n_t, n_r, n_j, n_e = key
            print(
                f"n_t={n_t} n_r={n_r} n_j={n_j} n_e={n_e} "
                f"perfect_slope={fit['perfect']:.3f} quantized_slope={fit['quantized']:.3f}"
            )
    else:
        sys.stdout.write(render_csv(result))
    return 0


def _cmd_verify(args) -> int:
    outcomes = run_verification(trials=args.trials, seed=args.seed)
    all_passed = True
    for suite in outcomes:
        status = "PASS" if suite.passed else "FAIL"
        detail = f" ({suite.detail})" if suite.detail else ""
        print(f"[{status}] {suite.name}: {suite.total - suite.failures}/{suite.total}{detail}")
        all_passed = all_passed and suite.passed
    print(
        f"{sum(s.passed for s in outcomes)}/{len(outcomes)} suites passed"
        if all_passed
        else f"{sum(not s.passed for s in outcomes)} suite(s) FAILED"
    )
    return 0 if all_passed else 2


def _cmd_slopes(args) -> int:
    rows = read_csv(args.csv)
    if not rows:
        raise ConfigError(f"{args.csv} holds no result rows")
    try:
        fits = fitted_slopes_from_rows(rows)
    except InvalidInputError as exc:
        raise ConfigError(f"{args.csv}: {exc}") from exc
    for key, fit in sorted(fits.items()):
        n_t, n_r, n_j, n_e = key
        print(
            f"n_t={n_t} n_r={n_r} n_j={n_j} n_e={n_e} "
            f"perfect_slope={fit['perfect']:.3f} quantized_slope={fit['quantized']:.3f}"
        )
    return 0


def cli_main(argv=None) -> int:
    """Parse arguments and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (SecMimoError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
