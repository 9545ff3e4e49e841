"""Command-line experiment runner.

Each subcommand reads a JSON experiment config, runs the corresponding sweep
and writes a CSV or JSON result table.  A ``--seed`` flag is mandatory so no
run is silently nondeterministic; flags override config-file fields.

Exit codes: 0 success, 2 config validation error, 3 runtime/numerical flag
(e.g. an unbracketed SNR-gain target), 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (
    ConfigError,
    ExperimentConfig,
    NotBracketedError,
    curve_points,
    emit_results,
    run_experiment,
    run_outage_curve,
    snr_gain,
)

_COMMANDS = {
    "outage-curve": "outage_curve",
    "b-vs-snr": "b_vs_snr",
    "gmi-hist": "gmi_histogram",
    "b-sweep": "b_sweep",
    "asymptotic-scan": "asymptotic_scan",
}

# below ~10 expected failures an estimate is too noisy to trust
_UNRELIABLE_P = 1e-4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsrsim",
        description="Monte Carlo outage experiments for shrinkage receivers "
        "on SIMO block-fading channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run a {_COMMANDS[name]} experiment")
        p.add_argument("--config", required=True, help="JSON experiment config file")
        p.add_argument("--seed", required=True, type=int, help="master 64-bit seed")
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--trials", type=int, default=None, help="override config trials")
        p.add_argument("--workers", type=int, default=1, help="worker threads")
        if name == "outage-curve":
            p.add_argument(
                "--gain-target",
                type=float,
                default=None,
                help="report the LSR-over-LMMSE SNR gain at this outage level",
            )
            p.add_argument(
                "--lmmse-only",
                action="store_true",
                help="skip the shrinkage optimizer; emit only LMMSE columns",
            )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 4
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    if not isinstance(data, dict):
        print("error: config must be a JSON object", file=sys.stderr)
        return 2

    kind = _COMMANDS[args.command]
    if "kind" in data and data["kind"] != kind:
        print(
            f"error: kind: config says {data['kind']!r} but command is {kind!r}",
            file=sys.stderr,
        )
        return 2
    data["kind"] = kind
    data["seed"] = args.seed
    if args.trials is not None:
        data["trials"] = args.trials

    try:
        cfg = ExperimentConfig.from_dict(data)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if kind == "outage_curve":
        table = run_outage_curve(
            cfg, include_lsr=not args.lmmse_only, workers=args.workers
        )
    else:
        table = run_experiment(cfg, workers=args.workers)

    for row in table.rows:
        for col in ("p_lmmse", "p_lsr", "p_hat"):
            if 0 < row.get(col, 1.0) < _UNRELIABLE_P:
                print(
                    f"warning: {col}={row[col]:.3g} at snr_db={row['snr_db']} is "
                    f"below {_UNRELIABLE_P}; increase --trials for a reliable tail",
                    file=sys.stderr,
                )

    status = 0
    if kind == "outage_curve" and args.gain_target is not None and not args.lmmse_only:
        try:
            gain = snr_gain(
                curve_points(table, "p_lmmse"),
                curve_points(table, "p_lsr"),
                args.gain_target,
            )
            print(f"snr_gain_db={gain:.6g} at target outage {args.gain_target:g}")
        except NotBracketedError as exc:
            print(f"error: snr gain not bracketed: {exc}", file=sys.stderr)
            status = 3

    try:
        emit_results(table, args.out, args.format)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 4
    return status


if __name__ == "__main__":
    sys.exit(main())
