"""Command-line entry points.

    conformal-ts run --config experiment.json [--seed N] [--threshold local|global]
                     [--alpha F] [--out DIR]
    conformal-ts fetch --dataset NAME [--manifest PATH] [--cache DIR]
    conformal-ts plot --results results.json --out DIR
    conformal-ts adapters check --endpoint ENDPOINT
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .bridge import AdapterClient
from .conformal import ThresholdMode
from .datasets import fetch_dataset
from .domain import MiscoverageRate
from .errors import ConformalTsError
from .harness import emit_report, load_config, run_experiment
from .report import parse_results_json


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.alpha is not None:
        config = dataclasses.replace(config, alpha=MiscoverageRate(args.alpha))
    if args.threshold is not None:
        config = dataclasses.replace(config, threshold_mode=ThresholdMode(args.threshold))
    if args.out is not None:
        config = dataclasses.replace(config, output_dir=args.out)
    if args.seed is not None:
        scenarios = tuple(
            dataclasses.replace(sc, seed=args.seed) for sc in config.scenarios
        )
        config = dataclasses.replace(config, scenarios=scenarios)

    rows = run_experiment(config)
    written = emit_report(rows, config.output_dir, alpha=config.alpha.alpha)
    for row in rows:
        print(
            f"{row.dataset} {row.horizon_label} {row.estimator}: "
            f"MASE={row.mase:.3f} MCR={100 * row.mcr:.1f} IW={row.iw:.4g} "
            f"MSIW={row.msiw:.3f} units={row.n_units} failures={row.failures}"
        )
    print(f"wrote {len(written)} file(s) to {config.output_dir}")
    return 0


def _cmd_fetch(args) -> int:
    path = fetch_dataset(args.dataset, cache=args.cache, manifest_path=args.manifest)
    print(path)
    return 0


def _cmd_plot(args) -> int:
    with open(args.results, encoding="utf-8") as fh:
        rows, alpha = parse_results_json(fh.read())
    written = emit_report(rows, args.out, formats=("md", "svg"), alpha=alpha)
    for path in written:
        print(path)
    return 0


def _cmd_adapters_check(args) -> int:
    with AdapterClient(args.endpoint, timeout_ms=args.timeout_ms) as client:
        info = client.handshake()
    print(
        f"ok: {info.name} (protocol v{info.protocol_version}, "
        f"max_context={info.max_context}, freqs={','.join(info.supported_frequencies)})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conformal-ts",
        description="Split conformal prediction benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--threshold", choices=["local", "global"], default=None)
    run.add_argument("--alpha", type=float, default=None)
    run.add_argument("--out", default=None)
    run.set_defaults(func=_cmd_run)

    fetch = sub.add_parser("fetch", help="download and cache a dataset")
    fetch.add_argument("--dataset", required=True)
    fetch.add_argument("--manifest", default=None)
    fetch.add_argument("--cache", default=None)
    fetch.set_defaults(func=_cmd_fetch)

    plot = sub.add_parser("plot", help="re-render report files from results.json")
    plot.add_argument("--results", required=True)
    plot.add_argument("--out", required=True)
    plot.set_defaults(func=_cmd_plot)

    adapters = sub.add_parser("adapters", help="adapter utilities")
    adapters_sub = adapters.add_subparsers(dest="adapters_command", required=True)
    check = adapters_sub.add_parser("check", help="handshake with an adapter endpoint")
    check.add_argument("--endpoint", required=True)
    check.add_argument("--timeout-ms", type=int, default=10_000)
    check.set_defaults(func=_cmd_adapters_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConformalTsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
