"""Command-line scenario runner and golden-vector emitter.

Exit codes: 0 on success (and a matched `expect` block), 1 when the
scenario outcome differs from the config's expectations, 2 for invalid
configs or I/O failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .relay import run_auction
from .scenario import ConfigError, load_config
from .vectors import write_vectors


def cmd_run(config_path: str, seed: int | None, out: str | None) -> int:
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)

    report = run_auction(config)
    payload = report.to_json()

    out_path = out or config.output_path
    if out_path:
        try:
            Path(out_path).parent.mkdir(parents=True, exist_ok=True)
            Path(out_path).write_text(payload)
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return 2
        print(f"report written to {out_path}")
    else:
        print(payload, end="")

    summary = f"scenario={report.scenario} phase={report.final_phase}"
    if report.winner_index is not None:
        summary += f" winner_index={report.winner_index} price={report.price}"
    print(summary)

    if config.expect:
        mismatches = []
        for key in ("final_phase", "winner_index", "price"):
            if key in config.expect and getattr(report, key) != config.expect[key]:
                mismatches.append(f"{key}: expected {config.expect[key]!r}, got {getattr(report, key)!r}")
        if mismatches:
            for line in mismatches:
                print(f"expectation failed: {line}", file=sys.stderr)
            return 1
        print("expectations met")
    return 0


def cmd_vectors(out: str) -> int:
    try:
        written = write_vectors(Path(out))
    except OSError as exc:
        print(f"error: cannot write vectors: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(written)} vector files to {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="trustee-sim",
        description="Run sealed-bid auction scenarios against the simulated protocol stack.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run one auction scenario from a JSON config")
    run_parser.add_argument("--config", required=True, help="path to the scenario config JSON")
    run_parser.add_argument("--seed", type=int, default=None,
                            help="override the config's random seed")
    run_parser.add_argument("--out", default=None,
                            help="report path (overrides the config's output field)")

    vectors_parser = commands.add_parser(
        "vectors", help="regenerate the crypto golden-vector JSON files")
    vectors_parser.add_argument("--out", required=True, help="directory to write vectors into")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.seed, args.out)
    return cmd_vectors(args.out)


if __name__ == "__main__":
    sys.exit(main())
