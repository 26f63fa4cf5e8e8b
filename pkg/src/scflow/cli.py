"""Command line: ``scflow {verify,converge,flow,charts} [--config F] [--band N] [--seed S] [--out DIR]``.

Exit status is 1 when any check fails, 2 on a configuration error, 0 otherwise.
"""

from __future__ import annotations

import argparse
import sys

from .harness import SUITES, ConfigError, load_config, write_outputs


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scflow", description="Scale-calculus checks for the free Schrodinger flow.")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--band", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, help="run checks on this many threads")
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, suite=args.suite, band=args.band, seed=args.seed,
                          output_path=args.out, jobs=args.jobs)
        report = write_outputs(cfg)
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if not args.quiet:
        for r in report.records:
            print(f"{r.status}  {r.name}  value={r.value:.3g}  threshold={r.threshold:.3g}")
        print(f"{len(report.records) - len(report.failed)}/{len(report.records)} passed -> {cfg.output_path}")
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
