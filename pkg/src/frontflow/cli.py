"""Command-line entry point.

    frontflow run <config> [--outdir D] [--scenario NAME] [--print-config] [--threads K]

Exit codes: 0 when every scenario metric passes, 1 when some metric fails
(outputs are still written), 2 on configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import config as cfgmod
from . import experiments

log = logging.getLogger("frontflow")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frontflow", description="Threshold-dynamics front propagation experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the scenario described by a config file")
    run.add_argument("config", help="path to the experiment config")
    run.add_argument("--outdir", help="output directory (default: output.dir from the config)")
    run.add_argument("--scenario", help="override scenario.name")
    run.add_argument("--print-config", action="store_true", help="print the canonical config and exit")
    run.add_argument("--threads", type=int, help="FFT and sweep workers (default: $FRONTFLOW_THREADS or 1)")
    run.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 2
        os.environ["FRONTFLOW_THREADS"] = str(args.threads)
    try:
        cfg = cfgmod.parse_config(args.config)
        if args.scenario:
            cfg = cfgmod.with_scenario(cfg, args.scenario)
        if args.print_config:
            sys.stdout.write(cfgmod.format_config(cfg))
            return 0
        outdir = args.outdir or cfg.get("output", "dir")
        code, result = experiments.run_scenario(cfg.scenario, cfg, outdir)
    except (cfgmod.ConfigError, experiments.ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for m in result.metrics:
        thr = "" if m.threshold is None else f" (threshold {m.threshold:g})"
        print(f"{'PASS' if m.passed else 'FAIL'} {m.name} = {m.value:.6g}{thr}")
    return code


if __name__ == "__main__":
    sys.exit(main())
