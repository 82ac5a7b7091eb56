"""Command line entry point: ``hvqsim <experiment> --config <path> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from pathlib import Path

from . import __version__
from .config import EXPERIMENTS, build_config
from .errors import ConfigError, HvqsimError
from .experiments import run_experiment
from .report import dumps, write_csv

log = logging.getLogger("hvqsim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hvqsim",
        description="Run seeded hidden-variable vs quantum experiments and write report.json plus CSV tables.",
    )
    p.add_argument("--version", action="version", version=f"hvqsim {__version__}")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", type=Path, help="TOML (or .json) experiment config")
    p.add_argument("--seed", type=int, help="overrides the config seed (fallback: $HVQSIM_SEED)")
    p.add_argument("--trials", type=int)
    p.add_argument("--out", type=Path, dest="output_dir", help="output directory")
    p.add_argument("--model", choices=("quantum", "hv", "hidden-variable", "both"))
    p.add_argument("--parallel", type=int, help="worker threads for Monte Carlo chunks")
    p.add_argument("--dump-waveforms", action="store_true", default=None,
                   help="write per-stage waveforms of one trial to waveforms.csv")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _error_record(out_dir: Path | None, kind: str, exc: BaseException) -> None:
    record = {"status": "error", "kind": kind, "type": type(exc).__name__, "message": str(exc)}
    text = json.dumps(record, sort_keys=True)
    print(text, file=sys.stderr)
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "error.json").write_text(text + "\n")
        except OSError:
            pass


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out_dir = args.output_dir
    try:
        cfg = build_config(
            args.experiment, args.config,
            seed=args.seed, trials=args.trials, output_dir=args.output_dir,
            model=args.model, parallel=args.parallel, dump_waveforms=args.dump_waveforms,
        )
        out_dir = cfg.output_dir
        log.info("running %s (seed %d, %d trials) into %s", cfg.experiment, cfg.seed, cfg.trials, out_dir)
        result = run_experiment(cfg)
    except (ConfigError, HvqsimError, ValueError) as exc:
        kind = "config" if isinstance(exc, (ConfigError, ValueError)) else "runtime"
        _error_record(out_dir, kind, exc)
        return EXIT_CONFIG if kind == "config" else EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - report anything as a machine-readable record
        log.debug("%s", traceback.format_exc())
        _error_record(out_dir, "runtime", exc)
        return EXIT_RUNTIME

    out_dir.mkdir(parents=True, exist_ok=True)
    stale = out_dir / "error.json"
    if stale.exists():
        stale.unlink()
    report = dict(result.report)
    report["files"] = sorted(["report.json", *result.tables])
    (out_dir / "report.json").write_text(dumps(report))
    for name, (header, rows) in result.tables.items():
        write_csv(out_dir / name, header, rows)
    for w in report.get("warnings", []):
        log.warning("%s", w)
    print(out_dir / "report.json")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
