"""Command-line entry point.

    python -m src.cli run configs/classic_two_agents.json
    python -m src.cli ingest data/sample_comments.csv --out hist.csv
    python -m src.cli compare hist_a.csv hist_b.csv

Exit codes: 0 success, 2 config error, 3 divergence, 4 I/O error.
"""

import argparse
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional

import pandas as pd
from dotenv import load_dotenv
from pydantic import ValidationError

from src.analysis import OpinionHistogram, histogram_distance, histogram_to_frame, read_histogram_csv
from src.config import format_validation_error, load_config
from src.errors import ConfigurationError, DivergenceError, FormatError, InputDomainError
from src.experiment import run_experiment
from src.sentiment_ingest import (
    coarse_view,
    component_histograms,
    empirical_distribution,
    parse_records,
    read_grid_histogram_csv,
    write_grid_histogram_csv,
)

load_dotenv()
LOG_DIR = os.getenv("OPINION_SIM_LOG_DIR", "logs")
DEFAULT_WORKERS = os.getenv("OPINION_SIM_WORKERS", "1")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


def configure_logging(log_dir: str = LOG_DIR) -> None:
    os.makedirs(log_dir, exist_ok=True)
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s | %(levelname)s | %(message)s",
        handlers=[
            RotatingFileHandler(
                os.path.join(log_dir, "opinion_sim.log"),
                maxBytes=10 * 1024 * 1024,  # 10MB per file
                backupCount=5,
            )
        ],
    )


def get_error_message(exc: Exception) -> str:
    """User-facing message for a failed command."""
    if isinstance(exc, DivergenceError):
        return f"❌ Simulation diverged: {exc}. Reduce dt or the magnitude of distrust weights."
    if isinstance(exc, ValidationError):
        return "❌ Invalid configuration:\n" + "\n".join(format_validation_error(exc))
    if isinstance(exc, ConfigurationError):
        return f"❌ Invalid configuration:\n{exc}"
    if isinstance(exc, FileNotFoundError):
        return f"❌ File not found: {exc.filename}"
    if isinstance(exc, (FormatError, InputDomainError)):
        return f"❌ Unusable input data: {exc}"
    if isinstance(exc, OSError):
        return f"❌ I/O error: {exc}"
    return f"❌ Unexpected error ({type(exc).__name__}): {exc}"


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, DivergenceError):
        return EXIT_DIVERGENCE
    if isinstance(exc, (ConfigurationError, ValidationError)):
        return EXIT_CONFIG
    if isinstance(exc, (OSError, FormatError, InputDomainError)):
        return EXIT_IO
    return 1


def default_workers(raw: str) -> int:
    """Thread count from OPINION_SIM_WORKERS, used when a config sets no run.workers."""
    try:
        workers = int(raw)
    except ValueError:
        workers = 0
    if workers < 1:
        raise ConfigurationError(f"OPINION_SIM_WORKERS must be a positive integer, got {raw!r}")
    return workers


def cmd_run(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    config = load_config(config_path)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})

    report = run_experiment(
        config,
        base_dir=config_path.parent,
        default_workers=default_workers(DEFAULT_WORKERS),
    )
    if not args.quiet:
        print(report.render())
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    with open(args.comments, encoding="utf-8", newline="") as fh:
        parsed = parse_records(fh, renormalize=args.renormalize)
    hist = empirical_distribution(parsed.records)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_grid_histogram_csv(hist, out)

    if args.components:
        frames = []
        for name, comp in component_histograms(parsed.records, args.component_bins).items():
            frame = histogram_to_frame(comp)
            frame.insert(0, "component", name)
            frames.append(frame)
        pd.concat(frames, ignore_index=True).to_csv(args.components, index=False, lineterminator="\n")

    if not args.quiet:
        coarse = coarse_view(hist)
        print(f"Records:  {len(parsed.records)} accepted, {len(parsed.diagnostics)} rejected")
        for diag in parsed.diagnostics:
            print(f"  line {diag.line}: {diag.reason}")
        print(f"Coarse:   negative={coarse.negative} neutral={coarse.neutral} positive={coarse.positive}")
        print(f"Wrote:    {out}")
    return EXIT_OK


def _read_any_histogram(path: str) -> OpinionHistogram:
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path} is not UTF-8: {exc.reason}") from exc
    if header.startswith("grid_score"):
        return read_grid_histogram_csv(path)
    return read_histogram_csv(path)


def cmd_compare(args: argparse.Namespace) -> int:
    distance = histogram_distance(_read_any_histogram(args.hist_a), _read_any_histogram(args.hist_b))
    if not args.quiet:
        print(f"l1={distance.l1!r}")
        print(f"emd={distance.emd!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="Override the config's global seed (unsigned 64-bit)")
    common.add_argument("--quiet", action="store_true", help="Suppress the printed summary")

    parser = argparse.ArgumentParser(
        description="Opinion dynamics with trust and suspicion: simulate, ingest sentiment, compare."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", parents=[common], help="Run an experiment from a JSON config")
    run_p.add_argument("config", help="Path to the experiment config (.json)")
    run_p.set_defaults(func=cmd_run)

    ingest_p = sub.add_parser("ingest", parents=[common], help="Build a grid histogram from a sentiment CSV")
    ingest_p.add_argument("comments", help="CSV with header comment_id,neg,neu,pos")
    ingest_p.add_argument("--out", required=True, help="Output histogram CSV")
    ingest_p.add_argument(
        "--renormalize", action="store_true", help="Divide each triplet by its sum instead of rejecting it"
    )
    ingest_p.add_argument("--components", help="Optional CSV of per-component [0,1] histograms")
    ingest_p.add_argument("--component-bins", type=int, default=10, help="Bins per component histogram")
    ingest_p.set_defaults(func=cmd_ingest)

    compare_p = sub.add_parser("compare", parents=[common], help="Distances between two histogram CSVs")
    compare_p.add_argument("hist_a")
    compare_p.add_argument("hist_b")
    compare_p.set_defaults(func=cmd_compare)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("❌ --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG

    configure_logging(LOG_DIR)
    logging.info(f"[CLI] {args.command} started")
    try:
        return args.func(args)
    except Exception as exc:
        logging.error(f"[CLI] {args.command} failed: {type(exc).__name__}: {exc}", exc_info=True)
        print(get_error_message(exc), file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
