#!/usr/bin/env python3
"""
Adaptive optimizer benchmark harness

Runs the adaptive optimizer and its base Bayesian optimizers over repeated
seeds, writes the summary and trial log, and replays logs to verify summaries.
"""

import sys
from pathlib import Path
from typing import List, Optional

import click
import pydantic
from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.append(str(project_root))

from harness.experiment_runner import SummaryRow, run_experiment
from harness.reporting import emit_outputs, replay
from utils.config import load_config
from utils.exceptions import ConfigError, ObjectiveError
from utils.logger import setup_logger

EXIT_MISMATCH = 1
EXIT_CONFIG = 2

console = Console()


def print_summary(title: str, rows: List[SummaryRow]):
    """Render summary rows as a table"""
    table = Table(title=title)
    for column in ("optimizer", "mean", "std", "max", "min", "median"):
        table.add_column(column, justify="left" if column == "optimizer" else "right")
    for row in rows:
        table.add_row(row.optimizer, *(f"{getattr(row, c):.6g}" for c in ("mean", "std", "max", "min", "median")))
    console.print(table)


def parse_seeds(value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        seeds = [int(s) for s in value.split(",") if s.strip()]
    except ValueError:
        raise click.BadParameter("seeds must be comma-separated integers") from None
    if not seeds:
        raise click.BadParameter("at least one seed is required")
    return seeds


@click.group()
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (default: $LOG_LEVEL or INFO)")
@click.pass_context
def cli(ctx, log_level):
    """Adaptive optimizer experiments"""
    load_dotenv()
    ctx.obj = setup_logger(log_level=log_level)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False), help="Run config (YAML)")
@click.option("--seeds", default=None, help="Comma-separated seeds overriding the config")
@click.option("--only", type=click.Choice(["adaptive", "base", "all"]), default=None,
              help="Run only the adaptive optimizer, only the base genomes, or both")
@click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False), help="Output directory")
@click.option("--jobs", "n_jobs", type=int, default=None, help="Concurrent seed x optimizer runs (-1: every core)")
@click.pass_obj
def run(logger, config_path, seeds, only, out_dir, n_jobs):
    """Run an experiment and write its outputs"""
    try:
        config = load_config(config_path)
        updates = {}
        if (parsed := parse_seeds(seeds)) is not None:
            updates["seeds"] = parsed
        if only is not None:
            updates["compare"] = only
        if n_jobs is not None:
            updates["n_jobs"] = n_jobs
        if updates:
            config = config.model_validate({**config.model_dump(), **updates})

        result = run_experiment(config)
        paths = emit_outputs(result, config, out_dir)
    except (ConfigError, ObjectiveError, OSError, pydantic.ValidationError) as e:
        logger.error(f"Experiment aborted: {e}")
        sys.exit(EXIT_CONFIG)

    print_summary(f"{config.name} ({len(config.seeds)} seeds)", result.summary)
    console.print(f"Outputs written to [bold]{paths.directory}[/bold]")


@cli.command(name="replay")
@click.option("--log", "log_path", required=True, type=click.Path(dir_okay=False), help="Trial log (JSONL)")
@click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False),
              help="Resolved config, default: config.yaml next to the log")
@click.option("--summary", "summary_path", default=None, type=click.Path(dir_okay=False),
              help="Emitted summary (.json or .csv), default: summary.json next to the log")
@click.pass_obj
def replay_command(logger, log_path, config_path, summary_path):
    """Recompute the summary from a trial log and verify it"""
    try:
        report = replay(log_path, config_path, summary_path)
    except (ConfigError, OSError, ValueError) as e:
        logger.error(f"Replay failed: {e}")
        sys.exit(EXIT_CONFIG)

    print_summary("recomputed from log", report.recomputed)
    if not report.matches:
        logger.error("Recomputed summary differs from the emitted summary")
        sys.exit(EXIT_MISMATCH)
    console.print("Summary verified: recomputed values match exactly")


if __name__ == "__main__":
    cli()
