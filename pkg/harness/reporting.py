"""
Experiment outputs
Summary table (CSV + JSON), line-delimited trial log, resolved config, and
replay of a log into a summary
"""

import csv
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

from harness.experiment_runner import ExperimentResult, SummaryRow, TrialLogRecord, summarize
from utils.config import RunConfig, dump_config, load_config
from utils.exceptions import ConfigError
from utils.logger import get_logger

logger = get_logger(__name__)

SUMMARY_COLUMNS = ["optimizer", "mean", "std", "max", "min", "median"]
SUMMARY_CSV = "summary.csv"
SUMMARY_JSON = "summary.json"
TRIAL_LOG = "trials.jsonl"
RESOLVED_CONFIG = "config.yaml"


@dataclass
class OutputPaths:
    directory: Path
    summary_csv: Path
    summary_json: Path
    trial_log: Path
    config: Path


def emit_outputs(result: ExperimentResult, config: RunConfig, out_dir: Union[str, Path, None] = None) -> OutputPaths:
    """Write summary, trial log and resolved config under <out_dir>/<config name>/"""
    base = Path(out_dir) if out_dir is not None else Path(config.output.directory)
    directory = base / config.name
    paths = OutputPaths(
        directory=directory,
        summary_csv=directory / SUMMARY_CSV,
        summary_json=directory / SUMMARY_JSON,
        trial_log=directory / TRIAL_LOG,
        config=directory / RESOLVED_CONFIG,
    )
    try:
        directory.mkdir(parents=True, exist_ok=True)

        with open(paths.summary_csv, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(SUMMARY_COLUMNS)
            for row in result.summary:
                writer.writerow([getattr(row, column) for column in SUMMARY_COLUMNS])

        with open(paths.summary_json, 'w', encoding='utf-8') as f:
            json.dump({
                'name': config.name,
                'maximize': config.maximize,
                'rows': [row.model_dump() for row in result.summary],
            }, f, indent=2)
            f.write('\n')

        with open(paths.trial_log, 'w', encoding='utf-8') as f:
            for record in result.log:
                f.write(record.model_dump_json() + '\n')

        paths.config.write_text(dump_config(config), encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"cannot write outputs to {directory}: {e}") from e

    logger.info(f"Wrote {len(result.log)} trial records and {len(result.summary)} summary rows to {directory}")
    return paths


def read_log(path: Union[str, Path]) -> List[TrialLogRecord]:
    with open(path, encoding='utf-8') as f:
        return [TrialLogRecord.model_validate_json(line) for line in f if line.strip()]


def read_summary_csv(path: Union[str, Path]) -> List[SummaryRow]:
    with open(path, encoding='utf-8', newline='') as f:
        return [SummaryRow(optimizer=r['optimizer'], **{k: float(r[k]) for k in SUMMARY_COLUMNS[1:]})
                for r in csv.DictReader(f)]


def read_summary_json(path: Union[str, Path]) -> List[SummaryRow]:
    with open(path, encoding='utf-8') as f:
        return [SummaryRow(**row) for row in json.load(f)['rows']]


def best_scores_from_log(records: List[TrialLogRecord], maximize: bool) -> Dict[str, List[float]]:
    """Per optimizer, the best raw score of each seed in log order"""
    per_run: Dict[tuple, float] = {}
    for record in records:
        if record.status != "complete" or record.raw_score is None:
            continue
        key = (record.optimizer, record.seed)
        current = per_run.get(key)
        better = max if maximize else min
        per_run[key] = record.raw_score if current is None else better(current, record.raw_score)

    scores: Dict[str, List[float]] = defaultdict(list)
    for (optimizer, _seed), value in per_run.items():
        scores[optimizer].append(value)
    return dict(scores)


def summary_from_log(records: List[TrialLogRecord], maximize: bool) -> List[SummaryRow]:
    return summarize(best_scores_from_log(records, maximize))


@dataclass
class ReplayReport:
    recomputed: List[SummaryRow]
    emitted: List[SummaryRow]

    @property
    def matches(self) -> bool:
        return self.recomputed == self.emitted


def replay(log_path: Union[str, Path], config_path: Optional[Union[str, Path]] = None,
           summary_path: Optional[Union[str, Path]] = None) -> ReplayReport:
    """Recompute the summary from a trial log and load the emitted one next to it"""
    log_path = Path(log_path)
    config = load_config(config_path or log_path.parent / RESOLVED_CONFIG, check_objective=False)
    records = read_log(log_path)
    summary_path = Path(summary_path or log_path.parent / SUMMARY_JSON)
    read_summary = read_summary_csv if summary_path.suffix == ".csv" else read_summary_json
    emitted = read_summary(summary_path)
    return ReplayReport(recomputed=summary_from_log(records, config.maximize), emitted=emitted)
