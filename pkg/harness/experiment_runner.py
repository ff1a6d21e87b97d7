"""
Experiment runner
Repeats the adaptive optimizer and every base genome over a list of seeds and
collects per-seed best scores and the full trial log
"""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict

from optimizers.adaptive_optimizer import run_adaptive
from optimizers.base_optimizer import BestRecord, Genome, ObjectiveFn, run_base
from tools.objective_tools import builtin_objective, external_objective, from_minimization, to_minimization
from tools.space_tools import ParamSpace
from utils.config import RunConfig
from utils.exceptions import ObjectiveError
from utils.logger import get_logger, log_execution_time, log_run_stats

logger = get_logger(__name__)

ADAPTIVE_LABEL = "adaptive"


class TrialLogRecord(BaseModel):
    """One evaluation, as written to the trial log"""

    model_config = ConfigDict(extra="forbid")

    run_id: str
    seed: int
    optimizer: str
    round: int
    slot: int
    genome: str
    params: Dict[str, float | int]
    raw_score: Optional[float]
    objective: float
    adjusted_reward: Optional[float]
    status: str
    source: str
    wall_time: Optional[float] = None


class SummaryRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    optimizer: str
    mean: float
    std: float
    max: float
    min: float
    median: float


@dataclass
class ExperimentResult:
    summary: List[SummaryRow]
    log: List[TrialLogRecord]
    best_scores: Dict[str, List[float]] = field(default_factory=dict)


def make_objective(config: RunConfig, space: ParamSpace) -> ObjectiveFn:
    """The configured binding as a minimization-sign objective"""
    binding = config.objective
    if binding.builtin is not None:
        def raw(point):
            return builtin_objective(binding.builtin, point)
    else:
        def raw(point):
            return external_objective(binding.command, point, space, binding.timeout)

    def objective(point):
        return to_minimization(raw(point), config.maximize)

    return objective


def summarize(best_scores: Dict[str, List[float]]) -> List[SummaryRow]:
    """One row per optimizer, mean descending; std is the sample std across seeds"""
    rows = []
    for label, scores in best_scores.items():
        values = np.asarray(scores, dtype=float)
        rows.append(SummaryRow(
            optimizer=label,
            mean=float(np.mean(values)),
            std=float(np.std(values, ddof=1)) if values.size > 1 else 0.0,
            max=float(np.max(values)),
            min=float(np.min(values)),
            median=float(np.median(values)),
        ))
    return sorted(rows, key=lambda r: (-r.mean, r.optimizer))


def trial_records(record: BestRecord, label: str, seed: int, space: ParamSpace,
                  maximize: bool, log_wall_time: bool) -> List[TrialLogRecord]:
    run_id = f"{label}-seed{seed}"
    rows = []
    for trial, reward, wall_time in zip(record.trials, record.rewards, record.wall_times):
        completed = trial.status.value == "complete"
        rows.append(TrialLogRecord(
            run_id=run_id,
            seed=seed,
            optimizer=label,
            round=trial.iteration,
            slot=trial.slot,
            genome=trial.genome.label,
            params=space.as_dict(trial.point),
            raw_score=from_minimization(trial.objective, maximize) if completed else None,
            objective=trial.objective,
            adjusted_reward=reward,
            status=trial.status.value,
            source=trial.source.value,
            wall_time=wall_time if log_wall_time else None,
        ))
    return rows


def _best_score(record: BestRecord, run_id: str, maximize: bool) -> float:
    if record.best_point is None:
        raise ObjectiveError(f"{run_id}: no evaluation succeeded; check the objective binding")
    return from_minimization(record.best_objective, maximize)


@dataclass(frozen=True)
class RunSpec:
    """One seed of one optimizer; genome is None for the adaptive optimizer"""
    label: str
    seed: int
    genome: Optional[Genome] = None


def plan_runs(config: RunConfig) -> List[RunSpec]:
    """Every run of the experiment, seed-major, adaptive before the base genomes"""
    runs = []
    for seed in config.seeds:
        if config.compare in ("all", "adaptive"):
            runs.append(RunSpec(ADAPTIVE_LABEL, seed))
        if config.compare in ("all", "base"):
            runs.extend(RunSpec(genome.label, seed, genome) for genome in config.genomes())
    return runs


def execute_run(config: RunConfig, run: RunSpec) -> BestRecord:
    """Run one seed of one optimizer; runs share no state, so they may execute in any process"""
    space = config.param_space()
    objective = make_objective(config, space)
    common = dict(n_init=config.resolved_n_init(), surrogate_config=config.surrogate, search=config.search,
                  max_workers=config.workers())
    if run.genome is None:
        return run_adaptive(objective, space, config.genomes(), config.reward_config(), config.genetic,
                            seed=run.seed, selection=config.selection, run_id=f"{run.label}-seed{run.seed}",
                            **common)
    return run_base(objective, space, run.genome, n_rounds=config.n_rounds, seed=run.seed,
                    n_suggestions=config.n_suggestions, **common)


@log_execution_time
def run_experiment(config: RunConfig) -> ExperimentResult:
    """Run every configured optimizer on every seed, n_jobs runs at a time"""
    space = config.param_space()
    runs = plan_runs(config)
    logger.info(f"Experiment '{config.name}': {len(config.seeds)} seeds, pool of {len(config.genomes())}, "
                f"N={config.n_rounds}, N_s={config.n_suggestions}, n_init={config.resolved_n_init()}, "
                f"{len(runs)} runs on n_jobs={config.n_jobs}")

    records = Parallel(n_jobs=config.n_jobs)(delayed(execute_run)(config, run) for run in runs)

    best_scores: Dict[str, List[float]] = defaultdict(list)
    log: List[TrialLogRecord] = []
    for run, record in zip(runs, records):
        run_id = f"{run.label}-seed{run.seed}"
        best = _best_score(record, run_id, config.maximize)
        best_scores[run.label].append(best)
        log.extend(trial_records(record, run.label, run.seed, space, config.maximize, config.output.log_wall_time))
        log_run_stats(run_id, {"best_score": f"{best:.6g}", "evaluations": len(record.trials)})

    summary = summarize(best_scores)
    return ExperimentResult(summary=summary, log=log, best_scores=dict(best_scores))
