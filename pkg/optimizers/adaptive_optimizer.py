"""
Adaptive optimizer
Each round picks which base genome(s) propose the next point(s), from the best
adjusted reward every genome has reached so far
"""

from typing import List, Literal, Optional, Sequence

import numpy as np

from optimizers.base_optimizer import (
    BaseOptimizer,
    BestRecord,
    Genome,
    ObjectiveFn,
    best_of,
    constant_liar_round,
    evaluate_points,
    record_round,
    seed_streams,
)
from optimizers.genetic_selection import GAConfig, ga_select
from optimizers.reward_ledger import RewardConfig, RewardLedger, select_many, select_one, update_round
from tools.acquisition_tools import SearchConfig
from tools.space_tools import ParamSpace
from tools.surrogate_tools import SurrogateConfig
from utils.exceptions import ConfigError
from utils.logger import get_logger, log_run_stats

logger = get_logger(__name__)

SelectionMode = Literal["auto", "weighted", "genetic"]

# spawn key of the selection stream; genome streams use 0..15
SELECTION_STREAM = 1000


def selection_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(SELECTION_STREAM,)))


def resolve_selection(mode: SelectionMode, pool_size: int, cfg: RewardConfig, ga: GAConfig) -> str:
    """weighted or genetic; auto uses the GA only when the round has several points and the pool can feed it"""
    if mode == "genetic":
        if cfg.n_suggestions > pool_size or ga.n_parents > pool_size:
            raise ConfigError(f"genetic selection needs a pool of at least "
                              f"max(n_parents, n_suggestions) genomes, got {pool_size}")
        return "genetic"
    if mode == "weighted" or cfg.n_suggestions == 1:
        return "weighted"
    if pool_size >= max(ga.n_parents, cfg.n_suggestions):
        return "genetic"
    return "weighted"


def choose_genomes(
    ledger: RewardLedger,
    pool: Sequence[Genome],
    cfg: RewardConfig,
    ga: GAConfig,
    mode: str,
    rng: np.random.Generator,
) -> List[Genome]:
    """Genomes that propose this round's N_s points, in slot order"""
    if cfg.n_suggestions == 1:
        return [select_one(ledger, pool, cfg, rng)]
    if mode == "genetic":
        return ga_select(ledger, pool, ga, cfg, rng)
    return select_many(ledger, pool, cfg, rng, cfg.n_suggestions)


def run_adaptive(
    objective: ObjectiveFn,
    space: ParamSpace,
    pool: Sequence[Genome],
    cfg: RewardConfig,
    ga: GAConfig = GAConfig(),
    *,
    seed: int,
    selection: SelectionMode = "auto",
    n_init: Optional[int] = None,
    surrogate_config: SurrogateConfig = SurrogateConfig(),
    search: SearchConfig = SearchConfig(),
    max_workers: int = 1,
    run_id: Optional[str] = None,
) -> BestRecord:
    """
    Run the adaptive meta-loop for cfg.n_rounds rounds

    All base optimizers share one history. Initial-design objectives feed the
    ledger statistics without crediting a genome; failed evaluations are kept
    out of the ledger entirely.
    """
    pool = list(dict.fromkeys(pool))
    if not pool:
        raise ConfigError("the genome pool is empty")
    mode = resolve_selection(selection, len(pool), cfg, ga)
    run_id = run_id or f"adaptive-seed{seed}"

    history = []
    optimizers = {}
    for genome in pool:
        rng, hedge_rng = seed_streams(seed, genome)
        optimizers[genome] = BaseOptimizer(genome, space, rng, history=history, hedge_rng=hedge_rng,
                                           n_init=n_init, surrogate_config=surrogate_config, search=search)
    chooser = selection_rng(seed)
    ledger = RewardLedger()
    record = BestRecord(best_point=None, best_objective=float("inf"))
    rewards: List[Optional[float]] = []

    logger.info(f"{run_id}: {mode} selection over {len(pool)} genomes, "
                f"N={cfg.n_rounds}, N_s={cfg.n_suggestions}")

    for n in range(1, cfg.n_rounds + 1):
        chosen = choose_genomes(ledger, pool, cfg, ga, mode, chooser)
        askers = [optimizers[g] for g in chosen]
        points = constant_liar_round(askers, history, search.liar, n_init)
        evaluations = evaluate_points(objective, points, max_workers)
        told = record_round(history, askers, points, evaluations, n, run_id)
        rewards.extend(update_round(ledger, told, n, cfg))

        record.choices.append([g.label for g in chosen])
        record.wall_times.extend(e.wall_time for e in evaluations)

    record.trials = list(history)
    record.rewards = rewards
    record.best_point, record.best_objective = best_of(record.trials)

    counts = {g.label: c for g, c in sorted(ledger.per_genome_count.items(), key=lambda kv: -kv[1])}
    log_run_stats(run_id, {"best": f"{record.best_objective:.6g}", "evaluations": len(record.trials),
                           "choices": counts})
    return record
