"""
Genetic selection of the next round's genomes
Fitness-proportional parents, retention, surrogate/acquisition crossover,
mutation and duplicate replacement
"""

from typing import List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from optimizers.base_optimizer import Genome
from optimizers.reward_ledger import RewardConfig, RewardLedger, selection_weights
from tools.acquisition_tools import AcquisitionKind
from tools.surrogate_tools import SurrogateKind
from utils.exceptions import ConfigError
from utils.logger import get_logger

logger = get_logger(__name__)


class GAConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_parents: int = Field(default=4, ge=2)
    retain_prob: float = Field(default=0.5, ge=0, le=1)
    mutate_prob: float = Field(default=0.1, ge=0, le=1)


def crossover(a: Genome, b: Genome, rng: np.random.Generator) -> Genome:
    """Surrogate and acquisition each inherited from a coin-chosen parent"""
    surrogate_parent = a if rng.random() < 0.5 else b
    acquisition_parent = a if rng.random() < 0.5 else b
    return Genome(surrogate=surrogate_parent.surrogate,
                  acquisition=acquisition_parent.acquisition,
                  params=acquisition_parent.params)


def mutate(genome: Genome, rng: np.random.Generator) -> Genome:
    """Reassign the surrogate or the acquisition to a different random value"""
    if rng.random() < 0.5:
        others = [k for k in SurrogateKind if k is not genome.surrogate]
        return genome.model_copy(update={"surrogate": others[int(rng.integers(len(others)))]})
    others = [k for k in AcquisitionKind if k is not genome.acquisition]
    return genome.model_copy(update={"acquisition": others[int(rng.integers(len(others)))]})


def ga_select(
    ledger: RewardLedger,
    pool: Sequence[Genome],
    ga: GAConfig,
    cfg: RewardConfig,
    rng: np.random.Generator,
) -> List[Genome]:
    """
    Generate the next round's N_s genomes

    Children are produced in generation order; duplicates and genomes outside
    the pool are replaced by random pool genomes not yet in the round, and the
    first N_s children are returned.
    """
    pool = list(pool)
    if ga.n_parents > len(pool):
        raise ConfigError(f"n_parents={ga.n_parents} exceeds the pool size {len(pool)}")
    if cfg.n_suggestions > len(pool):
        raise ConfigError(f"n_suggestions={cfg.n_suggestions} exceeds the pool size {len(pool)}")

    probs = selection_weights(ledger, pool, cfg)
    parent_index = rng.choice(len(pool), size=ga.n_parents, replace=False, p=probs)
    parents = [pool[int(i)] for i in parent_index]

    children: List[Genome] = []
    for _ in range(max(ga.n_parents, cfg.n_suggestions)):
        if rng.random() < ga.retain_prob:
            child = parents[int(rng.integers(len(parents)))]
        else:
            i, j = rng.choice(len(parents), size=2, replace=False)
            child = crossover(parents[int(i)], parents[int(j)], rng)
        if rng.random() < ga.mutate_prob:
            child = mutate(child, rng)
        children.append(child)

    round_genomes: List[Genome] = []
    for child in children:
        if child in pool and child not in round_genomes:
            round_genomes.append(child)
            continue
        fresh = [g for g in pool if g not in round_genomes]
        round_genomes.append(fresh[int(rng.integers(len(fresh)))])

    selected = round_genomes[:cfg.n_suggestions]
    logger.debug(f"GA parents {[p.label for p in parents]} -> {[g.label for g in selected]}")
    return selected
