"""
Adjusted rewards and weight-proportional optimizer selection

The ledger keeps every objective in larger-is-better sign and the best adjusted
reward each genome has ever attained; selection probabilities are built from
those bests.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from optimizers.base_optimizer import Genome, SuggestionSource, Trial, TrialStatus

DEGENERATE_STD = 1e-12


class RewardConstants(BaseModel):
    """Reward constants as written in run configs"""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    epsilon: float = Field(default=0.01, gt=0)
    c: float = Field(default=1.96, ge=0)
    b: float = Field(default=0.1, ge=0)
    std_ddof: Literal[0, 1] = 0
    penalty: Literal["linear", "sqrt", "log"] = "linear"


class RewardConfig(RewardConstants):
    """Reward constants bound to a run budget of n_rounds rounds of n_suggestions points"""

    n_rounds: int = Field(default=100, ge=1)
    n_suggestions: int = Field(default=1, ge=1)

    @property
    def alpha(self) -> float:
        return self.c / self.n_rounds


def round_penalty(n: int, cfg: RewardConfig) -> float:
    """Nondecreasing penalty in the round index; every shape reaches c at n = N"""
    if cfg.penalty == "sqrt":
        return cfg.c * np.sqrt(n / cfg.n_rounds)
    if cfg.penalty == "log":
        return cfg.c * np.log1p(n) / np.log1p(cfg.n_rounds)
    return cfg.alpha * n


@dataclass
class RewardLedger:
    all_objectives: List[float] = field(default_factory=list)
    per_genome_best: Dict[Genome, float] = field(default_factory=dict)
    per_genome_count: Dict[Genome, int] = field(default_factory=dict)
    last_reward: Optional[float] = None

    def observe(self, value: float) -> None:
        """Add one larger-is-better objective to the statistics"""
        if not np.isfinite(value):
            raise ValueError(f"ledger objective {value!r} is not finite")
        self.all_objectives.append(float(value))

    def credit(self, genome: Genome, reward: float) -> None:
        """Keep only the historical maximum per genome"""
        self.per_genome_best[genome] = max(self.per_genome_best.get(genome, reward), reward)
        self.per_genome_count[genome] = self.per_genome_count.get(genome, 0) + 1


def ledger_value(trial: Trial) -> float:
    """Minimization-sign objective to larger-is-better ledger value"""
    return -trial.objective


def _zscore(value: float, history: Sequence[float], ddof: int) -> float:
    values = np.asarray(history, dtype=float)
    if values.size < 2:
        return 0.0
    std = values.std(ddof=ddof)
    if std < DEGENERATE_STD:
        return 0.0
    return float((value - values.mean()) / std)


def adjusted_reward(f_new: float, ledger: RewardLedger, n: int, cfg: RewardConfig) -> float:
    """max(eps, (f_new - mean) / std - penalty(n)) over the ledger's objectives"""
    z = _zscore(f_new, ledger.all_objectives, cfg.std_ddof)
    return max(cfg.epsilon, z - round_penalty(n, cfg))


def adjusted_fitness_parallel(f_j: float, ledger: RewardLedger, n: int, cfg: RewardConfig) -> float:
    """Parallel-round fitness: the adjusted reward over all n * N_s observations, less b"""
    z = _zscore(f_j, ledger.all_objectives, cfg.std_ddof)
    return max(cfg.epsilon, z - round_penalty(n, cfg) - cfg.b)


def trial_reward(value: float, ledger: RewardLedger, n: int, cfg: RewardConfig) -> float:
    if cfg.n_suggestions > 1:
        return adjusted_fitness_parallel(value, ledger, n, cfg)
    return adjusted_reward(value, ledger, n, cfg)


def update_ledger(ledger: RewardLedger, trial: Trial, n: int, cfg: RewardConfig,
                  *, observed: bool = False) -> RewardLedger:
    """
    Record a told trial and credit its genome with the resulting reward

    Pass observed=True when the trial's objective is already in the statistics.
    Failed trials leave the ledger untouched.
    """
    ledger.last_reward = None
    if trial.status is not TrialStatus.COMPLETE:
        return ledger
    value = ledger_value(trial)
    if not observed:
        ledger.observe(value)
    ledger.last_reward = trial_reward(value, ledger, n, cfg)
    ledger.credit(trial.genome, ledger.last_reward)
    return ledger


def update_round(ledger: RewardLedger, told: Sequence[Trial], n: int, cfg: RewardConfig) -> List[Optional[float]]:
    """
    Ledger one round's told trials, returning their rewards in order

    Every completed objective of the round enters the statistics before any
    reward is computed. Initial-design trials are observed but credit no genome;
    they and failed trials get no reward.
    """
    for trial in told:
        if trial.status is TrialStatus.COMPLETE:
            ledger.observe(ledger_value(trial))

    rewards: List[Optional[float]] = []
    for trial in told:
        if trial.source is SuggestionSource.INITIAL:
            rewards.append(None)
            continue
        rewards.append(update_ledger(ledger, trial, n, cfg, observed=True).last_reward)
    return rewards


def selection_weights(ledger: RewardLedger, pool: Sequence[Genome], cfg: RewardConfig) -> np.ndarray:
    """
    Selection probabilities over the pool

    A genome's weight is its best reward; unscored genomes get the mean of the
    attained bests (epsilon when nothing is scored). Weights are floored at
    epsilon before normalizing.
    """
    if not pool:
        raise ValueError("selection pool is empty")
    attained = list(ledger.per_genome_best.values())
    fill = float(np.mean(attained)) if attained else cfg.epsilon
    weights = np.array([ledger.per_genome_best.get(g, fill) for g in pool], dtype=float)
    weights = np.maximum(weights, cfg.epsilon)
    return weights / weights.sum()


def select_one(ledger: RewardLedger, pool: Sequence[Genome], cfg: RewardConfig,
               rng: np.random.Generator) -> Genome:
    probs = selection_weights(ledger, pool, cfg)
    return pool[int(rng.choice(len(pool), p=probs))]


def select_many(ledger: RewardLedger, pool: Sequence[Genome], cfg: RewardConfig,
                rng: np.random.Generator, k: int) -> List[Genome]:
    """k weight-proportional picks, distinct whenever the pool is large enough"""
    probs = selection_weights(ledger, pool, cfg)
    picks = rng.choice(len(pool), size=k, replace=k > len(pool), p=probs)
    return [pool[int(i)] for i in picks]
