"""
Base Bayesian optimizer
One (surrogate, acquisition) genome with an ask/tell lifecycle, an initial
random design and constant-liar batches, plus the plain single-genome run loop
"""

import time
from collections import defaultdict, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from tools.acquisition_tools import (
    HEDGE_ARMS,
    AcquisitionKind,
    AcquisitionParams,
    HedgeState,
    SearchConfig,
    argmin_acquisition,
    hedge_choose,
    hedge_update,
)
from tools.space_tools import ParamSpace, Point, normalize, sample, validate_point
from tools.surrogate_tools import Dataset, Surrogate, SurrogateConfig, SurrogateKind, fit
from utils.exceptions import SurrogateFitError, ValidationError
from utils.logger import get_logger, log_round

logger = get_logger(__name__)

ObjectiveFn = Callable[[Point], float]


class Genome(BaseModel):
    """Identity of a base optimizer: surrogate kind, acquisition kind and its parameters"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    surrogate: SurrogateKind
    acquisition: AcquisitionKind
    params: AcquisitionParams = AcquisitionParams()

    @property
    def label(self) -> str:
        return f"{self.surrogate.value}-{self.acquisition.value}"

    @classmethod
    def from_label(cls, label: str, params: AcquisitionParams = AcquisitionParams()) -> "Genome":
        surrogate, _, acquisition = label.partition("-")
        return cls(surrogate=SurrogateKind(surrogate.upper()),
                   acquisition=AcquisitionKind(acquisition.upper()),
                   params=params)

    def __str__(self) -> str:
        return self.label


def genome_universe(params: AcquisitionParams = AcquisitionParams()) -> Tuple[Genome, ...]:
    """All 16 surrogate x acquisition genomes, surrogate-major"""
    return tuple(Genome(surrogate=s, acquisition=a, params=params)
                 for s in SurrogateKind for a in AcquisitionKind)


def universe_index(genome: Genome) -> int:
    surrogates, acquisitions = list(SurrogateKind), list(AcquisitionKind)
    return surrogates.index(genome.surrogate) * len(acquisitions) + acquisitions.index(genome.acquisition)


class TrialStatus(str, Enum):
    COMPLETE = "complete"
    FAILED = "failed"
    LIE = "lie"


class SuggestionSource(str, Enum):
    INITIAL = "initial"
    MODEL = "model"
    FALLBACK = "fallback"


class Trial(BaseModel):
    """One evaluated point; objective uses the minimization sign"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    point: Tuple[float | int, ...]
    objective: float
    iteration: int = Field(ge=1)
    genome: Genome
    slot: int = Field(default=0, ge=0)
    status: TrialStatus = TrialStatus.COMPLETE
    source: SuggestionSource = SuggestionSource.MODEL


def default_n_init(space: ParamSpace) -> int:
    return max(10, 2 * len(space))


def real_trials(history: Sequence[Trial]) -> List[Trial]:
    return [t for t in history if t.status is not TrialStatus.LIE]


def liar_value(history: Sequence[Trial], flavour: str = "min") -> float:
    """Fake objective told for pending points: min/mean/max of completed objectives, 0 when none"""
    values = [t.objective for t in history if t.status is TrialStatus.COMPLETE]
    if not values:
        return 0.0
    if flavour == "mean":
        return float(np.mean(values))
    if flavour == "max":
        return float(max(values))
    return float(min(values))


def failure_value(history: Sequence[Trial]) -> float:
    """Objective assigned to failed evaluations: worst completed objective, 0 when none"""
    values = [t.objective for t in history if t.status is TrialStatus.COMPLETE]
    return float(max(values)) if values else 0.0


def seed_streams(seed: int, genome: Genome) -> Tuple[np.random.Generator, np.random.Generator]:
    """Independent (optimizer, hedge) generators for a genome under a run seed"""
    root = np.random.SeedSequence(seed, spawn_key=(universe_index(genome),))
    opt_seq, hedge_seq = root.spawn(2)
    return np.random.default_rng(opt_seq), np.random.default_rng(hedge_seq)


@dataclass
class _Pending:
    source: SuggestionSource
    kind: Optional[AcquisitionKind] = None
    model: Optional[Surrogate] = None


class BaseOptimizer:
    """
    Bayesian optimizer for one genome

    The history list may be shared between several optimizers; every one of
    them fits on the full list. ``tell`` appends to it and must be serialized
    by the caller.
    """

    def __init__(
        self,
        genome: Genome,
        space: ParamSpace,
        rng: np.random.Generator,
        *,
        history: Optional[List[Trial]] = None,
        hedge_rng: Optional[np.random.Generator] = None,
        n_init: Optional[int] = None,
        surrogate_config: SurrogateConfig = SurrogateConfig(),
        search: SearchConfig = SearchConfig(),
    ):
        self.genome = genome
        self.space = space
        self.rng = rng
        self.history: List[Trial] = history if history is not None else []
        self.n_init = n_init if n_init is not None else default_n_init(space)
        self.surrogate_config = surrogate_config
        self.search = search
        self.hedge: Optional[HedgeState] = None
        if genome.acquisition is AcquisitionKind.GP_HEDGE:
            self.hedge = HedgeState(rng=hedge_rng if hedge_rng is not None else rng)
        # one FIFO per point: a batch may suggest the same point twice
        self._pending: Dict[Point, Deque[_Pending]] = defaultdict(deque)

    def ask(self, n_init: Optional[int] = None, history: Optional[Sequence[Trial]] = None) -> Point:
        """
        Suggest the next point

        Args:
            n_init: Size of the random initial design, defaults to the optimizer's
            history: Records to fit on instead of the real history (constant liar scratch copy)
        """
        n_init = self.n_init if n_init is None else n_init
        records = self.history if history is None else history

        if len(real_trials(records)) < n_init:
            point = sample(self.space, self.rng)
            self._pending[point].append(_Pending(SuggestionSource.INITIAL))
            return point

        X = np.array([normalize(self.space, t.point) for t in records])
        y = np.array([t.objective for t in records])
        kind = self.genome.acquisition
        try:
            model = fit(self.genome.surrogate, Dataset(X, y), self.rng, self.surrogate_config)
            if kind is AcquisitionKind.GP_HEDGE:
                kind = hedge_choose(self.hedge, self.genome.params)
            point = argmin_acquisition(model, kind, self.genome.params, float(y.min()),
                                       self.space, self.rng, self.search)
        except (SurrogateFitError, ValidationError) as e:
            logger.warning(f"{self.genome.label}: surrogate unusable, using a random point ({e})")
            point = sample(self.space, self.rng)
            self._pending[point].append(_Pending(SuggestionSource.FALLBACK))
            return point

        self._pending[point].append(_Pending(SuggestionSource.MODEL, kind, model))
        return point

    def ask_batch(self, n_points: int, n_init: Optional[int] = None) -> List[Point]:
        """Suggest n_points using the constant liar; the real history is left untouched"""
        if n_points < 1:
            raise ValueError("n_points must be >= 1")
        return constant_liar_round([self] * n_points, self.history, self.search.liar, n_init)

    def source_of(self, point: Point) -> SuggestionSource:
        queue = self._pending.get(tuple(point))
        return queue[0].source if queue else SuggestionSource.MODEL

    def _pop_pending(self, point: Point) -> Optional[_Pending]:
        queue = self._pending.get(point)
        if not queue:
            return None
        pending = queue.popleft()
        if not queue:
            del self._pending[point]
        return pending

    def tell(self, trial: Trial) -> None:
        """Append a trial to the history and credit gp_hedge when this genome uses it"""
        if not np.isfinite(trial.objective):
            raise ValidationError(f"objective {trial.objective!r} is not finite")
        if trial.status is TrialStatus.LIE:
            raise ValidationError("fake trials never enter the real history")
        validate_point(self.space, trial.point)

        self.history.append(trial)
        pending = self._pop_pending(tuple(trial.point))
        if self.hedge is not None and pending is not None and pending.kind in HEDGE_ARMS:
            mu = pending.model.predict(normalize(self.space, trial.point)).mean
            self.hedge = hedge_update(self.hedge, pending.kind, mu)


def constant_liar_round(
    askers: Sequence[BaseOptimizer],
    history: Sequence[Trial],
    flavour: str = "min",
    n_init: Optional[int] = None,
) -> List[Point]:
    """
    One point per asker, in order, each asked on a scratch history that holds a
    fake trial for every point already suggested this round
    """
    lie = liar_value(history, flavour)
    iteration = max((t.iteration for t in history), default=0) + 1
    scratch = list(history)
    points: List[Point] = []
    for slot, optimizer in enumerate(askers):
        point = optimizer.ask(n_init=n_init, history=scratch)
        points.append(point)
        scratch.append(Trial(point=point, objective=lie, iteration=iteration, genome=optimizer.genome,
                             slot=slot, status=TrialStatus.LIE))
    return points


@dataclass
class Evaluation:
    objective: Optional[float]
    wall_time: float
    error: Optional[str] = None


def _evaluate_one(objective: ObjectiveFn, point: Point) -> Evaluation:
    start = time.perf_counter()
    try:
        value = float(objective(point))
        if not np.isfinite(value):
            raise ValueError(f"objective returned {value!r}")
        return Evaluation(value, time.perf_counter() - start)
    except Exception as e:
        return Evaluation(None, time.perf_counter() - start, f"{type(e).__name__}: {e}")


def evaluate_points(objective: ObjectiveFn, points: Sequence[Point], max_workers: int = 1) -> List[Evaluation]:
    """Evaluate a round's points, concurrently when allowed; results come back in point order"""
    if max_workers <= 1 or len(points) <= 1:
        return [_evaluate_one(objective, p) for p in points]
    with ThreadPoolExecutor(max_workers=min(max_workers, len(points))) as pool:
        return list(pool.map(lambda p: _evaluate_one(objective, p), points))


@dataclass
class BestRecord:
    """Outcome of one optimization run"""
    best_point: Optional[Point]
    best_objective: float
    trials: List[Trial] = field(default_factory=list)
    rewards: List[Optional[float]] = field(default_factory=list)
    wall_times: List[float] = field(default_factory=list)
    choices: List[List[str]] = field(default_factory=list)


def best_of(trials: Sequence[Trial]) -> Tuple[Optional[Point], float]:
    completed = [t for t in trials if t.status is TrialStatus.COMPLETE]
    if not completed:
        return None, float("inf")
    best = min(completed, key=lambda t: t.objective)
    return best.point, best.objective


def record_round(
    history: List[Trial],
    askers: Sequence[BaseOptimizer],
    points: Sequence[Point],
    evaluations: Sequence[Evaluation],
    iteration: int,
    run_id: str,
) -> List[Trial]:
    """Tell a round's results to their proposers in point order"""
    told: List[Trial] = []
    for slot, (optimizer, point, evaluation) in enumerate(zip(askers, points, evaluations)):
        source = optimizer.source_of(point)
        if evaluation.objective is None:
            logger.warning(f"{run_id}: evaluation failed at round {iteration} slot {slot}: {evaluation.error}")
            trial = Trial(point=point, objective=failure_value(history), iteration=iteration,
                          genome=optimizer.genome, slot=slot, status=TrialStatus.FAILED, source=source)
        else:
            trial = Trial(point=point, objective=evaluation.objective, iteration=iteration,
                          genome=optimizer.genome, slot=slot, source=source)
        optimizer.tell(trial)
        told.append(trial)

    statuses = {t.status for t in told} | {t.source for t in told}
    status = ("failed" if TrialStatus.FAILED in statuses
              else "fallback" if SuggestionSource.FALLBACK in statuses else "ok")
    log_round(run_id, iteration, [o.genome.label for o in askers], best_of(history)[1], status)
    return told


def run_base(
    objective: ObjectiveFn,
    space: ParamSpace,
    genome: Genome,
    *,
    n_rounds: int,
    seed: int,
    n_suggestions: int = 1,
    n_init: Optional[int] = None,
    surrogate_config: SurrogateConfig = SurrogateConfig(),
    search: SearchConfig = SearchConfig(),
    max_workers: int = 1,
) -> BestRecord:
    """Optimize with a single genome for n_rounds rounds of n_suggestions points"""
    rng, hedge_rng = seed_streams(seed, genome)
    optimizer = BaseOptimizer(genome, space, rng, hedge_rng=hedge_rng, n_init=n_init,
                              surrogate_config=surrogate_config, search=search)
    run_id = f"{genome.label}-seed{seed}"
    record = BestRecord(best_point=None, best_objective=float("inf"))

    for n in range(1, n_rounds + 1):
        points = optimizer.ask_batch(n_suggestions)
        evaluations = evaluate_points(objective, points, max_workers)
        record_round(optimizer.history, [optimizer] * n_suggestions, points, evaluations, n, run_id)
        record.choices.append([genome.label] * n_suggestions)
        record.wall_times.extend(e.wall_time for e in evaluations)

    record.trials = list(optimizer.history)
    record.rewards = [None] * len(record.trials)
    record.best_point, record.best_objective = best_of(record.trials)
    return record
