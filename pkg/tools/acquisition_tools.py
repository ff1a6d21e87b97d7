"""
Acquisition tools
LCB, EI and PI scores (lower is better), the gp_hedge portfolio over them,
and a candidate-sampling minimizer of the acquisition surface
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import norm

from tools.space_tools import ParamSpace, Point, denormalize, sample_unit
from tools.surrogate_tools import ArrayLike, Prediction, Surrogate
from utils.logger import get_logger

logger = get_logger(__name__)

STD_FLOOR = 1e-10


class AcquisitionKind(str, Enum):
    LCB = "LCB"
    EI = "EI"
    PI = "PI"
    GP_HEDGE = "GP_HEDGE"


HEDGE_ARMS: Tuple[AcquisitionKind, ...] = (AcquisitionKind.LCB, AcquisitionKind.EI, AcquisitionKind.PI)


class AcquisitionParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    beta: float = Field(default=1.96, gt=0)
    xi: float = Field(default=0.01, ge=0)
    hedge_eta: float = Field(default=1.0, gt=0)


class SearchConfig(BaseModel):
    """How suggestions are searched for: candidate count, local refinement, lie flavour"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_candidates: int = Field(default=1000, ge=1)
    n_refine: int = Field(default=20, ge=0)
    refine_scale: float = Field(default=0.05, gt=0)
    liar: Literal["min", "mean", "max"] = "min"


def _as_output(value: np.ndarray, *inputs) -> ArrayLike:
    if all(np.ndim(x) == 0 for x in inputs):
        return float(value)
    return value


def lcb(pred: Prediction, params: AcquisitionParams) -> ArrayLike:
    """mu - sqrt(beta) * sigma"""
    mean, std = np.asarray(pred.mean, dtype=float), np.asarray(pred.std, dtype=float)
    return _as_output(mean - np.sqrt(params.beta) * std, pred.mean, pred.std)


def ei(pred: Prediction, f_best: float, params: AcquisitionParams) -> ArrayLike:
    """Negated expected improvement below f_best - xi"""
    mean, std = np.asarray(pred.mean, dtype=float), np.asarray(pred.std, dtype=float)
    improvement = f_best - params.xi - mean
    z = improvement / np.maximum(std, STD_FLOOR)
    smooth = improvement * norm.cdf(z) + std * norm.pdf(z)
    value = np.where(std > 0.0, smooth, np.maximum(improvement, 0.0))
    return _as_output(-value, pred.mean, pred.std)


def pi(pred: Prediction, f_best: float, params: AcquisitionParams) -> ArrayLike:
    """Negated probability of improving on f_best - xi"""
    mean, std = np.asarray(pred.mean, dtype=float), np.asarray(pred.std, dtype=float)
    improvement = f_best - params.xi - mean
    z = improvement / np.maximum(std, STD_FLOOR)
    value = np.where(std > 0.0, norm.cdf(z), (improvement > 0.0).astype(float))
    return _as_output(-value, pred.mean, pred.std)


def score(kind: AcquisitionKind, pred: Prediction, f_best: float, params: AcquisitionParams) -> ArrayLike:
    if kind is AcquisitionKind.LCB:
        return lcb(pred, params)
    if kind is AcquisitionKind.EI:
        return ei(pred, f_best, params)
    if kind is AcquisitionKind.PI:
        return pi(pred, f_best, params)
    raise ValueError(f"{kind.value} must be resolved to one of LCB/EI/PI before scoring")


@dataclass
class HedgeState:
    """Cumulative gains of the LCB/EI/PI arms of gp_hedge"""
    rng: np.random.Generator
    gains: np.ndarray = field(default_factory=lambda: np.zeros(len(HEDGE_ARMS)))


def hedge_probabilities(state: HedgeState, params: AcquisitionParams) -> np.ndarray:
    logits = params.hedge_eta * np.asarray(state.gains, dtype=float)
    weights = np.exp(logits - logits.max())
    return weights / weights.sum()


def hedge_choose(state: HedgeState, params: AcquisitionParams) -> AcquisitionKind:
    """Sample an arm with probability proportional to exp(hedge_eta * gain)"""
    probs = hedge_probabilities(state, params)
    chosen = HEDGE_ARMS[int(state.rng.choice(len(HEDGE_ARMS), p=probs))]
    logger.debug(f"gp_hedge chose {chosen.value} with p={probs.round(4).tolist()}")
    return chosen


def hedge_update(state: HedgeState, chosen: AcquisitionKind, mu_at_point: float) -> HedgeState:
    """Credit the chosen arm with -mu at the point it proposed"""
    if chosen not in HEDGE_ARMS:
        raise ValueError(f"cannot credit {chosen.value}; gp_hedge arms are LCB, EI and PI")
    gains = np.array(state.gains, dtype=float)
    gains[HEDGE_ARMS.index(chosen)] += -mu_at_point
    return HedgeState(rng=state.rng, gains=gains)


def argmin_acquisition_unit(
    model: Surrogate,
    kind: AcquisitionKind,
    params: AcquisitionParams,
    f_best: float,
    dim: int,
    rng: np.random.Generator,
    search: SearchConfig = SearchConfig(),
) -> Tuple[np.ndarray, float]:
    """Minimize the acquisition over the unit cube; returns (unit point, acquisition value)"""
    candidates = sample_unit(search.n_candidates, dim, rng)
    values = np.asarray(score(kind, model.predict_many(candidates), f_best, params))
    best = int(np.argmin(values))
    best_u, best_value = candidates[best], float(values[best])

    for _ in range(search.n_refine):
        proposal = np.clip(best_u + rng.normal(0.0, search.refine_scale, size=dim), 0.0, 1.0)
        value = float(np.asarray(score(kind, model.predict_many(proposal[None, :]), f_best, params))[0])
        if value < best_value:
            best_u, best_value = proposal, value

    return best_u, best_value


def argmin_acquisition(
    model: Surrogate,
    kind: AcquisitionKind,
    params: AcquisitionParams,
    f_best: float,
    space: ParamSpace,
    rng: np.random.Generator,
    search: SearchConfig = SearchConfig(),
) -> Point:
    """Point of the space minimizing the acquisition of the fitted model"""
    unit, _ = argmin_acquisition_unit(model, kind, params, f_best, len(space), rng, search)
    return denormalize(space, unit)
