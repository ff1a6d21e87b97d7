"""
Surrogate model tools
Probabilistic regressors over the unit cube: Gaussian process, random forest,
extra trees and quantile gradient boosting, each returning a mean and a std
"""

import warnings
from enum import Enum
from typing import NamedTuple, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from sklearn.ensemble import ExtraTreesRegressor, GradientBoostingRegressor, RandomForestRegressor
from sklearn.exceptions import ConvergenceWarning
from sklearn.gaussian_process import GaussianProcessRegressor
from sklearn.gaussian_process.kernels import ConstantKernel, Matern

from utils.exceptions import SurrogateFitError, ValidationError
from utils.logger import get_logger

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]


class SurrogateKind(str, Enum):
    GP = "GP"
    RF = "RF"
    ET = "ET"
    GBRT = "GBRT"


class Prediction(NamedTuple):
    """Predictive mean and standard deviation, scalars or aligned arrays"""
    mean: ArrayLike
    std: ArrayLike


class SurrogateConfig(BaseModel):
    """Surrogate hyperparameters, settable from the run config"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    gp_restarts: int = Field(default=8, ge=0)
    gp_noise: float = Field(default=1e-6, gt=0)
    gp_length_scale_bounds: Tuple[float, float] = (1e-2, 1e2)
    gp_amplitude_bounds: Tuple[float, float] = (1e-3, 1e3)
    n_trees: int = Field(default=100, ge=1)
    rf_max_features: Union[float, str] = "sqrt"
    min_tree_std: float = Field(default=0.0, ge=0)
    gbrt_stages: int = Field(default=100, ge=1)
    gbrt_learning_rate: float = Field(default=0.1, gt=0)
    gbrt_depth: int = Field(default=3, ge=1)
    gbrt_quantiles: Tuple[float, float, float] = (0.16, 0.5, 0.84)

    @model_validator(mode="after")
    def _check_quantiles(self) -> "SurrogateConfig":
        lo, mid, hi = self.gbrt_quantiles
        if not 0.0 < lo < mid < hi < 1.0:
            raise ValueError("gbrt_quantiles must be strictly increasing inside (0, 1)")
        for low, high in (self.gp_length_scale_bounds, self.gp_amplitude_bounds):
            if not 0.0 < low < high:
                raise ValueError("GP hyperparameter bounds must satisfy 0 < low < high")
        return self


class Dataset(NamedTuple):
    inputs: np.ndarray
    targets: np.ndarray


def make_dataset(inputs: Sequence[Sequence[float]], targets: Sequence[float]) -> Dataset:
    """Validate and pack training data; inputs must lie in the unit cube"""
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float).ravel()
    if y.size == 0:
        raise ValidationError("surrogate dataset is empty")
    if X.shape[0] != y.size:
        raise ValidationError(f"{X.shape[0]} inputs but {y.size} targets")
    if not np.all(np.isfinite(y)):
        raise ValidationError("surrogate targets must be finite")
    _check_unit_cube(X)
    return Dataset(X, y)


def _check_unit_cube(X: np.ndarray) -> None:
    if not np.all(np.isfinite(X)) or np.any(X < 0.0) or np.any(X > 1.0):
        raise ValidationError("surrogate inputs must lie in the unit cube")


def ensemble_moments(per_member: np.ndarray, min_std: float = 0.0) -> Prediction:
    """
    Mean and population std across ensemble members

    Args:
        per_member: Array of shape (n_members, n_points)
        min_std: Floor applied to the std
    """
    per_member = np.asarray(per_member, dtype=float)
    mean = per_member.mean(axis=0)
    std = np.maximum(per_member.std(axis=0), min_std)
    return Prediction(mean, std)


class Surrogate:
    """Fitted surrogate; immutable once built"""

    kind: SurrogateKind

    def _predict_arrays(self, X: np.ndarray) -> Prediction:
        raise NotImplementedError

    def predict_many(self, X: np.ndarray) -> Prediction:
        """Vectorized prediction over rows of X (unit cube)"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        _check_unit_cube(X)
        mean, std = self._predict_arrays(X)
        mean = np.asarray(mean, dtype=float)
        std = np.maximum(np.asarray(std, dtype=float), 0.0)
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(std))):
            raise SurrogateFitError(f"{self.kind.value} surrogate produced non-finite predictions")
        return Prediction(mean, std)

    def predict(self, x: Sequence[float]) -> Prediction:
        """Prediction at a single unit-cube point"""
        mean, std = self.predict_many(np.asarray(x, dtype=float).reshape(1, -1))
        return Prediction(float(mean[0]), float(std[0]))


class GaussianProcessSurrogate(Surrogate):
    kind = SurrogateKind.GP

    def __init__(self, regressor: GaussianProcessRegressor):
        self.regressor = regressor

    def _predict_arrays(self, X: np.ndarray) -> Prediction:
        mean, std = self.regressor.predict(X, return_std=True)
        return Prediction(mean, std)


class ForestSurrogate(Surrogate):
    def __init__(self, kind: SurrogateKind, forest, min_std: float):
        self.kind = kind
        self.forest = forest
        self.min_std = min_std

    def _predict_arrays(self, X: np.ndarray) -> Prediction:
        per_tree = np.stack([tree.predict(X) for tree in self.forest.estimators_])
        return ensemble_moments(per_tree, self.min_std)


class QuantileBoostingSurrogate(Surrogate):
    kind = SurrogateKind.GBRT

    def __init__(self, lower, median, upper):
        self.models = (lower, median, upper)

    def quantiles(self, X: np.ndarray) -> np.ndarray:
        """Predicted (q_low, q_mid, q_high) per row, sorted so the triple is monotone"""
        raw = np.stack([m.predict(X) for m in self.models])
        return np.sort(raw, axis=0)

    def _predict_arrays(self, X: np.ndarray) -> Prediction:
        lo, mid, hi = self.quantiles(X)
        return Prediction(mid, np.maximum((hi - lo) / 2.0, 0.0))


def _fit_gp(data: Dataset, seed: int, hyper: SurrogateConfig) -> GaussianProcessSurrogate:
    d = data.inputs.shape[1]
    kernel = ConstantKernel(1.0, hyper.gp_amplitude_bounds) * Matern(
        length_scale=np.ones(d), length_scale_bounds=hyper.gp_length_scale_bounds, nu=2.5
    )
    regressor = GaussianProcessRegressor(
        kernel=kernel,
        alpha=hyper.gp_noise,
        normalize_y=True,
        n_restarts_optimizer=hyper.gp_restarts,
        random_state=seed,
    )
    regressor.fit(data.inputs, data.targets)
    return GaussianProcessSurrogate(regressor)


def _fit_forest(kind: SurrogateKind, data: Dataset, seed: int, hyper: SurrogateConfig) -> ForestSurrogate:
    if kind is SurrogateKind.RF:
        forest = RandomForestRegressor(
            n_estimators=hyper.n_trees,
            max_features=hyper.rf_max_features,
            min_samples_leaf=1,
            bootstrap=True,
            random_state=seed,
        )
    else:
        forest = ExtraTreesRegressor(
            n_estimators=hyper.n_trees,
            min_samples_leaf=1,
            bootstrap=False,
            random_state=seed,
        )
    forest.fit(data.inputs, data.targets)
    return ForestSurrogate(kind, forest, hyper.min_tree_std)


def _fit_gbrt(data: Dataset, seed: int, hyper: SurrogateConfig) -> QuantileBoostingSurrogate:
    models = []
    for q in hyper.gbrt_quantiles:
        model = GradientBoostingRegressor(
            loss="quantile",
            alpha=q,
            n_estimators=hyper.gbrt_stages,
            learning_rate=hyper.gbrt_learning_rate,
            max_depth=hyper.gbrt_depth,
            random_state=seed,
        )
        model.fit(data.inputs, data.targets)
        models.append(model)
    return QuantileBoostingSurrogate(*models)


def fit(kind: SurrogateKind, data: Dataset, rng: np.random.Generator,
        hyper: SurrogateConfig = SurrogateConfig()) -> Surrogate:
    """
    Fit a surrogate of the given kind

    Deterministic given the data, the rng state and the hyperparameters.
    Raises ValidationError on invalid data and SurrogateFitError when the
    underlying estimator fails.
    """
    data = make_dataset(data.inputs, data.targets)
    seed = int(rng.integers(0, 2**31 - 1))
    kind = SurrogateKind(kind)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            if kind is SurrogateKind.GP:
                model = _fit_gp(data, seed, hyper)
            elif kind is SurrogateKind.GBRT:
                model = _fit_gbrt(data, seed, hyper)
            else:
                model = _fit_forest(kind, data, seed, hyper)
    except (ValueError, np.linalg.LinAlgError) as e:
        raise SurrogateFitError(f"{kind.value} fit failed on {len(data.targets)} points: {e}") from e

    logger.debug(f"Fitted {kind.value} surrogate on {len(data.targets)} points")
    return model
