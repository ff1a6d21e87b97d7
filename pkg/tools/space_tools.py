"""
Search space tools
Bounded integer/real dimensions, unit-cube normalization and random sampling
"""

from enum import Enum
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from utils.exceptions import ValidationError

Number = Union[int, float]
Point = Tuple[Number, ...]


class DimensionKind(str, Enum):
    INTEGER = "integer"
    REAL = "real"


class Dimension(BaseModel):
    """One bounded search dimension, bounds inclusive"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    kind: DimensionKind
    low: float
    high: float

    @field_validator("name")
    @classmethod
    def _identifier(cls, value: str) -> str:
        if not value or not value.strip():
            raise ValueError("dimension name must be a non-empty identifier")
        return value

    @model_validator(mode="after")
    def _check_bounds(self) -> "Dimension":
        if not np.isfinite(self.low) or not np.isfinite(self.high):
            raise ValueError(f"dimension '{self.name}' has non-finite bounds")
        if not self.low < self.high:
            raise ValueError(f"dimension '{self.name}': low must be < high ({self.low} >= {self.high})")
        if self.kind is DimensionKind.INTEGER and (self.low != int(self.low) or self.high != int(self.high)):
            raise ValueError(f"integer dimension '{self.name}' needs integer bounds")
        return self

    @property
    def is_integer(self) -> bool:
        return self.kind is DimensionKind.INTEGER

    @property
    def span(self) -> float:
        return self.high - self.low


class ParamSpace(BaseModel):
    """Ordered, non-empty sequence of uniquely named dimensions"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dims: Tuple[Dimension, ...]

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, dims: Tuple[Dimension, ...]) -> Tuple[Dimension, ...]:
        if len(dims) < 1:
            raise ValueError("a search space needs at least one dimension")
        names = [d.name for d in dims]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate dimension names: {', '.join(duplicates)}")
        return dims

    @property
    def names(self) -> List[str]:
        return [d.name for d in self.dims]

    def __len__(self) -> int:
        return len(self.dims)

    @property
    def lows(self) -> np.ndarray:
        return np.array([d.low for d in self.dims], dtype=float)

    @property
    def spans(self) -> np.ndarray:
        return np.array([d.span for d in self.dims], dtype=float)

    @property
    def integer_mask(self) -> np.ndarray:
        return np.array([d.is_integer for d in self.dims], dtype=bool)

    def as_dict(self, point: Point) -> Dict[str, Number]:
        """Map dimension names to the values of a point"""
        return dict(zip(self.names, point))


def validate_point(space: ParamSpace, point: Sequence[Number]) -> None:
    """Raise ValidationError naming the first dimension the point violates"""
    if len(point) != len(space):
        raise ValidationError(f"point has {len(point)} values, space has {len(space)} dimensions")
    for dim, value in zip(space.dims, point):
        if not np.isfinite(value):
            raise ValidationError(f"dimension '{dim.name}': value {value!r} is not finite")
        if value < dim.low or value > dim.high:
            raise ValidationError(f"dimension '{dim.name}': value {value!r} outside [{dim.low}, {dim.high}]")
        if dim.is_integer and float(value) != int(value):
            raise ValidationError(f"dimension '{dim.name}': value {value!r} is not an integer")


def normalize(space: ParamSpace, point: Sequence[Number]) -> np.ndarray:
    """Map a point affinely onto the unit cube, (v - low) / (high - low) per coordinate"""
    validate_point(space, point)
    values = np.asarray(point, dtype=float)
    return (values - space.lows) / space.spans


def denormalize(space: ParamSpace, unit: Sequence[float]) -> Point:
    """
    Inverse of normalize

    Integer dimensions are rounded to the nearest integer and clamped to their bounds.
    """
    u = np.asarray(unit, dtype=float)
    if u.shape != (len(space),):
        raise ValidationError(f"unit vector has shape {u.shape}, expected ({len(space)},)")
    outside = ~np.isfinite(u) | (u < 0.0) | (u > 1.0)
    if outside.any():
        dim = space.dims[int(np.argmax(outside))]
        raise ValidationError(f"dimension '{dim.name}': unit coordinate outside [0, 1]")

    values: List[Number] = []
    for dim, coord in zip(space.dims, u):
        raw = dim.low + coord * dim.span
        if dim.is_integer:
            values.append(int(min(max(np.floor(raw + 0.5), dim.low), dim.high)))
        else:
            values.append(float(min(max(raw, dim.low), dim.high)))
    return tuple(values)


def sample(space: ParamSpace, rng: np.random.Generator) -> Point:
    """Uniform random point; integer dimensions are uniform over their integer lattice"""
    values: List[Number] = []
    for dim in space.dims:
        if dim.is_integer:
            values.append(int(rng.integers(int(dim.low), int(dim.high), endpoint=True)))
        else:
            values.append(float(rng.uniform(dim.low, dim.high)))
    return tuple(values)


def sample_unit(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n uniform points in the d-dimensional unit cube"""
    return rng.uniform(0.0, 1.0, size=(n, d))

