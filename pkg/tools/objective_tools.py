"""
Objective tools
Builtin synthetic benchmarks, the external-command protocol and the single
score/objective sign conversion used by the harness
"""

import json
import math
import shlex
import shutil
import subprocess
from typing import Callable, Dict, List, Sequence, Union

import numpy as np

from tools.space_tools import Dimension, DimensionKind, ParamSpace, Point, normalize
from utils.exceptions import ConfigError, ObjectiveError
from utils.logger import get_logger

logger = get_logger(__name__)

Command = Union[str, Sequence[str]]


def to_minimization(score: float, maximize: bool) -> float:
    """Raw score to the minimization-sign objective the optimizers work with"""
    return -score if maximize else score


def from_minimization(objective: float, maximize: bool) -> float:
    return -objective if maximize else objective


def _real(name: str, low: float, high: float) -> Dimension:
    return Dimension(name=name, kind=DimensionKind.REAL, low=low, high=high)


def _integer(name: str, low: int, high: int) -> Dimension:
    return Dimension(name=name, kind=DimensionKind.INTEGER, low=low, high=high)


def _sphere(x: np.ndarray) -> float:
    return float(np.sum(x ** 2))


def _branin(x: np.ndarray) -> float:
    x1, x2 = x[0], x[1]
    a, b, c = 1.0, 5.1 / (4 * np.pi ** 2), 5 / np.pi
    r, s, t = 6.0, 10.0, 1 / (8 * np.pi)
    return float(a * (x2 - b * x1 ** 2 + c * x1 - r) ** 2 + s * (1 - t) * np.cos(x1) + s)


HARTMANN6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
HARTMANN6_A = np.array([[10.00, 3.00, 17.00, 3.50, 1.70, 8.00],
                        [0.05, 10.00, 17.00, 0.10, 8.00, 14.00],
                        [3.00, 3.50, 1.70, 10.00, 17.00, 8.00],
                        [17.00, 8.00, 0.05, 10.00, 0.10, 14.00]])
HARTMANN6_P = 1e-4 * np.array([[1312, 1696, 5569, 124, 8283, 5886],
                               [2329, 4135, 8307, 3736, 1004, 9991],
                               [2348, 1451, 3522, 2883, 3047, 6650],
                               [4047, 8828, 8732, 5743, 1091, 381]])


def _hartmann6(x: np.ndarray) -> float:
    inner = np.sum(HARTMANN6_A * (x[None, :] - HARTMANN6_P) ** 2, axis=1)
    return float(-np.sum(HARTMANN6_ALPHA * np.exp(-inner)))


# lightgbm-shaped space: three integer and two real dimensions
MIXED_INT_SPACE = ParamSpace(dims=(
    _integer("num_leaves", 4, 100),
    _integer("min_child_samples", 1, 100),
    _integer("n_estimators", 1, 100),
    _real("subsample", 0.1, 1.0),
    _real("colsample_bytree", 0.1, 1.0),
))
MIXED_INT_TARGET: Point = (31, 20, 60, 0.8, 0.6)
_MIXED_INT_TARGET_UNIT = normalize(MIXED_INT_SPACE, MIXED_INT_TARGET)


def _mixed_int_demo(x: np.ndarray) -> float:
    return float(np.sum((normalize(MIXED_INT_SPACE, tuple(x)) - _MIXED_INT_TARGET_UNIT) ** 2))


BUILTIN_FUNCTIONS: Dict[str, Callable[[np.ndarray], float]] = {
    "sphere": _sphere,
    "branin": _branin,
    "hartmann6": _hartmann6,
    "mixed_int_demo": _mixed_int_demo,
}

BUILTIN_SPACES: Dict[str, ParamSpace] = {
    "sphere": ParamSpace(dims=tuple(_real(f"x{i}", -5.12, 5.12) for i in range(3))),
    "branin": ParamSpace(dims=(_real("x1", -5.0, 10.0), _real("x2", 0.0, 15.0))),
    "hartmann6": ParamSpace(dims=tuple(_real(f"x{i}", 0.0, 1.0) for i in range(6))),
    "mixed_int_demo": MIXED_INT_SPACE,
}


def builtin_objective(name: str, point: Sequence[float]) -> float:
    """Value of a builtin test function at a point"""
    try:
        function = BUILTIN_FUNCTIONS[name]
    except KeyError:
        raise ConfigError(f"unknown builtin objective '{name}'; "
                          f"choose from {', '.join(sorted(BUILTIN_FUNCTIONS))}") from None
    return function(np.asarray(point, dtype=float))


def builtin_space(name: str) -> ParamSpace:
    if name not in BUILTIN_SPACES:
        raise ConfigError(f"unknown builtin objective '{name}'")
    return BUILTIN_SPACES[name]


def _argv(command: Command) -> List[str]:
    return shlex.split(command) if isinstance(command, str) else list(command)


def check_command(command: Command) -> None:
    """Raise ConfigError when the command's executable cannot be found"""
    argv = _argv(command)
    if not argv:
        raise ConfigError("external objective command is empty")
    if shutil.which(argv[0]) is None:
        raise ConfigError(f"external objective executable not found: {argv[0]}")


def encode_request(space: ParamSpace, point: Point) -> str:
    """One JSON line mapping dimension names to values; integer dimensions carry JSON integers"""
    payload = {}
    for dim, value in zip(space.dims, point):
        payload[dim.name] = int(value) if dim.is_integer else float(value)
    return json.dumps(payload)


def decode_reply(stdout: str) -> float:
    lines = [line for line in stdout.splitlines() if line.strip()]
    if not lines:
        raise ObjectiveError("external objective produced no output")
    try:
        reply = json.loads(lines[0])
        value = float(reply["objective"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ObjectiveError(f"malformed reply {lines[0][:200]!r}: {e}") from e
    if not math.isfinite(value):
        raise ObjectiveError(f"external objective returned {value!r}")
    return value


def external_objective(command: Command, point: Point, space: ParamSpace, timeout: float = 600.0) -> float:
    """
    Evaluate a point with an external command

    The command receives one JSON line on stdin and must print
    ``{"objective": <number>}`` as its first stdout line.
    """
    request = encode_request(space, point)
    try:
        completed = subprocess.run(
            _argv(command),
            input=request + "\n",
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired as e:
        raise ObjectiveError(f"external objective timed out after {timeout}s") from e
    except OSError as e:
        raise ObjectiveError(f"could not start external objective: {e}") from e

    if completed.returncode != 0:
        stderr = completed.stderr.strip()[-500:]
        raise ObjectiveError(f"external objective exited with {completed.returncode}: {stderr}")
    return decode_reply(completed.stdout)
