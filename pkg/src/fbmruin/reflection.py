"""Drifted input, gamma-reflection and first-passage extraction on grid paths.

All array routines work along the last axis, so the same code serves a single
path and a (replications, n_steps+1) block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, NonZeroStart
from .fbm import FbmPath, GridSpec, validate_hurst

__all__ = [
    "ModelParams",
    "ReflectedPath",
    "RuinOutcome",
    "drift_input",
    "reflect",
    "reflected_path",
    "ruin_outcome",
    "first_crossing",
]


@dataclass(frozen=True)
class ModelParams:
    """Hurst index H, drift c > 0 and reflection level gamma in [0, 1]."""

    hurst: float
    drift: float
    gamma: float = 0.0

    def __post_init__(self):
        validate_hurst(self.hurst)
        if not (self.drift > 0 and np.isfinite(self.drift)):
            raise ConfigError("drift", f"drift c must be positive, got {self.drift!r}")
        if not (0.0 <= self.gamma <= 1.0):
            raise ConfigError("gamma", f"gamma must lie in [0, 1], got {self.gamma!r}")

    def with_gamma(self, gamma: float) -> "ModelParams":
        return ModelParams(self.hurst, self.drift, gamma)


def drift_input(path: FbmPath, c: float) -> np.ndarray:
    """Y(t_k) = X(t_k) - c t_k."""
    if not c > 0:
        raise ConfigError("drift", f"drift c must be positive, got {c!r}")
    return path.values - c * path.grid.times


def reflect(y_values, gamma: float):
    """Return ``(w, running_inf)`` with w = y - gamma * min_{j<=k} y_j."""
    y = np.asarray(y_values, dtype=float)
    start = y[..., 0]
    if np.any(start != 0.0):
        raise NonZeroStart(start if np.ndim(start) == 0 else start[start != 0.0][0])
    running_inf = np.minimum.accumulate(y, axis=-1)
    w = y - gamma * running_inf
    return w, running_inf


@dataclass(frozen=True, eq=False)
class ReflectedPath:
    grid: GridSpec
    params: ModelParams
    w_values: np.ndarray
    running_inf: np.ndarray


def reflected_path(path: FbmPath, params: ModelParams) -> ReflectedPath:
    w, inf = reflect(drift_input(path, params.drift), params.gamma)
    return ReflectedPath(path.grid, params, w, inf)


@dataclass(frozen=True)
class RuinOutcome:
    ruined: bool
    ruin_index: Optional[int] = None
    ruin_time: Optional[float] = None
    max_loss: Optional[float] = None


def first_crossing(w, u: float, horizon_index: int):
    """Vectorised first index with w > u among 0..horizon_index.

    Returns ``(index, sup)``; index is -1 where no crossing happened.
    """
    w = np.asarray(w, dtype=float)[..., : horizon_index + 1]
    above = w > u
    idx = np.argmax(above, axis=-1)
    hit = np.take_along_axis(above, np.expand_dims(idx, -1), axis=-1)[..., 0]
    return np.where(hit, idx, -1), w.max(axis=-1)


def ruin_outcome(w, u: float, horizon_index: Optional[int] = None, grid: Optional[GridSpec] = None) -> RuinOutcome:
    """First-crossing summary of one reflected path restricted to indices <= horizon_index."""
    if isinstance(w, ReflectedPath):
        grid = w.grid
        w = w.w_values
    w = np.asarray(w, dtype=float)
    if horizon_index is None:
        horizon_index = w.size - 1
    if not 0 <= horizon_index < w.size:
        raise ConfigError("horizon_index", f"must lie in [0, {w.size - 1}], got {horizon_index}")
    idx, sup = first_crossing(w, u, horizon_index)
    if idx < 0:
        return RuinOutcome(False)
    idx = int(idx)
    t = idx * grid.step if grid is not None else None
    return RuinOutcome(True, idx, t, float(sup - u))
