"""Exact samplers for fractional Gaussian noise and fractional Brownian motion.

Two routes are provided:

* circulant embedding (Davies-Harte), O(n log n) per path, the production sampler;
* dense Cholesky factorisation of the fBm covariance, O(n^3) setup, kept as an
  independent oracle on small grids.

Everything is sampled on a unit step and rescaled by ``step**H`` (self-similarity).

Randomness is organised as one stream per replication, keyed by
``(master_seed, replication_index)`` through Philox, so a batch of replications
gives the same numbers regardless of how it is split across workers.
"""

from __future__ import annotations

import csv
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, GridTooLarge, LengthMismatch, NegativeEigenvalue

__all__ = [
    "GridSpec",
    "FbmPath",
    "ReplicationStreams",
    "validate_hurst",
    "fgn_covariance",
    "fbm_covariance_matrix",
    "circulant_sqrt_eigenvalues",
    "fgn_from_normals",
    "sample_fgn_spectral",
    "sample_fbm_spectral",
    "sample_fbm_cholesky",
    "fbm_path_from_fgn",
    "fgn_block",
    "fbm_block",
    "cholesky_block",
    "CHOLESKY_MAX_STEPS",
]

CHOLESKY_MAX_STEPS = 2048
EIGENVALUE_TOLERANCE = 1e-10
_MASK64 = (1 << 64) - 1


def validate_hurst(hurst: float) -> float:
    hurst = float(hurst)
    if not (0.0 < hurst < 1.0):
        raise ConfigError("hurst", f"HurstIndex must satisfy 0 < H < 1, got {hurst!r}")
    return hurst


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid t_k = k * horizon / n_steps, k = 0..n_steps."""

    n_steps: int
    horizon: float

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ConfigError("n_steps", f"grid needs at least 2 steps, got {self.n_steps!r}")
        if not (self.horizon > 0 and np.isfinite(self.horizon)):
            raise ConfigError("horizon", f"horizon must be positive and finite, got {self.horizon!r}")

    @property
    def step(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.step

    def index_at(self, t: float) -> int:
        """Largest grid index whose time does not exceed ``t``."""
        if t >= self.horizon:
            return self.n_steps
        # guard against t = k*step landing just below k after division
        k = int(np.floor(t / self.step * (1 + 1e-12)))
        return max(0, min(k, self.n_steps))


@dataclass(frozen=True, eq=False)
class FbmPath:
    grid: GridSpec
    hurst: float
    values: np.ndarray

    def __post_init__(self):
        validate_hurst(self.hurst)
        if self.values.shape != (self.grid.n_steps + 1,):
            raise LengthMismatch(self.grid.n_steps + 1, self.values.shape[0])
        if self.values[0] != 0.0:
            raise ConfigError("values", "fBm path must start at 0")
        if not np.all(np.isfinite(self.values)):
            raise ConfigError("values", "fBm path contains non-finite entries")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "value"])
            for t, v in zip(self.grid.times, self.values):
                writer.writerow([f"{t:.17g}", f"{v:.17g}"])


class ReplicationStreams:
    """Per-replication Philox streams keyed by (master_seed, index).

    ``generator(i)`` repositions one shared Philox instance instead of building a
    new one (about 5x cheaper). The returned Generator is only valid until the
    next call, and instances must not be shared between threads.
    """

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed) & _MASK64
        self._bitgen = np.random.Philox(key=np.array([self.master_seed, 0], dtype=np.uint64))
        self._template = self._bitgen.state
        self._gen = np.random.Generator(self._bitgen)

    def generator(self, index: int) -> np.random.Generator:
        state = {
            "bit_generator": self._template["bit_generator"],
            "state": {
                "counter": np.zeros(4, dtype=np.uint64),
                "key": np.array([self.master_seed, int(index) & _MASK64], dtype=np.uint64),
            },
            "buffer": self._template["buffer"].copy(),
            "buffer_pos": self._template["buffer_pos"],
            "has_uint32": 0,
            "uinteger": 0,
        }
        self._bitgen.state = state
        return self._gen


def fresh_generator(master_seed: int, index: int) -> np.random.Generator:
    """Reference construction of stream ``index``; identical output to ReplicationStreams."""
    key = np.array([int(master_seed) & _MASK64, int(index) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def fgn_covariance(hurst: float, lag, step: float = 1.0):
    """Autocovariance of fGn increments of size ``step`` at integer ``lag``."""
    h2 = 2.0 * validate_hurst(hurst)
    k = np.abs(np.asarray(lag, dtype=float))
    gamma = 0.5 * (np.abs(k + 1) ** h2 + np.abs(k - 1) ** h2 - 2.0 * k ** h2)
    out = step ** h2 * gamma
    return float(out) if np.ndim(out) == 0 else out


def fbm_covariance_matrix(hurst: float, times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(t[:, None]) ** h2 + np.abs(t[None, :]) ** h2 - np.abs(t[:, None] - t[None, :]) ** h2)


_eig_lock = threading.Lock()


@lru_cache(maxsize=64)
def _cached_sqrt_eigenvalues(hurst: float, n: int) -> np.ndarray:
    row = np.empty(2 * n)
    gam = fgn_covariance(hurst, np.arange(n + 1))
    row[: n + 1] = gam
    row[n + 1 :] = gam[n - 1 : 0 : -1]
    lam = np.fft.rfft(row).real
    worst = lam.min()
    if worst < -EIGENVALUE_TOLERANCE:
        raise NegativeEigenvalue(f"circulant embedding eigenvalue {worst:.3e} for H={hurst}, n={n}")
    lam = np.clip(lam, 0.0, None)
    # irfft weights: k=0 and k=n carry a real normal, the rest complex with variance split
    scale = np.sqrt(lam)
    scale[1:n] *= np.sqrt(0.5)
    scale.setflags(write=False)
    return scale


def circulant_sqrt_eigenvalues(hurst: float, n: int) -> np.ndarray:
    """sqrt of the 2n-circulant eigenvalues for unit-step fGn, pre-split for irfft."""
    hurst = validate_hurst(hurst)
    with _eig_lock:
        return _cached_sqrt_eigenvalues(hurst, int(n))


def fgn_from_normals(hurst: float, normals: np.ndarray) -> np.ndarray:
    """Map i.i.d. N(0,1) draws of shape (..., 2n) to unit-step fGn of shape (..., n).

    Layout of the last axis: [Re_0, Re_1..Re_{n-1}, Re_n, Im_1..Im_{n-1}].
    """
    normals = np.asarray(normals, dtype=float)
    m = normals.shape[-1]
    if m % 2:
        raise LengthMismatch(m + 1, m)
    n = m // 2
    scale = circulant_sqrt_eigenvalues(hurst, n)
    w = np.empty(normals.shape[:-1] + (n + 1,), dtype=complex)
    w.real = normals[..., : n + 1]
    w.imag[..., 0] = 0.0
    w.imag[..., n] = 0.0
    w.imag[..., 1:n] = normals[..., n + 1 :]
    w *= scale
    return np.fft.irfft(w, n=m, axis=-1)[..., :n] * np.sqrt(m)


def sample_fgn_spectral(hurst: float, n_steps: int, step: float = 1.0, seed: int = 0) -> np.ndarray:
    """One exact fGn sample of length ``n_steps``; deterministic in ``seed``."""
    if n_steps < 2:
        raise ConfigError("n_steps", f"need n_steps >= 2, got {n_steps}")
    z = fresh_generator(seed, 0).standard_normal(2 * n_steps)
    return fgn_from_normals(hurst, z) * step ** hurst


def fbm_path_from_fgn(increments, grid: GridSpec, hurst: float) -> FbmPath:
    increments = np.asarray(increments, dtype=float)
    if increments.shape != (grid.n_steps,):
        raise LengthMismatch(grid.n_steps, increments.size)
    values = np.zeros(grid.n_steps + 1)
    np.cumsum(increments, out=values[1:])
    return FbmPath(grid, hurst, values)


def sample_fbm_spectral(hurst: float, grid: GridSpec, seed: int = 0) -> FbmPath:
    return fbm_path_from_fgn(sample_fgn_spectral(hurst, grid.n_steps, grid.step, seed), grid, hurst)


@lru_cache(maxsize=16)
def _cholesky_factor(hurst: float, n: int) -> np.ndarray:
    t = np.arange(1, n + 1, dtype=float)
    factor = np.linalg.cholesky(fbm_covariance_matrix(hurst, t))
    factor.setflags(write=False)
    return factor


def _check_cholesky_size(n_steps: int) -> None:
    if n_steps > CHOLESKY_MAX_STEPS:
        raise GridTooLarge(n_steps, CHOLESKY_MAX_STEPS)


def sample_fbm_cholesky(hurst: float, grid: GridSpec, seed: int = 0) -> FbmPath:
    hurst = validate_hurst(hurst)
    _check_cholesky_size(grid.n_steps)
    z = fresh_generator(seed, 0).standard_normal(grid.n_steps)
    values = np.zeros(grid.n_steps + 1)
    values[1:] = _cholesky_factor(hurst, grid.n_steps) @ z * grid.step ** hurst
    return FbmPath(grid, hurst, values)


def fgn_block(hurst, n_steps, step, master_seed, start, count, white_noise_shortcut=False, streams=None):
    """Increments for replications ``start .. start+count-1``, shape (count, n_steps).

    With ``white_noise_shortcut`` and H = 1/2 the increments are drawn directly as
    i.i.d. normals (exact, half the draws, no FFT); the realised numbers then
    differ from the spectral route, so the flag is part of an experiment's identity.
    """
    hurst = validate_hurst(hurst)
    streams = streams or ReplicationStreams(master_seed)
    if white_noise_shortcut and hurst == 0.5:
        out = np.empty((count, n_steps))
        for i in range(count):
            streams.generator(start + i).standard_normal(out=out[i])
        return out * np.sqrt(step)
    z = np.empty((count, 2 * n_steps))
    for i in range(count):
        streams.generator(start + i).standard_normal(out=z[i])
    return fgn_from_normals(hurst, z) * step ** hurst


def fbm_block(hurst, grid: GridSpec, master_seed, start, count, white_noise_shortcut=False, streams=None):
    """fBm paths (count, n_steps+1) starting at 0 for a contiguous block of replications."""
    inc = fgn_block(hurst, grid.n_steps, grid.step, master_seed, start, count, white_noise_shortcut, streams)
    out = np.zeros((count, grid.n_steps + 1))
    np.cumsum(inc, axis=1, out=out[:, 1:])
    return out


def cholesky_block(hurst, grid: GridSpec, master_seed, start, count) -> np.ndarray:
    hurst = validate_hurst(hurst)
    _check_cholesky_size(grid.n_steps)
    streams = ReplicationStreams(master_seed)
    z = np.empty((count, grid.n_steps))
    for i in range(count):
        streams.generator(start + i).standard_normal(out=z[i])
    out = np.zeros((count, grid.n_steps + 1))
    out[:, 1:] = z @ _cholesky_factor(hurst, grid.n_steps).T * grid.step ** hurst
    return out
