r"""Monte Carlo estimates of the Pickands and Piterbarg constants.

All three constants are limits of exponential functionals of
``Z(t) = sqrt(2) B(t) - (1 + b) |t|**alpha`` over a growing window, where B is
a standard fBm with Hurst index alpha/2 (for alpha = 2, B(t) = t N exactly).
What is estimated is the grid version at finite S, e.g. for Pickands

    (1/S) E exp(max_k Z(t_k)),   t_k = k * grid_step in [0, S].

Two estimators of the same quantity are available:

``direct``
    plain sample mean of exp(max Z). Its variance is infinite for the Pickands
    functional, so it badly underestimates once S is large.
``shifted`` (default)
    writes E e^{max Z} = sum_j E[e^{Z_j}] E_j[e^{max Z} / sum_k e^{Z_k}] and
    applies the Cameron-Martin shift for each tilt e^{Z_j}.  The summand is the
    bounded ratio max/sum of a re-centred path, and j is drawn at random.  It is
    unbiased for the same grid functional, with bounded variance.

Both inherit the two biases of the definition: grid maxima sit below the
continuous supremum, and finite S leaves an O(1/S) edge term in the Pickands
normalisation.  Every estimate reports (S, grid_step, replications).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import MissingConstant, ParamOutOfRange
from .fbm import GridSpec, ReplicationStreams, fbm_block

__all__ = [
    "ConstantEstimate",
    "pickands_estimate",
    "piterbarg_estimate",
    "tilde_piterbarg_estimate",
    "pickands_closed_form",
    "piterbarg_closed_form",
    "tilde_piterbarg_closed_form",
    "alpha2_quadrature",
]

_SQRT2 = math.sqrt(2.0)
_BLOCK_CELLS = 1 << 21


@dataclass
class ConstantEstimate:
    kind: str
    alpha: float
    b: Optional[float]
    S: float
    grid_step: float
    replications: int
    value: float
    std_error: float
    method: str = "shifted"
    seed: int = 0

    def __post_init__(self):
        if (self.b is None) != (self.kind == "Pickands"):
            raise ParamOutOfRange("b", "b is required exactly for Piterbarg-type constants")

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def pickands_closed_form(alpha: float) -> float:
    if alpha == 1:
        return 1.0
    if alpha == 2:
        return 1.0 / math.sqrt(math.pi)
    raise MissingConstant("pickands", f"no closed form for alpha={alpha}")


def piterbarg_closed_form(alpha: float, b: float) -> float:
    # alpha=1: sup of sqrt2 B(t) - (1+b)t is Exp(1+b); alpha=2: sup is N^2/(2(1+b)) on N>0
    if alpha == 1:
        return 1.0 + 1.0 / b
    if alpha == 2:
        return 0.5 * (1.0 + math.sqrt((1.0 + b) / b))
    raise MissingConstant("piterbarg", f"no closed form for alpha={alpha}")


def tilde_piterbarg_closed_form(alpha: float, b: float) -> float:
    if alpha == 1:
        return 1.0 + 2.0 / b - 1.0 / (1.0 + 2.0 * b)
    if alpha == 2:
        return math.sqrt((1.0 + b) / b)
    raise MissingConstant("tilde_piterbarg", f"no closed form for alpha={alpha}")


def alpha2_quadrature(kind: str, b: float = 0.0, S: float = math.inf) -> float:
    """Continuous-time value of the alpha=2 functional at window S by 1-d quadrature.

    For alpha = 2 the path is t*N, so the supremum is an explicit function of N.
    """
    lam = 1.0 + b

    def sup_one_sided(n):
        if n <= 0:
            return 0.0
        t_star = n / (_SQRT2 * lam)
        if t_star <= S:
            return n * n / (2 * lam)
        return _SQRT2 * n * S - lam * S * S

    def integrand(n, two_sided):
        g = sup_one_sided(abs(n) if two_sided else n)
        return math.exp(g - 0.5 * n * n) / math.sqrt(2 * math.pi)

    two_sided = kind == "TildePiterbarg"
    pieces = [-math.inf, 0.0]
    if math.isfinite(S):
        pieces += [_SQRT2 * lam * S]
    pieces += [math.inf]
    total = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        val, _ = integrate.quad(integrand, lo, hi, args=(two_sided,), limit=200, epsabs=1e-12, epsrel=1e-12)
        total += val
    if kind == "Pickands":
        if not math.isfinite(S):
            raise ParamOutOfRange("S", "the Pickands functional needs a finite window")
        return total / S
    return total


def _check(alpha, S, grid_step, replications, b=None):
    if not 0 < alpha <= 2:
        raise ParamOutOfRange("alpha", f"alpha must lie in (0, 2], got {alpha!r}")
    if not S >= 1:
        raise ParamOutOfRange("S", f"window S must be >= 1, got {S!r}")
    if not 0 < grid_step <= 0.05:
        raise ParamOutOfRange("grid_step", f"grid_step must lie in (0, 0.05], got {grid_step!r}")
    if int(replications) != replications or replications < 2:
        raise ParamOutOfRange("replications", f"need an integer >= 2, got {replications!r}")
    if b is not None and not b > 0:
        raise ParamOutOfRange("b", f"b must be positive, got {b!r}")
    k = int(round(S / grid_step))
    if k < 2:
        raise ParamOutOfRange("S", "window too short for the grid step")
    return k


def _path_blocks(alpha, n_steps, grid_step, seed, replications):
    """Yield (start, paths) blocks of B_alpha sampled on k*grid_step, k = 0..n_steps."""
    block = max(1, _BLOCK_CELLS // (n_steps + 1))
    t = np.arange(n_steps + 1) * grid_step
    streams = ReplicationStreams(seed)
    for start in range(0, replications, block):
        count = min(block, replications - start)
        if alpha == 2:
            normals = np.array([streams.generator(start + i).standard_normal() for i in range(count)])
            yield start, normals[:, None] * t[None, :]
        else:
            grid = GridSpec(n_steps, n_steps * grid_step)
            yield start, fbm_block(alpha / 2, grid, seed, start, count, white_noise_shortcut=True, streams=streams)


def _tilt_indices(seed, start, count, probs):
    # index draws use their own streams so the path streams stay untouched
    key = int(np.random.SeedSequence([int(seed) & ((1 << 64) - 1), 0x5EED]).generate_state(1, np.uint64)[0])
    streams = ReplicationStreams(key)
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    u = np.array([streams.generator(start + i).random() for i in range(count)])
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


def _estimate(kind, alpha, b, S, grid_step, replications, seed, method):
    two_sided = kind == "TildePiterbarg"
    k = _check(alpha, S, grid_step, replications, b)
    drift = 0.0 if b is None else b
    n_path = 2 * k if two_sided else k
    if two_sided:
        t = np.arange(-k, k + 1) * grid_step
    else:
        t = np.arange(k + 1) * grid_step
    tpow = np.abs(t) ** alpha
    # tilt weights E[e^{Z_j}] = exp(-b |t_j|^alpha)
    log_w = -drift * tpow
    w_total = float(np.exp(log_w).sum())
    probs = np.exp(log_w - log_w.max())

    vals = np.empty(replications)
    for start, x in _path_blocks(alpha, n_path, grid_step, seed, replications):
        count = x.shape[0]
        if two_sided:
            x = x - x[:, k : k + 1]
        if method == "direct":
            z = _SQRT2 * x - (1.0 + drift) * tpow
            vals[start : start + count] = np.exp(z.max(axis=1))
            continue
        j = _tilt_indices(seed, start, count, probs)
        xj = x[np.arange(count), j][:, None]
        lag = np.abs(t[None, :] - t[j][:, None]) ** alpha
        w = _SQRT2 * (x - xj) - lag - drift * tpow
        w -= w.max(axis=1, keepdims=True)
        vals[start : start + count] = w_total / np.exp(w).sum(axis=1)
    if kind == "Pickands":
        vals /= S
    value = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(replications))
    return ConstantEstimate(kind, alpha, b, S, grid_step, int(replications), value, se, method, int(seed))


def pickands_estimate(alpha, S=20.0, grid_step=0.01, replications=2000, seed=0, method="shifted") -> ConstantEstimate:
    """Estimate (1/S) E exp(max_{[0,S] grid} (sqrt2 B_alpha(t) - t^alpha))."""
    return _estimate("Pickands", alpha, None, S, grid_step, replications, seed, _method(method))


def piterbarg_estimate(alpha, b, S=20.0, grid_step=0.01, replications=2000, seed=0, method="shifted") -> ConstantEstimate:
    """Estimate E exp(max_{[0,S] grid} (sqrt2 B_alpha(t) - (1+b) t^alpha))."""
    return _estimate("Piterbarg", alpha, b, S, grid_step, replications, seed, _method(method))


def tilde_piterbarg_estimate(alpha, b, S=20.0, grid_step=0.01, replications=2000, seed=0,
                             method="shifted") -> ConstantEstimate:
    """Two-sided variant over [-S, S] with drift (1+b)|t|^alpha."""
    return _estimate("TildePiterbarg", alpha, b, S, grid_step, replications, seed, _method(method))


def _method(method):
    if method not in ("shifted", "direct"):
        raise ParamOutOfRange("method", f"unknown estimator {method!r} (shifted, direct)")
    return method
