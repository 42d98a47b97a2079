r"""Variance landscape of the normalised two-parameter field behind the ruin event.

After self-similar rescaling the ruin event becomes an exceedance of

    Y(s, t) = (X(t) - gamma X(s)) / (1 + d (t - gamma s)),   0 <= s <= t <= 1,

with d = c T_u / u.  This module checks numerically that the variance of Y is
maximised only at the corner (0, 1), that the slope function f_d along
t = 1 is negative, and that the local expansions of the standard deviation and
correlation around the corner hold.  These are numerical checks, not proofs.
"""

from __future__ import annotations

import csv
import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import ExpansionSpec
from .errors import ConfigError, OutOfTriangle, SOutOfRange
from .reflection import ModelParams

__all__ = [
    "FieldParams",
    "variance_yu",
    "z_covariance",
    "f_d",
    "v2_slope_on_top_edge",
    "derivative_identity_check",
    "certify_slope_negativity",
    "NegativityReport",
    "locate_variance_max",
    "VarianceMax",
    "expansion_residuals",
    "correlation_residuals",
    "field_expansion_spec",
    "write_landscape_csv",
]

S_EDGE = 1e-6


@dataclass(frozen=True)
class FieldParams:
    params: ModelParams
    d: float

    def __post_init__(self):
        if not self.d >= 0:
            raise ConfigError("d", f"d = c T_u / u must be nonnegative, got {self.d!r}")
        if not 0 <= self.params.gamma < 1:
            raise ConfigError("gamma", f"field analysis needs gamma in [0, 1), got {self.params.gamma!r}")

    @classmethod
    def from_fraction(cls, hurst, gamma, fraction, drift=1.0):
        """d = fraction * H / (1 - H); fraction < 1 is the range where the results apply."""
        return cls(ModelParams(hurst, drift, gamma), fraction * hurst / (1 - hurst))

    @property
    def d_limit(self) -> float:
        h = self.params.hurst
        return h / (1 - h)

    @property
    def in_scope(self) -> bool:
        return self.d < self.d_limit

    @property
    def c_u(self) -> float:
        # c T_u / (u + c T_u) expressed through d
        return self.d / (1 + self.d)


def _z_variance(h2, gamma, s, t):
    return t ** h2 + gamma ** 2 * s ** h2 - gamma * (t ** h2 + s ** h2 - np.abs(t - s) ** h2)


def variance_yu(fp: FieldParams, s, t):
    """Var Y(s, t) on the triangle 0 <= s <= t <= 1."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t > 1) or np.any(s > t):
        raise OutOfTriangle()
    h2 = 2 * fp.params.hurst
    g = fp.params.gamma
    out = _z_variance(h2, g, s, t) / (1 + fp.d * (t - g * s)) ** 2
    return float(out) if out.ndim == 0 else out


def _fbm_cov(h2, a, b):
    return 0.5 * (np.abs(a) ** h2 + np.abs(b) ** h2 - np.abs(a - b) ** h2)


def z_covariance(fp: FieldParams, s, t, s2, t2):
    h2 = 2 * fp.params.hurst
    g = fp.params.gamma
    return (_fbm_cov(h2, t, t2) - g * _fbm_cov(h2, t, s2) - g * _fbm_cov(h2, s, t2)
            + g * g * _fbm_cov(h2, s, s2))


def f_d(fp: FieldParams, s):
    """Sign-carrying factor of d/ds Var Y(s, 1); see v2_slope_on_top_edge."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0) or np.any(s >= 1):
        raise SOutOfRange()
    if not fp.d > 0:
        raise ConfigError("d", "f_d needs d > 0")
    h, g, d = fp.params.hurst, fp.params.gamma, fp.d
    h2 = 2 * h
    out = (1 - g - (g - g * g) * s ** h2 + g * (1 - s) ** h2
           - h / d * (1 + d - d * g * s) * ((1 - g) * s ** (h2 - 1) + (1 - s) ** (h2 - 1)))
    return float(out) if out.ndim == 0 else out


def v2_slope_on_top_edge(fp: FieldParams, s):
    """d/ds Var Y(s, 1) = 2 d gamma (1 + d(1 - gamma s))^-3 f_d(s)."""
    s = np.asarray(s, dtype=float)
    g, d = fp.params.gamma, fp.d
    return 2 * d * g / (1 + d * (1 - g * s)) ** 3 * f_d(fp, s)


def derivative_identity_check(fp: FieldParams, s, step=1e-5, rel_tol=1e-6):
    """Compare v2_slope_on_top_edge with central differences of variance_yu(s, 1).

    Falls back to one Richardson extrapolation step where the plain central
    difference misses ``rel_tol``.  Returns (analytic, numeric, relative_error).
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    one = np.ones_like(s)

    def central(hh):
        return (variance_yu(fp, s + hh, one) - variance_yu(fp, s - hh, one)) / (2 * hh)

    analytic = v2_slope_on_top_edge(fp, s)
    numeric = central(step)
    scale = np.maximum(np.abs(analytic), 1e-300)
    err = np.abs(numeric - analytic) / scale
    bad = err > rel_tol
    if np.any(bad):
        rich = (4 * central(step / 2) - numeric) / 3
        numeric = np.where(bad, rich, numeric)
        err = np.abs(numeric - analytic) / scale
    return analytic, numeric, err


@dataclass
class NegativityReport:
    passed: bool
    max_value: float
    argmax: dict
    evaluations: int
    out_of_scope: list = field(default_factory=list)

    def to_dict(self):
        return {"passed": self.passed, "max_value": self.max_value, "argmax": self.argmax,
                "evaluations": self.evaluations, "out_of_scope": self.out_of_scope}


def certify_slope_negativity(hurst_grid, gamma_grid, fraction_grid, s_points=1000) -> NegativityReport:
    """Sweep f_d over the grids; PASS iff max f_d < 0 over all in-scope points.

    Each d is given as fraction * H/(1-H).  Fractions >= 1 are outside the
    range the negativity claim covers; they are evaluated and reported
    separately (with a warning) but do not affect PASS.
    """
    s = np.linspace(S_EDGE, 1 - S_EDGE, int(s_points))
    best = (-np.inf, None)
    count = 0
    out_of_scope = []
    for h, g, frac in itertools.product(hurst_grid, gamma_grid, fraction_grid):
        if frac <= 0:
            raise ConfigError("fraction", f"fractions must be positive, got {frac!r}")
        vals = f_d(FieldParams.from_fraction(h, g, frac), s)
        k = int(np.argmax(vals))
        where = {"hurst": float(h), "gamma": float(g), "fraction": float(frac), "s": float(s[k])}
        if frac >= 1:
            out_of_scope.append(dict(where, max_f_d=float(vals[k]), negative=bool(vals[k] < 0)))
            continue
        count += vals.size
        if vals[k] > best[0]:
            best = (float(vals[k]), where)
    if out_of_scope:
        warnings.warn(f"{len(out_of_scope)} parameter sets have d >= H/(1-H); reported separately")
    return NegativityReport(bool(best[0] < 0), best[0], best[1], count, out_of_scope)


@dataclass(frozen=True)
class VarianceMax:
    s: float
    t: float
    v: float
    expected_v: float
    resolution: int

    @property
    def passed(self) -> bool:
        cell = 1.0 / self.resolution
        return (self.s <= cell and self.t >= 1 - cell
                and abs(self.v - self.expected_v) <= 1e-6)


def locate_variance_max(fp: FieldParams, resolution: int = 200) -> VarianceMax:
    """Grid argmax of the standard deviation of Y over the triangle."""
    if resolution < 100:
        raise ConfigError("resolution", f"need at least 100 points per axis, got {resolution}")
    grid = np.linspace(0.0, 1.0, resolution + 1)
    s, t = np.meshgrid(grid, grid, indexing="ij")
    mask = s <= t
    v2 = np.full(s.shape, -np.inf)
    v2[mask] = variance_yu(fp, s[mask], t[mask])
    i, j = np.unravel_index(np.argmax(v2), v2.shape)
    return VarianceMax(float(grid[i]), float(grid[j]), float(np.sqrt(v2[i, j])), 1.0 / (1.0 + fp.d), resolution)


def _sigma_ratio(fp, s, t):
    return np.sqrt(variance_yu(fp, s, t)) * (1 + fp.d)


def _sigma_expansion(fp, s, t):
    h, g, c = fp.params.hurst, fp.params.gamma, fp.c_u
    if h > 0.5:
        return 1 - (h - c) * (1 - t) - g * (h - c) * s, (1 - t) + s
    if h == 0.5:
        return 1 - (0.5 - c) * (1 - t) - g * (1 - g / 2 - c) * s, (1 - t) + s
    return 1 - (h - c) * (1 - t) - (g - g * g) / 2 * s ** (2 * h), (1 - t) + s ** (2 * h)


_DIRECTIONS = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.5, 1.0), (1.0, 0.25))


def expansion_residuals(fp: FieldParams, radius: float = 0.05, levels: int = 4) -> dict:
    """|sigma/sigma(0,1) - first-order expansion| / distance scale along dyadic radii.

    PASS iff the worst-direction ratio decreases strictly at every halving.
    """
    if not 0 < radius <= 0.1:
        raise ConfigError("radius", f"radius must lie in (0, 0.1], got {radius!r}")
    radii = radius / 2.0 ** np.arange(levels)
    table = np.empty((len(_DIRECTIONS), levels))
    for k, r in enumerate(radii):
        for i, (a, b) in enumerate(_DIRECTIONS):
            s, t = r * a, 1 - r * b
            approx, scale = _sigma_expansion(fp, s, t)
            table[i, k] = abs(_sigma_ratio(fp, s, t) - approx) / scale
    ratios = table.max(axis=0)
    by_direction = {f"{a:g},{b:g}": row.tolist() for (a, b), row in zip(_DIRECTIONS, table)}
    return {"radii": radii.tolist(), "ratios": ratios.tolist(), "by_direction": by_direction,
            "passed": bool(np.all(np.diff(ratios) < 0))}


_PAIRS = (((1.0, 0.0), (0.0, 1.0)), ((0.5, 0.5), (1.0, 1.0)), ((0.0, 0.2), (1.0, 0.7)))


def correlation_residuals(fp: FieldParams, radius: float = 0.05, levels: int = 4) -> dict:
    """Relative error of 1 - corr against (|t-t'|^2H + gamma^2 |s-s'|^2H) / 2 near (0, 1)."""
    h2 = 2 * fp.params.hurst
    g = fp.params.gamma
    radii = radius / 2.0 ** np.arange(levels)
    rel = []
    for r in radii:
        worst = 0.0
        for (a, b), (a2, b2) in _PAIRS:
            s, t, s2, t2 = r * a, 1 - r * b, r * a2, 1 - r * b2
            cov = z_covariance(fp, s, t, s2, t2)
            var1 = z_covariance(fp, s, t, s, t)
            var2 = z_covariance(fp, s2, t2, s2, t2)
            one_minus_r = 1 - cov / np.sqrt(var1 * var2)
            approx = 0.5 * (abs(t - t2) ** h2 + g * g * abs(s - s2) ** h2)
            worst = max(worst, abs(one_minus_r - approx) / approx)
        rel.append(worst)
    rel = np.array(rel)
    return {"radii": radii.tolist(), "relative_errors": rel.tolist(), "passed": bool(np.all(np.diff(rel) < 0))}


def field_expansion_spec(fp: FieldParams) -> ExpansionSpec:
    """Local coefficients of the normalised field at its variance maximiser (0, 1).

    Coordinate 1 is s, coordinate 2 is t.  Uses c(u) = d / (1 + d); feed the
    limit value of d to get the limiting constants.
    """
    h, g, c = fp.params.hurst, fp.params.gamma, fp.c_u
    if not 0 < g < 1:
        raise ConfigError("gamma", "the two-parameter wiring needs 0 < gamma < 1")
    if h > 0.5:
        A, beta = (g * (h - c), h - c), (1.0, 1.0)
    elif h == 0.5:
        A, beta = (g * (1 - g / 2 - c), 0.5 - c), (1.0, 1.0)
    else:
        A, beta = ((g - g * g) / 2, h - c), (2 * h, 1.0)
    return ExpansionSpec(A=A, beta=beta, B=(g * g / 2, 0.5), alpha=(2 * h, 2 * h), s_loc=0.0, t_loc=1.0)


def write_landscape_csv(fp: FieldParams, path, resolution: int = 100) -> None:
    grid = np.linspace(0.0, 1.0, resolution + 1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s", "t", "V2"])
        for t in grid:
            for s in grid[grid <= t]:
                writer.writerow([f"{s:.17g}", f"{t:.17g}", f"{variance_yu(fp, s, t):.17g}"])
