r"""Closed-form tail asymptotics for the gamma-reflected fBm risk process.

Notation used throughout:

* ``t0 = H / (c (1 - H))`` and ``A(u)`` are the centring and scale of the
  conditional ruin time;
* the finite-horizon boundary level is ``(u + c T_u) / T_u**H``;
* ``c0 = c s0 / (1 + c s0)`` where ``s0 = lim T_u / u`` (0 on short horizons).

Constants that have no closed form (the Pickands constant of index 2H and the
Piterbarg constant of index 2H with drift (1-gamma)/gamma) are passed in via
:class:`Constants`.  They are never defaulted, except for H = 1/2 where both
are known exactly: H_1 = 1 and P_1^b = 1 + 1/b.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Protocol

import numpy as np
from scipy import special

from .errors import (
    BadExpansionSpec,
    ConfigError,
    GammaOutOfRange,
    InvariantBreach,
    MissingConstant,
    RegimeMismatch,
    S0OutOfRange,
)
from .reflection import ModelParams

__all__ = [
    "norm_sf",
    "norm_cdf",
    "log_norm_sf",
    "t0",
    "a_u",
    "Short",
    "Intermediate",
    "Long",
    "scenario_from_dict",
    "Constants",
    "AsymptoticEstimate",
    "LimitLaw",
    "c0_of",
    "d_h",
    "m_gamma",
    "m_gamma_one",
    "d_h_gamma",
    "boundary_level",
    "psi0_finite",
    "psi0_infinite",
    "psi_gamma",
    "ruin_time_limit_law",
    "loss_limit_scaling",
    "ExpansionSpec",
    "ConstantProvider",
    "ClosedFormConstants",
    "TableConstants",
    "piterbarg_field_asymptotic",
    "REGIME_LEVEL",
]

_SQRT2 = math.sqrt(2.0)
# below this boundary level the (1+o(1)) factors are not trusted
REGIME_LEVEL = 2.0


def norm_sf(x):
    """Standard normal tail Psi(x) = 1 - Phi(x), relative accuracy kept for large x."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        pos = 0.5 * special.erfcx(x / _SQRT2) * np.exp(-0.5 * x * x)
        neg = 0.5 * special.erfc(x / _SQRT2)
    out = np.where(x > 0, pos, neg)
    out = np.where(np.isposinf(x), 0.0, out)
    return float(out) if out.ndim == 0 else out


def log_norm_sf(x):
    x = np.asarray(x, dtype=float)
    out = special.log_ndtr(-x)
    return float(out) if out.ndim == 0 else out


def norm_cdf(x):
    """Phi(x); x = +inf gives exactly 1."""
    if np.ndim(x) == 0 and math.isinf(x):
        return 1.0 if x > 0 else 0.0
    return norm_sf(-np.asarray(x, dtype=float))


def t0(params: ModelParams) -> float:
    h = params.hurst
    return h / (params.drift * (1.0 - h))


def a_u(params: ModelParams, u: float) -> float:
    h, c = params.hurst, params.drift
    if not u > 0:
        raise ConfigError("u", f"u must be positive, got {u!r}")
    return h ** (h + 0.5) * u ** h / ((1.0 - h) ** (h + 0.5) * c ** (h + 1.0))


# --- horizon scenarios -------------------------------------------------------


@dataclass(frozen=True)
class Short:
    """T_u = scale * u**power with power < 1, so T_u / u -> 0."""

    scale: float = 1.0
    power: float = 0.0
    tag = "Short"

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigError("horizon_scale", f"must be positive, got {self.scale!r}")
        if not self.power < 1:
            raise ConfigError("horizon_power", f"short horizon needs power < 1, got {self.power!r}")

    @property
    def s0(self) -> float:
        return 0.0

    def validate(self, params: ModelParams) -> None:
        pass

    def horizon(self, params: ModelParams, u: float) -> float:
        return self.scale * u ** self.power

    def to_dict(self):
        return {"tag": self.tag, "scale": self.scale, "power": self.power}


@dataclass(frozen=True)
class Intermediate:
    """T_u = s0 * u with 0 < s0 < t0."""

    s0: float
    tag = "Intermediate"

    def __post_init__(self):
        if not self.s0 > 0:
            raise ConfigError("s0", f"intermediate horizon needs s0 > 0, got {self.s0!r}")

    def validate(self, params: ModelParams) -> None:
        if not self.s0 < t0(params):
            raise S0OutOfRange(self.s0, t0(params))

    def horizon(self, params: ModelParams, u: float) -> float:
        self.validate(params)
        return self.s0 * u

    def to_dict(self):
        return {"tag": self.tag, "s0": self.s0}


@dataclass(frozen=True)
class Long:
    """T_u = t0 u + x A(u); x = +inf stands for the infinite horizon."""

    x: float = math.inf
    tag = "Long"

    def __post_init__(self):
        if math.isnan(self.x) or self.x == -math.inf:
            raise ConfigError("x", f"x must be real or +inf, got {self.x!r}")

    def validate(self, params: ModelParams) -> None:
        pass

    def horizon(self, params: ModelParams, u: float) -> float:
        if math.isinf(self.x):
            return math.inf
        T = t0(params) * u + self.x * a_u(params, u)
        if T <= 0:
            raise ConfigError("x", f"horizon t0*u + x*A(u) = {T:.4g} is not positive at u={u}")
        return T

    def to_dict(self):
        return {"tag": self.tag, "x": "inf" if math.isinf(self.x) else self.x}


def scenario_from_dict(d):
    tag = d.get("tag")
    if tag == "Short":
        return Short(float(d.get("scale", 1.0)), float(d.get("power", 0.0)))
    if tag == "Intermediate":
        return Intermediate(float(d["s0"]))
    if tag == "Long":
        return Long(float(d.get("x", "inf")))
    raise ConfigError("scenario", f"unknown scenario tag {tag!r} (Short, Intermediate, Long)")


# --- constants ---------------------------------------------------------------


@dataclass(frozen=True)
class Constants:
    """Model-specific constants: Pickands H_{2H} and Piterbarg P_{2H}^{(1-g)/g}."""

    pickands: Optional[float] = None
    piterbarg: Optional[float] = None

    def resolve(self, params: ModelParams) -> "Constants":
        if params.hurst != 0.5:
            return self
        g = params.gamma
        pit = 1.0 / (1.0 - g) if g < 1 else None
        return Constants(pickands=1.0 if self.pickands is None else self.pickands,
                         piterbarg=pit if self.piterbarg is None else self.piterbarg)

    def need_pickands(self, params: ModelParams) -> float:
        value = self.resolve(params).pickands
        if value is None:
            raise MissingConstant("pickands", f"Pickands constant H_{2 * params.hurst:g} must be supplied")
        return value

    def need_piterbarg(self, params: ModelParams) -> float:
        value = self.resolve(params).piterbarg
        if value is None:
            b = (1 - params.gamma) / params.gamma
            raise MissingConstant("piterbarg", f"Piterbarg constant P_{2 * params.hurst:g}^{b:g} must be supplied")
        return value


@dataclass
class AsymptoticEstimate:
    value: float
    regime: str
    boundary_level: float
    constants_used: dict = field(default_factory=dict)
    in_regime: bool = True

    def __post_init__(self):
        if not self.value >= 0:
            raise InvariantBreach(f"asymptotic value must be nonnegative, got {self.value}")

    def to_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _estimate(value, regime, level, used):
    ok = level >= REGIME_LEVEL and value <= 1.0
    return AsymptoticEstimate(float(value), regime, float(level), used, ok)


def c0_of(c: float, s0: float, hurst: Optional[float] = None) -> float:
    """c s0 / (1 + c s0); with ``hurst`` given, also checks s0 < t0 (equivalently c0 < H)."""
    if s0 < 0:
        raise S0OutOfRange(s0, math.inf if hurst is None else hurst / (c * (1 - hurst)))
    c0 = c * s0 / (1.0 + c * s0)
    if hurst is not None:
        limit = hurst / (c * (1 - hurst))
        if not s0 < limit:
            raise S0OutOfRange(s0, limit)
        assert c0 < hurst
    return c0


def _case(hurst: float) -> int:
    # exact branch on H vs 1/2, no arithmetic on the exponent
    return -1 if hurst < 0.5 else (0 if hurst == 0.5 else 1)


def _prefactor_power(hurst: float) -> float:
    return (1.0 - 2.0 * hurst) / hurst if _case(hurst) < 0 else 0.0


def d_h(params: ModelParams, s0: float, constants: Constants = Constants()) -> float:
    h = params.hurst
    c0 = c0_of(params.drift, s0, h)
    case = _case(h)
    if case < 0:
        return 2.0 ** (-1.0 / (2 * h)) / (h - c0) * constants.need_pickands(params)
    if case == 0:
        return 4.0 * (1 - c0) ** 2 / ((1 - 2 * c0) * (2 - 2 * c0))
    return 1.0


def m_gamma(params: ModelParams, s0: float, constants: Constants = Constants()) -> float:
    g = params.gamma
    if not 0 < g < 1:
        raise GammaOutOfRange(g, "(0, 1)")
    c0 = c0_of(params.drift, s0, params.hurst)
    case = _case(params.hurst)
    if case < 0:
        return constants.need_piterbarg(params)
    if case == 0:
        return (2 - 2 * c0) / (2 - 2 * c0 - g)
    return 1.0


def m_gamma_one(params: ModelParams, s0: float, constants: Constants = Constants()) -> float:
    if params.gamma != 1:
        raise GammaOutOfRange(params.gamma, "{1}")
    h = params.hurst
    c0 = c0_of(params.drift, s0, h)
    case = _case(h)
    if case < 0:
        return 2.0 ** (-1.0 / (2 * h)) / (h - c0) * constants.need_pickands(params)
    if case == 0:
        return (2 - 2 * c0) / (1 - 2 * c0)
    return 1.0


def d_h_gamma(params: ModelParams, s0: float, constants: Constants = Constants()) -> float:
    """Prefactor of the direct finite-horizon asymptotic for 0 < gamma < 1."""
    h, g = params.hurst, params.gamma
    if not 0 < g < 1:
        raise GammaOutOfRange(g, "(0, 1)")
    c0 = c0_of(params.drift, s0, h)
    case = _case(h)
    if case < 0:
        return (2.0 ** (-1.0 / (2 * h)) / (h - c0) * constants.need_pickands(params)
                * constants.need_piterbarg(params))
    if case == 0:
        return 4.0 * (1 - c0) ** 2 / ((1 - 2 * c0) * (2 - 2 * c0 - g))
    return 1.0


def boundary_level(params: ModelParams, u: float, horizon: float) -> float:
    return (u + params.drift * horizon) / horizon ** params.hurst


def _finite_horizon(params, u, scenario):
    if isinstance(scenario, Long):
        raise RegimeMismatch("finite-horizon formula needs a Short or Intermediate scenario")
    scenario.validate(params)
    return scenario.horizon(params, u)


def psi0_finite(params: ModelParams, u: float, scenario, constants: Constants = Constants()) -> AsymptoticEstimate:
    """Ruin probability of the unreflected process over [0, T_u], T_u/u -> s0 < t0."""
    T = _finite_horizon(params, u, scenario)
    level = boundary_level(params, u, T)
    dh = d_h(params, scenario.s0, constants)
    value = dh * level ** _prefactor_power(params.hurst) * norm_sf(level)
    used = {"D_H": dh, "c0": c0_of(params.drift, scenario.s0), "T_u": T}
    if _case(params.hurst) < 0:
        used["pickands"] = constants.need_pickands(params)
    return _estimate(value, scenario.tag, level, used)


def _infinite_level(params: ModelParams, u: float) -> float:
    h, c = params.hurst, params.drift
    return c ** h * u ** (1 - h) / (h ** h * (1 - h) ** (1 - h))


def psi0_infinite(params: ModelParams, u: float, pickands: Optional[float] = None) -> AsymptoticEstimate:
    h = params.hurst
    if not u > 0:
        raise ConfigError("u", f"u must be positive, got {u!r}")
    if pickands is None:
        pickands = Constants().need_pickands(params)
    m = _infinite_level(params, u)
    pref = 2.0 ** (0.5 - 1.0 / (2 * h)) * math.sqrt(math.pi) / math.sqrt(h * (1 - h)) * pickands
    value = pref * m ** (1.0 / h - 1.0) * norm_sf(m)
    return _estimate(value, "Long", m, {"pickands": pickands, "prefactor": pref})


def psi_gamma(params: ModelParams, u: float, scenario, constants: Constants = Constants()) -> AsymptoticEstimate:
    """Ruin probability asymptotic of W_gamma for any supported (gamma, scenario)."""
    g = params.gamma
    if isinstance(scenario, Long):
        if g == 1:
            raise RegimeMismatch("gamma = 1 on a long horizon is not covered")
        base = psi0_infinite(params, u, constants.need_pickands(params))
        phi = norm_cdf(scenario.x)
        factor = 1.0 if g == 0 else constants.need_piterbarg(params)
        used = dict(base.constants_used, Phi_x=phi, x=scenario.to_dict()["x"])
        if g > 0:
            used["piterbarg"] = factor
        return _estimate(factor * base.value * phi, "Long", base.boundary_level, used)

    base = psi0_finite(params, u, scenario, constants)
    if g == 0:
        return base
    used = dict(base.constants_used)
    if g == 1:
        m = m_gamma_one(params, scenario.s0, constants)
        used["M_H_1"] = m
        return _estimate(m * base.value, scenario.tag, base.boundary_level, used)
    m = m_gamma(params, scenario.s0, constants)
    value = m * base.value
    # direct assembly through D_{H,gamma}; must agree with D_H * M_{H,gamma}
    dhg = d_h_gamma(params, scenario.s0, constants)
    level = base.boundary_level
    direct = dhg * level ** _prefactor_power(params.hurst) * norm_sf(level)
    if not math.isclose(direct, value, rel_tol=1e-12, abs_tol=0.0) and value > 0:
        raise InvariantBreach(f"D_H*M = {value!r} but D_H,gamma assembly = {direct!r}")
    used.update(M_H_gamma=m, D_H_gamma=dhg, direct_value=direct)
    if _case(params.hurst) < 0:
        used["piterbarg"] = constants.need_piterbarg(params)
    return _estimate(value, scenario.tag, level, used)


# --- limit laws --------------------------------------------------------------


@dataclass(frozen=True)
class LimitLaw:
    """Limit law of ``scaling * orientation * (tau - offset)`` conditional on ruin.

    Short/Intermediate: orientation -1, offset T_u (time before the horizon);
    Long: orientation +1, offset t0 u.
    """

    kind: str
    scaling: float
    truncation_x: Optional[float] = None
    offset: float = 0.0
    orientation: int = 1

    def __post_init__(self):
        if not self.scaling > 0:
            raise InvariantBreach(f"limit-law scaling must be positive, got {self.scaling}")
        if (self.kind == "TruncatedNormal") != (self.truncation_x is not None):
            raise InvariantBreach("truncation_x is required exactly for TruncatedNormal")

    def statistic(self, raw):
        return self.scaling * self.orientation * (np.asarray(raw, dtype=float) - self.offset)

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "UnitExponential":
            return np.where(y > 0, -np.expm1(-np.maximum(y, 0.0)), 0.0)
        x = self.truncation_x
        if math.isinf(x):
            return norm_cdf(y)
        return np.where(y < x, norm_cdf(np.minimum(y, x)) / norm_cdf(x), 1.0)

    def to_dict(self):
        d = asdict(self)
        if self.truncation_x is not None and math.isinf(self.truncation_x):
            d["truncation_x"] = "inf"
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("truncation_x") == "inf":
            d["truncation_x"] = math.inf
        return cls(**d)


def ruin_time_limit_law(params: ModelParams, u: float, scenario) -> LimitLaw:
    h, c, g = params.hurst, params.drift, params.gamma
    if not 0 <= g < 1:
        raise GammaOutOfRange(g, "[0, 1)")
    if isinstance(scenario, Long):
        return LimitLaw("TruncatedNormal", 1.0 / a_u(params, u), scenario.x, t0(params) * u, 1)
    T = _finite_horizon(params, u, scenario)
    if isinstance(scenario, Short):
        lam = h * u ** 2 / T ** (2 * h + 1)
    else:
        s0 = scenario.s0
        lam = (1 + c * s0) * (h - (1 - h) * c * s0) / (s0 ** (2 * h + 1) * u ** (2 * h - 1))
    return LimitLaw("UnitExponential", lam, None, T, -1)


def loss_limit_scaling(params: ModelParams, u: float, scenario) -> float:
    """Factor making the conditional overshoot sup W - u asymptotically Exp(1)."""
    h, c = params.hurst, params.drift
    if isinstance(scenario, Long):
        return c ** (2 * h) * (1 - h) ** (2 * h - 1) / (h ** (2 * h) * u ** (2 * h - 1))
    T = _finite_horizon(params, u, scenario)
    return (u + c * T) / T ** (2 * h)


# --- Piterbarg-type theorem for fields on the triangle -----------------------


class ConstantProvider(Protocol):
    def pickands(self, alpha: float) -> float: ...

    def piterbarg(self, alpha: float, b: float) -> float: ...

    def tilde_piterbarg(self, alpha: float, b: float) -> float: ...


class ClosedFormConstants:
    """Exactly known constants for alpha in {1, 2} (Brownian and degenerate H=1 cases)."""

    def pickands(self, alpha):
        from .constants import pickands_closed_form

        return pickands_closed_form(alpha)

    def piterbarg(self, alpha, b):
        from .constants import piterbarg_closed_form

        return piterbarg_closed_form(alpha, b)

    def tilde_piterbarg(self, alpha, b):
        from .constants import tilde_piterbarg_closed_form

        return tilde_piterbarg_closed_form(alpha, b)


class TableConstants:
    """Constants looked up from user-supplied tables keyed by alpha / (alpha, b)."""

    def __init__(self, pickands=None, piterbarg=None, tilde_piterbarg=None, rel_tol=1e-9):
        self._h = dict(pickands or {})
        self._p = dict(piterbarg or {})
        self._pt = dict(tilde_piterbarg or {})
        self._tol = rel_tol

    def _find(self, table, key, name):
        for k, v in table.items():
            kk = k if isinstance(k, tuple) else (k,)
            if len(kk) == len(key) and all(math.isclose(a, b, rel_tol=self._tol) for a, b in zip(kk, key)):
                return v
        raise MissingConstant(name, f"no value supplied for {name}{key}")

    def pickands(self, alpha):
        return self._find(self._h, (alpha,), "pickands")

    def piterbarg(self, alpha, b):
        return self._find(self._p, (alpha, b), "piterbarg")

    def tilde_piterbarg(self, alpha, b):
        return self._find(self._pt, (alpha, b), "tilde_piterbarg")


@dataclass(frozen=True)
class ExpansionSpec:
    """Local structure of a field at its unique variance maximiser (s_loc, t_loc).

    1 - sigma ~ A_i |x_i - x_i0|^{beta_i}; 1 - r ~ B_i |x_i - x_i'|^{alpha_i}; i = 1 (s), 2 (t).
    """

    A: tuple
    beta: tuple
    B: tuple
    alpha: tuple
    s_loc: float
    t_loc: float

    def validate(self):
        for name in ("A", "beta", "B", "alpha"):
            vals = getattr(self, name)
            if len(vals) != 2 or not all(v > 0 for v in vals):
                raise BadExpansionSpec(name, f"need two positive entries, got {vals!r}")
        if not all(a <= 2 for a in self.alpha):
            raise BadExpansionSpec("alpha", f"alpha_i must lie in (0, 2], got {self.alpha!r}")
        for name, loc in (("s_loc", self.s_loc), ("t_loc", self.t_loc)):
            if not 0 <= loc <= 1:
                raise BadExpansionSpec(name, f"maximiser coordinate must lie in [0, 1], got {loc!r}")


def _field_factor(i, spec: ExpansionSpec, u, constants: ConstantProvider):
    a, be, A, B = spec.alpha[i], spec.beta[i], spec.A[i], spec.B[i]
    loc = (spec.s_loc, spec.t_loc)[i]
    interior = 0 < loc < 1
    if a < be:
        weight = 2.0 if interior else 1.0
        return (weight * constants.pickands(a) * B ** (1 / a) * A ** (-1 / be)
                * math.gamma(1 / be + 1) * u ** (2 / a - 2 / be))
    if a == be:
        # each coordinate uses its own alpha_i
        return constants.tilde_piterbarg(a, A / B) if interior else constants.piterbarg(a, A / B)
    return 1.0


def piterbarg_field_asymptotic(spec: ExpansionSpec, u: float, constants: ConstantProvider) -> float:
    """P(sup eta_u > u) ~ F1(u) F2(u) Psi(u) for a field satisfying the local expansions."""
    spec.validate()
    f1 = _field_factor(0, spec, u, constants)
    f2 = _field_factor(1, spec, u, constants)
    return f1 * f2 * norm_sf(u)
