"""Replicated simulation of ruin events and comparison with the asymptotics.

Replications are processed in fixed-size blocks (the size depends only on the
grid), each replication drawing from its own (master_seed, index) stream, so
results are bit-identical for any worker count.  Several gamma values can be
evaluated on the same input paths, which gives pathwise-coupled estimates.

Crude Monte Carlo only: keep boundary levels around 3.5 or below.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, stats

from .asymptotics import (
    Constants,
    LimitLaw,
    Long,
    a_u,
    loss_limit_scaling,
    m_gamma,
    norm_cdf,
    norm_sf,
    psi_gamma,
    ruin_time_limit_law,
    scenario_from_dict,
    t0,
)
from .errors import ConfigError, InfeasibleRareEvent, TooFewObservations
from .fbm import GridSpec, ReplicationStreams, fbm_block
from .reflection import ModelParams, first_crossing

__all__ = [
    "ExperimentSpec",
    "McEstimate",
    "ConditionalSample",
    "SimulationOutcomes",
    "proxy_horizon",
    "brownian_ruin_probability",
    "wilson_interval",
    "simulate",
    "estimate_ruin_prob",
    "sample_conditional_ruin_times",
    "sample_conditional_losses",
    "ks_statistic",
    "compare_mc_vs_asymptotic",
    "gamma_ratio_ladder",
    "long_horizon_phi_ladder",
    "ComparisonReport",
]

_BLOCK_CELLS = 1 << 20
MIN_REPLICATIONS = 100
MIN_KS_OBSERVATIONS = 50


def proxy_horizon(params: ModelParams, u: float, sigmas: float = 6.0) -> float:
    """Smallest T with c T >= u + sigmas * T**H: later ruin is negligible."""
    c, h = params.drift, params.hurst

    def gap(T):
        return c * T - u - sigmas * T ** h

    hi = max(1.0, 2 * u / c)
    while gap(hi) <= 0:
        hi *= 2
    return float(optimize.brentq(gap, 1e-12, hi, xtol=1e-12))


def brownian_ruin_probability(params: ModelParams, u: float, horizon: float = math.inf) -> float:
    """Exact P(sup_{[0,T]} (B(t) - c t) > u), the H = 1/2, gamma = 0 oracle."""
    if params.hurst != 0.5 or params.gamma != 0:
        raise ConfigError("hurst", "closed form only for H = 1/2 and gamma = 0")
    c = params.drift
    if math.isinf(horizon):
        return math.exp(-2 * c * u)
    if horizon <= 0:
        return 0.0 if u >= 0 else 1.0
    s = math.sqrt(horizon)
    return norm_sf((u + c * horizon) / s) + math.exp(-2 * c * u) * norm_sf((u - c * horizon) / s)


def wilson_interval(hits: int, n: int, level: float = 0.95):
    z = stats.norm.ppf(0.5 + level / 2)
    p = hits / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if hits == 0 else max(0.0, float(centre - half))
    hi = 1.0 if hits == n else min(1.0, float(centre + half))
    return lo, hi


@dataclass(frozen=True)
class ExperimentSpec:
    params: ModelParams
    u: float
    scenario: object
    grid: GridSpec
    replications: int
    master_seed: int = 0

    def __post_init__(self):
        if not self.u >= 0:
            raise ConfigError("u", f"u must be nonnegative, got {self.u!r}")
        if int(self.replications) != self.replications or self.replications < MIN_REPLICATIONS:
            raise ConfigError("replications", f"need an integer >= {MIN_REPLICATIONS}, got {self.replications!r}")
        self.scenario.validate(self.params)
        T = self.horizon
        if self.grid.horizon < T * (1 - 1e-12):
            raise ConfigError("horizon", f"grid horizon {self.grid.horizon:.6g} is shorter than T_u = {T:.6g}")

    @classmethod
    def build(cls, params, u, scenario, n_steps, replications, master_seed=0, horizon=None):
        """Spec whose grid ends at T_u (or at the infinite-horizon proxy) unless ``horizon`` is given."""
        if horizon is None:
            horizon = realized_horizon(params, u, scenario)
        return cls(params, u, scenario, GridSpec(int(n_steps), float(horizon)), int(replications), int(master_seed))

    @property
    def horizon(self) -> float:
        """Realised T_u; the proxy horizon stands in for T_u = infinity."""
        return realized_horizon(self.params, self.u, self.scenario)

    @property
    def horizon_index(self) -> int:
        return self.grid.index_at(self.horizon)

    def to_dict(self):
        return {
            "params": asdict(self.params),
            "u": self.u,
            "scenario": self.scenario.to_dict(),
            "grid": {"n_steps": self.grid.n_steps, "horizon": self.grid.horizon},
            "replications": self.replications,
            "master_seed": self.master_seed,
            "realized_horizon": self.horizon,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(ModelParams(**d["params"]), d["u"], scenario_from_dict(d["scenario"]),
                   GridSpec(**d["grid"]), d["replications"], d["master_seed"])


def realized_horizon(params, u, scenario) -> float:
    T = scenario.horizon(params, u)
    return proxy_horizon(params, u) if math.isinf(T) else T


@dataclass
class McEstimate:
    point: float
    ci_low: float
    ci_high: float
    n: int
    n_hits: int
    method: str = "wilson"

    def __post_init__(self):
        assert self.ci_low <= self.point <= self.ci_high

    def to_dict(self):
        return asdict(self)


@dataclass
class ConditionalSample:
    kind: str
    values: np.ndarray
    scaling_used: float
    law_expected: LimitLaw
    n_replications: int = 0

    def to_dict(self):
        return {
            "kind": self.kind,
            "values": [float(v) for v in self.values],
            "scaling_used": self.scaling_used,
            "law_expected": self.law_expected.to_dict(),
            "n_replications": self.n_replications,
        }


@dataclass
class SimulationOutcomes:
    """Per-replication first-crossing index (-1 if none) and grid supremum up to T_u."""

    ruin_index: np.ndarray
    sup: np.ndarray

    @property
    def hits(self) -> int:
        return int((self.ruin_index >= 0).sum())


def _block_size(n_steps: int) -> int:
    return max(1, _BLOCK_CELLS // (n_steps + 1))


def _run_block(params, gammas, u, grid, horizon_index, master_seed, start, count, shortcut):
    streams = ReplicationStreams(master_seed)
    x = fbm_block(params.hurst, grid, master_seed, start, count, shortcut, streams)
    y = x[:, : horizon_index + 1]
    y -= params.drift * grid.times[: horizon_index + 1]
    inf = np.minimum.accumulate(y, axis=1) if any(g > 0 for g in gammas) else None
    out = {}
    for g in gammas:
        w = y if g == 0 else y - g * inf
        out[g] = first_crossing(w, u, horizon_index)
    return out


def simulate(params: ModelParams, gammas: Sequence[float], u: float, grid: GridSpec, horizon_index: int,
             replications: int, master_seed: int = 0, threads: int = 1, white_noise_shortcut: bool = True):
    """Run coupled replications for several gamma values; returns {gamma: SimulationOutcomes}."""
    gammas = [float(g) for g in gammas]
    for g in gammas:
        ModelParams(params.hurst, params.drift, g)
    block = _block_size(grid.n_steps)
    starts = list(range(0, replications, block))

    def job(start):
        return _run_block(params, gammas, u, grid, horizon_index, master_seed, start,
                          min(block, replications - start), white_noise_shortcut)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, starts))
    else:
        parts = [job(s) for s in starts]
    return {
        g: SimulationOutcomes(np.concatenate([p[g][0] for p in parts]), np.concatenate([p[g][1] for p in parts]))
        for g in gammas
    }


def _outcomes(spec: ExperimentSpec, threads: int) -> SimulationOutcomes:
    res = simulate(spec.params, [spec.params.gamma], spec.u, spec.grid, spec.horizon_index,
                   spec.replications, spec.master_seed, threads)
    return res[spec.params.gamma]


def _mc_estimate(hits: int, n: int) -> McEstimate:
    if hits == 0:
        raise InfeasibleRareEvent(n)
    lo, hi = wilson_interval(hits, n)
    return McEstimate(hits / n, lo, hi, n, hits)


def estimate_ruin_prob(spec: ExperimentSpec, threads: int = 1) -> McEstimate:
    out = _outcomes(spec, threads)
    return _mc_estimate(out.hits, spec.replications)


def sample_conditional_ruin_times(spec: ExperimentSpec, threads: int = 1) -> ConditionalSample:
    out = _outcomes(spec, threads)
    if out.hits == 0:
        raise InfeasibleRareEvent(spec.replications)
    law = ruin_time_limit_law(spec.params, spec.u, spec.scenario)
    tau = out.ruin_index[out.ruin_index >= 0] * spec.grid.step
    return ConditionalSample("ScaledRuinTime", law.statistic(tau), law.scaling, law, spec.replications)


def sample_conditional_losses(spec: ExperimentSpec, threads: int = 1) -> ConditionalSample:
    out = _outcomes(spec, threads)
    if out.hits == 0:
        raise InfeasibleRareEvent(spec.replications)
    scale = loss_limit_scaling(spec.params, spec.u, spec.scenario)
    law = LimitLaw("UnitExponential", scale)
    losses = out.sup[out.ruin_index >= 0] - spec.u
    return ConditionalSample("ScaledMaxLoss", losses * scale, scale, law, spec.replications)


def ks_statistic(sample: ConditionalSample) -> float:
    """Sup distance between the empirical CDF of the scaled sample and its limit law."""
    n = len(sample.values)
    if n < MIN_KS_OBSERVATIONS:
        raise TooFewObservations(n, MIN_KS_OBSERVATIONS)
    return float(stats.kstest(sample.values, sample.law_expected.cdf).statistic)


@dataclass
class ComparisonReport:
    title: str
    rows: list
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def _spec_meta(params, scenario, n_steps, replications, master_seed):
    return {
        "params": asdict(params),
        "scenario": scenario.to_dict(),
        "n_steps": n_steps,
        "replications": replications,
        "master_seed": master_seed,
        "note": "asymptotic (1+o(1)) errors have no stated rate; tolerances are engineering choices",
    }


def compare_mc_vs_asymptotic(params: ModelParams, u_values, scenario, n_steps: int, replications: int,
                             master_seed: int = 0, constants: Constants = Constants(),
                             threads: int = 1) -> ComparisonReport:
    """MC ruin probability against the closed-form asymptotic over a ladder of u."""
    rows = []
    for u in u_values:
        spec = ExperimentSpec.build(params, u, scenario, n_steps, replications, master_seed)
        out = _outcomes(spec, threads)
        asym = psi_gamma(params, u, scenario, constants)
        row = {"u": u, "realized_horizon": spec.horizon, "step": spec.grid.step, "n_hits": out.hits,
               "asymptotic": asym.value, "boundary_level": asym.boundary_level, "in_regime": asym.in_regime}
        if out.hits:
            est = _mc_estimate(out.hits, spec.replications)
            row.update(mc=est.point, ci_low=est.ci_low, ci_high=est.ci_high, ratio=est.point / asym.value)
        else:
            row.update(mc=0.0, ci_low=0.0, ci_high=3.0 / replications, ratio=0.0)
        if params.hurst == 0.5 and params.gamma == 0:
            T = scenario.horizon(params, u)
            exact = brownian_ruin_probability(params, u, T)
            row.update(exact=exact, ratio_exact=row["mc"] / exact)
        rows.append(row)
    return ComparisonReport("mc_vs_asymptotic", rows, _spec_meta(params, scenario, n_steps, replications, master_seed))


def gamma_ratio_ladder(params: ModelParams, u_values, scenario, n_steps: int, replications,
                       master_seed: int = 0, constants: Constants = Constants(),
                       threads: int = 1) -> ComparisonReport:
    """Coupled MC estimate of psi_gamma / psi_0 against the asymptotic ratio."""
    g = params.gamma
    if not 0 < g < 1:
        raise ConfigError("gamma", f"ratio ladder needs 0 < gamma < 1, got {g!r}")
    reps = list(replications) if isinstance(replications, (list, tuple)) else [replications] * len(u_values)
    if isinstance(scenario, Long):
        target = constants.need_piterbarg(params)
    else:
        target = m_gamma(params, scenario.s0, constants)
    rows = []
    for u, n in zip(u_values, reps):
        spec = ExperimentSpec.build(params.with_gamma(0.0), u, scenario, n_steps, n, master_seed)
        res = simulate(params, [0.0, g], u, spec.grid, spec.horizon_index, n, master_seed, threads)
        h0, hg = res[0.0].hits, res[g].hits
        if h0 == 0:
            raise InfeasibleRareEvent(n)
        ratio = hg / h0
        # coupled: gamma-hits contain the 0-hits, so Var(ratio) ~ ratio^2 (1/h0 - 1/hg)
        se = ratio * math.sqrt(max(1.0 / h0 - 1.0 / hg, 0.0))
        rows.append({"u": u, "replications": n, "hits_0": h0, "hits_gamma": hg, "ratio": ratio,
                     "ratio_se": se, "asymptotic_ratio": target, "relative_error": ratio / target - 1})
    return ComparisonReport("gamma_ratio", rows, _spec_meta(params, scenario, n_steps, reps, master_seed))


def long_horizon_phi_ladder(params: ModelParams, u: float, x_values, n_steps: int, replications: int,
                            master_seed: int = 0, threads: int = 1) -> ComparisonReport:
    """Fraction of (proxy) infinite-horizon ruins occurring before t0 u + x A(u), against Phi(x)."""
    spec = ExperimentSpec.build(params, u, Long(math.inf), n_steps, replications, master_seed)
    out = _outcomes(spec, threads)
    if out.hits == 0:
        raise InfeasibleRareEvent(replications)
    tau = out.ruin_index[out.ruin_index >= 0] * spec.grid.step
    rows = []
    for x in x_values:
        T = t0(params) * u + x * a_u(params, u)
        frac = float(np.mean(tau <= T))
        rows.append({"x": x, "T_u": T, "fraction": frac, "Phi_x": norm_cdf(x),
                     "se": math.sqrt(frac * (1 - frac) / out.hits)})
    meta = _spec_meta(params, Long(math.inf), n_steps, replications, master_seed)
    meta.update(u=u, n_hits=out.hits)
    return ComparisonReport("long_horizon_phi", rows, meta)
