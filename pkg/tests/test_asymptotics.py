import json
import math

import numpy as np
import pytest

from fbmruin.asymptotics import (
    REGIME_LEVEL,
    AsymptoticEstimate,
    ClosedFormConstants,
    Constants,
    ExpansionSpec,
    Intermediate,
    LimitLaw,
    Long,
    Short,
    TableConstants,
    a_u,
    boundary_level,
    c0_of,
    d_h,
    d_h_gamma,
    log_norm_sf,
    loss_limit_scaling,
    m_gamma,
    m_gamma_one,
    norm_cdf,
    norm_sf,
    piterbarg_field_asymptotic,
    psi0_finite,
    psi0_infinite,
    psi_gamma,
    ruin_time_limit_law,
    scenario_from_dict,
    t0,
)
from fbmruin.errors import BadExpansionSpec, ConfigError, GammaOutOfRange, MissingConstant, RegimeMismatch, S0OutOfRange
from fbmruin.field import FieldParams, field_expansion_spec
from fbmruin.reflection import ModelParams

BM = ModelParams(0.5, 1.0)


def test_normal_tail_accuracy():
    from scipy import stats

    for x in (-3.0, 0.0, 1.0, 5.0, 7.9, 8.1, 20.0, 37.0):
        assert norm_sf(x) == pytest.approx(stats.norm.sf(x), rel=1e-13)
    assert norm_sf(math.inf) == 0.0 and norm_cdf(math.inf) == 1.0
    assert log_norm_sf(60.0) == pytest.approx(stats.norm.logsf(60.0), rel=1e-12)


@pytest.mark.parametrize("h,c,expected", [(0.5, 1.0, 1.0), (0.75, 3.0, 1.0)])
def test_t0(h, c, expected):
    assert t0(ModelParams(h, c)) == pytest.approx(expected)


@pytest.mark.parametrize("c,u,expected", [(1.0, 4.0, 2.0), (1.0, 1.0, 1.0), (2.0, 4.0, 1 / math.sqrt(2))])
def test_a_u(c, u, expected):
    # the last value is the direct substitution: 0.5 * 2 / (0.5 * 2**1.5)
    assert a_u(ModelParams(0.5, c), u) == pytest.approx(expected)


@pytest.mark.parametrize("c,s0,expected", [(1.0, 0.0, 0.0), (1.0, 0.5, 1 / 3), (2.0, 0.2, 2 / 7)])
def test_c0(c, s0, expected):
    assert c0_of(c, s0) == pytest.approx(expected)


def test_c0_range_check():
    with pytest.raises(S0OutOfRange):
        c0_of(1.0, 1.0, 0.5)
    with pytest.raises(S0OutOfRange):
        Intermediate(1.5).validate(BM)


def test_d_h_cases():
    assert d_h(BM, 0.5) == pytest.approx(4.0)
    assert d_h(ModelParams(0.75, 2.0), 0.1) == 1.0
    assert d_h(ModelParams(0.25, 1.0), 0.0, Constants(pickands=0.37)) == pytest.approx(0.37)
    with pytest.raises(MissingConstant):
        d_h(ModelParams(0.25, 1.0), 0.0)


def test_m_gamma_cases():
    assert m_gamma(BM.with_gamma(0.5), 0.5) == pytest.approx(1.6)
    assert m_gamma(ModelParams(0.75, 1.0, 0.3), 0.2) == 1.0
    assert m_gamma(BM.with_gamma(1e-9), 0.5) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(GammaOutOfRange):
        m_gamma(BM, 0.5)


def test_m_gamma_one_cases():
    assert m_gamma_one(BM.with_gamma(1.0), 0.5) == pytest.approx(4.0)
    assert m_gamma_one(ModelParams(0.8, 1.0, 1.0), 0.3) == 1.0
    assert m_gamma_one(ModelParams(0.25, 1.0, 1.0), 0.0, Constants(pickands=0.6)) == pytest.approx(0.6)


def test_psi0_finite_brownian_intermediate():
    est = psi0_finite(BM, 9.0, Intermediate(0.5))
    level = 13.5 / math.sqrt(4.5)
    assert est.boundary_level == pytest.approx(level)
    assert est.value == pytest.approx(4.0 * norm_sf(level), rel=1e-14)
    assert est.in_regime


def test_psi0_finite_h_above_half_has_no_prefactor():
    p = ModelParams(0.75, 1.0)
    est = psi0_finite(p, 5.0, Short(2.0, 0.0))
    assert est.value == pytest.approx(norm_sf(boundary_level(p, 5.0, 2.0)))


def test_psi0_finite_vanishes_for_tiny_horizon():
    assert psi0_finite(BM, 1.0, Short(1e-6, 0.0)).value < 1e-300


def test_psi0_finite_rejects_long():
    with pytest.raises(RegimeMismatch):
        psi0_finite(BM, 1.0, Long())


def test_low_level_flagged_not_clamped():
    est = psi0_finite(BM, 0.1, Short(1.0, 0.0))
    assert est.boundary_level < REGIME_LEVEL and not est.in_regime


def test_psi0_infinite_level_and_monotone():
    est = psi0_infinite(ModelParams(0.5, 2.0), 1.0)
    assert est.boundary_level == pytest.approx(2 * math.sqrt(2))
    vals = [psi0_infinite(BM, u).value for u in (1, 2, 3, 4)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_psi0_infinite_brownian_reduction():
    devs = [abs(psi0_infinite(BM, u).value * math.exp(2 * u) - 1) for u in (4, 6, 8)]
    assert devs[1] < 0.05
    assert devs[0] > devs[1] > devs[2]


def test_psi_gamma_reductions():
    sc = Intermediate(0.5)
    base = psi0_finite(BM, 9.0, sc).value
    assert psi_gamma(BM, 9.0, sc).value == base
    assert psi_gamma(BM.with_gamma(0.5), 9.0, sc).value == pytest.approx(1.6 * base, rel=1e-14)
    g = BM.with_gamma(0.3)
    half = psi_gamma(g, 3.0, Long(0.0)).value
    full = psi_gamma(g, 3.0, Long()).value
    assert half == pytest.approx(0.5 * full, rel=1e-14)
    assert full == pytest.approx(psi0_infinite(BM, 3.0).value / 0.7, rel=1e-14)


def test_psi_gamma_monotone_in_x():
    g = BM.with_gamma(0.3)
    vals = [psi_gamma(g, 3.0, Long(x)).value for x in (-2, -1, 0, 1, 2)] + [psi_gamma(g, 3.0, Long()).value]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_psi_gamma_full_reflection_long_unsupported():
    with pytest.raises(RegimeMismatch):
        psi_gamma(BM.with_gamma(1.0), 2.0, Long())


def test_psi_gamma_full_reflection_finite():
    sc = Intermediate(0.5)
    assert psi_gamma(BM.with_gamma(1.0), 9.0, sc).value == pytest.approx(4 * psi0_finite(BM, 9.0, sc).value)


def test_limit_laws():
    law = ruin_time_limit_law(BM.with_gamma(0.4), 7.0, Intermediate(0.5))
    assert law.kind == "UnitExponential" and law.scaling == pytest.approx(1.5)
    assert law.statistic(3.5) == pytest.approx(0.0)
    long = ruin_time_limit_law(BM.with_gamma(0.4), 7.0, Long())
    assert long.kind == "TruncatedNormal" and math.isinf(long.truncation_x)
    assert long.cdf(0.0) == pytest.approx(0.5)
    short = ruin_time_limit_law(ModelParams(0.7, 1.0, 0.2), 4.0, Short(0.5, 0.0))
    assert short.scaling == pytest.approx(0.7 * 16 / 0.5 ** 2.4)
    assert short.statistic(0.5) == 0.0
    with pytest.raises(GammaOutOfRange):
        ruin_time_limit_law(BM.with_gamma(1.0), 7.0, Long())


def test_truncated_normal_cdf():
    law = LimitLaw("TruncatedNormal", 1.0, 0.5)
    assert law.cdf(0.5) == pytest.approx(1.0)
    assert law.cdf(0.0) == pytest.approx(0.5 / norm_cdf(0.5))
    assert law.cdf(3.0) == 1.0


def test_limit_law_round_trip():
    for law in (LimitLaw("TruncatedNormal", 2.0, math.inf, 1.0, 1), LimitLaw("UnitExponential", 3.0, None, 4.0, -1)):
        assert LimitLaw.from_dict(json.loads(json.dumps(law.to_dict()))) == law


def test_loss_scalings():
    assert loss_limit_scaling(BM, 9.0, Intermediate(0.5)) == pytest.approx(3.0)
    for u in (0.5, 3.0):
        assert loss_limit_scaling(BM, u, Long()) == pytest.approx(2.0)


def test_scenario_round_trip():
    for sc in (Short(0.5, 0.3), Intermediate(0.2), Long(1.5), Long()):
        assert scenario_from_dict(json.loads(json.dumps(sc.to_dict()))) == sc
    with pytest.raises(ConfigError):
        Short(1.0, 1.0)


def test_estimate_json_round_trip():
    est = psi_gamma(BM.with_gamma(0.5), 9.0, Intermediate(0.5))
    back = AsymptoticEstimate.from_dict(json.loads(est.to_json()))
    assert back == est


def test_field_theorem_both_factors_trivial():
    spec = ExpansionSpec((1.0, 2.0), (0.5, 0.5), (1.0, 1.0), (1.0, 1.0), 0.0, 1.0)
    assert piterbarg_field_asymptotic(spec, 3.0, ClosedFormConstants()) == norm_sf(3.0)


def test_field_theorem_rejects_bad_spec():
    with pytest.raises(BadExpansionSpec):
        piterbarg_field_asymptotic(ExpansionSpec((1.0, -1.0), (1, 1), (1, 1), (1, 1), 0, 1), 3.0, ClosedFormConstants())
    with pytest.raises(BadExpansionSpec):
        piterbarg_field_asymptotic(ExpansionSpec((1.0, 1.0), (1, 1), (1, 1), (1, 2.5), 0, 1), 3.0, ClosedFormConstants())


def test_interior_maximiser_uses_two_sided_constant():
    spec = ExpansionSpec((1.0, 1.0), (1.0, 0.5), (1.0, 1.0), (1.0, 1.0), 0.5, 1.0)
    val = piterbarg_field_asymptotic(spec, 4.0, ClosedFormConstants())
    assert val == pytest.approx((1 + 2 - 1 / 3) * norm_sf(4.0))


def _random_points(rng, n, case):
    for _ in range(n):
        h = {"low": rng.uniform(0.1, 0.45), "half": 0.5, "high": rng.uniform(0.55, 0.9)}[case]
        c = rng.uniform(0.3, 3.0)
        g = rng.uniform(0.05, 0.95)
        s0 = rng.uniform(0.01, 0.95) * h / (c * (1 - h))
        yield ModelParams(h, c, g), s0


@pytest.mark.parametrize("case", ["low", "half", "high"])
def test_direct_prefactor_equals_product(case):
    rng = np.random.default_rng(7)
    for params, s0 in _random_points(rng, 20, case):
        consts = Constants(pickands=rng.uniform(0.3, 2), piterbarg=rng.uniform(1, 3))
        assert d_h_gamma(params, s0, consts) == pytest.approx(
            d_h(params, s0, consts) * m_gamma(params, s0, consts), rel=1e-12)
        sc = Intermediate(s0)
        est = psi_gamma(params, 8.0, sc, consts)
        assert est.constants_used["direct_value"] == pytest.approx(est.value, rel=1e-12)


@pytest.mark.parametrize("case", ["low", "half", "high"])
def test_field_theorem_reproduces_direct_prefactor(case):
    rng = np.random.default_rng(11)
    for params, s0 in _random_points(rng, 20, case):
        h, g = params.hurst, params.gamma
        spec = field_expansion_spec(FieldParams(params, params.drift * s0))
        level = 4.0
        if case == "low":
            pick, pit = rng.uniform(0.3, 2), rng.uniform(1, 3)
            table = TableConstants(pickands={2 * h: pick}, piterbarg={(2 * h, (1 - g) / g): pit})
            consts = Constants(pickands=pick, piterbarg=pit)
            expected = d_h_gamma(params, s0, consts) * level ** ((1 - 2 * h) / h)
        else:
            table = ClosedFormConstants()
            expected = d_h_gamma(params, s0)
        got = piterbarg_field_asymptotic(spec, level, table) / norm_sf(level)
        assert got == pytest.approx(expected, rel=1e-12)


def test_table_constants_missing():
    with pytest.raises(MissingConstant):
        TableConstants().pickands(0.5)
