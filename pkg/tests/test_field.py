
import numpy as np
import pytest

from fbmruin.errors import ConfigError, OutOfTriangle, SOutOfRange
from fbmruin.field import (
    FieldParams,
    certify_slope_negativity,
    correlation_residuals,
    derivative_identity_check,
    expansion_residuals,
    f_d,
    locate_variance_max,
    variance_yu,
    write_landscape_csv,
)


def fp(h, g, frac):
    return FieldParams.from_fraction(h, g, frac)


def test_variance_at_corner():
    p = fp(0.4, 0.3, 0.7)
    assert variance_yu(p, 0.0, 1.0) == pytest.approx(1 / (1 + p.d) ** 2)


def test_variance_decouples_at_gamma_zero():
    p = fp(0.6, 0.0, 0.5)
    for s, t in [(0.1, 0.5), (0.4, 0.5), (0.0, 0.9)]:
        assert variance_yu(p, s, t) == pytest.approx(t ** 1.2 / (1 + p.d * t) ** 2)


def test_variance_on_diagonal():
    p = fp(0.3, 0.4, 0.5)
    t = 0.7
    assert variance_yu(p, t, t) == pytest.approx((0.6 * t ** 0.3) ** 2 / (1 + p.d * 0.6 * t) ** 2)


def test_out_of_triangle():
    with pytest.raises(OutOfTriangle):
        variance_yu(fp(0.5, 0.5, 0.5), 0.6, 0.5)
    with pytest.raises(SOutOfRange):
        f_d(fp(0.5, 0.5, 0.5), 1.0)
    with pytest.raises(ConfigError):
        FieldParams.from_fraction(0.5, 1.0, 0.5)


def test_derivative_identity_example():
    p = FieldParams.from_fraction(0.6, 0.4, 0.8 / 1.5)
    assert p.d == pytest.approx(0.8)
    _, _, err = derivative_identity_check(p, 0.5)
    assert err[0] < 1e-6


@pytest.mark.parametrize("h,g,frac", [(0.15, 0.3, 0.9), (0.5, 0.7, 0.5), (0.85, 0.9, 0.2)])
def test_derivative_identity_random_points(h, g, frac):
    s = np.random.default_rng(1).uniform(0.01, 0.99, 1000)
    _, _, err = derivative_identity_check(fp(h, g, frac), s)
    assert err.max() < 1e-6


def test_f_d_negative_example():
    assert np.all(f_d(fp(0.3, 0.5, 0.9), np.linspace(1e-6, 1 - 1e-6, 1000)) < 0)


def test_slope_vanishes_without_reflection():
    p = fp(0.4, 0.0, 0.5)
    s = np.linspace(0.05, 0.95, 5)
    np.testing.assert_allclose(variance_yu(p, s, np.ones_like(s)), variance_yu(p, 0.0, 1.0))


def test_sweep_out_of_scope_reported_separately():
    with pytest.warns(UserWarning):
        r = certify_slope_negativity([0.3, 0.7], [0.5], [0.5, 1.5], 200)
    assert r.passed and len(r.out_of_scope) == 2
    assert r.evaluations == 2 * 200
    single = certify_slope_negativity([0.3], [0.5], [0.5], 50)
    s = np.linspace(1e-6, 1 - 1e-6, 50)
    assert single.max_value == pytest.approx(f_d(fp(0.3, 0.5, 0.5), s).max())


def test_variance_max_examples():
    p = FieldParams.from_fraction(0.7, 0.3, 0.5 / (0.7 / 0.3))
    assert p.d == pytest.approx(0.5)
    vm = locate_variance_max(p, 150)
    assert vm.passed and (vm.s, vm.t) == (0.0, 1.0)
    vm0 = locate_variance_max(fp(0.4, 0.0, 0.8), 120)
    assert vm0.t == 1.0 and vm0.passed
    with pytest.raises(ConfigError):
        locate_variance_max(p, 50)


def test_edge_restrictions_peak_at_one():
    p = fp(0.35, 0.6, 0.8)
    t = np.linspace(0, 1, 501)
    assert np.argmax(variance_yu(p, np.zeros_like(t), t)) == 500
    assert np.argmax(variance_yu(p, t, t)) == 500


def test_expansion_residuals_shrink():
    for h in (0.25, 0.5, 0.75):
        rep = expansion_residuals(fp(h, 0.4, 0.5))
        assert rep["passed"], rep
        assert correlation_residuals(fp(h, 0.4, 0.5))["passed"]


def test_t_direction_residual_halves_for_h_above_half():
    r = expansion_residuals(fp(0.75, 0.4, 0.5))["by_direction"]["0,1"]
    ratios = np.array(r[1:]) / np.array(r[:-1])
    np.testing.assert_allclose(ratios, 0.5, atol=0.03)


def test_residual_radius_guard():
    with pytest.raises(ConfigError):
        expansion_residuals(fp(0.5, 0.5, 0.5), radius=0.2)


def test_landscape_csv(tmp_path):
    out = tmp_path / "v.csv"
    write_landscape_csv(fp(0.5, 0.5, 0.5), out, resolution=10)
    lines = out.read_text().splitlines()
    assert lines[0] == "s,t,V2"
    assert len(lines) == 1 + 11 * 12 // 2
