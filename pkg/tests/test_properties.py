"""Property-based checks of the pure building blocks."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fbmruin.asymptotics import Constants, LimitLaw, c0_of, d_h, d_h_gamma, m_gamma, norm_cdf, norm_sf, t0
from fbmruin.fbm import GridSpec, fbm_path_from_fgn, fgn_covariance, fgn_from_normals
from fbmruin.field import FieldParams, f_d, variance_yu
from fbmruin.montecarlo import wilson_interval
from fbmruin.reflection import ModelParams, first_crossing, reflect

hursts = st.floats(0.02, 0.98)
gammas = st.floats(0.0, 1.0)
finite = st.floats(-50, 50, allow_nan=False)


def y_paths(min_size=2, max_size=40):
    return arrays(float, st.integers(min_size, max_size), elements=finite).map(lambda a: np.r_[0.0, a[1:]])


@given(y_paths(), gammas, gammas)
def test_reflection_monotone_in_gamma(y, g1, g2):
    lo, hi = sorted((g1, g2))
    w_lo, inf = reflect(y, lo)
    w_hi, _ = reflect(y, hi)
    assert np.all(w_hi >= w_lo - 1e-12)
    assert np.all(np.diff(inf) <= 0) and np.all(inf <= 0)


@given(y_paths())
def test_reflection_endpoints(y):
    w0, _ = reflect(y, 0.0)
    w1, _ = reflect(y, 1.0)
    np.testing.assert_array_equal(w0, y)
    assert np.all(w1 >= 0) and w1[0] == 0


@given(y_paths(), st.floats(0, 20))
def test_first_crossing_is_first(y, u):
    idx, sup = first_crossing(y, u, len(y) - 1)
    if idx < 0:
        assert sup <= u
    else:
        assert y[idx] > u and np.all(y[:idx] <= u)


@given(hursts, st.integers(0, 500))
def test_fgn_covariance_bounded_by_variance(h, lag):
    assert abs(fgn_covariance(h, lag)) <= fgn_covariance(h, 0) + 1e-12


@settings(max_examples=30, deadline=None)
@given(hursts, st.integers(2, 64), st.integers(0, 2 ** 32))
def test_spectral_map_is_linear(h, n, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(2 * n), rng.standard_normal(2 * n)
    np.testing.assert_allclose(fgn_from_normals(h, a + b), fgn_from_normals(h, a) + fgn_from_normals(h, b),
                               atol=1e-9)


@given(arrays(float, st.integers(2, 30), elements=finite))
def test_path_is_cumsum(inc):
    p = fbm_path_from_fgn(inc, GridSpec(inc.size, 1.0), 0.5)
    np.testing.assert_allclose(p.values[1:], np.cumsum(inc))


@given(hursts, st.floats(0.1, 5), st.floats(0.0, 0.999))
def test_c0_below_hurst(h, c, frac):
    p = ModelParams(h, c)
    assert c0_of(c, frac * t0(p), h) < h


@given(hursts, st.floats(0.1, 5), st.floats(0.01, 0.99), st.floats(0.001, 0.999),
       st.floats(0.1, 3), st.floats(1.0, 3))
def test_direct_prefactor_factorises(h, c, g, frac, pick, pit):
    p = ModelParams(h, c, g)
    s0 = frac * t0(p)
    k = Constants(pick, pit)
    assert math.isclose(d_h_gamma(p, s0, k), d_h(p, s0, k) * m_gamma(p, s0, k), rel_tol=1e-12)


@given(st.floats(-30, 30))
def test_normal_tail_symmetry(x):
    assert math.isclose(norm_sf(x) + norm_cdf(x), 1.0, rel_tol=1e-14)


@given(st.floats(0.1, 10), st.floats(-3, 3), st.floats(-5, 5))
def test_truncated_cdf_monotone(scale, x, y):
    law = LimitLaw("TruncatedNormal", scale, x)
    assert 0 <= law.cdf(y) <= law.cdf(y + 0.1) <= 1


@given(st.integers(1, 500), st.data())
def test_wilson_contains_point(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(k, n)
    assert 0 <= lo <= k / n <= hi <= 1


@given(hursts, st.floats(0.0, 0.99), st.floats(0.0, 0.999), st.floats(0, 1), st.floats(0, 1))
def test_corner_is_variance_max(h, g, frac, a, b):
    fp = FieldParams.from_fraction(h, g, frac)
    s, t = sorted((a, b))
    assert variance_yu(fp, s, t) <= variance_yu(fp, 0.0, 1.0) * (1 + 1e-12)


@given(hursts, st.floats(0.01, 0.99), st.floats(0.01, 0.999), st.floats(1e-6, 1 - 1e-6))
def test_slope_negative_in_scope(h, g, frac, s):
    assert f_d(FieldParams.from_fraction(h, g, frac), s) < 0
