import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hadamard_sm.errors import ConfigError, DomainError
from hadamard_sm.geometry import (SpaceFormParams, ball_volume_ratio, cotangent_coeff,
                                  metric_coeff, model_volume, static_profile_w,
                                  unit_ball_volume)

curv = st.floats(min_value=-4.0, max_value=-1e-3)
radius = st.floats(min_value=1e-3, max_value=6.0)


def test_params_validation():
    assert SpaceFormParams(3).c == 0.0
    for n in (2, 7):
        with pytest.raises(ConfigError, match="3 <= n <= 6"):
            SpaceFormParams(n, 0.0)
    with pytest.raises(ConfigError, match="c <= 0"):
        SpaceFormParams(3, 1.0)
    with pytest.raises(ConfigError):
        SpaceFormParams(3.5, 0.0)


def test_unit_ball_volume_oracle():
    for n in range(3, 7):
        assert unit_ball_volume(n) == pytest.approx(math.pi ** (n / 2) / math.gamma(n / 2 + 1), rel=1e-15)


def test_metric_coeff_examples():
    assert metric_coeff(SpaceFormParams(3, 0.0), 2.5) == 2.5
    assert metric_coeff(SpaceFormParams(3, -1.0), 0.0) == 0.0
    # series oracle for sinh(2)/2
    mp.mp.dps = 40
    series = mp.nsum(lambda k: mp.mpf(2) ** (2 * k + 1) / mp.factorial(2 * k + 1), [0, mp.inf]) / 2
    assert metric_coeff(SpaceFormParams(3, -4.0), 1.0) == pytest.approx(float(series), rel=1e-15)


def test_metric_coeff_negative_radius():
    with pytest.raises(DomainError):
        metric_coeff(SpaceFormParams(3, 0.0), -0.1)


def test_cotangent_examples():
    assert cotangent_coeff(SpaceFormParams(3, 0.0), 2.0) == 0.5
    assert abs(cotangent_coeff(SpaceFormParams(3, -1.0), 50.0) - 1.0) < 1e-10
    e2 = math.e ** 2
    assert cotangent_coeff(SpaceFormParams(3, -1.0), 1.0) == pytest.approx((e2 + 1) / (e2 - 1), rel=1e-14)
    with pytest.raises(DomainError, match="singular"):
        cotangent_coeff(SpaceFormParams(3, -1.0), 0.0)


def test_vectorized():
    p = SpaceFormParams(4, -0.5)
    r = np.linspace(0.1, 3.0, 7)
    np.testing.assert_allclose(metric_coeff(p, r), np.sinh(math.sqrt(0.5) * r) / math.sqrt(0.5))
    assert isinstance(metric_coeff(p, 1.0), float)


@given(c=curv, r=radius)
def test_strict_comparison_with_euclidean(c, r):
    p = SpaceFormParams(3, c)
    assert metric_coeff(p, r) > r
    assert cotangent_coeff(p, r) > 1.0 / r


@given(c=curv, r=radius, dr=st.floats(min_value=1e-3, max_value=1.0))
def test_metric_coeff_increasing(c, r, dr):
    p = SpaceFormParams(3, c)
    assert metric_coeff(p, r + dr) > metric_coeff(p, r)


def test_derivative_relation(rng):
    for _ in range(20):
        p = SpaceFormParams(3, -rng.uniform(0, 4))
        r = rng.uniform(0.1, 4.0)
        dr = 1e-6 * r
        fd = (metric_coeff(p, r + dr) - metric_coeff(p, r - dr)) / (2 * dr)
        assert fd == pytest.approx(metric_coeff(p, r) * cotangent_coeff(p, r), rel=1e-6)


def test_model_volume_examples():
    assert model_volume(SpaceFormParams(3, 0.0), 1.0) == pytest.approx(4 * math.pi / 3, rel=1e-13)
    for n in (3, 6):
        assert model_volume(SpaceFormParams(n, -2.0), 0.0) == 0.0
    # closed form pi (sinh 2 - 2), itself checked against adaptive quadrature
    closed = math.pi * (math.sinh(2.0) - 2.0)
    mp.mp.dps = 30
    quad = 4 * mp.pi * mp.quad(lambda t: mp.sinh(t) ** 2, [0, 1])
    assert closed == pytest.approx(float(quad), rel=1e-14)
    assert abs(model_volume(SpaceFormParams(3, -1.0), 1.0) - closed) < 1e-10
    with pytest.raises(DomainError):
        model_volume(SpaceFormParams(3, 0.0), -1.0)


def test_volume_monotone_and_above_euclidean():
    cs = np.linspace(-2.0, 0.0, 9)
    for n in (3, 5):
        for rho in (0.5, 2.0):
            v = np.array([model_volume(SpaceFormParams(n, c), rho) for c in cs])
            assert np.all(np.diff(v) <= 0)
            assert np.all(v >= unit_ball_volume(n) * rho ** n * (1 - 1e-12))


def test_static_profile_euclidean():
    r = np.array([0.0, 0.3, 1.0, 2.5])
    np.testing.assert_allclose(static_profile_w(SpaceFormParams(3, 0.0), r), r ** 2 / 6, rtol=1e-12, atol=0)
    assert static_profile_w(SpaceFormParams(5, -1.0), 0.0) == 0.0


def test_static_profile_hyperbolic_oracle():
    mp.mp.dps = 30
    # inner integral of sinh^2 in closed form, outer by adaptive quadrature
    ref = mp.quad(lambda s: (mp.sinh(2 * s) / 4 - s / 2) / mp.sinh(s) ** 2, [0, 1])
    assert static_profile_w(SpaceFormParams(3, -1.0), 1.0) == pytest.approx(float(ref), rel=1e-10)


def test_static_profile_nondecreasing():
    r = np.linspace(0, 3, 13)
    w = static_profile_w(SpaceFormParams(4, -0.7), r)
    assert np.all(np.diff(w) > 0)


def test_volume_ratio_model_space():
    p = SpaceFormParams(3, -1.0)
    tau = np.linspace(0.1, 5.0, 50)
    ratio = ball_volume_ratio(p, p, tau)
    assert np.max(np.abs(ratio - 1.0)) < 1e-8
    # a more curved ambient space has more volume than the flatter model
    bigger = ball_volume_ratio(SpaceFormParams(3, -0.5), p, tau)
    assert np.all(bigger > 1.0) and np.all(np.diff(bigger) > 0)
    with pytest.raises(ConfigError):
        ball_volume_ratio(SpaceFormParams(4, -1.0), p, tau)
