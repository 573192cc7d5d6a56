import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hadamard_sm.errors import DomainError
from hadamard_sm.geometry import SpaceFormParams
from hadamard_sm.grid import build_grid, h1_inner, integrate, smooth_random_field
from hadamard_sm.maxwell import (check_comparison, invert_schrodinger,
                                 maxwell_identity_residual, schrodinger_apply, solve_phi)

SPACES = [SpaceFormParams(3, 0.0), SpaceFormParams(5, -1.0)]
seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@pytest.fixture(scope="module")
def grids():
    return [build_grid(p, None, 1000) for p in SPACES]


def test_zero_field(grids):
    for g in grids:
        assert np.all(solve_phi(g, g.zeros(), 1.0).values == 0)
        assert np.all(schrodinger_apply(g, g.zeros(), 1.0, 1.0).values == 0)


def test_coupling_errors(grids):
    g = grids[0]
    for q in (0.0, -1.0, np.nan):
        with pytest.raises(DomainError):
            solve_phi(g, g.zeros(), q)
    with pytest.raises(DomainError):
        schrodinger_apply(g, g.zeros(), 0.0, 1.0)


def test_homogeneity(grids, rng):
    for g in grids:
        u = smooth_random_field(g, rng)
        np.testing.assert_allclose(solve_phi(g, 2 * u, 1.0).values,
                                   4 * solve_phi(g, u, 1.0).values, rtol=1e-13, atol=1e-15)
        # linear in q
        np.testing.assert_allclose(solve_phi(g, u, 3.0).values,
                                   3 * solve_phi(g, u, 1.0).values, rtol=1e-13, atol=1e-15)


def test_identity_random_bump(rng):
    g = build_grid(SPACES[0], None, 2000)
    for _ in range(5):
        u = smooth_random_field(g, rng)
        phi = solve_phi(g, u, 2.0)
        lhs = h1_inner(g, phi, phi)
        rhs = 2.0 * integrate(g, phi * u * u)
        assert abs(lhs - rhs) / rhs < 1e-10
        assert maxwell_identity_residual(g, u, 2.0) < 1e-10


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_phi_nonnegative(seed):
    g = build_grid(SPACES[seed % 2], 6.0, 200)
    u = smooth_random_field(g, np.random.default_rng(seed), bumps=4)
    assert np.min(solve_phi(g, u, 1.0).values) >= 0.0


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_monotonicity(seed):
    g = build_grid(SPACES[seed % 2], 6.0, 200)
    rng = np.random.default_rng(seed)
    u, v = smooth_random_field(g, rng), smooth_random_field(g, rng)
    pu, pv = solve_phi(g, u, 1.0).values, solve_phi(g, v, 1.0).values
    assert integrate(g, (u.values * pu - v.values * pv) * (u.values - v.values)) >= -1e-12


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_convexity(seed):
    g = build_grid(SPACES[seed % 2], 6.0, 200)
    rng = np.random.default_rng(seed)
    u, v = smooth_random_field(g, rng).values, smooth_random_field(g, rng).values
    vals = []
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        w = t * u + (1 - t) * v
        vals.append(integrate(g, solve_phi(g, w, 1.0).values * w * w))
    vals = np.array(vals)
    assert np.all(vals[:-2] - 2 * vals[1:-1] + vals[2:] >= -1e-12 * max(1.0, vals.max()))


def test_comparison_equal_fields(grids, rng):
    g = grids[1]
    u = smooth_random_field(g, rng, positive=True)
    rep = check_comparison(g, u, u, 1.0, 1.0)
    assert rep.operator_hypothesis and rep.operator_holds and rep.operator_violation == 0.0
    assert rep.phi_hypothesis and rep.phi_holds and rep.phi_violation == 0.0


def test_comparison_phi_ordered_pairs():
    worst = 0.0
    rng = np.random.default_rng(7)
    for k in range(100):
        g = build_grid(SPACES[k % 2], None, 500)
        u = smooth_random_field(g, rng, positive=True)
        v = u + smooth_random_field(g, rng, positive=True)
        rep = check_comparison(g, u, v, 1.0, 1.0)
        assert rep.phi_hypothesis
        worst = max(worst, rep.phi_violation)
    assert worst <= 1e-12


def test_comparison_hypothesis_not_met(grids, rng):
    g = grids[0]
    u = smooth_random_field(g, rng, positive=True)
    rep = check_comparison(g, u + 1e-3 * np.exp(-g.r ** 2), u, 1.0, 1.0)
    assert rep.phi_holds is None and not rep.phi_hypothesis


def test_invert_schrodinger_roundtrip(grids, rng):
    for g in grids:
        u = smooth_random_field(g, rng, positive=True)
        back = invert_schrodinger(g, schrodinger_apply(g, u, 1.0, 1.0), 1.0, 1.0)
        assert np.max(np.abs(back.values - u.values)) < 1e-10


def test_comparison_operator_clause():
    """Build v with L(v) = L(u) + p, p >= 0, and check that u <= v follows."""
    rng = np.random.default_rng(11)
    for k in range(20):
        g = build_grid(SPACES[k % 2], None, 500)
        u = smooth_random_field(g, rng, positive=True)
        Lu = schrodinger_apply(g, u, 1.0, 1.0).values
        # the floor keeps L(v) - L(u) well above the Gummel tolerance
        p = 1e-2 + smooth_random_field(g, rng, positive=True).values
        v = invert_schrodinger(g, Lu + p, 1.0, 1.0)
        rep = check_comparison(g, u, v, 1.0, 1.0)
        assert rep.operator_hypothesis, k
        assert rep.operator_holds and rep.operator_violation <= 1e-12
