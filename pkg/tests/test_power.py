"""Closed-form per-subcarrier power: optimality, boundaries, conventions."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from secrelay.dual import (
    candidate_surplus,
    closed_form_power,
    optimal_power,
    zero_power_surplus,
)
from secrelay.secrecy import LinkGains

from oracles import grid_argmax, priced_surplus_raw, stationarity_residual

gain = st.floats(min_value=1e-2, max_value=50.0,
                 allow_nan=False, allow_infinity=False)
price = st.floats(min_value=1e-3, max_value=2.0,
                  allow_nan=False, allow_infinity=False)


def test_closed_form_matches_small_grid():
    rng = np.random.default_rng(17)
    a, b_raw, c_raw = rng.exponential(1.0, (3, 200))
    b = np.maximum(b_raw, c_raw) + 1e-6
    c = np.minimum(b_raw, c_raw)
    q = rng.uniform(0.1, 4.0, 200)
    lam = rng.uniform(0.05, 1.0, 200)
    p = closed_form_power(a, b, c, q, lam)
    p_grid, v_grid = grid_argmax(a, b, c, q, lam)
    np.testing.assert_allclose(p, p_grid, atol=2e-4)
    v = priced_surplus_raw(a, b, c, q, lam, p)
    assert (v >= v_grid - 1e-6).all()


@given(a=gain, b=gain, c=gain, q=gain, lam=price)
@settings(max_examples=200)
def test_root_is_stationary_or_zero(a, b, c, q, lam):
    b, c = max(b, c) + 1e-6, min(b, c)
    p, coeffs = optimal_power(LinkGains(a=a, b=b, c=c), q, lam)
    assert p >= 0.0
    if p > 0:
        res = float(stationarity_residual(a, b, c, q, lam, p))
        assert res < 1e-8
        assert coeffs.C < 0  # interior root exists iff C < 0
        assert coeffs.zeta_at_root == pytest.approx(1.0 + a * p)
    else:
        assert coeffs.C >= 0


def test_degenerate_links_get_zero_power():
    assert closed_form_power(1.0, 1.0, 2.0, 1.0, 0.1) == 0.0  # b < c
    assert closed_form_power(1.0, 2.0, 2.0, 1.0, 0.1) == 0.0  # b = c
    assert closed_form_power(0.0, 2.0, 1.0, 1.0, 0.1) == 0.0  # no first hop
    assert closed_form_power(1.0, 2.0, 1.0, 0.0, 0.1) == 0.0  # silent relay


def test_high_price_switches_power_off():
    gains = LinkGains(a=1.0, b=3.0, c=1.0)
    p_cheap, _ = optimal_power(gains, 1.0, 0.01)
    p_dear, _ = optimal_power(gains, 1.0, 1e6)
    assert p_cheap > 0.0
    assert p_dear == 0.0


def test_power_decreases_with_price():
    gains = LinkGains(a=0.8, b=4.0, c=0.5)
    prices = np.array([0.01, 0.05, 0.2, 0.5, 1.0])
    powers = [optimal_power(gains, 2.0, lam)[0] for lam in prices]
    assert all(x >= y - 1e-12 for x, y in zip(powers, powers[1:]))


def test_eavesdropper_free_limit_is_regular():
    # c = 0 must go through the same quadratic without division blowups
    p, _ = optimal_power(LinkGains(a=1.0, b=3.0, c=0.0), 1.0, 0.05)
    assert np.isfinite(p) and p > 0
    p_grid, _ = grid_argmax(np.array([1.0]), np.array([3.0]),
                            np.array([1e-12]), np.array([1.0]), 0.05)
    assert p == pytest.approx(float(p_grid[0]), abs=2e-4)


def test_argument_validation():
    gains = LinkGains(a=1.0, b=2.0, c=1.0)
    with pytest.raises(ValueError):
        optimal_power(gains, -1.0, 0.1)
    with pytest.raises(ValueError):
        optimal_power(gains, 1.0, 0.0)
    with pytest.raises(ValueError):
        optimal_power(gains, np.inf, 0.1)
    with pytest.raises(ValueError):
        LinkGains(a=-1.0, b=2.0, c=1.0)


def test_closed_form_broadcasts():
    a = np.ones((4, 3, 1))
    b = np.full((1, 1, 2), 3.0)
    p = closed_form_power(a, b, 0.5, 1.0, 0.1)
    assert p.shape == (4, 3, 2)
    assert (p > 0).all()


def test_surplus_conventions():
    a, b, c, q = 1.0, 3.0, 1.0, 2.0
    assert candidate_surplus(a, b, c, q, 0.5, 0.0) == 0.0
    # at positive power the surplus is the log expression minus the price
    p = 1.5
    want = priced_surplus_raw(a, b, c, q, 0.5, p)
    assert candidate_surplus(a, b, c, q, 0.5, p) == pytest.approx(float(want))


def test_surplus_approaches_zero_power_level():
    # psi(p) -> ln(b(1+qc)/(c(1+qb))) as p -> 0+; the supremum keeps that level
    a, b, c, q = 1.0, 3.0, 1.0, 2.0
    level = float(zero_power_surplus(b, c, q))
    assert level == pytest.approx(np.log(3.0 * 3.0 / 7.0))
    crept = float(candidate_surplus(a, b, c, q, 0.5, 1e-9))
    assert crept == pytest.approx(level, abs=1e-6)


def test_zero_power_level_cases():
    assert float(zero_power_surplus(3.0, 1.0, 2.0)) > 0
    assert float(zero_power_surplus(1.0, 3.0, 2.0)) == 0.0  # degraded: clamped
    assert float(zero_power_surplus(3.0, 0.0, 2.0)) == pytest.approx(np.log(7.0))
    assert float(zero_power_surplus(0.0, 0.0, 2.0)) == 0.0
    # the level falls as the relay spends more (chunk shrinks with q)
    qs = np.array([0.1, 0.5, 1.0, 5.0, 25.0])
    levels = zero_power_surplus(3.0, 1.0, qs)
    assert (np.diff(levels) < 0).all()
