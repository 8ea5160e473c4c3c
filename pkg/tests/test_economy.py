import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mel.economy import (
    CostFunction, Economy, PayoffMatrix, StrategyProfile, check_ranking, cutoff_formulas,
    deltas, discount_factor, is_knife,
)
from mel.errors import UnsupportedCostError

fin = st.floats(-50, 50, allow_nan=False)
pos = st.floats(1e-3, 1e3, allow_nan=False)


def test_ranking_examples():
    assert check_ranking(PayoffMatrix(7, 6, 3, 1)).ok
    rep = check_ranking(PayoffMatrix(1, 1, 1, 1))
    assert rep.ok and all(s == 0 for s in rep.slacks.values())
    bad = check_ranking(PayoffMatrix(5, 8, 2, 1))
    assert not bad.ok and min(bad.slacks.values()) == -3


def test_deltas_examples():
    d = deltas(PayoffMatrix(7, 6, 3, 1))
    assert (d.delta, d.delta_h) == (-1, 5)
    d = deltas(PayoffMatrix(11, 10, 6, 1))
    assert (d.delta, d.delta_h) == (-4, 9)
    d = deltas(PayoffMatrix(5.3547, 5.2733, 4.7733, 3.4085))
    assert d.delta == pytest.approx(-1.2834, abs=1e-12)
    assert d.delta_h == pytest.approx(1.8648, abs=1e-12)


def test_discount_factor_examples(env_sym):
    assert discount_factor(env_sym) == 0.5
    e = Economy.affine((7, 6, 3, 1), 2, lam=1e6, r=1)
    assert discount_factor(e) == pytest.approx(0.999999, abs=1e-9)
    assert discount_factor(Economy.affine((7, 6, 3, 1), 2, lam=1, r=3)) == 0.25


def test_payoff_matrix_rejects_non_finite():
    with pytest.raises(ValueError):
        PayoffMatrix(1, math.nan, 0, 0)
    with pytest.raises(ValueError):
        PayoffMatrix(math.inf, 1, 0, 0)


def test_economy_rejects_bad_rates():
    with pytest.raises(ValueError):
        Economy.affine((7, 6, 3, 1), 2, lam=0)
    with pytest.raises(ValueError):
        Economy.affine((7, 6, 3, 1), 2, r=-1)


def test_affine_cost_and_inverse():
    c = CostFunction.affine(2)
    assert c(0.5) == 2.5 and c.deriv(0.3) == 1.0
    assert c.inverse(2.25) == 0.25
    assert c.inverse(1.0) == 0.0 and c.inverse(10.0) == 1.0
    with pytest.raises(ValueError):
        CostFunction.affine(-1)


def test_convex_cost_validation_and_inverse():
    q = CostFunction.quadratic(0.5, a=1.0, b=0.2)
    x = np.linspace(0, 1, 11)
    assert np.allclose(q.inverse(q(x)), x, atol=1e-12)
    with pytest.raises(UnsupportedCostError):
        CostFunction.convex(lambda x: 1.0 - x, lambda x: -np.ones_like(x))
    with pytest.raises(UnsupportedCostError):
        CostFunction.convex(lambda x: np.sqrt(x + 0.01), lambda x: 0.5 / np.sqrt(x + 0.01))
    with pytest.raises(UnsupportedCostError):
        CostFunction("cubic", 0.0)


def test_cutoff_formulas_examples(env_sym, env_fios):
    f = cutoff_formulas(env_sym)
    assert f.theta_sym == pytest.approx(1 / 3, abs=1e-15)
    assert f.theta_ub == 0.5 and f.theta_lb == 0.0
    assert cutoff_formulas(env_fios).theta_lb == 0.5
    with pytest.raises(UnsupportedCostError):
        cutoff_formulas(Economy(PayoffMatrix(7, 6, 3, 1), CostFunction.quadratic(1), 1, 1))


def test_strategy_profile_validation():
    with pytest.raises(ValueError):
        StrategyProfile(1.2, 0.5)
    with pytest.raises(ValueError):
        StrategyProfile(0.5, math.nan)
    with pytest.raises(ValueError):
        StrategyProfile(0.5, 0.5, (1, 1, 1))
    p = StrategyProfile(1.0, 0.25, (1, 0, 1, 1))
    assert p.accept("m", "L") == 0.0
    assert p.mirrored() == StrategyProfile(0.25, 1.0, (1, 1, 1, 0))


def test_knife_band_is_relative_above_one():
    assert is_knife(1e-9, 1.0)
    assert not is_knife(2e-9, 1.0)
    assert is_knife(5e-7, 1000.0)


@given(st.lists(fin, min_size=4, max_size=4))
def test_ranked_payoffs_have_nonnegative_delta_h(xs):
    p = PayoffMatrix(*sorted(xs, reverse=True))
    assert p.ranking_ok
    assert deltas(p).delta_h >= 0


@given(st.lists(fin, min_size=4, max_size=4), st.floats(-20, 20))
def test_deltas_shift_invariant(xs, k):
    p = PayoffMatrix(*xs)
    a, b = deltas(p), deltas(p.shifted(k))
    assert a.delta == pytest.approx(b.delta, abs=1e-9)
    assert a.delta_h == pytest.approx(b.delta_h, abs=1e-9)


@given(pos, pos, st.floats(1.01, 10))
def test_discount_factor_monotone(lam, r, f):
    base = discount_factor(Economy.affine((7, 6, 3, 1), 1, lam, r))
    assert 0 < base < 1
    assert discount_factor(Economy.affine((7, 6, 3, 1), 1, lam * f, r)) > base
    assert discount_factor(Economy.affine((7, 6, 3, 1), 1, lam, r * f)) < base
