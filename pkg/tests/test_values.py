import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mel.economy import Economy, PayoffMatrix, StrategyProfile
from mel.values import (
    fractional_form, match_rate, profile_values, value_am, value_arrays, value_general, value_pam,
)

from conftest import affine

prob = st.floats(0, 1)


@st.composite
def economies(draw):
    x = sorted(draw(st.lists(st.floats(0, 20), min_size=4, max_size=4)), reverse=True)
    lam = draw(st.floats(0.05, 20))
    r = draw(st.floats(0.05, 20))
    return Economy.affine(PayoffMatrix(*x), draw(st.floats(0, 3)), lam, r)


def test_value_general_examples(env_sym):
    assert value_general(env_sym, "H", 0.3, 1.0, (0.2, 0.7)) == pytest.approx(3.5)
    assert value_general(env_sym, "L", 1.0, 1.0, (0.0, 1.0)) == 0.0
    assert value_general(env_sym, "H", 1.0, 1 / 3) == pytest.approx(19 / 6, abs=1e-12)


def test_value_general_rejects_bad_input(env_sym):
    with pytest.raises(ValueError):
        value_general(env_sym, "H", float("nan"), 0.5)
    with pytest.raises(ValueError):
        value_general(env_sym, "L", 1.0, 1.5)
    with pytest.raises(ValueError):
        value_general(env_sym, "M", 1.0, 0.5)


def test_value_am_examples(env_sym):
    assert value_am(env_sym, "H", 1 / 3) == pytest.approx(19 / 6, abs=1e-12)
    assert value_am(env_sym, "L", 0.0) == 0.5
    e = affine((5.3547, 5.2733, 4.7733, 3.4085), 0.25)
    assert value_am(e, "H", 0.4157) == pytest.approx(0.5 * (0.4157 * 5.3547 + 0.5843 * 5.2733), abs=1e-12)
    assert value_am(e, "H", 0.4157) == pytest.approx(2.654, abs=5e-4)


def test_value_pam_examples(env_sym):
    assert value_pam(env_sym, "H", 0.0) == 0.0
    assert value_pam(env_sym, "H", 1.0) == 3.5
    assert value_pam(env_sym, "L", 1.0) == 0.0


def test_match_rate_and_profile_values(env_fios):
    prof = StrategyProfile(1.0, 0.5, (1.0, 0.0, 1.0, 0.0))
    assert match_rate(env_fios, prof, "w", "L") == 1.0
    assert match_rate(env_fios, prof, "m", "H") == 1.0
    q = profile_values(env_fios, prof, "w")
    assert q.v_h - q.v_l == pytest.approx(2.5)


@given(economies(), prob)
def test_general_equals_am_with_full_acceptance(e, th):
    for s in ("H", "L"):
        assert value_general(e, s, 1.0, th, (1.0, 1.0)) == pytest.approx(value_am(e, s, th), abs=1e-12)


@given(economies(), prob)
def test_general_equals_pam_under_assortative_acceptance(e, th):
    assert value_general(e, "H", 0.0, th, (0.0, 1.0)) == pytest.approx(value_pam(e, "H", th), abs=1e-12)
    assert value_general(e, "L", 1.0, th, (0.0, 1.0)) == pytest.approx(value_pam(e, "L", th), abs=1e-12)


@given(economies(), prob, prob)
def test_regime_values_monotone_in_cutoff(e, a, b):
    lo, hi = min(a, b), max(a, b)
    assert value_am(e, "H", lo) <= value_am(e, "H", hi) + 1e-12
    assert value_pam(e, "H", lo) <= value_pam(e, "H", hi) + 1e-12
    assert value_pam(e, "L", lo) >= value_pam(e, "L", hi) - 1e-12


@given(economies(), st.sampled_from("HL"), prob, prob, prob, prob)
def test_acceptance_monotonicity_follows_bc_minus_ad(e, s, al, th, ah, alo):
    opp = (ah, alo)
    a, b, c, d = fractional_form(e, s, th, opp)
    sign = b * c - a * d
    h = 1e-6
    x0 = min(al, 1 - h)
    dv = value_general(e, s, x0 + h, th, opp) - value_general(e, s, x0, th, opp)
    scale = 1e-9 * max(1.0, abs(a), abs(b), abs(c), abs(d)) ** 2
    if sign > scale:
        assert dv >= -1e-12
    elif sign < -scale:
        assert dv <= 1e-12


@given(economies(), prob)
def test_high_skill_value_dominates_under_ranking(e, th):
    assert value_am(e, "H", th) >= value_am(e, "L", th) - 1e-12
    assert value_am(e, "L", th) >= 0


def test_value_arrays_matches_scalar(env_fios):
    th = np.linspace(0, 1, 7)
    vh, vl = value_arrays(env_fios.payoffs.as_tuple(), 1.0, 1.0, th, 1.0, 0.0, 1.0, 0.5)
    for t, a, b in zip(th, vh, vl):
        assert a == pytest.approx(value_general(env_fios, "H", 1.0, t, (1.0, 0.5)))
        assert b == pytest.approx(value_general(env_fios, "L", 0.0, t, (1.0, 0.5)))
