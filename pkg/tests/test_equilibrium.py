import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mel.economy import CostFunction, Economy, PayoffMatrix, StrategyProfile, cutoff_formulas
from mel.equilibrium import (
    best_response_map, build_report, canonical, classify_pattern, enumerate_equilibria,
    interior_monotonicity_bound, interior_roots, pam_fast_fail, pareto_verdict, solve_fios,
    solve_interior_asymmetric, solve_nios, solve_pam, solve_pam_all, solve_symmetric_am,
    solve_symmetric_am_all,
)
from mel.statics import baseline

from conftest import affine


@st.composite
def economies(draw, supermodular=None):
    x = sorted(draw(st.lists(st.floats(0, 10), min_size=4, max_size=4)), reverse=True)
    p = PayoffMatrix(*x)
    d = p.phi_hh + p.phi_ll - p.phi_hl - p.phi_lh
    if supermodular is True:
        p = PayoffMatrix(p.phi_hh + max(0.0, -d), p.phi_hl, p.phi_lh, p.phi_ll)
    elif supermodular is False and d > 0:
        p = PayoffMatrix(p.phi_hl, p.phi_hl, p.phi_lh, p.phi_ll)
    lam = math.exp(draw(st.floats(-1.5, 1.5)))
    r = math.exp(draw(st.floats(-1.5, 1.5)))
    return Economy.affine(p, draw(st.floats(0, 3)), lam, r)


# ---------------------------------------------------------------- symmetric


def test_symmetric_unique_example(env_sym):
    rep = solve_symmetric_am(env_sym)
    assert rep.kind == "SymmetricAM"
    assert rep.theta[0] == pytest.approx(1 / 3, abs=1e-9) and rep.theta[0] == rep.theta[1]
    assert rep.alpha == (1.0, 1.0, 1.0, 1.0) and not rep.knife_edge


def test_symmetric_household_t3():
    e = baseline().economy(3.0)
    rep = solve_symmetric_am(e)
    assert rep.kind == "SymmetricAM"
    assert rep.theta[0] == pytest.approx(0.4157, abs=5e-4)
    p = e.payoffs
    lhs = e.lam * rep.theta[0] * (p.phi_lh - p.phi_ll)
    assert lhs == pytest.approx(0.5673, abs=5e-4) and e.r * p.phi_ll == pytest.approx(3.4085, abs=5e-4)
    # residuals are scaled by (r + lam)
    assert rep.ic_residuals["AM:L-L-m"] == pytest.approx(rep.ic_residuals["AM:L-L-w"])
    assert rep.ic_residuals["AM:L-L-m"] > 0


def test_symmetric_household_t65_violates_ll():
    e = baseline().economy(6.5)
    rep = solve_symmetric_am(e)
    assert rep.kind == "None"
    assert rep.violates("AM:L-L")
    p = e.payoffs
    th = cutoff_formulas(e).theta_sym
    assert e.lam * th * (p.phi_lh - p.phi_ll) == pytest.approx(3.6838, abs=5e-4)


def test_symmetric_fails_for_fios_env(env_fios):
    reps = solve_symmetric_am_all(env_fios)
    assert [r.theta[0] for r in reps] == [pytest.approx(5 / 6)]
    assert reps[0].kind == "None" and reps[0].violates("AM:L-L")


def test_symmetric_boundary_candidates():
    # G(0) <= 0: nobody invests
    rep = solve_symmetric_am(affine((3, 2.5, 2.2, 2), 3))
    assert rep.kind == "SymmetricAM" and rep.theta == (0.0, 0.0)


# ---------------------------------------------------------------- FIOS / NIOS


def test_fios_examples(env_fios):
    rep = solve_fios(env_fios)
    assert rep.kind == "FIOS" and rep.theta == (1.0, pytest.approx(0.5, abs=1e-12))
    assert ("m", "L") in rep.off_path and rep.on_path_note
    rep = solve_fios(baseline().economy(6.5))
    assert rep.kind == "FIOS" and rep.theta[1] == pytest.approx(0.0407, abs=5e-4)


def test_fios_env_sym_needs_off_path_rejection(env_sym):
    rep = solve_fios(env_sym)
    # theta_lb = 0; an accepted low-skill deviant earns lr*Delta_h = 2.5 < 1 + c
    assert rep.theta == (1.0, 0.0)
    assert rep.ic_residuals["FIOS:Invest-m-accepted"] == pytest.approx(-0.5)
    assert rep.off_path_sustained
    es = enumerate_equilibria(env_sym)
    assert es.kinds() == ["SymmetricAM"]
    assert es.knife_edges == []
    assert [r.kind for r in es.off_path_sustained] == ["FIOS"]


def test_off_path_sustained_fios_kept_apart():
    # 1 + lr*Delta < 0 here: a NIOS exists, and the (1,0) corner survives only
    # because women reject a low-skill male deviant
    e = affine((9.3336, 8.8693, 8.3568, 4.4591), 2.1903, 0.81228, 0.51497)
    es = enumerate_equilibria(e)
    assert sorted(es.kinds()) == ["NIOS", "SymmetricAM"]
    assert [r.theta for r in es.off_path_sustained] == [(1.0, 0.0)]


def test_nios_examples(env_sym):
    assert solve_nios(env_sym).kind == "None"
    assert solve_nios(affine((5, 3, 3, 1), 0.1)).kind == "None"
    e = Economy.affine((10, 9.5, 9, 1), 0.25, lam=4, r=1)
    assert cutoff_formulas(e).theta_ub == pytest.approx(6.55)
    assert solve_nios(e).kind == "None"


def test_nios_found_when_conditions_hold():
    # lr*Delta_h - c in (0,1) and (lr Delta_h - c)(1 + lr Delta) <= 0
    e = affine((10, 9.9, 9.5, 7), 1.0)
    rep = solve_nios(e)
    assert rep.kind == "NIOS" and rep.theta[1] == 0.0
    assert 0 < rep.theta[0] < 1
    assert "SymmetricAM" in enumerate_equilibria(e).kinds()


# ---------------------------------------------------------------- PAM


def test_pam_examples(env_sym, env_super):
    assert pam_fast_fail(env_sym) and solve_pam(env_sym).violates("PAM:Assortativity")
    # lam (15 - 8) = 7 < r phi_HL = 8: already excluded by the fast-fail bound
    rep = solve_pam(env_super)
    assert rep.kind == "None" and rep.violates("PAM:Assortativity")
    assert rep.ic_residuals["PAM:Assortativity"] == -1.0


def test_pam_found_for_strong_complementarity():
    e = affine((30, 2, 1, 0.8), 0.1, lam=5, r=1)
    rep = solve_pam(e)
    assert rep.kind == "PAM" and rep.theta[0] == rep.theta[1]
    assert rep.alpha == (0.0, 1.0, 0.0, 1.0)


@given(economies())
def test_pam_symmetric_and_fast_fail(e):
    reps = solve_pam_all(e)
    if pam_fast_fail(e):
        assert reps == []
    for r in reps:
        if r.exists:
            assert r.theta[0] == r.theta[1]


# ---------------------------------------------------------------- interior


@given(economies())
def test_interior_empty_for_affine_cost(e):
    assert solve_interior_asymmetric(e) == []


@given(economies(supermodular=True))
def test_interior_empty_when_supermodular(e):
    assert solve_interior_asymmetric(e) == []


def test_quadratic_monotonicity_bound_limits_roots():
    # b = lr Delta_h lies inside the range of C so C^{-1} is unclipped on [0, x*]
    e = Economy(PayoffMatrix(12, 12, 11, 1), CostFunction.quadratic(5.0), 1.0, 1.0)
    b = interior_monotonicity_bound(e)
    assert b.holds and b.lhs == 25.0
    assert len(interior_roots(e)) <= 1
    assert solve_interior_asymmetric(e) == []


# ---------------------------------------------------------------- enumeration


def test_enumerate_examples(env_sym, env_fios):
    es = enumerate_equilibria(env_sym)
    assert len(es) == 1 and es.reports[0].theta[0] == pytest.approx(1 / 3, abs=1e-9)
    es = enumerate_equilibria(env_fios)
    assert es.kinds() == ["FIOS"] and es.reports[0].theta == (1.0, pytest.approx(0.5))
    assert es.knife_edges == []


def test_symmetric_and_fios_pair_is_incomparable():
    e = baseline().economy(5.0)
    es = enumerate_equilibria(e)
    assert sorted(es.kinds()) == ["FIOS", "SymmetricAM"]
    assert es.pareto_verdicts == {(0, 1): "incomparable"}


def test_supermodular_multiplicity_is_ordered(env_super):
    es = enumerate_equilibria(env_super)
    assert sorted(r.theta for r in es) == [(0.0, 0.0), (0.75, 0.75)]
    assert all(r.theta[0] == r.theta[1] for r in es.reports + es.knife_edges)
    i = [r.theta for r in es].index((0.75, 0.75))
    v = es.pareto_verdicts[(0, 1)]
    assert v == ("dominates" if i == 0 else "dominated")


def test_canonical_orientation_swaps_labels(env_fios):
    rep = build_report(env_fios, 0.5, 1.0, "AM")
    c = canonical(rep)
    assert c.theta == (1.0, 0.5)
    assert c.alpha == (rep.alpha[2], rep.alpha[3], rep.alpha[0], rep.alpha[1])
    assert c.ic_residuals["AM:Invest-m"] == rep.ic_residuals["AM:Invest-w"]


@given(economies())
def test_structural_exclusions(e):
    es = enumerate_equilibria(e)  # raises on violation
    kinds = es.kinds()
    assert not ("FIOS" in kinds and "NIOS" in kinds)
    if e.deltas.delta <= 0:
        assert kinds.count("SymmetricAM") <= 1
    if "NIOS" in kinds:
        assert "SymmetricAM" in kinds
    if "SymmetricAM" not in kinds:
        assert set(kinds) - {"PAM"} <= {"FIOS"}
    for r in es:
        assert min(r.ic_residuals.values()) >= -1e-6
        if r.kind == "FIOS":
            assert r.theta[0] == 1.0
        if r.kind == "NIOS":
            assert r.theta[1] == 0.0


@given(economies(supermodular=True))
def test_supermodular_only_symmetric(e):
    es = enumerate_equilibria(e)
    assert all(r.theta[0] == r.theta[1] for r in es)


@given(economies(supermodular=False))
def test_coexisting_pairs_incomparable(e):
    es = enumerate_equilibria(e)
    assert all(v == "incomparable" for v in es.pareto_verdicts.values())


@given(economies(supermodular=False))
def test_existence_under_acceptance_bounds(e):
    p = e.payoffs
    if e.lam * (p.phi_hh - p.phi_hl) <= e.r * p.phi_hl and e.lam * (p.phi_lh - p.phi_ll) <= e.r * p.phi_ll:
        es = enumerate_equilibria(e)
        n = es.kinds().count("SymmetricAM")
        knives = [r for r in es.knife_edges if r.kind == "SymmetricAM"]
        assert n == 1 or (n == 0 and knives)


@given(economies(supermodular=False))
def test_cutoff_ordering(e):
    f = cutoff_formulas(e)
    if all(0 <= x <= 1 for x in (f.theta_ub, f.theta_sym, f.theta_lb)):
        assert f.theta_ub + 1e-12 >= f.theta_sym >= f.theta_lb - 1e-12


# ---------------------------------------------------------------- best response


def test_best_response_fixed_point(env_sym):
    prof = solve_symmetric_am(env_sym).profile
    assert best_response_map(env_sym, prof).contains(prof)


def test_best_response_against_full_investment(env_fios):
    br = best_response_map(env_fios, StrategyProfile(1.0, 1.0))
    assert br.cutoffs[1] == pytest.approx(0.5)
    # low-skill women facing an all-high pool: V(L) = 0.5*6 = 3 > phi_LL = 1, so reject
    assert br.acceptance[("w", "L")] == (0.0, 0.0)


def test_argmax_rule_leaves_irrelevant_acceptance_free(env_fios):
    br = best_response_map(env_fios, StrategyProfile(1.0, 1.0), rule="argmax")
    assert br.acceptance[("m", "H")] == (0.0, 1.0)


def test_pattern_labels():
    assert classify_pattern(StrategyProfile(0.5, 0.5)) == "AM"
    assert classify_pattern(StrategyProfile(0.5, 0.5, (0, 1, 0, 1))) == "PAM"
    assert classify_pattern(StrategyProfile(0.5, 0.5, (1, 0, 1, 0))) == "other"


def test_pareto_verdict_self_equivalent(env_sym):
    rep = solve_symmetric_am(env_sym)
    assert pareto_verdict(env_sym, rep, rep) == "equivalent"


def test_boundary_pam_can_dominate_symmetric():
    # everyone invests because a low-skill deviant would be rejected; the
    # all-match symmetric equilibrium is worse for every type
    e = affine((9.047984, 5.708233, 5.558860, 2.123974), 2.414361, 0.590259, 0.229666)
    es = enumerate_equilibria(e)
    assert es.kinds() == ["SymmetricAM", "PAM"]
    assert es.reports[1].theta == (1.0, 1.0)
    assert es.pareto_verdicts[(0, 1)] == "dominated"
