"""Expected discounted values of unmatched agents."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .economy import Economy, StrategyProfile, other


@dataclass(frozen=True)
class ValueQuote:
    v_h: float
    v_l: float


def _check(*xs):
    for x in xs:
        if isinstance(x, float) and math.isnan(x):
            raise ValueError("NaN input")
        if not (0.0 <= x <= 1.0):
            raise ValueError(f"probability outside [0,1]: {x}")


def fractional_form(e: Economy, own_skill, opp_high_share, opp_accept):
    """Coefficients (a, b, c, d) with V(alpha) = (a + b alpha) / (c + d alpha).

    alpha is the agent's own acceptance of low partners.
    """
    p, lam, r = e.payoffs, e.lam, e.r
    th = opp_high_share
    a_h, a_l = opp_accept
    if own_skill == "H":
        return lam * th * p.phi_hh, lam * (1 - th) * p.phi_hl, r + lam * th, lam * (1 - th)
    return (
        lam * th * a_h * p.phi_lh,
        lam * (1 - th) * a_l * p.phi_ll,
        r + lam * th * a_h,
        lam * (1 - th) * a_l,
    )


def value_general(e: Economy, own_skill: str, own_accept_low: float, opp_high_share: float,
                  opp_accept=(1.0, 1.0)) -> float:
    """Value of an unmatched agent of ``own_skill``.

    ``opp_accept`` is (alpha'(H), alpha'(L)), the opposite side's acceptance of
    low partners by their skill. High partners always accept high agents.
    """
    if own_skill not in ("H", "L"):
        raise ValueError(f"skill must be 'H' or 'L', got {own_skill!r}")
    _check(own_accept_low, opp_high_share, *opp_accept)
    a, b, c, d = fractional_form(e, own_skill, opp_high_share, opp_accept)
    return (a + b * own_accept_low) / (c + d * own_accept_low)


def value_am(e: Economy, own_skill: str, opp_cutoff: float) -> float:
    p, lr = e.payoffs, e.lr
    if own_skill == "H":
        return lr * (opp_cutoff * p.phi_hh + (1 - opp_cutoff) * p.phi_hl)
    return lr * (opp_cutoff * p.phi_lh + (1 - opp_cutoff) * p.phi_ll)


def value_pam(e: Economy, own_skill: str, opp_cutoff: float) -> float:
    p, lam, r = e.payoffs, e.lam, e.r
    if own_skill == "H":
        return lam * opp_cutoff * p.phi_hh / (r + lam * opp_cutoff)
    q = 1.0 - opp_cutoff
    return lam * q * p.phi_ll / (r + lam * q)


def profile_values(e: Economy, prof: StrategyProfile, g: str) -> ValueQuote:
    """Values of gender ``g``'s H and L agents (hypothetical if that skill has no mass)."""
    o = other(g)
    th = prof.theta(o)
    opp = (prof.accept(o, "H"), prof.accept(o, "L"))
    return ValueQuote(
        v_h=value_general(e, "H", prof.accept(g, "H"), th, opp),
        v_l=value_general(e, "L", prof.accept(g, "L"), th, opp),
    )


def match_rate(e: Economy, prof: StrategyProfile, g: str, s: str) -> float:
    """Poisson rate at which an unmatched (g, s) agent forms a match."""
    o = other(g)
    th = prof.theta(o)
    if s == "H":
        return e.lam * (th + (1 - th) * prof.accept(g, "H"))
    return e.lam * (th * prof.accept(o, "H") + (1 - th) * prof.accept(g, "L") * prof.accept(o, "L"))


def value_arrays(phi, lam, r, theta_opp, a_own_h, a_own_l, a_opp_h, a_opp_l):
    """Vectorised (V(H), V(L)) for one gender given the opposite cutoff array."""
    phh, phl, plh, pll = phi
    th = np.asarray(theta_opp, dtype=float)
    q = 1.0 - th
    vh = lam * (th * phh + q * a_own_h * phl) / (r + lam * (th + q * a_own_h))
    w_l = a_own_l * a_opp_l
    vl = lam * (th * a_opp_h * plh + q * w_l * pll) / (r + lam * (th * a_opp_h + q * w_l))
    return vh, vl
