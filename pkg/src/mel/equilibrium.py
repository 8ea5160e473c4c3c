"""Closed-form equilibrium solvers, classification and Pareto comparison.

An equilibrium is a profile (theta_m, theta_w, alpha) in which cutoffs are
best responses to the values implied by the profile and every acceptance
entry obeys the IC-AL rule at its own value. Entries for meetings that never
happen on path are filled by IC-AL at their hypothetical value, so they can
still feed into investment incentives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .economy import (
    ALPHA_KEYS, GENDERS, KNIFE_TOL, Economy, StrategyProfile, check_ranking,
    is_knife, knife_scale, other,
)
from .errors import InternalConsistencyError
from .roots import bisect_root, sign_change_roots
from .values import ValueQuote, fractional_form, match_rate, profile_values

SCAN_N = 10_000

KINDS = ("SymmetricAM", "FIOS", "NIOS", "InteriorAsymmetricAM", "PAM", "None")


@dataclass
class EquilibriumReport:
    kind: str
    theta: tuple
    alpha: tuple = (1.0, 1.0, 1.0, 1.0)
    ic_residuals: dict = field(default_factory=dict)
    knife_edge: bool = False
    off_path: tuple = ()
    on_path_note: str = ""
    values: dict = field(default_factory=dict)
    violated: tuple = ()
    note: str = ""
    off_path_sustained: bool = False

    @property
    def exists(self) -> bool:
        return self.kind != "None"

    @property
    def profile(self) -> StrategyProfile:
        return StrategyProfile(self.theta[0], self.theta[1], self.alpha)

    def violates(self, prefix: str) -> bool:
        return any(v.startswith(prefix) for v in self.violated)

    def residual(self, prefix: str) -> float:
        """Smallest slack among residuals whose name starts with ``prefix``."""
        vals = [v for k, v in self.ic_residuals.items() if k.startswith(prefix)]
        if not vals:
            raise KeyError(prefix)
        return min(vals)

    def summary(self, nd=4) -> str:
        tm, tw = self.theta
        return f"{self.kind} ({tm:.{nd}f}, {tw:.{nd}f})"


def _none(reason, theta=(math.nan, math.nan), violated=(), residuals=None, note=""):
    return EquilibriumReport("None", theta, violated=tuple(violated),
                             ic_residuals=dict(residuals or {}), note=note or reason)


# ----------------------------------------------------------------------------
# profile completion and verification


def on_path_entries(prof: StrategyProfile):
    """Acceptance entries whose agents exist and meet low partners on path."""
    out = []
    for g, s in ALPHA_KEYS:
        mass = prof.theta(g) if s == "H" else 1.0 - prof.theta(g)
        opp_low = 1.0 - prof.theta(other(g))
        if mass > 0 and opp_low > 0:
            out.append((g, s))
    return tuple(out)


def _slack_scale(e):
    return e.r + e.lam


def _accept_value(e, prof, g, s):
    o = other(g)
    th = prof.theta(o)
    opp = (prof.accept(o, "H"), prof.accept(o, "L"))
    a, b, c, d = fractional_form(e, s, th, opp)
    al = prof.accept(g, s)
    return (a + b * al) / (c + d * al)


def _ical_target(v, phi):
    """IC-AL choice given value v: 1 accept, 0 reject, None knife-edge."""
    if is_knife(v - phi, v, phi):
        return None
    return 1.0 if v < phi else 0.0


def complete_profile(e: Economy, theta_m: float, theta_w: float, regime: str):
    """Fill acceptance entries for a cutoff pair under regime 'AM' or 'PAM'.

    On-path entries take the regime's prescription; off-path entries follow
    IC-AL at their hypothetical values. Returns (profile, off_path, knives)
    where ``knives`` lists off-path entries left at a knife-edge.
    """
    base = {"AM": (1.0, 1.0, 1.0, 1.0), "PAM": (0.0, 1.0, 0.0, 1.0)}[regime]
    prof = StrategyProfile(theta_m, theta_w, base)
    onp = on_path_entries(prof)
    off = tuple(k for k in ALPHA_KEYS if k not in onp)
    knives = set()
    alpha = list(base)
    for _ in range(8):
        changed = False
        for k in off:
            g, s = k
            v = _accept_value(e, StrategyProfile(theta_m, theta_w, tuple(alpha)), g, s)
            t = _ical_target(v, e.payoffs.phi(s, "L"))
            i = ALPHA_KEYS.index(k)
            if t is None:
                knives.add(k)
                continue
            knives.discard(k)
            if alpha[i] != t:
                alpha[i] = t
                changed = True
        if not changed:
            break
    return StrategyProfile(theta_m, theta_w, tuple(alpha)), off, tuple(sorted(knives))


def classify_pattern(prof: StrategyProfile) -> str:
    """'AM', 'PAM' or 'other' from the on-path acceptance pattern."""
    onp = on_path_entries(prof)
    if not onp:
        # nobody meets a low partner: decide on the (pinned) H entries
        ah = (prof.accept("m", "H"), prof.accept("w", "H"))
        if ah == (1.0, 1.0):
            return "AM"
        if ah == (0.0, 0.0):
            return "PAM"
        return "other"
    acc = {k: prof.accept(*k) for k in onp}
    if all(v == 1.0 for v in acc.values()):
        return "AM"
    if all((v == 0.0) if k[1] == "H" else (v == 1.0) for k, v in acc.items()):
        return "PAM"
    return "other"


def classify_kind(prof: StrategyProfile) -> str:
    pat = classify_pattern(prof)
    tm, tw = prof.theta_m, prof.theta_w
    if pat == "PAM":
        return "PAM"
    if pat != "AM":
        return "None"
    if tm == tw:
        return "SymmetricAM"
    hi, lo = max(tm, tw), min(tm, tw)
    if hi == 1.0:
        return "FIOS"
    if lo == 0.0:
        return "NIOS"
    return "InteriorAsymmetricAM"


def _acceptance_name(regime, g, s, on_path):
    if not on_path:
        return f"offpath:{g}:{s}"
    if regime == "PAM":
        return f"PAM:Assortativity-{g}" if s == "H" else f"PAM:L-L-{g}"
    return f"AM:{'H-L' if s == 'H' else 'L-L'}-{g}"


def verify_profile(e: Economy, prof: StrategyProfile, regime: str,
                   off=(), knives=()) -> EquilibriumReport:
    """Check every equilibrium condition of a completed profile."""
    p = e.payoffs
    res, violated = {}, []
    knife = bool(knives)
    onp = on_path_entries(prof)
    vals = {g: profile_values(e, prof, g) for g in GENDERS}
    sc = _slack_scale(e)

    for g, s in ALPHA_KEYS:
        v = vals[g].v_h if s == "H" else vals[g].v_l
        phi = p.phi(s, "L")
        al = prof.accept(g, s)
        on = (g, s) in onp
        name = _acceptance_name(regime, g, s, on)
        if regime == "PAM" and on and s == "H":
            slack = v - phi
        else:
            slack = sc * (phi - v) if al == 1.0 else sc * (v - phi)
        res[name] = slack
        if slack < -KNIFE_TOL * knife_scale(v, phi) * sc:
            violated.append(name)
        elif is_knife(slack, v, phi, sc * phi):
            knife = True

    inv = "PAM:Invest" if regime == "PAM" else "AM:Invest"
    for g in GENDERS:
        th = prof.theta(g)
        d = vals[g].v_h - vals[g].v_l
        name = f"{inv}-{g}"
        if th >= 1.0:
            slack = d - e.cost(1.0)
        elif th <= 0.0:
            slack = e.cost(0.0) - d
        else:
            slack = -abs(d - e.cost(th))
        res[name] = slack
        tol = KNIFE_TOL * knife_scale(d, e.cost(1.0))
        if slack < -tol * (10.0 if 0.0 < th < 1.0 else 1.0):
            violated.append(name)
        elif (th in (0.0, 1.0)) and abs(slack) <= tol:
            knife = True

    for g in GENDERS:
        for s in ("H", "L"):
            mass = prof.theta(g) if s == "H" else 1.0 - prof.theta(g)
            if mass > 0 and match_rate(e, prof, g, s) <= 0.0:
                violated.append(f"Unmatched-{g}-{s}")

    kind = classify_kind(prof) if not violated else "None"
    note = ", ".join(f"{g}:{s}" for g, s in off)
    return EquilibriumReport(
        kind=kind, theta=(prof.theta_m, prof.theta_w), alpha=prof.alpha,
        ic_residuals=res, knife_edge=knife, off_path=tuple(off),
        on_path_note=("vacuous on path: " + note) if note else "",
        values=vals, violated=tuple(violated),
    )


def build_report(e: Economy, theta_m, theta_w, regime, expect=None) -> EquilibriumReport:
    prof, off, knives = complete_profile(e, float(theta_m), float(theta_w), regime)
    rep = verify_profile(e, prof, regime, off, knives)
    if rep.exists and expect is not None and rep.kind not in expect:
        rep.note = f"profile classifies as {rep.kind}"
        rep.violated = rep.violated + (f"kind:{rep.kind}",)
        rep.kind = "None"
    return rep


def canonical(rep: EquilibriumReport) -> EquilibriumReport:
    tm, tw = rep.theta
    if tm >= tw or not rep.exists:
        return rep
    a = rep.alpha
    swap = {"m": "w", "w": "m"}
    res = {}
    for k, v in rep.ic_residuals.items():
        parts = k.rsplit("-", 1)
        if len(parts) == 2 and parts[1] in swap:
            k = f"{parts[0]}-{swap[parts[1]]}"
        elif k.startswith("offpath:"):
            _, g, s = k.split(":")
            k = f"offpath:{swap[g]}:{s}"
        res[k] = v
    return EquilibriumReport(
        rep.kind, (tw, tm), (a[2], a[3], a[0], a[1]), res, rep.knife_edge,
        tuple((swap[g], s) for g, s in rep.off_path), rep.on_path_note,
        {swap[g]: v for g, v in rep.values.items()}, rep.violated, rep.note,
        rep.off_path_sustained,
    )


# ----------------------------------------------------------------------------
# solvers


def _g_function(e: Economy):
    d = e.deltas
    lr = e.lr
    return lambda x: lr * (x * d.delta + d.delta_h) - e.cost(x)


def symmetric_am_candidates(e: Economy):
    """Symmetric cutoffs consistent with the AM investment condition.

    Roots of G(x) = lr[x Delta + Delta_h] - C(x) in (0,1) plus the boundaries
    0 (when G(0) <= 0) and 1 (when G(1) >= 0).
    """
    G = _g_function(e)
    out = []
    g0, g1 = G(0.0), G(1.0)
    if g0 <= 0:
        out.append(0.0)
    if e.cost.is_affine:
        d = e.deltas
        slope = e.lr * d.delta - 1.0
        if slope != 0.0:
            x = (e.lr * d.delta_h - e.cost.c) / (1.0 - e.lr * d.delta)
            if 0.0 < x < 1.0:
                out.append(x)
    else:
        out.extend(x for x in sign_change_roots(G, 0.0, 1.0, SCAN_N) if 0.0 < x < 1.0)
    if g1 >= 0:
        out.append(1.0)
    return sorted(set(out))


def solve_symmetric_am_all(e: Economy):
    reps = [build_report(e, x, x, "AM", expect=("SymmetricAM",))
            for x in symmetric_am_candidates(e)]
    return reps


def solve_symmetric_am(e: Economy) -> EquilibriumReport:
    """Symmetric all-match equilibrium (the first one when several exist)."""
    reps = solve_symmetric_am_all(e)
    for r in reps:
        if r.exists:
            return r
    if reps:
        return reps[0]
    return _none("no symmetric cutoff satisfies the investment condition")


def solve_fios(e: Economy) -> EquilibriumReport:
    """Full investment by men; women best-respond to an all-H male pool."""
    d = e.deltas
    dw = e.lr * (d.delta + d.delta_h)
    tw = float(e.cost.inverse(dw))
    if tw >= 1.0:
        return _none("women's best response to full male investment is full investment",
                     theta=(1.0, 1.0))
    rep = build_report(e, 1.0, tw, "AM", expect=("FIOS",))
    rep.note = rep.note or ("case A" if tw > 0 else "case B")
    if rep.exists:
        # men's investment condition against a deviant who is still accepted
        slack = e.lr * (tw * d.delta + d.delta_h) - float(e.cost(1.0))
        rep.ic_residuals["FIOS:Invest-m-accepted"] = slack
        if slack < -KNIFE_TOL * knife_scale(slack + float(e.cost(1.0)), float(e.cost(1.0))):
            rep.off_path_sustained = True
            rep.note = "investment sustained only by off-path rejection of a low-skill deviant"
    return rep


def solve_nios(e: Economy) -> EquilibriumReport:
    """No investment by women; men best-respond to an all-L female pool."""
    d = e.deltas
    tm = float(e.cost.inverse(e.lr * d.delta_h))
    if tm <= 0.0:
        return _none("men's best response to an all-low pool is no investment",
                     theta=(0.0, 0.0))
    if tm >= 1.0:
        return _none("boundary profile (1,0) is the case-B FIOS profile; see solve_fios",
                     theta=(1.0, 0.0))
    return build_report(e, tm, 0.0, "AM", expect=("NIOS",))


def pam_h(e: Economy):
    p, lam, r = e.payoffs, e.lam, e.r

    def h(x):
        vh = lam * x * p.phi_hh / (r + lam * x)
        q = 1.0 - x
        vl = lam * q * p.phi_ll / (r + lam * q)
        return vh - vl - e.cost(x)
    return h


def pam_fast_fail(e: Economy) -> bool:
    p = e.payoffs
    return e.lam * (p.phi_hh - p.phi_hl) < e.r * p.phi_hl


def solve_pam_all(e: Economy):
    if pam_fast_fail(e):
        return []
    h = pam_h(e)
    cands = [x for x in sign_change_roots(h, 0.0, 1.0, SCAN_N) if 0.0 < x < 1.0]
    if h(1.0) >= 0:
        cands.append(1.0)
    return [rep for rep in (build_report(e, x, x, "PAM", expect=("PAM",)) for x in cands)]


def solve_pam(e: Economy) -> EquilibriumReport:
    p = e.payoffs
    if pam_fast_fail(e):
        slack = e.lam * (p.phi_hh - p.phi_hl) - e.r * p.phi_hl
        return _none("assortativity fails even against an all-H pool",
                     violated=("PAM:Assortativity",),
                     residuals={"PAM:Assortativity": slack})
    reps = solve_pam_all(e)
    for r in reps:
        if r.exists:
            return r
    if reps:
        return reps[0]
    return _none("PAM indifference has no admissible root", violated=("PAM:Invest",))


def interior_f(e: Economy):
    d = e.deltas
    a, b = e.lr * d.delta, e.lr * d.delta_h
    return (lambda x: a * e.cost.inverse(a * x + b) + b - e.cost(x)), a, b


def interior_domain(e: Economy):
    _, a, b = interior_f(e)
    c0 = e.cost.c
    if a < 0:
        xs = (c0 - b) / a
        return 0.0, min(1.0, xs)
    return 0.0, 1.0


@dataclass(frozen=True)
class MonotonicityBound:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs > self.rhs


def interior_monotonicity_bound(e: Economy) -> MonotonicityBound:
    """Sufficient condition a^2 > C'(1) C'(C^{-1}(b)) for f to be monotone."""
    _, a, b = interior_f(e)
    return MonotonicityBound(a * a, float(e.cost.deriv(1.0)) * float(e.cost.deriv(e.cost.inverse(b))))


def interior_roots(e: Economy, n=SCAN_N):
    f, _, _ = interior_f(e)
    lo, hi = interior_domain(e)
    if hi <= lo:
        return []
    return sign_change_roots(f, lo, hi, n)


def solve_interior_asymmetric(e: Economy):
    f, a, b = interior_f(e)
    out = []
    for x in interior_roots(e):
        tw = float(e.cost.inverse(a * x + b))
        if not (0.0 < x < 1.0 and 0.0 < tw < 1.0):
            continue
        if abs(x - tw) <= 1e-7:
            continue
        tm, tw2 = max(x, tw), min(x, tw)
        if any(abs(r.theta[0] - tm) < 1e-7 and abs(r.theta[1] - tw2) < 1e-7 for r in out):
            continue
        rep = canonical(build_report(e, x, tw, "AM", expect=("InteriorAsymmetricAM",)))
        if not check_ranking(e.payoffs).ok:
            rep.note = (rep.note + "; " if rep.note else "") + "payoff ranking violated"
        out.append(rep)
    return [r for r in out if r.exists]


# ----------------------------------------------------------------------------
# best responses


@dataclass(frozen=True)
class BestResponse:
    cutoffs: tuple
    acceptance: dict  # (g, s) -> (lo, hi), i.e. {0}, {1} or [0,1]
    gains: tuple      # V(H) - V(L) per gender

    def contains(self, prof: StrategyProfile, tol=1e-9) -> bool:
        if abs(self.cutoffs[0] - prof.theta_m) > tol or abs(self.cutoffs[1] - prof.theta_w) > tol:
            return False
        return all(lo - tol <= prof.accept(*k) <= hi + tol for k, (lo, hi) in self.acceptance.items())


def best_response_map(e: Economy, prof: StrategyProfile, rule: str = "ic-al") -> BestResponse:
    """Cutoff best responses and acceptance best-response sets.

    rule='ic-al' pins acceptance by comparing the agent's value with phi(s,L);
    rule='argmax' uses the sign of bc - ad in V = (a + b alpha)/(c + d alpha),
    which leaves acceptance free whenever V does not depend on alpha.
    """
    cut, acc, gains = [], {}, []
    for g in GENDERS:
        q = profile_values(e, prof, g)
        d = q.v_h - q.v_l
        gains.append(d)
        cut.append(float(e.cost.inverse(d)))
        o = other(g)
        opp = (prof.accept(o, "H"), prof.accept(o, "L"))
        for s in ("H", "L"):
            phi = e.payoffs.phi(s, "L")
            if rule == "argmax":
                a, b, c, dd = fractional_form(e, s, prof.theta(o), opp)
                sign = b * c - a * dd
                if is_knife(sign, a * dd, b * c):
                    acc[(g, s)] = (0.0, 1.0)
                else:
                    acc[(g, s)] = (1.0, 1.0) if sign > 0 else (0.0, 0.0)
            else:
                v = q.v_h if s == "H" else q.v_l
                t = _ical_target(v, phi)
                acc[(g, s)] = (0.0, 1.0) if t is None else (t, t)
    return BestResponse(tuple(cut), acc, tuple(gains))


# ----------------------------------------------------------------------------
# type payoffs and Pareto comparison


def type_payoff(e: Economy, rep: EquilibriumReport, g: str, tau):
    q: ValueQuote = rep.values[g]
    tau = np.asarray(tau, dtype=float)
    th = rep.theta[0] if g == "m" else rep.theta[1]
    return np.where(tau <= th, q.v_h - e.cost(tau), q.v_l)


def _probe_types(*cutoffs, n=2049):
    pts = set(np.linspace(0.0, 1.0, n).tolist())
    for c in cutoffs:
        for dx in (-1e-6, 0.0, 1e-6):
            x = c + dx
            if 0.0 <= x <= 1.0:
                pts.add(x)
    return np.array(sorted(pts))


def pareto_verdict(e: Economy, a: EquilibriumReport, b: EquilibriumReport, tol=KNIFE_TOL):
    """'incomparable', 'dominates' (a over b), 'dominated' or 'equivalent'."""
    better = worse = False
    for g in GENDERS:
        i = 0 if g == "m" else 1
        tau = _probe_types(a.theta[i], b.theta[i])
        ua, ub = type_payoff(e, a, g, tau), type_payoff(e, b, g, tau)
        sc = tol * max(1.0, float(np.max(np.abs(ua))), float(np.max(np.abs(ub))))
        better |= bool(np.any(ua > ub + sc))
        worse |= bool(np.any(ub > ua + sc))
    if better and worse:
        return "incomparable"
    if better:
        return "dominates"
    if worse:
        return "dominated"
    return "equivalent"


# ----------------------------------------------------------------------------
# enumeration


@dataclass
class EquilibriumSet:
    reports: list
    knife_edges: list
    pareto_verdicts: dict
    notes: list = field(default_factory=list)
    # equilibria whose investment condition holds only because a low-skill
    # deviant would be rejected off path
    off_path_sustained: list = field(default_factory=list)

    def kinds(self):
        return [r.kind for r in self.reports]

    def of_kind(self, kind):
        return [r for r in self.reports if r.kind == kind]

    def __len__(self):
        return len(self.reports)

    def __iter__(self):
        return iter(self.reports)


def _same(r1, r2, tol=1e-9):
    return (abs(r1.theta[0] - r2.theta[0]) <= tol and abs(r1.theta[1] - r2.theta[1]) <= tol
            and r1.alpha == r2.alpha)


def enumerate_equilibria(e: Economy, check: bool = True) -> EquilibriumSet:
    cands = []
    cands += solve_symmetric_am_all(e)
    cands.append(solve_fios(e))
    cands.append(solve_nios(e))
    cands += solve_pam_all(e)
    cands += solve_interior_asymmetric(e)
    found, knives, sustained = [], [], []
    for rep in cands:
        if not rep.exists:
            continue
        rep = canonical(rep)
        bucket = sustained if rep.off_path_sustained else knives if rep.knife_edge else found
        if not any(_same(rep, x) for x in found + knives + sustained):
            bucket.append(rep)
    notes = []
    if e.cost.is_affine and abs(1.0 + e.lr * e.deltas.delta) <= KNIFE_TOL:
        notes.append("1 + lr*Delta = 0: the interior indifference system is singular")
    if not check_ranking(e.payoffs).ok:
        notes.append("payoff ranking violated")
    verdicts = {}
    for i in range(len(found)):
        for j in range(i + 1, len(found)):
            verdicts[(i, j)] = pareto_verdict(e, found[i], found[j])
    out = EquilibriumSet(found, knives, verdicts, notes, sustained)
    if check:
        _assert_structure(e, out)
    return out


def _assert_structure(e: Economy, es: EquilibriumSet):
    if not (e.cost.is_affine and e.deltas.delta <= 0 and check_ranking(e.payoffs).ok):
        return
    kinds = es.kinds()
    if "FIOS" in kinds and "NIOS" in kinds:
        raise InternalConsistencyError(f"FIOS and NIOS coexist: {[r.summary() for r in es]}")
    if kinds.count("SymmetricAM") > 1:
        raise InternalConsistencyError(f"several symmetric AM equilibria: {[r.summary() for r in es]}")
    if "NIOS" in kinds and "SymmetricAM" not in kinds:
        raise InternalConsistencyError(f"NIOS without a symmetric equilibrium: {[r.summary() for r in es]}")
