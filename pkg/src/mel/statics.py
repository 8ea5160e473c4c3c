"""Skill-premium comparative statics for household-derived economies."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .economy import (
    CostFunction, DeltaPair, Economy, PayoffMatrix, check_ranking, cutoff_formulas, deltas,
)
from .equilibrium import enumerate_equilibria
from .errors import MelError, PreconditionError, ThresholdNotFoundError
from .household import CobbDouglasPih, derive_match_payoffs_detailed
from .parallel import pmap

GRID_POINTS = 512
T_TOL = 1e-6


@dataclass(frozen=True)
class HouseholdEnvironment:
    """Household family, low wage and market parameters; t_h is the free variable."""

    pih: object = field(default_factory=CobbDouglasPih)
    t_l: float = 2.0
    c: float = 0.25
    lam: float = 1.0
    r: float = 1.0
    selection: str = "specialize"

    def derivation(self, t_h):
        return derive_match_payoffs_detailed(self.pih, self.t_l, t_h, self.selection)

    def payoffs(self, t_h) -> PayoffMatrix:
        return self.derivation(t_h).payoffs

    def economy(self, t_h) -> Economy:
        return Economy(self.payoffs(t_h), CostFunction.affine(self.c), self.lam, self.r)

    def default_ceiling(self):
        return 10.0 * self.t_l


def baseline() -> HouseholdEnvironment:
    return HouseholdEnvironment()


def phi_constraint(e: Economy) -> float:
    """Symmetric L-L acceptance margin lam*theta*(phi_LH - phi_LL) - r*phi_LL.

    theta is the unclipped symmetric cutoff when it lies in [0,1], else the
    boundary it exits through.
    """
    p = e.payoffs
    th = cutoff_formulas(e).theta_sym
    if not math.isfinite(th):
        th = 1.0
    th = min(1.0, max(0.0, th))
    return e.lam * th * (p.phi_lh - p.phi_ll) - e.r * p.phi_ll


def one_plus_lr_delta(e: Economy) -> float:
    return 1.0 + e.lr * e.deltas.delta


def fios_hl_slack(e: Economy) -> float:
    """On-path H-L acceptance slack of the FIOS profile (1, theta_lb)."""
    p = e.payoffs
    th = cutoff_formulas(e).theta_lb
    th = min(1.0, max(0.0, th))
    return e.r * p.phi_hl - e.lam * th * (p.phi_hh - p.phi_hl)


def log_grid(t_l, ceiling, n=GRID_POINTS):
    return np.exp(np.linspace(math.log(t_l), math.log(ceiling), n))


@dataclass
class Crossing:
    name: str
    t: float
    bracket: tuple
    achieved_tol: float


@dataclass
class Thresholds:
    t_sym: float
    t_fios: float
    sym_branch: str
    crossings: dict
    fios_bracket: tuple
    tolerance: float
    ceiling: float
    note: str = "tail conditions certified on the grid up to the ceiling only"

    def ok(self, t_l):
        return t_l < self.t_sym <= self.t_fios


def _bisect_t(fn, lo, hi, tol=T_TOL):
    # fn changes sign on [lo, hi]
    flo = fn(lo)
    a, b = lo, hi
    while b - a > tol * 0.01:
        m = 0.5 * (a + b)
        fm = fn(m)
        if (fm > 0) == (flo > 0) and fm != 0:
            a, flo = m, fm
        else:
            b = m
        if b - a <= 1e-12 * max(1.0, b):
            break
    return 0.5 * (a + b), b - a


def _crossing(name, fn, ts, vals, start_sign):
    """First crossing away from ``start_sign`` on the grid, refined by bisection."""
    if start_sign > 0:
        bad = np.nonzero(vals <= 0)[0]
    else:
        bad = np.nonzero(vals >= 0)[0]
    if len(bad) == 0:
        return None
    k = int(bad[0])
    if k == 0:
        return Crossing(name, float(ts[0]), (float(ts[0]), float(ts[0])), 0.0)
    lo, hi = float(ts[k - 1]), float(ts[k])
    t, w = _bisect_t(fn, lo, hi)
    return Crossing(name, t, (lo, hi), w)


def _q_values(env, ts):
    def one(t):
        try:
            e = env.economy(t)
        except MelError:
            return (math.nan,) * 5
        f = cutoff_formulas(e)
        return (one_plus_lr_delta(e), phi_constraint(e), f.theta_lb, fios_hl_slack(e), f.theta_sym)
    return np.array(pmap(one, ts) if isinstance(env.pih, CobbDouglasPih) else [one(t) for t in ts])


def threshold_t_sym(env: HouseholdEnvironment, search_ceiling=None, _q=None):
    ceiling = search_ceiling or env.default_ceiling()
    ts = log_grid(env.t_l, ceiling)
    q = _q if _q is not None else _q_values(env, ts)
    c1 = _crossing("1+lr*Delta", lambda t: one_plus_lr_delta(env.economy(t)), ts, q[:, 0], +1)
    c2 = _crossing("Phi", lambda t: phi_constraint(env.economy(t)), ts, q[:, 1], -1)
    found = [c for c in (c1, c2) if c is not None]
    if not found:
        trace = [(float(t), float(a), float(b)) for t, a, b in zip(ts[::32], q[::32, 0], q[::32, 1])]
        raise ThresholdNotFoundError(f"no crossing of 1+lr*Delta or Phi below {ceiling}", trace)
    best = min(found, key=lambda c: c.t)
    return best, {c.name: c for c in found}


_FIOS_CONDITIONS = (
    ("Phi>0", lambda e: phi_constraint(e)),
    ("1+lr*Delta<0", lambda e: -one_plus_lr_delta(e)),
    ("theta_lb>0", lambda e: cutoff_formulas(e).theta_lb),
    ("theta_lb<1", lambda e: 1.0 - cutoff_formulas(e).theta_lb),
    ("FIOS H-L", fios_hl_slack),
)


def threshold_t_fios(env: HouseholdEnvironment, search_ceiling=None, _q=None):
    ceiling = search_ceiling or env.default_ceiling()
    ts = log_grid(env.t_l, ceiling)
    q = _q if _q is not None else _q_values(env, ts)
    conds = np.stack([q[:, 1], -q[:, 0], q[:, 2], 1.0 - q[:, 2], q[:, 3]], axis=1)
    holds = conds > 0
    holds[:, 4] = conds[:, 4] >= 0
    allh = np.all(holds, axis=1)
    if not allh[-1]:
        failing = [n for (n, _), h in zip(_FIOS_CONDITIONS, holds[-1]) if not h]
        raise ThresholdNotFoundError(f"tail violated at ceiling {ceiling}: {failing}",
                                     [(float(ts[-1]), failing)])
    bad = np.nonzero(~allh)[0]
    if len(bad) == 0:
        return Crossing("all", float(ts[0]), (float(ts[0]), float(ts[0])), 0.0), {}
    k = int(bad[-1])
    lo, hi = float(ts[k]), float(ts[k + 1])
    out = {}
    for j, (name, fn) in enumerate(_FIOS_CONDITIONS):
        if holds[k, j]:
            continue
        t, w = _bisect_t(lambda t, fn=fn: fn(env.economy(t)), lo, hi)
        out[name] = Crossing(name, t, (lo, hi), w)
    best = max(out.values(), key=lambda c: c.t)
    return best, out


def thresholds(env: HouseholdEnvironment = None, search_ceiling=None) -> Thresholds:
    env = env or baseline()
    ceiling = search_ceiling or env.default_ceiling()
    ts = log_grid(env.t_l, ceiling)
    q = _q_values(env, ts)
    s, sc = threshold_t_sym(env, ceiling, q)
    f, fc = threshold_t_fios(env, ceiling, q)
    tol = max([c.achieved_tol for c in list(sc.values()) + list(fc.values())] + [0.0])
    cross = dict(sc)
    cross.update({"fios:" + k: v for k, v in fc.items()})
    return Thresholds(s.t, f.t, s.name, cross, f.bracket, tol, ceiling)


# ---------------------------------------------------------------------------
# sweep

REGIMES = ("symmetric-only", "multiplicity-window", "fios-only", "degenerate")


@dataclass
class SweepPoint:
    t_h: float
    payoffs: PayoffMatrix | None
    deltas: DeltaPair | None
    theta_sym: float
    theta_lb: float
    theta_ub: float
    phi_constraint: float
    one_plus_lr_delta: float
    regime: str
    equilibria: list = field(default_factory=list)
    flags: list = field(default_factory=list)


def regime_of(es) -> str:
    kinds = es.kinds()
    if len(kinds) == 1 and kinds[0] == "SymmetricAM":
        return "symmetric-only"
    if len(kinds) == 1 and kinds[0] == "FIOS":
        return "fios-only"
    if len(kinds) >= 2:
        return "multiplicity-window"
    return "degenerate"


def sweep_point(env: HouseholdEnvironment, t_h: float) -> SweepPoint:
    nan = math.nan
    try:
        d = env.derivation(t_h)
    except MelError as exc:
        return SweepPoint(t_h, None, None, nan, nan, nan, nan, nan, "degenerate",
                          flags=[f"payoff derivation failed: {exc}"])
    e = Economy(d.payoffs, CostFunction.affine(env.c), env.lam, env.r)
    f = cutoff_formulas(e)
    es = enumerate_equilibria(e)
    return SweepPoint(
        t_h, d.payoffs, deltas(d.payoffs), f.theta_sym, f.theta_lb, f.theta_ub,
        phi_constraint(e), f.one_plus_lr_delta, regime_of(es),
        equilibria=[(r.kind, r.theta) for r in es], flags=list(d.flags),
    )


class _PointFn:
    def __init__(self, env):
        self.env = env

    def __call__(self, t):
        return sweep_point(self.env, float(t))


@dataclass
class SweepResult:
    points: list
    monotone_violations: list
    jump: dict | None

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def regimes(self):
        return [p.regime for p in self.points]


def sweep(env: HouseholdEnvironment, t_grid) -> SweepResult:
    ts = [float(t) for t in t_grid]
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_grid must be sorted ascending")
    pts = pmap(_PointFn(env), ts)
    viol = []
    for i in range(1, len(pts) - 1):
        a, b, c = pts[i - 1], pts[i], pts[i + 1]
        if not all(p.regime == "symmetric-only" for p in (a, b, c)):
            continue
        h = c.t_h - a.t_h
        dh = (c.deltas.delta_h - a.deltas.delta_h) / h
        dd = (c.deltas.delta - a.deltas.delta) / h
        if dh >= abs(dd) and c.theta_sym < b.theta_sym - 1e-12:
            viol.append((b.t_h, b.theta_sym, c.theta_sym))
    jump = None
    for a, b in zip(pts, pts[1:]):
        if b.regime == "fios-only" and a.regime != "fios-only":
            sym = [th for k, th in a.equilibria if k == "SymmetricAM"]
            fios = [th for k, th in b.equilibria if k == "FIOS"]
            jump = {
                "t_below": a.t_h, "t_above": b.t_h,
                "theta_sym_below": sym[0][0] if sym else math.nan,
                "fios_above": fios[0] if fios else (math.nan, math.nan),
            }
    return SweepResult(pts, viol, jump)


# ---------------------------------------------------------------------------
# admissibility


@dataclass
class AdmissibilityReport:
    c1: bool
    c2: bool
    c3: bool
    witnesses: dict
    label: str = "finite-horizon evidence, not proof"

    @property
    def all_pass(self):
        return self.c1 and self.c2 and self.c3


def admissibility_check(env: HouseholdEnvironment, horizon: float = 50.0, n: int = GRID_POINTS,
                        c2_floor: float = 0.05, growth: float = 1.5) -> AdmissibilityReport:
    if not horizon > env.t_l:
        raise ValueError("horizon must exceed t_l")
    ts = log_grid(env.t_l, horizon, n)
    rows = []
    for t in ts:
        e = env.economy(float(t))
        f = cutoff_formulas(e)
        rows.append((e.deltas.delta, e.deltas.delta_h, f.theta_sym, f.theta_lb,
                     fios_hl_slack(e), check_ranking(e.payoffs).ok))
    a = np.array(rows, dtype=float)
    half = n // 2
    D, Dh, ts_sym, tlb, hl, rk = (a[:, i] for i in range(6))
    tail = slice(half, None)
    big = lambda x: abs(x[-1]) >= growth * max(abs(x[half]), 1e-12)
    c1 = bool(np.all(np.diff(D[tail]) < 0) and np.all(np.diff(Dh[tail]) > 0)
              and big(D) and big(Dh) and D[-1] < 0)
    c2_min = float(np.min(ts_sym[tail]))
    c2 = bool(c2_min > c2_floor)
    ok = (tlb > 0) & (tlb < 1) & (hl >= 0) & (rk > 0)
    T = None
    for i in range(n - 1, -1, -1):
        if not ok[i]:
            break
        T = float(ts[i])
    c3 = T is not None
    w = {
        "delta_at_tail_start": float(D[half]), "delta_at_horizon": float(D[-1]),
        "delta_h_at_tail_start": float(Dh[half]), "delta_h_at_horizon": float(Dh[-1]),
        "theta_sym_tail_min": c2_min, "c3_T": T, "ranking_ok_on_tail": bool(np.all(rk[tail] > 0)),
    }
    return AdmissibilityReport(c1, c2, c3, w)


# ---------------------------------------------------------------------------
# constructive premium raise


def construct_high_premium(base: PayoffMatrix, lam: float, r: float, c: float,
                           target_lb: float = 0.5, max_doublings: int = 200) -> PayoffMatrix:
    """Raise phi_HH, phi_HL, phi_LH (phi_LL fixed) until FIOS is the unique equilibrium."""
    e0 = Economy(base, CostFunction.affine(c), lam, r)
    lr = e0.lr
    d = deltas(base)
    span = lam * (base.phi_hh - base.phi_ll)
    checks = {
        "(i)": span < r * base.phi_ll,
        "(ii)": span < r + lam,
        "(iii)": 0.0 < lr * d.delta_h - c < 1.0,
    }
    if not all(checks.values()):
        raise PreconditionError(f"hypotheses failed: {[k for k, v in checks.items() if not v]}")
    ll = base.phi_ll
    gap = (target_lb + c) / lr
    eps = min(1e-3, 0.01 * gap)

    def build(a):
        b = a + gap - eps
        return PayoffMatrix(b + eps, b, a, ll)

    def good(p):
        dh = deltas(p)
        if not (lr * (p.phi_lh - ll) > 1.0):
            return False
        th = (lr * dh.delta_h - c) / (1.0 - lr * dh.delta)
        if not th * (p.phi_lh - ll) > r * ll / lam:
            return False
        return p.phi_hh >= base.phi_hh and p.phi_hl >= base.phi_hl and p.phi_lh >= base.phi_lh

    step = max(1.0 / lr, base.phi_lh - ll, 1e-3)
    a = ll + step
    for _ in range(max_doublings):
        p = build(a)
        if good(p):
            break
        step *= 2.0
        a = ll + step
    else:
        raise PreconditionError("construction did not converge")
    es = enumerate_equilibria(Economy(p, CostFunction.affine(c), lam, r))
    if es.kinds() != ["FIOS"]:
        raise PreconditionError(f"constructed payoffs do not give a unique FIOS: {es.kinds()}")
    return p


def higher_skill_premium(new: PayoffMatrix, old: PayoffMatrix) -> bool:
    return (new.phi_hh >= old.phi_hh and new.phi_hl >= old.phi_hl and new.phi_lh >= old.phi_lh
            and new.phi_ll == old.phi_ll)
