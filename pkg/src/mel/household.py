"""Pooled-income household game and the match payoffs it induces.

Members choose market effort e_i in [0,1]. Household income is y = t_m e_m +
t_w e_w, home time is h = 2 - e_m - e_w, and member i gets
U_i = psi(y, h) - g(1 - e_i).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .economy import PayoffMatrix, check_ranking
from .errors import AmbiguousNashError, SolverFailure

FOC_TOL = 1e-12
EDGE = 1e-12


@dataclass(frozen=True)
class WagePair:
    t_m: float
    t_w: float

    def __post_init__(self):
        for v in (self.t_m, self.t_w):
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"wages must be finite and >= 0, got {v}")
        if self.t_m <= 0 and self.t_w <= 0:
            raise ValueError("at least one wage must be positive")

    def swapped(self) -> "WagePair":
        return WagePair(self.t_w, self.t_m)


@dataclass(frozen=True)
class PihSpec:
    """psi with analytic first partials; second partials optional."""

    psi: Callable
    psi_y: Callable
    psi_h: Callable
    g: Callable
    g_prime: Callable
    psi_yy: Optional[Callable] = None
    psi_yh: Optional[Callable] = None
    psi_hh: Optional[Callable] = None
    g_second: Optional[Callable] = None
    family: str = "custom"

    def utility(self, wages: WagePair, e_m, e_w):
        y = wages.t_m * e_m + wages.t_w * e_w
        h = 2.0 - e_m - e_w
        base = self.psi(y, h)
        return base - self.g(1.0 - e_m), base - self.g(1.0 - e_w)

    def foc(self, wages: WagePair, e_m, e_w):
        """(dU_m/de_m, dU_w/de_w)."""
        y = wages.t_m * e_m + wages.t_w * e_w
        h = 2.0 - e_m - e_w
        py, ph = self.psi_y(y, h), self.psi_h(y, h)
        return (wages.t_m * py - ph + self.g_prime(1.0 - e_m),
                wages.t_w * py - ph + self.g_prime(1.0 - e_w))

    def _second(self, y, h):
        if self.psi_yy is not None and self.psi_yh is not None and self.psi_hh is not None:
            return self.psi_yy(y, h), self.psi_yh(y, h), self.psi_hh(y, h)
        s = 1e-6
        yy = (self.psi_y(y + s, h) - self.psi_y(y - s, h)) / (2 * s)
        hh = (self.psi_h(y, h + s) - self.psi_h(y, h - s)) / (2 * s)
        yh = (self.psi_y(y, h + s) - self.psi_y(y, h - s)) / (2 * s)
        return yy, yh, hh

    def _gpp(self, z):
        if self.g_second is not None:
            return self.g_second(z)
        s = 1e-6
        return (self.g_prime(z + s) - self.g_prime(z - s)) / (2 * s)

    def pseudo_jacobian(self, wages: WagePair, e_m, e_w):
        """Jacobian of the pseudo-gradient (dU_m/de_m, dU_w/de_w)."""
        t = (wages.t_m, wages.t_w)
        e = (e_m, e_w)
        y = t[0] * e_m + t[1] * e_w
        h = 2.0 - e_m - e_w
        yy, yh, hh = self._second(y, h)
        J = np.empty((2, 2) + np.shape(y))
        for i in range(2):
            for j in range(2):
                J[i, j] = yy * t[i] * t[j] - yh * (t[i] + t[j]) + hh
            J[i, i] = J[i, i] - self._gpp(1.0 - e[i])
        return J


class _CobbDouglas:
    # picklable evaluators for psi = K [a log y + (1-a) log h], g = z^2/2
    def __init__(self, K, a):
        self.K, self.a = float(K), float(a)

    def psi(self, y, h):
        return self.K * (self.a * np.log(y) + (1 - self.a) * np.log(h))

    def psi_y(self, y, h):
        return self.K * self.a / y

    def psi_h(self, y, h):
        return self.K * (1 - self.a) / h

    def psi_yy(self, y, h):
        return -self.K * self.a / (y * y)

    def psi_yh(self, y, h):
        return 0.0 * y

    def psi_hh(self, y, h):
        return -self.K * (1 - self.a) / (h * h)


def _quad_g(z):
    return 0.5 * z * z


def _quad_gp(z):
    return z


def _quad_gpp(z):
    return 1.0 + 0.0 * z


@dataclass(frozen=True)
class CobbDouglasPih:
    K: float = 8.0
    cd_share: float = 0.6

    def __post_init__(self):
        if not (self.K > 0):
            raise ValueError("K must be positive")
        if not (0.0 < self.cd_share < 1.0):
            raise ValueError("cd_share must lie in (0,1)")

    def spec(self) -> PihSpec:
        cd = _CobbDouglas(self.K, self.cd_share)
        return PihSpec(cd.psi, cd.psi_y, cd.psi_h, _quad_g, _quad_gp,
                       cd.psi_yy, cd.psi_yh, cd.psi_hh, _quad_gpp,
                       family=f"cobb-douglas(K={self.K}, cd_share={self.cd_share})")


def as_spec(spec) -> PihSpec:
    return spec.spec() if isinstance(spec, CobbDouglasPih) else spec


@dataclass
class EffortSolution:
    e_m: float
    e_w: float
    regime: str
    kkt_residuals: dict
    u_m: float
    u_w: float
    strict_nash: bool = True
    note: str = ""


def _feasible(w: WagePair, em, ew):
    return w.t_m * em + w.t_w * ew > 0 and 2.0 - em - ew > 0


def symmetric_root(spec, t: float) -> float:
    """Root in (0,1) of the FOC restricted to e_m = e_w = e at wage t."""
    spec = as_spec(spec)
    w = WagePair(t, t)
    f = lambda e: spec.foc(w, e, e)[0]
    lo, hi = EDGE, 1.0 - EDGE
    if f(lo) * f(hi) > 0:
        return math.nan
    return optimize.brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


def _newton(spec, w, x0, maxit=60):
    x = np.array(x0, dtype=float)
    F = np.array(spec.foc(w, *x))
    stall = 0
    for _ in range(maxit):
        if np.max(np.abs(F)) <= FOC_TOL:
            return x, F
        J = spec.pseudo_jacobian(w, *x)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if not (np.isfinite(det) and det != 0.0):
            return None, F
        step = np.array([J[0, 1] * F[1] - J[1, 1] * F[0], J[1, 0] * F[0] - J[0, 0] * F[1]]) / det
        t = 1.0
        nF = np.max(np.abs(F))
        while t > 1e-10:
            xn = x + t * step
            if 0.0 < xn[0] < 1.0 and 0.0 < xn[1] < 1.0 and _feasible(w, *xn):
                Fn = np.array(spec.foc(w, *xn))
                if np.all(np.isfinite(Fn)) and np.max(np.abs(Fn)) < nF:
                    break
            t *= 0.5
        else:
            return None, F
        # heavily damped steps mean the iterate is pressed against the boundary
        stall = stall + 1 if t < 1e-3 else 0
        if stall >= 4:
            return None, Fn
        x, F = xn, Fn
    return (x, F) if np.max(np.abs(F)) <= 1e-10 else (None, F)


def _interior(spec, w):
    starts = [(a, b) for a in (0.25, 0.5, 0.75) for b in (0.25, 0.5, 0.75)]
    es = symmetric_root(spec, 0.5 * (w.t_m + w.t_w))
    if math.isfinite(es):
        starts.append((es, es))
    for s in starts:
        x, F = _newton(spec, w, s)
        if x is not None:
            return x, F
    return None, None


def _kkt_ok(val, F, tol=1e-10):
    # val in {0, 1, None(interior)}
    if val is None:
        return abs(F) <= 1e-10
    return F <= tol if val == 0.0 else F >= -tol


def _boundary_candidates(spec, w):
    """All KKT points with at least one coordinate on the boundary."""
    out = []
    for vm in (0.0, 1.0, None):
        for vw in (0.0, 1.0, None):
            if vm is None and vw is None:
                continue
            if vm is not None and vw is not None:
                if not _feasible(w, vm, vw):
                    continue
                F = spec.foc(w, vm, vw)
                if _kkt_ok(vm, F[0]) and _kkt_ok(vw, F[1]):
                    out.append((vm, vw, F))
                continue
            free = 0 if vm is None else 1
            fixed = vw if vm is None else vm

            def fi(x):
                em, ew = (x, fixed) if free == 0 else (fixed, x)
                return spec.foc(w, em, ew)[free]
            lo, hi = EDGE, 1.0 - EDGE
            pts = [(x, fixed) if free == 0 else (fixed, x) for x in (lo, hi)]
            if not all(_feasible(w, *p) for p in pts):
                ok = [x for x in np.linspace(lo, hi, 401)
                      if _feasible(w, *((x, fixed) if free == 0 else (fixed, x)))]
                if len(ok) < 2:
                    continue
                lo, hi = ok[0], ok[-1]
            flo, fhi = fi(lo), fi(hi)
            if not (np.isfinite(flo) and np.isfinite(fhi)) or flo * fhi > 0:
                continue
            x = optimize.brentq(fi, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
            em, ew = (x, fixed) if free == 0 else (fixed, x)
            F = spec.foc(w, em, ew)
            other_val = vw if free == 0 else vm
            if _kkt_ok(other_val, F[1 - free]) and abs(F[free]) <= 1e-9:
                out.append((em, ew, F))
    return out


def _describe(em, ew):
    return "corner-specialized" if (em, ew) in ((1.0, 0.0), (0.0, 1.0)) else "boundary-other"


def _residuals(F, em, ew):
    return {"foc_m": float(F[0]), "foc_w": float(F[1]), "e_m": float(em), "e_w": float(ew)}


def _solve_ordered(spec, w, selection):
    x, F = _interior(spec, w)
    if x is not None:
        um, uw = spec.utility(w, *x)
        return EffortSolution(float(x[0]), float(x[1]), "interior", _residuals(F, *x),
                              float(um), float(uw))
    if selection == "specialize" and w.t_m > w.t_w:
        F = spec.foc(w, 1.0, 0.0)
        if _feasible(w, 1.0, 0.0) and F[0] >= 0:
            strict = F[1] <= 0
            um, uw = spec.utility(w, 1.0, 0.0)
            note = "" if strict else "specialization corner adopted; low-wage member's KKT fails"
            return EffortSolution(1.0, 0.0, "corner-specialized" if strict else "boundary-other",
                                  _residuals(F, 1.0, 0.0), float(um), float(uw), strict, note)
    cands = _boundary_candidates(spec, w)
    uniq = []
    for c in cands:
        if not any(abs(c[0] - u[0]) < 1e-9 and abs(c[1] - u[1]) < 1e-9 for u in uniq):
            uniq.append(c)
    if not uniq:
        grid = {f"({a},{b})": spec.foc(w, a, b) for a in (0.0, 0.5, 1.0) for b in (0.0, 0.5, 1.0)
                if _feasible(w, a, b)}
        raise SolverFailure(f"no KKT point for wages {w}", residuals=grid)
    if len(uniq) > 1:
        raise AmbiguousNashError(f"{len(uniq)} KKT points for wages {w}",
                                 residuals={f"({c[0]:.6g},{c[1]:.6g})": c[2] for c in uniq})
    em, ew, F = uniq[0]
    um, uw = spec.utility(w, em, ew)
    return EffortSolution(float(em), float(ew), _describe(em, ew), _residuals(F, em, ew),
                          float(um), float(uw))


def solve_nash(spec, wages: WagePair, selection: str = "specialize") -> EffortSolution:
    """Nash equilibrium of the effort game.

    selection='specialize' (default) adopts the full-specialization corner
    whenever no interior equilibrium exists and the high-wage member's
    upper-bound KKT condition holds, flagging it ``boundary-other`` if the
    low-wage member would deviate. selection='strict' returns the KKT point.
    """
    if selection not in ("specialize", "strict"):
        raise ValueError(f"unknown selection {selection!r}")
    spec = as_spec(spec)
    if not isinstance(wages, WagePair):
        wages = WagePair(*wages)
    if wages.t_m < wages.t_w:
        s = _solve_ordered(spec, wages.swapped(), selection)
        res = {"foc_m": s.kkt_residuals["foc_w"], "foc_w": s.kkt_residuals["foc_m"],
               "e_m": s.e_w, "e_w": s.e_m}
        return EffortSolution(s.e_w, s.e_m, s.regime, res, s.u_w, s.u_m, s.strict_nash, s.note)
    return _solve_ordered(spec, wages, selection)


@dataclass
class PayoffDerivation:
    payoffs: PayoffMatrix
    high: EffortSolution
    mixed: EffortSolution
    low: EffortSolution
    ranking_ok: bool
    flags: list = field(default_factory=list)


def derive_match_payoffs_detailed(spec, t_l: float, t_h: float,
                                  selection: str = "specialize") -> PayoffDerivation:
    if not (t_h >= t_l > 0):
        raise ValueError(f"need t_h >= t_l > 0, got t_l={t_l}, t_h={t_h}")
    spec = as_spec(spec)
    hi = solve_nash(spec, WagePair(t_h, t_h), selection)
    mx = solve_nash(spec, WagePair(t_h, t_l), selection)
    lo = solve_nash(spec, WagePair(t_l, t_l), selection)
    p = PayoffMatrix(hi.u_m, mx.u_m, mx.u_w, lo.u_m)
    rk = check_ranking(p)
    flags = [] if rk.ok else [f"payoff ranking violated: {rk.slacks}"]
    if mx.regime == "boundary-other":
        flags.append("mixed match uses the specialization corner")
    return PayoffDerivation(p, hi, mx, lo, rk.ok, flags)


def derive_match_payoffs(spec, t_l: float, t_h: float, selection: str = "specialize") -> PayoffMatrix:
    return derive_match_payoffs_detailed(spec, t_l, t_h, selection).payoffs


def mixed_match_closed_form(K: float, cd_share: float, t_h: float):
    """Mixed-match payoffs at the (1,0) corner under Cobb-Douglas with g(z)=z^2/2."""
    base = K * cd_share * math.log(t_h)
    return base, base - 0.5


@dataclass
class UniquenessReport:
    min_margin: float
    argmin: tuple
    g_strictly_convex: bool
    flagged: bool
    margins: np.ndarray = field(repr=False, default=None)
    grid: np.ndarray = field(repr=False, default=None)
    note: str = "numeric evidence only"


def uniqueness_diagnostic(spec, wages: WagePair, n: int = 101) -> UniquenessReport:
    """Diagonal strict concavity check on an interior grid.

    The margin at a point is minus the largest eigenvalue of the symmetrised
    pseudo-gradient Jacobian, so a positive minimum margin supports uniqueness.
    """
    spec = as_spec(spec)
    if not isinstance(wages, WagePair):
        wages = WagePair(*wages)
    g = np.linspace(0.0, 1.0, n + 2)[1:-1]
    EM, EW = np.meshgrid(g, g, indexing="ij")
    ok = (wages.t_m * EM + wages.t_w * EW > 0) & (2.0 - EM - EW > 0)
    with np.errstate(all="ignore"):
        J = spec.pseudo_jacobian(wages, EM, EW)
    S = 0.5 * (J + np.swapaxes(J, 0, 1))
    a, b, d = S[0, 0], S[0, 1], S[1, 1]
    lam_max = 0.5 * (a + d) + np.sqrt(0.25 * (a - d) ** 2 + b * b)
    margin = np.where(ok, -lam_max, np.nan)
    k = np.nanargmin(margin)
    i, j = np.unravel_index(k, margin.shape)
    z = np.linspace(0.0, 1.0, 201)
    gpp = np.asarray(spec._gpp(z), dtype=float) * np.ones_like(z)
    convex = bool(np.all(gpp > 1e-12))
    mm = float(margin[i, j])
    return UniquenessReport(mm, (float(g[i]), float(g[j])), convex,
                            flagged=(mm <= 0 or not convex), margins=margin, grid=g)
