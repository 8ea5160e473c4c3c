"""Brute-force fixed-point search on a cutoff grid.

Every (theta_m, theta_w) grid point is tested against each of the 16 pure
acceptance corners. A point is retained when both cutoffs are within grid
resolution of their best responses and every acceptance entry obeys IC-AL
within grid resolution. Retained points are grouped into connected clusters.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import kernels
from .economy import ALPHA_KEYS, KNIFE_TOL, Economy, StrategyProfile
from .equilibrium import EquilibriumSet, classify_pattern, enumerate_equilibria
from .values import value_arrays

CORNERS = tuple(itertools.product((1.0, 0.0), repeat=4))
COST_TABLE_N = 4097
_SAFETY = 1.05


@dataclass
class FixedPointCluster:
    theta: tuple          # representative cutoffs (min residual)
    alpha: tuple
    members: np.ndarray   # (k, 2) grid indices
    residual: float
    pattern: str          # 'AM', 'PAM' or 'other'
    marginal: bool        # some condition is tight to within grid resolution
    n: int

    @property
    def size(self) -> int:
        return len(self.members)

    def distance(self, theta) -> float:
        """Sup-norm distance from ``theta`` to the nearest member."""
        pts = self.members / self.n
        d = np.max(np.abs(pts - np.asarray(theta, dtype=float)), axis=1)
        return float(np.min(d))


@dataclass
class GridTolerances:
    cutoff: tuple   # (tol_m, tol_w)
    value: tuple    # per acceptance entry, ALPHA_KEYS order


def cost_table(e: Economy, k: int = COST_TABLE_N) -> np.ndarray:
    if e.cost.is_affine:
        return np.array([e.cost(0.0), e.cost(1.0)], dtype=float)
    x = np.linspace(0.0, 1.0, k)
    tab = np.asarray(e.cost(x), dtype=float)
    if np.any(np.diff(tab) <= 0):
        raise ValueError("cost must be strictly increasing on [0,1]")
    return tab


def _table_inverse(y, ctab):
    x = np.linspace(0.0, 1.0, len(ctab))
    return np.interp(y, ctab, x)


def grid_tolerances(e: Economy, alpha, n: int, ctab) -> GridTolerances:
    """Lipschitz-aware tolerances so a true fixed point keeps its nearest grid point."""
    phi = e.payoffs.as_tuple()
    th = np.linspace(0.0, 1.0, max(n, 64) * 4 + 1)
    amh, aml, awh, awl = alpha
    vm = value_arrays(phi, e.lam, e.r, th, amh, aml, awh, awl)
    vw = value_arrays(phi, e.lam, e.r, th, awh, awl, amh, aml)
    h = th[1] - th[0]

    def lip(arr):
        return _SAFETY * float(np.max(np.abs(np.diff(arr)))) / h

    cut = []
    for vh, vl in (vm, vw):
        lb = lip(_table_inverse(vh - vl, ctab))
        cut.append((0.5 + 0.5 * lb) / n + 1e-12)
    vt = [0.5 * lip(v) / n for v in (vm[0], vm[1], vw[0], vw[1])]
    return GridTolerances(tuple(cut), tuple(vt))


def _marginal(e: Economy, prof: StrategyProfile, tols: GridTolerances, n: int) -> bool:
    """True when some condition at ``prof`` is satisfied or violated by less
    than the distance a retained grid point may sit from an exact solution."""
    phi = e.payoffs.as_tuple()
    amh, aml, awh, awl = prof.alpha
    vm = value_arrays(phi, e.lam, e.r, prof.theta_w, amh, aml, awh, awl)
    vw = value_arrays(phi, e.lam, e.r, prof.theta_m, awh, awl, amh, aml)
    reach = max(tols.cutoff) + 1.0 / n
    vals = (vm[0], vm[1], vw[0], vw[1])
    for k, v in enumerate(vals):
        s = ALPHA_KEYS[k][1]
        ref = e.payoffs.phi(s, "L")
        band = 2.0 * n * tols.value[k] * reach
        if abs(float(v) - ref) <= band + KNIFE_TOL * max(1.0, abs(ref), abs(float(v))):
            return True
    # boundary cutoffs: signed distance of the unclipped best response
    for th, (vh, vl), tol in ((prof.theta_m, vm, tols.cutoff[0]), (prof.theta_w, vw, tols.cutoff[1])):
        if 0.0 < th < 1.0:
            continue
        x = (float(vh) - float(vl) - float(e.cost(th))) / float(e.cost.deriv(th))
        if (th == 0.0 and 0.0 < x <= tol + 1.0 / n) or (th == 1.0 and -(tol + 1.0 / n) <= x < 0.0):
            return True
    return False


def _scan(e: Economy, alpha, n, ctab, tols):
    phi = np.ascontiguousarray(e.payoffs.as_tuple(), dtype=float)
    keep, resid = kernels.scan_grid(
        phi, float(e.lam), float(e.r), ctab, int(n), np.asarray(alpha, dtype=float),
        tols.cutoff[0], tols.cutoff[1], np.asarray(tols.value, dtype=float), KNIFE_TOL,
    )
    return np.asarray(keep, dtype=bool), np.asarray(resid)


def fixed_point_search(e: Economy, grid_n: int = 500) -> list:
    """All fixed-point clusters on the (grid_n+1)^2 cutoff grid."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    ctab = np.ascontiguousarray(cost_table(e), dtype=float)
    out = []
    struct = np.ones((3, 3), dtype=bool)
    for alpha in CORNERS:
        tols = grid_tolerances(e, alpha, grid_n, ctab)
        keep, resid = _scan(e, alpha, grid_n, ctab, tols)
        if not keep.any():
            continue
        lab, k = ndimage.label(keep, structure=struct)
        for c in range(1, k + 1):
            idx = np.argwhere(lab == c)
            r = resid[idx[:, 0], idx[:, 1]]
            best = idx[int(np.argmin(r))]
            theta = (best[0] / grid_n, best[1] / grid_n)
            prof = StrategyProfile(float(theta[0]), float(theta[1]), alpha)
            out.append(FixedPointCluster(
                theta=theta, alpha=alpha, members=idx, residual=float(np.min(r)),
                pattern=classify_pattern(prof), marginal=_marginal(e, prof, tols, grid_n), n=grid_n,
            ))
    out.sort(key=lambda c: (-c.theta[0], -c.theta[1]))
    return out


# ----------------------------------------------------------------------------
# comparison with the closed-form enumeration


def _mirror(rep):
    a = rep.alpha
    return (rep.theta[1], rep.theta[0]), (a[2], a[3], a[0], a[1])


def closed_form_points(es: EquilibriumSet):
    """(theta, alpha, knife) for every closed-form report and its mirror image."""
    pts = []
    tagged = ([(r, False) for r in es.reports] + [(r, True) for r in es.knife_edges]
              + [(r, r.knife_edge) for r in es.off_path_sustained])
    for rep, knife in tagged:
        pts.append((tuple(rep.theta), tuple(rep.alpha), knife))
        th, al = _mirror(rep)
        if th != tuple(rep.theta):
            pts.append((th, al, knife))
    return pts


@dataclass
class OracleComparison:
    grid_n: int
    matched: list = field(default_factory=list)       # (point, cluster index)
    missing: list = field(default_factory=list)       # closed-form points without a cluster
    spurious: list = field(default_factory=list)      # cluster indices without a closed form
    unresolved: list = field(default_factory=list)    # marginal clusters without a closed form
    outside_class: list = field(default_factory=list)  # clusters with a pattern other than AM/PAM

    @property
    def ok(self) -> bool:
        return not self.missing and not self.spurious


def compare(e: Economy, clusters, es: EquilibriumSet | None = None, grid_n=None) -> OracleComparison:
    if es is None:
        es = enumerate_equilibria(e, check=False)
    n = grid_n or (clusters[0].n if clusters else 500)
    cell = 1.0 / n + 1e-12
    pts = closed_form_points(es)
    out = OracleComparison(n)
    for th, al, knife in pts:
        if knife:
            continue
        hit = [i for i, c in enumerate(clusters) if c.alpha == al and c.distance(th) <= cell]
        if hit:
            out.matched.append(((th, al), hit[0]))
        else:
            out.missing.append((th, al))
    for i, c in enumerate(clusters):
        if c.pattern == "other":
            out.outside_class.append(i)
            continue
        near = any(c.distance(th) <= cell and (knife or c.alpha == al) for th, al, knife in pts)
        if near:
            continue
        (out.unresolved if c.marginal else out.spurious).append(i)
    return out


def cross_check(e: Economy, grid_n: int = 500) -> OracleComparison:
    clusters = fixed_point_search(e, grid_n)
    return compare(e, clusters, enumerate_equilibria(e, check=False), grid_n)
