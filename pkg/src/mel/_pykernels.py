"""Numpy implementations of the compiled kernels (same inputs, same outputs)."""
from __future__ import annotations

import numpy as np


def _cinv(y, ctab):
    k = ctab.shape[0]
    lo = np.clip(np.searchsorted(ctab, y, side="right") - 1, 0, k - 2)
    w = (y - ctab[lo]) / (ctab[lo + 1] - ctab[lo])
    x = (lo + w) / (k - 1)
    return np.where(y <= ctab[0], 0.0, np.where(y >= ctab[k - 1], 1.0, x))


def _ical_ok(v, phi, al, vtol, rtol):
    s = vtol + rtol * np.maximum(np.maximum(np.abs(v), abs(phi)), 1.0)
    return v <= phi + s if al == 1.0 else v >= phi - s


def scan_grid(phi, lam, r, ctab, n, alpha, tol_m, tol_w, vtol, rtol):
    phh, phl, plh, pll = (float(x) for x in phi)
    amh, aml, awh, awl = (float(x) for x in alpha)
    g = np.arange(n + 1) / n
    tm = g[:, None] * np.ones((1, n + 1))
    tw = np.ones((n + 1, 1)) * g[None, :]
    qm, qw = 1.0 - tm, 1.0 - tw
    with np.errstate(invalid="ignore"):
        vmh = lam * (tw * phh + qw * amh * phl) / (r + lam * (tw + qw * amh))
        vml = lam * (tw * awh * plh + qw * aml * awl * pll) / (r + lam * (tw * awh + qw * aml * awl))
        vwh = lam * (tm * phh + qm * awh * phl) / (r + lam * (tm + qm * awh))
        vwl = lam * (tm * amh * plh + qm * awl * aml * pll) / (r + lam * (tm * amh + qm * awl * aml))
        bm = _cinv(vmh - vml, ctab)
        bw = _cinv(vwh - vwl, ctab)
    rm = np.abs(bm - tm) / tol_m
    rw = np.abs(bw - tw) / tol_w
    resid = np.where(rm > rw, rm, rw)
    ok = (rm <= 1.0) & (rw <= 1.0)
    ok &= _ical_ok(vmh, phl, amh, vtol[0], rtol) & _ical_ok(vml, pll, aml, vtol[1], rtol)
    ok &= _ical_ok(vwh, phl, awh, vtol[2], rtol) & _ical_ok(vwl, pll, awl, vtol[3], rtol)
    ok &= ~(tm > 0) | (tw + qw * amh > 0)
    ok &= ~(qm > 0) | (tw * awh + qw * aml * awl > 0)
    ok &= ~(tw > 0) | (tm + qm * awh > 0)
    ok &= ~(qw > 0) | (tm * amh + qm * awl * aml > 0)
    return ok.astype(np.uint8), resid


def _first(slots, times, partner, n):
    first = np.full(n, np.inf)
    part = np.full(n, -1, dtype=np.int8)
    u, idx = np.unique(slots, return_index=True)
    first[u] = times[idx]
    part[u] = partner[idx]
    return first, part


def _gaps(slots, times, t_cut):
    order = np.argsort(slots, kind="stable")
    s, t = slots[order], times[order]
    keep = (s[1:] == s[:-1]) & (t[:-1] <= t_cut)
    return (t[1:] - t[:-1])[keep]


def scan_events(t, mi, wi, um, uw, skill_m, skill_w, acc_m, acc_w, t_cut):
    sm = skill_m[mi].astype(np.intp)
    sw = skill_w[wi].astype(np.intp)
    hit = (um < acc_m[sm, sw]) & (uw < acc_w[sw, sm]) & (t <= t_cut)
    k = np.nonzero(hit)[0]
    first_m, part_m = _first(mi[k], t[k], sw[k].astype(np.int8), skill_m.shape[0])
    first_w, part_w = _first(wi[k], t[k], sm[k].astype(np.int8), skill_w.shape[0])
    cnt_m = np.bincount(mi[k], minlength=skill_m.shape[0]).astype(np.int64)
    cnt_w = np.bincount(wi[k], minlength=skill_w.shape[0]).astype(np.int64)
    gaps = np.concatenate([_gaps(mi, t, t_cut), _gaps(wi, t, t_cut)])
    return first_m, part_m, first_w, part_w, cnt_m, cnt_w, gaps
