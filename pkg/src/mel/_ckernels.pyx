# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: best-response grid scan and market event scan."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()


cdef inline double cinv(double y, const double[::1] ctab) nogil:
    cdef Py_ssize_t k = ctab.shape[0]
    cdef Py_ssize_t lo = 0, hi = k - 1, mid
    cdef double x0, w
    if y <= ctab[0]:
        return 0.0
    if y >= ctab[k - 1]:
        return 1.0
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if ctab[mid] <= y:
            lo = mid
        else:
            hi = mid
    w = (y - ctab[lo]) / (ctab[hi] - ctab[lo])
    return (lo + w) / (k - 1)


cdef inline double mx3(double a, double b, double c) nogil:
    cdef double m = 1.0
    a = fabs(a); b = fabs(b); c = fabs(c)
    if a > m:
        m = a
    if b > m:
        m = b
    if c > m:
        m = c
    return m


cdef inline bint ical_ok(double v, double phi, double al, double vtol, double rtol) nogil:
    cdef double s = vtol + rtol * mx3(v, phi, 0.0)
    if al == 1.0:
        return v <= phi + s
    return v >= phi - s


def scan_grid(double[::1] phi, double lam, double r, const double[::1] ctab,
              Py_ssize_t n, double[::1] alpha, double tol_m, double tol_w,
              const double[::1] vtol, double rtol):
    """Retention mask and normalised residual over the (theta_m, theta_w) grid.

    vtol holds absolute IC-AL tolerances per acceptance entry, ordered
    (m,H), (m,L), (w,H), (w,L); rtol is added relative to max(1, |V|, |phi|).
    """
    cdef double phh = phi[0], phl = phi[1], plh = phi[2], pll = phi[3]
    cdef double amh = alpha[0], aml = alpha[1], awh = alpha[2], awl = alpha[3]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] keep = np.zeros((n + 1, n + 1), dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] resid = np.empty((n + 1, n + 1), dtype=np.float64)
    cdef unsigned char[:, ::1] kv = keep
    cdef double[:, ::1] rv = resid
    cdef Py_ssize_t i, j
    cdef double tm, tw, qm, qw, vmh, vml, vwh, vwl, bm, bw, rm, rw, rate
    cdef bint ok
    with nogil:
        for i in range(n + 1):
            tm = <double>i / n
            qm = 1.0 - tm
            for j in range(n + 1):
                tw = <double>j / n
                qw = 1.0 - tw
                vmh = lam * (tw * phh + qw * amh * phl) / (r + lam * (tw + qw * amh))
                vml = lam * (tw * awh * plh + qw * aml * awl * pll) / (r + lam * (tw * awh + qw * aml * awl))
                vwh = lam * (tm * phh + qm * awh * phl) / (r + lam * (tm + qm * awh))
                vwl = lam * (tm * amh * plh + qm * awl * aml * pll) / (r + lam * (tm * amh + qm * awl * aml))
                bm = cinv(vmh - vml, ctab)
                bw = cinv(vwh - vwl, ctab)
                rm = fabs(bm - tm) / tol_m
                rw = fabs(bw - tw) / tol_w
                rv[i, j] = rm if rm > rw else rw
                ok = rm <= 1.0 and rw <= 1.0
                ok = ok and ical_ok(vmh, phl, amh, vtol[0], rtol) and ical_ok(vml, pll, aml, vtol[1], rtol)
                ok = ok and ical_ok(vwh, phl, awh, vtol[2], rtol) and ical_ok(vwl, pll, awl, vtol[3], rtol)
                if ok and tm > 0.0:
                    rate = tw + qw * amh
                    ok = rate > 0.0
                if ok and qm > 0.0:
                    rate = tw * awh + qw * aml * awl
                    ok = rate > 0.0
                if ok and tw > 0.0:
                    rate = tm + qm * awh
                    ok = rate > 0.0
                if ok and qw > 0.0:
                    rate = tm * amh + qm * awl * aml
                    ok = rate > 0.0
                kv[i, j] = 1 if ok else 0
    return keep, resid


def scan_events(const double[::1] t, const long long[::1] mi, const long long[::1] wi,
                const double[::1] um, const double[::1] uw,
                const signed char[::1] skill_m, const signed char[::1] skill_w,
                const double[:, ::1] acc_m, const double[:, ::1] acc_w, double t_cut):
    """Walk the meeting stream once.

    acc_g[s, s2] is the probability an agent of gender g and skill s accepts a
    partner of skill s2 (0 = H, 1 = L). Returns first-match times and partner
    skills of each slot's initial occupant, per-slot match counts and pooled
    inter-meeting gaps. Matches count only up to t_cut; a gap is recorded when
    it starts at or before t_cut, so events past t_cut only close open gaps.
    """
    cdef Py_ssize_t ne = t.shape[0], nm = skill_m.shape[0], nw = skill_w.shape[0]
    cdef Py_ssize_t k, i, j, ng = 0
    cdef signed char sm, sw
    first_m_np = np.full(nm, np.inf)
    first_w_np = np.full(nw, np.inf)
    part_m_np = np.full(nm, -1, dtype=np.int8)
    part_w_np = np.full(nw, -1, dtype=np.int8)
    cnt_m_np = np.zeros(nm, dtype=np.int64)
    cnt_w_np = np.zeros(nw, dtype=np.int64)
    last_m_np = np.full(nm, -1.0)
    last_w_np = np.full(nw, -1.0)
    gaps_np = np.empty(2 * ne, dtype=np.float64)
    cdef double[::1] first_m = first_m_np, first_w = first_w_np
    cdef double[::1] last_m = last_m_np, last_w = last_w_np, gaps = gaps_np
    cdef signed char[::1] part_m = part_m_np, part_w = part_w_np
    cdef long long[::1] cnt_m = cnt_m_np, cnt_w = cnt_w_np
    with nogil:
        for k in range(ne):
            i = mi[k]
            j = wi[k]
            if 0.0 <= last_m[i] <= t_cut:
                gaps[ng] = t[k] - last_m[i]
                ng += 1
            last_m[i] = t[k]
            if 0.0 <= last_w[j] <= t_cut:
                gaps[ng] = t[k] - last_w[j]
                ng += 1
            last_w[j] = t[k]
            if t[k] > t_cut:
                continue
            sm = skill_m[i]
            sw = skill_w[j]
            if um[k] < acc_m[sm, sw] and uw[k] < acc_w[sw, sm]:
                if cnt_m[i] == 0:
                    first_m[i] = t[k]
                    part_m[i] = sw
                if cnt_w[j] == 0:
                    first_w[j] = t[k]
                    part_w[j] = sm
                cnt_m[i] += 1
                cnt_w[j] += 1
    return first_m_np, part_m_np, first_w_np, part_w_np, cnt_m_np, cnt_w_np, gaps_np[:ng]
