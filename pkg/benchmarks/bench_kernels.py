"""Compiled vs numpy kernel timings.

    python benchmarks/bench_kernels.py [--grid 500] [--agents 10000] [--repeat 5]
"""
import argparse
import time

import numpy as np

from mel import kernels
from mel.economy import CostFunction, Economy, PayoffMatrix, StrategyProfile
from mel.oracle import CORNERS, cost_table, grid_tolerances
from mel.simulate import _GAP_TAIL, _meetings, acceptance_table, slot_skills


def _best(fn, repeat):
    out = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return min(out)


def grid_case(n):
    e = Economy(PayoffMatrix(11, 10, 6, 1), CostFunction.affine(2.0), 1.0, 1.0)
    ctab = np.ascontiguousarray(cost_table(e), dtype=float)
    phi = np.ascontiguousarray(e.payoffs.as_tuple(), dtype=float)
    args = []
    for al in CORNERS:
        tol = grid_tolerances(e, al, n, ctab)
        args.append((phi, 1.0, 1.0, ctab, n, np.asarray(al, dtype=float), tol.cutoff[0], tol.cutoff[1],
                     np.asarray(tol.value, dtype=float), 1e-9))
    return lambda be: [be.scan_grid(*a) for a in args]


def event_case(n):
    prof = StrategyProfile(1.0, 0.5, (1.0, 0.0, 1.0, 0.0))
    rng = np.random.default_rng(0)
    ev = _meetings(rng, 1.0, n, 20.0 + _GAP_TAIL)
    args = (*ev, slot_skills(prof.theta_m, n), slot_skills(prof.theta_w, n),
            acceptance_table(prof, "m"), acceptance_table(prof, "w"), 20.0)
    return lambda be: be.scan_events(*args), len(ev[0])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=500)
    ap.add_argument("--agents", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()
    backends = [("python", kernels.python_backend)]
    if kernels.compiled_backend is not None:
        backends.insert(0, ("compiled", kernels.compiled_backend))
    else:
        print("compiled extension not available; timing the numpy kernels only")
    grid = grid_case(a.grid)
    events, k = event_case(a.agents)
    rows = []
    for name, be in backends:
        rows.append((name, _best(lambda: grid(be), a.repeat), _best(lambda: events(be), a.repeat)))
    print(f"scan_grid: 16 acceptance corners on a {a.grid + 1}^2 grid")
    print(f"scan_events: {k} meetings, {a.agents} slots per side")
    print(f"{'backend':10s} {'scan_grid s':>12s} {'scan_events s':>14s}")
    for name, g, ev in rows:
        print(f"{name:10s} {g:12.4f} {ev:14.4f}")
    if len(rows) == 2:
        print(f"{'speedup':10s} {rows[1][1] / rows[0][1]:11.1f}x {rows[1][2] / rows[0][2]:13.1f}x")


if __name__ == "__main__":
    main()
