"""Command-line front end.

Exit codes: 0 success, 1 usage or config error, 2 solver failure,
3 golden-value mismatch.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import sys

from .config import FORMATS, RunConfig, load_config, parse_grid, with_overrides
from .economy import check_ranking, deltas
from .errors import ConfigError, MelError
from .equilibrium import enumerate_equilibria

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_MISMATCH = 0, 1, 2, 3

SWEEP_COLUMNS = ("t_h", "phi_hh", "phi_hl", "phi_lh", "phi_ll", "delta", "delta_h",
                 "theta_sym", "theta_lb", "theta_ub", "Phi", "one_plus_lr_delta", "regime")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="mel", description="Marriage-market skill investment toolkit")
    p.add_argument("command", choices=("payoffs", "solve", "sweep", "thresholds", "simulate", "verify"))
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--t-h", dest="t_h", type=float, metavar="X")
    p.add_argument("--grid", metavar="A:STEP:B")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--precision", type=int)
    return p


def resolve_config(ns) -> RunConfig:
    if ns.config:
        cfg = load_config(ns.config)
    else:
        cfg = RunConfig(household={"t_l": 2.0})
    cfg = with_overrides(cfg, t_h=ns.t_h, seed=ns.seed, out=ns.out, format=ns.format,
                         precision=ns.precision)
    if ns.grid:
        cfg.grid = parse_grid(ns.grid)
    return cfg.validate()


def _f(x, p):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    if abs(x) < 0.5 * 10.0 ** -p:
        x = 0.0
    return f"{x:.{p}f}"


def _csv(rows, header):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n"


# ----------------------------------------------------------------------------
# commands


def cmd_payoffs(cfg: RunConfig) -> str:
    d = cfg.environment().derivation(cfg.t_h())
    p = d.payoffs
    dl = deltas(p)
    ok = check_ranking(p).ok
    n = cfg.precision
    if cfg.format == "json":
        return _json({"t_h": cfg.t_h(), "payoffs": list(p.as_tuple()), "delta": dl.delta,
                      "delta_h": dl.delta_h, "ranking_ok": ok, "flags": d.flags})
    if cfg.format == "csv":
        return _csv([[repr(x) for x in (*p.as_tuple(), dl.delta, dl.delta_h)] + [ok]],
                    ("phi_hh", "phi_hl", "phi_lh", "phi_ll", "delta", "delta_h", "ranking_ok"))
    lines = [" ".join(_f(x, n) for x in p.as_tuple()),
             f"delta {_f(dl.delta, n)} delta_h {_f(dl.delta_h, n)}",
             f"ranking {'ok' if ok else 'violated'}"]
    lines += [f"flag {x}" for x in d.flags]
    return "\n".join(lines) + "\n"


def _alpha(a):
    return "".join(str(int(x)) if x in (0.0, 1.0) else f"{x:.3g}," for x in a)


def cmd_solve(cfg: RunConfig) -> str:
    e = cfg.economy()
    es = enumerate_equilibria(e)
    n = cfg.precision
    if cfg.format == "json":
        def rep(r):
            return {"kind": r.kind, "theta": list(r.theta), "alpha": list(r.alpha),
                    "knife_edge": r.knife_edge, "off_path": [":".join(k) for k in r.off_path],
                    "ic_residuals": r.ic_residuals}
        return _json({"equilibria": [rep(r) for r in es], "knife_edges": [rep(r) for r in es.knife_edges],
                      "off_path_sustained": [rep(r) for r in es.off_path_sustained],
                      "pareto": {f"{i}-{j}": v for (i, j), v in es.pareto_verdicts.items()},
                      "notes": es.notes})
    rows = [(r.kind, r.theta[0], r.theta[1], _alpha(r.alpha), min(r.ic_residuals.values()))
            for r in es]
    if cfg.format == "csv":
        return _csv([(k, repr(a), repr(b), al, repr(s)) for k, a, b, al, s in rows],
                    ("kind", "theta_m", "theta_w", "alpha", "min_slack"))
    lines = ["kind theta_m theta_w alpha min_slack"]
    lines += [f"{k} {_f(a, n)} {_f(b, n)} {al} {_f(s, n)}" for k, a, b, al, s in rows]
    if not rows:
        lines.append("(no equilibrium)")
    for r in es.knife_edges:
        lines.append(f"knife-edge {r.kind} {_f(r.theta[0], n)} {_f(r.theta[1], n)} {_alpha(r.alpha)}")
    for r in es.off_path_sustained:
        lines.append(f"off-path-sustained {r.kind} {_f(r.theta[0], n)} {_f(r.theta[1], n)} {_alpha(r.alpha)}")
    for (i, j), v in sorted(es.pareto_verdicts.items()):
        lines.append(f"pareto {i} {j} {v}")
    lines += [f"note {x}" for x in es.notes]
    return "\n".join(lines) + "\n"


def cmd_thresholds(cfg: RunConfig) -> str:
    from .statics import thresholds
    th = thresholds(cfg.environment(), cfg.ceiling)
    n = cfg.precision
    fb = th.fios_bracket
    sym = th.crossings[th.sym_branch]
    if cfg.format == "json":
        return _json({"t_sym": th.t_sym, "t_fios": th.t_fios, "sym_branch": th.sym_branch,
                      "sym_bracket": list(sym.bracket), "fios_bracket": list(fb),
                      "tolerance": th.tolerance, "ceiling": th.ceiling, "note": th.note})
    if cfg.format == "csv":
        return _csv([("t_sym", repr(th.t_sym), repr(sym.bracket[0]), repr(sym.bracket[1]), repr(th.tolerance)),
                     ("t_fios", repr(th.t_fios), repr(fb[0]), repr(fb[1]), repr(th.tolerance))],
                    ("name", "value", "bracket_lo", "bracket_hi", "tolerance"))
    return (f"t_sym {_f(th.t_sym, n)} branch {th.sym_branch} bracket [{_f(sym.bracket[0], n)}, "
            f"{_f(sym.bracket[1], n)}] tol {th.tolerance:.1e}\n"
            f"t_fios {_f(th.t_fios, n)} bracket [{_f(fb[0], n)}, {_f(fb[1], n)}] tol {th.tolerance:.1e}\n"
            f"note {th.note} (ceiling {_f(th.ceiling, n)})\n")


def _sweep_row(pt):
    nan = math.nan
    pay = pt.payoffs.as_tuple() if pt.payoffs is not None else (nan,) * 4
    d = (pt.deltas.delta, pt.deltas.delta_h) if pt.deltas is not None else (nan, nan)
    return (pt.t_h, *pay, *d, pt.theta_sym, pt.theta_lb, pt.theta_ub, pt.phi_constraint,
            pt.one_plus_lr_delta, pt.regime)


def cmd_sweep(cfg: RunConfig) -> str:
    from .statics import sweep
    res = sweep(cfg.environment(), cfg.t_grid())
    rows = [_sweep_row(p) for p in res]
    n = cfg.precision
    if cfg.format == "json":
        return _json({"columns": list(SWEEP_COLUMNS), "rows": [list(r) for r in rows],
                      "jump": res.jump, "monotone_violations": res.monotone_violations})
    if cfg.format == "csv":
        return _csv([[repr(float(x)) for x in r[:-1]] + [r[-1]] for r in rows], SWEEP_COLUMNS)
    lines = [" ".join(SWEEP_COLUMNS)]
    lines += [" ".join(_f(float(x), n) for x in r[:-1]) + " " + r[-1] for r in rows]
    return "\n".join(lines) + "\n"


def cmd_simulate(cfg: RunConfig) -> str:
    from .simulate import SimConfig, simulate_market
    e = cfg.economy()
    prof = cfg.strategy()
    profs = [prof] if prof is not None else [r.profile for r in enumerate_equilibria(e)]
    if not profs:
        raise ConfigError("no profile given and no equilibrium to simulate")
    n = cfg.precision
    out, rows = [], []
    for k, pr in enumerate(profs):
        res = simulate_market(SimConfig(e, pr, cfg.n_agents, cfg.horizon, cfg.n_replications, cfg.seed))
        cf = res.closed_form(e, pr)
        ok, _ = res.within(e, pr)
        for key in sorted(res.values):
            v, s = res.values[key], res.se[key]
            rows.append((k, pr.theta_m, pr.theta_w, key[0], key[1], v, s, cf[key],
                         key in res.censored, ok))
        out.append((k, pr, res, ok))
    if cfg.format == "json":
        return _json({"rows": [dict(zip(("profile", "theta_m", "theta_w", "gender", "skill", "value",
                                          "se", "closed_form", "censored", "within_3se"), r)) for r in rows]})
    if cfg.format == "csv":
        return _csv([[r[0], repr(r[1]), repr(r[2]), r[3], r[4], repr(r[5]), repr(r[6]), repr(r[7]), r[8], r[9]]
                     for r in rows],
                    ("profile", "theta_m", "theta_w", "gender", "skill", "value", "se", "closed_form",
                     "censored", "within_3se"))
    lines = []
    for k, pr, res, ok in out:
        lines.append(f"profile {k} theta ({_f(pr.theta_m, n)}, {_f(pr.theta_w, n)}) alpha {_alpha(pr.alpha)} "
                     f"n_agents {cfg.n_agents} replications {res.replications}")
        for r in rows:
            if r[0] == k:
                tag = " censored" if r[8] else ""
                lines.append(f"  {r[3]}:{r[4]} value {_f(r[5], n)} se {_f(r[6], n)} closed {_f(r[7], n)}{tag}")
        lines.append(f"  within 3 se: {'yes' if ok else 'no'}")
    return "\n".join(lines) + "\n"


def cmd_verify(cfg: RunConfig):
    from .golden import run_golden
    res = run_golden()
    lines = []
    for r in res:
        if r.ok:
            lines.append(f"PASS {r.id}")
        else:
            lines.append(f"FAIL {r.id} expected {r.expected} got {r.actual} tol {r.tol} {r.note}".rstrip())
    bad = sum(not r.ok for r in res)
    lines.append(f"{len(res) - bad}/{len(res)} golden values reproduced")
    return "\n".join(lines) + "\n", (EXIT_MISMATCH if bad else EXIT_OK)


COMMANDS = {"payoffs": cmd_payoffs, "solve": cmd_solve, "sweep": cmd_sweep,
            "thresholds": cmd_thresholds, "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ns = build_parser().parse_args(argv)
        cfg = resolve_config(ns) if ns.command != "verify" else RunConfig(household={}).validate()
        res = COMMANDS[ns.command](cfg)
        text, code = res if isinstance(res, tuple) else (res, EXIT_OK)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MelError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def run_capture(argv):
    """(exit code, stdout text) of an in-process run."""
    buf, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
