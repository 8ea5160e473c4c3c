"""Golden-value reproduction suite.

golden.json lists entries {id, quantity, args, expected, tol}. Each quantity
names an evaluator below; numbers are compared with an absolute tolerance,
strings and booleans exactly, lists element-wise.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

from .economy import CostFunction, Economy, PayoffMatrix, check_ranking, cutoff_formulas, deltas
from .equilibrium import enumerate_equilibria, pareto_verdict, solve_symmetric_am
from .household import CobbDouglasPih, WagePair, solve_nash, symmetric_root
from .statics import baseline, phi_constraint, regime_of, sweep, thresholds

_CD = CobbDouglasPih()


def _econ(payoffs, c=2.0, lam=1.0, r=1.0):
    return Economy(PayoffMatrix(*payoffs), CostFunction.affine(c), lam, r)


def _hh(t_h):
    return baseline().economy(float(t_h))


def _economy(args):
    if "t_h" in args:
        return _hh(args["t_h"])
    return _econ(args["payoffs"], args.get("c", 2.0), args.get("lam", 1.0), args.get("r", 1.0))


def q_ranking(args):
    return check_ranking(PayoffMatrix(*args["payoffs"])).ok


def q_deltas(args):
    d = deltas(PayoffMatrix(*args["payoffs"]))
    return [d.delta, d.delta_h]


def q_lr(args):
    return args["lam"] / (args["r"] + args["lam"])


def q_equilibria(args):
    """[kind, theta_m, theta_w] per equilibrium (canonical orientation)."""
    es = enumerate_equilibria(_economy(args))
    return [[r.kind, r.theta[0], r.theta[1]] for r in es]


def q_ll_terms(args):
    """(r phi_LL, lam theta (phi_LH - phi_LL)) at the symmetric candidate, plus whether L-L is violated."""
    e = _economy(args)
    p = e.payoffs
    rep = solve_symmetric_am(e)
    th = cutoff_formulas(e).theta_sym
    return [e.r * p.phi_ll, e.lam * th * (p.phi_lh - p.phi_ll), rep.violates("AM:L-L")]


def q_delta_sum(args):
    d = _economy(args).deltas
    return d.delta + d.delta_h


def q_pareto_window(args):
    e = _economy(args)
    es = enumerate_equilibria(e)
    sym, fios = es.of_kind("SymmetricAM"), es.of_kind("FIOS")
    return pareto_verdict(e, sym[0], fios[0]) if sym and fios else "no pair"


def q_effort_root(args):
    return symmetric_root(_CD.spec(), args["t"])


def q_nash(args):
    s = solve_nash(_CD.spec(), WagePair(*args["wages"]))
    return [s.e_m, s.e_w, s.regime, s.kkt_residuals["foc_m"], s.kkt_residuals["foc_w"]]


def q_nash_point(args):
    s = solve_nash(_CD.spec(), WagePair(*args["wages"]))
    return [s.e_m, s.e_w, s.regime]


def q_payoffs(args):
    return list(baseline().payoffs(float(args["t_h"])).as_tuple())


def q_all_equal(args):
    p = baseline().payoffs(float(args["t_h"])).as_tuple()
    return max(p) - min(p) <= 1e-9


def q_phi(args):
    return phi_constraint(_hh(args["t_h"]))


def q_thresholds(args):
    th = thresholds(baseline())
    return [th.t_sym, th.t_fios]


def q_regime(args):
    return regime_of(enumerate_equilibria(_hh(args["t_h"])))


def q_jump(args):
    a, s, b = args["grid"]
    n = int(round((b - a) / s)) + 1
    res = sweep(baseline(), [a + s * i for i in range(n)])
    j = res.jump
    return [j["theta_sym_below"], j["fios_above"][1]]


def q_derivative_identity(args):
    """(dDelta_h/dt, -dDelta/dt, K a / t) by central differences."""
    t, h = float(args["t_h"]), 1e-4
    up, dn = baseline().payoffs(t + h), baseline().payoffs(t - h)
    du, dd = deltas(up), deltas(dn)
    return [(du.delta_h - dd.delta_h) / (2 * h), -(du.delta - dd.delta) / (2 * h), _CD.K * _CD.cd_share / t]


def q_cli_line(args):
    from .cli import run_capture
    code, text = run_capture(args["argv"])
    lines = text.strip().splitlines()
    i = args.get("line", 0)
    if code != 0 or len(lines) <= i:
        return f"exit {code}"
    toks = lines[i].split()
    return " ".join(toks[: args["tokens"]] if "tokens" in args else toks)


QUANTITIES = {k[2:]: v for k, v in globals().items() if k.startswith("q_")}


@dataclass
class GoldenResult:
    id: str
    ok: bool
    expected: object
    actual: object
    tol: float
    note: str = ""


def _match(exp, act, tol, rel=False):
    if isinstance(exp, list):
        if not isinstance(act, (list, tuple)) or len(act) != len(exp):
            return False
        return all(_match(x, y, tol, rel) for x, y in zip(exp, act))
    if isinstance(exp, bool) or isinstance(exp, str):
        return exp == act
    if isinstance(act, (bool, str)) or act is None:
        return False
    act = float(act)
    if math.isnan(act):
        return False
    scale = max(abs(exp), 1e-300) if rel else 1.0
    return abs(act - exp) <= tol * scale


def load_golden():
    return json.loads(resources.files("mel").joinpath("golden.json").read_text())


def run_golden(entries=None):
    out = []
    for ent in entries if entries is not None else load_golden():
        fn = QUANTITIES[ent["quantity"]]
        try:
            act = fn(ent.get("args", {}))
            note = ""
        except Exception as exc:  # a failing evaluator is a mismatch, not a crash
            act, note = None, f"{type(exc).__name__}: {exc}"
        tol = float(ent.get("tol", 0.0))
        ok = _match(ent["expected"], act, tol, ent.get("relative", False))
        out.append(GoldenResult(ent["id"], ok, ent["expected"], act, tol, note))
    return out
