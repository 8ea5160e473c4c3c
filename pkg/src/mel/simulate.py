"""Monte Carlo simulation of the steady-state search market.

Each side holds n_agents slots. Slot i carries the fixed type (i + 0.5)/n and
invests iff its type is at or below the gender's cutoff. Meetings arrive as a
single Poisson stream of rate lam * n, each pairing a uniform man slot with a
uniform woman slot, so every unmatched agent meets partners at rate lam. A
match replaces both occupants by clones of the same type, which keeps the
pool composition fixed. Values are estimated from the initial occupants'
first matches, discounted at r and censored at the horizon.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import kernels
from .economy import Economy, StrategyProfile, other
from .errors import ConfigError
from .parallel import pmap
from .values import value_general

SKILL_INDEX = {"H": 0, "L": 1}
# extra simulated time past the horizon so that gaps starting before it close
_GAP_TAIL = 15.0


@dataclass(frozen=True)
class SimConfig:
    economy: Economy
    profile: StrategyProfile
    n_agents: int = 10_000
    horizon: float | None = None
    n_replications: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.n_agents < 100:
            raise ConfigError("n_agents must be at least 100")
        if self.n_replications < 1:
            raise ConfigError("n_replications must be positive")
        if self.horizon is not None and self.horizon < 10.0 / self.economy.r:
            raise ConfigError("horizon must be at least 10/r")

    @property
    def t_end(self) -> float:
        return self.horizon if self.horizon is not None else 20.0 / self.economy.r


@dataclass
class SimResult:
    values: dict          # (g, s) -> mean discounted value
    se: dict              # (g, s) -> standard error over all initial occupants
    n_obs: dict           # (g, s) -> agents per replication
    pool_share: dict      # g -> realised high-skill share of the pool
    match_rate: dict      # (g, s) -> empirical matches per agent per unit time
    match_rate_se: dict
    composition: dict     # g -> (times, high-skill share) trace
    censored: tuple       # classes whose values could not be estimated
    truncation_bound: float
    gaps: np.ndarray      # pooled inter-meeting times (first replication)
    replications: int
    notes: list = field(default_factory=list)

    def closed_form(self, e: Economy, prof: StrategyProfile) -> dict:
        """value_general at the realised pool shares."""
        out = {}
        for g in ("m", "w"):
            o = other(g)
            opp = (prof.accept(o, "H"), prof.accept(o, "L"))
            for s in ("H", "L"):
                out[(g, s)] = value_general(e, s, prof.accept(g, s), self.pool_share[o], opp)
        return out

    def within(self, e: Economy, prof: StrategyProfile, k: float = 3.0):
        """(ok, z-scores) of the empirical values against the closed form."""
        cf = self.closed_form(e, prof)
        z, ok = {}, True
        for key, v in self.values.items():
            if key in self.censored or math.isnan(v):
                continue
            tol = k * self.se[key] + self.truncation_bound
            z[key] = (v - cf[key]) / self.se[key] if self.se[key] > 0 else (0.0 if v == cf[key] else math.inf)
            ok &= abs(v - cf[key]) <= tol
        return ok, z

    def ks_pvalue(self, lam: float) -> float:
        return float(stats.kstest(self.gaps, "expon", args=(0.0, 1.0 / lam)).pvalue)


def slot_skills(theta: float, n: int) -> np.ndarray:
    """int8 skill index per slot (0 = H, 1 = L) for stratified types."""
    tau = (np.arange(n) + 0.5) / n
    return np.where(tau <= theta, 0, 1).astype(np.int8)


def acceptance_table(prof: StrategyProfile, g: str) -> np.ndarray:
    """acc[s, s2]: probability a (g, s) agent accepts a partner of skill s2."""
    return np.array([[1.0, prof.accept(g, "H")], [1.0, prof.accept(g, "L")]])


def _streams(seed, n):
    ss = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(s)) for s in ss.spawn(n)]


def _meetings(rng, lam, n, t_total):
    k = int(rng.poisson(lam * n * t_total))
    t = np.sort(rng.uniform(0.0, t_total, k))
    mi = rng.integers(0, n, k, dtype=np.int64)
    wi = rng.integers(0, n, k, dtype=np.int64)
    um = rng.random(k)
    uw = rng.random(k)
    return t, mi, wi, um, uw


def _replicate(args):
    e, prof, n, t_end, rng = args
    lam, r = e.lam, e.r
    sk = {"m": slot_skills(prof.theta_m, n), "w": slot_skills(prof.theta_w, n)}
    t, mi, wi, um, uw = _meetings(rng, lam, n, t_end + _GAP_TAIL / lam)
    first_m, part_m, first_w, part_w, cnt_m, cnt_w, gaps = kernels.scan_events(
        t, mi, wi, um, uw, sk["m"], sk["w"],
        acceptance_table(prof, "m"), acceptance_table(prof, "w"), float(t_end),
    )
    p = e.payoffs
    out = {}
    for g, first, part, cnt in (("m", first_m, part_m, cnt_m), ("w", first_w, part_w, cnt_w)):
        for s in ("H", "L"):
            sel = sk[g] == SKILL_INDEX[s]
            if not sel.any():
                out[(g, s)] = (0.0, 0.0, 0, 0, math.nan)
                continue
            f, pt = first[sel], part[sel]
            hit = np.isfinite(f)
            pay = np.where(pt == 0, p.phi(s, "H"), p.phi(s, "L"))
            v = np.where(hit, pay * np.exp(-r * np.where(hit, f, 0.0)), 0.0)
            out[(g, s)] = (float(v.sum()), float(v @ v), int(sel.sum()), int(hit.sum()),
                           float(cnt[sel].mean()) / t_end)
    return out, gaps


def simulate_market(cfg: SimConfig, workers=None) -> SimResult:
    e, prof, n, t_end = cfg.economy, cfg.profile, cfg.n_agents, cfg.t_end
    rngs = _streams(cfg.seed, cfg.n_replications)
    reps = pmap(_replicate, [(e, prof, n, t_end, g) for g in rngs], workers=workers, min_items=4)
    keys = [(g, s) for g in ("m", "w") for s in ("H", "L")]
    values, se, n_obs, rate, rate_se, censored = {}, {}, {}, {}, {}, []
    R = len(reps)
    for key in keys:
        s1 = sum(rp[0][key][0] for rp in reps)
        s2 = sum(rp[0][key][1] for rp in reps)
        n_obs[key] = reps[0][0][key][2]
        hits = sum(rp[0][key][3] for rp in reps)
        rt = np.array([rp[0][key][4] for rp in reps])
        if n_obs[key] == 0:
            values[key], se[key] = math.nan, math.nan
            rate[key], rate_se[key] = math.nan, math.nan
            continue
        if hits == 0:
            censored.append(key)
            warnings.warn(f"class {key} never matched: no acceptance-compatible partners", RuntimeWarning)
        m = n_obs[key] * R
        values[key] = s1 / m
        se[key] = math.sqrt(max(s2 / m - values[key] ** 2, 0.0) / (m - 1)) if m > 1 else math.nan
        rate[key] = float(rt.mean())
        rate_se[key] = float(rt.std(ddof=1) / math.sqrt(R)) if R > 1 else math.nan
    share = {g: float(np.mean(slot_skills(prof.theta(g), n) == 0)) for g in ("m", "w")}
    times = np.linspace(0.0, t_end, 11)
    comp = {g: (times, np.full_like(times, share[g])) for g in ("m", "w")}
    bound = math.exp(-e.r * t_end) * e.payoffs.max_abs
    return SimResult(values, se, n_obs, share, rate, rate_se, comp, tuple(censored),
                     bound, reps[0][1], R)


# ----------------------------------------------------------------------------
# deviation probes


@dataclass(frozen=True)
class DeviationResult:
    gender: str
    tau: float
    action: str
    gain: float            # mean deviant minus conformist payoff, net of cost
    se: float
    expected: float        # closed-form gain at the realised pool share
    profitable: bool
    n_probes: int


def _probe_first_match(rng, n_probes, lam, t_end, opp_skill, opp_acc, own_sets):
    """First match time and partner skill for several probe behaviours under
    common meeting times, partner draws and partner acceptance draws.

    own_sets: list of (skill index, acceptance row) for each behaviour.
    """
    nn = len(opp_skill)
    k = len(own_sets)
    first = np.full((k, n_probes), np.inf)
    part = np.full((k, n_probes), -1, dtype=np.int8)
    clock = np.zeros(n_probes)
    alive = np.ones(n_probes, dtype=bool)
    while alive.any():
        idx = np.nonzero(alive)[0]
        clock[idx] += rng.exponential(1.0 / lam, idx.size)
        past = clock[idx] > t_end
        alive[idx[past]] = False
        idx = idx[~past]
        if idx.size == 0:
            break
        ps = opp_skill[rng.integers(0, nn, idx.size)]
        u_own = rng.random(idx.size)
        u_opp = rng.random(idx.size)
        still = np.zeros(idx.size, dtype=bool)
        for b, (s_own, row) in enumerate(own_sets):
            open_ = ~np.isfinite(first[b, idx])
            acc = (u_own < row[ps]) & (u_opp < opp_acc[ps, s_own]) & open_
            first[b, idx[acc]] = clock[idx[acc]]
            part[b, idx[acc]] = ps[acc]
            still |= open_ & ~acc
        alive[idx[~still]] = False
    return first, part


def verify_best_response(cfg: SimConfig, deviant, n_probes: int = 20_000, k: float = 3.0) -> DeviationResult:
    """Payoff of a measure-zero deviant against the conformist of the same type.

    deviant = (gender, tau, action) with action 'invest-flip' (acquire the
    other skill, keep the profile's acceptance rule for that skill) or
    'accept-flip' (reverse own acceptance of low partners). Both behaviours
    share meeting times and partner draws.
    """
    gender, tau, action = deviant
    if action not in ("invest-flip", "accept-flip"):
        raise ConfigError(f"unknown deviation {action!r}")
    e, prof, n = cfg.economy, cfg.profile, cfg.n_agents
    o = other(gender)
    s_conf = "H" if tau <= prof.theta(gender) else "L"
    a_conf = prof.accept(gender, s_conf)
    if action == "invest-flip":
        s_dev = "L" if s_conf == "H" else "H"
        a_dev = prof.accept(gender, s_dev)
    else:
        s_dev, a_dev = s_conf, 1.0 - a_conf
    opp_skill = slot_skills(prof.theta(o), n)
    opp_acc = acceptance_table(prof, o)
    rng = _streams([cfg.seed, 1 + int(SKILL_INDEX[s_conf]), int(round(tau * 1e9))], 1)[0]
    sets = [(SKILL_INDEX[s_conf], np.array([1.0, a_conf])), (SKILL_INDEX[s_dev], np.array([1.0, a_dev]))]
    first, part = _probe_first_match(rng, n_probes, e.lam, cfg.t_end, opp_skill, opp_acc, sets)
    p = e.payoffs

    def payoff(b, s):
        hit = np.isfinite(first[b])
        pay = np.where(part[b] == 0, p.phi(s, "H"), p.phi(s, "L"))
        v = np.where(hit, pay * np.exp(-e.r * np.where(hit, first[b], 0.0)), 0.0)
        return v - (float(e.cost(tau)) if s == "H" else 0.0)

    diff = payoff(1, s_dev) - payoff(0, s_conf)
    gain = float(diff.mean())
    se = float(diff.std(ddof=1) / math.sqrt(n_probes))
    share = float(np.mean(opp_skill == 0))
    opp = (prof.accept(o, "H"), prof.accept(o, "L"))

    def cf(s, a):
        return value_general(e, s, a, share, opp) - (float(e.cost(tau)) if s == "H" else 0.0)

    expected = cf(s_dev, a_dev) - cf(s_conf, a_conf)
    bound = math.exp(-e.r * cfg.t_end) * p.max_abs
    return DeviationResult(gender, float(tau), action, gain, se, expected,
                           gain > k * se + bound, n_probes)
