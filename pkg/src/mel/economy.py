"""Model primitives: payoffs, skill cost, economies and strategy profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import UnsupportedCostError

KNIFE_TOL = 1e-9

GENDERS = ("m", "w")
SKILLS = ("H", "L")


def knife_scale(*xs) -> float:
    """Scale used to turn the absolute knife-edge band into a relative one."""
    return max(1.0, *(abs(float(x)) for x in xs))


def is_knife(residual, *magnitudes, tol=KNIFE_TOL) -> bool:
    return abs(residual) <= tol * knife_scale(*magnitudes)


def other(g: str) -> str:
    return "w" if g == "m" else "m"


@dataclass(frozen=True)
class PayoffMatrix:
    """Match utilities phi(own skill, partner skill)."""

    phi_hh: float
    phi_hl: float
    phi_lh: float
    phi_ll: float

    def __post_init__(self):
        for name in ("phi_hh", "phi_hl", "phi_lh", "phi_ll"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    @property
    def ranking_ok(self) -> bool:
        return self.phi_hh >= self.phi_hl >= self.phi_lh >= self.phi_ll

    def phi(self, own: str, partner: str) -> float:
        return {
            ("H", "H"): self.phi_hh,
            ("H", "L"): self.phi_hl,
            ("L", "H"): self.phi_lh,
            ("L", "L"): self.phi_ll,
        }[(own, partner)]

    def as_tuple(self):
        return (self.phi_hh, self.phi_hl, self.phi_lh, self.phi_ll)

    def shifted(self, k: float) -> "PayoffMatrix":
        return PayoffMatrix(self.phi_hh + k, self.phi_hl + k, self.phi_lh + k, self.phi_ll + k)

    @property
    def max_abs(self) -> float:
        return max(abs(v) for v in self.as_tuple())


@dataclass(frozen=True)
class RankingReport:
    ok: bool
    slacks: dict
    knife_edges: tuple


def check_ranking(p: PayoffMatrix) -> RankingReport:
    slacks = {
        "hh>=hl": p.phi_hh - p.phi_hl,
        "hl>=lh": p.phi_hl - p.phi_lh,
        "lh>=ll": p.phi_lh - p.phi_ll,
    }
    ok = all(v >= 0 for v in slacks.values())
    knives = tuple(k for k, v in slacks.items() if is_knife(v, p.max_abs))
    return RankingReport(ok=ok, slacks=slacks, knife_edges=knives)


@dataclass(frozen=True)
class DeltaPair:
    delta: float
    delta_h: float

    @property
    def submodular(self) -> bool:
        return self.delta <= 0

    @property
    def supermodular(self) -> bool:
        return self.delta >= 0


def deltas(p: PayoffMatrix) -> DeltaPair:
    return DeltaPair(
        delta=(p.phi_hh - p.phi_hl) - (p.phi_lh - p.phi_ll),
        delta_h=p.phi_hl - p.phi_ll,
    )


class _Quadratic:
    # C(x) = a x^2 + b x + c; picklable so economies can cross process boundaries
    def __init__(self, a, b, c):
        self.a, self.b, self.c = float(a), float(b), float(c)

    def __call__(self, x):
        return self.a * x * x + self.b * x + self.c

    def deriv(self, x):
        return 2.0 * self.a * x + self.b

    def __repr__(self):
        return f"{self.a}*x^2 + {self.b}*x + {self.c}"


@dataclass(frozen=True)
class CostFunction:
    """Skill acquisition cost C on [0, 1].

    ``kind='affine'`` means C(x) = x + c. The general case carries callables for
    C and C'; they must accept numpy arrays.
    """

    kind: str
    c: float
    func: Optional[Callable] = field(default=None, compare=False)
    deriv_func: Optional[Callable] = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("affine", "general-convex"):
            raise UnsupportedCostError(f"unknown cost kind {self.kind!r}")
        if self.kind == "general-convex" and (self.func is None or self.deriv_func is None):
            raise UnsupportedCostError("general-convex cost needs C and C' evaluators")

    @classmethod
    def affine(cls, c: float) -> "CostFunction":
        if not (c >= 0 and math.isfinite(c)):
            raise ValueError(f"affine intercept must be finite and >= 0, got {c}")
        return cls("affine", float(c), label=f"x + {c}")

    @classmethod
    def convex(cls, func, deriv, label="", check=True) -> "CostFunction":
        c0 = float(func(np.float64(0.0)))
        cf = cls("general-convex", c0, func, deriv, label)
        if check:
            cf.validate()
        return cf

    @classmethod
    def quadratic(cls, c: float, a: float = 1.0, b: float = 0.0) -> "CostFunction":
        q = _Quadratic(a, b, c)
        return cls.convex(q, q.deriv, label=repr(q))

    @property
    def is_affine(self) -> bool:
        return self.kind == "affine"

    def __call__(self, x):
        if self.is_affine:
            return x + self.c
        return self.func(x)

    def deriv(self, x):
        if self.is_affine:
            return np.ones_like(x) if isinstance(x, np.ndarray) else 1.0
        return self.deriv_func(x)

    def inverse(self, y):
        """C^{-1}(y) clipped to [0, 1]; vectorised bisection for the general case."""
        y = np.asarray(y, dtype=float)
        if self.is_affine:
            out = np.clip(y - self.c, 0.0, 1.0)
            return out if out.ndim else float(out)
        lo = np.zeros_like(y)
        hi = np.ones_like(y)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            up = self.func(mid) < y
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
        out = 0.5 * (lo + hi)
        out = np.where(y <= self.c, 0.0, np.where(y >= self.func(np.float64(1.0)), 1.0, out))
        return out if out.ndim else float(out)

    def validate(self, n: int = 1001):
        x = np.linspace(0.0, 1.0, n)
        cx = np.asarray(self(x), dtype=float)
        if self.c < 0:
            raise UnsupportedCostError(f"C(0) = {self.c} < 0")
        if np.any(np.diff(cx) <= 0):
            raise UnsupportedCostError("cost must be strictly increasing on [0,1]")
        d = np.asarray(self.deriv(x), dtype=float)
        if np.any(np.diff(d) < -1e-12 * max(1.0, np.max(np.abs(d)))):
            raise UnsupportedCostError("cost derivative must be non-decreasing (weak convexity)")


@dataclass(frozen=True)
class Economy:
    payoffs: PayoffMatrix
    cost: CostFunction
    lam: float
    r: float

    def __post_init__(self):
        if not (self.lam > 0 and self.r > 0 and math.isfinite(self.lam) and math.isfinite(self.r)):
            raise ValueError(f"need lam > 0 and r > 0, got lam={self.lam}, r={self.r}")

    @classmethod
    def affine(cls, payoffs, c, lam=1.0, r=1.0) -> "Economy":
        if not isinstance(payoffs, PayoffMatrix):
            payoffs = PayoffMatrix(*payoffs)
        return cls(payoffs, CostFunction.affine(c), float(lam), float(r))

    @property
    def lr(self) -> float:
        return discount_factor(self)

    @property
    def deltas(self) -> DeltaPair:
        return deltas(self.payoffs)

    def with_payoffs(self, p: PayoffMatrix) -> "Economy":
        return Economy(p, self.cost, self.lam, self.r)


def discount_factor(e: Economy) -> float:
    return e.lam / (e.r + e.lam)


@dataclass(frozen=True)
class CutoffFormulas:
    """Unclipped closed-form cutoffs for affine cost."""

    theta_ub: float
    theta_lb: float
    theta_sym: float
    one_plus_lr_delta: float


def cutoff_formulas(e: Economy) -> CutoffFormulas:
    if not e.cost.is_affine:
        raise UnsupportedCostError("cutoff formulas need an affine cost")
    d = e.deltas
    lr, c = e.lr, e.cost.c
    denom = 1.0 - lr * d.delta
    theta_sym = (lr * d.delta_h - c) / denom if denom != 0 else math.nan
    return CutoffFormulas(
        theta_ub=lr * d.delta_h - c,
        theta_lb=lr * (d.delta + d.delta_h) - c,
        theta_sym=theta_sym,
        one_plus_lr_delta=1.0 + lr * d.delta,
    )


ALPHA_KEYS = (("m", "H"), ("m", "L"), ("w", "H"), ("w", "L"))


@dataclass(frozen=True)
class StrategyProfile:
    """Cutoffs and low-partner acceptance probabilities.

    ``alpha`` is ordered (m,H), (m,L), (w,H), (w,L): the probability that an
    unmatched agent of that gender and skill accepts a low-skill partner.
    """

    theta_m: float
    theta_w: float
    alpha: tuple = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        vals = (self.theta_m, self.theta_w) + tuple(self.alpha)
        if len(self.alpha) != 4:
            raise ValueError("alpha needs four entries")
        for v in vals:
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"profile entries must lie in [0,1], got {v}")
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))

    def theta(self, g: str) -> float:
        return self.theta_m if g == "m" else self.theta_w

    def accept(self, g: str, s: str) -> float:
        return self.alpha[ALPHA_KEYS.index((g, s))]

    def mirrored(self) -> "StrategyProfile":
        a = self.alpha
        return StrategyProfile(self.theta_w, self.theta_m, (a[2], a[3], a[0], a[1]))

    @classmethod
    def all_accept(cls, theta_m, theta_w) -> "StrategyProfile":
        return cls(theta_m, theta_w, (1.0, 1.0, 1.0, 1.0))

    @classmethod
    def assortative(cls, theta) -> "StrategyProfile":
        return cls(theta, theta, (0.0, 1.0, 0.0, 1.0))
