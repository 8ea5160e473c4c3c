import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mel.economy import CostFunction, Economy, PayoffMatrix

settings.register_profile(
    "ci", deadline=None, derandomize=True, max_examples=200,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def affine(p, c, lam=1.0, r=1.0):
    return Economy(PayoffMatrix(*p), CostFunction.affine(c), lam, r)


@pytest.fixture
def env_sym():
    return affine((7, 6, 3, 1), 2)


@pytest.fixture
def env_fios():
    return affine((11, 10, 6, 1), 2)


@pytest.fixture
def env_super():
    return affine((15, 8, 2, 1), 5)


def random_economies(n, seed, supermodular=None):
    """Ranked payoffs, affine cost, lam and r drawn on a log scale."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        x = np.sort(rng.uniform(0.0, 10.0, 4))[::-1]
        p = PayoffMatrix(*x)
        d = p.phi_hh + p.phi_ll - p.phi_hl - p.phi_lh
        if supermodular is True and d < 0:
            continue
        if supermodular is False and d > 0:
            continue
        c = float(rng.uniform(0.0, 3.0))
        lam = float(np.exp(rng.uniform(-1.5, 1.5)))
        r = float(np.exp(rng.uniform(-1.5, 1.5)))
        out.append(Economy(p, CostFunction.affine(c), lam, r))
    return out
