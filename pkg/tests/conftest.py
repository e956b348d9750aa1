import numpy as np
import pytest

from faswipt import Placement, Scenario, sample_scenario_paths


def random_placement(scenario, rng):
    """Uniform rejection-sampled placement satisfying every region and spacing constraint."""
    while True:
        t = rng.uniform(-scenario.tx_half, scenario.tx_half, size=(scenario.M, 2))
        pl = Placement(
            t,
            rng.uniform(-scenario.rx_half_I, scenario.rx_half_I, 2),
            rng.uniform(-scenario.rx_half_E, scenario.rx_half_E, 2),
        )
        if pl.is_valid(scenario, tol=0.0):
            return pl


def random_psd(M, rng, rank=None):
    rank = M if rank is None else rank
    G = rng.standard_normal((M, rank)) + 1j * rng.standard_normal((M, rank))
    return G @ G.conj().T


def make_instance(seed, M=3, **kw):
    sc = Scenario(M=M, **kw)
    rng = np.random.default_rng(10_000 + seed)
    pI, pE = sample_scenario_paths(sc, seed)
    return sc, pI, pE, random_placement(sc, rng), rng


@pytest.fixture
def instance():
    return make_instance(0)


def zoom_grid_max(fn, feasible, half, n=400, zooms=3, window=20):
    """Brute-force max of ``fn`` over ``{feasible} cap [-half, half]^2``.

    An n x n grid, re-gridded ``zooms`` times on a window of ``window``
    cells around the incumbent. Returns (value, point) or (None, None).
    """
    lo, hi = np.array([-half, -half]), np.array([half, half])
    best, arg = -np.inf, None
    for _ in range(zooms + 1):
        xs = np.linspace(max(lo[0], -half), min(hi[0], half), n)
        ys = np.linspace(max(lo[1], -half), min(hi[1], half), n)
        P = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
        ok = feasible(P)
        if not np.any(ok):
            break
        vals = np.where(ok, fn(P), -np.inf)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, arg = float(vals[k]), P[k]
        span = np.array([xs[-1] - xs[0], ys[-1] - ys[0]]) * window / n
        lo, hi = arg - span, arg + span
    return (None, None) if arg is None else (best, arg)
