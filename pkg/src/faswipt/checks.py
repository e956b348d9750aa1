"""Quick self-checks run by ``faswipt check``: small-M invariant and oracle tests."""

from __future__ import annotations

import math

import numpy as np

from .ao import Scheme, run_ao
from .beamforming import design_beamformer
from .channel import Placement, Scenario, assemble_channels, sample_scenario_paths
from .position import (
    build_surrogate,
    decompose_objective,
    exact_functional,
    surrogate_eval,
)


def _instance(seed, M):
    sc = Scenario(M=M)
    rng = np.random.default_rng(seed)
    paths_I, paths_E = sample_scenario_paths(sc, seed)
    while True:
        t = rng.uniform(-sc.tx_half, sc.tx_half, size=(M, 2))
        if Placement(t, np.zeros(2), np.zeros(2)).is_valid(sc):
            break
    placement = Placement(t, rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2))
    return sc, paths_I, paths_E, placement, rng


def check_channel(n=20):
    worst = 0.0
    for seed in range(n):
        sc, pI, pE, pl, _ = _instance(seed, 3)
        h = assemble_channels(pl, pI, pE, sc.wavelength).h_I
        ref = np.zeros(sc.M, complex)
        for m in range(sc.M):
            for s in range(pI.q_r):
                for k in range(pI.q_t):
                    rho_r = pl.r_I[0] * math.sin(pI.phi_r[s]) * math.cos(pI.psi_r[s]) + pl.r_I[1] * math.cos(pI.phi_r[s])
                    rho_t = pl.t[m, 0] * math.sin(pI.phi_t[k]) * math.cos(pI.psi_t[k]) + pl.t[m, 1] * math.cos(pI.phi_t[k])
                    ref[m] += np.exp(-2j * math.pi * rho_r) * pI.sigma[s, k] * np.exp(2j * math.pi * rho_t)
        worst = max(worst, float(np.max(np.abs(h - ref))))
    return worst < 1e-12, f"max |h - triple-loop| = {worst:.2e}"


def check_minorant(n=20, samples=500):
    worst = -math.inf
    for seed in range(n):
        sc, pI, _, pl, rng = _instance(seed, 2 + seed % 3)
        w = rng.standard_normal(sc.M) + 1j * rng.standard_normal(sc.M)
        W = np.outer(w, w.conj())
        dec = decompose_objective(W, pI, pl, seed % sc.M, sc.wavelength)
        model = build_surrogate(dec, pI, pl.t[seed % sc.M], sc.wavelength)
        pts = rng.uniform(-sc.tx_half, sc.tx_half, size=(samples, 2))
        gap = surrogate_eval(model, pts) - exact_functional(dec, pI, pts, sc.wavelength)
        worst = max(worst, float(np.max(gap)))
    return worst <= 1e-9, f"max surrogate - exact = {worst:.2e}"


def check_gradient(n=20, step=1e-6):
    worst = 0.0
    for seed in range(n):
        sc, pI, _, pl, rng = _instance(seed, 3)
        w = rng.standard_normal(sc.M) + 1j * rng.standard_normal(sc.M)
        dec = decompose_objective(np.outer(w, w.conj()), pI, pl, 0, sc.wavelength)
        model = build_surrogate(dec, pI, pl.t[0], sc.wavelength)
        fd = np.array([
            (exact_functional(dec, pI, pl.t[0] + e, 1.0) - exact_functional(dec, pI, pl.t[0] - e, 1.0)) / (2 * step)
            for e in step * np.eye(2)
        ])
        worst = max(worst, float(np.linalg.norm(fd - model.gradient) / max(np.linalg.norm(fd), 1e-12)))
    return worst < 1e-5, f"max relative gradient error = {worst:.2e}"


def check_beamforming(n=10, grid=400):
    worst = 0.0
    for seed in range(n):
        sc, pI, pE, pl, _ = _instance(seed, 2)
        ch = assemble_channels(pl, pI, pE, 1.0)
        bf = design_beamformer(ch.h_I, ch.h_E, sc, seed=seed)
        if not bf.feasible:
            continue
        Q, _ = np.linalg.qr(np.column_stack([ch.h_I.conj(), ch.h_E.conj()]))
        th, ph = np.meshgrid(np.linspace(0, math.pi / 2, grid), np.linspace(0, 2 * math.pi, grid))
        V = math.sqrt(sc.p_max) * (np.cos(th)[..., None] * Q[:, 0] + (np.sin(th) * np.exp(1j * ph))[..., None] * Q[:, 1])
        ok = sc.tau * np.abs(V @ ch.h_E) ** 2 >= sc.q_bar
        best = float(np.max(np.abs(V @ ch.h_I)[ok] ** 2))
        got = abs(ch.h_I @ bf.w) ** 2
        worst = max(worst, (best - got) / best)
    return worst <= 1e-9, f"max relative shortfall vs grid = {worst:.2e}"


def check_ao(n=3):
    bad = []
    for seed in range(n):
        sc = Scenario(M=2)
        pI, pE = sample_scenario_paths(sc, seed)
        tr = run_ao(sc, pI, pE, Scheme.PROPOSED, seed, max_outer=15)
        if tr.infeasible:
            continue
        if np.any(np.diff(tr.rates) < -1e-6) or not all(r.feasible for r in tr.records[1:]):
            bad.append(seed)
    return not bad, f"non-monotone or infeasible seeds: {bad}" if bad else f"{n} runs monotone and feasible"


CHECKS = {
    "channel assembly": check_channel,
    "surrogate minorant": check_minorant,
    "surrogate gradient": check_gradient,
    "beamforming oracle": check_beamforming,
    "ao monotonicity": check_ao,
}


def run_checks(out=print):
    ok_all = True
    for name, fn in CHECKS.items():
        ok, detail = fn()
        ok_all &= ok
        out(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok_all
