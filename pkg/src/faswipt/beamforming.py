"""
Transmit covariance design for one IR and one ER.

maximize    h_I W h_I^H
subject to  Tr(W) <= P_max,  tau * h_E W h_E^H >= Q_bar,  W >= 0.

Only ``h_I`` and ``h_E`` enter, so W can be restricted to the span of
``h_I^H`` and ``h_E^H`` without loss, and an optimal W of rank one always
exists. Inside that span the optimum is found in closed form: transmit at
full power along the max-ratio beam, rotated toward ``h_E`` by the smallest
angle that meets the harvesting threshold. Gaussian randomization then turns
a covariance into an actual beamforming vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError

__all__ = [
    "Beamformer",
    "eh_feasible",
    "solve_beamforming",
    "gaussian_randomization",
    "design_beamformer",
]

# absolute slack on constraint checks of candidate beamformers
CONSTRAINT_TOL = 1e-10


@dataclass(frozen=True)
class Beamformer:
    """Transmit covariance ``W`` and, once extracted, the beamformer ``w``.

    ``sdr_gap`` is the relative loss of ``|h_I w|^2`` against the relaxed
    objective ``h_I W h_I^H``; NaN until a vector has been extracted.
    ``feasible`` is False when the power budget cannot meet the harvesting
    threshold, in which case ``W`` is zero.
    """

    W: np.ndarray
    w: np.ndarray | None
    achieved_rate: float
    achieved_Q: float
    sdr_gap: float
    sdp_objective: float
    feasible: bool = True


def _row(h):
    return np.asarray(h, dtype=complex).reshape(-1)


def eh_feasible(h_E, scenario):
    """True iff the best full-power beam toward the ER harvests at least ``Q_bar``."""
    h_E = _row(h_E)
    best = scenario.tau * scenario.p_max * float(np.real(np.vdot(h_E, h_E)))
    return best >= scenario.q_bar - CONSTRAINT_TOL


def _metrics(h_I, h_E, W, scenario):
    gain_I = max(float(np.real(h_I @ W @ h_I.conj())), 0.0)
    gain_E = max(float(np.real(h_E @ W @ h_E.conj())), 0.0)
    return math.log2(1.0 + gain_I / scenario.sigma2_I), scenario.tau * gain_E, gain_I


def _optimal_beam(h_I, h_E, scenario):
    P = scenario.p_max
    M = h_I.shape[0]
    norm_I = float(np.linalg.norm(h_I))
    norm_E = float(np.linalg.norm(h_E))
    if P == 0.0:
        return np.zeros(M, dtype=complex)
    if norm_I == 0.0:
        # objective is identically zero; serve the ER
        if norm_E == 0.0:
            return np.zeros(M, dtype=complex)
        return math.sqrt(P) * h_E.conj() / norm_E

    a = h_I.conj() / norm_I
    g = h_E.conj()
    alpha = np.vdot(a, g)
    rem = g - alpha * a
    beta = float(np.linalg.norm(rem))
    target = scenario.q_bar / (scenario.tau * P)  # required |h_E v|^2 for unit v

    if abs(alpha) ** 2 >= target or beta <= 1e-14 * max(norm_E, 1e-300):
        theta = 0.0
    else:
        theta0 = math.atan2(beta, abs(alpha))
        ratio = min(1.0, math.sqrt(target) / norm_E)
        theta = max(theta0 - math.acos(ratio), 0.0)
        # rounding in acos can leave the threshold unmet by ~1e-11; bisect toward theta0
        if _beam(a, alpha, rem, beta, theta, P, h_E, scenario)[1] < scenario.q_bar:
            lo, hi = theta, theta0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if _beam(a, alpha, rem, beta, mid, P, h_E, scenario)[1] < scenario.q_bar:
                    lo = mid
                else:
                    hi = mid
            theta = hi
    return _beam(a, alpha, rem, beta, theta, P, h_E, scenario)[0]


def _beam(a, alpha, rem, beta, theta, P, h_E, scenario):
    v = math.cos(theta) * a
    if theta > 0.0:
        # orthogonal component phased to add coherently at the ER
        phase = np.conj(alpha) / abs(alpha) if abs(alpha) > 0 else 1.0
        v = v + math.sin(theta) * phase * (rem / beta)
    w = math.sqrt(P) * v
    return w, scenario.tau * abs(h_E @ w) ** 2


def solve_beamforming(h_I, h_E, scenario):
    """Optimal covariance of the relaxed problem (returned as a rank-one matrix).

    Returns a ``Beamformer`` with ``feasible=False`` and ``W = 0`` when the
    harvesting threshold is out of reach; no exception is raised.
    """
    h_I, h_E = _row(h_I), _row(h_E)
    M = h_I.shape[0]
    if not eh_feasible(h_E, scenario):
        zero = np.zeros((M, M), dtype=complex)
        return Beamformer(zero, None, 0.0, 0.0, math.nan, 0.0, feasible=False)
    w = _optimal_beam(h_I, h_E, scenario)
    W = np.outer(w, w.conj())
    R, Q, obj = _metrics(h_I, h_E, W, scenario)
    return Beamformer(W, None, R, Q, math.nan, obj)


def gaussian_randomization(W, h_I, h_E, scenario, n_samples=100, seed=None):
    """Recover a beamforming vector from covariance ``W``.

    Candidates are the principal eigenvector of ``W`` (scaled by the root of
    its eigenvalue) and ``n_samples`` draws from ``CN(0, W)``. A candidate
    above the power budget is scaled down onto it; one short of the
    harvesting threshold is scaled up to full power. Candidates that remain
    infeasible are discarded and the one with the largest ``|h_I w|^2`` wins.

    Raises:
        InfeasibleError: if no candidate is feasible.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    h_I, h_E = _row(h_I), _row(h_E)
    W = np.asarray(W, dtype=complex)
    M = W.shape[0]
    P, tau, q_bar = scenario.p_max, scenario.tau, scenario.q_bar

    lam, U = np.linalg.eigh((W + W.conj().T) / 2)
    lam = np.clip(lam, 0.0, None)
    rng = np.random.default_rng(seed)
    g = (rng.standard_normal((M, n_samples)) + 1j * rng.standard_normal((M, n_samples))) / math.sqrt(2)
    draws = (U * np.sqrt(lam)) @ g
    cands = np.column_stack([U[:, -1] * math.sqrt(lam[-1]), draws])

    power = np.sum(np.abs(cands) ** 2, axis=0)
    harvest = tau * np.abs(h_E @ cands) ** 2
    scale = np.ones(n_samples + 1)
    nz = power > 0
    over = nz & (power > P)
    scale[over] = P / power[over]
    short = nz & (harvest * scale < q_bar)
    scale[short] = P / power[short]
    cands = cands * np.sqrt(scale)
    power = power * scale
    harvest = harvest * scale
    feasible = (power <= P + CONSTRAINT_TOL) & (harvest >= q_bar - CONSTRAINT_TOL)
    gain = np.abs(h_I @ cands) ** 2

    if not np.any(feasible):
        # least harvesting shortfall, for diagnostics
        best = cands[:, int(np.argmax(harvest))]
        raise InfeasibleError("no feasible candidate among the randomized beams", best)
    idx = int(np.flatnonzero(feasible)[np.argmax(gain[feasible])])
    return cands[:, idx]


def design_beamformer(h_I, h_E, scenario, n_samples=100, seed=None):
    """Solve the relaxed problem, extract ``w`` and return ``W = w w^H`` with its metrics."""
    h_I, h_E = _row(h_I), _row(h_E)
    relaxed = solve_beamforming(h_I, h_E, scenario)
    if not relaxed.feasible:
        return relaxed
    w = gaussian_randomization(relaxed.W, h_I, h_E, scenario, n_samples, seed)
    W = np.outer(w, w.conj())
    R, Q, obj = _metrics(h_I, h_E, W, scenario)
    bound = relaxed.sdp_objective
    gap = (bound - obj) / bound if bound > 0 else 0.0
    return Beamformer(W, w, R, Q, gap, bound)
