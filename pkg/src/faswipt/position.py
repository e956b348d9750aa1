"""
Successive convex approximation of the antenna-position subproblems.

For fixed W, the received power ``h W h^H`` as a function of one antenna's
position is a convex quadratic in that antenna's field-response vector ``xi``
composed with the phase map ``t -> xi(t)``. It is bounded below in two steps:

1. linearize the quadratic in ``xi`` at the current ``xi~`` (a global
   minorant by convexity), which leaves a phase sum
   ``sum_k |rho_k| cos(2 pi rho_k(t) / lambda - angle(rho_k))`` plus a constant;
2. bound the phase sum from below by a concave isotropic quadratic in ``t``
   using the curvature constant ``kappa = 8 pi^2 / lambda^2 * sum_k |rho_k|``.

Both steps are tight at the expansion point, so maximizing the surrogate
never decreases the true objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import receive_field_vector, transmit_field_matrix

__all__ = [
    "QuadraticFormDecomposition",
    "SurrogateModel",
    "LinearizedDistance",
    "PositionUpdate",
    "decompose_objective",
    "receive_decomposition",
    "build_surrogate",
    "surrogate_eval",
    "exact_functional",
    "linearize_distance",
    "solve_tx_subproblem",
    "receiver_objective_matrix",
    "solve_rx_subproblem",
    "optimize_transmit_positions",
    "optimize_receiver",
]

FEAS_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticFormDecomposition:
    """``F(xi) = xi^H A xi + 2 Re(b^H xi) + c`` for one antenna and one link.

    ``side`` says which angles ``xi`` responds to: ``"tx"`` for a BS antenna,
    ``"rx"`` for a receiver antenna.
    """

    A: np.ndarray
    b: np.ndarray
    c: float
    link: str
    side: str = "tx"

    def value(self, xi):
        xi = np.asarray(xi)
        quad = np.einsum("...i,ij,...j->...", xi.conj(), self.A, xi)
        lin = xi @ self.b.conj()
        return np.real(quad) + 2.0 * np.real(lin) + self.c


@dataclass(frozen=True)
class SurrogateModel:
    """Concave quadratic minorant of ``F`` in position space, tangent at ``expansion_point``.

    ``rho`` are the complex coefficients of the phase sum, ``affine_offset``
    the constant folded out of the first linearization, so that
    ``value_at_expansion`` equals the phase sum at the expansion point plus
    ``affine_offset``.
    """

    expansion_point: np.ndarray
    rho: np.ndarray
    value_at_expansion: float
    gradient: np.ndarray
    kappa: float
    affine_offset: float

    def peak(self):
        """Unconstrained maximizer, or None when the model is flat."""
        if self.kappa <= 0:
            return None
        return self.expansion_point + self.gradient / self.kappa


@dataclass(frozen=True)
class LinearizedDistance:
    """Affine lower bound ``beta(t) = u^T (t - anchor)`` on ``||t - anchor||``."""

    anchor: np.ndarray
    direction: np.ndarray

    def __call__(self, t):
        return (np.asarray(t) - self.anchor) @ self.direction


@dataclass(frozen=True)
class PositionUpdate:
    position: np.ndarray
    surrogate_value: float
    fallback: bool = False


def _dirs(paths, side):
    return paths.tx_dirs if side == "tx" else paths.rx_dirs


def _link_weights(paths, placement, wavelength):
    """``a = Sigma^H f(r)`` and the channel entries ``gamma_j = a^H xi(t_j)``."""
    f = receive_field_vector(placement.rx(paths.link), paths, wavelength)
    a = paths.sigma.conj().T @ f
    return a, a.conj() @ transmit_field_matrix(placement, paths, wavelength)


def _split(W, a, gamma, m, link):
    others = np.arange(gamma.shape[0]) != m
    g_o = gamma[others]
    s = W[m, others] @ g_o.conj()
    A = W[m, m].real * np.outer(a, a.conj())
    b = np.conj(s) * a
    c = max(float(np.real(g_o @ W[np.ix_(others, others)] @ g_o.conj())), 0.0)
    return QuadraticFormDecomposition(A, b, c, link, "tx")


def decompose_objective(W, paths, placement, m, wavelength):
    """Split ``h W h^H`` into its dependence on antenna ``m`` (0-based).

    With ``a = Sigma^H f(r)`` and ``gamma_j = a^H xi(t_j)`` (the channel
    entries), the self term is ``A = W[m,m] a a^H``, the cross term is
    ``b = conj(s) a`` with ``s = sum_{j != m} W[m,j] conj(gamma_j)``, and
    ``c`` is the quadratic form over the remaining antennas.
    """
    M = placement.M
    if not 0 <= m < M:
        raise IndexError(f"antenna index {m} out of range for M={M}")
    a, gamma = _link_weights(paths, placement, wavelength)
    return _split(np.asarray(W, dtype=complex), a, gamma, m, paths.link)


def receive_decomposition(delta, link):
    """Receiver objective ``f^H delta f`` as a decomposition with no cross or constant term."""
    delta = np.asarray(delta, dtype=complex)
    return QuadraticFormDecomposition(delta, np.zeros(delta.shape[0], complex), 0.0, link, "rx")


def exact_functional(dec, paths, t, wavelength):
    """Evaluate ``F(xi(t))``; ``t`` may be a stack of positions with shape (..., 2)."""
    theta = np.asarray(t, dtype=float) @ _dirs(paths, dec.side).T
    return dec.value(np.exp(2j * np.pi / wavelength * theta))


def build_surrogate(dec, paths, expansion_point, wavelength):
    """Two-stage minorant of ``F(xi(t))`` around ``expansion_point``.

    The phase sum is ``2 Re(d^H xi(t))`` with ``d = A xi~ + b``; its
    coefficients are ``rho = 2 d`` so that the sum reads
    ``sum_k |rho_k| cos(theta_k(t) - angle(rho_k))``.
    """
    dirs = _dirs(paths, dec.side)
    t0 = np.array(expansion_point, dtype=float)
    k = 2.0 * np.pi / wavelength
    theta = k * (dirs @ t0)
    xi = np.exp(1j * theta)
    rho = 2.0 * (dec.A @ xi + dec.b)
    amp = np.abs(rho)
    offset_phase = theta - np.angle(rho)
    grad = -k * (amp * np.sin(offset_phase)) @ dirs
    kappa = 2.0 * k * k * float(np.sum(amp))
    quad = float(np.real(np.vdot(xi, dec.A @ xi)))
    value = quad + 2.0 * float(np.real(np.vdot(dec.b, xi))) + dec.c
    t0.setflags(write=False)
    return SurrogateModel(t0, rho, value, grad, kappa, dec.c - quad)


def surrogate_eval(model, t):
    """Surrogate value at ``t`` (shape (2,) or (..., 2))."""
    dt = np.asarray(t, dtype=float) - model.expansion_point
    return model.value_at_expansion + dt @ model.gradient - 0.5 * model.kappa * np.sum(dt * dt, axis=-1)


def linearize_distance(t_tilde, t_v):
    """First-order expansion of ``||t - t_v||`` at ``t_tilde``; a global lower bound."""
    diff = np.asarray(t_tilde, dtype=float) - np.asarray(t_v, dtype=float)
    norm = float(np.hypot(diff[0], diff[1]))
    if norm == 0.0:
        raise ValueError("cannot linearize the distance at coincident points")
    return LinearizedDistance(np.array(t_v, dtype=float), diff / norm)


def _line_intersection(h1, h2):
    a1, b1, e1 = h1
    a2, b2, e2 = h2
    det = a1 * b2 - a2 * b1
    if abs(det) < 1e-14:
        return None
    return ((e1 * b2 - e2 * b1) / det, (a1 * e2 - a2 * e1) / det)


def _line_circle(h, disk):
    a, b, e = h
    cx, cy, rad = disk
    # unit normal (a, b): foot of perpendicular from centre
    off = e - (a * cx + b * cy)
    if abs(off) > rad:
        return []
    fx, fy = cx + off * a, cy + off * b
    half = math.sqrt(max(rad * rad - off * off, 0.0))
    return [(fx - half * b, fy + half * a), (fx + half * b, fy - half * a)]


def _maximize_in_2d(peak, grad, halfplanes, disk, scale):
    """Maximize ``-||p - peak||^2`` (or ``grad . p`` if ``peak`` is None) over
    ``{a x + b y <= e} cap disk`` by enumerating KKT candidates.

    Half-plane normals must be unit length. Returns None when no candidate
    is feasible.
    """
    tol = FEAS_TOL * (1.0 + scale)

    def feasible(p):
        x, y = p
        for a, b, e in halfplanes:
            if a * x + b * y > e + tol:
                return False
        if disk is not None:
            cx, cy, rad = disk
            if math.hypot(x - cx, y - cy) > rad + tol:
                return False
        return True

    cands = []
    if peak is not None:
        px, py = peak
        cands.append((px, py))
        for a, b, e in halfplanes:
            viol = a * px + b * py - e
            cands.append((px - viol * a, py - viol * b))
        if disk is not None:
            cx, cy, rad = disk
            dist = math.hypot(px - cx, py - cy)
            if dist > 0:
                cands.append((cx + rad * (px - cx) / dist, cy + rad * (py - cy) / dist))
    elif disk is not None:
        cx, cy, rad = disk
        gn = math.hypot(grad[0], grad[1])
        if gn > 0:
            cands.append((cx + rad * grad[0] / gn, cy + rad * grad[1] / gn))
    n = len(halfplanes)
    for i in range(n):
        for j in range(i + 1, n):
            p = _line_intersection(halfplanes[i], halfplanes[j])
            if p is not None:
                cands.append(p)
        if disk is not None:
            cands.extend(_line_circle(halfplanes[i], disk))

    best, best_val = None, -math.inf
    for p in cands:
        if not feasible(p):
            continue
        if peak is not None:
            val = -((p[0] - peak[0]) ** 2 + (p[1] - peak[1]) ** 2)
        else:
            val = grad[0] * p[0] + grad[1] * p[1]
        if val > best_val:
            best, best_val = p, val
    return best


def _box_halfplanes(half):
    return [(1.0, 0.0, half), (-1.0, 0.0, half), (0.0, 1.0, half), (0.0, -1.0, half)]


def solve_tx_subproblem(model_I, model_E, neighbors, scenario, eh_threshold=None):
    """Move one BS antenna to maximize the IR surrogate.

    Constraints: the transmit box, the linearized spacing ``beta_v(t) >= D``
    to every neighbor, and the ER surrogate staying above ``eh_threshold``
    (default ``Q_bar / tau``, in units of ``h_E W h_E^H``). Both models must
    share their expansion point, which has to satisfy the constraints.
    """
    t0 = np.asarray(model_I.expansion_point, dtype=float)
    x0, y0 = float(t0[0]), float(t0[1])
    if abs(model_E.expansion_point[0] - x0) + abs(model_E.expansion_point[1] - y0) > 1e-12:
        raise ValueError("IR and ER surrogates expanded at different points")
    if eh_threshold is None:
        eh_threshold = scenario.q_bar / scenario.tau
    half = scenario.tx_half
    D = scenario.min_distance

    infeasible = max(abs(x0), abs(y0)) > half + 1e-8 or (
        eh_threshold > 0 and model_E.value_at_expansion < eh_threshold - 1e-8 * (1.0 + eh_threshold)
    )
    halfplanes = _box_halfplanes(half)
    for xv, yv in np.reshape(neighbors, (-1, 2)).tolist():
        dist = math.hypot(x0 - xv, y0 - yv)
        if dist < D - 1e-8:
            infeasible = True
            break
        # beta(t) >= D  <=>  -u . t <= -D - u . t_v
        ux, uy = (x0 - xv) / dist, (y0 - yv) / dist
        halfplanes.append((-ux, -uy, -D - (ux * xv + uy * yv)))
    if infeasible:
        raise ValueError("expansion point violates the transmit subproblem constraints")

    stay = PositionUpdate(t0, model_I.value_at_expansion)
    peak = model_I.peak()
    if half == 0.0 or peak is None:
        return stay

    disk = None
    if eh_threshold > 0 and model_E.kappa > 0:
        gE = model_E.gradient
        r2 = 2.0 * (model_E.value_at_expansion - eh_threshold) / model_E.kappa + float(gE @ gE) / model_E.kappa ** 2
        centre = model_E.peak()
        disk = (float(centre[0]), float(centre[1]), math.sqrt(max(r2, 0.0)))

    scale = max(half, float(np.max(np.abs(t0))))
    best = _maximize_in_2d(
        None if peak is None else (float(peak[0]), float(peak[1])),
        model_I.gradient, halfplanes, disk, scale,
    )
    if best is None:
        return PositionUpdate(t0, model_I.value_at_expansion, fallback=True)
    t_new = np.clip(np.array(best), -half, half)
    val = float(surrogate_eval(model_I, t_new))
    if val < model_I.value_at_expansion:
        return stay
    return PositionUpdate(t_new, val)


def receiver_objective_matrix(W, Sigma, Xi):
    """``delta = Sigma Xi W Xi^H Sigma^H`` so that ``h W h^H = f^H delta f``."""
    G = np.asarray(Sigma) @ np.asarray(Xi)
    delta = G @ np.asarray(W) @ G.conj().T
    return (delta + delta.conj().T) / 2


def solve_rx_subproblem(delta, paths, half, r_tilde, wavelength):
    """One surrogate step for a receiver antenna in the box ``[-half, half]^2``.

    The isotropic concave surrogate is maximized over the box by clipping
    its peak.
    """
    r0 = np.asarray(r_tilde, dtype=float)
    dec = receive_decomposition(delta, paths.link)
    model = build_surrogate(dec, paths, r0, wavelength)
    peak = model.peak()
    if half == 0.0 or peak is None:
        return PositionUpdate(r0, model.value_at_expansion)
    r_new = np.clip(peak, -half, half)
    val = float(surrogate_eval(model, r_new))
    if val < model.value_at_expansion:
        return PositionUpdate(r0, model.value_at_expansion)
    return PositionUpdate(r_new, val)


def optimize_transmit_positions(W, paths_I, paths_E, placement, scenario, max_inner=20, tol=1e-5):
    """Inner SCA loop over the BS antennas.

    Each sweep updates antennas ``0..M-1`` in order, each against the
    latest positions of the others. Stops when a sweep improves
    ``h_I W h_I^H`` by less than ``tol`` relative, or after ``max_inner`` sweeps.

    Returns:
        (placement, sweeps, fallbacks)
    """
    wl = scenario.wavelength
    if scenario.tx_half == 0.0:
        return placement, 0, 0
    W = np.asarray(W, dtype=complex)
    t = np.array(placement.t)
    a_I, gamma_I = _link_weights(paths_I, placement, wl)
    a_E, gamma_E = _link_weights(paths_E, placement, wl)
    k = 2j * np.pi / wl

    def objective():
        return float(np.real(gamma_I @ W @ gamma_I.conj()))

    value = objective()
    fallbacks = 0
    sweeps = 0
    for sweeps in range(1, max_inner + 1):
        before = value
        for m in range(t.shape[0]):
            model_I = build_surrogate(_split(W, a_I, gamma_I, m, "I"), paths_I, t[m], wl)
            model_E = build_surrogate(_split(W, a_E, gamma_E, m, "E"), paths_E, t[m], wl)
            upd = solve_tx_subproblem(model_I, model_E, np.delete(t, m, axis=0), scenario)
            fallbacks += upd.fallback
            t[m] = upd.position
            gamma_I[m] = a_I.conj() @ np.exp(k * (paths_I.tx_dirs @ t[m]))
            gamma_E[m] = a_E.conj() @ np.exp(k * (paths_E.tx_dirs @ t[m]))
        value = objective()
        if value - before <= tol * max(abs(before), 1e-300):
            break
    return replace(placement, t=t), sweeps, fallbacks


def optimize_receiver(W, paths, placement, scenario, max_inner=20, tol=1e-5):
    """Inner SCA loop for one receiver antenna (the link is taken from ``paths``).

    Returns:
        (placement, iterations)
    """
    wl = scenario.wavelength
    link = paths.link
    half = scenario.rx_half(link)
    if half == 0.0:
        return placement, 0
    Xi = transmit_field_matrix(placement, paths, wl)
    delta = receiver_objective_matrix(W, paths.sigma, Xi)
    dec = receive_decomposition(delta, link)
    r = placement.rx(link)
    value = float(exact_functional(dec, paths, r, wl))
    it = 0
    for it in range(1, max_inner + 1):
        upd = solve_rx_subproblem(delta, paths, half, r, wl)
        new_value = float(exact_functional(dec, paths, upd.position, wl))
        if new_value < value:
            break
        gain = new_value - value
        r, value = upd.position, new_value
        if gain <= tol * max(abs(value), 1e-300):
            break
    return placement.with_rx(link, r), it
