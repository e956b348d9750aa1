"""
Far-field geometric channel model for a fluid-antenna SWIPT link.

A base station (BS) with ``M`` movable antennas serves one information
receiver (IR) and one energy receiver (ER), each with a single movable
antenna. Every antenna lives in an axis-aligned square region centred on
its own reference origin. With planar wavefronts, moving an antenna only
changes the phase of each propagation path, so a link is described by

    h = f(r)^H  Sigma  Xi(t_1, ..., t_M)

where ``Xi`` stacks the transmit field-response vectors (one column per BS
antenna), ``f`` is the receive field-response vector and ``Sigma`` holds
the complex path gains between the region origins.

Units: positions and wavelength in meters, powers in watts (linear),
angles in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "Scenario",
    "PathSet",
    "Placement",
    "ChannelPair",
    "propagation_delta",
    "path_directions",
    "transmit_field_vector",
    "transmit_field_matrix",
    "receive_field_vector",
    "assemble_channels",
    "quadratic_form",
    "rate",
    "harvested_power",
    "sample_scenario_paths",
    "lattice_capacity",
]

# relative tolerance on the imaginary residue / negative part of h W h^H
PSD_RTOL = 1e-9


def lattice_capacity(half_extent, min_distance):
    """Number of points a square lattice of pitch ``min_distance`` fits in the region."""
    per_side = int(math.floor(2.0 * half_extent / min_distance + 1e-12)) + 1
    return per_side * per_side


@dataclass(frozen=True)
class Scenario:
    """Static problem instance. Defaults reproduce the reference simulation setup.

    Region sizes are half-extents: the transmit region is
    ``[-tx_half, tx_half]^2`` around the BS reference point, and similarly
    for the two receivers.
    """

    M: int = 4
    wavelength: float = 1.0
    tx_half: float = 2.0
    rx_half_I: float = 1.0
    rx_half_E: float = 1.0
    min_distance: float = 0.5
    tau: float = 0.5
    p_max: float = 10 ** 0.5
    q_bar: float = 1.0
    sigma2_I: float = 1.0
    sigma2_E: float = 1.0
    q_tI: int = 3
    q_tE: int = 3
    q_rI: int = 3
    q_rE: int = 3
    nu: float = 1.0

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise ConfigurationError(f"M must be an integer >= 2, got {self.M}")
        if self.wavelength <= 0:
            raise ConfigurationError("wavelength must be positive")
        for name in ("tx_half", "rx_half_I", "rx_half_E"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be non-negative")
        if not 0 < self.tau <= 1:
            raise ConfigurationError(f"tau must lie in (0, 1], got {self.tau}")
        if self.min_distance <= 0:
            raise ConfigurationError("min_distance must be positive")
        if self.p_max < 0 or self.q_bar < 0:
            raise ConfigurationError("p_max and q_bar must be non-negative")
        if self.sigma2_I <= 0 or self.sigma2_E <= 0:
            raise ConfigurationError("noise powers must be positive")
        for name in ("q_tI", "q_tE", "q_rI", "q_rE"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be a positive integer")
        if self.nu < 0:
            raise ConfigurationError("nu must be non-negative")
        if lattice_capacity(self.tx_half, self.min_distance) < self.M:
            raise ConfigurationError(
                f"transmit region of half-extent {self.tx_half} cannot hold "
                f"{self.M} antennas at spacing {self.min_distance}"
            )

    def rx_half(self, link):
        return self.rx_half_I if link == "I" else self.rx_half_E


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PathSet:
    """Angles and path-response matrix of one BS-to-receiver link.

    ``sigma`` has shape ``(q_r, q_t)``. Elevation ``phi`` and azimuth ``psi``
    angles are in ``[0, pi]``.
    """

    link: str
    phi_t: np.ndarray
    psi_t: np.ndarray
    phi_r: np.ndarray
    psi_r: np.ndarray
    sigma: np.ndarray
    tx_dirs: np.ndarray = field(init=False, repr=False)
    rx_dirs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.link not in ("I", "E"):
            raise ConfigurationError(f"link must be 'I' or 'E', got {self.link!r}")
        for name in ("phi_t", "psi_t", "phi_r", "psi_r"):
            a = _frozen(np.atleast_1d(getattr(self, name)), float)
            if np.any(a < 0) or np.any(a > np.pi):
                raise ConfigurationError(f"{name} angles must lie in [0, pi]")
            object.__setattr__(self, name, a)
        if self.phi_t.shape != self.psi_t.shape or self.phi_r.shape != self.psi_r.shape:
            raise ConfigurationError("elevation and azimuth arrays differ in length")
        sigma = _frozen(np.atleast_2d(self.sigma), complex)
        if sigma.shape != (self.q_r, self.q_t):
            raise ConfigurationError(
                f"sigma has shape {sigma.shape}, expected {(self.q_r, self.q_t)}"
            )
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "tx_dirs", _frozen(path_directions(self.phi_t, self.psi_t), float))
        object.__setattr__(self, "rx_dirs", _frozen(path_directions(self.phi_r, self.psi_r), float))

    @property
    def q_t(self):
        return self.phi_t.shape[0]

    @property
    def q_r(self):
        return self.phi_r.shape[0]


@dataclass(frozen=True)
class Placement:
    """Positions of the ``M`` transmit antennas (``t``, shape (M, 2)) and both receive antennas."""

    t: np.ndarray
    r_I: np.ndarray
    r_E: np.ndarray

    def __post_init__(self):
        t = _frozen(self.t, float)
        if t.ndim != 2 or t.shape[1] != 2:
            raise ConfigurationError(f"t must have shape (M, 2), got {t.shape}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "r_I", _frozen(np.reshape(self.r_I, 2), float))
        object.__setattr__(self, "r_E", _frozen(np.reshape(self.r_E, 2), float))

    @property
    def M(self):
        return self.t.shape[0]

    def rx(self, link):
        return self.r_I if link == "I" else self.r_E

    def with_tx(self, m, position):
        t = np.array(self.t)
        t[m] = position
        return replace(self, t=t)

    def with_rx(self, link, position):
        if link == "I":
            return replace(self, r_I=position)
        return replace(self, r_E=position)

    def violations(self, scenario, tol=1e-8):
        """List human-readable constraint violations (empty when valid)."""
        out = []
        if self.M != scenario.M:
            out.append(f"placement has {self.M} transmit antennas, scenario has {scenario.M}")
        if np.any(np.abs(self.t) > scenario.tx_half + tol):
            out.append("transmit antenna outside its region")
        for link in ("I", "E"):
            if np.any(np.abs(self.rx(link)) > scenario.rx_half(link) + tol):
                out.append(f"receive antenna {link} outside its region")
        diff = self.t[:, None, :] - self.t[None, :, :]
        dist = np.sqrt(np.sum(diff ** 2, axis=-1))
        iu = np.triu_indices(self.M, 1)
        if iu[0].size and np.min(dist[iu]) < scenario.min_distance - tol:
            out.append(f"minimum antenna spacing {np.min(dist[iu]):.6g} below {scenario.min_distance}")
        return out

    def is_valid(self, scenario, tol=1e-8):
        return not self.violations(scenario, tol)


@dataclass(frozen=True)
class ChannelPair:
    """Channels of both links plus the field responses they were built from."""

    h_I: np.ndarray
    h_E: np.ndarray
    Xi_I: np.ndarray
    Xi_E: np.ndarray
    f_I: np.ndarray
    f_E: np.ndarray


def path_directions(phi, psi):
    """Rows ``(sin(phi) cos(psi), cos(phi))``: the gradient of the path-length offset."""
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    return np.stack([np.sin(phi) * np.cos(psi), np.cos(phi)], axis=-1)


def propagation_delta(pos, phi, psi):
    """Path-length difference of a path seen from ``pos`` relative to the region origin.

    Broadcasts over ``phi``/``psi``.
    """
    x, y = pos[0], pos[1]
    return x * np.sin(phi) * np.cos(psi) + y * np.cos(phi)


def transmit_field_vector(t, paths, wavelength):
    """Unit-modulus phase terms of the ``q_t`` transmit paths at BS position ``t``."""
    return np.exp(2j * np.pi / wavelength * (paths.tx_dirs @ np.asarray(t, dtype=float)))


def transmit_field_matrix(placement, paths, wavelength):
    """``q_t x M`` matrix whose column ``m`` is the field vector of antenna ``m``."""
    return np.exp(2j * np.pi / wavelength * (paths.tx_dirs @ placement.t.T))


def receive_field_vector(r, paths, wavelength):
    """Unit-modulus phase terms of the ``q_r`` receive paths at receiver position ``r``."""
    return np.exp(2j * np.pi / wavelength * (paths.rx_dirs @ np.asarray(r, dtype=float)))


def _link_channel(placement, paths, wavelength):
    Xi = transmit_field_matrix(placement, paths, wavelength)
    f = receive_field_vector(placement.rx(paths.link), paths, wavelength)
    return f.conj() @ paths.sigma @ Xi, Xi, f


def assemble_channels(placement, paths_I, paths_E, wavelength):
    """Build ``h_i = f(r_i)^H Sigma_i Xi_i(t)`` for both links."""
    if paths_I.link != "I" or paths_E.link != "E":
        raise ConfigurationError("paths_I / paths_E must carry link ids 'I' / 'E'")
    h_I, Xi_I, f_I = _link_channel(placement, paths_I, wavelength)
    h_E, Xi_E, f_E = _link_channel(placement, paths_E, wavelength)
    return ChannelPair(h_I=h_I, h_E=h_E, Xi_I=Xi_I, Xi_E=Xi_E, f_I=f_I, f_E=f_E)


def _check_psd(W):
    W = np.asarray(W)
    scale = max(float(np.real(np.trace(W))), 0.0) + 1e-300
    if not np.allclose(W, W.conj().T, rtol=0.0, atol=PSD_RTOL * scale + 1e-300):
        raise ValueError("W is not Hermitian")
    if W.shape[0] and np.linalg.eigvalsh(W).min() < -PSD_RTOL * scale:
        raise ValueError("W is not positive semidefinite")
    return W


def quadratic_form(h, W):
    """Real, clamped ``h W h^H`` for a row vector ``h`` and PSD ``W``."""
    W = _check_psd(W)
    h = np.asarray(h)
    val = h @ W @ h.conj()
    scale = float(np.real(np.trace(W))) * float(np.real(np.vdot(h, h)))
    if abs(val.imag) > PSD_RTOL * scale + 1e-300:
        raise ValueError("quadratic form has a non-negligible imaginary part")
    return max(float(val.real), 0.0)


def rate(h_I, W, sigma2_I):
    """Achievable IR rate ``log2(1 + h W h^H / sigma^2)`` in bits/s/Hz."""
    if sigma2_I <= 0:
        raise ValueError("sigma2_I must be positive")
    return math.log2(1.0 + quadratic_form(h_I, W) / sigma2_I)


def harvested_power(h_E, W, tau):
    """Linear-model harvested power ``tau * h_E W h_E^H`` in watts."""
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    return tau * quadratic_form(h_E, W)


def _sample_link(rng, link, q_t, q_r, nu):
    if q_t != q_r:
        raise ConfigurationError(
            f"diagonal path-response model needs q_t == q_r on link {link}, got {q_t} and {q_r}"
        )
    phi_t, psi_t = rng.uniform(0.0, np.pi, size=(2, q_t))
    phi_r, psi_r = rng.uniform(0.0, np.pi, size=(2, q_r))
    var = np.empty(q_r)
    var[0] = nu / (nu + 1.0)
    if q_r > 1:
        var[1:] = 1.0 / ((nu + 1.0) * (q_r - 1))
    gains = np.sqrt(var / 2.0) * (rng.standard_normal(q_r) + 1j * rng.standard_normal(q_r))
    return PathSet(link, phi_t, psi_t, phi_r, psi_r, np.diag(gains))


def sample_scenario_paths(scenario, seed):
    """Draw one random channel realisation for both links.

    Angles are i.i.d. uniform on ``[0, pi]``; ``Sigma`` is diagonal with the
    first (line-of-sight) entry ``CN(0, nu/(nu+1))`` and the remaining
    ``q_r - 1`` entries sharing ``1/(nu+1)`` of the power equally.
    """
    rng = np.random.default_rng(seed)
    paths_I = _sample_link(rng, "I", scenario.q_tI, scenario.q_rI, scenario.nu)
    paths_E = _sample_link(rng, "E", scenario.q_tE, scenario.q_rE, scenario.nu)
    return paths_I, paths_E
