"""
Alternating optimization of beamforming and antenna positions.

Each outer iteration solves, in order, the beamforming subproblem, the
transmit-position subproblem (inner SCA sweeps over the BS antennas) and the
two receiver-position subproblems. Every block is solved no worse than its
incumbent, so the IR rate is non-decreasing across iterations.

Benchmarks freeze some of the blocks: TFA keeps the receivers fixed, RFA
keeps the BS antennas fixed and FPA keeps everything fixed.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .beamforming import design_beamformer, eh_feasible
from .channel import Placement, assemble_channels, harvested_power, lattice_capacity, rate
from .errors import ConfigurationError
from .position import optimize_receiver, optimize_transmit_positions

__all__ = [
    "Scheme",
    "IterationRecord",
    "AOTrace",
    "initialize_placement",
    "evaluate_state",
    "run_ao",
]

FEASIBILITY_TOL = 1e-8


class Scheme(str, enum.Enum):
    PROPOSED = "PROPOSED"
    TFA = "TFA"
    RFA = "RFA"
    FPA = "FPA"

    @property
    def moves_tx(self):
        return self in (Scheme.PROPOSED, Scheme.TFA)

    @property
    def moves_rx(self):
        return self in (Scheme.PROPOSED, Scheme.RFA)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    rate: float
    harvested_power: float
    feasible: bool
    placement: Placement
    W: np.ndarray
    wall_time: float
    note: str = ""


@dataclass
class AOTrace:
    """Outcome of one AO run.

    ``records[0]`` is the initial state (zero beamformer); ``records[l]`` is
    the state after outer iteration ``l``. An infeasible trial has no
    records and a diagnostic message.
    """

    scheme: Scheme
    seed: int
    records: list = field(default_factory=list)
    converged: bool = False
    infeasible: bool = False
    diagnostic: str = ""

    @property
    def rates(self):
        return np.array([rec.rate for rec in self.records])

    @property
    def final_rate(self):
        return self.records[-1].rate if self.records else math.nan

    @property
    def iterations(self):
        return max(len(self.records) - 1, 0)

    @property
    def final_placement(self):
        return self.records[-1].placement if self.records else None


def initialize_placement(scenario, seed=None, jitter=0.0):
    """Compact centred lattice for the BS antennas, receivers at their region centres.

    The BS antennas sit on a ``ceil(sqrt(M))``-column square lattice of pitch
    ``D + 2 * jitter``. With ``jitter > 0`` each antenna is displaced
    uniformly within ``[-jitter, jitter]^2`` (drawn from ``seed``), which
    keeps the spacing constraint satisfied.
    """
    M, D = scenario.M, scenario.min_distance
    pitch = D + 2.0 * jitter
    if lattice_capacity(scenario.tx_half, pitch) < M:
        raise ConfigurationError(f"cannot place {M} antennas at pitch {pitch} in the transmit region")
    n_cols = math.ceil(math.sqrt(M))
    n_rows = math.ceil(M / n_cols)
    t = np.empty((M, 2))
    for idx in range(M):
        row, col = divmod(idx, n_cols)
        in_row = min(n_cols, M - row * n_cols)
        t[idx] = ((col - (in_row - 1) / 2) * pitch, ((n_rows - 1) / 2 - row) * pitch)
    if jitter > 0:
        rng = np.random.default_rng(seed)
        t = t + rng.uniform(-jitter, jitter, size=t.shape)
    t = np.clip(t, -scenario.tx_half, scenario.tx_half)
    placement = Placement(t, np.zeros(2), np.zeros(2))
    problems = placement.violations(scenario, tol=0.0)
    if problems:
        raise ConfigurationError("; ".join(problems))
    return placement


def evaluate_state(scenario, placement, paths_I, paths_E, W):
    """Recompute ``(R, Q, feasible)`` from scratch.

    ``feasible`` means every constraint of the joint problem holds within
    ``FEASIBILITY_TOL``: region, spacing, power budget, harvesting threshold
    and positive semidefiniteness of ``W``.
    """
    ch = assemble_channels(placement, paths_I, paths_E, scenario.wavelength)
    R = rate(ch.h_I, W, scenario.sigma2_I)
    Q = harvested_power(ch.h_E, W, scenario.tau)
    feasible = (
        placement.is_valid(scenario, FEASIBILITY_TOL)
        and float(np.real(np.trace(W))) <= scenario.p_max + FEASIBILITY_TOL
        and Q >= scenario.q_bar - FEASIBILITY_TOL
    )
    return R, Q, bool(feasible)


def run_ao(
    scenario,
    paths_I,
    paths_E,
    scheme=Scheme.PROPOSED,
    seed=0,
    eps_outer=1e-4,
    max_outer=50,
    placement=None,
    n_samples=100,
    max_inner=20,
    inner_tol=1e-5,
):
    """Run the alternating optimization for one channel realisation.

    Stops once two consecutive outer iterations differ in rate by at most
    ``eps_outer`` or after ``max_outer`` iterations. ``seed`` drives the
    Gaussian randomization.
    """
    scheme = Scheme(scheme)
    if placement is None:
        placement = initialize_placement(scenario, seed)
    problems = placement.violations(scenario)
    if problems:
        raise ConfigurationError("initial placement invalid: " + "; ".join(problems))
    trace = AOTrace(scheme, seed)

    ch = assemble_channels(placement, paths_I, paths_E, scenario.wavelength)
    if not eh_feasible(ch.h_E, scenario):
        trace.infeasible = True
        best = scenario.tau * scenario.p_max * float(np.vdot(ch.h_E, ch.h_E).real)
        trace.diagnostic = (
            f"harvesting threshold {scenario.q_bar:.6g} W unreachable at the initial "
            f"placement (best {best:.6g} W)"
        )
        return trace

    M = scenario.M
    W = np.zeros((M, M), dtype=complex)
    R, Q, feas = evaluate_state(scenario, placement, paths_I, paths_E, W)
    trace.records.append(IterationRecord(0, R, Q, feas, placement, W, 0.0))

    for it in range(1, max_outer + 1):
        start = time.perf_counter()
        notes = []
        ch = assemble_channels(placement, paths_I, paths_E, scenario.wavelength)
        bf = design_beamformer(ch.h_I, ch.h_E, scenario, n_samples, seed=[seed, it])
        if not bf.feasible:
            notes.append("beamforming infeasible; kept previous W")
        elif it == 1 or bf.achieved_rate >= trace.records[-1].rate - 1e-12:
            W = bf.W
        else:
            # rounding only: the incumbent W is feasible and at least as good
            notes.append("kept previous W")

        if scheme.moves_tx:
            placement, _, fallbacks = optimize_transmit_positions(
                W, paths_I, paths_E, placement, scenario, max_inner, inner_tol
            )
            if fallbacks:
                notes.append(f"{fallbacks} transmit subproblem fallbacks")
        if scheme.moves_rx:
            placement, _ = optimize_receiver(W, paths_I, placement, scenario, max_inner, inner_tol)
            placement, _ = optimize_receiver(W, paths_E, placement, scenario, max_inner, inner_tol)

        R, Q, feas = evaluate_state(scenario, placement, paths_I, paths_E, W)
        prev = trace.records[-1].rate
        trace.records.append(
            IterationRecord(it, R, Q, feas, placement, W, time.perf_counter() - start, "; ".join(notes))
        )
        if it >= 2 and abs(R - prev) <= eps_outer:
            trace.converged = True
            break
    return trace
