"""Fluid-antenna SWIPT: channel model, beamforming, antenna-position SCA and alternating optimization."""

from .ao import AOTrace, IterationRecord, Scheme, evaluate_state, initialize_placement, run_ao
from .beamforming import Beamformer, design_beamformer, eh_feasible, gaussian_randomization, solve_beamforming
from .channel import (
    ChannelPair,
    PathSet,
    Placement,
    Scenario,
    assemble_channels,
    harvested_power,
    propagation_delta,
    rate,
    receive_field_vector,
    sample_scenario_paths,
    transmit_field_matrix,
    transmit_field_vector,
)
from .errors import ConfigurationError, InfeasibleError
from .experiment import ExperimentConfig, emit_outputs, load_config, run_experiment
from .position import (
    build_surrogate,
    decompose_objective,
    linearize_distance,
    receiver_objective_matrix,
    solve_rx_subproblem,
    solve_tx_subproblem,
    surrogate_eval,
)

__all__ = [
    "AOTrace",
    "IterationRecord",
    "Scheme",
    "evaluate_state",
    "initialize_placement",
    "run_ao",
    "Beamformer",
    "design_beamformer",
    "eh_feasible",
    "gaussian_randomization",
    "solve_beamforming",
    "ChannelPair",
    "PathSet",
    "Placement",
    "Scenario",
    "assemble_channels",
    "harvested_power",
    "propagation_delta",
    "rate",
    "receive_field_vector",
    "sample_scenario_paths",
    "transmit_field_matrix",
    "transmit_field_vector",
    "ConfigurationError",
    "InfeasibleError",
    "ExperimentConfig",
    "emit_outputs",
    "load_config",
    "run_experiment",
    "build_surrogate",
    "decompose_objective",
    "linearize_distance",
    "receiver_objective_matrix",
    "solve_rx_subproblem",
    "solve_tx_subproblem",
    "surrogate_eval",
]

__version__ = "0.1.0"
