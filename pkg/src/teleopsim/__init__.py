"""Deterministic bilateral-teleoperation simulator.

Wave-variable transmission with impedance-matched terminations, a
programmable-delay channel, passivity/energy monitoring, and two delay
compensators: a Smith predictor at the operator end and a minimum-jerk
extrapolator at the remote end.
"""

from .channel import ChannelEnd, DelayProfile, PollResult
from .energy import (
    EnergyLedger,
    PassivityError,
    accumulate_wave,
    energy_storage,
    power_balance_check,
    zeta_power_channel,
)
from .harness import (
    Architecture,
    ClosedLoop,
    ConfigError,
    ExperimentConfig,
    Metrics,
    TraceLog,
    analytic_equilibrium,
    compute_metrics,
    run_experiment,
    sweep,
)
from .plant import InputSignal, RemoteEnd, VehicleModel
from .predictors import (
    HorizonError,
    MinimumJerkPredictor,
    SmithPredictor,
    mj_blend,
    mj_interpolate,
)
from .waves import (
    PowerSample,
    WaveImpedance,
    WaveSample,
    decode_operator,
    decode_remote,
    encode_operator,
    encode_remote,
    operator_termination,
    power_flow,
    remote_termination,
)

__version__ = "0.1.0"

__all__ = [
    "Architecture",
    "ChannelEnd",
    "ClosedLoop",
    "ConfigError",
    "DelayProfile",
    "EnergyLedger",
    "ExperimentConfig",
    "HorizonError",
    "InputSignal",
    "Metrics",
    "MinimumJerkPredictor",
    "PassivityError",
    "PollResult",
    "PowerSample",
    "RemoteEnd",
    "SmithPredictor",
    "TraceLog",
    "VehicleModel",
    "WaveImpedance",
    "WaveSample",
    "accumulate_wave",
    "analytic_equilibrium",
    "compute_metrics",
    "decode_operator",
    "decode_remote",
    "encode_operator",
    "encode_remote",
    "energy_storage",
    "mj_blend",
    "mj_interpolate",
    "operator_termination",
    "power_balance_check",
    "power_flow",
    "remote_termination",
    "run_experiment",
    "sweep",
    "zeta_power_channel",
]
