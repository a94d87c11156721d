"""Resource allocation schemes for sum secrecy rate maximization in an
OFDMA amplify-and-forward relay downlink with a passive eavesdropper."""

from .allocation import (
    AllocationResult,
    Assignment,
    InvalidAssignmentError,
    PowerAllocation,
    Scheme,
    random_assignment,
    relay_power_update,
)
from .channel import (
    ChannelRealization,
    NormalizedGains,
    TapProfile,
    generate_channels,
    normalize_gains,
)
from .config import InvalidConfigError, SolverParams, SystemConfig
from .dual import (
    DualState,
    IterationRecord,
    QuadraticCoefficients,
    assign_subcarriers,
    closed_form_power,
    optimal_power,
    solve_joint,
    subgradient_step,
)
from .schemes import optimize_power_for_assignment, run_nonopt, run_opt, run_subopt
from .secrecy import (
    LinkGains,
    amplification_factor,
    secrecy_rate,
    secrecy_rates,
    snr_pair,
    sum_secrecy_rate,
)
from .sweep import (
    SweepResult,
    SweepRow,
    SweepSpec,
    emit_convergence_trace,
    emit_csv,
    parse_csv,
    run_sweep,
    trial_seed,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationResult", "Assignment", "ChannelRealization", "DualState",
    "InvalidAssignmentError", "InvalidConfigError", "IterationRecord",
    "LinkGains", "NormalizedGains", "PowerAllocation", "QuadraticCoefficients",
    "Scheme", "SolverParams", "SweepResult", "SweepRow", "SweepSpec",
    "SystemConfig", "TapProfile", "amplification_factor", "assign_subcarriers",
    "closed_form_power", "emit_convergence_trace", "emit_csv",
    "generate_channels", "normalize_gains", "optimal_power",
    "optimize_power_for_assignment", "parse_csv", "random_assignment",
    "relay_power_update", "run_nonopt", "run_opt", "run_subopt", "run_sweep",
    "secrecy_rate", "secrecy_rates", "snr_pair", "solve_joint",
    "subgradient_step", "sum_secrecy_rate", "trial_seed",
]
