"""Secure SWIPT downlink beamforming with artificial noise.

Minimum-power transmit design for desired receivers that also harvest
energy, under secrecy limits against roaming receivers that may
eavesdrop. The relaxed semidefinite program is solved by a bundled
interior-point method, rank-one beams are certified or rebuilt from the
dual certificate, and two zero-forcing schemes serve as references.
"""
from .baselines import SCHEMES, solve_baseline1, solve_baseline2, solve_scheme, zf_directions
from .conic import BACKEND, SolverOptions
from .errors import BuildError, ConfigError, ContractError, RecoveryError
from .recovery import construct_rank_one, kkt_rho_check, rank_profile
from .scenario import ChannelRealization, ScenarioConfig, generate_scenario, load_config
from .sdp import BeamformingSolution, DualCertificate, ProblemInstance, build_program, solve_instance, verify_primal
from .sweep import SweepSpec, emit_csv, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "SCHEMES", "SolverOptions",
    "BuildError", "ConfigError", "ContractError", "RecoveryError",
    "ChannelRealization", "ScenarioConfig", "generate_scenario", "load_config",
    "ProblemInstance", "BeamformingSolution", "DualCertificate",
    "build_program", "solve_instance", "verify_primal",
    "construct_rank_one", "kkt_rho_check", "rank_profile",
    "solve_baseline1", "solve_baseline2", "solve_scheme", "zf_directions",
    "SweepSpec", "run_sweep", "emit_csv",
]
