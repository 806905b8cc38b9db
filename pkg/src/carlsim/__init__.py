"""Collective atomic recoil lasing in a unidirectionally pumped ring cavity."""
from .params import SystemParams
from .dynamics import EnsembleState, ProbeField, ScenarioConfig, Event, run_scenario
from .analytic import cubic_chirp, steady_velocity, meanfield_rhs, beta_steady

__all__ = [
    "SystemParams",
    "EnsembleState",
    "ProbeField",
    "ScenarioConfig",
    "Event",
    "run_scenario",
    "cubic_chirp",
    "steady_velocity",
    "meanfield_rhs",
    "beta_steady",
]
