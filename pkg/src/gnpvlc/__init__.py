"""Multi-user precoding for vehicular visible light links through a gold-nanoparticle plate.

Headlights carry RGB LED arrays behind a plasmonic plate whose transmittance
depends on where the receiver sits. The package builds those channels,
designs SLNR precoders, tunes the per-LED colour ratios under white-light
constraints, and sweeps rate and reach figures. `gnpvlc.cli` is the entry
point for the sweeps.
"""

from .ao import AoResult, AoSweep, ao_for_temperature, ao_over_temperatures
from .config import ConfigError, ScenarioConfig, default_scenario, load_scenario, wiretap_scenario
from .experiments import COMMANDS, run_experiment, write_outputs
from .model import SystemModel, build_system

__version__ = "0.1.0"

__all__ = [
    "AoResult",
    "AoSweep",
    "COMMANDS",
    "ConfigError",
    "ScenarioConfig",
    "SystemModel",
    "ao_for_temperature",
    "ao_over_temperatures",
    "build_system",
    "default_scenario",
    "load_scenario",
    "run_experiment",
    "wiretap_scenario",
    "write_outputs",
]
