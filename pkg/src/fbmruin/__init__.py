"""Ruin of gamma-reflected fractional Brownian motion: simulation, asymptotics, constants."""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticEstimate,
    Constants,
    Intermediate,
    LimitLaw,
    Long,
    Short,
    loss_limit_scaling,
    psi0_finite,
    psi0_infinite,
    psi_gamma,
    ruin_time_limit_law,
)
from .errors import ConfigError, FbmRuinError, InfeasibleRareEvent, InvariantBreach
from .fbm import FbmPath, GridSpec, sample_fbm_cholesky, sample_fbm_spectral
from .reflection import ModelParams, reflect, reflected_path, ruin_outcome

__all__ = [
    "__version__",
    "AsymptoticEstimate",
    "Constants",
    "Intermediate",
    "LimitLaw",
    "Long",
    "Short",
    "loss_limit_scaling",
    "psi0_finite",
    "psi0_infinite",
    "psi_gamma",
    "ruin_time_limit_law",
    "ConfigError",
    "FbmRuinError",
    "InfeasibleRareEvent",
    "InvariantBreach",
    "FbmPath",
    "GridSpec",
    "sample_fbm_cholesky",
    "sample_fbm_spectral",
    "ModelParams",
    "reflect",
    "reflected_path",
    "ruin_outcome",
]
