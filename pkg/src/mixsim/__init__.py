"""Finite-volume simulator for an incompressible, heat-conducting, charged,
multicomponent non-Newtonian fluid on a staggered grid."""
import logging

from .constitutive import MaterialModel, check_hypotheses
from .errors import (
    ConfigurationError,
    DomainError,
    IterationError,
    MixsimError,
    PositivityError,
    StateError,
    StepSizeError,
)
from .grid import BoundarySpec, FieldState, Grid
from .kernels import BACKEND
from .scenarios import build_config, scenario_names
from .stepper import SimConfig, Stepper, cascade_study, dt_study, run

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundarySpec",
    "ConfigurationError",
    "DomainError",
    "FieldState",
    "Grid",
    "IterationError",
    "MaterialModel",
    "MixsimError",
    "PositivityError",
    "SimConfig",
    "StateError",
    "StepSizeError",
    "Stepper",
    "build_config",
    "cascade_study",
    "check_hypotheses",
    "dt_study",
    "run",
    "scenario_names",
]
