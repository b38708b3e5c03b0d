"""Viscous shock profiles, shifted weighted relative entropy and its contraction
for the one-dimensional isothermal Navier-Stokes system in mass coordinates."""
from .errors import (ConfigError, DomainError, NumericalBlowupError, ProfileError,
                     ShiftWindowError, ShockLabError, VacuumProximityError)
from .model import EndStates, Family, GasModel, RiemannShock, solve_rankine_hugoniot
from .profiles import ShockProfile, build_profile

__version__ = "0.1.0"

__all__ = ["ConfigError", "DomainError", "NumericalBlowupError", "ProfileError",
           "ShiftWindowError", "ShockLabError", "VacuumProximityError", "EndStates",
           "Family", "GasModel", "RiemannShock", "solve_rankine_hugoniot",
           "ShockProfile", "build_profile"]
