"""Ground-state decay for non-local Schrodinger operators driven by Levy generators."""

from .levy import LevyModel, Polynomial, SubExponential, Exponential, SuperExponential, UserTable, psi, tail_mass
from .spectral import Grid1D, ground_state

__version__ = "0.1.0"

__all__ = [
    "LevyModel", "Polynomial", "SubExponential", "Exponential", "SuperExponential", "UserTable",
    "psi", "tail_mass", "Grid1D", "ground_state",
]
