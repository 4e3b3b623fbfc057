"""Numerical checks of pressure-sign Liouville theorems for incompressible flows."""

from .grid import Grid, ScalarField, VectorField, make_grid
from .generators import GeneratorSpec, gen_divfree
from .riesz import Undetermined, compute_pressure, l1_diagnostic, momentum_tensor
from .identity import LiouvilleVerdict, classify_state, hardy_norm_estimate

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "make_grid",
    "GeneratorSpec",
    "gen_divfree",
    "Undetermined",
    "compute_pressure",
    "l1_diagnostic",
    "momentum_tensor",
    "LiouvilleVerdict",
    "classify_state",
    "hardy_norm_estimate",
    "__version__",
]
