"""High-order conservative semi-Lagrangian solvers for BGK gas mixtures."""

from .errors import ConfigError, MixkinError, NumericalError
from .grid import PhaseGrid, TimeControl, build_grid, shift_decompose
from .moments import MixtureState, MomentField, SpeciesTable, compute_moments, maxwellian_pair, maxwellian_state
from .reconstruct import cweno_reconstruct, q_eval, shift_field
from .relax import RegimeParams, relaxation_stage
from .stepper import SCHEMES, advance, step_backward_euler, step_bdf, step_dirk

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "MixkinError",
    "NumericalError",
    "PhaseGrid",
    "TimeControl",
    "build_grid",
    "shift_decompose",
    "MixtureState",
    "MomentField",
    "SpeciesTable",
    "compute_moments",
    "maxwellian_pair",
    "maxwellian_state",
    "cweno_reconstruct",
    "q_eval",
    "shift_field",
    "RegimeParams",
    "relaxation_stage",
    "SCHEMES",
    "advance",
    "step_backward_euler",
    "step_bdf",
    "step_dirk",
]
