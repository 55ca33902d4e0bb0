"""Discrete Morse theory: detect, cancel and realize cancellations of critical pairs."""
from .cancel import (
    CancellationPlan,
    Rejection,
    SimplifyReport,
    cancel_1d,
    cancel_pair,
    execute,
    is_cancelable,
    lower_critical_value,
    realize_function,
    sample_deformation,
    simplify,
    support_census,
)
from .complex import CellComplex, CellId, build_complex, euler_characteristic
from .errors import MorseError
from .field import ScalarField, load_field, lower_star
from .gradient import DiscreteGradient, build_gradient, critical_cells, descending_paths
from .persist import PersistencePair, persistence_pairs, schedule

__version__ = "0.1.0"
