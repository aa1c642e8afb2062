"""q-Bessel Fourier analysis of the bilateral birth-death process on the grid ``{q^n}``."""

__version__ = "0.1.0"

from .config import DEFAULT_TOLERANCES, Tolerances
from .qcore import GridFunction, GridWindow, QParams, c_constant, default_window, make_params
from .qbessel import jnu_series, orthogonality_defect
from .qfourier import hankel_transform, positivity_probe, transform_matrix, translate
from .bdkernel import heat_kernel, transition_row

__all__ = [
    "__version__",
    "DEFAULT_TOLERANCES",
    "Tolerances",
    "GridFunction",
    "GridWindow",
    "QParams",
    "c_constant",
    "default_window",
    "make_params",
    "jnu_series",
    "orthogonality_defect",
    "hankel_transform",
    "positivity_probe",
    "transform_matrix",
    "translate",
    "heat_kernel",
    "transition_row",
]
