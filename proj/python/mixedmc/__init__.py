"""Low-rank completion of mixed-type matrices."""

from ._mixedmc import (
    InsufficientDataError,
    Layout,
    Model,
    NumericalError,
    detect,
    lambda_star,
    make_instance,
    relative_error,
    solve,
    sweep,
    theory_penalties,
)

__all__ = [
    "InsufficientDataError",
    "Layout",
    "Model",
    "NumericalError",
    "detect",
    "lambda_star",
    "make_instance",
    "relative_error",
    "solve",
    "sweep",
    "theory_penalties",
]
