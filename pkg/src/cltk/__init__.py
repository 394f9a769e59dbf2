"""Numerical toolkit for mollified second moments of degree-2 L-functions."""

__version__ = "0.1.0"

from .errors import CltkError, UsageError  # noqa: F401
from .forms import DELTA, CoefficientTable, ModularForm, ShiftPair  # noqa: F401
