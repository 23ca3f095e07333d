"""Classification and dynamical invariants of complex projective transformations.

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

from ._projdyn import (  # noqa: F401
    ProjdynNumericalError,
    ProjdynValidationError,
    certify,
    classify,
    hermitian_selfcheck,
    limit_sets,
    quadric_family,
    simulate,
)

__all__ = [
    "classify",
    "limit_sets",
    "certify",
    "simulate",
    "hermitian_selfcheck",
    "quadric_family",
    "ProjdynValidationError",
    "ProjdynNumericalError",
]
__version__ = "0.1.0"
