"""Exact bookkeeping for blow-up resolutions of foliations on 3-space.

Indices live in Q(sqrt2, i); see :mod:`folires.scalar`.
"""

from .complex import Complex, ComplexError, validate_sequence
from .scalar import Scalar, classify

__all__ = ["Complex", "ComplexError", "Scalar", "classify", "validate_sequence"]
__version__ = "0.1.0"
