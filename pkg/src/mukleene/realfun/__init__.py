"""Exact rationals, Cauchy reals and piecewise-affine functions on [0,1]."""

from .creal import (
    GT,
    INDISTINGUISHABLE,
    LT,
    CReal,
    Rat,
    creal_approx,
    creal_compare,
    rat,
    sqrt_enclosure,
)
from .ops import (
    INFINITY,
    Indicatrix,
    PointClass,
    SupLocation,
    arc_length,
    arc_length_enclosure,
    arclen_density_enclosure,
    classify_point,
    envelopes,
    indicatrix,
    infimum,
    integrate,
    integrate_abs_derivative,
    integrate_arclen_density,
    partition_sum,
    side_limits,
    supremum,
    variation,
)
from .paff import DegenerateInterval, PAff, PAffFormatError, Piece, RealFunError
from .rset import Interval, RSet, RSetFormatError

__all__ = [name for name in dir() if not name.startswith("_")]
