"""Realisers for the finiteness functionals and for functions of bounded variation."""

from .bv import (
    BadBound,
    BadVariation,
    Discontinuity,
    DiscontinuityList,
    DuplicatePoint,
    JordanDecomposition,
    NotAttained,
    NotSingular,
    NotUSC,
    PrimeInjection,
    Verdict,
    ac_diagnostics,
    baire1_approx,
    component_count,
    discontinuity_enum,
    fsigma_export,
    jordan_decompose,
    preimage,
    prime_injection,
    pseudo_monotone_index,
    rational_index,
    restricted_variation,
    sierpinski_decompose,
    staircase_from_enum,
    usc_max,
)
from .caccioppoli import (
    NotClosed,
    NotContinuousOnC,
    NotDisjoint,
    cacc_max,
    cacc_sup,
    caccioppoli_ops,
    rm_code,
    tietze,
    urysohn,
)
from .countable import (
    InjectivityViolated,
    MissingPreimage,
    banach_to_enum,
    distance_functional,
    enumeration_functional,
    f_q,
    omega_bw,
    south_test,
)
from .omega import (
    DEFAULT_PRECISION,
    InconsistentOrder,
    locate,
    omega_family,
    omega_fin,
    omega_from_b,
    omega_from_count_ge,
    omega_star,
    omega_wo,
)
from .setquery import (
    SENTINEL,
    ClusterError,
    EmptySet,
    Enclosure,
    OracleInconsistent,
    PrecisionExhausted,
    PreconditionViolated,
    ReplayMismatch,
    SetQuery,
    replaying,
)

__all__ = [name for name in dir() if not name.startswith("_")]
