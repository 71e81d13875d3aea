"""Functionals on countable sets given with an injection into the naturals."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

from ..realfun import PAff, RSet, indicatrix, rat
from .omega import DEFAULT_PRECISION, omega_fin
from .setquery import (
    SENTINEL,
    ClusterError,
    EmptySet,
    Enclosure,
    OracleInconsistent,
    PrecisionExhausted,
    PreconditionViolated,
    SetQuery,
)

DEFAULT_N_MAX = 10_000


class InjectivityViolated(ClusterError):
    def __init__(self, x, y, n):
        super().__init__(f"Y({x}) = Y({y}) = {n}")
        self.pair = (x, y)
        self.n = n


class MissingPreimage(ClusterError):
    def __init__(self, n):
        super().__init__(f"no element of A is sent to {n}")
        self.n = n


def _as_query(A, log=None) -> SetQuery:
    if isinstance(A, SetQuery):
        return A
    if not isinstance(A, RSet):
        A = RSet.finite(A)
    return SetQuery(A, cardinality="finite", log=log, name="A")


def enumeration_functional(A, Y: Callable, mode: str = "plain", n_max: int = DEFAULT_N_MAX, log=None) -> list:
    """List ``A`` as ``x_0, x_1, ...`` ordered by ``Y``.

    For each ``n`` the level set ``{x in A : Y(x) = n}`` is tested with
    ``Omega_b`` and read with ``Omega``; a level set with two elements is an
    injectivity failure. The search stops once ``|A|`` elements are found.
    ``weak`` mode requires every ``n`` below ``|A|`` to be hit.
    """
    if mode not in ("plain", "weak"):
        raise ValueError(f"unknown mode {mode!r}")
    X = _as_query(A, log)
    total = X.count()
    out = []
    n = 0
    while len(out) < total:
        if n >= n_max:
            raise PrecisionExhausted(f"only {len(out)} of {total} elements have Y-values below {n_max}")
        level = X.filter(lambda x, n=n: Y(x) == n, f"Y={n}")
        if level.omega_b():
            try:
                x = level.omega()
            except PreconditionViolated:
                a, b = omega_fin(level)[:2]
                raise InjectivityViolated(a, b, n) from None
            out.append(x)
        elif mode == "weak":
            raise MissingPreimage(n)
        n += 1
    return out


def omega_bw(A, Y: Callable, n_max: int = DEFAULT_N_MAX) -> Fraction:
    """``sup A`` as a maximum over the enumeration."""
    xs = enumeration_functional(A, Y, n_max=n_max)
    if not xs:
        raise EmptySet("sup of the empty set")
    return max(xs)


def distance_functional(x, A, Y: Callable, n_max: int = DEFAULT_N_MAX) -> Fraction:
    """``sup_{a in A} |x - a|``."""
    x = rat(x)
    xs = enumeration_functional(A, Y, n_max=n_max)
    if not xs:
        raise EmptySet("distance to the empty set")
    return max(abs(x - a) for a in xs)


def f_q(A: RSet, Y: Callable, q) -> PAff:
    """``2^-(Y(x)+1)`` at the points of ``A`` above ``q``, 0 elsewhere."""
    q = rat(q)
    return PAff.point_values({x: Fraction(1, 2 ** (Y(x) + 1)) for x in A.points if x > q})


def south_test(A: RSet, Y: Callable, n: int, q, N_oracle=indicatrix) -> bool:
    """Is there ``x`` in ``A`` with ``Y(x) = n`` and ``x > q``? Asked of the indicatrix."""
    count = N_oracle(f_q(A, Y, q))(Fraction(1, 2 ** (n + 1)))
    if count not in (0, 1):
        raise OracleInconsistent(f"indicatrix count {count} at level 2^-{n + 1}")
    return count == 1


def banach_to_enum(
    A: RSet,
    Y: Callable,
    N_oracle=indicatrix,
    p: int = DEFAULT_PRECISION,
    n_max: Optional[int] = None,
) -> list:
    """Enumerate finite ``A`` using only indicatrix queries on the ``f_q``.

    Returns ``[(n, enclosure)]`` for every ``n < n_max`` with a preimage,
    each enclosure of width at most ``2^-p``. With ``n_max`` unset, the
    values of ``Y`` on ``A`` bound the search (the set is finite at this
    scale, and ``Y`` is a given input).
    """
    if not A.is_finite():
        raise PreconditionViolated("A must be finite")
    if n_max is None:
        n_max = max((Y(x) for x in A.points), default=-1) + 1
    out = []
    for n in range(n_max):
        # q = -1 asks whether n has a preimage at all
        if not south_test(A, Y, n, -1, N_oracle):
            continue
        if south_test(A, Y, n, 1, N_oracle):
            raise OracleInconsistent(f"a preimage of {n} above 1")
        if not south_test(A, Y, n, 0, N_oracle):
            out.append((n, Enclosure(Fraction(0), Fraction(0))))
            continue
        lo, hi = Fraction(0), Fraction(1)  # lo < x <= hi
        for _ in range(p):
            mid = (lo + hi) / 2
            if south_test(A, Y, n, mid, N_oracle):
                lo = mid
            else:
                hi = mid
        out.append((n, Enclosure(lo, hi)))
    return out
