"""The finiteness functionals and the reductions between them."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

from ..realfun import RSet, rat
from .setquery import (
    SENTINEL,
    ClusterError,
    Enclosure,
    OracleInconsistent,
    PrecisionExhausted,
    PreconditionViolated,
    SetQuery,
)

DEFAULT_PRECISION = 30
MAX_PRECISION = 4096

VARIANTS = ("b", "omega", "omega1", "omega_bits", "omega_exti", "fin", "n", "le_n", "count", "count_ge")


class InconsistentOrder(ClusterError):
    pass


def _check_p(p):
    if not isinstance(p, int) or p < 0:
        raise ValueError("precision must be a natural")
    if p > MAX_PRECISION:
        raise PrecisionExhausted(f"precision {p} exceeds {MAX_PRECISION}")


def locate(X: SetQuery, p: int, nonempty: Callable[[SetQuery], bool]):
    """Interval halving driven by a nonemptiness test on subsets of ``X``.

    Both halves are asked at every step, so two elements separated at the
    current resolution are reported as a broken ``|X| <= 1`` promise.
    """
    _check_p(p)
    if not nonempty(X):
        return SENTINEL
    lo, hi, hi_closed = Fraction(0), Fraction(1), True
    for _ in range(p):
        mid = (lo + hi) / 2
        left = nonempty(X.restrict(lo, mid, True, False))
        right = nonempty(X.restrict(mid, hi, True, hi_closed))
        if left and right:
            raise PreconditionViolated(f"{X.name} has elements on both sides of {mid}")
        if not (left or right):
            raise OracleInconsistent(f"{X.name} is nonempty but both halves of [{lo}, {hi}] are empty")
        if left:
            hi, hi_closed = mid, False
        else:
            lo = mid
    return Enclosure(lo, hi)


def _nonempty_b(S: SetQuery) -> bool:
    return S.omega_b() == 1


def _nonempty_exti(S: SetQuery) -> bool:
    # k+1 disjoint rescaled copies of a singleton have k+1 elements, which
    # beats the bound k given for the set itself; the empty set is unchanged
    k = S.count_ge()
    return S.affine_copies(k + 1).count_ge() > k


def omega_from_b(X: SetQuery, p: int = DEFAULT_PRECISION):
    """Bit extraction: the element of ``X`` to ``2^-p`` from emptiness queries."""
    return locate(X, p, _nonempty_b)


def omega_from_count_ge(X: SetQuery, p: int = DEFAULT_PRECISION):
    """The partition trick: the element of ``X`` from an upper bound on sizes."""
    return locate(X, p, _nonempty_exti)


def omega_star(X: SetQuery, memo: Optional[dict] = None):
    """Least element of a finite ``X`` or the sentinel.

    ``x`` is kept in ``Y`` when the least element of ``{y in X : y < x}`` is
    not in ``X``; then ``Y`` is the singleton of the minimum and ``Omega``
    reads it off.
    """
    memo = {} if memo is None else memo
    key = X._truth.key()
    if key in memo:
        return memo[key]

    def keep(x):
        below = omega_star(X.restrict(0, x, True, False), memo)
        return below is SENTINEL or not X.contains(below)

    out = X.filter(keep, "min").omega()
    memo[key] = out
    return out


def omega_fin(X: SetQuery) -> list:
    """All elements of a finite ``X``, listed from below with ``omega_star``."""
    out = []
    S = X
    memo: dict = {}
    while True:
        x = omega_star(S, memo)
        if x is SENTINEL:
            return out
        out.append(x)
        S = S.restrict(x, 1, False, True)


def omega_family(X: SetQuery, variant: str, p: int = DEFAULT_PRECISION, n: Optional[int] = None):
    """Dispatch over the finiteness functionals.

    ``b`` -> 0/1; ``omega`` -> exact element or sentinel; ``omega1`` -> the
    element of a singleton; ``omega_bits`` and ``omega_exti`` -> enclosures
    of width ``2^-p`` obtained by the two reductions; ``fin``/``n``/``le_n``
    -> lists of exact enclosures; ``count`` -> |X|; ``count_ge`` -> a bound.
    """
    if variant == "b":
        return X.omega_b()
    if variant == "omega":
        x = X.omega()
        return x if x is SENTINEL else Enclosure(x, x)
    if variant == "omega1":
        x = X.omega()
        if x is SENTINEL:
            raise PreconditionViolated("Omega_1 needs a singleton, got the empty set")
        return Enclosure(x, x)
    if variant == "omega_bits":
        return omega_from_b(X, p)
    if variant == "omega_exti":
        return omega_from_count_ge(X, p)
    if variant in ("fin", "n", "le_n"):
        if variant != "fin" and (n is None or n < 0):
            raise ValueError(f"variant {variant} needs n >= 0")
        xs = omega_fin(X)
        if variant == "n" and len(xs) != n:
            raise PreconditionViolated(f"|X| = {len(xs)}, not {n}")
        if variant == "le_n" and len(xs) > n:
            raise PreconditionViolated(f"|X| = {len(xs)} exceeds {n}")
        return [Enclosure(x, x) for x in xs]
    if variant == "count":
        return X.count()
    if variant == "count_ge":
        return X.count_ge()
    raise ValueError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")


def _check_order(elems: list, prec) -> None:
    for a in elems:
        if prec(a, a):
            raise InconsistentOrder(f"{a} precedes itself")
    for i, a in enumerate(elems):
        for b in elems[i + 1 :]:
            ab, ba = prec(a, b), prec(b, a)
            if ab == ba:
                raise InconsistentOrder(f"{a} and {b} are {'mutually ordered' if ab else 'incomparable'}")
    for a in elems:
        for b in elems:
            if prec(a, b):
                for c in elems:
                    if prec(b, c) and not prec(a, c):
                        raise InconsistentOrder(f"{a} < {b} < {c} but not {a} < {c}")


def omega_wo(X: RSet, B, prec: Callable[[Fraction, Fraction], bool], log: Optional[list] = None):
    """The ``prec``-least element of ``B`` (a subset of finite ``X``), or the sentinel.

    Runs the self-referential program: ``y`` is kept when the least element
    below ``y`` is not in ``B``, and the kept set is a singleton.
    """
    if not X.is_finite():
        raise PreconditionViolated("the well-order must live on a finite set")
    elems = list(X.points)
    b_pts = list(B.points) if isinstance(B, RSet) else [rat(b) for b in B]
    if isinstance(B, RSet) and not B.is_finite():
        raise PreconditionViolated("B must be finite")
    for b in b_pts:
        if b not in X:
            raise ClusterError(f"{b} is in B but not in X")
    _check_order(elems, prec)
    active: set = set()
    memo: dict = {}

    def least(S: SetQuery):
        key = S._truth.key()
        if key in memo:
            return memo[key]
        if key in active:
            raise InconsistentOrder("the recursion re-entered a set (cycle)")
        active.add(key)
        try:

            def keep(y):
                r = least(S.filter(lambda z: prec(z, y), f"before({y})"))
                return r is SENTINEL or not S.contains(r)

            try:
                out = S.filter(keep, "least").omega()
            except PreconditionViolated as e:
                raise InconsistentOrder(f"no unique least element: {e}") from None
        finally:
            active.discard(key)
        memo[key] = out
        return out

    return least(SetQuery(RSet.finite(b_pts), cardinality="finite", log=log, name="B"))
