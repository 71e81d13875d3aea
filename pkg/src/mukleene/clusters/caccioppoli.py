"""Operations on closed sets given by their characteristic functions."""

from __future__ import annotations

from fractions import Fraction

from ..realfun import Interval, PAff, RSet, rat, supremum
from .setquery import ClusterError, EmptySet


class NotDisjoint(ClusterError):
    pass


class NotClosed(ClusterError):
    pass


class NotContinuousOnC(ClusterError):
    def __init__(self, x):
        super().__init__(f"the function is not continuous on C at {x}")
        self.x = x


def _closed(C: RSet) -> RSet:
    if not C.is_closed():
        raise NotClosed(f"{C} is not closed")
    return C


def cacc_sup(C: RSet) -> Fraction:
    _closed(C)
    if C.is_empty():
        raise EmptySet("sup of the empty set")
    return C.sup()


def rm_code(C: RSet) -> list:
    """The complement of ``C`` in [0,1] as open rational intervals."""
    return _closed(C).complement().components()


def urysohn(C0: RSet, C1: RSet) -> PAff:
    """0 on ``C0``, 1 on ``C1``, linear across the gaps, constant at the ends."""
    _closed(C0)
    _closed(C1)
    if not C0.intersection(C1).is_empty():
        raise NotDisjoint(f"{C0} and {C1} meet")
    comps = sorted([(c, 0) for c in C0.components()] + [(c, 1) for c in C1.components()], key=lambda t: t[0].lo)
    if not comps:
        return PAff.constant(0)
    return _interpolate([(c.lo, c.hi, lambda x, v=v: Fraction(v)) for c, v in comps])


def _interpolate(blocks) -> PAff:
    """Glue functions given on sorted closed blocks, linear in between."""
    xs, ys = [], []

    def node(x, y):
        if xs and xs[-1] == x:
            return
        xs.append(x)
        ys.append(y)

    first = blocks[0]
    if first[0] > 0:
        node(Fraction(0), first[2](first[0]))
    for lo, hi, fn, *inner in blocks:
        node(lo, fn(lo))
        for x in inner[0] if inner else ():
            node(x, fn(x))
        node(hi, fn(hi))
    last = blocks[-1]
    if last[1] < 1:
        node(Fraction(1), last[2](last[1]))
    return PAff.from_points(xs, ys)


def _check_continuous_on(f: PAff, C: RSet):
    for c in C.components():
        for i, b in enumerate(f.breakpoints):
            if not (c.lo <= b <= c.hi):
                continue
            v = f.values[i]
            if b > c.lo and f.left_limit(i) != v:
                raise NotContinuousOnC(b)
            if b < c.hi and f.right_limit(i) != v:
                raise NotContinuousOnC(b)


def tietze(f: PAff, C: RSet) -> PAff:
    """Continuous ``g`` equal to ``f`` on ``C``, linear across the gaps of ``C``.

    ``f`` only matters on ``C`` and must be continuous there.
    """
    _closed(C)
    if C.is_empty():
        raise EmptySet("nothing to extend")
    _check_continuous_on(f, C)
    blocks = []
    for c in C.components():
        inner = [b for b in f.breakpoints if c.lo < b < c.hi]
        blocks.append((c.lo, c.hi, f, inner))
    return _interpolate(blocks)


def cacc_max(f: PAff, C: RSet) -> Fraction:
    """A point of ``C`` where ``f`` restricted to ``C`` is largest."""
    _closed(C)
    if C.is_empty():
        raise EmptySet("max over the empty set")
    _check_continuous_on(f, C)
    best = None
    for c in C.components():
        if c.lo == c.hi:
            x, v = c.lo, f(c.lo)
        else:
            v, loc = supremum(f, c.lo, c.hi)
            x = loc.attained if loc.attained is not None else loc.approached[0]
        if best is None or v > best[1]:
            best = (x, v)
    return best[0]


def caccioppoli_ops(C: RSet, op: str, *, C0=None, C1=None, f=None):
    """Dispatch: ``sup``, ``rm_code``, ``urysohn``, ``tietze``, ``max``."""
    if op == "sup":
        return cacc_sup(C)
    if op == "rm_code":
        return rm_code(C)
    if op == "urysohn":
        return urysohn(C0, C1)
    if op == "tietze":
        return tietze(f, C)
    if op == "max":
        return cacc_max(f, C)
    raise ValueError(f"unknown operation {op!r}")
