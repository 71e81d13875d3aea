"""Exact analysis on piecewise-affine functions."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .creal import rat, sqrt_enclosure
from .paff import DegenerateInterval, PAff, Piece, RealFunError


def _interval(c, d) -> tuple:
    c, d = rat(c), rat(d)
    if not (0 <= c and d <= 1):
        raise RealFunError(f"[{c}, {d}] is not inside [0,1]")
    if c >= d:
        raise DegenerateInterval(f"need c < d, got [{c}, {d}]")
    return c, d


def _window(f: PAff, c, d) -> tuple:
    """Refine ``f`` at ``c, d`` and return ``(g, i, j)`` with ``g.breakpoints[i] = c``."""
    c, d = _interval(c, d)
    g = f.refine([c, d])
    return g, g.breakpoints.index(c), g.breakpoints.index(d)


def side_limits(f: PAff, x) -> tuple:
    """``(f(x-), f(x+), f(x))`` for ``x`` strictly inside (0,1)."""
    x = rat(x)
    if not 0 < x < 1:
        raise RealFunError("side limits are taken strictly inside (0,1)")
    return f.limits_at(x)


def _jumps(g: PAff, i: int, j: int) -> Fraction:
    total = Fraction(0)
    for k in range(i, j + 1):
        v = g.values[k]
        if k > i:
            total += abs(v - g.left_limit(k))
        if k < j:
            total += abs(g.right_limit(k) - v)
    return total


def variation(f: PAff, c=0, d=1) -> Fraction:
    g, i, j = _window(f, c, d)
    slopes = sum((abs(p.a) * (g.breakpoints[k + 1] - g.breakpoints[k]) for k, p in enumerate(g.pieces[i:j], start=i)), Fraction(0))
    return slopes + _jumps(g, i, j)


def partition_sum(f: PAff, points) -> Fraction:
    """``sum |f(x_{k+1}) - f(x_k)|`` over sorted ``points``."""
    xs = sorted(rat(p) for p in points)
    return sum((abs(f(b) - f(a)) for a, b in zip(xs, xs[1:])), Fraction(0))


@dataclass(frozen=True)
class SupLocation:
    """Where a supremum is reached.

    ``attained`` is a point with ``f(x) = sup`` when one exists; otherwise
    ``approached`` is ``(x, side)`` with the value a one-sided limit at ``x``.
    """

    attained: Optional[Fraction] = None
    approached: Optional[tuple] = None

    def describe(self) -> str:
        if self.attained is not None:
            return f"attained at {self.attained}"
        x, side = self.approached
        return f"approached at {x}{'-' if side == 'left' else '+'}, not attained"


def _extremum(f: PAff, c, d, sign: int) -> tuple:
    g, i, j = _window(f, c, d)
    bp = g.breakpoints
    attained = []  # (x, value)
    approached = []  # (x, side, value)
    for k in range(i, j + 1):
        attained.append((bp[k], g.values[k]))
        if k < j:
            p = g.pieces[k]
            if p.a == 0:
                attained.append(((bp[k] + bp[k + 1]) / 2, p.b))
            else:
                approached.append((bp[k], "right", p(bp[k])))
                approached.append((bp[k + 1], "left", p(bp[k + 1])))
    best = max([sign * v for _, v in attained] + [sign * v for _, _, v in approached])
    value = sign * best
    for x, v in attained:
        if v == value:
            return value, SupLocation(attained=x)
    for x, side, v in approached:
        if v == value:
            return value, SupLocation(approached=(x, side))
    raise AssertionError("unreachable")


def supremum(f: PAff, c=0, d=1) -> tuple:
    """``(sup f[c,d], location)``."""
    return _extremum(f, c, d, 1)


def infimum(f: PAff, c=0, d=1) -> tuple:
    return _extremum(f, c, d, -1)


def integrate(f: PAff, c=0, d=1) -> Fraction:
    g, i, j = _window(f, c, d)
    total = Fraction(0)
    for k in range(i, j):
        lo, hi, p = g.breakpoints[k], g.breakpoints[k + 1], g.pieces[k]
        total += p.a * (hi * hi - lo * lo) / 2 + p.b * (hi - lo)
    return total


def integrate_abs_derivative(f: PAff, c=0, d=1) -> Fraction:
    """``int |f'|`` over the open pieces; jumps carry no derivative mass."""
    g, i, j = _window(f, c, d)
    return sum((abs(g.pieces[k].a) * (g.breakpoints[k + 1] - g.breakpoints[k]) for k in range(i, j)), Fraction(0))


def _density_enclosure(g: PAff, i: int, j: int, p: int) -> tuple:
    n = max(j - i, 1)
    q = p + 1 + n.bit_length()  # n * 2^-q <= 2^-(p+1)
    lo = hi = Fraction(0)
    for k in range(i, j):
        length = g.breakpoints[k + 1] - g.breakpoints[k]
        s_lo, s_hi = sqrt_enclosure(1 + g.pieces[k].a ** 2, q)
        lo += length * s_lo
        hi += length * s_hi
    return lo, hi


def _check_precision(p):
    if not isinstance(p, int) or p < 0:
        raise ValueError("precision must be a natural")


def arclen_density_enclosure(f: PAff, c, d, p: int) -> tuple:
    """Rational ``(lo, hi)`` around ``int sqrt(1 + f'^2)`` of width below ``2^-p``."""
    _check_precision(p)
    g, i, j = _window(f, c, d)
    return _density_enclosure(g, i, j, p)


def integrate_arclen_density(f: PAff, c=0, d=1, p: int = 20) -> Fraction:
    lo, hi = arclen_density_enclosure(f, c, d, p)
    return (lo + hi) / 2


def arc_length_enclosure(f: PAff, c, d, p: int) -> tuple:
    """Enclosure of the graph length, vertical jump segments included."""
    _check_precision(p)
    g, i, j = _window(f, c, d)
    lo, hi = _density_enclosure(g, i, j, p)
    jumps = _jumps(g, i, j)
    return lo + jumps, hi + jumps


def arc_length(f: PAff, c=0, d=1, p: int = 20) -> Fraction:
    lo, hi = arc_length_enclosure(f, c, d, p)
    return (lo + hi) / 2


# ---------------------------------------------------------------- indicatrix


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INFINITY"

    def __str__(self):
        return "inf"


INFINITY = _Infinity()


@dataclass(frozen=True)
class Indicatrix:
    """Step description of ``y -> #{x : f(x) = y}``.

    ``level_counts[k]`` is the count at ``levels[k]`` (possibly ``INFINITY``)
    and ``gap_counts[k]`` the constant count on ``(levels[k], levels[k+1])``.
    Outside ``[levels[0], levels[-1]]`` the count is 0.
    """

    levels: tuple
    level_counts: tuple
    gap_counts: tuple

    def __call__(self, y):
        y = rat(y)
        k = bisect.bisect_left(self.levels, y)
        if k < len(self.levels) and self.levels[k] == y:
            return self.level_counts[k]
        if k == 0 or k == len(self.levels):
            return 0
        return self.gap_counts[k - 1]

    def integral(self) -> Fraction:
        return sum(
            (n * (self.levels[k + 1] - self.levels[k]) for k, n in enumerate(self.gap_counts)),
            Fraction(0),
        )

    def steps(self) -> list:
        """``[(lo, hi, count)]`` with ``lo == hi`` for single levels."""
        out = []
        for k, y in enumerate(self.levels):
            out.append((y, y, self.level_counts[k]))
            if k < len(self.gap_counts):
                out.append((y, self.levels[k + 1], self.gap_counts[k]))
        return out


def indicatrix(f: PAff) -> Indicatrix:
    levels = set(f.values)
    ranges = []
    for k in range(f.m):
        a, b = f.piece_range(k)
        levels.update((a, b))
        ranges.append((min(a, b), max(a, b), f.pieces[k].a == 0))
    levels = sorted(levels)
    counts = []
    for y in levels:
        n = sum(1 for v in f.values if v == y)
        inf = False
        for lo, hi, flat in ranges:
            if flat and lo == y:
                inf = True
            elif not flat and lo < y < hi:
                n += 1
        counts.append(INFINITY if inf else n)
    gaps = []
    for y0, y1 in zip(levels, levels[1:]):
        gaps.append(sum(1 for lo, hi, flat in ranges if not flat and lo <= y0 and y1 <= hi))
    return Indicatrix(tuple(levels), tuple(counts), tuple(gaps))


# ---------------------------------------------------------------- envelopes and points


def envelopes(f: PAff) -> tuple:
    """``(lower, upper)`` semicontinuous envelopes."""
    lo_vals, hi_vals = [], []
    for i in range(f.m + 1):
        around = [v for v in (f.left_limit(i), f.values[i], f.right_limit(i)) if v is not None]
        lo_vals.append(min(around))
        hi_vals.append(max(around))
    return PAff(f.breakpoints, f.pieces, tuple(lo_vals)), PAff(f.breakpoints, f.pieces, tuple(hi_vals))


@dataclass(frozen=True)
class PointClass:
    continuous: bool
    removable: bool
    jump: bool
    quasi_continuous: bool
    lower_semicontinuous: bool
    upper_semicontinuous: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def classify_point(f: PAff, x) -> PointClass:
    """Flags from the side limits; at 0 and 1 the missing side copies the other."""
    lft, rgt, v = f.limits_at(rat(x))
    if lft is None:
        lft = rgt
    if rgt is None:
        rgt = lft
    return PointClass(
        continuous=lft == v == rgt,
        removable=lft == rgt != v,
        jump=lft != rgt,
        quasi_continuous=v == lft or v == rgt,
        lower_semicontinuous=v <= min(lft, rgt),
        upper_semicontinuous=v >= max(lft, rgt),
    )
