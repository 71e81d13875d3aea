"""Reals coded by fast-converging Cauchy sequences of rationals."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Optional

Rat = Fraction


def rat(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"not an exact rational: {x!r}")


def fmt(q: Fraction) -> str:
    return str(q)


class CReal:
    """A real ``x`` given by ``seq`` with ``|seq(n) - seq(n+i)| < 2^-n``.

    ``approx(k)`` reads ``seq(k+1)`` and is therefore within ``2^-(k+1)``
    of ``x``.
    """

    def __init__(self, seq: Callable[[int], Fraction], exact: Optional[Fraction] = None, name: str = ""):
        self.seq = seq
        self.exact = exact
        self.name = name

    @classmethod
    def from_rat(cls, q) -> "CReal":
        q = rat(q)
        return cls(lambda n: q, exact=q, name=str(q))

    @classmethod
    def sqrt(cls, q) -> "CReal":
        q = rat(q)
        if q < 0:
            raise ValueError("square root of a negative rational")
        return cls(lambda n: sqrt_enclosure(q, n + 1)[0], name=f"sqrt({q})")

    @classmethod
    def dyadic_truncation(cls, q) -> "CReal":
        """``q`` read through its binary truncations ``floor(q 2^n) / 2^n``."""
        q = rat(q)
        return cls(lambda n: Fraction(math.floor(q * 2 ** (n + 1)), 2 ** (n + 1)), name=f"dyadic({q})")

    def approx(self, k: int) -> Fraction:
        if k < 0:
            raise ValueError("precision must be a natural")
        if self.exact is not None:
            return self.exact
        return rat(self.seq(k + 1))

    def enclosure(self, k: int) -> tuple:
        q = self.approx(k)
        e = Fraction(1, 2**k)
        return q - e, q + e

    def check_cauchy(self, depth: int) -> bool:
        """Spot-check the fast-convergence condition up to ``depth``."""
        vals = [rat(self.seq(n)) for n in range(depth + 1)]
        return all(abs(vals[n] - vals[m]) < Fraction(1, 2**n) for n in range(depth + 1) for m in range(n, depth + 1))

    def __repr__(self):
        return f"CReal({self.name or '?'})"


def creal_approx(x: CReal, k: int) -> Fraction:
    return x.approx(k)


LT, GT, INDISTINGUISHABLE = "lt", "gt", "indistinguishable"


def creal_compare(x, y, p: int) -> str:
    """Sound comparison: ``lt``/``gt`` are true, otherwise ``|x - y| < 2^-(p-2)``."""
    if p < 0:
        raise ValueError("precision must be a natural")
    x = x if isinstance(x, CReal) else CReal.from_rat(x)
    y = y if isinstance(y, CReal) else CReal.from_rat(y)
    d = x.approx(p + 1) - y.approx(p + 1)
    eps = Fraction(1, 2**p)
    if d > eps:
        return GT
    if d < -eps:
        return LT
    return INDISTINGUISHABLE


def sqrt_enclosure(q, p: int) -> tuple:
    """``(lo, hi)`` with ``lo <= sqrt(q) < hi`` and ``hi - lo = 2^-p``."""
    q = rat(q)
    if q < 0:
        raise ValueError("square root of a negative rational")
    scale = 4**p
    s = math.isqrt(q.numerator * scale // q.denominator)
    return Fraction(s, 2**p), Fraction(s + 1, 2**p)
