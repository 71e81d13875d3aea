"""Piecewise-affine functions on [0,1] with explicit breakpoint values."""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .creal import rat


class RealFunError(Exception):
    pass


class DegenerateInterval(RealFunError):
    pass


class PAffFormatError(RealFunError):
    pass


@dataclass(frozen=True)
class Piece:
    """The affine map ``x -> a*x + b`` (``x`` absolute, not shifted)."""

    a: Fraction
    b: Fraction

    def __call__(self, x) -> Fraction:
        return self.a * x + self.b

    @staticmethod
    def through(x0, y0, x1, y1) -> "Piece":
        a = (y1 - y0) / (x1 - x0)
        return Piece(a, y0 - a * x0)


@dataclass(frozen=True)
class PAff:
    breakpoints: tuple
    pieces: tuple
    values: tuple

    def __post_init__(self):
        bp = tuple(rat(b) for b in self.breakpoints)
        pieces = tuple(p if isinstance(p, Piece) else Piece(rat(p[0]), rat(p[1])) for p in self.pieces)
        vals = tuple(rat(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "values", vals)
        if len(bp) < 2 or bp[0] != 0 or bp[-1] != 1:
            raise PAffFormatError("breakpoints must start at 0 and end at 1")
        if any(x >= y for x, y in zip(bp, bp[1:])):
            raise PAffFormatError("breakpoints must be strictly increasing")
        if len(pieces) != len(bp) - 1:
            raise PAffFormatError("need one piece per open interval")
        if len(vals) != len(bp):
            raise PAffFormatError("need one value per breakpoint")

    # -- constructors

    @classmethod
    def constant(cls, v=0) -> "PAff":
        v = rat(v)
        return cls((0, 1), (Piece(Fraction(0), v),), (v, v))

    @classmethod
    def identity(cls) -> "PAff":
        return cls((0, 1), (Piece(Fraction(1), Fraction(0)),), (0, 1))

    @classmethod
    def linear(cls, a, b) -> "PAff":
        a, b = rat(a), rat(b)
        return cls((0, 1), (Piece(a, b),), (b, a + b))

    @classmethod
    def from_points(cls, xs: Sequence, ys: Sequence) -> "PAff":
        """Continuous interpolation through ``(xs[i], ys[i])``; ``xs`` spans [0,1]."""
        xs = [rat(x) for x in xs]
        ys = [rat(y) for y in ys]
        if len(xs) != len(ys) or any(a >= b for a, b in zip(xs, xs[1:])):
            raise PAffFormatError("need matching, strictly increasing points")
        pieces = [Piece.through(xs[i], ys[i], xs[i + 1], ys[i + 1]) for i in range(len(xs) - 1)]
        return cls(tuple(xs), tuple(pieces), tuple(ys))

    @classmethod
    def point_values(cls, points: dict, background=0) -> "PAff":
        """Constant ``background`` except at finitely many points."""
        background = rat(background)
        pts = {rat(k): rat(v) for k, v in points.items()}
        bp = sorted(set(pts) | {Fraction(0), Fraction(1)})
        vals = [pts.get(b, background) for b in bp]
        return cls(tuple(bp), tuple(Piece(Fraction(0), background) for _ in bp[1:]), tuple(vals))

    @classmethod
    def indicator_points(cls, points: Iterable) -> "PAff":
        return cls.point_values({p: 1 for p in points})

    @classmethod
    def step(cls, at, left, mid, right) -> "PAff":
        """``left`` on [0,at), ``mid`` at ``at``, ``right`` on (at,1]."""
        at, left, mid, right = rat(at), rat(left), rat(mid), rat(right)
        if not 0 < at < 1:
            raise PAffFormatError("step must be interior")
        return cls(
            (0, at, 1),
            (Piece(Fraction(0), left), Piece(Fraction(0), right)),
            (left, mid, right),
        )

    # -- access

    @property
    def m(self) -> int:
        return len(self.pieces)

    def locate(self, x) -> tuple:
        """``("bp", i)`` when ``x`` is breakpoint ``i``, else ``("piece", i)``."""
        x = rat(x)
        if x < 0 or x > 1:
            raise RealFunError(f"{x} is outside [0,1]")
        i = bisect.bisect_left(self.breakpoints, x)
        if i < len(self.breakpoints) and self.breakpoints[i] == x:
            return ("bp", i)
        return ("piece", i - 1)

    def __call__(self, x) -> Fraction:
        kind, i = self.locate(x)
        if kind == "bp":
            return self.values[i]
        return self.pieces[i](rat(x))

    def left_limit(self, i: int) -> Optional[Fraction]:
        """``f(b_i-)``, ``None`` at ``b_0``."""
        return None if i == 0 else self.pieces[i - 1](self.breakpoints[i])

    def right_limit(self, i: int) -> Optional[Fraction]:
        """``f(b_i+)``, ``None`` at ``b_m``."""
        return None if i == self.m else self.pieces[i](self.breakpoints[i])

    def limits_at(self, x) -> tuple:
        """``(f(x-), f(x+), f(x))``; a missing side at 0 or 1 is ``None``."""
        x = rat(x)
        kind, i = self.locate(x)
        if kind == "piece":
            v = self.pieces[i](x)
            return (v, v, v)
        return (self.left_limit(i), self.right_limit(i), self.values[i])

    def piece_range(self, i: int) -> tuple:
        """Limits of piece ``i`` at its left and right ends."""
        p = self.pieces[i]
        return p(self.breakpoints[i]), p(self.breakpoints[i + 1])

    # -- structure

    def refine(self, points: Iterable) -> "PAff":
        """Same function with extra breakpoints."""
        extra = sorted({rat(p) for p in points} - set(self.breakpoints))
        if not extra:
            return self
        bp = sorted(set(self.breakpoints) | set(extra))
        pieces = []
        vals = []
        for x in bp:
            vals.append(self(x))
        for lo, hi in zip(bp, bp[1:]):
            _, j = self.locate((lo + hi) / 2)
            pieces.append(self.pieces[j])
        return PAff(tuple(bp), tuple(pieces), tuple(vals))

    def simplify(self) -> "PAff":
        """Drop breakpoints where the function is affine across."""
        bp = [self.breakpoints[0]]
        pieces = []
        vals = [self.values[0]]
        for i in range(1, self.m + 1):
            last = i == self.m
            if not last and self.pieces[i - 1] == self.pieces[i] and self.values[i] == self.pieces[i](self.breakpoints[i]):
                continue
            pieces.append(self.pieces[i - 1])
            bp.append(self.breakpoints[i])
            vals.append(self.values[i])
        return PAff(tuple(bp), tuple(pieces), tuple(vals))

    def _combine(self, other: "PAff", op) -> "PAff":
        bp = sorted(set(self.breakpoints) | set(other.breakpoints))
        f, g = self.refine(bp), other.refine(bp)
        pieces = tuple(op(p, q) for p, q in zip(f.pieces, g.pieces))
        vals = tuple(op(Piece(0, v), Piece(0, w)).b for v, w in zip(f.values, g.values))
        return PAff(tuple(bp), pieces, vals)

    def __add__(self, other: "PAff") -> "PAff":
        return self._combine(other, lambda p, q: Piece(p.a + q.a, p.b + q.b))

    def __sub__(self, other: "PAff") -> "PAff":
        return self._combine(other, lambda p, q: Piece(p.a - q.a, p.b - q.b))

    def scale(self, c) -> "PAff":
        c = rat(c)
        return PAff(self.breakpoints, tuple(Piece(c * p.a, c * p.b) for p in self.pieces), tuple(c * v for v in self.values))

    def __neg__(self) -> "PAff":
        return self.scale(-1)

    def abs(self) -> "PAff":
        """``|f|``, splitting pieces at their zeros."""
        cuts = []
        for i, p in enumerate(self.pieces):
            if p.a != 0:
                z = -p.b / p.a
                if self.breakpoints[i] < z < self.breakpoints[i + 1]:
                    cuts.append(z)
        f = self.refine(cuts)
        pieces = []
        for i, p in enumerate(f.pieces):
            mid = (f.breakpoints[i] + f.breakpoints[i + 1]) / 2
            pieces.append(p if p(mid) >= 0 else Piece(-p.a, -p.b))
        return PAff(f.breakpoints, tuple(pieces), tuple(abs(v) for v in f.values))

    def compose_affine_pieces(self) -> list:
        return list(zip(self.breakpoints, self.breakpoints[1:], self.pieces))

    def discontinuities(self) -> list:
        """Breakpoints where ``f`` is not continuous, in increasing order."""
        out = []
        for i, b in enumerate(self.breakpoints):
            lft, rgt, v = self.left_limit(i), self.right_limit(i), self.values[i]
            sides = [s for s in (lft, rgt) if s is not None]
            if any(s != v for s in sides):
                out.append(b)
        return out

    def is_continuous(self) -> bool:
        return not self.discontinuities()

    def is_nondecreasing(self) -> bool:
        for i in range(self.m + 1):
            lft, rgt, v = self.left_limit(i), self.right_limit(i), self.values[i]
            if lft is not None and lft > v:
                return False
            if rgt is not None and v > rgt:
                return False
        return all(p.a >= 0 for p in self.pieces)

    def is_strictly_increasing(self) -> bool:
        return self.is_nondecreasing() and all(p.a > 0 for p in self.pieces)

    # -- serialisation

    def to_json(self) -> str:
        obj = {
            "breakpoints": [str(b) for b in self.breakpoints],
            "pieces": [{"a": str(p.a), "b": str(p.b)} for p in self.pieces],
            "values": [str(v) for v in self.values],
        }
        return json.dumps(obj, separators=(", ", ": "))

    @classmethod
    def from_json(cls, text: str) -> "PAff":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise PAffFormatError(f"not JSON: {e}") from None
        if not isinstance(obj, dict) or set(obj) != {"breakpoints", "pieces", "values"}:
            raise PAffFormatError("expected keys breakpoints, pieces, values")
        try:
            pieces = tuple(Piece(_strict_rat(p["a"]), _strict_rat(p["b"])) for p in obj["pieces"])
            return cls(
                tuple(_strict_rat(b) for b in obj["breakpoints"]),
                pieces,
                tuple(_strict_rat(v) for v in obj["values"]),
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            raise PAffFormatError(f"bad function file: {e}") from None


def _strict_rat(s) -> Fraction:
    if not isinstance(s, str):
        raise PAffFormatError(f"rationals must be strings, got {s!r}")
    if "." in s or "e" in s.lower():
        raise PAffFormatError(f"rational must be p/q, got {s!r}")
    return Fraction(s)
