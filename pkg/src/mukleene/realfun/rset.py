"""Finite unions of rational intervals and points inside [0,1]."""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .creal import CReal, rat
from .paff import PAff, PAffFormatError, Piece, RealFunError


class RSetFormatError(RealFunError):
    pass


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", rat(self.lo))
        object.__setattr__(self, "hi", rat(self.hi))

    def contains(self, x) -> bool:
        x = rat(x)
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed))

    def __str__(self):
        return f"{'[' if self.lo_closed else '('}{self.lo}, {self.hi}{']' if self.hi_closed else ')'}"


def _normalize(parts: Iterable[Interval]) -> list:
    items = sorted((iv for iv in parts if not iv.empty()), key=lambda iv: (iv.lo, not iv.lo_closed))
    out: list = []
    for iv in items:
        if iv.lo < 0 or iv.hi > 1:
            raise RealFunError(f"{iv} is not inside [0,1]")
        if out:
            cur = out[-1]
            if iv.lo < cur.hi or (iv.lo == cur.hi and (cur.hi_closed or iv.lo_closed)):
                if iv.hi > cur.hi:
                    hi, hc = iv.hi, iv.hi_closed
                elif iv.hi == cur.hi:
                    hi, hc = cur.hi, cur.hi_closed or iv.hi_closed
                else:
                    hi, hc = cur.hi, cur.hi_closed
                out[-1] = Interval(cur.lo, hi, cur.lo_closed, hc)
                continue
        out.append(iv)
    return out


class RSet:
    """A subset of [0,1]: normalized intervals, isolated rational points and
    optionally finitely many points known only as Cauchy reals."""

    def __init__(self, intervals: Iterable = (), points: Iterable = (), creal_points: Iterable[CReal] = ()):
        parts = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals]
        parts += [Interval(p, p) for p in points]
        comps = _normalize(parts)
        self.intervals = tuple(c for c in comps if c.lo < c.hi)
        self.points = tuple(c.lo for c in comps if c.lo == c.hi)
        self.creal_points = tuple(creal_points)
        self._comps = comps
        self._los = [c.lo for c in comps]

    @classmethod
    def empty(cls) -> "RSet":
        return cls()

    @classmethod
    def finite(cls, points) -> "RSet":
        return cls(points=[rat(p) for p in points])

    @classmethod
    def closed_interval(cls, lo, hi) -> "RSet":
        return cls([Interval(lo, hi)])

    def components(self) -> list:
        return list(self._comps)

    def contains(self, x) -> bool:
        x = rat(x)
        k = bisect.bisect_right(self._los, x) - 1
        if k < 0:
            return False
        if self._comps[k].contains(x):
            return True
        # two components can share an endpoint only through an open side
        return k > 0 and self._comps[k - 1].contains(x)

    __contains__ = contains

    @property
    def rational(self) -> bool:
        return not self.creal_points

    def is_empty(self) -> bool:
        return not self._comps and not self.creal_points

    def is_finite(self) -> bool:
        return not self.intervals

    def is_closed(self) -> bool:
        return all(iv.lo_closed and iv.hi_closed for iv in self.intervals)

    def elements(self) -> list:
        if not self.is_finite():
            raise RealFunError("the set is not finite")
        return list(self.points)

    def complement(self) -> "RSet":
        if self.creal_points:
            raise RealFunError("complement needs a rational set")
        gaps = []
        cur, cur_closed = Fraction(0), True
        for c in self._comps:
            gaps.append(Interval(cur, c.lo, cur_closed, not c.lo_closed))
            cur, cur_closed = c.hi, not c.hi_closed
        gaps.append(Interval(cur, Fraction(1), cur_closed, True))
        return RSet(g for g in gaps if not g.empty())

    def union(self, other: "RSet") -> "RSet":
        return RSet(self._comps + other._comps, creal_points=self.creal_points + other.creal_points)

    def intersection(self, other: "RSet") -> "RSet":
        return self.complement().union(other.complement()).complement()

    def sup(self) -> Optional[Fraction]:
        return self._comps[-1].hi if self._comps else None

    def inf(self) -> Optional[Fraction]:
        return self._comps[0].lo if self._comps else None

    def indicator(self) -> PAff:
        """The characteristic function as a piecewise-affine function."""
        if self.creal_points:
            raise RealFunError("only rational sets have an exact characteristic function")
        bp = sorted({Fraction(0), Fraction(1)} | {c.lo for c in self._comps} | {c.hi for c in self._comps})
        vals = tuple(Fraction(int(self.contains(b))) for b in bp)
        pieces = tuple(Piece(Fraction(0), Fraction(int(self.contains((a + b) / 2)))) for a, b in zip(bp, bp[1:]))
        return PAff(tuple(bp), pieces, vals)

    def __eq__(self, other):
        return isinstance(other, RSet) and self._comps == other._comps and not self.creal_points and not other.creal_points

    def __hash__(self):
        return hash(tuple(self._comps))

    def __repr__(self):
        body = " u ".join(str(c) if c.lo < c.hi else f"{{{c.lo}}}" for c in self._comps) or "{}"
        return f"RSet({body})"

    def to_json(self) -> str:
        if self.creal_points:
            raise RealFunError("only rational sets serialise exactly")
        obj = {
            "intervals": [
                {"lo": str(iv.lo), "hi": str(iv.hi), "lo_closed": iv.lo_closed, "hi_closed": iv.hi_closed}
                for iv in self.intervals
            ],
            "points": [str(p) for p in self.points],
        }
        return json.dumps(obj, separators=(", ", ": "))

    @classmethod
    def from_json(cls, text: str) -> "RSet":
        try:
            obj = json.loads(text)
            if not isinstance(obj, dict) or not set(obj) <= {"intervals", "points"}:
                raise RSetFormatError("expected keys intervals, points")
            ivs = []
            for d in obj.get("intervals", []):
                ivs.append(Interval(_r(d["lo"]), _r(d["hi"]), bool(d.get("lo_closed", True)), bool(d.get("hi_closed", True))))
            return cls(ivs, [_r(p) for p in obj.get("points", [])])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, ZeroDivisionError, PAffFormatError) as e:
            raise RSetFormatError(f"bad set file: {e}") from None


def _r(s):
    if not isinstance(s, str) or "." in s:
        raise RSetFormatError(f"rationals must be p/q strings, got {s!r}")
    return Fraction(s)
