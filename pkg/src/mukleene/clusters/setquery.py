"""Oracle access to subsets of [0,1].

Realisers never look at the underlying set. They build derived sets with the
methods below (intersections with intervals, filters, affine copies) and ask
the finiteness functionals about them. Each answer is logged, so a run can be
replayed against its own log.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from ..realfun import Interval, RSet, rat


class ClusterError(Exception):
    pass


class PreconditionViolated(ClusterError):
    pass


class PrecisionExhausted(ClusterError):
    pass


class EmptySet(ClusterError):
    pass


class OracleInconsistent(ClusterError):
    pass


class ReplayMismatch(ClusterError):
    pass


class _Sentinel:
    """The reserved answer for the empty set; never equal to a real."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "EMPTY"

    def __str__(self):
        return "empty"


SENTINEL = _Sentinel()


@dataclass(frozen=True)
class Enclosure:
    """A closed rational interval known to contain a point."""

    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        return self.lo <= rat(x) <= self.hi

    def as_pair(self) -> list:
        return [str(self.lo), str(self.hi)]


class _Truth:
    """Hidden ground truth: a rational RSet, possibly with a finite filter."""

    __slots__ = ("rset",)

    def __init__(self, rset: RSet):
        if not rset.rational:
            raise ClusterError("set oracles need a rational ground truth")
        self.rset = rset

    def key(self) -> str:
        return self.rset.to_json()


class SetQuery:
    """Interval-query interface to a set ``X`` of reals in [0,1].

    ``cardinality`` is optional metadata: ``"finite"`` (promise only),
    ``"exact"`` (|X| may be read), an ``int`` upper bound, or ``None``.
    ``count_slack`` makes ``count_ge`` overshoot by a deterministic amount
    that depends on the set alone, as an extensional functional must.
    """

    def __init__(self, rset: RSet, cardinality=None, count_slack: int = 0, log: Optional[list] = None, name: str = "X"):
        self._truth = _Truth(rset)
        self.cardinality = cardinality
        self.count_slack = count_slack
        self.log = [] if log is None else log
        self.name = name
        self.replay: Optional[list] = None

    def _derive(self, rset: RSet, name: str) -> "SetQuery":
        q = SetQuery(rset, self.cardinality, self.count_slack, self.log, name)
        q.replay = self.replay
        return q

    # ---- derived sets

    def restrict(self, lo, hi, lo_closed: bool = True, hi_closed: bool = True) -> "SetQuery":
        iv = Interval(rat(lo), rat(hi), lo_closed, hi_closed)
        part = RSet([iv]) if not iv.empty() else RSet()
        label = f"{self.name}&{iv}"
        return self._derive(self._truth.rset.intersection(part), label)

    def filter(self, pred: Callable[[Fraction], bool], label: str = "filter") -> "SetQuery":
        """``{x in X : pred(x)}``; ``X`` must be finite."""
        rs = self._truth.rset
        if not rs.is_finite():
            raise PreconditionViolated(f"{self.name} is not finite")
        return self._derive(RSet.finite([x for x in rs.points if pred(x)]), f"{self.name}|{label}")

    def affine_copies(self, k: int) -> "SetQuery":
        """``Y`` with one rescaled copy of ``X`` in each ``[i/k, (i+1)/k]``."""
        rs = self._truth.rset
        pieces = []
        points = []
        for i in range(k):
            lo, w = Fraction(i, k), Fraction(1, k)
            for iv in rs.intervals:
                pieces.append(Interval(lo + w * iv.lo, lo + w * iv.hi, iv.lo_closed, iv.hi_closed))
            points.extend(lo + w * p for p in rs.points)
        return self._derive(RSet(pieces, points), f"copies{k}({self.name})")

    # ---- functionals

    def _answer(self, op: str, compute):
        if self.replay is not None:
            if not self.replay:
                raise ReplayMismatch(f"{op}({self.name}) was not recorded")
            got_op, got_name, ans = self.replay.pop(0)
            if (got_op, got_name) != (op, self.name):
                raise ReplayMismatch(f"expected {got_op}({got_name}), got {op}({self.name})")
        else:
            ans = compute()
        self.log.append((op, self.name, ans))
        return ans

    def omega_b(self) -> int:
        """1 when ``X`` is nonempty, else 0."""
        return self._answer("omega_b", lambda: 0 if self._truth.rset.is_empty() else 1)

    def omega(self):
        """The element of ``X`` when ``|X| <= 1``; the sentinel for the empty set."""

        def go():
            rs = self._truth.rset
            if rs.is_empty():
                return SENTINEL
            if rs.intervals or len(rs.points) > 1:
                raise PreconditionViolated(f"{self.name} has more than one element")
            return rs.points[0]

        return self._answer("omega", go)

    def count(self) -> int:
        """``|X|`` for finite ``X``."""

        def go():
            rs = self._truth.rset
            if not rs.is_finite():
                raise PreconditionViolated(f"{self.name} is not finite")
            return len(rs.points)

        return self._answer("count", go)

    def count_ge(self) -> int:
        """Some ``n >= |X|`` for finite ``X``."""

        def go():
            rs = self._truth.rset
            if not rs.is_finite():
                raise PreconditionViolated(f"{self.name} is not finite")
            extra = 0
            if self.count_slack:
                digest = hashlib.sha256(self._truth.key().encode()).digest()
                extra = digest[0] % (self.count_slack + 1)
            return len(rs.points) + extra

        return self._answer("count_ge", go)

    def contains(self, x) -> bool:
        """Membership, the first-order fact available through ``exists^2``."""
        return self._answer("member", lambda: rat(x) in self._truth.rset)


def replaying(q: SetQuery, log: list) -> SetQuery:
    """A copy of ``q`` that answers from ``log`` instead of the ground truth."""
    r = SetQuery(q._truth.rset, q.cardinality, q.count_slack, [], q.name)
    r.replay = list(log)
    return r
