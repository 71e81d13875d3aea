"""Reference computations written independently of the package internals.

They only read the raw data of a function (breakpoints, piece coefficients,
point values) or a term's syntax, never the package's own algorithms.
"""

import math
from fractions import Fraction

from mukleene.terms import App, Lam, Mu


def raw(f):
    return list(f.breakpoints), [(p.a, p.b) for p in f.pieces], list(f.values)


def point_eval(f, x):
    """f(x) from the raw data by linear search."""
    bp, pieces, vals = raw(f)
    for i, b in enumerate(bp):
        if x == b:
            return vals[i]
    for i in range(len(pieces)):
        if bp[i] < x < bp[i + 1]:
            a, c = pieces[i]
            return a * x + c
    raise ValueError(x)


def partition_value(f, xs):
    return sum((abs(point_eval(f, b) - point_eval(f, a)) for a, b in zip(xs, xs[1:])), Fraction(0))


def refinement(f, eps):
    """Breakpoints, midpoints and the points at distance eps around each breakpoint."""
    bp = list(f.breakpoints)
    pts = set(bp)
    for a, b in zip(bp, bp[1:]):
        pts.add((a + b) / 2)
    for b in bp:
        for x in (b - eps, b + eps):
            if 0 <= x <= 1:
                pts.add(x)
    return sorted(pts)


def brute_variation(f):
    """Supremum of partition sums over breakpoint/midpoint refinements.

    For eps below every scale of the data, the partition sum S(eps) over
    the refinement is affine in eps, so its limit at 0 is 2 S(eps) - S(2 eps).
    """
    eps = Fraction(1, 2**64)
    s1 = partition_value(f, refinement(f, eps))
    s2 = partition_value(f, refinement(f, 2 * eps))
    return 2 * s1 - s2


def sqrt2_bounds(k):
    """Rationals lo <= sqrt(2) <= hi with hi - lo = 2^-k."""
    r = math.isqrt(2 * 4**k)
    return Fraction(r, 2**k), Fraction(r + 1, 2**k)


def interval_runs(member, xs):
    """Number of maximal runs of consecutive members along ``xs``."""
    runs, prev = 0, False
    for x in xs:
        cur = member(x)
        if cur and not prev:
            runs += 1
        prev = cur
    return runs


def brute_pseudo_monotone(f):
    """Max component count of preimages over levels drawn around the values.

    Valid for step functions: on each open piece the function is constant,
    so breakpoints and midpoints see every component.
    """
    bp = list(f.breakpoints)
    xs = sorted(set(bp) | {(a + b) / 2 for a, b in zip(bp, bp[1:])})
    ys = sorted({point_eval(f, x) for x in xs})
    levels = set(ys)
    for a, b in zip(ys, ys[1:]):
        levels.add((a + b) / 2)
    levels |= {ys[0] - 1, ys[-1] + 1}
    levels = sorted(levels)
    best = 0
    for i, c in enumerate(levels):
        for d in levels[i:]:
            best = max(best, interval_runs(lambda x: c <= point_eval(f, x) <= d, xs))
    return best


def tree_height(node):
    """Longest chain of term-bearing nodes below ``node``, counted in nodes."""
    below = max((tree_height(c) for c in node.children), default=0)
    return below + (0 if node.kind == "i" else 1)


def term_nodes(t):
    if isinstance(t, App):
        return 1 + term_nodes(t.fun) + term_nodes(t.arg)
    if isinstance(t, (Lam, Mu)):
        return 1 + term_nodes(t.body)
    return 1
