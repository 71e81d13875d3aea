import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mukleene.corpus import random_paff
from mukleene.realfun import (
    INDISTINGUISHABLE,
    LT,
    CReal,
    DegenerateInterval,
    PAff,
    PAffFormatError,
    RSet,
    arc_length,
    arc_length_enclosure,
    classify_point,
    creal_approx,
    creal_compare,
    envelopes,
    indicatrix,
    integrate,
    integrate_abs_derivative,
    integrate_arclen_density,
    partition_sum,
    side_limits,
    supremum,
    variation,
)

from oracles import brute_variation, partition_value, point_eval, refinement, sqrt2_bounds

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)


def tent():
    return PAff.from_points([0, HALF, 1], [0, HALF, 0])


def spike():
    return PAff.indicator_points([HALF])


def near(x, target, k):
    return abs(x - target) <= Fraction(1, 2**k)


def paffs(continuous=False):
    return st.integers(0, 2**32).map(lambda s: random_paff(random.Random(s), continuous))


def test_creal():
    third = CReal.from_rat(THIRD)
    assert abs(creal_approx(third, 5) - THIRD) < Fraction(1, 32)
    assert creal_compare(CReal.from_rat(HALF), CReal.from_rat(HALF), 30) == INDISTINGUISHABLE
    assert creal_compare(CReal.from_rat(Fraction(1, 10)), CReal.from_rat(Fraction(2, 10)), 10) == LT


def test_side_limits():
    assert side_limits(spike(), HALF) == (0, 0, 1)
    assert side_limits(PAff.identity(), THIRD) == (THIRD, THIRD, THIRD)


def test_variation_examples():
    assert variation(spike()) == 2
    assert variation(PAff.identity()) == 1
    assert variation(tent()) == 1
    assert variation(PAff.from_points([0, HALF, 1], [0, 1, 0])) == 2


def test_variation_degenerate():
    with pytest.raises(DegenerateInterval):
        variation(tent(), HALF, HALF)


def test_supremum_examples():
    assert supremum(tent())[0] == HALF
    assert supremum(tent())[1].attained == HALF
    v, where = supremum(PAff.indicator_points([THIRD]))
    assert (v, where.attained) == (1, THIRD)
    # x on [0,1) with f(1) = 0
    v, where = supremum(PAff((0, 1), ((1, 0),), (0, 0)))
    assert v == 1
    assert where.attained is None
    assert where.approached == (1, "left")


def test_integrals():
    assert integrate(PAff.identity()) == HALF
    assert integrate_abs_derivative(spike()) == 0
    lo, hi = sqrt2_bounds(20)
    got = integrate_arclen_density(PAff.identity(), p=20)
    assert lo - Fraction(1, 2**20) <= got <= hi + Fraction(1, 2**20)


def test_arc_length_examples():
    lo, hi = sqrt2_bounds(30)
    assert lo - Fraction(1, 2**20) <= arc_length(PAff.identity(), p=20) <= hi + Fraction(1, 2**20)
    assert near(arc_length(spike(), p=20), 3, 20)


def test_indicatrix_examples():
    ident = indicatrix(PAff.identity())
    assert ident.integral() == 1
    t = indicatrix(tent())
    assert t.levels == (0, HALF)
    assert t.gap_counts == (2,)
    assert t.level_counts == (2, 1)
    assert t.integral() == variation(tent())


def test_envelopes_examples():
    lo, hi = envelopes(spike())
    assert set(lo.values) == {0}
    assert hi.values == spike().values
    f = PAff.step(HALF, 0, HALF, 1)
    lo, hi = envelopes(f)
    assert (point_eval(lo, HALF), point_eval(hi, HALF)) == (0, 1)


def test_classify_examples():
    c = classify_point(spike(), HALF)
    assert c.removable and not c.quasi_continuous and c.upper_semicontinuous
    c = classify_point(PAff.identity(), THIRD)
    assert c.continuous and c.quasi_continuous and c.lower_semicontinuous and c.upper_semicontinuous
    assert not (c.removable or c.jump)
    c = classify_point(PAff.step(HALF, 0, 1, 1), HALF)
    assert c.jump and c.quasi_continuous and not c.removable


def test_from_points_rejects_repeats():
    with pytest.raises(PAffFormatError):
        PAff.from_points([0, HALF, HALF, 1], [0, 1, 1, 0])


def test_breakpoint_order_checked():
    with pytest.raises(PAffFormatError):
        PAff((0, HALF, THIRD, 1), ((0, 0),) * 3, (0, 0, 0, 0))


def test_json_round_trip():
    text = tent().to_json()
    assert text == '{"breakpoints": ["0", "1/2", "1"], "pieces": [{"a": "1", "b": "0"}, {"a": "-1", "b": "1"}], "values": ["0", "1/2", "0"]}'
    assert PAff.from_json(text) == tent()


def test_rset_basics():
    s = RSet.closed_interval(0, HALF)
    assert s.contains(HALF) and not s.contains(Fraction(3, 4))
    assert RSet.from_json(s.to_json()) == s
    assert not s.complement().contains(HALF)
    assert point_eval(s.indicator(), HALF) == 1
    assert len(RSet.finite([THIRD, 2 * THIRD]).components()) == 2


@settings(max_examples=150, deadline=None)
@given(paffs())
def test_variation_matches_brute_force(f):
    assert variation(f) == brute_variation(f)


@settings(max_examples=100, deadline=None)
@given(paffs(), st.integers(1, 99), st.integers(1, 99))
def test_variation_additive(f, i, j):
    if i == j:
        return
    b, c = sorted((Fraction(i, 100), Fraction(j, 100)))
    assert variation(f, 0, b) + variation(f, b, c) + variation(f, c, 1) == variation(f)


@settings(max_examples=100, deadline=None)
@given(paffs(), st.lists(st.integers(0, 60), min_size=2, max_size=8, unique=True))
def test_partition_sums_bounded(f, ks):
    xs = sorted(Fraction(k, 60) for k in ks)
    s = partition_sum(f, xs)
    assert s == partition_value(f, xs)
    assert s <= variation(f)


@settings(max_examples=80, deadline=None)
@given(paffs(continuous=True))
def test_indicatrix_identity(f):
    assert indicatrix(f).integral() == variation(f)


@settings(max_examples=80, deadline=None)
@given(paffs())
def test_envelope_sandwich(f):
    lo, hi = envelopes(f)
    for x in refinement(f, Fraction(1, 2**20)):
        assert point_eval(lo, x) <= point_eval(f, x) <= point_eval(hi, x)
    for b in f.breakpoints[1:-1]:
        assert classify_point(lo, b).lower_semicontinuous
        assert classify_point(hi, b).upper_semicontinuous


@settings(max_examples=60, deadline=None)
@given(paffs())
def test_arc_length_bounds(f):
    p = 20
    lo, hi = arc_length_enclosure(f, 0, 1, p)
    assert hi - lo <= Fraction(1, 2**p)
    v = variation(f)
    slack = Fraction(1, 2 ** (p - 1))
    assert v - slack <= lo and hi <= v + 1 + slack


@settings(max_examples=60, deadline=None)
@given(paffs())
def test_json_round_trip_random(f):
    assert PAff.from_json(f.to_json()) == f
