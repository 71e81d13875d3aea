import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mukleene.clusters import (
    SENTINEL,
    BadBound,
    BadVariation,
    DuplicatePoint,
    EmptySet,
    InconsistentOrder,
    InjectivityViolated,
    MissingPreimage,
    NotDisjoint,
    NotSingular,
    NotUSC,
    PreconditionViolated,
    SetQuery,
    ac_diagnostics,
    baire1_approx,
    banach_to_enum,
    cacc_max,
    cacc_sup,
    discontinuity_enum,
    distance_functional,
    enumeration_functional,
    fsigma_export,
    jordan_decompose,
    omega_bw,
    omega_family,
    omega_star,
    omega_wo,
    prime_injection,
    pseudo_monotone_index,
    restricted_variation,
    rm_code,
    sierpinski_decompose,
    south_test,
    staircase_from_enum,
    tietze,
    urysohn,
    usc_max,
)
from mukleene.clusters.report import Inputs, replay_report, run_realiser
from mukleene.corpus import random_paff
from mukleene.realfun import PAff, RSet, classify_point, supremum, variation

from oracles import brute_pseudo_monotone, point_eval, refinement

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)
QUARTER = Fraction(1, 4)


def finite(*pts, **kw):
    return SetQuery(RSet.finite(pts), **kw)


def spike():
    return PAff.indicator_points([HALF])


def tent():
    return PAff.from_points([0, HALF, 1], [0, HALF, 0])


def rational_sets(max_size=8):
    fracs = st.builds(Fraction, st.integers(0, 40), st.just(40))
    return st.lists(fracs, max_size=max_size, unique=True)


def paffs(continuous=False):
    return st.integers(0, 2**32).map(lambda s: random_paff(random.Random(s), continuous))


# ---- the finiteness functionals


def test_omega_b_of_empty_set():
    assert omega_family(SetQuery(RSet.empty()), "b") == 0
    assert omega_family(finite(HALF), "b") == 1


@pytest.mark.parametrize("variant", ["omega_bits", "omega_exti"])
def test_singleton_enclosed(variant):
    e = omega_family(finite(HALF, cardinality="finite"), variant, 30)
    assert e.width <= Fraction(1, 2**30)
    assert e.contains(HALF)


def test_singleton_promise_checked():
    with pytest.raises(PreconditionViolated):
        omega_family(finite(THIRD, 2 * THIRD), "omega_bits", 10)
    with pytest.raises(PreconditionViolated):
        omega_family(SetQuery(RSet.empty()), "omega1")


def test_counts_and_lists():
    X = finite(THIRD, 2 * THIRD, cardinality="exact")
    assert omega_family(X, "count") == 2
    assert [e.lo for e in omega_family(X, "fin")] == [THIRD, 2 * THIRD]
    assert omega_family(X, "count_ge") >= 2
    with pytest.raises(PreconditionViolated):
        omega_family(X, "n", n=3)
    with pytest.raises(PreconditionViolated):
        omega_family(X, "le_n", n=1)


def test_omega_star_examples():
    assert omega_star(SetQuery(RSet.empty(), cardinality="finite")) is SENTINEL
    assert omega_star(finite(2 * THIRD, THIRD, cardinality="finite")) == THIRD


def test_omega_wo_examples():
    X = RSet.finite([QUARTER, HALF, 3 * QUARTER])
    later = lambda a, b: a > b
    assert omega_wo(X, X, later) == 3 * QUARTER
    assert omega_wo(X, [], later) is SENTINEL
    with pytest.raises(InconsistentOrder):
        omega_wo(X, X, lambda a, b: a != b)


@settings(max_examples=60, deadline=None)
@given(rational_sets(), st.integers(0, 4))
def test_omega_reductions_sound(pts, slack):
    X = SetQuery(RSet.finite(pts), cardinality="finite", count_slack=slack)
    got = [e.lo for e in omega_family(X, "fin")]
    assert got == sorted(pts)
    assert omega_family(X, "count_ge") >= len(pts)
    least = omega_star(X)
    assert least is SENTINEL if not pts else least == min(pts)
    for x in pts:
        one = SetQuery(RSet.finite([x]), cardinality="finite", count_slack=slack)
        for variant in ("omega_bits", "omega_exti"):
            e = omega_family(one, variant, 16)
            assert e.contains(x) and e.width <= Fraction(1, 2**16)


@settings(max_examples=40, deadline=None)
@given(rational_sets(6), st.randoms(use_true_random=False))
def test_omega_wo_matches_argmin(pts, rnd):
    if not pts:
        return
    X = RSet.finite(pts)
    rank = {x: i for i, x in enumerate(rnd.sample(pts, len(pts)))}
    B = [x for x in pts if rnd.random() < 0.6]
    got = omega_wo(X, B, lambda a, b: rank[a] < rank[b])
    assert got is SENTINEL if not B else got == min(B, key=rank.get)


# ---- Jordan and friends


def test_jordan_monotone_input():
    f = PAff.from_points([0, HALF, 1], [1, 2, 4])
    J = jordan_decompose(f)
    assert all(point_eval(J.g, x) == point_eval(f, x) - 1 for x in refinement(f, Fraction(1, 64)))
    assert set(J.h.values) == {-1}


def test_jordan_spike():
    J = jordan_decompose(spike())
    assert J.g.values == (0, 1, 2)
    assert [p.b for p in J.g.pieces] == [0, 2]
    assert J.h.values == (0, 0, 2)


def test_jordan_bounds():
    with pytest.raises(BadBound):
        jordan_decompose(spike(), "intermediate", 1)
    assert jordan_decompose(spike(), "intermediate", 5).g == jordan_decompose(spike()).g
    with pytest.raises(BadVariation):
        jordan_decompose(spike(), "weak", 3)
    assert jordan_decompose(spike(), "weak", 2).g == jordan_decompose(spike()).g


@settings(max_examples=80, deadline=None)
@given(paffs(), st.lists(st.integers(0, 97), min_size=2, max_size=2, unique=True))
def test_jordan_invariants(f, cd):
    J = jordan_decompose(f)
    assert J.g.is_nondecreasing() and J.h.is_nondecreasing()
    for x in refinement(f, Fraction(1, 2**20)):
        assert point_eval(J.g, x) - point_eval(J.h, x) == point_eval(f, x)
    c, d = sorted(Fraction(k, 97) for k in cd)
    assert variation(f, c, d) == point_eval(J.g, d) - point_eval(J.g, c)


def test_restricted_variation_examples():
    assert restricted_variation(tent(), [0, 1]) == 0
    assert restricted_variation(tent(), tent().breakpoints) == variation(tent())
    assert restricted_variation(spike(), [0, QUARTER, 1]) == 0


def test_discontinuity_examples():
    assert discontinuity_enum(tent()).is_null
    d = discontinuity_enum(spike())
    assert d.xs() == [HALF] and d.removable() == [HALF]
    assert len(fsigma_export(spike())) == 1


def test_staircase_examples():
    s = staircase_from_enum([THIRD, 2 * THIRD], 2)
    assert (s(0), s(HALF), s(1)) == (0, 1, Fraction(3, 2))
    assert set(staircase_from_enum([]).values) == {0}
    with pytest.raises(DuplicatePoint):
        staircase_from_enum([THIRD, THIRD])


def test_staircase_jump_classes():
    xs = [Fraction(k + 1, 8) for k in range(6)]
    d = discontinuity_enum(staircase_from_enum(xs))
    for k in range(8):
        assert d.jump_class(k) == [x for n, x in enumerate(xs) if Fraction(1, 2**n) > Fraction(1, 2**k)]
    for n, x in enumerate(xs):
        assert classify_point(staircase_from_enum(xs), x).jump


def test_sierpinski_step():
    f = PAff.step(HALF, 0, 1, 1)
    g, h = sierpinski_decompose(f)
    assert g.is_continuous() and h.is_strictly_increasing()
    for k in range(101):
        x = Fraction(k, 100)
        assert point_eval(g, point_eval(h, x)) == point_eval(f, x)


def test_sierpinski_continuous_input():
    g, h = sierpinski_decompose(tent())
    assert h.simplify() == PAff.identity()
    assert g.simplify() == tent().simplify()


@settings(max_examples=60, deadline=None)
@given(paffs())
def test_sierpinski_property(f):
    g, h = sierpinski_decompose(f)
    assert g.is_continuous()
    assert h.is_strictly_increasing()
    for x in refinement(f, Fraction(1, 2**20)):
        assert point_eval(g, point_eval(h, x)) == point_eval(f, x)


def test_baire1():
    assert baire1_approx(tent(), 3) == tent()
    for n in range(1, 6):
        fn = baire1_approx(spike(), n)
        assert fn.is_continuous()
        assert fn(HALF) == 1
        assert fn(HALF + Fraction(1, 2**n)) == 0 and fn(HALF - Fraction(1, 2**n)) == 0


def test_usc_max():
    assert usc_max(spike()) == HALF
    assert usc_max(PAff.identity()) == 1
    with pytest.raises(NotUSC):
        usc_max(PAff.step(HALF, 0, 0, 1))


def test_prime_injection_levels():
    # jumps of 1 at 1/3 and 1/4 at 2/3; levels use a strict threshold
    f = PAff((0, THIRD, 2 * THIRD, 1), ((0, 0), (0, 1), (0, Fraction(5, 4))), (0, 1, Fraction(5, 4), Fraction(5, 4)))
    Y = prime_injection(f)
    assert Y.details[THIRD]["n"] == 1 and Y.details[2 * THIRD]["n"] == 3
    assert Y(THIRD) % 2 == 0 and Y(THIRD) // 2 % 2 == 1
    assert Y(2 * THIRD) % 8 == 0 and Y(2 * THIRD) // 8 % 2 == 1
    assert Y(THIRD) != Y(2 * THIRD)
    assert Y(HALF) == 0


def test_prime_injection_continuous():
    assert prime_injection(tent()).table == {}


@settings(max_examples=60, deadline=None)
@given(paffs())
def test_prime_injection_injective(f):
    Y = prime_injection(f)
    xs = discontinuity_enum(f).xs()
    vals = [Y(x) for x in xs]
    assert all(v > 0 for v in vals)
    assert len(set(vals)) == len(vals)


def test_ac_examples():
    v = ac_diagnostics(spike(), "ftc")
    assert not v.holds and v.witness == (HALF,) and v.gap == 1
    assert ac_diagnostics(tent(), "ftc").holds
    v = ac_diagnostics(spike(), "variation_integral")
    assert not v.holds and v.gap == 2
    assert ac_diagnostics(spike(), "singular_witness").gap == 1
    with pytest.raises(NotSingular):
        ac_diagnostics(PAff.identity(), "singular_witness")
    assert ac_diagnostics(PAff.identity(), "lusin").holds
    assert ac_diagnostics(PAff.identity(), "lipschitz").holds


def test_pseudo_monotone_examples():
    assert pseudo_monotone_index(PAff.identity()) == 1
    assert pseudo_monotone_index(tent()) == 2
    assert pseudo_monotone_index(PAff.indicator_points([THIRD, 2 * THIRD])) == 3


@settings(max_examples=40, deadline=None)
@given(rational_sets(5))
def test_pseudo_monotone_brute(pts):
    pts = [p for p in pts if 0 < p < 1]
    f = PAff.indicator_points(pts)
    assert pseudo_monotone_index(f) == brute_pseudo_monotone(f)


# ---- countable sets


def test_enumeration_examples():
    A = RSet.finite([THIRD, 2 * THIRD])
    Y = {THIRD: 5, 2 * THIRD: 2}
    assert sorted(enumeration_functional(A, Y.get)) == [THIRD, 2 * THIRD]
    A3 = RSet.finite([QUARTER, HALF, 3 * QUARTER])
    Y3 = {QUARTER: 2, HALF: 0, 3 * QUARTER: 1}
    assert enumeration_functional(A3, Y3.get, "weak") == [HALF, 3 * QUARTER, QUARTER]
    with pytest.raises(InjectivityViolated):
        enumeration_functional(A, lambda x: 1)
    with pytest.raises(MissingPreimage):
        enumeration_functional(A3, {QUARTER: 3, HALF: 0, 3 * QUARTER: 1}.get, "weak")


def test_sup_and_distance():
    A = RSet.finite([QUARTER, 3 * QUARTER])
    Y = {QUARTER: 0, 3 * QUARTER: 1}
    assert omega_bw(A, Y.get) == 3 * QUARTER
    assert distance_functional(0, A, Y.get) == 3 * QUARTER
    with pytest.raises(EmptySet):
        omega_bw(RSet.empty(), Y.get)


def test_south_test_and_banach():
    A = RSet.finite([HALF])
    assert south_test(A, lambda x: 0, 0, 0)
    assert not south_test(A, lambda x: 0, 1, 0)
    (n, e), = banach_to_enum(A, lambda x: 0)
    assert n == 0 and e.contains(HALF)
    A2 = RSet.finite([QUARTER, 3 * QUARTER])
    Y = {QUARTER: 0, 3 * QUARTER: 1}
    got = banach_to_enum(A2, Y.get)
    assert [n for n, _ in got] == [0, 1]
    assert got[0][1].contains(QUARTER) and got[1][1].contains(3 * QUARTER)


# ---- Caccioppoli sets


def test_caccioppoli_examples():
    C = RSet.closed_interval(0, QUARTER).union(RSet.finite([HALF]))
    assert cacc_sup(C) == HALF
    code = rm_code(C)
    assert [(iv.lo, iv.hi) for iv in code] == [(QUARTER, HALF), (HALF, 1)]
    u = urysohn(RSet.closed_interval(0, QUARTER), RSet.closed_interval(HALF, 1))
    assert u(Fraction(3, 8)) == HALF
    g = tietze(PAff.constant(1), C)
    assert supremum(g)[0] == 1
    assert cacc_max(PAff.identity(), C) == HALF
    with pytest.raises(NotDisjoint):
        urysohn(RSet.closed_interval(0, HALF), RSet.closed_interval(HALF, 1))
    with pytest.raises(EmptySet):
        cacc_sup(RSet.empty())


# ---- reports


@pytest.mark.parametrize("name", ["omega_bits", "omega_fin", "omega_star", "omega_exti"])
def test_reports_replay(name):
    inp = Inputs(sets=(RSet.finite([THIRD]),), precision=12)
    rep = run_realiser(name, inp)
    assert rep.witness["queries"]
    assert replay_report(rep, inp)
    assert run_realiser(name, inp).serialise() == rep.serialise()


def test_report_is_exact_json():
    rep = run_realiser("jordan", Inputs(f=spike()))
    text = rep.serialise()
    assert "." not in text.replace(".fn", "")
    assert '"realiser": "jordan"' in text
