import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mukleene.minidomains import TermShape, enumerate_terms, random_term
from mukleene.terms import (
    App,
    Arrow,
    CASE,
    GodelCode,
    Lam,
    Mu,
    N,
    OracleRef,
    RankViolation,
    SUC,
    TermSyntaxError,
    TypeAnnotationMissing,
    TypeMismatch,
    Var,
    ZERO,
    alpha_equal,
    apply,
    godel_decode,
    godel_encode,
    godel_number,
    line_col,
    parse_term,
    parse_type,
    print_term,
    rank,
    substitute,
    term_size,
    typecheck,
)

T1 = Arrow((N,))
T2 = Arrow((T1,))
T3 = Arrow((T2,))
ADD = "(mu (add : (-> N N N)) (lam (x : N) (lam (y : N) (case y x (suc (add x (pred y)))))))"
SHAPE = TermShape(binder_types=(N, T1, T2), oracles=(OracleRef("f", T1), OracleRef("F", T2)))


def random_closed(seed, size=9, ty=N):
    return random_term(random.Random(seed), size, ty, SHAPE)


seeds = st.integers(0, 2**32)


def test_rank_of_types():
    assert rank(N) == 0
    assert rank(T1) == 1
    assert rank(T2) == 2
    assert rank(Arrow((T1, N))) == 2
    assert rank(T3) == 3


def test_parse_small_terms():
    assert parse_term("(suc 0)") == App(SUC, ZERO)
    t = parse_term("(case 0 (suc 0) 0)")
    assert t == apply(CASE, ZERO, App(SUC, ZERO), ZERO)
    assert typecheck(t) == N


def test_parse_mu_term_types_as_function():
    t = parse_term("(mu (f : (-> N N)) (lam (n : N) (case n 0 (suc (f (pred n))))))")
    assert isinstance(t, Mu)
    assert typecheck(t) == T1


def test_parse_type_syntax():
    assert parse_type("N") == N
    assert parse_type("(-> (-> N N) N)") == T2
    with pytest.raises(TermSyntaxError):
        parse_type("(-> N)")


def test_syntax_errors_carry_positions():
    with pytest.raises(TermSyntaxError) as e:
        parse_term("(suc 0")
    assert e.value.position == 6
    with pytest.raises(TermSyntaxError):
        parse_term("(suc 0) 0")
    with pytest.raises(TermSyntaxError):
        parse_term("(lam (0 : N) 0)")


def test_binders_need_annotations():
    with pytest.raises(TypeAnnotationMissing):
        parse_term("(lam (x) x)")
    with pytest.raises(TypeAnnotationMissing):
        parse_term("(suc y)")
    with pytest.raises(TypeAnnotationMissing):
        parse_term("(#g 0)")


def test_comments_are_skipped():
    assert parse_term("; the number one\n(suc ; inline\n 0)") == App(SUC, ZERO)


def test_typecheck_rejects_ill_typed_applications():
    with pytest.raises(TypeMismatch):
        parse_term("(0 0)")
    with pytest.raises(TypeMismatch):
        parse_term("(suc suc)")
    with pytest.raises(TypeMismatch):
        typecheck(Mu("x", T1, ZERO))


def test_rank_four_abstraction_is_rejected():
    # a lambda over a rank-3 binder makes a rank-4 arrow
    src = "(lam (G : (-> (-> (-> N N) N) N)) 0)"
    with pytest.raises(RankViolation) as e:
        parse_term(src)
    assert e.value.rank == 4
    assert e.value.position == 6


def test_rank_violation_location_on_later_line():
    src = "(lam (x : N)\n  (lam (G : (-> (-> (-> N N) N) N)) x))"
    with pytest.raises(RankViolation) as e:
        parse_term(src)
    assert line_col(src, e.value.position) == (2, 9)


def test_mu_over_rank_four_rejected():
    ty = Arrow((T3,))
    with pytest.raises(RankViolation):
        typecheck(Mu("x", ty, Var("x", ty)))


def test_substitution_basics():
    x = Var("x", N)
    assert substitute(x, "x", ZERO) == ZERO
    ident = Lam("x", N, x)
    assert substitute(ident, "x", ZERO) == ident


def test_mu_unfolding_by_substitution():
    t = parse_term(ADD)
    unfolded = substitute(t.body, t.var, t)
    assert typecheck(unfolded) == typecheck(t)
    assert print_term(unfolded).count("(mu (add") == 1


def test_substitution_avoids_capture():
    # (lam (y : N) x)[x/y] must not bind the substituted y
    body = Lam("y", N, Var("x", N))
    out = substitute(body, "x", Var("y", N))
    assert isinstance(out, Lam) and out.var != "y"
    assert out.body == Var("y", N)


def test_substitution_type_check():
    with pytest.raises(TypeMismatch):
        substitute(Var("x", N), "x", SUC, N)


def test_encoding_of_zero_is_fixed():
    assert godel_encode(ZERO).data == b"\x00\x00"
    # the number reads the bytes after a leading 1
    assert godel_number(ZERO) == 0x10000


def test_alpha_invariance():
    a = parse_term("(lam (x : N) x)")
    b = parse_term("(lam (y : N) y)")
    assert godel_encode(a) == godel_encode(b)
    assert alpha_equal(a, b)
    assert not alpha_equal(a, parse_term("(lam (y : N) 0)"))


def test_add_round_trip():
    t = parse_term(ADD)
    assert alpha_equal(godel_decode(godel_encode(t)), t)


def test_bad_codes_rejected():
    from mukleene.terms import DecodeError

    with pytest.raises(DecodeError):
        godel_decode(GodelCode(b"\x00\xff"))
    with pytest.raises(DecodeError):
        godel_decode(GodelCode(b"\x00\x00\x00"))


def test_size_counts_concrete_nodes():
    assert term_size(ZERO) == 1
    assert term_size(parse_term("(suc 0)")) == 2
    assert term_size(parse_term("(case 0 0 0)")) == 4


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_print_parse_round_trip(seed):
    t = random_closed(seed)
    sigs = {"f": T1, "F": T2}
    back = parse_term(print_term(t), sigs)
    assert back == t
    assert typecheck(back) == typecheck(t)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_decode_encode_identity(seed):
    t = random_closed(seed)
    code = godel_encode(t)
    back = godel_decode(code)
    assert alpha_equal(back, t)
    assert godel_encode(back) == code


@settings(max_examples=200, deadline=None)
@given(seeds, seeds)
def test_substitution_preserves_types(seed, seed2):
    # open body: a closed function applied to a free variable
    f = random_closed(seed, 6, T1)
    t = App(f, Var("z", N))
    s = random_closed(seed2, 6, N)
    assert typecheck(substitute(t, "z", s, N)) == typecheck(t, {"z": N}) == N


def test_encoding_is_injective_on_many_terms():
    ts = list(enumerate_terms(7))
    rng = random.Random(3)
    ts += [random_closed(rng.randrange(2**32), 10) for _ in range(2000)]
    codes = {godel_encode(t).data for t in ts}
    numbers = {godel_number(t) for t in ts}
    distinct = {print_term(godel_decode(godel_encode(t))) for t in ts}
    assert len(ts) >= 10**4
    assert len(codes) == len(numbers) == len(distinct)
