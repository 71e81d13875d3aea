import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mukleene.corpus import corpus, program, standard_registry
from mukleene.minidomains import TermShape, random_term
from mukleene.semantics import (
    BOTTOM,
    Bottom,
    FuelBudget,
    FuelExhausted,
    Machine,
    OracleContractError,
    OracleSpec,
    Registry,
    UnboundOracle,
    Value,
    apply_oracle,
    builtin_mu2,
    constant_oracle,
    default_fuel,
    evaluate,
    exists2_oracle,
    mu2_oracle,
    omega_b_oracle,
    omega_oracle,
    run_machine,
    SearchExhausted,
    SeqFn,
)
from mukleene.terms import Arrow, Lam, N, OracleRef, Var, apply, parse_term, suc_chain

T1 = Arrow((N,))
T2 = Arrow((T1,))


def run(src, reg=None, **kw):
    reg = reg or Registry()
    return evaluate(parse_term(src, reg.signatures()), reg, **kw)


def is_seven():
    return Lam("n", N, apply(program("eq"), Var("n", N), suc_chain(7)))


def test_ground_primitives():
    assert run("0") == Value(0)
    assert run("(suc (suc 0))") == Value(2)
    assert run("(pred 0)") == Value(0)
    assert run("(pred (suc (suc 0)))") == Value(1)


def test_case_branches():
    assert run("(case 0 (suc 0) 0)") == Value(1)
    assert run("(case (suc (suc 0)) (suc 0) 0)") == Value(0)


def test_case_does_not_touch_untaken_branch():
    assert run("(case 0 (suc 0) (mu (x : N) x))", fuel=FuelBudget(steps=50)) == Value(1)
    assert run("(case (suc 0) (mu (x : N) x) 0)", fuel=FuelBudget(steps=50)) == Value(0)


def test_add():
    assert evaluate(apply(program("add"), suc_chain(2), suc_chain(3))) == Value(5)


@pytest.mark.parametrize("a,b", [(0, 0), (3, 0), (0, 4), (2, 5)])
def test_arithmetic_programs(a, b):
    assert evaluate(apply(program("add"), suc_chain(a), suc_chain(b))) == Value(a + b)
    assert evaluate(apply(program("mul"), suc_chain(a), suc_chain(b))) == Value(a * b)
    assert evaluate(apply(program("monus"), suc_chain(a), suc_chain(b))) == Value(max(a - b, 0))
    assert evaluate(apply(program("eq"), suc_chain(a), suc_chain(b))) == Value(0 if a == b else 1)


def test_plain_loop_runs_out_of_fuel():
    out = run("(mu (x : N) x)", fuel=FuelBudget(steps=500))
    assert isinstance(out, FuelExhausted)
    assert not isinstance(out, Bottom)


def test_fuel_env_var(monkeypatch):
    monkeypatch.setenv("MU_KLEENE_FUEL", "123")
    assert default_fuel().steps == 123
    monkeypatch.setenv("MU_KLEENE_FUEL", "lots")
    with pytest.raises(ValueError):
        default_fuel()


def test_nonpositive_fuel_rejected():
    with pytest.raises(ValueError):
        FuelBudget(steps=0)


def test_unbound_oracle():
    t = parse_term("(#nope 0)", {"nope": T1})
    with pytest.raises(UnboundOracle):
        evaluate(t)


def test_bottom_from_partial_oracle():
    reg = Registry([OracleSpec("b", T2, lambda f: BOTTOM, total=False)])
    assert isinstance(run("(#b (lam (n : N) n))", reg), Bottom)


def test_total_oracle_returning_bottom_is_a_contract_error():
    reg = Registry([OracleSpec("b", T2, lambda f: BOTTOM)])
    with pytest.raises(OracleContractError):
        run("(#b (lam (n : N) n))", reg)


def test_search_bound_beyond_fuel_rejected():
    reg = Registry([mu2_oracle("mu2", 500)])
    with pytest.raises(ValueError):
        run("(#mu2 (lam (n : N) n))", reg, fuel=FuelBudget(search_bound=100))


def test_exists2_on_seven():
    e = OracleRef("e", T2)
    assert evaluate(apply(e, is_seven()), Registry([exists2_oracle("e", 8)])) == Value(0)
    # the only zero sits at the bound itself
    assert isinstance(evaluate(apply(e, is_seven()), Registry([exists2_oracle("e", 7)])), FuelExhausted)


def test_mu2_finds_least_zero():
    log = []
    assert apply_oracle(mu2_oracle("m", 10), [lambda n: abs(n - 3)], log=log) == Value(3)
    assert [q[1] for q in log] == [(0,), (1,), (2,), (3,)]


def test_mu2_without_zero():
    log = []
    out = apply_oracle(mu2_oracle("m", 10), [lambda n: 1], log=log)
    assert isinstance(out, FuelExhausted)
    assert len(log) == 10
    with pytest.raises(SearchExhausted):
        builtin_mu2(lambda n: 1, 10)


def test_mu2_stops_after_first_query():
    log = []
    assert apply_oracle(mu2_oracle("m", 10), [lambda n: 0], log=log) == Value(0)
    assert len(log) == 1


def test_constant_oracle_ignores_bottom_argument():
    assert apply_oracle(constant_oracle("c", T2, 0), [lambda n: BOTTOM]) == Value(0)


def test_query_at_bottom_propagates():
    spec = OracleSpec("q", T2, lambda f: f(0), total=False)
    assert isinstance(apply_oracle(spec, [lambda n: BOTTOM]), Bottom)


def test_oracle_budget():
    spec = OracleSpec("q", T2, lambda f: f(0) + f(1) + f(2), budget=2)
    with pytest.raises(Exception, match="budget"):
        apply_oracle(spec, [lambda n: n])


def test_omega_b_small_sets():
    spec = omega_b_oracle()
    assert apply_oracle(spec, [lambda g: 0]) == Value(0)
    assert apply_oracle(spec, [lambda g: 1 if g == SeqFn((1, 0)) else 0]) == Value(1)
    assert isinstance(apply_oracle(spec, [lambda g: 1]), Bottom)


def test_omega_reads_the_single_member():
    spec = omega_oracle()
    member = SeqFn((0, 1))
    X = lambda g: 1 if g == member else 0
    assert apply_oracle(spec, [X, 1]) == Value(1)
    assert apply_oracle(spec, [X, 0]) == Value(0)
    assert apply_oracle(spec, [lambda g: 0, 1]) == Value(0)


SHAPE = TermShape(oracles=(OracleRef("mu2", T2), OracleRef("zero2", T2)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_fuel_monotone(seed):
    t = random_term(random.Random(seed), 9, shape=SHAPE)
    reg = standard_registry(20)
    small = evaluate(t, reg, FuelBudget(steps=300, search_bound=20))
    if isinstance(small, Value):
        assert evaluate(t, reg, FuelBudget(steps=600, search_bound=20)) == small


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_deterministic(seed):
    t = random_term(random.Random(seed), 9, shape=SHAPE)
    reg = standard_registry(20)
    fuel = FuelBudget(steps=2000, search_bound=20)
    assert evaluate(t, reg, fuel) == evaluate(t, reg, fuel)


def test_memo_agrees_with_plain():
    for t, reg in corpus(60, seed=5):
        assert evaluate(t, reg, memo=True) == evaluate(t, reg)


def test_step_count_stable():
    t = apply(program("add"), suc_chain(2), suc_chain(3))
    counts = set()
    for _ in range(3):
        m = Machine(Registry(), FuelBudget())
        assert run_machine(m, t) == Value(5)
        counts.add(m.steps)
    assert len(counts) == 1
