import pytest

from mukleene.approx import (
    OMEGA,
    LimitStageUnsupported,
    NoStabilization,
    approx_eval,
    approx_sweep,
    limstar,
    stabilization_stage,
)
from mukleene.corpus import corpus, program, standard_registry
from mukleene.semantics import BOTTOM, FuelBudget, OracleContractError, OracleSpec, Registry, evaluate
from mukleene.terms import Arrow, N, apply, parse_term, suc_chain
from mukleene.trees import build_tree


def add(a, b):
    return apply(program("add"), suc_chain(a), suc_chain(b))


def test_limstar():
    seq = lambda b: 10 + b
    assert limstar(seq, 0) == 0
    assert limstar(seq, 1) == 10
    assert limstar(seq, 5) == 14


def test_limstar_rejects_limit_and_negative_stages():
    with pytest.raises(LimitStageUnsupported):
        limstar(lambda b: b, OMEGA)
    with pytest.raises(ValueError):
        limstar(lambda b: b, -1)
    with pytest.raises(LimitStageUnsupported):
        approx_eval(parse_term("0"), alpha=OMEGA)


def test_stage_zero_is_zero():
    assert approx_eval(parse_term("(suc (suc 0))"), alpha=0) == 0
    assert approx_eval(add(2, 3), alpha=0) == 0


def test_successor_stages():
    assert approx_sweep(parse_term("(suc 0)"), max_stage=3) == [0, 1, 1, 1]
    assert approx_eval(parse_term("(suc 0)"), alpha=2) == 1


def test_zero_stabilises_at_one():
    assert stabilization_stage(parse_term("0")) == 1


def test_add_sweep():
    # frozen: the value appears exactly at the rank of the tree, 20
    vals = approx_sweep(add(2, 3), max_stage=22)
    assert vals[:11] == [0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2]
    assert vals[19] != 5
    assert vals[20:] == [5, 5, 5]
    assert stabilization_stage(add(2, 3)) == build_tree(add(2, 3)).rank == 20


def test_memo_matches_plain():
    t = add(1, 2)
    for a in range(0, 16):
        assert approx_eval(t, alpha=a, memo=True) == approx_eval(t, alpha=a)


def test_loop_never_stabilises():
    with pytest.raises(NoStabilization):
        stabilization_stage(parse_term("(mu (x : N) x)"), max_stage=30, fuel=FuelBudget(steps=500))


def test_loop_stages_are_still_naturals():
    # the unfolding and the successor each cost one stage
    vals = approx_sweep(parse_term("(mu (x : N) (suc x))"), max_stage=8)
    assert vals == [0, 0, 1, 1, 2, 2, 3, 3, 4]


def test_partial_oracle_rejected():
    reg = Registry([OracleSpec("b", Arrow((Arrow((N,)),)), lambda f: BOTTOM, total=False)])
    t = parse_term("(#b (lam (n : N) n))", reg.signatures())
    with pytest.raises(OracleContractError):
        approx_eval(t, reg, 3)


def test_oracle_programs_stabilise_by_rank():
    reg = standard_registry()
    src = "(#mu2 (lam (n : N) (case n (suc 0) (case (pred n) (suc 0) 0))))"
    t = parse_term(src, reg.signatures())
    r = build_tree(t, reg).rank
    vals = approx_sweep(t, reg, r + 3)
    assert vals[r:] == [2] * 4


def test_corpus_values_from_rank_on():
    for t, reg in corpus(40, seed=9):
        v = evaluate(t, reg).n
        r = build_tree(t, reg).rank
        assert approx_sweep(t, reg, r + 2)[r:] == [v] * 3
