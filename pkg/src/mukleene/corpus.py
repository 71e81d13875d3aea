"""Sample programs, a reproducible corpus of terminating terms, and seeded
random piecewise-affine functions."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .minidomains import TermShape, random_term
from .realfun import PAff, Piece
from .semantics import (
    FuelBudget,
    Registry,
    Value,
    constant_oracle,
    evaluate,
    exists2_oracle,
    mu2_oracle,
    T2,
)
from .terms import Term, apply, parse_term, suc_chain

ADD = "(mu (add : (-> N N N)) (lam (x : N) (lam (y : N) (case y x (suc (add x (pred y)))))))"
MUL = (
    "(mu (mul : (-> N N N)) (lam (x : N) (lam (y : N) (case y 0 ("
    + ADD
    + " x (mul x (pred y)))))))"
)
DOUBLE = "(mu (d : (-> N N)) (lam (n : N) (case n 0 (suc (suc (d (pred n)))))))"
# truncated subtraction x - y
MONUS = "(mu (sub : (-> N N N)) (lam (x : N) (lam (y : N) (case y x (pred (sub x (pred y)))))))"
# 0 when x = y, 1 otherwise
EQ = (
    "(mu (eq : (-> N N N)) (lam (x : N) (lam (y : N) "
    "(case x (case y 0 (suc 0)) (case y (suc 0) (eq (pred x) (pred y)))))))"
)
# apply a function n times
ITER = "(mu (it : (-> (-> N N) N N N)) (lam (f : (-> N N)) (lam (n : N) (lam (a : N) (case n a (f (it f (pred n) a)))))))"

PROGRAMS = {
    "add": ADD,
    "mul": MUL,
    "double": DOUBLE,
    "monus": MONUS,
    "eq": EQ,
    "iter": ITER,
}


def program(name: str) -> Term:
    return parse_term(PROGRAMS[name])


def standard_registry(bound: int = 200) -> Registry:
    """``#mu2``, ``#exists2`` and a constant type-2 functional ``#zero2``."""
    return Registry([mu2_oracle("mu2", bound), exists2_oracle("exists2", bound), constant_oracle("zero2", T2, 0)])


def _programs_applied() -> list:
    out = []
    add, mul, dbl, sub, eq, it = (program(k) for k in ("add", "mul", "double", "monus", "eq", "iter"))
    for a in range(4):
        for b in range(4):
            out.append(apply(add, suc_chain(a), suc_chain(b)))
            out.append(apply(mul, suc_chain(a), suc_chain(b)))
            out.append(apply(sub, suc_chain(a + b), suc_chain(b)))
            out.append(apply(eq, suc_chain(a), suc_chain(b)))
    for n in range(5):
        out.append(apply(dbl, suc_chain(n)))
        out.append(apply(it, parse_term("(lam (k : N) (suc (suc k)))"), suc_chain(n), suc_chain(1)))
    return out


ORACLE_PROGRAMS = [
    # least n with n = 2, through mu2
    "(#mu2 (lam (n : N) (case n (suc 0) (case (pred n) (suc 0) (case (pred (pred n)) 0 (suc 0))))))",
    "(#exists2 (lam (n : N) (case n (suc 0) 0)))",
    "(#zero2 (lam (n : N) (suc n)))",
    "(suc (#mu2 (lam (n : N) (pred (pred n)))))",
    "(#mu2 (lam (n : N) (#exists2 (lam (m : N) (case m n 0)))))",
    "(case (#exists2 (lam (n : N) n)) (suc (suc 0)) 0)",
]


def corpus(count: int = 200, seed: int = 20240611, fuel: Optional[FuelBudget] = None, max_size: int = 9) -> list:
    """``count`` closed type-0 terms that terminate, with the registry they use.

    Returns ``[(term, registry)]``: the hand-written programs first, then
    random enumerated terms (with and without oracles) that reach a value.
    """
    fuel = fuel or FuelBudget(steps=20_000, depth=2_000)
    reg = standard_registry()
    empty = Registry()
    out = [(t, empty) for t in _programs_applied()]
    out += [(parse_term(src, reg.signatures()), reg) for src in ORACLE_PROGRAMS]
    rng = random.Random(seed)
    shapes = [
        (TermShape(), empty),
        (TermShape(oracles=tuple(_refs(reg))), reg),
    ]
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 200 * count:
            raise RuntimeError("could not find enough terminating terms")
        shape, r = shapes[attempts % 2]
        t = random_term(rng, max_size, shape=shape)
        if evaluate(t, r, fuel, cycles=True).__class__ is Value:
            out.append((t, r))
    return out[:count]


def _refs(reg: Registry):
    from .terms import OracleRef

    return [OracleRef(s.name, s.type) for s in reg]


# ---------------------------------------------------------------- functions


def _small_rat(rng: random.Random, lo: int = -3, hi: int = 3, den: int = 4) -> Fraction:
    q = rng.randint(1, den)
    return Fraction(rng.randint(lo * q, hi * q), q)


def random_breakpoints(rng: random.Random, max_inner: int = 5, den: int = 24) -> list:
    inner = set()
    for _ in range(rng.randint(0, max_inner)):
        inner.add(Fraction(rng.randint(1, den - 1), den))
    return [Fraction(0)] + sorted(inner) + [Fraction(1)]


def random_paff(rng: random.Random, continuous: bool = False, max_inner: int = 5) -> PAff:
    """A random piecewise-affine function with small rational data.

    Discontinuous functions mix jumps, removable points and points where the
    value sits on one side, so every point class shows up in a corpus.
    """
    bp = random_breakpoints(rng, max_inner)
    if continuous:
        return PAff.from_points(bp, [_small_rat(rng) for _ in bp])
    pieces = []
    for a, b in zip(bp, bp[1:]):
        if rng.random() < 0.2:
            v = _small_rat(rng)
            pieces.append(Piece(Fraction(0), v))
        else:
            pieces.append(Piece.through(a, _small_rat(rng), b, _small_rat(rng)))
    values = []
    for i, x in enumerate(bp):
        sides = []
        if i > 0:
            sides.append(pieces[i - 1](x))
        if i < len(pieces):
            sides.append(pieces[i](x))
        r = rng.random()
        values.append(rng.choice(sides) if r < 0.6 else _small_rat(rng))
    return PAff(tuple(bp), tuple(pieces), tuple(values))


def paff_corpus(count: int = 500, seed: int = 7, continuous: bool = False) -> list:
    """Seeded corpus; the first entries are fixed hand-picked functions."""
    rng = random.Random(seed)
    half = Fraction(1, 2)
    fixed = [
        PAff.identity(),
        PAff.from_points([0, half, 1], [0, half, 0]),
        PAff.constant(1),
    ]
    if not continuous:
        fixed += [
            PAff.indicator_points([half]),
            PAff.step(half, 0, 1, 1),
            PAff.step(half, 0, half, 1),
            PAff((0, 1), (Piece(Fraction(1), Fraction(0)),), (0, 0)),
        ]
    out = fixed[:count]
    while len(out) < count:
        out.append(random_paff(rng, continuous))
    return out
