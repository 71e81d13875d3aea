"""Exact semantics over a finite base {0, ..., m-1} plus bottom.

Functionals are explicit tables indexed by the total argument tuples, in the
order produced by :func:`domain`. ``None`` stands for bottom.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Mapping, Optional, Sequence

from .terms import (
    App,
    Arrow,
    CaseC,
    FiniteType,
    Ground,
    Lam,
    Mu,
    N,
    OracleRef,
    Param,
    PredC,
    SucC,
    Term,
    TypeMismatch,
    Var,
    ZeroC,
    curry,
    rank,
    result_after,
    spine,
    term_size,
)

MAX_BASE = 4
MAX_TERM_SIZE = 12
MAX_ENUMERATION = 10**6


class MiniError(Exception):
    pass


class CapExceeded(MiniError):
    pass


class EnumerationTooLarge(MiniError):
    def __init__(self, count):
        super().__init__(f"enumeration of {count} elements exceeds the cap of {MAX_ENUMERATION}")
        self.count = count


class NonMonotoneDetected(MiniError):
    def __init__(self, witness):
        super().__init__(f"non-monotone map, witness {witness}")
        self.witness = witness


def check_base(m: int) -> None:
    if not 1 <= m <= MAX_BASE:
        raise CapExceeded(f"base {m} outside 1..{MAX_BASE}")


# ---------------------------------------------------------------- tables


@dataclass(frozen=True)
class FinFunc:
    type: Arrow
    base: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(domain(self.type, self.base)):
            raise MiniError("table size does not match the domain")

    # total FinFuncs are used as inputs of handles and table keys
    @property
    def finkey(self):
        return self

    @property
    def label(self):
        return "tbl[" + ",".join("_" if v is None else str(v) for v in self.values) + "]"

    def __repr__(self):
        return self.label

    def is_total(self) -> bool:
        return all(v is not None for v in self.values)

    def lookup(self, xs: tuple):
        return self.values[domain_index(self.type, self.base)[xs]]

    def __call__(self, *xs):
        v = self.lookup(tuple(xs))
        if v is None:
            from .semantics import BOTTOM

            return BOTTOM
        return v

    def apply1(self, x):
        """Supply the first argument; ``x`` must be total."""
        if len(self.type.args) == 1:
            return self.lookup((x,))
        rest = Arrow(self.type.args[1:])
        vals = tuple(self.lookup((x,) + r) for r in domain(rest, self.base))
        return FinFunc(rest, self.base, vals)

    def apply_handles(self, args):
        key = []
        for a, ty in zip(args, self.type.args):
            if isinstance(ty, Ground):
                key.append(a)
            else:
                key.append(tabulate_callable(a, ty, self.base))
        return self.lookup(tuple(key))


def bottom_of(ty: FiniteType, base: int):
    if isinstance(ty, Ground):
        return None
    return FinFunc(ty, base, (None,) * len(domain(ty, base)))


def is_total(v) -> bool:
    if v is None:
        return False
    if isinstance(v, int):
        return True
    return v.is_total()


def leq(a, b) -> bool:
    """Extension order: ``a`` is below ``b``."""
    if a is None:
        return True
    if isinstance(a, int):
        return a == b
    return all(x is None or x == y for x, y in zip(a.values, b.values))


def tabulate_callable(fn, ty: Arrow, base: int) -> FinFunc:
    """Read a total functional off a callable by querying every input."""
    from .semantics import BOTTOM

    if isinstance(fn, FinFunc):
        return fn
    table = getattr(fn, "table", None)
    vals = []
    for xs in domain(ty, base):
        if table is not None:
            v = table[tuple(x if isinstance(x, int) else x for x in xs)]
        else:
            v = fn(*xs)
        vals.append(None if v is BOTTOM else v)
    return FinFunc(ty, base, tuple(vals))


def as_finfunc(ty: FiniteType, table) -> FinFunc:
    """Build a table from a sequence in domain order or a mapping."""
    if isinstance(ty, Ground):
        raise TypeMismatch("ground values are plain naturals")
    if isinstance(table, Mapping):
        base = _guess_base(ty, table)
        dom = domain(ty, base)
        vals = tuple(table.get(x if len(x) > 1 else x, table.get(x[0]) if len(x) == 1 else None) for x in dom)
        return FinFunc(ty, base, vals)
    table = tuple(table)
    for base in range(1, MAX_BASE + 1):
        if len(domain(ty, base)) == len(table):
            return FinFunc(ty, base, table)
    raise MiniError(f"no base fits a table of length {len(table)} at type {ty}")


def _guess_base(ty, table):
    for base in range(1, MAX_BASE + 1):
        keys = set(domain(ty, base))
        if all((k if isinstance(k, tuple) else (k,)) in keys for k in table):
            return base
    raise MiniError("cannot infer base from table keys")


# ---------------------------------------------------------------- enumeration


def _count_total(ty: FiniteType, m: int) -> int:
    if isinstance(ty, Ground):
        return m
    d = 1
    for a in ty.args:
        d *= _count_total(a, m)
        if d > MAX_ENUMERATION:
            raise EnumerationTooLarge(d)
    return m ** d


def count_functionals(ty: FiniteType, base: int, partial: bool = False) -> int:
    check_base(base)
    if isinstance(ty, Ground):
        return base + (1 if partial else 0)
    d = 1
    for a in ty.args:
        d *= _count_total(a, base)
        if d > MAX_ENUMERATION:
            raise EnumerationTooLarge(d)
    k = base + (1 if partial else 0)
    if d * math.log2(max(k, 2)) > 64:
        raise EnumerationTooLarge(k ** d)
    return k ** d


@lru_cache(maxsize=None)
def total_elements(ty: FiniteType, base: int) -> tuple:
    check_base(base)
    if isinstance(ty, Ground):
        return tuple(range(base))
    n = count_functionals(ty, base)
    if n > MAX_ENUMERATION:
        raise EnumerationTooLarge(n)
    size = len(domain(ty, base))
    return tuple(FinFunc(ty, base, vals) for vals in itertools.product(range(base), repeat=size))


@lru_cache(maxsize=None)
def domain(ty: Arrow, base: int) -> tuple:
    """Total argument tuples, first argument varying slowest."""
    return tuple(itertools.product(*(total_elements(a, base) for a in ty.args)))


@lru_cache(maxsize=None)
def domain_index(ty: Arrow, base: int) -> dict:
    return {xs: i for i, xs in enumerate(domain(ty, base))}


def enumerate_functionals(ty: FiniteType, base: int, partial: bool = False) -> list:
    n = count_functionals(ty, base, partial)
    if n > MAX_ENUMERATION:
        raise EnumerationTooLarge(n)
    if isinstance(ty, Ground):
        return list(range(base)) + ([None] if partial else [])
    if not partial:
        return list(total_elements(ty, base))
    choices = list(range(base)) + [None]
    size = len(domain(ty, base))
    return [FinFunc(ty, base, vals) for vals in itertools.product(choices, repeat=size)]


def extension_pairs(ty: FiniteType, base: int) -> Iterator[tuple]:
    """All pairs ``a <= b`` of partial functionals of ``ty``."""
    if isinstance(ty, Ground):
        for a in [None] + list(range(base)):
            for b in range(base) if a is None else [a]:
                yield a, b
            if a is None:
                yield None, None
        return
    size = len(domain(ty, base))
    per_entry = [(None, None)] + [(None, v) for v in range(base)] + [(v, v) for v in range(base)]
    if len(per_entry) ** size > MAX_ENUMERATION:
        raise EnumerationTooLarge(len(per_entry) ** size)
    for combo in itertools.product(per_entry, repeat=size):
        yield FinFunc(ty, base, tuple(c[0] for c in combo)), FinFunc(ty, base, tuple(c[1] for c in combo))


def height(ty: FiniteType, base: int) -> int:
    """Length of the longest strictly increasing chain in P(ty)."""
    if isinstance(ty, Ground):
        return 2
    return len(domain(ty, base)) + 1


# ---------------------------------------------------------------- denotations


def denote_finite(t: Term, assignment: Optional[Mapping[str, object]] = None, base: int = 2, max_size: int = MAX_TERM_SIZE):
    """Denotation of ``t`` with variables and oracles read from ``assignment``.

    Oracles are looked up under ``"#name"``. Application yields bottom
    (everywhere) unless the argument denotes a total element; ``case`` with
    all three arguments present evaluates only the selected branch.
    """
    check_base(base)
    if term_size(t) > max_size:
        raise CapExceeded(f"term size {term_size(t)} exceeds {max_size}")
    env = dict(assignment or {})
    types = {k: _type_of_value(v) for k, v in env.items()}
    return _Denoter(base).den(t, env, types)


def _type_of_value(v):
    if isinstance(v, FinFunc):
        return v.type
    return N


class _Denoter:
    def __init__(self, base):
        self.m = base

    def type_of(self, t, types):
        from .terms import typecheck

        return typecheck(t, {k: v for k, v in types.items() if not k.startswith("#")})

    def den(self, t, env, types):
        m = self.m
        head, args = spine(t)
        if isinstance(head, CaseC) and len(args) == 3:
            z = self.den(args[0], env, types)
            if z is None:
                return None
            return self.den(args[1] if z == 0 else args[2], env, types)
        if isinstance(head, (SucC, PredC)) and len(args) == 1:
            z = self.den(args[0], env, types)
            if z is None:
                return None
            return min(z + 1, m - 1) if isinstance(head, SucC) else max(z - 1, 0)
        if isinstance(t, App):
            f = self.den(t.fun, env, types)
            a = self.den(t.arg, env, types)
            if not is_total(a):
                return bottom_of(result_after(f.type), m)
            return f.apply1(a)
        if isinstance(t, ZeroC):
            return 0
        if isinstance(t, SucC):
            return FinFunc(Arrow((N,)), m, tuple(min(i + 1, m - 1) for i in range(m)))
        if isinstance(t, PredC):
            return FinFunc(Arrow((N,)), m, tuple(max(i - 1, 0) for i in range(m)))
        if isinstance(t, CaseC):
            ty = Arrow((N, N, N))
            return FinFunc(ty, m, tuple(x if z == 0 else y for z, x, y in domain(ty, m)))
        if isinstance(t, Var):
            if t.name not in env:
                raise MiniError(f"unassigned variable {t.name}")
            return env[t.name]
        if isinstance(t, OracleRef):
            key = "#" + t.name
            if key not in env:
                raise MiniError(f"unassigned oracle #{t.name}")
            return env[key]
        if isinstance(t, Param):
            if isinstance(t.type, Ground):
                return min(t.value, m - 1)
            return tabulate_callable(t.value, t.type, m)
        if isinstance(t, Lam):
            inner_types = dict(types)
            inner_types[t.var] = t.vtype
            body_ty = self.type_of(t.body, inner_types)
            ty = curry(t.vtype, body_ty)
            vals = []
            for phi in total_elements(t.vtype, m):
                inner = dict(env)
                inner[t.var] = phi
                v = self.den(t.body, inner, inner_types)
                if isinstance(body_ty, Ground):
                    vals.append(v)
                else:
                    vals.extend(v.values)
            return FinFunc(ty, m, tuple(vals))
        if isinstance(t, Mu):
            inner_types = dict(types)
            inner_types[t.var] = t.vtype
            cur = bottom_of(t.vtype, m)
            for _ in range(height(t.vtype, m) + 1):
                inner = dict(env)
                inner[t.var] = cur
                nxt = self.den(t.body, inner, inner_types)
                if nxt == cur:
                    return cur
                if not leq(cur, nxt):
                    raise NonMonotoneDetected((cur, nxt))
                cur = nxt
            raise NonMonotoneDetected(("no fixed point within the lattice height", cur))
        raise MiniError(f"cannot denote {t!r}")


def lfp_iterate(F: Callable, ty: FiniteType, base: int, check: bool = True):
    """Least fixed point of ``F`` on P(ty) by iteration from bottom.

    With ``check`` the map is audited on all extension pairs when there are
    at most 10^4 of them, and along the iteration chain otherwise.
    """
    check_base(base)
    if check:
        pairs_count = 3 if isinstance(ty, Ground) else (2 * base + 1) ** len(domain(ty, base))
        if pairs_count <= 10**4:
            for a, b in extension_pairs(ty, base):
                fa, fb = F(a), F(b)
                if not leq(fa, fb):
                    raise NonMonotoneDetected((a, b))
    cur = bottom_of(ty, base)
    for _ in range(height(ty, base) + 1):
        nxt = F(cur)
        if nxt == cur:
            return cur
        if not leq(cur, nxt):
            raise NonMonotoneDetected((cur, nxt))
        cur = nxt
    raise NonMonotoneDetected(("iteration did not stabilise", cur))


@dataclass(frozen=True)
class MonotoneReport:
    monotone: bool
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.monotone


def check_monotone(f: Callable, ty: FiniteType, base: int, domain_pred: Optional[Callable] = None) -> MonotoneReport:
    """Scan all pairs ``x <= y`` in P(ty) for ``f(x) not<= f(y)``.

    ``f`` maps partial functionals to a value (``None`` is bottom).
    ``domain_pred`` restricts the scan to pairs whose upper element is in
    the intended domain of ``f``.
    """
    for x, y in extension_pairs(ty, base):
        if domain_pred is not None and not domain_pred(y):
            continue
        if not leq(f(x), f(y)):
            return MonotoneReport(False, (x, y))
    return MonotoneReport(True)


# ---------------------------------------------------------------- term enumeration


@dataclass(frozen=True)
class TermShape:
    binder_types: tuple = (N, Arrow((N,)))
    oracles: tuple = ()
    mu: bool = True


def enumerate_terms(max_size: int, ty: FiniteType = N, shape: TermShape = TermShape()) -> Iterator[Term]:
    """Closed terms of type ``ty`` with concrete size at most ``max_size``.

    Bound variables are named by depth (``x0``, ``x1``, ...), so every alpha
    class appears once. Primitive operators appear only fully applied.
    """
    if max_size > MAX_TERM_SIZE:
        raise CapExceeded(f"size {max_size} exceeds {MAX_TERM_SIZE}")
    if max_size < 1:
        return
    gen = _Enumerator(shape)
    for size in range(1, max_size):
        yield from gen.exact(size, ty, ())
    # the largest level is streamed rather than cached
    yield from gen._gen(max_size, ty, ())


class _Enumerator:
    def __init__(self, shape: TermShape):
        self.shape = shape
        self.cache: dict = {}
        types = set([N])
        for b in shape.binder_types:
            types.add(b)
            types.update(_arg_types(b))
        for o in shape.oracles:
            types.add(o.type)
            types.update(_arg_types(o.type))
        self.types = types

    def exact(self, size, ty, ctx):
        key = (size, ty, ctx)
        hit = self.cache.get(key)
        if hit is None:
            hit = tuple(self._gen(size, ty, ctx))
            self.cache[key] = hit
        return hit

    def _heads(self, ctx):
        # (term, type) atoms usable as heads or leaves
        out = []
        for i, vt in enumerate(ctx):
            out.append((Var(f"x{i}", vt), vt))
        for o in self.shape.oracles:
            out.append((o, o.type))
        return out

    def _gen(self, size, ty, ctx):
        if size == 1:
            if ty == N:
                yield ZeroC()
            for atom, at in self._heads(ctx):
                if at == ty:
                    yield atom
            return
        if ty == N:
            for sub in self.exact(size - 1, N, ctx):
                yield App(SucC(), sub)
                yield App(PredC(), sub)
            for a in range(1, size - 1):
                for b in range(1, size - 1 - a):
                    c = size - 1 - a - b
                    if c < 1:
                        continue
                    for ta in self.exact(a, N, ctx):
                        for tb in self.exact(b, N, ctx):
                            for tc in self.exact(c, N, ctx):
                                yield App(App(App(CaseC(), ta), tb), tc)
        else:
            vt = ty.args[0]
            if vt in self.shape.binder_types:
                rest = result_after(ty)
                for body in self.exact(size - 1, rest, ctx + (vt,)):
                    yield Lam(f"x{len(ctx)}", vt, body)
        if self.shape.mu and ty in self.shape.binder_types:
            for body in self.exact(size - 1, ty, ctx + (ty,)):
                yield Mu(f"x{len(ctx)}", ty, body)
        # applications: fun of type (sigma -> ty), arg of type sigma, one App node
        for sigma in sorted(self.types, key=str):
            fty = curry(sigma, ty)
            if rank(fty) > 3:
                continue
            for a in range(1, size - 1):
                b = size - 1 - a
                funs = self.exact(a, fty, ctx)
                if not funs:
                    continue
                args = self.exact(b, sigma, ctx)
                for f in funs:
                    if _is_partial_primitive(f):
                        continue
                    for x in args:
                        yield App(f, x)


def _arg_types(ty):
    out = []
    if isinstance(ty, Arrow):
        for i in range(len(ty.args)):
            out.append(ty.args[i])
            out.extend(_arg_types(ty.args[i]))
            if i:
                out.append(Arrow(ty.args[i:]))
    return out


def _is_partial_primitive(t):
    head, _ = spine(t)
    return isinstance(head, (SucC, PredC, CaseC))


@lru_cache(maxsize=4)
def _shared_enumerator(shape: TermShape) -> "_Enumerator":
    return _Enumerator(shape)


def random_term(rng: random.Random, max_size: int, ty: FiniteType = N, shape: TermShape = TermShape(), ctx: tuple = ()) -> Term:
    """A random closed term by uniform choice among enumerated ones of a random size."""
    gen = _shared_enumerator(shape)
    while True:
        size = rng.randint(1, max_size)
        pool = gen.exact(size, ty, ctx)
        if pool:
            return rng.choice(pool)


# ---------------------------------------------------------------- oracle audits


def replace_oracle(t: Term, name: str, s: Term) -> Term:
    """``t`` with every reference to ``#name`` replaced by the closed term ``s``."""
    if isinstance(t, OracleRef):
        return s if t.name == name else t
    if isinstance(t, App):
        return App(replace_oracle(t.fun, name, s), replace_oracle(t.arg, name, s))
    if isinstance(t, (Lam, Mu)):
        return type(t)(t.var, t.vtype, replace_oracle(t.body, name, s))
    return t


@dataclass
class AuditReport:
    terms: int = 0
    checks: int = 0
    counterexamples: list = None

    def __post_init__(self):
        if self.counterexamples is None:
            self.counterexamples = []

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def _eval_finite(t, name, phi, base, fuel, retry):
    from .semantics import Value, evaluate, table_oracle

    reg = [table_oracle(name, phi.type, phi)] if isinstance(phi, FinFunc) else []
    out = evaluate(t, reg, fuel, base=base, cycles=True, check=False)
    if not isinstance(out, Value) and retry is not None:
        out = evaluate(t, reg, retry, base=base, check=False)
    return out.n if isinstance(out, Value) else None


def audit_oracle_monotonicity(
    max_size: int,
    oracle_type: FiniteType,
    base: int = 2,
    substitutes: Sequence[Term] = (),
    name: str = "f",
    limit: int = 20,
) -> AuditReport:
    """Exhaustive extension-order audit for terms using one oracle ``#name``.

    For every closed type-0 term up to ``max_size`` nodes and every pair
    ``phi <= psi`` of partial functionals of ``oracle_type``:

    * the denotation with ``phi`` is below the one with ``psi``;
    * the evaluator's value with ``phi`` (if any) is also its value with ``psi``,
      and both agree with the denotations;
    * for each closed term ``s`` in ``substitutes`` with ``phi <= [[s]]``, a
      value obtained with ``phi`` survives replacing ``#name`` by ``s``.
    """
    from .semantics import FuelBudget

    check_base(base)
    small = FuelBudget(steps=200, depth=80)
    big = FuelBudget(steps=20_000, depth=2_000)
    shape = TermShape(oracles=(OracleRef(name, oracle_type),))
    partials = enumerate_functionals(oracle_type, base, partial=True)
    pairs = [(i, j) for i, a in enumerate(partials) for j, b in enumerate(partials) if leq(a, b)]
    dens = [denote_finite(s, base=base, max_size=10**6) for s in substitutes]
    below = [[i for i, a in enumerate(partials) if leq(a, d)] for d in dens]
    report = AuditReport()

    def fail(*what):
        if len(report.counterexamples) < limit:
            report.counterexamples.append(what)

    for t in enumerate_terms(max_size, N, shape):
        report.terms += 1
        d = [denote_finite(t, {"#" + name: phi}, base) for phi in partials]
        e = [_eval_finite(t, name, phi, base, small, big if d[i] is not None else None) for i, phi in enumerate(partials)]
        for i in range(len(partials)):
            report.checks += 1
            if e[i] is not None and e[i] != d[i] or d[i] is not None and e[i] is None:
                fail("agreement", t, partials[i], d[i], e[i])
        for i, j in pairs:
            report.checks += 1
            if not leq(d[i], d[j]):
                fail("denotation", t, partials[i], partials[j])
            if e[i] is not None and e[j] != e[i]:
                fail("evaluation", t, partials[i], partials[j])
        for s, dn, idx in zip(substitutes, dens, below):
            vals = {d[i] for i in idx if d[i] is not None}
            if not vals:
                continue
            u = replace_oracle(t, name, s)
            report.checks += 1
            ds = denote_finite(u, base=base, max_size=10**6)
            es = _eval_finite(u, name, None, base, big, None)
            if len(vals) > 1 or ds not in vals or es not in vals:
                fail("substitution", t, s, vals, ds, es)
    return report


@dataclass
class AgreementReport:
    terms: int = 0
    valued: int = 0
    retried: int = 0
    mismatches: list = None

    def __post_init__(self):
        if self.mismatches is None:
            self.mismatches = []

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check_term_agreement(t: Term, base: int, report: AgreementReport, limit: int = 20) -> None:
    """Compare the evaluator with the denotation on one closed type-0 term.

    A cheap run with cycle detection settles most terms; it is repeated with
    generous fuel whenever the denotation has a value or the cheap run was
    inconclusive.
    """
    from .semantics import FuelBudget, Value, evaluate

    small = FuelBudget(steps=100, depth=60)
    big = FuelBudget(steps=20_000, depth=2_000)
    report.terms += 1
    d = denote_finite(t, base=base)
    e = evaluate(t, None, small, base=base, cycles=True, check=False)
    if not isinstance(e, Value) and (d is not None or "cyclic" not in getattr(e, "reason", "")):
        report.retried += 1
        e = evaluate(t, None, big, base=base, check=False)
    if d is not None:
        report.valued += 1
    ok = (isinstance(e, Value) and e.n == d) or (d is None and not isinstance(e, Value))
    if not ok and len(report.mismatches) < limit:
        report.mismatches.append((t, d, e))


def check_agreement(max_size: int, base: int = 2, shape: TermShape = TermShape(), limit: int = 20) -> AgreementReport:
    """Exhaustive evaluator/denotation comparison over enumerated terms."""
    check_base(base)
    report = AgreementReport()
    for t in enumerate_terms(max_size, N, shape):
        check_term_agreement(t, base, report, limit)
    return report


def sample_agreement(count: int, max_size: int, base: int, seed: int = 0, shape: TermShape = TermShape()) -> AgreementReport:
    check_base(base)
    rng = random.Random(seed)
    report = AgreementReport()
    for _ in range(count):
        check_term_agreement(random_term(rng, max_size, N, shape), base, report)
    return report
