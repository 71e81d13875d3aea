"""Fuel-bounded evaluation of closed type-0 terms against an oracle registry.

The machine reduces the head of the application spine:

* ``(case t a b)`` evaluates ``t`` and then exactly one branch;
* ``(lam (x : N) s) t ...`` evaluates ``t`` first (a ground argument without
  a value makes the application undefined) and substitutes the numeral;
* ``(lam (x : sigma) s) t ...`` with ``sigma`` a function type substitutes
  ``t`` unevaluated; over a finite base ``t`` is first run on every total
  input, which is the literal totality check;
* ``(mu (x : sigma) s) t ...`` unfolds once;
* ``#phi t ...`` evaluates ground arguments, hands function arguments to the
  callback as query handles and returns the callback's answer.
"""

from __future__ import annotations

import itertools
import os
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Union

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
    TermError,
    TypeMismatch,
    Var,
    ZeroC,
    apply,
    free_vars,
    rank,
    spine,
    substitute_closed,
    subterms,
    typecheck,
)

DEFAULT_STEPS = 200_000
FUEL_ENV = "MU_KLEENE_FUEL"


# ---------------------------------------------------------------- outcomes


@dataclass(frozen=True)
class Value:
    n: int

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True)
class Bottom:
    """Certified undefinedness: some oracle answered bottom."""

    reason: str = ""

    def __str__(self):
        return "bottom"


@dataclass(frozen=True)
class FuelExhausted:
    reason: str = ""

    def __str__(self):
        return "fuel-exhausted"


EvalOutcome = Union[Value, Bottom, FuelExhausted]


class _BottomToken:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "BOTTOM"


BOTTOM = _BottomToken()


class SemanticsError(Exception):
    pass


class UnboundOracle(SemanticsError):
    def __init__(self, name):
        super().__init__(f"oracle #{name} is not in the registry")
        self.name = name


class OracleContractError(SemanticsError):
    """An oracle broke its declared contract (e.g. a total one said bottom)."""


class OpenTerm(SemanticsError):
    pass


# Control-flow signals. They travel through handles and callbacks and are
# turned into outcomes at the top.


class Diverge(Exception):
    pass


class BottomSignal(Diverge):
    pass


class OutOfFuel(Diverge):
    pass


class OracleBudgetExhausted(OutOfFuel):
    pass


class SearchExhausted(OutOfFuel):
    """A bounded search found nothing; never read as a negative answer."""


# ---------------------------------------------------------------- fuel


@dataclass(frozen=True)
class FuelBudget:
    steps: int = DEFAULT_STEPS
    oracle_calls: int = 100_000
    search_bound: int = 100_000
    depth: int = 20_000

    def __post_init__(self):
        for name in ("steps", "oracle_calls", "search_bound", "depth"):
            if getattr(self, name) <= 0:
                raise ValueError(f"fuel limit {name} must be positive")

    def scaled(self, k: int) -> "FuelBudget":
        return FuelBudget(self.steps * k, self.oracle_calls * k, self.search_bound, self.depth * k)


def default_fuel() -> FuelBudget:
    raw = os.environ.get(FUEL_ENV)
    if raw:
        try:
            steps = int(raw)
        except ValueError:
            raise ValueError(f"{FUEL_ENV} must be an integer, got {raw!r}") from None
        return FuelBudget(steps=steps)
    return FuelBudget()


# ---------------------------------------------------------------- oracles


@dataclass
class OracleSpec:
    """A secondary constant.

    ``callback`` receives one argument per declared argument type: a natural
    for ground positions, a callable handle otherwise. It returns a natural
    or ``BOTTOM``.
    """

    name: str
    type: FiniteType
    callback: Callable
    total: bool = True
    budget: Optional[int] = None
    bound: Optional[int] = None
    description: str = ""
    # total reading used by the stage approximations (bounded searches
    # answer a default there instead of running out of fuel)
    approx_callback: Optional[Callable] = None

    def __post_init__(self):
        if rank(self.type) > 3:
            raise TypeMismatch(f"oracle #{self.name} has rank {rank(self.type)} > 3")


class Registry:
    def __init__(self, specs: Iterable[OracleSpec] = ()):
        self._specs: dict = {}
        for s in specs:
            self.add(s)

    def add(self, spec: OracleSpec) -> "Registry":
        self._specs[spec.name] = spec
        return self

    def get(self, name: str) -> OracleSpec:
        try:
            return self._specs[name]
        except KeyError:
            raise UnboundOracle(name) from None

    def __contains__(self, name):
        return name in self._specs

    def __iter__(self):
        return iter(self._specs.values())

    def signatures(self) -> dict:
        return {k: s.type for k, s in self._specs.items()}

    def all_total(self) -> bool:
        return all(s.total for s in self._specs.values())


def as_registry(oracles) -> Registry:
    if oracles is None:
        return Registry()
    if isinstance(oracles, Registry):
        return oracles
    if isinstance(oracles, Mapping):
        return Registry(oracles.values())
    return Registry(oracles)


# ---------------------------------------------------------------- deep stack

_local = threading.local()
_pool: Optional[ThreadPoolExecutor] = None
_pool_lock = threading.Lock()


def _in_worker(fn, args, kwargs):
    _local.deep = True
    try:
        return fn(*args, **kwargs)
    finally:
        _local.deep = False


def run_deep(fn, *args, **kwargs):
    """Run ``fn`` on a worker thread with a large stack.

    Evaluation recurses once per nested subterm; the worker keeps deep
    (but fuel-bounded) recursions away from the main thread's small stack.
    """
    global _pool
    if getattr(_local, "deep", False):
        return fn(*args, **kwargs)
    with _pool_lock:
        if _pool is None:
            sys.setrecursionlimit(max(sys.getrecursionlimit(), 150_000))
            old = threading.stack_size(768 * 1024 * 1024)
            try:
                _pool = ThreadPoolExecutor(max_workers=1, thread_name_prefix="mukleene-deep")
                _pool.submit(lambda: None).result()
            finally:
                threading.stack_size(old)
    return _pool.submit(_in_worker, fn, args, kwargs).result()


# ---------------------------------------------------------------- handles


class Handle:
    """Query interface for a function-typed oracle argument."""

    def __init__(self, machine, term: Term, type_: Arrow, position: int, label: str):
        self.machine = machine
        self.term = term
        self.type = type_
        self.position = position
        self.label = label
        self.live = True

    def __call__(self, *xs):
        if not self.live:
            raise OracleContractError("handle used after its oracle call returned")
        if len(xs) != len(self.type.args):
            raise OracleContractError(f"handle {self.label} expects {len(self.type.args)} arguments")
        params = [self.machine.to_param(x, ty, f"{self.label}.{i}") for i, (x, ty) in enumerate(zip(xs, self.type.args))]
        return self.machine.query(self, params)

    def __repr__(self):
        return f"<handle {self.label}>"


class TableHandle:
    """A function argument already evaluated on every total input."""

    def __init__(self, table: dict, type_: Arrow, label: str):
        self.table = table
        self.type = type_
        self.label = label

    def __call__(self, *xs):
        key = tuple(_input_key(x) for x in xs)
        try:
            return self.table[key]
        except KeyError:
            raise OracleContractError(f"query {key} outside the finite domain of {self.label}") from None

    def __repr__(self):
        return f"<table {self.label}>"


def _input_key(x):
    if isinstance(x, int):
        return x
    key = getattr(x, "finkey", None)
    if key is not None:
        return key
    return x


# ---------------------------------------------------------------- the machine


class Machine:
    """One evaluation: fuel counters, optional finite base, optional recorder."""

    def __init__(
        self,
        registry: Registry,
        fuel: FuelBudget,
        base: Optional[int] = None,
        recorder=None,
        memo: bool = False,
        cycles: bool = False,
    ):
        self.registry = registry
        self.fuel = fuel
        self.base = base
        self.rec = recorder
        self.steps = 0
        self.calls = 0
        self.depth = 0
        self.per_oracle: dict = {}
        self.queries: list = []
        self.memo: Optional[dict] = {} if memo and recorder is None else None
        # terms whose evaluation is in progress; meeting one again is a
        # certain infinite regress because the machine is deterministic
        self.active: Optional[set] = set() if cycles else None

    # -- bookkeeping

    def tick(self):
        self.steps += 1
        if self.steps > self.fuel.steps:
            raise OutOfFuel(f"step limit {self.fuel.steps}")

    def clamp(self, n: int) -> int:
        if self.base is not None and n >= self.base:
            return self.base - 1
        return n

    def to_param(self, x, ty, label):
        if isinstance(ty, Ground):
            if not isinstance(x, int) or x < 0:
                raise OracleContractError(f"{label}: expected a natural, got {x!r}")
            if self.base is not None and x >= self.base:
                raise OracleContractError(f"{label}: {x} outside base {self.base}")
            return Param(x)
        if rank(ty) > 1:
            raise OracleContractError(f"{label}: inputs of rank {rank(ty)} are not supported")
        if not callable(x):
            raise OracleContractError(f"{label}: expected a function, got {x!r}")
        return Param(x, ty, getattr(x, "label", None) or label)

    # -- evaluation

    def eval(self, t: Term) -> int:
        self.depth += 1
        if self.depth > self.fuel.depth:
            self.depth -= 1
            raise OutOfFuel(f"depth limit {self.fuel.depth}")
        try:
            if self.memo is not None:
                key = _memo_key(t)
                if key is not None:
                    hit = self.memo.get(key)
                    if hit is not None:
                        self.tick()
                        return hit
                    v = self._eval(t)
                    self.memo[key] = v
                    return v
            return self._eval(t)
        finally:
            self.depth -= 1

    def _eval(self, t: Term) -> int:
        rec = self.rec
        mark = rec.mark() if rec is not None else 0
        active = self.active
        entered = []
        try:
            while True:
                self.tick()
                if active is not None:
                    if t in active:
                        raise OutOfFuel("cyclic unfolding")
                    active.add(t)
                    entered.append(t)
                head, args = spine(t)
                if isinstance(head, CaseC) and len(args) == 3:
                    if rec is not None:
                        rec.push(t, "v")
                    z = self.eval(args[0])
                    t = args[1] if z == 0 else args[2]
                    continue
                if isinstance(head, Lam):
                    if not args:
                        raise TypeMismatch("evaluating an abstraction at ground type")
                    if rec is not None:
                        rec.push(t, "vii")
                    arg = args[0]
                    if isinstance(head.vtype, Ground):
                        s = Param(self.eval(arg))
                    else:
                        if self.base is not None:
                            self.tabulate(arg, head.vtype, "lam")
                        s = arg
                    t = apply(substitute_closed(head.body, head.var, s), *args[1:])
                    continue
                if isinstance(head, Mu):
                    if rec is not None:
                        rec.push(t, "viii")
                    t = apply(substitute_closed(head.body, head.var, head), *args)
                    continue
                result = self._leaf(t, head, args)
                if rec is not None:
                    rec.close(mark, result)
                return result
        except BaseException:
            if rec is not None:
                rec.abort(mark)
            raise
        finally:
            for e in entered:
                active.discard(e)

    def _leaf(self, t, head, args) -> int:
        rec = self.rec
        if isinstance(head, ZeroC):
            if rec is not None:
                rec.push(t, "ii")
            return 0
        if isinstance(head, SucC) and len(args) == 1:
            if rec is not None:
                rec.push(t, "iii")
            return self.clamp(self.eval(args[0]) + 1)
        if isinstance(head, PredC) and len(args) == 1:
            if rec is not None:
                rec.push(t, "iv")
            return max(self.eval(args[0]) - 1, 0)
        if isinstance(head, Param):
            if rec is not None:
                rec.push(t, "p")
            if isinstance(head.type, Ground):
                return head.value
            vals = [self.eval(a) for a in args]
            out = head.value(*vals)
            if out is BOTTOM:
                raise BottomSignal(f"parameter {head.label} is undefined at {vals}")
            if not isinstance(out, int) or out < 0:
                raise OracleContractError(f"parameter {head.label} returned {out!r}")
            return self.clamp(out)
        if isinstance(head, OracleRef):
            if rec is not None:
                rec.push(t, "vi")
            return self.call_oracle(head, args)
        if isinstance(head, Var):
            raise OpenTerm(f"free variable {head.name} reached during evaluation")
        raise TypeMismatch(f"cannot evaluate {type(head).__name__} with {len(args)} arguments")

    # -- function arguments

    def tabulate(self, arg: Term, ty: Arrow, label: str, position: int = 0) -> dict:
        """Run ``arg`` on every total input over the finite base."""
        from .minidomains import total_elements

        domains = []
        for d in ty.args:
            if rank(d) > 1:
                raise OracleContractError("finite-base tabulation supports inputs of rank <= 1")
            domains.append(total_elements(d, self.base))
        table = {}
        for xs in itertools.product(*domains):
            params = [self.to_param(x, d, label) for x, d in zip(xs, ty.args)]
            if self.rec is not None:
                self.rec.note_query(position, tuple(_param_repr(p) for p in params))
            table[tuple(_input_key(x) for x in xs)] = self.eval(apply(arg, *params))
        return table

    def query(self, handle: Handle, params: list) -> int:
        if self.rec is not None:
            self.rec.note_query(handle.position, tuple(_param_repr(p) for p in params))
        return self.eval(apply(handle.term, *params))

    def call_oracle(self, ref: OracleRef, args: list) -> int:
        spec = self.registry.get(ref.name)
        if spec.type != ref.type:
            raise TypeMismatch(f"#{ref.name} used at {ref.type}, registered at {spec.type}")
        ty = spec.type
        if isinstance(ty, Ground):
            if args:
                raise TypeMismatch(f"#{ref.name} is ground")
            actual: list = []
        else:
            if len(args) != len(ty.args):
                raise TypeMismatch(f"#{ref.name} needs {len(ty.args)} arguments, got {len(args)}")
            actual = []
            for j, (a, d) in enumerate(zip(args, ty.args)):
                if isinstance(d, Ground):
                    actual.append(self.eval(a))
                elif self.base is not None:
                    actual.append(TableHandle(self.tabulate(a, d, f"{ref.name}.{j}", j), d, f"{ref.name}.{j}"))
                else:
                    actual.append(Handle(self, a, d, j, f"{ref.name}.{j}"))
        self.calls += 1
        if self.calls > self.fuel.oracle_calls:
            raise OutOfFuel(f"oracle-call limit {self.fuel.oracle_calls}")
        used = self.per_oracle.get(ref.name, 0) + 1
        self.per_oracle[ref.name] = used
        if spec.budget is not None and used > spec.budget:
            raise OracleBudgetExhausted(f"#{ref.name} exceeded its budget of {spec.budget} calls")
        try:
            out = spec.callback(*actual)
        finally:
            for h in actual:
                if isinstance(h, Handle):
                    h.live = False
        if out is BOTTOM:
            if spec.total:
                raise OracleContractError(f"declared-total oracle #{ref.name} returned bottom")
            raise BottomSignal(f"#{ref.name} is undefined here")
        if not isinstance(out, int) or isinstance(out, bool) or out < 0:
            raise OracleContractError(f"#{ref.name} returned {out!r}")
        if self.base is not None and out >= self.base:
            raise OracleContractError(f"#{ref.name} returned {out} outside base {self.base}")
        self.queries.append((ref.name, out))
        return out


def _param_repr(p: Param):
    if isinstance(p.type, Ground):
        return p.value
    return p.label or "fn"


def _memo_key(t: Term):
    for s in subterms(t):
        if isinstance(s, Param) and not isinstance(s.type, Ground):
            return None
    from .terms import godel_encode

    return godel_encode(t)


# ---------------------------------------------------------------- entry points


def check_program(t: Term, registry: Registry) -> None:
    """Closedness, type 0 and resolvable oracles."""
    ty = typecheck(t)
    if ty != N:
        raise TypeMismatch(f"program has type {ty}, expected N")
    fv = free_vars(t)
    if fv:
        raise OpenTerm(f"program has free variables {sorted(fv)}")
    for s in subterms(t):
        if isinstance(s, OracleRef):
            spec = registry.get(s.name)
            if spec.type != s.type:
                raise TypeMismatch(f"#{s.name} used at {s.type}, registered at {spec.type}")


def run_machine(machine: Machine, t: Term) -> EvalOutcome:
    try:
        return Value(run_deep(machine.eval, t))
    except BottomSignal as e:
        return Bottom(str(e))
    except OutOfFuel as e:
        return FuelExhausted(str(e))
    except RecursionError:
        return FuelExhausted("host recursion limit")


def evaluate(
    t: Term,
    oracles=None,
    fuel: Optional[FuelBudget] = None,
    base: Optional[int] = None,
    memo: bool = False,
    cycles: bool = False,
    check: bool = True,
) -> EvalOutcome:
    """Evaluate a closed term of type 0.

    ``base`` switches to the finite base ``{0, ..., base-1}``: successor
    saturates and function arguments are checked on all total inputs.
    ``cycles`` stops early (as fuel exhaustion) when a term's evaluation
    re-enters itself.
    """
    registry = as_registry(oracles)
    if check:
        check_program(t, registry)
    for spec in registry:
        if spec.bound is not None and fuel is not None and spec.bound > fuel.search_bound:
            raise ValueError(f"#{spec.name} search bound {spec.bound} exceeds the fuel's {fuel.search_bound}")
    m = Machine(registry, fuel or default_fuel(), base=base, memo=memo, cycles=cycles)
    return run_machine(m, t)


def apply_oracle(spec: OracleSpec, args: list, fuel: Optional[FuelBudget] = None, log: Optional[list] = None) -> EvalOutcome:
    """Apply an oracle to already-evaluated arguments.

    Function arguments are host callables; every query they answer is
    appended to ``log`` as ``(position, inputs, answer)``.
    """
    fuel = fuel or default_fuel()
    calls = [0]
    wrapped = []
    for j, a in enumerate(args):
        if callable(a):
            def q(*xs, _a=a, _j=j):
                calls[0] += 1
                if calls[0] > fuel.oracle_calls:
                    raise OracleBudgetExhausted(f"more than {fuel.oracle_calls} queries")
                if spec.budget is not None and calls[0] > spec.budget:
                    raise OracleBudgetExhausted(f"#{spec.name} exceeded its budget of {spec.budget} queries")
                out = _a(*xs)
                if log is not None:
                    log.append((_j, xs, out))
                if out is BOTTOM:
                    raise BottomSignal(f"argument {_j} undefined at {xs}")
                return out
            wrapped.append(q)
        else:
            wrapped.append(a)
    try:
        out = spec.callback(*wrapped)
    except BottomSignal as e:
        return Bottom(str(e))
    except OracleBudgetExhausted:
        raise
    except OutOfFuel as e:
        return FuelExhausted(str(e))
    if out is BOTTOM:
        if spec.total:
            raise OracleContractError(f"declared-total oracle #{spec.name} returned bottom")
        return Bottom(f"#{spec.name} is undefined here")
    return Value(out)


# ---------------------------------------------------------------- built-ins


T1 = Arrow((N,))
T2 = Arrow((T1,))
T3 = Arrow((T2,))


def constant_oracle(name: str, type_: FiniteType, k: int = 0) -> OracleSpec:
    return OracleSpec(name, type_, lambda *args: k, description=f"constant {k}")


def builtin_mu2(f: Callable[[int], int], bound: int) -> int:
    """Least ``n < bound`` with ``f(n) = 0``; ``SearchExhausted`` otherwise."""
    for n in range(bound):
        if f(n) == 0:
            return n
    raise SearchExhausted(f"no zero below {bound}")


def _least_zero_or(f, bound, default):
    for n in range(bound):
        if f(n) == 0:
            return n
    return default


def mu2_oracle(name: str = "mu2", bound: int = 1000) -> OracleSpec:
    return OracleSpec(
        name,
        T2,
        lambda f: builtin_mu2(f, bound),
        bound=bound,
        description=f"least zero below {bound}",
        approx_callback=lambda f: _least_zero_or(f, bound, 0),
    )


def exists2_oracle(name: str = "exists2", bound: int = 1000) -> OracleSpec:
    """0 means a zero of the argument was found below the bound."""

    def cb(f):
        builtin_mu2(f, bound)
        return 0

    return OracleSpec(
        name,
        T2,
        cb,
        bound=bound,
        description=f"zero exists below {bound}",
        approx_callback=lambda f: 0 if _least_zero_or(f, bound, None) is not None else 1,
    )


class SeqFn:
    """A finitely supported sequence ``n -> values[n]`` (0 past the end)."""

    def __init__(self, values):
        self.values = tuple(values)
        self.label = "seq" + "".join(f".{v}" for v in self.values)
        self.finkey = None

    def __call__(self, n):
        return self.values[n] if n < len(self.values) else 0

    def __eq__(self, other):
        return isinstance(other, SeqFn) and other.values == self.values

    def __hash__(self):
        return hash(self.values)

    def __repr__(self):
        return self.label


def box_universe(length: int, values: int) -> list:
    """All sequences in ``{0..values-1}^length`` padded with zeros."""
    return [SeqFn(v) for v in itertools.product(range(values), repeat=length)]


def omega_b_from_universe(X: Callable, universe: list):
    members = [g for g in universe if X(g) != 0]
    if len(members) > 1:
        return BOTTOM
    return 1 if members else 0


def omega_b_oracle(name: str = "omega_b", universe: Optional[list] = None) -> OracleSpec:
    """Basic finiteness functional for sets promised to lie in ``universe``.

    The argument is a characteristic function (nonzero means member). Sets
    with two or more members are outside the domain and yield bottom.
    """
    universe = box_universe(2, 2) if universe is None else universe
    return OracleSpec(
        name,
        T3,
        lambda X: omega_b_from_universe(X, universe),
        total=False,
        description=f"omega_b over {len(universe)} candidate sequences",
    )


def omega_oracle(name: str = "omega", universe: Optional[list] = None, values: int = 16) -> OracleSpec:
    """``#omega X n``: the n-th value of the single member of X, 0 if X is empty.

    Computed from the basic functional by testing ``{g in X : g(n) = k}``
    for ``k = 0, 1, ...``.
    """
    universe = box_universe(2, 2) if universe is None else universe

    def cb(X, n):
        b = omega_b_from_universe(X, universe)
        if b is BOTTOM:
            return BOTTOM
        if b == 0:
            return 0
        for k in range(values):
            sub = omega_b_from_universe(lambda g, k=k: X(g) if g(n) == k else 0, universe)
            if sub == 1:
                return k
        raise SearchExhausted(f"value search bound {values}")

    return OracleSpec(name, Arrow((T2, N)), cb, total=False, description="omega via omega_b")


def table_oracle(name: str, type_: FiniteType, table) -> OracleSpec:
    """Oracle given by a finite table; ``None`` entries are bottom."""
    from .minidomains import FinFunc, as_finfunc

    fn = table if isinstance(table, FinFunc) else as_finfunc(type_, table)

    def cb(*args):
        v = fn.apply_handles(args)
        return BOTTOM if v is None else v

    return OracleSpec(name, type_, cb, total=fn.is_total(), description="table")
