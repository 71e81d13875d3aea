"""Stage-indexed approximations of terms.

``approx_eval(t, a)`` follows the same head reductions as the evaluator but
reads every immediate subcomputation at stage ``a - 1`` through ``limstar``.
Stage 0 is always 0, so the recursion is well-founded and the result is a
natural for every stage. Once the stage reaches the rank of the computation
tree the approximation is the true value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .semantics import (
    BOTTOM,
    Diverge,
    FuelBudget,
    OracleContractError,
    Value,
    as_registry,
    check_program,
    evaluate,
    run_deep,
)
from .terms import (
    CaseC,
    Ground,
    Lam,
    Mu,
    OracleRef,
    Param,
    PredC,
    SucC,
    Term,
    TypeMismatch,
    Var,
    ZeroC,
    apply,
    godel_encode,
    rank,
    spine,
    substitute_closed,
)


class ApproxError(Exception):
    pass


class LimitStageUnsupported(ApproxError):
    pass


class NoStabilization(ApproxError):
    def __init__(self, max_stage, reason=""):
        super().__init__(f"no stabilisation up to stage {max_stage}" + (f": {reason}" if reason else ""))
        self.max_stage = max_stage


@dataclass(frozen=True)
class LimitStage:
    """Marker for a limit ordinal; only finite stages are computed."""

    name: str = "omega"


OMEGA = LimitStage()


def _check_stage(alpha):
    if isinstance(alpha, LimitStage):
        raise LimitStageUnsupported(f"limit stage {alpha.name}")
    if not isinstance(alpha, int) or isinstance(alpha, bool) or alpha < 0:
        raise ValueError(f"stage must be a natural, got {alpha!r}")


def limstar(seq: Callable[[int], int], alpha) -> int:
    """Eventual value of ``seq`` below ``alpha``: 0 at 0, ``seq(b)`` at ``b + 1``."""
    _check_stage(alpha)
    if alpha == 0:
        return 0
    return seq(alpha - 1)


class _Stager:
    def __init__(self, registry, memo: Optional[dict]):
        self.registry = registry
        self.memo = memo

    def at(self, t: Term, a: int) -> int:
        if a == 0:
            return 0
        if self.memo is not None:
            key = (godel_encode(t), a)
            hit = self.memo.get(key)
            if hit is None:
                hit = self._at(t, a)
                self.memo[key] = hit
            return hit
        return self._at(t, a)

    def sub(self, t: Term, a: int) -> int:
        return limstar(lambda b: self.at(t, b), a)

    def _at(self, t: Term, a: int) -> int:
        head, args = spine(t)
        if isinstance(head, ZeroC):
            return 0
        if isinstance(head, CaseC) and len(args) == 3:
            z = self.sub(args[0], a)
            return self.sub(args[1] if z == 0 else args[2], a)
        if isinstance(head, SucC) and len(args) == 1:
            return self.sub(args[0], a) + 1
        if isinstance(head, PredC) and len(args) == 1:
            return max(self.sub(args[0], a) - 1, 0)
        if isinstance(head, Lam):
            if isinstance(head.vtype, Ground):
                s: Term = Param(self.sub(args[0], a))
            else:
                s = args[0]
            return self.sub(apply(substitute_closed(head.body, head.var, s), *args[1:]), a)
        if isinstance(head, Mu):
            return self.sub(apply(substitute_closed(head.body, head.var, head), *args), a)
        if isinstance(head, Param):
            if isinstance(head.type, Ground):
                return head.value
            out = head.value(*[self.sub(x, a) for x in args])
            if out is BOTTOM or not isinstance(out, int) or out < 0:
                raise OracleContractError(f"parameter {head.label} is not total")
            return out
        if isinstance(head, OracleRef):
            return self.oracle(head, args, a)
        if isinstance(head, Var):
            raise TypeMismatch(f"free variable {head.name}")
        raise TypeMismatch(f"cannot approximate {type(head).__name__}")

    def oracle(self, head: OracleRef, args: list, a: int) -> int:
        spec = self.registry.get(head.name)
        ty = spec.type
        actual = []
        for j, (x, d) in enumerate(zip(args, () if isinstance(ty, Ground) else ty.args)):
            if isinstance(d, Ground):
                actual.append(self.sub(x, a))
            else:
                actual.append(self._handle(x, d, a, f"{head.name}.{j}"))
        cb = spec.approx_callback or spec.callback
        try:
            out = cb(*actual)
        except Diverge as e:
            raise OracleContractError(f"#{head.name} did not answer at stage {a}: {e}") from None
        if out is BOTTOM or not isinstance(out, int) or out < 0:
            raise OracleContractError(f"#{head.name} must be total for approximation, returned {out!r}")
        return out

    def _handle(self, term, ty, a, label):
        def h(*xs):
            params = []
            for i, (x, d) in enumerate(zip(xs, ty.args)):
                if isinstance(d, Ground):
                    params.append(Param(x))
                else:
                    params.append(Param(x, d, getattr(x, "label", None) or f"{label}.{i}"))
            return self.sub(apply(term, *params), a)

        return h


def _prepare(t, oracles):
    registry = as_registry(oracles)
    check_program(t, registry)
    for spec in registry:
        if not spec.total:
            raise OracleContractError(f"approximation needs total oracles; #{spec.name} is declared partial")
    return registry


def approx_eval(t: Term, oracles=None, alpha=0, memo: bool = False) -> int:
    """The stage-``alpha`` approximation of a closed type-0 term.

    All oracles must be declared total. With ``memo`` the values are cached
    by (code, parameters, stage).
    """
    _check_stage(alpha)
    registry = _prepare(t, oracles)
    stager = _Stager(registry, {} if memo else None)
    return run_deep(stager.at, t, alpha)


def approx_sweep(t: Term, oracles=None, max_stage: int = 10, memo: bool = True) -> list:
    """Values at stages ``0..max_stage`` (shared cache across stages)."""
    registry = _prepare(t, oracles)
    stager = _Stager(registry, {} if memo else None)
    return run_deep(lambda: [stager.at(t, a) for a in range(max_stage + 1)])


def stabilization_stage(t: Term, oracles=None, max_stage: int = 1000, fuel: Optional[FuelBudget] = None) -> int:
    """Least stage ``a >= 1`` from which the approximation equals the value.

    Stage 0 is the vacuous default and is not counted, so ``0`` itself
    stabilises at stage 1.
    """
    outcome = evaluate(t, oracles, fuel)
    if not isinstance(outcome, Value):
        raise NoStabilization(max_stage, f"the term has no value ({outcome})")
    vals = approx_sweep(t, oracles, max_stage)
    n = outcome.n
    stage = None
    for a in range(max_stage, 0, -1):
        if vals[a] != n:
            break
        stage = a
    if stage is None:
        raise NoStabilization(max_stage)
    return stage
