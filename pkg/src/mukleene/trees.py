"""Computation trees recorded by the evaluator.

A tree has an empty root (kind ``i``) whose single child is the node of the
program. Every node carries the Goedel code of its term, the parameters that
were substituted into it, its value when it has one, and a kind tag:

``ii`` zero, ``iii`` suc, ``iv`` pred, ``v`` case, ``vi`` oracle application,
``vii`` abstraction applied, ``viii`` mu unfolding, ``p`` parameter.

Only demanded branches are recorded: an oracle node's children are its
ground arguments followed by the queries the oracle actually made. Over a
finite base the queries are all total inputs, in domain order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional
from urllib.parse import quote, unquote

from .semantics import (
    BOTTOM,
    Bottom,
    EvalOutcome,
    FuelBudget,
    FuelExhausted,
    Machine,
    OracleContractError,
    Registry,
    TableHandle,
    Value,
    as_registry,
    check_program,
    default_fuel,
    run_deep,
    run_machine,
)
from .terms import (
    CaseC,
    GodelCode,
    Ground,
    Lam,
    Mu,
    OracleRef,
    Param,
    Term,
    apply,
    godel_decode,
    godel_encode,
    print_term,
    spine,
    substitute_closed,
)

NODE_CAP = 10**6

KINDS = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "p")


class TreeError(Exception):
    pass


class NodeCapExceeded(TreeError):
    def __init__(self, cap):
        super().__init__(f"computation tree exceeds {cap} nodes")
        self.cap = cap


class ValuelessTree(TreeError):
    pass


class TreeInconsistent(TreeError):
    pass


class TreeFormatError(TreeError):
    pass


def _param_key(p):
    if isinstance(p, int):
        return p
    if isinstance(p, tuple):
        label, _fn = p
        return "@" + (label or "fn")
    return p


@dataclass
class CompNode:
    kind: str
    data: bytes = b""
    params: tuple = ()
    value: Optional[int] = None
    query: Optional[tuple] = None
    children: list = field(default_factory=list)
    term: Optional[Term] = field(default=None, compare=False, repr=False)
    raw_params: tuple = field(default=(), compare=False, repr=False)

    @property
    def code(self) -> GodelCode:
        return GodelCode(self.data, self.raw_params or self.params)

    def subterm(self) -> Term:
        if self.term is not None:
            return self.term
        if any(isinstance(p, str) for p in self.params):
            raise TreeError("node has function parameters that were not kept")
        return godel_decode(GodelCode(self.data, self.params))

    def walk(self, depth: int = 0) -> Iterator[tuple]:
        stack = [(self, depth)]
        while stack:
            node, d = stack.pop()
            yield node, d
            for c in reversed(node.children):
                stack.append((c, d + 1))


@dataclass
class CompTree:
    root: CompNode
    outcome: EvalOutcome
    base: Optional[int] = None
    registry: Optional[Registry] = field(default=None, compare=False, repr=False)

    @property
    def value(self) -> Optional[int]:
        return self.outcome.n if isinstance(self.outcome, Value) else None

    @property
    def rank(self) -> int:
        """Height: number of term nodes on the longest branch."""
        best = 0
        for _, d in self.root.walk():
            if d > best:
                best = d
        return best

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.root.walk()) - 1

    def nodes(self) -> Iterator[CompNode]:
        for n, _ in self.root.walk():
            if n is not self.root:
                yield n


class Recorder:
    def __init__(self, cap: int = NODE_CAP):
        self.cap = cap
        self.root = CompNode("i")
        self.stack = [self.root]
        self.count = 0
        self.pending = None

    def mark(self) -> int:
        return len(self.stack)

    def push(self, t: Term, kind: str):
        self.count += 1
        if self.count > self.cap:
            raise NodeCapExceeded(self.cap)
        code = godel_encode(t)
        node = CompNode(
            kind,
            code.data,
            tuple(_param_key(p) for p in code.params),
            query=self.pending,
            term=t,
            raw_params=code.params,
        )
        self.pending = None
        self.stack[-1].children.append(node)
        self.stack.append(node)

    def close(self, mark: int, value: int):
        for n in self.stack[mark:]:
            n.value = value
        del self.stack[mark:]

    def abort(self, mark: int):
        self.pending = None
        del self.stack[mark:]

    def note_query(self, position: int, inputs: tuple):
        self.pending = (position, tuple(_param_key(x) if not isinstance(x, str) else "@" + x for x in inputs))


def build_tree(
    t: Term,
    oracles=None,
    fuel: Optional[FuelBudget] = None,
    base: Optional[int] = None,
    cap: int = NODE_CAP,
) -> CompTree:
    """Evaluate ``t`` and record its (demanded) computation tree.

    Uses the evaluator itself, so fuel is consumed exactly as by
    :func:`evaluate` and the outcome is the same.
    """
    registry = as_registry(oracles)
    check_program(t, registry)
    rec = Recorder(cap)
    m = Machine(registry, fuel or default_fuel(), base=base, recorder=rec)
    outcome = run_machine(m, t)
    return CompTree(rec.root, outcome, base, registry)


# ---------------------------------------------------------------- recomputation


def tree_value(tree: CompTree) -> EvalOutcome:
    """Recompute the value bottom-up from the leaves.

    Every structural step is re-derived from the node's own term: the branch
    taken by ``case``, the body after substitution or unfolding, and, when
    the tree still knows its registry, the oracle answer replayed from the
    recorded queries. Raises ``ValuelessTree`` when a needed subtree has no
    value.
    """
    if not tree.root.children:
        raise ValuelessTree("empty tree")
    return Value(run_deep(_Recompute(tree).node, tree.root.children[0]))


def check_node_values(tree: CompTree) -> int:
    """Recompute every valued node; returns how many were checked."""
    rc = _Recompute(tree)

    def go():
        k = 0
        for n in tree.nodes():
            if n.value is None:
                continue
            got = rc.node(n)
            if got != n.value:
                raise TreeInconsistent(f"{n.kind} node stores {n.value}, recomputes to {got}")
            k += 1
        return k

    return run_deep(go)


class _Recompute:
    def __init__(self, tree: CompTree):
        self.tree = tree
        self.base = tree.base
        self.registry = tree.registry

    def clamp(self, n):
        if self.base is not None and n >= self.base:
            return self.base - 1
        return n

    def val(self, node: CompNode) -> int:
        if node.value is None:
            raise ValuelessTree(f"{node.kind} node without a value")
        return self.node(node)

    def expect(self, node: CompNode, term: Term):
        if godel_encode(term).data != node.data:
            raise TreeInconsistent(f"child of a {node.kind} node is not the expected term")

    def node(self, n: CompNode) -> int:
        ch = n.children
        k = n.kind
        if k == "ii":
            return 0
        if k in ("iii", "iv"):
            self._need(n, 1)
            c = self.val(ch[0])
            return self.clamp(c + 1) if k == "iii" else max(c - 1, 0)
        t = n.subterm()
        head, args = spine(t)
        if k == "v":
            self._need(n, 2)
            z = self.val(ch[0])
            self.expect(ch[1], args[1] if z == 0 else args[2])
            return self.val(ch[1])
        if k == "viii":
            self._need(n, 1)
            self.expect(ch[0], apply(substitute_closed(head.body, head.var, head), *args))
            return self.val(ch[0])
        if k == "vii":
            if isinstance(head.vtype, Ground):
                self._need(n, 2)
                a = self.val(ch[0])
                body = substitute_closed(head.body, head.var, Param(a))
            else:
                self._need(n, 1)
                for c in ch[:-1]:
                    self.val(c)
                body = substitute_closed(head.body, head.var, args[0])
            self.expect(ch[-1], apply(body, *args[1:]))
            return self.val(ch[-1])
        if k == "p":
            if isinstance(head.type, Ground):
                return head.value
            vals = [self.val(c) for c in ch]
            return self.clamp(head.value(*vals))
        if k == "vi":
            return self.oracle(n, head, args)
        raise TreeInconsistent(f"unknown node kind {k!r}")

    def _need(self, n, count):
        if len(n.children) < count:
            raise ValuelessTree(f"{n.kind} node is missing children")

    def oracle(self, n: CompNode, head: OracleRef, args: list) -> int:
        ch = list(n.children)
        ty = head.type
        ground = [] if isinstance(ty, Ground) else [isinstance(d, Ground) for d in ty.args]
        if self.registry is None or head.name not in self.registry:
            for c in ch:
                self.val(c)
            if n.value is None:
                raise ValuelessTree(f"oracle #{head.name} has no answer")
            return n.value
        spec = self.registry.get(head.name)
        it = iter(ch)
        actual = []
        queries = []
        for j, g in enumerate(ground):
            if g:
                c = next(it, None)
                if c is None:
                    raise ValuelessTree("oracle node is missing a ground argument")
                actual.append(self.val(c))
            else:
                actual.append(None)
        queries = list(it)
        if self.base is not None:
            from .minidomains import domain

            by_pos: dict = {}
            for q in queries:
                by_pos.setdefault(q.query[0], []).append(q)
            for j, g in enumerate(ground):
                if g:
                    continue
                d = ty.args[j]
                dom = domain(d, self.base)
                got = by_pos.get(j, [])
                if len(got) != len(dom):
                    raise ValuelessTree(f"argument {j} of #{head.name} was not fully tabulated")
                table = {tuple(x if isinstance(x, int) else x for x in xs): self.val(q) for xs, q in zip(dom, got)}
                actual[j] = TableHandle(table, d, f"{head.name}.{j}")
        else:
            replay = _Replay(self, queries)
            for j, g in enumerate(ground):
                if not g:
                    actual[j] = replay.handle(j)
        out = spec.callback(*actual)
        if out is BOTTOM:
            raise ValuelessTree(f"oracle #{head.name} answers bottom")
        return out


class _Replay:
    def __init__(self, rc: _Recompute, queries: list):
        self.rc = rc
        self.queries = queries
        self.i = 0

    def handle(self, position: int):
        def h(*xs):
            if self.i >= len(self.queries):
                raise TreeInconsistent("oracle asked a query that is not in the tree")
            q = self.queries[self.i]
            self.i += 1
            want = (position, tuple(x if isinstance(x, int) else "@" + (getattr(x, "label", None) or "fn") for x in xs))
            if q.query is None or q.query[0] != want[0] or _strip(q.query[1]) != _strip(want[1]):
                raise TreeInconsistent(f"replayed query {want} differs from recorded {q.query}")
            return self.rc.val(q)

        return h


def _strip(inputs):
    # function inputs are compared by label only
    return tuple(x for x in inputs if isinstance(x, int))


# ---------------------------------------------------------------- export


HEADER = "# mukleene-tree 1"


def _fmt_params(params) -> str:
    if not params:
        return "-"
    return ";".join(str(p) if isinstance(p, int) else quote(str(p), safe="@") for p in params)


def _parse_params(s: str) -> tuple:
    if s == "-":
        return ()
    out = []
    for item in s.split(";"):
        out.append(int(item) if item.isdigit() else unquote(item))
    return tuple(out)


def _fmt_query(q) -> str:
    if q is None:
        return "-"
    pos, inputs = q
    return f"{pos}:" + ";".join(str(x) if isinstance(x, int) else quote(str(x), safe="@") for x in inputs)


def _parse_query(s: str):
    if s == "-":
        return None
    pos, _, rest = s.partition(":")
    inputs = tuple(int(x) if x.isdigit() else unquote(x) for x in rest.split(";")) if rest else ()
    return (int(pos), inputs)


def _fmt_outcome(o: EvalOutcome) -> str:
    if isinstance(o, Value):
        return f"value {o.n}"
    if isinstance(o, Bottom):
        return "bottom"
    return "fuel-exhausted"


def export_tree(tree: CompTree, format: str = "text") -> bytes:
    """Serialise a tree.

    ``text``: a header, an outcome line, a base line, then one
    tab-separated record per node in preorder:
    ``depth kind code-hex params value query``.
    ``dot``: a graph description for Graphviz-style tools.
    """
    if format == "text":
        lines = [HEADER, f"# outcome {_fmt_outcome(tree.outcome)}", f"# base {tree.base if tree.base is not None else '-'}"]
        for node, d in tree.root.walk():
            lines.append(
                "\t".join(
                    [
                        str(d),
                        node.kind,
                        node.data.hex() if node.kind != "i" else "-",
                        _fmt_params(node.params),
                        "-" if node.value is None else str(node.value),
                        _fmt_query(node.query),
                    ]
                )
            )
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format == "dot":
        out = ["digraph computation {", "  node [shape=box, fontname=monospace];"]
        ids = {}
        for i, (node, _) in enumerate(tree.root.walk()):
            ids[id(node)] = i
            if node.kind == "i":
                label = "root"
            else:
                try:
                    text = print_term(node.subterm())
                except Exception:
                    text = node.data.hex()
                if len(text) > 60:
                    text = text[:57] + "..."
                val = "-" if node.value is None else str(node.value)
                label = f"{node.kind}: {text} = {val}"
            label = label.replace("\\", "\\\\").replace('"', '\\"')
            out.append(f'  n{i} [label="{label}"];')
        for node, _ in tree.root.walk():
            for c in node.children:
                out.append(f"  n{ids[id(node)]} -> n{ids[id(c)]};")
        out.append("}")
        return ("\n".join(out) + "\n").encode("utf-8")
    raise ValueError(f"unknown tree format {format!r}")


def import_tree(blob: bytes) -> CompTree:
    """Inverse of ``export_tree(..., "text")``."""
    lines = blob.decode("utf-8").splitlines()
    if len(lines) < 4 or lines[0] != HEADER:
        raise TreeFormatError("missing tree header")
    oc = lines[1].removeprefix("# outcome ")
    if oc.startswith("value "):
        outcome: EvalOutcome = Value(int(oc[6:]))
    elif oc == "bottom":
        outcome = Bottom()
    elif oc == "fuel-exhausted":
        outcome = FuelExhausted()
    else:
        raise TreeFormatError(f"bad outcome line {lines[1]!r}")
    b = lines[2].removeprefix("# base ")
    base = None if b == "-" else int(b)
    stack: list = []
    root = None
    for ln, line in enumerate(lines[3:], start=4):
        parts = line.split("\t")
        if len(parts) != 6:
            raise TreeFormatError(f"line {ln}: expected 6 fields")
        d, kind, code, params, value, query = parts
        if kind not in KINDS:
            raise TreeFormatError(f"line {ln}: unknown kind {kind!r}")
        node = CompNode(
            kind,
            b"" if code == "-" else bytes.fromhex(code),
            _parse_params(params),
            None if value == "-" else int(value),
            _parse_query(query),
        )
        depth = int(d)
        if depth == 0:
            if root is not None:
                raise TreeFormatError("two roots")
            root = node
            stack = [node]
            continue
        if depth > len(stack):
            raise TreeFormatError(f"line {ln}: depth jumps")
        del stack[depth:]
        stack[-1].children.append(node)
        stack.append(node)
    if root is None:
        raise TreeFormatError("no root")
    return CompTree(root, outcome, base)


def tree_height(node: CompNode) -> int:
    """Recursive height, counting term nodes; independent of ``CompTree.rank``."""
    if not node.children:
        return 0 if node.kind == "i" else 1
    h = max(tree_height(c) for c in node.children)
    return h if node.kind == "i" else h + 1
