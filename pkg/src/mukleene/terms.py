"""Finite types, terms, concrete syntax and Goedel codes.

Concrete syntax::

    type ::= N | (-> type+ N)
    term ::= 0 | (suc t) | (pred t) | (case t t t) | ident | #ident
           | (lam (ident : type) t) | (mu (ident : type) t) | (t t+)

Applications associate to the left, so ``(f a b)`` is ``App(App(f, a), b)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Optional, Union


class TermError(Exception):
    """Base class for everything raised by this module."""


class TermSyntaxError(TermError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class TypeAnnotationMissing(TermError):
    def __init__(self, message: str, position: Optional[int] = None):
        super().__init__(message if position is None else f"{message} at offset {position}")
        self.position = position


class TypeMismatch(TermError):
    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


class RankViolation(TermError):
    def __init__(self, message: str, node=None, rank: int = 0):
        super().__init__(message)
        self.node = node
        self.rank = rank


class DecodeError(TermError):
    pass


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class Ground:
    def __str__(self) -> str:
        return "N"


@dataclass(frozen=True)
class Arrow:
    """``(args[0], ..., args[n-1] -> N)``; the result is always ground."""

    args: tuple

    def __post_init__(self):
        if not self.args:
            raise TypeMismatch("arrow type needs at least one argument")

    def __str__(self) -> str:
        return "(-> " + " ".join(str(a) for a in self.args) + " N)"


FiniteType = Union[Ground, Arrow]

N = Ground()


def arrow(*types: FiniteType) -> FiniteType:
    """``arrow(s1, ..., sn, N)`` builds ``s1,...,sn -> N``."""
    if not types or types[-1] != N:
        raise TypeMismatch("an arrow type must end in N")
    if len(types) == 1:
        return N
    return Arrow(tuple(types[:-1]))


def curry(sigma: FiniteType, tau: FiniteType) -> Arrow:
    """The type ``sigma -> tau``."""
    if isinstance(tau, Ground):
        return Arrow((sigma,))
    return Arrow((sigma,) + tau.args)


def result_after(t: FiniteType) -> FiniteType:
    """Type left after supplying one argument."""
    if not isinstance(t, Arrow):
        raise TypeMismatch(f"type {t} is not a function type")
    return N if len(t.args) == 1 else Arrow(t.args[1:])


def rank(t: FiniteType) -> int:
    if isinstance(t, Ground):
        return 0
    return max(rank(a) for a in t.args) + 1


def arity(t: FiniteType) -> int:
    return 0 if isinstance(t, Ground) else len(t.args)


def type_args(t: FiniteType) -> tuple:
    return () if isinstance(t, Ground) else t.args


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class ZeroC:
    pass


@dataclass(frozen=True)
class SucC:
    pass


@dataclass(frozen=True)
class PredC:
    pass


@dataclass(frozen=True)
class CaseC:
    pass


ZERO = ZeroC()
SUC = SucC()
PRED = PredC()
CASE = CaseC()

T_SUC = Arrow((N,))
T_CASE = Arrow((N, N, N))


@dataclass(frozen=True)
class Var:
    name: str
    type: FiniteType


@dataclass(frozen=True)
class OracleRef:
    name: str
    type: FiniteType


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Lam:
    var: str
    vtype: FiniteType
    body: "Term"


@dataclass(frozen=True)
class Mu:
    var: str
    vtype: FiniteType
    body: "Term"


@dataclass(frozen=True)
class Param:
    """A closed parameter of rank 0 or 1.

    Ground parameters hold a natural. Rank-1 parameters hold a host callable
    taking naturals; ``label`` names it in printed output and tree exports.
    """

    value: object
    type: FiniteType = N
    label: Optional[str] = None

    def __post_init__(self):
        if rank(self.type) > 1:
            raise RankViolation("parameters have rank at most 1", self, rank(self.type))
        if isinstance(self.type, Ground):
            if not isinstance(self.value, int) or self.value < 0:
                raise TypeMismatch("ground parameter must be a natural", self)
        elif not callable(self.value):
            raise TypeMismatch("rank-1 parameter must be callable", self)


Term = Union[ZeroC, SucC, PredC, CaseC, Var, OracleRef, App, Lam, Mu, Param]

_CONSTS = (ZeroC, SucC, PredC, CaseC)


def numeral(n: int) -> Param:
    return Param(n)


def suc_chain(n: int) -> Term:
    t: Term = ZERO
    for _ in range(n):
        t = App(SUC, t)
    return t


def apply(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def spine(t: Term) -> tuple:
    """Split ``t`` into its head and argument list."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


# ---------------------------------------------------------------- typing


def typecheck(t: Term, env: Optional[Mapping[str, FiniteType]] = None) -> FiniteType:
    """Return the type of ``t``; free variables take their annotated types."""
    return _tc(t, dict(env or {}), {})


def _tc(t, bound, free):
    if isinstance(t, ZeroC):
        return N
    if isinstance(t, (SucC, PredC)):
        return T_SUC
    if isinstance(t, CaseC):
        return T_CASE
    if isinstance(t, Param):
        return t.type
    if isinstance(t, OracleRef):
        if rank(t.type) > 3:
            raise RankViolation(f"oracle #{t.name} has rank {rank(t.type)}", t, rank(t.type))
        return t.type
    if isinstance(t, Var):
        want = bound.get(t.name)
        if want is None:
            want = free.setdefault(t.name, t.type)
        if want != t.type:
            raise TypeMismatch(f"variable {t.name} used at {t.type}, declared {want}", t)
        return t.type
    if isinstance(t, App):
        ft = _tc(t.fun, bound, free)
        at = _tc(t.arg, bound, free)
        if not isinstance(ft, Arrow):
            raise TypeMismatch(f"applying a term of type {ft}", t)
        if ft.args[0] != at:
            raise TypeMismatch(f"argument has type {at}, expected {ft.args[0]}", t)
        return result_after(ft)
    if isinstance(t, Lam):
        inner = dict(bound)
        inner[t.var] = t.vtype
        bt = _tc(t.body, inner, free)
        ty = curry(t.vtype, bt)
        if rank(ty) > 3:
            raise RankViolation(f"abstraction has type {ty} of rank {rank(ty)}", t, rank(ty))
        return ty
    if isinstance(t, Mu):
        if rank(t.vtype) > 3:
            raise RankViolation(f"mu over rank {rank(t.vtype)}", t, rank(t.vtype))
        inner = dict(bound)
        inner[t.var] = t.vtype
        bt = _tc(t.body, inner, free)
        if bt != t.vtype:
            raise TypeMismatch(f"mu body has type {bt}, binder {t.vtype}", t)
        return t.vtype
    raise TypeMismatch(f"not a term: {t!r}", t)


def free_vars(t: Term) -> set:
    out: set = set()
    _fv(t, frozenset(), out)
    return out


def _fv(t, bound, out):
    while True:
        if isinstance(t, Var):
            if t.name not in bound:
                out.add(t.name)
            return
        if isinstance(t, App):
            _fv(t.fun, bound, out)
            t = t.arg
        elif isinstance(t, (Lam, Mu)):
            bound = bound | {t.var}
            t = t.body
        else:
            return


def is_closed(t: Term) -> bool:
    return not free_vars(t)


def oracle_names(t: Term) -> set:
    return {s.name for s in subterms(t) if isinstance(s, OracleRef)}


def subterms(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        if isinstance(s, App):
            stack.append(s.arg)
            stack.append(s.fun)
        elif isinstance(s, (Lam, Mu)):
            stack.append(s.body)


def term_size(t: Term) -> int:
    """Concrete-syntax node count.

    ``(suc t)``, ``(pred t)`` and ``(case a b c)`` count one node for the
    operator; every other application counts one node per argument.
    """
    head, args = spine(t)
    if isinstance(head, (SucC, PredC)) and len(args) == 1:
        return 1 + term_size(args[0])
    if isinstance(head, CaseC) and len(args) == 3:
        return 1 + sum(term_size(a) for a in args)
    if args:
        return term_size(head) + sum(1 + term_size(a) for a in args)
    if isinstance(head, (Lam, Mu)):
        return 1 + term_size(head.body)
    return 1


# ---------------------------------------------------------------- substitution

_fresh_counter = [0]


def _fresh(base: str, avoid: set) -> str:
    stem = base.rstrip("'0123456789_") or "v"
    while True:
        _fresh_counter[0] += 1
        name = f"{stem}_{_fresh_counter[0]}"
        if name not in avoid:
            return name


def substitute(t: Term, x: str, s: Term, xtype: Optional[FiniteType] = None) -> Term:
    """Capture-avoiding ``t[x/s]``.

    When ``xtype`` is given the type of ``s`` is checked against it.
    """
    if xtype is not None:
        st = typecheck(s)
        if st != xtype:
            raise TypeMismatch(f"substituting {st} for {x} : {xtype}", s)
    fv = free_vars(s)
    return _subst(t, x, s, fv)


def _subst(t, x, s, fv):
    if isinstance(t, Var):
        return s if t.name == x else t
    if isinstance(t, App):
        f = _subst(t.fun, x, s, fv)
        a = _subst(t.arg, x, s, fv)
        if f is t.fun and a is t.arg:
            return t
        return App(f, a)
    if isinstance(t, (Lam, Mu)):
        if t.var == x:
            return t
        var, body = t.var, t.body
        if var in fv:
            new = _fresh(var, fv | free_vars(body) | {x})
            body = _subst(body, var, Var(new, t.vtype), frozenset())
            var = new
        nb = _subst(body, x, s, fv)
        if nb is t.body and var == t.var:
            return t
        return type(t)(var, t.vtype, nb)
    return t


def substitute_closed(t: Term, x: str, s: Term) -> Term:
    """``t[x/s]`` for closed ``s``; no renaming is ever needed."""
    return _subst(t, x, s, _EMPTY)


_EMPTY = frozenset()


def alpha_equal(a: Term, b: Term) -> bool:
    return godel_encode(a) == godel_encode(b)


# ---------------------------------------------------------------- printing


def format_type(t: FiniteType) -> str:
    return str(t)


def print_term(t: Term) -> str:
    parts: list = []
    _pr(t, parts)
    return "".join(parts)


def _pr(t, out):
    if isinstance(t, ZeroC):
        out.append("0")
    elif isinstance(t, SucC):
        out.append("suc")
    elif isinstance(t, PredC):
        out.append("pred")
    elif isinstance(t, CaseC):
        out.append("case")
    elif isinstance(t, Var):
        out.append(t.name)
    elif isinstance(t, OracleRef):
        out.append("#" + t.name)
    elif isinstance(t, Param):
        if isinstance(t.type, Ground):
            _pr(suc_chain(t.value), out)
        else:
            out.append(f"<param {t.label or hex(id(t.value))}>")
    elif isinstance(t, App):
        head, args = spine(t)
        out.append("(")
        _pr(head, out)
        for a in args:
            out.append(" ")
            _pr(a, out)
        out.append(")")
    elif isinstance(t, (Lam, Mu)):
        out.append("(lam (" if isinstance(t, Lam) else "(mu (")
        out.append(f"{t.var} : {t.vtype}) ")
        _pr(t.body, out)
        out.append(")")
    else:
        raise TypeMismatch(f"cannot print {t!r}")


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(\()|(\))|(:)|([^\s():]+))")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
_KEYWORDS = {"suc": SUC, "pred": PRED, "case": CASE}
_RESERVED = {"lam", "mu", "->", "N", "0", "suc", "pred", "case"}


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and (text[pos].isspace() or text[pos] == ";"):
            if text[pos] == ";":
                # comment to end of line
                while pos < n and text[pos] != "\n":
                    pos += 1
            else:
                pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TermSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        toks.append((m.group(m.lastindex), start))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text, signatures, free):
        self.toks = _tokenize(text)
        self.i = 0
        self.end = len(text)
        self.signatures = signatures or {}
        self.free = dict(free or {})
        # source offset of each binder node, for error locations
        self.where: dict = {}

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def pos(self):
        return self.toks[self.i][1] if self.i < len(self.toks) else self.end

    def next(self):
        if self.i >= len(self.toks):
            raise TermSyntaxError("unexpected end of input", self.end)
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, want):
        tok, p = self.next()
        if tok != want:
            raise TermSyntaxError(f"expected {want!r}, found {tok!r}", p)

    def parse_type(self) -> FiniteType:
        tok, p = self.next()
        if tok == "N":
            return N
        if tok != "(":
            raise TermSyntaxError(f"expected a type, found {tok!r}", p)
        self.expect("->")
        items = []
        while self.peek() != ")":
            if self.peek() is None:
                raise TermSyntaxError("unterminated type", self.end)
            items.append(self.parse_type())
        _, p = self.next()
        if len(items) < 2 or items[-1] != N:
            raise TermSyntaxError("arrow type must list arguments and end in N", p)
        return Arrow(tuple(items[:-1]))

    def parse_term(self, scope) -> Term:
        tok, p = self.next()
        if tok == "(":
            if self.peek() in ("lam", "mu"):
                return self.parse_binder(scope)
            head = self.parse_term(scope)
            args = []
            while self.peek() != ")":
                if self.peek() is None:
                    raise TermSyntaxError("unterminated application", self.end)
                args.append(self.parse_term(scope))
            self.next()
            if not args:
                raise TermSyntaxError("application needs an argument", p)
            return apply(head, *args)
        if tok == ")" or tok == ":":
            raise TermSyntaxError(f"unexpected {tok!r}", p)
        if tok == "0":
            return ZERO
        if tok in _KEYWORDS:
            return _KEYWORDS[tok]
        if tok.startswith("#"):
            name = tok[1:]
            if not _IDENT.match(name):
                raise TermSyntaxError(f"bad oracle name {tok!r}", p)
            if name not in self.signatures:
                raise TypeAnnotationMissing(f"no signature for oracle #{name}", p)
            return OracleRef(name, self.signatures[name])
        if tok in ("lam", "mu", "->", "N") or not _IDENT.match(tok):
            raise TermSyntaxError(f"unexpected token {tok!r}", p)
        if tok in scope:
            return Var(tok, scope[tok])
        if tok in self.free:
            return Var(tok, self.free[tok])
        raise TypeAnnotationMissing(f"variable {tok} has no binder or annotation", p)

    def parse_binder(self, scope) -> Term:
        kind, _ = self.next()
        self.expect("(")
        name, p = self.next()
        if not _IDENT.match(name) or name in _RESERVED:
            raise TermSyntaxError(f"bad binder name {name!r}", p)
        if self.peek() != ":":
            raise TypeAnnotationMissing(f"binder {name} lacks a type", self.pos())
        self.next()
        ty = self.parse_type()
        self.expect(")")
        inner = dict(scope)
        inner[name] = ty
        body = self.parse_term(inner)
        self.expect(")")
        node = Lam(name, ty, body) if kind == "lam" else Mu(name, ty, body)
        self.where[id(node)] = p
        return node


def parse_type(text: str) -> FiniteType:
    p = _Parser(text, None, None)
    ty = p.parse_type()
    if p.peek() is not None:
        raise TermSyntaxError("trailing input", p.pos())
    return ty


def parse_term(
    text: str,
    signatures: Optional[Mapping[str, FiniteType]] = None,
    free: Optional[Mapping[str, FiniteType]] = None,
    check: bool = True,
) -> Term:
    """Parse and (by default) typecheck a term.

    ``signatures`` gives the types of ``#name`` oracles; ``free`` gives the
    types of variables allowed to occur free.
    """
    p = _Parser(text, signatures, free)
    t = p.parse_term({})
    if p.peek() is not None:
        raise TermSyntaxError("trailing input", p.pos())
    if check:
        try:
            typecheck(t)
        except (TypeMismatch, RankViolation) as e:
            e.position = p.where.get(id(e.node))
            raise
    return t


def line_col(text: str, offset: int) -> tuple:
    """1-based line and column of a source offset."""
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


# ---------------------------------------------------------------- Goedel codes
#
# Layout: varint(#free) then, per free variable, varint(len) name type;
# then the body in prefix form. Bound variables are de Bruijn indices.
# encode(0) is therefore b"\x00\x00".

TAG_ZERO, TAG_SUC, TAG_PRED, TAG_CASE = 0x00, 0x01, 0x02, 0x03
TAG_APP, TAG_LAM, TAG_MU = 0x04, 0x05, 0x06
TAG_BOUND, TAG_FREE, TAG_ORACLE, TAG_PARAM = 0x07, 0x08, 0x09, 0x0A
TAG_GROUND, TAG_ARROW = 0x10, 0x11


@dataclass(frozen=True)
class GodelCode:
    data: bytes
    params: tuple = ()

    @property
    def number(self) -> int:
        return int.from_bytes(b"\x01" + self.data, "big")

    def hex(self) -> str:
        return self.data.hex()

    @classmethod
    def from_number(cls, n: int, params: tuple = ()) -> "GodelCode":
        raw = n.to_bytes((n.bit_length() + 7) // 8, "big")
        if not raw or raw[0] != 1:
            raise DecodeError("not a code number")
        return cls(raw[1:], params)


def _varint(n: int, out: bytearray):
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            out.append(b | 0x80)
        else:
            out.append(b)
            return


def _enc_type(t: FiniteType, out: bytearray):
    if isinstance(t, Ground):
        out.append(TAG_GROUND)
    else:
        out.append(TAG_ARROW)
        _varint(len(t.args), out)
        for a in t.args:
            _enc_type(a, out)


def _enc_name(name: str, out: bytearray):
    raw = name.encode("utf-8")
    _varint(len(raw), out)
    out += raw


def godel_encode(t: Term) -> GodelCode:
    free: list = []
    free_index: dict = {}
    params: list = []
    body = bytearray()

    def enc(t, bound):
        while True:
            if isinstance(t, ZeroC):
                body.append(TAG_ZERO)
            elif isinstance(t, SucC):
                body.append(TAG_SUC)
            elif isinstance(t, PredC):
                body.append(TAG_PRED)
            elif isinstance(t, CaseC):
                body.append(TAG_CASE)
            elif isinstance(t, Var):
                for i in range(len(bound) - 1, -1, -1):
                    if bound[i] == t.name:
                        body.append(TAG_BOUND)
                        _varint(len(bound) - 1 - i, body)
                        break
                else:
                    key = (t.name, t.type)
                    if key not in free_index:
                        free_index[key] = len(free)
                        free.append(key)
                    body.append(TAG_FREE)
                    _varint(free_index[key], body)
            elif isinstance(t, OracleRef):
                body.append(TAG_ORACLE)
                _enc_name(t.name, body)
                _enc_type(t.type, body)
            elif isinstance(t, Param):
                body.append(TAG_PARAM)
                _varint(len(params), body)
                _enc_type(t.type, body)
                params.append(t.value if isinstance(t.type, Ground) else (t.label, t.value))
            elif isinstance(t, App):
                body.append(TAG_APP)
                enc(t.fun, bound)
                t = t.arg
                continue
            elif isinstance(t, (Lam, Mu)):
                body.append(TAG_LAM if isinstance(t, Lam) else TAG_MU)
                _enc_type(t.vtype, body)
                bound = bound + [t.var]
                t = t.body
                continue
            else:
                raise TypeMismatch(f"cannot encode {t!r}")
            return

    enc(t, [])
    head = bytearray()
    _varint(len(free), head)
    for name, ty in free:
        _enc_name(name, head)
        _enc_type(ty, head)
    return GodelCode(bytes(head + body), tuple(params))


def godel_number(t: Term) -> int:
    return godel_encode(t).number


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.i = 0

    def byte(self) -> int:
        if self.i >= len(self.data):
            raise DecodeError("truncated code")
        b = self.data[self.i]
        self.i += 1
        return b

    def varint(self) -> int:
        shift = n = 0
        while True:
            b = self.byte()
            n |= (b & 0x7F) << shift
            shift += 7
            if not b & 0x80:
                return n

    def name(self) -> str:
        ln = self.varint()
        raw = self.data[self.i:self.i + ln]
        if len(raw) != ln:
            raise DecodeError("truncated name")
        self.i += ln
        return raw.decode("utf-8")

    def type(self) -> FiniteType:
        tag = self.byte()
        if tag == TAG_GROUND:
            return N
        if tag == TAG_ARROW:
            k = self.varint()
            if k == 0:
                raise DecodeError("empty arrow")
            return Arrow(tuple(self.type() for _ in range(k)))
        raise DecodeError(f"bad type tag {tag:#x}")


def godel_decode(code: GodelCode, params: Optional[tuple] = None) -> Term:
    """Inverse of :func:`godel_encode` up to the names of bound variables.

    Bound variables come back as ``b0, b1, ...`` by binding depth (with a
    suffix if a free variable already uses the name).
    """
    r = _Reader(code.data)
    params = code.params if params is None else params
    free = []
    for _ in range(r.varint()):
        name = r.name()
        free.append(Var(name, r.type()))
    taken = {v.name for v in free}

    def bname(depth):
        name = f"b{depth}"
        while name in taken:
            name += "_"
        return name

    def dec(bound):
        tag = r.byte()
        if tag == TAG_ZERO:
            return ZERO
        if tag == TAG_SUC:
            return SUC
        if tag == TAG_PRED:
            return PRED
        if tag == TAG_CASE:
            return CASE
        if tag == TAG_BOUND:
            k = r.varint()
            if k >= len(bound):
                raise DecodeError("dangling bound variable")
            return bound[len(bound) - 1 - k]
        if tag == TAG_FREE:
            k = r.varint()
            if k >= len(free):
                raise DecodeError("bad free variable index")
            return free[k]
        if tag == TAG_ORACLE:
            name = r.name()
            return OracleRef(name, r.type())
        if tag == TAG_PARAM:
            k = r.varint()
            ty = r.type()
            if k >= len(params):
                raise DecodeError("missing parameter value")
            v = params[k]
            if isinstance(ty, Ground):
                return Param(v)
            label, fn = v
            return Param(fn, ty, label)
        if tag == TAG_APP:
            f = dec(bound)
            return App(f, dec(bound))
        if tag in (TAG_LAM, TAG_MU):
            ty = r.type()
            v = Var(bname(len(bound)), ty)
            body = dec(bound + [v])
            return (Lam if tag == TAG_LAM else Mu)(v.name, ty, body)
        raise DecodeError(f"bad term tag {tag:#x}")

    t = dec([])
    if r.i != len(code.data):
        raise DecodeError("trailing bytes in code")
    return t


def canonical(t: Term) -> Term:
    """Representative of the alpha class of ``t`` (canonical bound names)."""
    return godel_decode(godel_encode(t))


def map_params(t: Term, fn: Callable[[Param], Term]) -> Term:
    if isinstance(t, Param):
        return fn(t)
    if isinstance(t, App):
        return App(map_params(t.fun, fn), map_params(t.arg, fn))
    if isinstance(t, (Lam, Mu)):
        return type(t)(t.var, t.vtype, map_params(t.body, fn))
    return t
