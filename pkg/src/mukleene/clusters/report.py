"""Named realisers with canonical, replayable reports."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from ..realfun import INFINITY, Interval, PAff, RSet
from . import bv, caccioppoli, countable, omega
from .setquery import SENTINEL, ClusterError, Enclosure, SetQuery, replaying


def jsonable(x):
    """Exact JSON view: rationals as ``p/q`` strings, never floats."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        raise TypeError("floats are not allowed in reports")
    if x is SENTINEL:
        return "empty"
    if x is INFINITY:
        return "inf"
    if isinstance(x, Enclosure):
        return {"lo": str(x.lo), "hi": str(x.hi)}
    if isinstance(x, Interval):
        return {"lo": str(x.lo), "hi": str(x.hi), "lo_closed": x.lo_closed, "hi_closed": x.hi_closed}
    if isinstance(x, PAff):
        return json.loads(x.to_json())
    if isinstance(x, RSet):
        return json.loads(x.to_json())
    if isinstance(x, dict):
        return {str(jsonable(k)): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    raise TypeError(f"cannot serialise {type(x).__name__}")


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


@dataclass
class RealiserReport:
    realiser: str
    input_digest: str
    payload: object
    witness: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "realiser": self.realiser,
            "input_digest": self.input_digest,
            "payload": jsonable(self.payload),
            "witness": jsonable(self.witness),
        }

    def serialise(self) -> str:
        return canonical(self.to_dict())


@dataclass
class Inputs:
    f: Optional[PAff] = None
    sets: tuple = ()
    precision: int = omega.DEFAULT_PRECISION
    options: dict = field(default_factory=dict)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(b"f:" + (self.f.to_json().encode() if self.f is not None else b"-"))
        for s in self.sets:
            h.update(b"|set:" + s.to_json().encode())
        h.update(f"|p:{self.precision}".encode())
        h.update(b"|opt:" + json.dumps(jsonable(self.options), sort_keys=True).encode())
        return h.hexdigest()

    def need_f(self) -> PAff:
        if self.f is None:
            raise ClusterError("this realiser needs an input function")
        return self.f

    def need_set(self, i: int = 0) -> RSet:
        if len(self.sets) <= i:
            raise ClusterError(f"this realiser needs {i + 1} input set(s)")
        return self.sets[i]


def _query(inp: Inputs, log: list, replay: Optional[list]) -> SetQuery:
    q = SetQuery(inp.need_set(), cardinality="finite", count_slack=int(inp.options.get("slack", 0)), log=log, name="X")
    if replay is not None:
        q = replaying(q, replay)
        q.log = log
    return q


def _index(x) -> int:
    return bv.rational_index(x)


def _omega(variant):
    def run(inp, log, replay):
        return omega.omega_family(_query(inp, log, replay), variant, inp.precision, inp.options.get("n")), {}

    return run


def _jordan(inp, log, replay):
    f = inp.need_f()
    variant = inp.options.get("variant", "plain")
    J = bv.jordan_decompose(f, variant, inp.options.get("bound"))
    from ..realfun import variation

    return {"variation": variation(f), "g": J.g, "h": J.h}, {"g": J.g, "h": J.h}


def _sierpinski(inp, log, replay):
    g, h = bv.sierpinski_decompose(inp.need_f())
    return {"g": g, "h": h}, {"g": g, "h": h}


def _discontinuities(inp, log, replay):
    D = bv.discontinuity_enum(inp.need_f())
    k_max = int(inp.options.get("k", 8))
    return {
        "null_sequence": D.is_null,
        "points": [
            {"x": d.x, "left": d.left, "right": d.right, "value": d.value, "jump": d.jump, "kind": d.kind} for d in D.points
        ],
        "classes": {str(k): D.jump_class(k) for k in range(k_max + 1)},
        "removable": D.removable(),
    }, {}


def _prime(inp, log, replay):
    Y = bv.prime_injection(inp.need_f())
    return {"values": Y.table, "details": Y.details, "separation": Y.separation}, {}


def _ac(inp, log, replay):
    v = bv.ac_diagnostics(inp.need_f(), inp.options.get("mode", "ftc"))
    return {"mode": v.mode, "holds": v.holds, "verdict": v.verdict, "witness": v.witness, "gap": v.gap}, {}


def _omega_star(inp, log, replay):
    return omega.omega_star(_query(inp, log, replay)), {}


def _enumerate(inp, log, replay):
    mode = inp.options.get("mode", "plain")
    return countable.enumeration_functional(_query(inp, log, replay), _index, mode), {}


def _banach(inp, log, replay):
    out = countable.banach_to_enum(inp.need_set(), _index, p=inp.precision)
    return [{"n": n, "enclosure": e} for n, e in out], {}


def _staircase(inp, log, replay):
    pts = sorted(inp.need_set().elements(), key=_index)
    f = bv.staircase_from_enum(pts, inp.options.get("N"))
    return {"points": pts, "f": f}, {"f": f}


def _tietze(inp, log, replay):
    g = caccioppoli.tietze(inp.need_f(), inp.need_set())
    return {"g": g}, {"g": g}


def _urysohn(inp, log, replay):
    u = caccioppoli.urysohn(inp.need_set(0), inp.need_set(1))
    return {"f": u}, {"f": u}


REALISERS: dict = {
    "omega_b": _omega("b"),
    "omega": _omega("omega"),
    "omega1": _omega("omega1"),
    "omega_bits": _omega("omega_bits"),
    "omega_exti": _omega("omega_exti"),
    "omega_fin": _omega("fin"),
    "omega_n": _omega("n"),
    "omega_le_n": _omega("le_n"),
    "omega_count": _omega("count"),
    "omega_count_ge": _omega("count_ge"),
    "omega_star": _omega_star,
    "jordan": _jordan,
    "restricted_variation": lambda inp, log, replay: (bv.restricted_variation(inp.need_f(), inp.need_set().elements()), {}),
    "discontinuities": _discontinuities,
    "fsigma": lambda inp, log, replay: (bv.fsigma_export(inp.need_f()), {}),
    "staircase": _staircase,
    "sierpinski": _sierpinski,
    "baire1": lambda inp, log, replay: (bv.baire1_approx(inp.need_f(), int(inp.options.get("n", 4))), {}),
    "usc_max": lambda inp, log, replay: (bv.usc_max(inp.need_f()), {}),
    "prime_injection": _prime,
    "ac": _ac,
    "pseudo_monotone": lambda inp, log, replay: (bv.pseudo_monotone_index(inp.need_f()), {}),
    "enumerate": _enumerate,
    "omega_bw": lambda inp, log, replay: (countable.omega_bw(_query(inp, log, replay), _index), {}),
    "distance": lambda inp, log, replay: (
        countable.distance_functional(inp.options.get("x", 0), _query(inp, log, replay), _index),
        {},
    ),
    "banach_enum": _banach,
    "cacc_sup": lambda inp, log, replay: (caccioppoli.cacc_sup(inp.need_set()), {}),
    "rm_code": lambda inp, log, replay: (caccioppoli.rm_code(inp.need_set()), {}),
    "urysohn": _urysohn,
    "tietze": _tietze,
    "cacc_max": lambda inp, log, replay: (caccioppoli.cacc_max(inp.need_f(), inp.need_set()), {}),
}


def run_realiser(name: str, inputs: Inputs, replay: Optional[list] = None) -> RealiserReport:
    """Run a named realiser. With ``replay`` the set oracle answers from a log."""
    if name not in REALISERS:
        raise KeyError(name)
    log: list = []
    payload, files = REALISERS[name](inputs, log, replay)
    witness = {"precision": inputs.precision, "queries": [list(e) for e in log]}
    if inputs.options:
        witness["options"] = inputs.options
    return RealiserReport(name, inputs.digest(), payload, witness, files)


def replay_report(report: RealiserReport, inputs: Inputs) -> bool:
    """Re-run from the recorded queries and compare the payloads."""
    log = [tuple(q) for q in report.witness.get("queries", [])]
    again = run_realiser(report.realiser, inputs, replay=log)
    return jsonable(again.payload) == jsonable(report.payload)
