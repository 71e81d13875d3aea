"""Command-line front end.

Every number printed is an integer, a ``p/q`` rational or a pair of them.
Exit status: 0 on success, 1 on domain errors (bad inputs, failed
preconditions, failed checks), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .approx import approx_eval, approx_sweep
from .clusters.report import REALISERS, Inputs, RealiserReport, replay_report, run_realiser
from .clusters.report import canonical, jsonable
from .minidomains import TermShape, check_agreement, sample_agreement
from .realfun import (
    PAff,
    PAffFormatError,
    RSet,
    arc_length_enclosure,
    classify_point,
    envelopes,
    indicatrix,
    infimum,
    integrate,
    supremum,
    variation,
)
from .semantics import (
    FuelBudget,
    Registry,
    Value,
    Bottom,
    box_universe,
    constant_oracle,
    default_fuel,
    evaluate,
    exists2_oracle,
    mu2_oracle,
    omega_b_oracle,
    omega_oracle,
    run_deep,
    table_oracle,
)
from .terms import (
    RankViolation,
    Term,
    TermSyntaxError,
    TypeAnnotationMissing,
    TypeMismatch,
    apply,
    line_col,
    numeral,
    parse_term,
    parse_type,
    print_term,
)
from .trees import TreeFormatError, build_tree, export_tree, import_tree


class FormatError(Exception):
    """A file does not follow its documented format."""

    def __init__(self, path, line: Optional[int], detail: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {detail}")
        self.path = path
        self.line = line
        self.detail = detail


class InvariantViolation(Exception):
    """A file parses but describes an object that breaks an invariant."""

    def __init__(self, detail: str, path=None):
        super().__init__(f"{path}: {detail}" if path else detail)
        self.detail = detail
        self.path = path


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config


@dataclass
class RunConfig:
    command: str
    paths: list = field(default_factory=list)
    fuel: FuelBudget = field(default_factory=default_fuel)
    precision: int = 30
    manifest: Optional[str] = None
    output: str = "text"

    def __post_init__(self):
        if self.precision <= 0:
            raise UsageError("precision must be positive")
        missing = [p for p in self.paths if not Path(p).exists()]
        if missing:
            raise UsageError(f"no such file: {missing[0]}")


# ---------------------------------------------------------------- files

_RAT = re.compile(r"-?\d+(/\d+)?\Z")


def _line_of(text: str, needle: str) -> Optional[int]:
    k = text.find(needle)
    return None if k < 0 else text.count("\n", 0, k) + 1


def _load_json(path, text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(path, e.lineno, e.msg) from None


def _check_rats(path, text, items, what):
    if not isinstance(items, list):
        raise FormatError(path, _line_of(text, what), f"{what} must be a list")
    for s in items:
        if not isinstance(s, str) or not _RAT.match(s) or s.endswith("/0"):
            raise FormatError(path, _line_of(text, json.dumps(s)), f"{what}: expected a p/q string, got {s!r}")


def parse_fn(text: str, path="<fn>") -> PAff:
    obj = _load_json(path, text)
    if not isinstance(obj, dict) or set(obj) != {"breakpoints", "pieces", "values"}:
        raise FormatError(path, 1, "expected exactly the keys breakpoints, pieces, values")
    _check_rats(path, text, obj["breakpoints"], "breakpoints")
    _check_rats(path, text, obj["values"], "values")
    if not isinstance(obj["pieces"], list):
        raise FormatError(path, _line_of(text, "pieces"), "pieces must be a list")
    for p in obj["pieces"]:
        if not isinstance(p, dict) or set(p) != {"a", "b"}:
            raise FormatError(path, _line_of(text, "pieces"), "each piece needs exactly a and b")
        _check_rats(path, text, [p["a"], p["b"]], "pieces")
    try:
        return PAff.from_json(text)
    except PAffFormatError as e:
        raise InvariantViolation(str(e), path) from None


def parse_set(text: str, path="<set>") -> RSet:
    obj = _load_json(path, text)
    if not isinstance(obj, dict) or not set(obj) <= {"intervals", "points"}:
        raise FormatError(path, 1, "expected the keys intervals and points")
    _check_rats(path, text, obj.get("points", []), "points")
    for iv in obj.get("intervals", []):
        if not isinstance(iv, dict) or not {"lo", "hi"} <= set(iv) <= {"lo", "hi", "lo_closed", "hi_closed"}:
            raise FormatError(path, _line_of(text, "intervals"), "each interval needs lo and hi")
        _check_rats(path, text, [iv["lo"], iv["hi"]], "intervals")
        for k in ("lo_closed", "hi_closed"):
            if k in iv and not isinstance(iv[k], bool):
                raise FormatError(path, _line_of(text, k), f"{k} must be true or false")
        if Fraction(iv["lo"]) > Fraction(iv["hi"]):
            raise InvariantViolation(f"interval [{iv['lo']}, {iv['hi']}] has lo > hi", path)
    return RSet.from_json(text)


def parse_mu(text: str, path="<mu>", signatures=None) -> Term:
    try:
        return parse_term(text, signatures)
    except (TermSyntaxError, TypeAnnotationMissing) as e:
        line = line_col(text, e.position)[0] if e.position is not None else None
        raise FormatError(path, line, str(e)) from None
    except (RankViolation, TypeMismatch) as e:
        pos = getattr(e, "position", None)
        if pos is not None:
            line, col = line_col(text, pos)
            e.args = (f"{path}:{line}:{col}: {e.args[0]}",)
        raise


def load_manifest(path) -> Registry:
    """Build an oracle registry from a JSON manifest (see docs/formats.md)."""
    text = Path(path).read_text(encoding="utf-8")
    obj = _load_json(path, text)
    if not isinstance(obj, dict) or not isinstance(obj.get("oracles"), list):
        raise FormatError(path, 1, "expected an object with an oracles list")
    reg = Registry()
    for entry in obj["oracles"]:
        if not isinstance(entry, dict) or "name" not in entry or "builtin" not in entry:
            raise FormatError(path, _line_of(text, "builtin"), "each oracle needs name and builtin")
        name, kind = entry["name"], entry["builtin"]
        line = _line_of(text, json.dumps(name))
        try:
            if kind == "mu2":
                spec = mu2_oracle(name, int(entry.get("bound", 1000)))
            elif kind == "exists2":
                spec = exists2_oracle(name, int(entry.get("bound", 1000)))
            elif kind in ("omega_b", "omega"):
                u = entry.get("universe", {"length": 2, "values": 2})
                universe = box_universe(int(u["length"]), int(u["values"]))
                if kind == "omega_b":
                    spec = omega_b_oracle(name, universe)
                else:
                    spec = omega_oracle(name, universe, int(entry.get("values", 16)))
            elif kind == "constant":
                spec = constant_oracle(name, parse_type(entry["type"]), int(entry.get("value", 0)))
            elif kind == "table":
                spec = table_oracle(name, parse_type(entry["type"]), entry["table"])
            else:
                raise FormatError(path, line, f"unknown builtin {kind!r}")
        except (KeyError, TypeError, ValueError, TermSyntaxError) as e:
            raise FormatError(path, line, f"oracle {name}: {e}") from None
        reg.add(spec)
    return reg


def validate_files(paths, signatures=None) -> list:
    """Parse each file by extension and run its invariant checks."""
    out = []
    for p in paths:
        path = Path(p)
        text = path.read_text(encoding="utf-8")
        ext = path.suffix
        if ext == ".mu":
            out.append(parse_mu(text, p, signatures))
        elif ext == ".fn":
            out.append(parse_fn(text, p))
        elif ext == ".set":
            out.append(parse_set(text, p))
        elif ext == ".tree":
            try:
                out.append(import_tree(path.read_bytes()))
            except TreeFormatError as e:
                m = re.match(r"line (\d+)", str(e))
                raise FormatError(p, int(m.group(1)) if m else None, str(e)) from None
        elif ext == ".json":
            out.append(load_manifest(p))
        else:
            raise FormatError(p, None, f"unknown file kind {ext!r}")
    return out


# ---------------------------------------------------------------- commands


def _outcome_text(o) -> str:
    if isinstance(o, Value):
        return str(o.n)
    if isinstance(o, Bottom):
        return "bottom"
    return "fuel-exhausted"


def _outcome_json(o) -> dict:
    if isinstance(o, Value):
        return {"outcome": "value", "value": o.n}
    return {"outcome": _outcome_text(o), "reason": o.reason}


def _registry(args) -> Registry:
    return load_manifest(args.manifest) if args.manifest else Registry()


def _program(path, registry, nums) -> Term:
    t = parse_mu(Path(path).read_text(encoding="utf-8"), path, registry.signatures())
    return apply(t, *[numeral(n) for n in nums]) if nums else t


def _fuel(args) -> FuelBudget:
    base = default_fuel()
    if args.fuel is not None:
        base = replace(base, steps=args.fuel)
    return base


def _eval_one(job):
    path, manifest, nums, fuel, base = job
    registry = load_manifest(manifest) if manifest else Registry()
    t = _program(path, registry, nums)
    return evaluate(t, registry, fuel, base=base)


def cmd_eval(args, out) -> int:
    cfg = RunConfig("eval", args.files + ([args.manifest] if args.manifest else []), _fuel(args), manifest=args.manifest, output=args.format)
    jobs = [(p, cfg.manifest, args.args, cfg.fuel, args.base) for p in args.files]
    if args.jobs > 1 and len(jobs) > 1:
        # spawn, not fork: the evaluator's worker thread may hold locks
        with ProcessPoolExecutor(args.jobs, mp_context=multiprocessing.get_context("spawn")) as pool:
            results = list(pool.map(_eval_one, jobs))
    else:
        results = [run_deep(_eval_one, j) for j in jobs]
    if cfg.output == "json":
        out.write(canonical({"results": [dict(file=p, **_outcome_json(r)) for p, r in zip(args.files, results)]}))
    elif len(results) == 1:
        out.write(_outcome_text(results[0]) + "\n")
    else:
        for p, r in zip(args.files, results):
            out.write(f"{p}\t{_outcome_text(r)}\n")
    return 0


def cmd_trace(args, out) -> int:
    cfg = RunConfig("trace", [args.file] + ([args.manifest] if args.manifest else []), _fuel(args), manifest=args.manifest)
    registry = _registry(args)
    t = _program(args.file, registry, args.args)
    tree = build_tree(t, registry, cfg.fuel, base=args.base)
    blob = export_tree(tree, args.format)
    if args.out:
        Path(args.out).write_bytes(blob)
        out.write(f"{_outcome_text(tree.outcome)}\n")
    else:
        out.write(blob.decode("utf-8"))
    return 0


def cmd_approx(args, out) -> int:
    RunConfig("approx", [args.file] + ([args.manifest] if args.manifest else []), manifest=args.manifest)
    if args.stage < 0:
        raise UsageError("stage must be a natural")
    registry = _registry(args)
    t = _program(args.file, registry, args.args)
    if args.sweep:
        out.write("stage\tvalue\n")
        for a, v in enumerate(approx_sweep(t, registry, args.stage)):
            out.write(f"{a}\t{v}\n")
    else:
        out.write(f"{approx_eval(t, registry, args.stage, memo=True)}\n")
    return 0


def cmd_mini(args, out) -> int:
    if args.max_size < 1:
        raise UsageError("max-size must be positive")
    if args.sample:
        report = run_deep(sample_agreement, args.sample, args.max_size, args.base, args.seed, TermShape())
    else:
        report = run_deep(check_agreement, args.max_size, args.base)
    out.write(f"base\t{args.base}\nmax-size\t{args.max_size}\n")
    out.write(f"terms\t{report.terms}\nvalued\t{report.valued}\nmismatches\t{len(report.mismatches)}\n")
    for t, d, e in report.mismatches:
        out.write(f"counterexample\t{print_term(t)}\tdenotation={'bottom' if d is None else d}\tevaluate={_outcome_text(e)}\n")
    out.write("PASS\n" if report.ok else "FAIL\n")
    return 0 if report.ok else 1


FUN_QUERIES = (
    "value",
    "limits",
    "variation",
    "integral",
    "arclength",
    "indicatrix",
    "sup",
    "inf",
    "envelopes",
    "classify",
    "discontinuities",
    "normalize",
)


def _need_at(args):
    if args.at is None:
        raise UsageError(f"query {args.query} needs --at")
    return _parse_rat(args.at)


def cmd_fun(args, out) -> int:
    cfg = RunConfig("fun", [args.file], precision=args.precision)
    f = parse_fn(Path(args.file).read_text(encoding="utf-8"), args.file)
    c = _parse_rat(args.lo) if args.lo is not None else Fraction(0)
    d = _parse_rat(args.hi) if args.hi is not None else Fraction(1)
    q = args.query
    if q == "value":
        res = f(_need_at(args))
    elif q == "limits":
        lft, rgt, v = f.limits_at(_need_at(args))
        res = {"left": lft, "right": rgt, "value": v}
    elif q == "variation":
        res = variation(f, c, d)
    elif q == "integral":
        res = integrate(f, c, d)
    elif q == "arclength":
        lo, hi = arc_length_enclosure(f, c, d, cfg.precision)
        res = [lo, hi]
    elif q == "indicatrix":
        N = indicatrix(f)
        res = {"steps": [list(s) for s in N.steps()], "integral": N.integral()}
    elif q in ("sup", "inf"):
        v, where = (supremum if q == "sup" else infimum)(f, c, d)
        res = {"value": v, "where": where.describe()}
    elif q == "envelopes":
        lower, upper = envelopes(f)
        res = {"lower": lower, "upper": upper}
    elif q == "classify":
        res = classify_point(f, _need_at(args)).as_dict()
    elif q == "discontinuities":
        res = [list(x) if isinstance(x, tuple) else x for x in f.discontinuities()]
    else:
        res = f.simplify()
    if isinstance(res, (int, Fraction, str)):
        out.write(f"{jsonable(res)}\n")
    else:
        out.write(canonical(jsonable(res)))
    return 0


def _parse_rat(s: str) -> Fraction:
    if not _RAT.match(s.strip()):
        raise UsageError(f"expected an integer or p/q rational, got {s!r}")
    try:
        return Fraction(s.strip())
    except ZeroDivisionError:
        raise UsageError(f"zero denominator in {s!r}") from None


def _parse_option(item: str):
    if "=" not in item:
        raise UsageError(f"options are key=value, got {item!r}")
    k, v = item.split("=", 1)
    if v in ("true", "false"):
        return k, v == "true"
    if _RAT.match(v):
        x = Fraction(v)
        return k, int(x) if x.denominator == 1 else x
    return k, v


def cmd_realiser(args, out) -> int:
    paths = ([args.input] if args.input else []) + list(args.set or [])
    cfg = RunConfig("realiser", paths, precision=args.precision)
    if args.name not in REALISERS:
        raise UsageError(f"unknown realiser {args.name!r}; known: {', '.join(sorted(REALISERS))}")
    f = parse_fn(Path(args.input).read_text(encoding="utf-8"), args.input) if args.input else None
    sets = tuple(parse_set(Path(s).read_text(encoding="utf-8"), s) for s in args.set or [])
    options = dict(_parse_option(o) for o in args.option or [])
    inputs = Inputs(f, sets, cfg.precision, options)
    report = run_realiser(args.name, inputs)
    if args.replay:
        old = json.loads(Path(args.replay).read_text(encoding="utf-8"))
        prior = RealiserReport(old["realiser"], old["input_digest"], old["payload"], old.get("witness", {}))
        if prior.input_digest != inputs.digest() or not replay_report(prior, inputs):
            out.write("replay: MISMATCH\n")
            return 1
    doc = report.to_dict()
    if report.files:
        anchor = args.report or args.replay
        outdir = Path(args.outdir) if args.outdir else (Path(anchor).parent if anchor else Path("."))
        outdir.mkdir(parents=True, exist_ok=True)
        names = {}
        for key in sorted(report.files):
            fname = f"{args.name}.{key}.fn"
            (outdir / fname).write_text(report.files[key].to_json() + "\n", encoding="utf-8")
            names[key] = fname
        doc["files"] = names
    text = canonical(doc)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return 0


# ---------------------------------------------------------------- dispatch


def _nat(s: str) -> int:
    try:
        n = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a natural, got {s!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a natural, got {s!r}")
    return n


def _pos(s: str) -> int:
    n = _nat(s)
    if n == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mukleene", description="Evaluate terms with partial oracles and run exact realisers.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def program_args(p, many=False):
        if many:
            p.add_argument("files", nargs="+")
        else:
            p.add_argument("file")
        p.add_argument("--args", nargs="*", type=_nat, default=[], help="naturals applied to the program")
        p.add_argument("--manifest", help="JSON oracle manifest")
        p.add_argument("--base", type=_pos, default=None, help="evaluate over {0..m-1}")

    p = sub.add_parser("eval", help="evaluate programs")
    program_args(p, many=True)
    p.add_argument("--fuel", type=_pos, help="step limit")
    p.add_argument("--jobs", type=_pos, default=1)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("trace", help="build and export a computation tree")
    program_args(p)
    p.add_argument("--fuel", type=_pos)
    p.add_argument("--format", choices=("text", "dot"), default="text")
    p.add_argument("--out")

    p = sub.add_parser("approx", help="stage approximations")
    program_args(p)
    p.add_argument("--stage", type=_nat, required=True)
    p.add_argument("--sweep", action="store_true", help="print every stage up to --stage")

    p = sub.add_parser("mini", help="finite-domain checks")
    p.add_argument("action", choices=("check",))
    p.add_argument("--base", type=_pos, default=2)
    p.add_argument("--max-size", type=_pos, default=8)
    p.add_argument("--sample", type=_nat, default=0, help="random terms instead of all terms")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("fun", help="queries on a piecewise-affine function")
    p.add_argument("query", choices=FUN_QUERIES)
    p.add_argument("file")
    p.add_argument("--at")
    p.add_argument("--from", dest="lo")
    p.add_argument("--to", dest="hi")
    p.add_argument("--precision", type=_pos, default=30)

    p = sub.add_parser("realiser", help="run a named realiser")
    p.add_argument("name")
    p.add_argument("--input", help=".fn function file")
    p.add_argument("--set", action="append", help=".set file (repeatable)")
    p.add_argument("--precision", type=_pos, default=30)
    p.add_argument("--option", action="append", help="key=value")
    p.add_argument("--report", help="write the report here instead of stdout")
    p.add_argument("--outdir", help="directory for function files")
    p.add_argument("--replay", help="check a previous report against its recorded queries")
    return ap


COMMANDS = {
    "eval": cmd_eval,
    "trace": cmd_trace,
    "approx": cmd_approx,
    "mini": cmd_mini,
    "fun": cmd_fun,
    "realiser": cmd_realiser,
}


def _snake(name: str) -> str:
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).upper()


def error_code(exc: BaseException) -> str:
    """Stable code derived from the exception class, e.g. ``E_RANK_VIOLATION``."""
    return "E_" + _snake(type(exc).__name__)


def _domain_errors() -> tuple:
    from .approx import ApproxError
    from .clusters.bv import BadBound, BadVariation, DuplicatePoint, NotAttained, NotSingular, NotUSC
    from .clusters.caccioppoli import NotClosed, NotContinuousOnC, NotDisjoint
    from .clusters.countable import InjectivityViolated, MissingPreimage
    from .clusters.setquery import ClusterError
    from .minidomains import MiniError
    from .realfun import RealFunError
    from .semantics import SemanticsError
    from .terms import TermError
    from .trees import TreeError

    return (
        FormatError,
        InvariantViolation,
        TermError,
        SemanticsError,
        TreeError,
        ApproxError,
        MiniError,
        RealFunError,
        ClusterError,
        BadBound,
        BadVariation,
        DuplicatePoint,
        NotAttained,
        NotSingular,
        NotUSC,
        NotClosed,
        NotContinuousOnC,
        NotDisjoint,
        InjectivityViolated,
        MissingPreimage,
    )


def dispatch(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as e:
        err.write(f"usage error: {e}\n")
        return 2
    except _domain_errors() as e:
        err.write(f"error[{error_code(e)}]: {e}\n")
        return 1
    except ValueError as e:
        # bad numeric settings such as a malformed fuel variable
        err.write(f"error[E_VALUE]: {e}\n")
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
