import io
import json
from fractions import Fraction

import pytest

from mukleene.cli import FormatError, InvariantViolation, dispatch, error_code, load_manifest, validate_files
from mukleene.corpus import PROGRAMS
from mukleene.realfun import PAff
from mukleene.terms import RankViolation
from mukleene.trees import import_tree, tree_value
from mukleene.semantics import Value

STEP = '{"breakpoints": ["0", "1/2", "1"], "pieces": [{"a": "0", "b": "0"}, {"a": "0", "b": "1"}], "values": ["0", "1", "1"]}\n'


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = dispatch([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    (tmp_path / "add.mu").write_text("; addition by recursion on y\n" + PROGRAMS["add"] + "\n")
    (tmp_path / "loop.mu").write_text("(mu (x : N) x)\n")
    (tmp_path / "step.fn").write_text(STEP)
    (tmp_path / "x.set").write_text('{"points": ["1/3"]}\n')
    (tmp_path / "m.json").write_text(json.dumps({"oracles": [{"name": "mu2", "builtin": "mu2", "bound": 50}]}))
    (tmp_path / "search.mu").write_text("(#mu2 (lam (n : N) (case n (suc 0) 0)))\n")
    return tmp_path


def test_eval_add(files):
    assert run("eval", files / "add.mu", "--args", 2, 3) == (0, "5\n", "")


def test_eval_json_and_jobs(files):
    code, out, _ = run("eval", files / "add.mu", files / "add.mu", "--args", 1, 1, "--jobs", 2, "--format", "json")
    assert code == 0
    assert [r["value"] for r in json.loads(out)["results"]] == [2, 2]


def test_eval_with_manifest(files):
    assert run("eval", files / "search.mu", "--manifest", files / "m.json")[:2] == (0, "1\n")


def test_eval_fuel_outcome_exits_zero(files):
    code, out, _ = run("eval", files / "loop.mu", "--fuel", 100)
    assert code == 0
    assert "fuel" in out


def test_trace_matches_eval(files):
    out_path = files / "t.tree"
    code, _, _ = run("trace", files / "add.mu", "--args", 2, 3, "--out", out_path)
    assert code == 0
    assert tree_value(import_tree(out_path.read_bytes())) == Value(5)
    code, dot, _ = run("trace", files / "add.mu", "--args", 1, 0, "--format", "dot")
    assert code == 0 and dot.startswith("digraph")


def test_approx_sweep(files):
    code, out, _ = run("approx", files / "add.mu", "--args", 0, 1, "--stage", 12, "--sweep")
    assert code == 0
    rows = [ln.split("\t") for ln in out.splitlines()[1:]]
    assert rows[-1] == ["12", "1"]
    assert rows[0] == ["0", "0"]


def test_mini_check():
    code, out, _ = run("mini", "check", "--max-size", 5)
    assert code == 0
    assert out.strip().endswith("PASS")


def test_fun_queries(files):
    fn = files / "step.fn"
    assert run("fun", "variation", fn)[:2] == (0, "1\n")
    assert run("fun", "integral", fn)[:2] == (0, "1/2\n")
    assert run("fun", "value", fn, "--at", "1/2")[:2] == (0, "1\n")
    code, out, _ = run("fun", "limits", fn, "--at", "1/2")
    assert json.loads(out) == {"left": "0", "right": "1", "value": "1"}
    code, out, _ = run("fun", "arclength", fn, "--precision", 10)
    lo, hi = (Fraction(s) for s in json.loads(out))
    assert lo <= 2 <= hi
    assert "." not in out


def test_fun_needs_at(files):
    assert run("fun", "value", files / "step.fn")[0] == 2


def test_realiser_jordan_replay(files, tmp_path):
    rep = tmp_path / "r.json"
    assert run("realiser", "jordan", "--input", files / "step.fn", "--report", rep)[0] == 0
    first = rep.read_bytes()
    g = (tmp_path / "jordan.g.fn").read_text()
    assert PAff.from_json(g).values == (0, 1, 1)
    assert run("realiser", "jordan", "--input", files / "step.fn", "--report", rep)[0] == 0
    assert rep.read_bytes() == first
    assert run("realiser", "jordan", "--input", files / "step.fn", "--replay", rep)[0] == 0
    assert (tmp_path / "jordan.h.fn").exists()


def test_realiser_with_set(files):
    code, out, _ = run("realiser", "omega_bits", "--set", files / "x.set", "--precision", 8)
    assert code == 0
    doc = json.loads(out)
    assert Fraction(doc["payload"]["lo"]) <= Fraction(1, 3) <= Fraction(doc["payload"]["hi"])
    assert doc["witness"]["queries"]


# ---- exit-code matrix


BAD_FILES = {
    "syntax.mu": ("(suc", 1, "E_FORMAT_ERROR"),
    "rank.mu": ("(lam (F : (-> (-> (-> (-> N N) N) N) N)) 0)", 1, "E_RANK_VIOLATION"),
    "type.mu": ("(suc (lam (x : N) x))", 1, "E_TYPE_MISMATCH"),
    "unbound.mu": ("(#nope 0)", 1, None),
}


@pytest.mark.parametrize("name", sorted(BAD_FILES))
def test_eval_error_matrix(tmp_path, name):
    text, code, tag = BAD_FILES[name]
    (tmp_path / name).write_text(text)
    got, _, err = run("eval", tmp_path / name)
    assert got == code
    if tag:
        assert tag in err


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["eval"],
        ["eval", "/no/such/file.mu"],
        ["eval", "x.mu", "--fuel", "0"],
        ["eval", "x.mu", "--args", "-1"],
        ["fun", "nonsense", "x.fn"],
        ["realiser", "no_such_realiser"],
        ["mini", "check", "--base", "0"],
    ],
)
def test_usage_errors_exit_two(argv):
    assert run(*argv)[0] == 2


@pytest.mark.parametrize(
    "text,code",
    [
        ("{not json", "E_FORMAT_ERROR"),
        ('{"breakpoints": ["0", "1"], "pieces": [{"a": "0.5", "b": "0"}], "values": ["0", "0"]}', "E_FORMAT_ERROR"),
        ('{"breakpoints": ["0", "2/3", "1/3", "1"], "pieces": [{"a": "0", "b": "0"}, {"a": "0", "b": "0"}, {"a": "0", "b": "0"}], "values": ["0", "0", "0", "0"]}', "E_INVARIANT_VIOLATION"),
    ],
)
def test_bad_function_files(tmp_path, text, code):
    (tmp_path / "f.fn").write_text(text)
    got, _, err = run("fun", "variation", tmp_path / "f.fn")
    assert got == 1
    assert code in err


def test_domain_error_from_realiser(tmp_path):
    (tmp_path / "two.set").write_text('{"points": ["1/3", "2/3"]}\n')
    got, _, err = run("realiser", "omega_bits", "--set", tmp_path / "two.set")
    assert got == 1
    assert "E_PRECONDITION_VIOLATED" in err


# ---- validation


def test_validate_well_formed(files):
    f, s, reg = validate_files([files / "step.fn", files / "x.set", files / "m.json"])
    assert isinstance(f, PAff)
    assert s.contains(Fraction(1, 3))
    assert "mu2" in reg


def test_validate_out_of_order(tmp_path):
    p = tmp_path / "bad.fn"
    p.write_text('{"breakpoints": ["0", "1", "1/2"], "pieces": [{"a": "0", "b": "0"}, {"a": "0", "b": "0"}], "values": ["0", "0", "0"]}')
    with pytest.raises(InvariantViolation):
        validate_files([p])


def test_validate_rank_with_location(tmp_path):
    p = tmp_path / "r.mu"
    p.write_text("; a rank-4 binder\n(lam (F : (-> (-> (-> (-> N N) N) N) N)) 0)\n")
    with pytest.raises(RankViolation) as info:
        validate_files([p])
    assert f"{p}:2:" in str(info.value)


def test_validate_format_error_line(tmp_path):
    p = tmp_path / "s.mu"
    p.write_text("0\n\n(suc")
    with pytest.raises(FormatError) as info:
        validate_files([p])
    assert info.value.line == 3


def test_manifest_unknown_builtin(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"oracles": [{"name": "q", "builtin": "teleport"}]}')
    with pytest.raises(FormatError):
        load_manifest(p)


def test_error_codes():
    assert error_code(RankViolation("x")) == "E_RANK_VIOLATION"
    assert error_code(FormatError("p", 1, "d")) == "E_FORMAT_ERROR"
