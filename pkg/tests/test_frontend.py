import io
import json
import os
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import jsonschema
import pytest

import corpus
from sessionforge import ParseError, parse_context, parse_global, parse_local, parse_process
from sessionforge.core import END, Select, Sort
from sessionforge.frontend.cli import main
from sessionforge.frontend.parser import parse_global_with_spans, parse_type
from sessionforge.frontend.printer import print_context, print_process, print_type

ROOT = Path(__file__).resolve().parent.parent
PROTO = ROOT / "protocols"
SCHEMAS = ROOT / "schemas"


def _ws(s: str) -> str:
    return "".join(s.split())


def test_parse_ring(ring):
    assert parse_global(corpus.RING) == ring
    assert parse_global("end") == END


@pytest.mark.parametrize("src", [
    "p -> p { l . end }",
    "rec t . t",
    "p -> q { l . end, l . end }",
    "p -> q { l . x }",
    "p -> q { l(float) . end }",
    "p -> q { l . end",
])
def test_parse_errors(src):
    with pytest.raises(ParseError):
        parse_global(src)


def test_parse_error_carries_span():
    with pytest.raises(ParseError) as info:
        parse_global("p -> q {\n  l . end,\n  l . end }")
    assert info.value.span.line == 3


def test_spans_nest():
    g, spans = parse_global_with_spans(corpus.RING)
    assert spans
    root = spans[()]
    for sp in spans.values():
        assert (sp.line, sp.col) >= (root.line, root.col)


def test_local_and_context_syntax():
    t = parse_local(corpus.TOPT_Q)
    assert isinstance(t.body, Select) and t.body.peer == "r"
    ctx = parse_context("{ p : (<q,l(int)>, end) }")
    (h, ty), = [v for _, v in ctx.items()]
    assert ty == END and h[0].sort == Sort.INT
    assert type(parse_process("0")).__name__ == "Inact"


@pytest.mark.parametrize("src", corpus.GLOBALS + corpus.LOCALS)
def test_type_round_trip(src):
    t = parse_type(src)
    assert _ws(print_type(t)) == _ws(src)
    assert parse_type(print_type(t)) == t


@pytest.mark.parametrize("src", corpus.CONTEXTS)
def test_context_round_trip(src):
    c = parse_context(src)
    assert _ws(print_context(c)) == _ws(src)
    assert parse_context(print_context(c)) == c


@pytest.mark.parametrize("src", corpus.PROCESSES)
def test_process_round_trip(src):
    p = parse_process(src)
    text = print_process(p)
    assert parse_process(text) == p
    assert print_process(parse_process(text)) == text


# -- command line --------------------------------------------------------------

def run_cli(*argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    old = dict(os.environ)
    if env:
        os.environ.update(env)
    try:
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
    finally:
        os.environ.clear()
        os.environ.update(old)
    return code, out.getvalue(), err.getvalue()


def schema(name):
    return json.loads((SCHEMAS / f"{name}.v1.json").read_text())


def check_json(name, text):
    doc = json.loads(text)
    jsonschema.validate(doc, schema(name))
    return doc


def test_cli_project_prints_t_q():
    code, out, _ = run_cli("project", str(PROTO / "ring.gt"), "--role", "q")
    assert code == 0
    from sessionforge import bisimilar
    assert bisimilar(parse_local(out.strip().split("\n")[-1].split(":", 1)[-1].strip()),
                     parse_local(corpus.T_Q))


def test_cli_subtype_exit_codes():
    lt = [str(PROTO / "topt_q.lt"), str(PROTO / "t_q.lt")]
    assert run_cli("subtype", *lt, "--mode", "async", "--bound", "2")[0] == 0
    assert run_cli("subtype", *lt, "--mode", "sync")[0] == 1
    assert run_cli("subtype", *reversed(lt), "--mode", "async", "--bound", "2")[0] == 1


def test_cli_properties_livelock():
    code, out, _ = run_cli("properties", str(PROTO / "bad_livelock.ctx"))
    assert code == 1
    assert "L1" in out


def test_cli_usage_and_parse_errors(tmp_path):
    bad = tmp_path / "bad.gt"
    bad.write_text("p -> p { l . end }")
    assert run_cli("parse", str(bad))[0] == 3
    assert run_cli("no-such-command")[0] == 3
    assert run_cli("project", str(tmp_path / "missing.gt"))[0] == 3


def test_cli_bound_from_environment():
    lt = [str(PROTO / "topt_q.lt"), str(PROTO / "t_q.lt")]
    # window 1 is needed: bound 0 cannot decide the pair
    assert run_cli("subtype", *lt, env={"SESSIONFORGE_BOUND": "0"})[0] == 2
    assert run_cli("subtype", *lt, env={"SESSIONFORGE_BOUND": "1"})[0] == 0
    assert run_cli("subtype", *lt, env={"SESSIONFORGE_BOUND": "-1"})[0] == 3
    assert run_cli("subtype", *lt, env={"SESSIONFORGE_BOUND": "two"})[0] == 3


JSON_CASES = [
    ("parse", ["parse", str(PROTO / "ring.gt")], 0),
    ("parse", ["parse", str(PROTO / "ring.yaml")], 0),
    ("check-wf", ["check-wf", str(PROTO / "ring.gt")], 0),
    ("project", ["project", str(PROTO / "ring.gt")], 0),
    ("project", ["project", str(PROTO / "reorder.gt"), "--role", "q"], 0),
    ("subtype", ["subtype", str(PROTO / "topt_q.lt"), str(PROTO / "t_q.lt")], 0),
    ("subtype", ["subtype", str(PROTO / "t_q.lt"), str(PROTO / "topt_q.lt")], 1),
    ("step", ["step", str(PROTO / "ring.gt")], 0),
    ("step", ["step", str(PROTO / "ring0.ctx"), "--kind", "context"], 0),
    ("step", ["step", str(PROTO / "t_q.lt"), "--kind", "local"], 0),
    ("assoc", ["assoc", str(PROTO / "ring0.ctx"), str(PROTO / "ring.gt")], 0),
    ("assoc", ["assoc", str(PROTO / "reorder.ctx"), str(PROTO / "reorder.gt")], 0),
    ("probe", ["probe", str(PROTO / "ring0.ctx"), str(PROTO / "ring.gt"), "--steps", "30"], 0),
    ("probe", ["probe", str(PROTO / "ring0.ctx"), str(PROTO / "ring.gt"), "--steps", "30",
               "--direction", "soundness"], 0),
    ("properties", ["properties", str(PROTO / "ring0.ctx")], 0),
    ("properties", ["properties", str(PROTO / "unsafe.ctx")], 1),
    ("properties", ["properties", str(PROTO / "bad_livelock.ctx")], 1),
    ("typecheck", ["typecheck", str(PROTO / "ring.yaml")], 0),
    ("typecheck", ["typecheck", str(PROTO / "mismatch.yaml")], 1),
]


@pytest.mark.parametrize("name,argv,expected", JSON_CASES)
def test_cli_json_matches_schema(name, argv, expected):
    code, out, err = run_cli(*argv, "--json")
    assert code == expected, err
    check_json(name, out)


@pytest.mark.parametrize("manifest,verdict", [("ring.yaml", "ok"), ("mismatch.yaml", "err")])
def test_cli_run_json_lines(manifest, verdict):
    code, out, _ = run_cli("run", str(PROTO / manifest), "--steps", "40", "--json")
    lines = [json.loads(l) for l in out.splitlines() if l.strip()]
    for doc in lines:
        jsonschema.validate(doc, schema("run"))
    assert lines[-1]["kind"] == "summary" and lines[-1]["verdict"] == verdict
    assert all(d["kind"] == "step" for d in lines[:-1])
    assert code == (0 if verdict == "ok" else 1)


def test_schemas_are_valid_draft7():
    for f in SCHEMAS.glob("*.v1.json"):
        jsonschema.Draft7Validator.check_schema(json.loads(f.read_text()))
