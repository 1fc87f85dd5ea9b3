import json

import pytest

from monitorkit.cli import dispatch


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def test_run(files):
    code, out, err = dispatch(["run", "-m", files("m.mon", "a.yes + b.no"), "-t", "b"])
    assert (code, out, err) == (0, "REJECTED at prefix 1\n", "")


def test_run_stdin():
    code, out, _ = dispatch(["run", "-m", "-", "-t", "ab", "--alphabet", "a,b"], stdin="a.b.yes")
    assert code == 0 and out == "ACCEPTED at prefix 2\n"


def test_run_budget(files):
    code, out, err = dispatch(["run", "-m", files("t.mon", "rec x.(x & (a.yes + b.yes))"), "-t", "a",
                               "--tau-budget", "40", "--frontier-budget", "200"])
    assert code == 3 and out.startswith("BUDGET_EXCEEDED") and err.startswith("error[guard]:")


def test_equiv(files):
    no, sum_no = files("no.mon", "no"), files("sum_no.mon", "a.no + b.no")
    code, out, _ = dispatch(["equiv", "-m1", no, "-m2", sum_no])
    assert code == 1 and "counterexample reject: ε" in out
    code, out, _ = dispatch(["equiv", "-m1", no, "-m2", sum_no, "--omega"])
    assert code == 0 and out.startswith("EQUIVALENT")


def test_parse_and_doc_roundtrip(files):
    m = files("m.mon", "rec x.(a.x + b.yes) // comment")
    code, out, _ = dispatch(["parse", m])
    assert code == 0 and out == "rec x.(a.x + b.yes)\n"
    code, doc, _ = dispatch(["parse", m, "--format", "doc"])
    assert json.loads(doc)["kind"] == "monitor"
    code, out2, _ = dispatch(["parse", files("m.json", doc)])
    assert out2 == out


def test_parse_formula(files):
    f = files("f.hml", "max X.([a]X && [b]ff)")
    code, out, _ = dispatch(["parse", f, "-v"])
    assert code == 0 and "sHML" in out
    _, doc, _ = dispatch(["parse", f, "--format", "doc"])
    _, again, _ = dispatch(["parse", files("f.json", doc), "--format", "doc"])
    assert again == doc


def test_errors(files):
    code, _, err = dispatch(["parse", files("bad.mon", "a.yes +")])
    assert code == 2 and err.startswith("error[input]:") and "end of input" in err
    code, _, err = dispatch(["frobnicate"])
    assert code == 2 and err.startswith("error[usage]:")
    code, _, err = dispatch(["run", "-m", "/nonexistent", "-t", "a"])
    assert code == 2 and err.startswith("error[input]:")
    code, _, err = dispatch(["eval", "-f", files("f.hml", "<a>tt"), "--lasso", "a:"])
    assert code == 2 and "non-empty" in err


def test_synth_eval(files):
    f = files("f.hml", "max X.([a]X && [b]ff)")
    code, out, _ = dispatch(["synth", "-f", f])
    assert code == 0 and "no" in out
    assert dispatch(["eval", "-f", f, "--lasso", ":a"])[0] == 0
    code, out, _ = dispatch(["eval", "-f", f, "--lasso", "a:ab"])
    assert (code, out) == (1, "false\n")


def test_transform(files):
    m = files("m.mon", "(a.yes + end) | (b.yes + end)")
    code, out, _ = dispatch(["transform", "-m", m, "--to", "deterministic"])
    assert code == 0 and "a.yes" in out
    code, out, _ = dispatch(["transform", "-m", m, "--to", "regular", "--emit", "sizes"])
    assert "output l =" in out
    for kind in ("afa", "nfa", "dfa"):
        code, doc, _ = dispatch(["transform", "-m", m, "--to", kind, "--format", "doc"])
        assert code == 0 and json.loads(doc)["kind"] == kind
        assert dispatch(["parse", files(f"{kind}.json", doc)])[0] == 0
    code, _, err = dispatch(["transform", "-m", m, "--to", "dfa", "--max-states", "1"])
    assert code == 3 and err.startswith("error[guard]:")


def test_export(files):
    code, out, _ = dispatch(["export", "-m", files("m.mon", "a.yes + b.no"), "--dot"])
    assert code == 0 and out.startswith("digraph")


def test_bench(files):
    code, out, _ = dispatch(["bench", "gap", "--family", "U", "--l", "1"])
    assert code == 0 and out.splitlines()[1].startswith("family")
    code, doc, _ = dispatch(["bench", "gap", "--family", "U", "--l", "1", "--format", "doc", "--seed", "4"])
    d = json.loads(doc)
    assert d["seed"] == 4 and d["rows"][0]["regular_equiv"] is True
    assert dispatch(["parse", files("r.json", doc)])[0] == 0


def test_deterministic_output(files):
    m = files("m.mon", "(a.yes + end) & (b.a.yes + a.no + end)")
    runs = [dispatch(["transform", "-m", m, "--to", "deterministic"]) for _ in range(2)]
    assert runs[0] == runs[1]
