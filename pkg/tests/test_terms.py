import pytest
from hypothesis import given, strategies as st

from conftest import seeded_monitor
from monitorkit.corpus import AB
from monitorkit.terms import (
    END, NO, YES, Alphabet, AlphabetError, Choice, Monitor, MonitorSyntaxError, ParAnd, Prefix, Rec, Var,
    alpha_normalize, canonical, free_vars, is_deterministic, is_padded, monitor_from_doc, monitor_to_doc, pad,
    parse_monitor, parse_term, show, term_size, validate,
)


def p(text):
    return parse_term(text, AB)


def test_parse_choice():
    assert p("a.yes + b.no") == Choice(Prefix("a", YES), Prefix("b", NO))


def test_parse_m_tau():
    t = p("rec x.(x & (a.yes + b.yes))")
    assert t == Rec("x", ParAnd(Var("x"), Choice(Prefix("a", YES), Prefix("b", YES))))


def test_parse_error_at_end():
    with pytest.raises(MonitorSyntaxError) as e:
        p("a.yes +")
    assert e.value.position == len("a.yes +")
    assert "end of input" in str(e.value)


@pytest.mark.parametrize("bad", ["a.", "(a.yes", "rec .yes", "tau.yes", "c.yes", "yes no", "a.yes ++ b.no"])
def test_parse_rejects(bad):
    with pytest.raises(MonitorSyntaxError):
        p(bad)


def test_precedence():
    assert p("a.yes + b.no & end") == ParAnd(Choice(Prefix("a", YES), Prefix("b", NO)), END)


def test_sizes():
    ab01 = Alphabet(("0", "1"))
    assert term_size(parse_term("0.yes + 1.yes", ab01)) == 7
    assert term_size(YES) == 1


def test_validate_examples():
    r = validate(parse_monitor("rec x.(a.x + b.yes)", AB))
    assert r.closed and r.regular and r.deterministic
    r = validate(Var("x"), AB)
    assert not r.closed and r.free_variables == ("x",)
    r = validate(parse_monitor("a.b.yes + a.a.no", AB))
    assert r.closed and r.regular and not r.deterministic
    assert any("non-deterministic" in f for f in r.findings)


def test_alpha_normalize_unique_binders():
    t = p("rec x.a.x + rec x.b.x")
    n = alpha_normalize(t)
    binders = [s.var for s in (n.left, n.right)]
    assert len(set(binders)) == 2
    assert canonical(n) == canonical(t)


def test_monitor_checks_alphabet():
    with pytest.raises(AlphabetError):
        Monitor(Prefix("c", YES), AB)


def test_trace_parsing():
    assert AB.parse_trace("abba") == ("a", "b", "b", "a")
    assert AB.parse_trace("ε") == ()
    multi = Alphabet(("go", "stop"))
    assert multi.parse_trace("go stop") == ("go", "stop")
    with pytest.raises(AlphabetError):
        multi.parse_trace("gostop")


def test_pad():
    t = pad(p("a.yes + b.no"))
    assert is_padded(t)
    assert pad(t) == t
    assert not is_padded(p("a.yes"))


def test_deterministic():
    assert is_deterministic(p("a.(b.yes + a.no)"))
    assert not is_deterministic(p("a.yes & b.no"))


@given(st.integers(0, 10**6), st.booleans())
def test_show_parse_roundtrip(seed, par):
    m = seeded_monitor(seed, par)
    assert parse_monitor(show(m.term), AB) == m


@given(st.integers(0, 10**6))
def test_doc_roundtrip(seed):
    m = seeded_monitor(seed)
    assert monitor_from_doc(monitor_to_doc(m)) == m


@given(st.integers(0, 10**6))
def test_generated_terms_closed(seed):
    m = seeded_monitor(seed)
    assert not free_vars(m.term)
    assert is_padded(m.term)
