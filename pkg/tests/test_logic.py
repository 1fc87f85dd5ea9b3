import itertools

import pytest
from hypothesis import given, strategies as st

from monitorkit.automata import ACCEPT, REJECT, lasso_member
from monitorkit.corpus import AB, random_formula
from monitorkit.logic import (
    FALSE_F as FF, TRUE_F as TT, And, FormulaError, FragmentError, Lasso, Or, eval_formula_lasso, formula_from_doc,
    formula_size, formula_to_doc, fragments, in_chml, in_maxhml, in_minhml, in_shml, monitor_to_formula,
    parse_formula, show_formula, simplify, synthesize, translate_max_to_safety,
)
from monitorkit.terms import parse_monitor
from monitorkit.transform import check_equivalence, verdict_dfa

import random

WORDS = [tuple(w) for n in range(5) for w in itertools.product("ab", repeat=n)]
LASSOS4 = [(u, v) for u in WORDS for v in WORDS if v]
LASSOS3 = [(u, v) for u, v in LASSOS4 if len(u) <= 3 and len(v) <= 3]


def f(text):
    return parse_formula(text, AB)


def same(g, h, lassos=LASSOS3):
    return all(eval_formula_lasso(g, u, v) == eval_formula_lasso(h, u, v) for u, v in lassos)


def test_fragments():
    phi = f("max X.([a]X && [b]ff)")
    assert in_maxhml(phi) and in_shml(phi)
    psi = f("<a>tt || ff")
    assert in_minhml(psi) and in_chml(psi)
    assert set(fragments(psi)) >= {"cHML", "minHML"}


def test_unbound_variable():
    with pytest.raises(FormulaError):
        f("[a]X")


def test_show_roundtrip():
    phi = f("max X.([a]X && [b]ff) || <b>tt")
    assert f(show_formula(phi)) == phi
    assert formula_from_doc(formula_to_doc(phi, AB)) == phi


def test_formula_size():
    assert formula_size(TT) == 1
    assert formula_size(f("[a]ff")) == 3
    assert formula_size(f("tt && ff")) == 3


def test_eval_examples():
    for u, v in LASSOS3:
        assert eval_formula_lasso(TT, u, v) and not eval_formula_lasso(FF, u, v)
    assert not eval_formula_lasso(f("[a]ff"), (), ("a",))
    assert eval_formula_lasso(f("<a>tt"), Lasso((), ("a",)))
    phi = f("max X.([a]X && [b]ff)")
    assert eval_formula_lasso(phi, (), ("a",))
    assert not eval_formula_lasso(phi, (), ("a", "b"))


def test_least_fixpoint():
    eventually_b = f("min X.(<b>tt || <a>X)")
    assert eval_formula_lasso(eventually_b, ("a", "a"), ("b",))
    assert not eval_formula_lasso(eventually_b, (), ("a",))


def lasso_check(phi, m, pol, lassos=LASSOS4):
    d = verdict_dfa(m, pol)
    for u, v in lassos:
        e = eval_formula_lasso(phi, u, v)
        assert lasso_member(d, u, v) == (not e if pol is REJECT else e), (u, v)


def test_synthesis_examples():
    m = synthesize(f("[a]ff"), AB)
    lasso_check(f("[a]ff"), m, REJECT)
    assert check_equivalence(m, parse_monitor("a.no + end", AB)) is True
    m = synthesize(f("<a>tt"), AB, ACCEPT)
    lasso_check(f("<a>tt"), m, ACCEPT)
    assert check_equivalence(m, parse_monitor("a.yes + end", AB), "omega") is True
    phi = f("max X.([a]X && [b]ff)")
    m = synthesize(phi, AB)
    lasso_check(phi, m, REJECT)
    assert check_equivalence(m, parse_monitor("rec x.(a.x + b.no + end)", AB)) is True


def test_synthesis_fragment_errors():
    with pytest.raises(FragmentError):
        synthesize(f("min X.<a>X"), AB, REJECT)
    with pytest.raises(FragmentError):
        synthesize(f("max X.[a]X"), AB, ACCEPT)


def test_monitor_to_formula_examples():
    g = monitor_to_formula(parse_monitor("a.no + end", AB), REJECT)
    assert same(g, f("[a]ff"), LASSOS4)
    assert monitor_to_formula(parse_monitor("yes", AB), ACCEPT) == TT
    g = monitor_to_formula(parse_monitor("rec x.(a.x + b.no + end)", AB), REJECT)
    assert same(g, f("max X.([a]X && [b]ff)"), LASSOS4)


def test_translate_examples():
    g = translate_max_to_safety(f("<a>tt"), AB)
    assert in_shml(g) and same(g, f("[b]ff"))
    g = translate_max_to_safety(f("[a]ff || [b]ff"), AB)
    assert in_shml(g) and same(g, TT)
    phi = f("max X.([a]X && [b]ff)")
    assert same(translate_max_to_safety(phi, AB), phi)


def test_simplify():
    assert simplify(And(TT, f("[a]ff"))) == f("[a]ff")
    assert simplify(Or(FF, f("<a>tt"))) == f("<a>tt")


FRAG = st.sampled_from(["sHML", "cHML", "maxHML", "minHML"])


@given(st.integers(0, 10**6), FRAG)
def test_synthesis_sound(seed, frag):
    phi = random_formula(random.Random(seed), frag, 4)
    pol = REJECT if frag in ("sHML", "maxHML") else ACCEPT
    lasso_check(phi, synthesize(phi, AB, pol), pol, LASSOS3)


@given(st.integers(0, 10**6))
def test_translation_sound(seed):
    phi = random_formula(random.Random(seed), "maxHML", 4)
    g = translate_max_to_safety(phi, AB)
    assert in_shml(g) and same(g, phi)


@given(st.integers(0, 10**6))
def test_monitor_formula_roundtrip(seed):
    phi = random_formula(random.Random(seed), "sHML", 4)
    m = synthesize(phi, AB, REJECT)
    assert same(monitor_to_formula(m, REJECT), phi)


@given(st.integers(0, 10**6), FRAG)
def test_synthesis_size_linear(seed, frag):
    phi = random_formula(random.Random(seed), frag, 5)
    pol = REJECT if frag in ("sHML", "maxHML") else ACCEPT
    assert synthesize(phi, AB, pol).size() <= 4 * len(AB) * formula_size(phi) + 4


@given(st.integers(0, 10**6), FRAG)
def test_parse_roundtrip(seed, frag):
    phi = random_formula(random.Random(seed), frag, 5)
    assert f(show_formula(phi)) == phi
