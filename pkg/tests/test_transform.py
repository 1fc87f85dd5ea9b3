import pytest
from hypothesis import given, strategies as st

from conftest import seeded_monitor
from monitorkit.automata import REJECT
from monitorkit.corpus import AB
from monitorkit.semantics import check_consistent
from monitorkit.terms import canonical, is_deterministic, parse_monitor
from monitorkit.transform import (
    InconsistentMonitorError, NotRegularError, SizeLedger, check_equivalence, determinize_regular,
    immediate_yes_violations, parallel_to_deterministic, parallel_to_regular, two_yes_witness,
)


def mon(text):
    return parse_monitor(text, AB)


def test_regular_examples():
    r = parallel_to_regular(mon("a.yes & a.yes"))
    assert r.regular and check_equivalence(r, mon("a.yes")) is True
    assert check_equivalence(parallel_to_regular(mon("yes")), mon("yes")) is True


def test_determinize_example():
    d = determinize_regular(mon("a.b.yes + a.a.no"))
    assert is_deterministic(d.term)
    assert check_equivalence(d, mon("a.(b.yes + a.no)")) is True
    assert determinize_regular(mon("yes")).term == mon("yes").term


def test_determinize_needs_regular():
    with pytest.raises(NotRegularError):
        determinize_regular(mon("a.yes & b.no"))


def test_inconsistent_rejected():
    with pytest.raises(InconsistentMonitorError):
        parallel_to_deterministic(mon("(a.yes + a.no + end) & yes"))


def test_padded_parallel_to_deterministic():
    m = mon("(a.yes + end) & (b.no + end)")
    d = parallel_to_deterministic(m)
    assert is_deterministic(d.term) and check_equivalence(m, d) is True


def test_ledger():
    led = SizeLedger(0)
    m = mon("(a.yes + end) | (b.yes + end)")
    parallel_to_deterministic(m, ledger=led)
    assert led.afa_states["accept"] >= 1 and led.output_size is not None
    assert any("output" in line for line in led.lines())


def test_equivalence_modes():
    no, sum_no = mon("no"), mon("a.no + b.no")
    res = check_equivalence(no, sum_no)
    assert res is not True and res.polarity is REJECT and res.trace == ()
    assert check_equivalence(no, sum_no, "omega") is True
    m = mon("rec x.(a.x + b.yes + end)")
    assert check_equivalence(m, m) is True and check_equivalence(m, m, "omega") is True


def test_omega_counterexample_is_lasso():
    res = check_equivalence(mon("a.yes + end"), mon("b.yes + end"), "omega")
    assert res is not True and res.lasso is not None and res.lasso[1]


@given(st.integers(0, 10**6))
def test_regular_equivalent(seed):
    m = seeded_monitor(seed)
    r = parallel_to_regular(m)
    assert r.regular
    assert check_equivalence(m, r) is True


@given(st.integers(0, 10**6))
def test_deterministic_routes_commute(seed):
    m = seeded_monitor(seed)
    if not check_consistent(m):
        with pytest.raises(InconsistentMonitorError):
            parallel_to_deterministic(m)
        return
    d = parallel_to_deterministic(m)
    assert is_deterministic(d.term)
    assert check_equivalence(m, d) is True
    d2 = determinize_regular(parallel_to_regular(m))
    assert is_deterministic(d2.term) and check_equivalence(d, d2) is True
    assert canonical(parallel_to_deterministic(m, literal=True).term) == canonical(d.term)


@given(st.integers(0, 10**6))
def test_determinize_random_regular(seed):
    m = seeded_monitor(seed, parallel=False)
    if not check_consistent(m):
        return
    d = determinize_regular(m)
    assert is_deterministic(d.term) and check_equivalence(m, d) is True


def test_yes_witnesses():
    assert two_yes_witness(mon("a.yes")) is None
    assert two_yes_witness(mon("b.(a.yes + b.yes) + a.no")) == ("a", "b", ("b",))
    assert immediate_yes_violations(mon("a.yes + end")) == []
    assert immediate_yes_violations(mon("a.no & rec x.yes")) != []
