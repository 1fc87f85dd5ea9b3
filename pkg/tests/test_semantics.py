import pytest
from hypothesis import given, strategies as st

from conftest import seeded_monitor
from monitorkit.corpus import AB
from monitorkit.semantics import (
    LTS, Budget, BudgetExceeded, Kind, Reactivity, check_consistent, check_reactive, derivatives,
    run_all_traces, run_finite_trace,
)
from monitorkit.terms import END, NO, YES, Monitor, ParAnd, TAU, parse_monitor, parse_term

M_TAU = "rec x.(x & (a.yes + b.yes))"


def mon(text):
    return parse_monitor(text, AB)


def test_derivatives():
    assert derivatives(mon("a.yes + b.no"), "a") == {YES}
    assert derivatives(mon("yes"), "a") == {YES}


def test_parallel_reconfiguration():
    m = mon("yes & a.no")
    assert parse_term("a.no", AB) in derivatives(m, TAU)
    assert NO in derivatives(mon("no & a.yes"), TAU)
    assert YES in derivatives(mon("yes | a.no"), TAU)
    assert NO in derivatives(mon("no | no"), TAU)


def test_run_examples():
    out = run_finite_trace(mon("a.yes + b.no"), ("b",))
    assert out.kind is Kind.REJECTED and out.witness_prefix_length == 1
    assert str(out) == "REJECTED at prefix 1"
    assert run_finite_trace(mon("a.yes & b.no"), ("a", "b")).kind is Kind.INCONCLUSIVE


def test_m_tau_budget():
    out = run_finite_trace(mon(M_TAU), ("a",), Budget(50, 200))
    assert out.kind is Kind.BUDGET_EXCEEDED
    with pytest.raises(BudgetExceeded):
        LTS(mon(M_TAU)).closure([mon(M_TAU).term], 50)


def test_reactivity_examples():
    assert check_reactive(mon("a.yes + b.no")).status is Reactivity.REACTIVE
    r = check_reactive(mon("a.yes & b.no"))
    assert r.status is Reactivity.NOT_REACTIVE and r.witness_action == "a"
    assert check_reactive(mon(M_TAU), Budget(50, 200)).status is Reactivity.UNKNOWN_AT_BOUND


def test_consistency_examples():
    assert not check_consistent(mon("a.yes + a.no"))
    assert check_consistent(mon("a.yes + b.no"))


def test_tie_reports_acceptance():
    out = run_finite_trace(mon("a.yes + a.no"), ("a",))
    assert out.kind is Kind.ACCEPTED and out.accepted and out.rejected


def test_verdict_inside_sum_needs_an_action():
    out = run_finite_trace(mon("yes + a.no"), ())
    assert out.kind is Kind.INCONCLUSIVE
    assert run_finite_trace(mon("yes + a.no"), ("b",)).kind is Kind.ACCEPTED


@given(st.integers(0, 10**6))
def test_verdict_persistence(seed):
    m = seeded_monitor(seed)
    outs = run_all_traces(m, 4, Budget(500, 2000))
    for t, o in outs.items():
        if o.kind is Kind.BUDGET_EXCEEDED:
            continue
        for a in AB:
            ext = outs.get(t + (a,))
            if ext is None or ext.kind is Kind.BUDGET_EXCEEDED:
                continue
            if o.accepted:
                assert ext.accepted and ext.accept_at == o.accept_at
            if o.rejected:
                assert ext.rejected and ext.reject_at == o.reject_at


@given(st.integers(0, 10**6))
def test_run_all_matches_single_runs(seed):
    m = seeded_monitor(seed)
    outs = run_all_traces(m, 3, Budget(500, 2000))
    for t, o in list(outs.items())[:10]:
        assert run_finite_trace(m, t, Budget(500, 2000)) == o


@given(st.integers(0, 10**6))
def test_parallel_and_accepts_iff_both(seed):
    m1, m2 = seeded_monitor(seed, False), seeded_monitor(seed + 1, False)
    both = Monitor(ParAnd(m1.term, m2.term), AB)
    o1, o2, ob = (run_all_traces(x, 4) for x in (m1, m2, both))
    for t in ob:
        assert ob[t].accepted == (o1[t].accepted and o2[t].accepted)
        assert ob[t].rejected == (o1[t].rejected or o2[t].rejected)


def test_end_is_inert():
    assert derivatives(mon("end"), "a") == {END}
