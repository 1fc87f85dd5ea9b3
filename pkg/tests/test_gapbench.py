import random

import pytest
from hypothesis import given, strategies as st

from monitorkit.automata import ACCEPT, REJECT, afa_accepts, afa_accepts_batch, lasso_member, monitor_to_afa
from monitorkit.gapbench import (
    SIGMA, GapParams, GuardError, TKParams, all_strings, build_aux, build_gap_monitor, build_tK, decode,
    default_tk_params, enc, in_W, minimal_members, oracle_membership, pipeline_row, random_traces, report_doc,
    report_table, targeted_suite,
)
from monitorkit.semantics import Kind, check_consistent, run_finite_trace
from monitorkit.terms import NO, parse_monitor, subterms, term_size

P1, P2 = GapParams(1), GapParams(2)


def test_params():
    assert (P1.k, P1.block, P2.k) == (2, 2, 4)
    with pytest.raises(ValueError):
        GapParams(0)
    with pytest.raises(GuardError):
        GapParams(7)


def test_W_and_enc():
    assert in_W("0011", P1) and in_W("1100", P1)
    assert not in_W("0001", P1) and not in_W("001", P1)
    assert enc("01", P1) == "0011" and decode("1100", P1) == "01"
    for s in all_strings(P2.k):
        assert in_W(enc(s, P2), P2) and decode(enc(s, P2), P2) == s


def test_oracle_examples():
    assert oracle_membership("A", P1, "#0011#$#0011#$")
    assert not oracle_membership("A", P1, "#0011#$#0010#$")
    assert oracle_membership("U", P1, "#0010#0011$")
    assert not oracle_membership("U", P1, "#0011#0010$")
    assert not oracle_membership("U", P1, "#$")


def test_aux_last():
    m = build_aux("last")
    assert run_finite_trace(m, tuple("01$")).kind is Kind.ACCEPTED
    assert run_finite_trace(m, tuple("01$#0")).kind is Kind.ACCEPTED
    assert run_finite_trace(m, tuple("01#")).kind is Kind.INCONCLUSIVE


def test_aux_perm():
    m = build_aux("perm", P1)
    a = monitor_to_afa(m, ACCEPT)
    assert afa_accepts(a, tuple("0011#")) and afa_accepts(a, tuple("1100#01"))
    assert not afa_accepts(a, tuple("0001#"))
    assert monitor_to_afa(m, REJECT).n_states == 0


def test_aux_errors():
    with pytest.raises(ValueError):
        build_aux("find", P1, "0")
    with pytest.raises(ValueError):
        build_aux("nope", P1)
    with pytest.raises(ValueError):
        build_aux("skip_#")


def test_size_trends():
    perm = [term_size(build_aux("perm", GapParams(l))) / GapParams(l).k ** 2 for l in (1, 2, 3)]
    a = [build_gap_monitor("A", GapParams(l)).size() / GapParams(l).k ** 2 for l in (1, 2, 3)]
    assert max(perm) < 60 and max(a) < 240
    assert a[2] <= a[0]


def test_no_rejection():
    for fam in "AU":
        m = build_gap_monitor(fam, P1)
        assert NO not in set(subterms(m.term))
        assert monitor_to_afa(m, REJECT).n_states == 0
        assert check_consistent(m)


def test_persistence_after_member():
    a = monitor_to_afa(build_gap_monitor("A", P1), ACCEPT)
    for tail in ["", "0", "$$#", "#0011#$"]:
        assert afa_accepts(a, tuple("#0011#$#0011#$" + tail))


def test_mU_order():
    a = monitor_to_afa(build_gap_monitor("U", P1), ACCEPT)
    assert afa_accepts(a, tuple("#0010#0011$"))
    assert not afa_accepts(a, tuple("#0011#0010$"))


def test_targeted_suites_cover():
    for fam in "AU":
        suite = targeted_suite(fam, P1)
        assert len(suite) >= 200
        assert any(oracle_membership(fam, P1, t) for t in suite)
        assert not all(oracle_membership(fam, P1, t) for t in suite)


def test_agreement_l2_sampled():
    # l=2 for A with random sampling only (plus a few members)
    m = build_gap_monitor("A", P2)
    a = monitor_to_afa(m, ACCEPT)
    rng = random.Random(5)
    traces = random_traces(1500, 30, 11) + minimal_members("A", P2, rng, 30)
    got = afa_accepts_batch(a, [tuple(t) for t in traces])
    assert [bool(g) for g in got] == [oracle_membership("A", P2, t) for t in traces]


@given(st.integers(0, 10**6))
def test_LA_closed_under_extension(seed):
    # closure is under appending (and prepending) arbitrary words, not under taking suffixes
    rng = random.Random(seed)
    t = rng.choice(minimal_members("A", P1, rng, 8))
    before = "".join(rng.choice("01#$") for _ in range(rng.randint(0, 6)))
    after = "".join(rng.choice("01#$") for _ in range(rng.randint(0, 6)))
    assert oracle_membership("A", P1, before + t + after)


def test_LA_not_closed_under_suffixes():
    t = "#0011#$#0011#$"
    assert oracle_membership("A", P1, t) and not oracle_membership("A", P1, t[1:])


@given(seed=st.integers(0, 10**6))
def test_finite_infinite_transfer(seed, gap_dfa_A1):
    rng = random.Random(seed)
    t = "".join(rng.choice("01#$") for _ in range(rng.randint(0, 16)))
    if rng.random() < 0.5:
        t += rng.choice(minimal_members("A", P1, rng, 8))
    assert oracle_membership("A", P1, t) == lasso_member(gap_dfa_A1, tuple(t), ("#",))


def test_tK():
    tp = default_tk_params(P1)
    t = build_tK(tp)
    assert t.count("$") == 2 * (tp.K - 1) - 1 == 5
    for seg in t.split("$"):
        blocks = [b for b in seg.split("#") if b]
        assert blocks and all(in_W(b, P1) for b in blocks)
    with pytest.raises(GuardError):
        default_tk_params(P2)
    with pytest.raises(ValueError):
        TKParams(P1, tp.C, tp.C, tp.P_C, tp.P_D)


def test_pipeline_row_yes():
    row = pipeline_row(parse_monitor("yes", SIGMA))
    sizes = [v for k, v in row.values.items() if isinstance(v, int) and k not in ("l", "k")]
    assert sizes and max(sizes) <= 3


def test_report_U1():
    from monitorkit.gapbench import blowup_report

    row = blowup_report(P1, "U")
    v = row.values
    assert v["regular_l"] > v["parallel_l"]
    assert v["regular_equiv"] is True and v["deterministic_equiv"] is True
    doc = report_doc([row], seed=3)
    assert doc["seed"] == 3 and doc["tool_version"] and doc["plot"]
    assert report_table([row]).count("\n") == 2
