import os
import random

import pytest
from hypothesis import HealthCheck, settings

from monitorkit.corpus import AB, random_term
from monitorkit.terms import Monitor, pad

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.register_profile("long", deadline=None, max_examples=400, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def seeded_monitor(seed, parallel=True, depth=4, padded=True):
    t = random_term(random.Random(seed), depth, AB, parallel)
    return Monitor(pad(t) if padded else t, AB)


@pytest.fixture(scope="session")
def gap_dfa_A1():
    """Extension-closed acceptance DFA of m_A for l=1 (slow to build, shared)."""
    from monitorkit.automata import ACCEPT
    from monitorkit.gapbench import GapParams, build_gap_monitor
    from monitorkit.transform import verdict_dfa

    return verdict_dfa(build_gap_monitor("A", GapParams(1)), ACCEPT, 500_000)


ACCEPTANCE = {}


def record(criterion, ok, detail):
    ACCEPTANCE[criterion] = (bool(ok), detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
