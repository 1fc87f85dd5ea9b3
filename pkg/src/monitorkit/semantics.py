"""Small-step execution of monitors over finite traces.

Frontiers are sets of terms; weak closure is a worklist fixpoint over terms with
structural memoisation.  Parallel monitors can have infinite τ-closures, so every
saturation runs under a :class:`Budget`.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .terms import (
    END,
    NO,
    TAU,
    YES,
    Choice,
    Monitor,
    ParAnd,
    Prefix,
    Rec,
    Term,
    Var,
    Verdict,
    free_vars,
    is_padded,
    show,
)


class OpenTermError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """A τ-saturation or frontier grew past its budget."""

    def __init__(self, message: str, partial: frozenset[Term] = frozenset()):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Budget:
    max_tau_steps_per_action: int = 10_000
    max_frontier_terms: int = 100_000

    def __post_init__(self):
        if self.max_tau_steps_per_action <= 0 or self.max_frontier_terms <= 0:
            raise ValueError("budget limits must be positive")


DEFAULT_BUDGET = Budget()


class Kind(enum.Enum):
    ACCEPTED = "ACCEPTED"
    REJECTED = "REJECTED"
    INCONCLUSIVE = "INCONCLUSIVE"
    BUDGET_EXCEEDED = "BUDGET_EXCEEDED"


@dataclass(frozen=True)
class Outcome:
    """Result of running a monitor on a finite trace.

    ``accept_at``/``reject_at`` are the shortest prefix lengths reaching each
    verdict (``None`` if never reached).  ``kind`` reports the earlier of the two;
    on a tie (only possible for inconsistent monitors) acceptance is reported and
    :attr:`rejected` still holds.
    """

    kind: Kind
    witness_prefix_length: int | None = None
    accept_at: int | None = None
    reject_at: int | None = None

    @property
    def accepted(self) -> bool:
        return self.accept_at is not None

    @property
    def rejected(self) -> bool:
        return self.reject_at is not None

    def __str__(self) -> str:
        if self.witness_prefix_length is None:
            return self.kind.value
        return f"{self.kind.value} at prefix {self.witness_prefix_length}"


class LTS:
    """Transition relation of one closed monitor; caches single steps."""

    def __init__(self, monitor: Monitor):
        if free_vars(monitor.term):
            raise OpenTermError(f"open term: free {sorted(free_vars(monitor.term))}")
        self.monitor = monitor
        self.binders = monitor.binders
        self._cache: dict[tuple[Term, str], frozenset[Term]] = {}

    def step(self, t: Term, label: str) -> frozenset[Term]:
        key = (t, label)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = frozenset(self._step(t, label))
        return hit

    def _step(self, t: Term, label: str) -> set[Term]:
        tau = label == TAU
        if isinstance(t, Verdict):
            return set() if tau else {t}
        if isinstance(t, Prefix):
            return {t.body} if label == t.action else set()
        if isinstance(t, Rec):
            return {t.body} if tau else set()
        if isinstance(t, Var):
            if not tau:
                return set()
            try:
                return {self.binders[t.name]}
            except KeyError:
                raise OpenTermError(f"unbound variable {t.name}") from None
        if isinstance(t, Choice):
            return set(self.step(t.left, label)) | set(self.step(t.right, label))
        op = type(t)
        left, right = t.left, t.right
        if not tau:
            lefts = self.step(left, label)
            if not lefts:
                return set()
            return {op(l2, r2) for l2 in lefts for r2 in self.step(right, label)}
        out = {op(l2, right) for l2 in self.step(left, TAU)}
        out |= {op(left, r2) for r2 in self.step(right, TAU)}
        if left == END and right == END:
            out.add(END)
        if op is ParAnd:
            if left == YES:
                out.add(right)
            if right == YES:
                out.add(left)
            if left == NO or right == NO:
                out.add(NO)
        else:
            if left == NO:
                out.add(right)
            if right == NO:
                out.add(left)
            if left == YES or right == YES:
                out.add(YES)
        return out

    def closure(self, terms: Iterable[Term], limit: int) -> frozenset[Term]:
        seen = set(terms)
        work = deque(seen)
        while work:
            t = work.popleft()
            for u in self.step(t, TAU):
                if u not in seen:
                    seen.add(u)
                    if len(seen) > limit:
                        raise BudgetExceeded(f"τ-closure exceeded {limit} terms", frozenset(seen))
                    work.append(u)
        return frozenset(seen)

    def weak_step(self, frontier: Iterable[Term], action: str, budget: Budget) -> frozenset[Term]:
        nxt: set[Term] = set()
        for t in frontier:
            nxt |= self.step(t, action)
            if len(nxt) > budget.max_frontier_terms:
                raise BudgetExceeded(f"frontier exceeded {budget.max_frontier_terms} terms")
        return self.closure(nxt, budget.max_tau_steps_per_action)


def derivatives(m: Monitor, label: str, state: Term | None = None) -> frozenset[Term]:
    """All ``m'`` with ``state --label--> m'`` (``state`` defaults to the root)."""
    if label != TAU:
        m.alphabet.check_trace([label])
    return LTS(m).step(m.term if state is None else state, label)


def run_finite_trace(
    m: Monitor, trace: Sequence[str], budget: Budget = DEFAULT_BUDGET, lts: LTS | None = None
) -> Outcome:
    trace = m.alphabet.check_trace(trace)
    lts = lts or LTS(m)
    acc = rej = None
    try:
        frontier = lts.closure([m.term], budget.max_tau_steps_per_action)
        for i in range(len(trace) + 1):
            if i:
                frontier = lts.weak_step(frontier, trace[i - 1], budget)
            if acc is None and YES in frontier:
                acc = i
            if rej is None and NO in frontier:
                rej = i
            if (acc is not None and rej is not None) or not frontier:
                break
    except BudgetExceeded as exc:
        if acc is None and YES in exc.partial:
            acc = i
        if rej is None and NO in exc.partial:
            rej = i
        if acc is None and rej is None:
            return Outcome(Kind.BUDGET_EXCEEDED)
    return _outcome(acc, rej)


def _outcome(acc: int | None, rej: int | None) -> Outcome:
    if acc is not None and (rej is None or acc <= rej):
        return Outcome(Kind.ACCEPTED, acc, acc, rej)
    if rej is not None:
        return Outcome(Kind.REJECTED, rej, acc, rej)
    return Outcome(Kind.INCONCLUSIVE)


def run_all_traces(m: Monitor, max_len: int, budget: Budget = DEFAULT_BUDGET) -> dict[tuple[str, ...], Outcome]:
    """Outcomes for every trace of length <= max_len, sharing frontiers along prefixes."""
    lts = LTS(m)
    out: dict[tuple[str, ...], Outcome] = {}

    def visit(trace, frontier, acc, rej):
        n = len(trace)
        if frontier is not None:
            if acc is None and YES in frontier:
                acc = n
            if rej is None and NO in frontier:
                rej = n
        out[trace] = _outcome(acc, rej) if frontier is not None or acc is not None or rej is not None else Outcome(Kind.BUDGET_EXCEEDED)
        if n == max_len:
            return
        for a in m.alphabet:
            nxt = None
            if frontier is not None:
                try:
                    nxt = lts.weak_step(frontier, a, budget)
                except BudgetExceeded:
                    nxt = None
            visit(trace + (a,), nxt, acc, rej)

    try:
        start = lts.closure([m.term], budget.max_tau_steps_per_action)
    except BudgetExceeded:
        start = None
    visit((), start, None, None)
    return out


class Reactivity(enum.Enum):
    REACTIVE = "reactive"
    NOT_REACTIVE = "not_reactive"
    UNKNOWN_AT_BOUND = "unknown_at_bound"


@dataclass(frozen=True)
class ReactivityReport:
    status: Reactivity
    witness_state: Term | None = None
    witness_action: str | None = None
    explored: int = 0
    padded: bool = False

    def __str__(self) -> str:
        if self.status is Reactivity.NOT_REACTIVE:
            return f"NOT REACTIVE: {show(self.witness_state)} cannot perform {self.witness_action}"
        return self.status.value.upper().replace("_", " ")


def check_reactive(m: Monitor, budget: Budget = DEFAULT_BUDGET) -> ReactivityReport:
    """Explore reach(m); every state must weakly perform every action."""
    lts = LTS(m)
    padded = is_padded(m.term)
    seen = {m.term}
    work = deque([m.term])
    while work:
        s = work.popleft()
        try:
            cl = lts.closure([s], budget.max_tau_steps_per_action)
        except BudgetExceeded:
            return ReactivityReport(Reactivity.UNKNOWN_AT_BOUND, explored=len(seen), padded=padded)
        for a in m.alphabet:
            succ = set()
            for t in cl:
                succ |= lts.step(t, a)
            if not succ:
                return ReactivityReport(Reactivity.NOT_REACTIVE, s, a, len(seen), padded)
        for label in (TAU, *m.alphabet):
            for u in lts.step(s, label):
                if u not in seen:
                    seen.add(u)
                    if len(seen) > budget.max_frontier_terms:
                        return ReactivityReport(Reactivity.UNKNOWN_AT_BOUND, explored=len(seen), padded=padded)
                    work.append(u)
    return ReactivityReport(Reactivity.REACTIVE, explored=len(seen), padded=padded)


def check_consistent(m: Monitor) -> bool:
    """True iff no finite trace is both accepted and rejected (decided on NFAs)."""
    from .automata import ACCEPT, REJECT, afa_to_nfa, monitor_to_afa, nfa_intersection_empty

    na = afa_to_nfa(monitor_to_afa(m, ACCEPT))
    nr = afa_to_nfa(monitor_to_afa(m, REJECT))
    return nfa_intersection_empty(na, nr)
