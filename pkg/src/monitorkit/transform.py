"""Monitor-to-monitor transformations and the two equivalence checks."""

from __future__ import annotations

from collections import deque
from dataclasses import asdict, dataclass, field

from .automata import (
    ACCEPT,
    DEFAULT_MAX_TERM_SIZE,
    DFA,
    NFA,
    REJECT,
    Polarity,
    _check_same_alphabet,
    afa_to_dfa,
    afa_to_nfa,
    dfa_language_equal,
    dfa_product,
    dfa_to_deterministic,
    dfa_to_monitor,
    extension_close,
    monitor_to_afa,
    nfa_to_dfa,
    nfa_to_monitor,
    omega_normalize,
)
from .semantics import LTS, Budget, OpenTermError, Reactivity, check_consistent, check_reactive
from .terms import (
    END,
    NO,
    YES,
    Choice,
    Monitor,
    Prefix,
    Rec,
    Term,
    Var,
    Verdict,
    choice,
    free_vars,
    is_padded,
    pad,
    subterms,
    summands,
)

ACCEPT_MARKER = "✓"
REJECT_MARKER = "✗"


class InconsistentMonitorError(ValueError):
    pass


class NotRegularError(ValueError):
    pass


class NotReactiveError(ValueError):
    pass


@dataclass
class SizeLedger:
    input_size: int
    afa_states: dict = field(default_factory=dict)
    nfa_states: dict = field(default_factory=dict)
    dfa_states: dict = field(default_factory=dict)
    output_size: int | None = None

    def as_dict(self) -> dict:
        return asdict(self)

    def lines(self) -> list[str]:
        out = [f"input l = {self.input_size}"]
        for name, table in (("AFA", self.afa_states), ("NFA", self.nfa_states), ("DFA", self.dfa_states)):
            for pol, n in table.items():
                out.append(f"{name} states ({pol}) = {n}")
        if self.output_size is not None:
            out.append(f"output l = {self.output_size}")
        return out


@dataclass(frozen=True)
class Options:
    """Guards and preprocessing shared by the transformations."""

    pad: bool = False
    strict: bool = False
    max_states: int | None = 200_000
    max_size: int = DEFAULT_MAX_TERM_SIZE
    budget: Budget = Budget()


DEFAULT_OPTIONS = Options()


def _prepare(m: Monitor, opts: Options) -> Monitor:
    if free_vars(m.term):
        raise OpenTermError(f"open term: free {sorted(free_vars(m.term))}")
    if opts.pad:
        m = Monitor(pad(m.term), m.alphabet)
    if opts.strict and not m.regular and not is_padded(m.term):
        rep = check_reactive(m, opts.budget)
        if rep.status is not Reactivity.REACTIVE:
            raise NotReactiveError(f"parallel input is neither padded nor reactive: {rep}")
    return m


def _closed_nfas(m: Monitor, opts: Options, ledger: SizeLedger | None) -> tuple[NFA, NFA]:
    out = []
    for pol in (ACCEPT, REJECT):
        afa = monitor_to_afa(m, pol)
        nfa = extension_close(afa_to_nfa(afa, opts.max_states))
        if ledger is not None:
            ledger.afa_states[pol.value] = afa.n_states
            ledger.nfa_states[pol.value] = nfa.n_states
        out.append(nfa)
    return out[0], out[1]


def parallel_to_regular(m: Monitor, opts: Options = DEFAULT_OPTIONS, ledger: SizeLedger | None = None) -> Monitor:
    """Verdict-equivalent regular monitor: unfold the acceptance and rejection NFAs."""
    m = _prepare(m, opts)
    na, nr = _closed_nfas(m, opts, ledger)
    ma = nfa_to_monitor(na, YES, opts.max_size)
    mr = nfa_to_monitor(nr, NO, opts.max_size)
    parts = [t for t in (ma.term, mr.term) if t != END]
    if len(parts) == 2:
        # a verdict summand only counts after an action; a silent unfolding
        # keeps a verdict reached on the empty trace
        parts = [Rec(f"v{i}", t) if isinstance(t, Verdict) else t for i, t in enumerate(parts)]
    out = Monitor(choice(*parts) if parts else END, m.alphabet)
    if ledger is not None:
        ledger.output_size = out.size()
    return out


def _verdict_product(da: DFA, dr: DFA) -> tuple[DFA, dict[int, Verdict]]:
    prod, pairs = dfa_product(da, dr)
    verdicts: dict[int, Verdict] = {}
    for i, (p, q) in enumerate(pairs):
        acc, rej = bool(da.accepting[p]), bool(dr.accepting[q])
        if acc and rej:
            raise InconsistentMonitorError("some trace is both accepted and rejected")
        if acc:
            verdicts[i] = YES
        elif rej:
            verdicts[i] = NO
    return prod, verdicts


def determinize_regular(m: Monitor, opts: Options = DEFAULT_OPTIONS, ledger: SizeLedger | None = None) -> Monitor:
    """Deterministic monitor verdict-equivalent to a consistent regular monitor.

    The acceptance and rejection DFAs are run as one synchronous product so the
    resulting sums stay action-deterministic.
    """
    m = _prepare(m, opts)
    if not m.regular:
        raise NotRegularError("determinize_regular needs a regular monitor; use parallel_to_deterministic")
    if not check_consistent(m):
        raise InconsistentMonitorError("monitor is inconsistent")
    na, nr = _closed_nfas(m, opts, ledger)
    da = extension_close(nfa_to_dfa(na, opts.max_states))
    dr = extension_close(nfa_to_dfa(nr, opts.max_states))
    if ledger is not None:
        ledger.dfa_states.update({ACCEPT.value: da.n_states, REJECT.value: dr.n_states})
    prod, verdicts = _verdict_product(da, dr)
    out = dfa_to_deterministic(prod, verdicts, opts.max_size)
    if ledger is not None:
        ledger.output_size = out.size()
    return out


def marker_nfa(na: NFA, nr: NFA) -> NFA:
    """Union of the two NFAs over Act ∪ {✓, ✗}: accepting states of the first
    emit ✓, of the second ✗, into one fresh final state."""
    _check_same_alphabet(na, nr)
    base = na.alphabet
    ext = base.extended(ACCEPT_MARKER, REJECT_MARKER)
    k = len(base)
    off = na.n_states
    final = na.n_states + nr.n_states
    none = frozenset()
    delta = []
    for q in range(na.n_states):
        row = list(na.delta[q]) + [frozenset({final}) if q in na.accepting else none, none]
        delta.append(tuple(row))
    for q in range(nr.n_states):
        row = [frozenset(p + off for p in nr.delta[q][x]) for x in range(k)]
        row += [none, frozenset({final}) if q in nr.accepting else none]
        delta.append(tuple(row))
    delta.append(tuple(frozenset({final}) for _ in range(k + 2)))
    initial = frozenset(na.initial) | frozenset(p + off for p in nr.initial)
    return NFA(ext, final + 1, initial, tuple(delta), frozenset({final}))


def substitute_markers(t: Term) -> Term:
    """Replace maximal sums holding ✓.yes by yes and those holding ✗.yes by no;
    drop binders made vacuous (rec x.v becomes v)."""
    if isinstance(t, (Verdict, Var)):
        return t
    if isinstance(t, Rec):
        body = substitute_markers(t.body)
        if isinstance(body, Verdict) or t.var not in free_vars(body):
            return body
        return Rec(t.var, body)
    if not isinstance(t, (Choice, Prefix)):
        return type(t)(substitute_markers(t.left), substitute_markers(t.right))
    parts = summands(t)
    marks = {p.action for p in parts if isinstance(p, Prefix) and p.action in (ACCEPT_MARKER, REJECT_MARKER)}
    if len(marks) == 2:
        raise InconsistentMonitorError("a sum offers both markers: the monitor is inconsistent")
    if marks:
        return YES if ACCEPT_MARKER in marks else NO
    return choice(*(Prefix(p.action, substitute_markers(p.body)) if isinstance(p, Prefix) else substitute_markers(p) for p in parts))


def parallel_to_deterministic(
    m: Monitor, opts: Options = DEFAULT_OPTIONS, ledger: SizeLedger | None = None, literal: bool = False
) -> Monitor:
    """Deterministic monitor verdict-equivalent to a consistent (parallel) monitor.

    Determinises the marker NFA and reads verdicts off the ✓/✗ exits.  With
    ``literal=True`` the marked deterministic monitor is built in full over the
    extended alphabet and then rewritten by :func:`substitute_markers`; the
    default applies the same rewrite while unfolding, which never expands states
    whose sum would be replaced.
    """
    m = _prepare(m, opts)
    if not check_consistent(m):
        raise InconsistentMonitorError("monitor is inconsistent")
    na, nr = _closed_nfas(m, opts, ledger)
    n = marker_nfa(na, nr)
    d = extension_close(nfa_to_dfa(n, opts.max_states))
    if ledger is not None:
        ledger.nfa_states["marker"] = n.n_states
        ledger.dfa_states["marker"] = d.n_states
    if literal:
        marked = dfa_to_monitor(d, YES, opts.max_size)
        out = Monitor(substitute_markers(marked.term), m.alphabet)
    else:
        k = len(m.alphabet)
        verdicts: dict[int, Verdict] = {}
        for s in range(d.n_states):
            if d.accepting[s]:
                continue
            ok = bool(d.accepting[d.trans[s, k]])
            bad = bool(d.accepting[d.trans[s, k + 1]])
            if ok and bad:
                raise InconsistentMonitorError("a state offers both markers: the monitor is inconsistent")
            if ok or bad:
                verdicts[s] = YES if ok else NO
        base = DFA(m.alphabet, d.trans[:, :k].copy(), d.accepting.copy(), d.initial)
        out = dfa_to_deterministic(base, verdicts, opts.max_size)
    if ledger is not None:
        ledger.output_size = out.size()
    return out


# ---------------------------------------------------------------------------
# Equivalence


@dataclass(frozen=True)
class Counterexample:
    polarity: Polarity
    trace: tuple
    lasso: tuple | None = None  # (u, v) in omega mode

    def describe(self, alphabet) -> str:
        if self.lasso is not None:
            u, v = self.lasso
            return f"{self.polarity.value}: {alphabet.format_trace(u)}:{alphabet.format_trace(v)}"
        return f"{self.polarity.value}: {alphabet.format_trace(self.trace)}"


def verdict_dfa(m: Monitor, polarity: Polarity, max_states: int | None = None) -> DFA:
    """Extension-closed DFA of L_a(m) or L_r(m)."""
    return extension_close(afa_to_dfa(monitor_to_afa(m, polarity), max_states))


def check_equivalence(m1: Monitor, m2: Monitor, mode: str = "verdict", max_states: int | None = None):
    """True, or a :class:`Counterexample` (shortest, acceptance side first)."""
    if mode not in ("verdict", "omega"):
        raise ValueError("mode must be 'verdict' or 'omega'")
    _check_same_alphabet(m1, m2)
    found = []
    for pol in (ACCEPT, REJECT):
        d1, d2 = verdict_dfa(m1, pol, max_states), verdict_dfa(m2, pol, max_states)
        if mode == "verdict":
            res = dfa_language_equal(d1, d2)
            if res is not True:
                found.append(Counterexample(pol, res))
        else:
            n1, n2 = omega_normalize(d1), omega_normalize(d2)
            res = dfa_language_equal(n1, n2)
            if res is not True:
                u, v = _lasso_witness(n1, n2, res)
                found.append(Counterexample(pol, res, (u, v)))
    if not found:
        return True
    return min(found, key=lambda c: (len(c.trace) + (len(c.lasso[1]) if c.lasso else 0),))


def _lasso_witness(n1: DFA, n2: DFA, prefix: tuple) -> tuple[tuple, tuple]:
    """After ``prefix`` exactly one normalized DFA accepts.  The other one sits
    in a state with an accepting-free infinite path; follow the first such
    successor until a state repeats."""
    p, q = n1.run(prefix), n2.run(prefix)
    d, s = (n2, q) if n1.accepting[p] else (n1, p)
    acts = d.alphabet.actions
    seen: dict[int, int] = {}
    labels: list[str] = []
    while s not in seen:
        seen[s] = len(labels)
        for i in range(len(acts)):
            y = int(d.trans[s, i])
            if not d.accepting[y]:
                labels.append(acts[i])
                s = y
                break
        else:  # pragma: no cover - excluded by normalization
            raise RuntimeError("normalized DFA has a dead non-accepting state")
    cut = seen[s]
    return tuple(prefix) + tuple(labels[:cut]), tuple(labels[cut:])


# ---------------------------------------------------------------------------
# Validity checks on outputs


def two_yes_witness(m: Monitor):
    """For a regular monitor with a reachable sum holding a.yes and b.yes (a ≠ b),
    find a trace t, not itself accepted, with t·a and t·b accepted.  Returns
    None if the monitor has no such sum, else (a, b, t) or raises if no t exists."""
    pairs = set()
    for s in subterms(m.term):
        if isinstance(s, (Choice, Prefix)):
            yes_acts = sorted({p.action for p in summands(s) if isinstance(p, Prefix) and p.body == YES})
            for i, a in enumerate(yes_acts):
                for b in yes_acts[i + 1 :]:
                    pairs.add((a, b))
    if not pairs:
        return None
    d = verdict_dfa(m, ACCEPT)
    acts = d.alphabet.actions
    a, b = min(pairs)
    ia, ib = d.alphabet.index(a), d.alphabet.index(b)
    parent = {d.initial: None}
    work = deque([d.initial])
    while work:
        x = work.popleft()
        if not d.accepting[x] and d.accepting[d.trans[x, ia]] and d.accepting[d.trans[x, ib]]:
            path = []
            node = x
            while parent[node] is not None:
                node, j = parent[node]
                path.append(acts[j])
            return a, b, tuple(reversed(path))
        if d.accepting[x]:
            continue
        for j in range(len(acts)):
            y = int(d.trans[x, j])
            if y not in parent:
                parent[y] = (x, j)
                work.append(y)
    raise AssertionError(f"no trace accepts both continuations {a} and {b}")


def immediate_yes_violations(m: Monitor) -> list[Term]:
    """Subterms other than yes that reach yes by silent steps alone."""
    lts = LTS(m)
    out = []
    for s in set(subterms(m.term)):
        if s == YES or isinstance(s, Var) and s.name not in m.binders:
            continue
        if YES in lts.closure([s], 100_000):
            out.append(s)
    return out
