"""Alternating, nondeterministic and deterministic automata for monitor languages.

Positive boolean formulas are kept in a canonical DNF: a frozenset of cubes, each
cube a frozenset of state indices.  ``TRUE`` is the set holding the empty cube and
``FALSE`` the empty set; absorption keeps only minimal cubes.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .semantics import OpenTermError
from .terms import (
    END,
    NO,
    YES,
    Alphabet,
    AlphabetError,
    Choice,
    Monitor,
    ParAnd,
    ParOr,
    Prefix,
    Rec,
    Term,
    Var,
    Verdict,
    choice,
    free_vars,
    show,
)

DNF = frozenset  # frozenset[frozenset[int]]
TRUE: DNF = frozenset({frozenset()})
FALSE: DNF = frozenset()


class Polarity(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"


ACCEPT = Polarity.ACCEPT
REJECT = Polarity.REJECT


class ResourceGuardExceeded(RuntimeError):
    """A construction would exceed its configured state or size guard."""


class NotExtensionClosed(ValueError):
    pass


# ---------------------------------------------------------------------------
# DNF helpers


def absorb(cubes: Iterable[frozenset]) -> DNF:
    ordered = sorted(set(cubes), key=len)
    kept: list[frozenset] = []
    for c in ordered:
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


def dnf_or(a: DNF, b: DNF) -> DNF:
    if a == TRUE or b == TRUE:
        return TRUE
    if not a:
        return b
    if not b:
        return a
    return absorb(a | b)


def dnf_and(a: DNF, b: DNF) -> DNF:
    if not a or not b:
        return FALSE
    if a == TRUE:
        return b
    if b == TRUE:
        return a
    return absorb(x | y for x in a for y in b)


def dnf_atom(i: int) -> DNF:
    return frozenset({frozenset({i})})


def dnf_eval(f: DNF, value: Callable[[int], bool] | Sequence[bool]) -> bool:
    get = value.__getitem__ if not callable(value) else value
    return any(all(get(q) for q in cube) for cube in f)


def dnf_substitute(f: DNF, table: Sequence[DNF]) -> DNF:
    """Replace each atom q of ``f`` by ``table[q]``."""
    out = FALSE
    for cube in f:
        acc = TRUE
        for q in cube:
            acc = dnf_and(acc, table[q])
            if not acc:
                break
        out = dnf_or(out, acc)
        if out == TRUE:
            break
    return out


def dnf_str(f: DNF, name: Callable[[int], str] = str) -> str:
    if f == TRUE:
        return "TRUE"
    if not f:
        return "FALSE"
    parts = []
    for cube in sorted(f, key=lambda c: (len(c), sorted(c))):
        atoms = [name(q) for q in sorted(cube)]
        parts.append(" ∧ ".join(atoms) if len(atoms) > 1 else atoms[0])
    return " ∨ ".join(f"({p})" if "∧" in p and len(f) > 1 else p for p in parts)


# ---------------------------------------------------------------------------
# AFA


@dataclass(frozen=True, eq=False)
class AFA:
    alphabet: Alphabet
    states: tuple  # labels (monitor subterms when built from a monitor)
    initial: DNF
    delta: tuple  # delta[q][a] -> DNF
    accepting: frozenset
    polarity: Polarity | None = None

    @property
    def n_states(self) -> int:
        return len(self.states)

    def compile(self):
        """CSR tables for the batch kernels."""
        n, k = self.n_states, len(self.alphabet)
        cube_atoms: list[int] = []
        cube_ptr = [0]
        atom_cubes = np.zeros((k, n + 1), dtype=np.int64)
        for a in range(k):
            for q in range(n):
                atom_cubes[a, q] = len(cube_ptr) - 1
                for cube in sorted(self.delta[q][a], key=sorted):
                    cube_atoms.extend(sorted(cube))
                    cube_ptr.append(len(cube_atoms))
            atom_cubes[a, n] = len(cube_ptr) - 1
        init_atoms: list[int] = []
        init_ptr = [0]
        for cube in sorted(self.initial, key=sorted):
            init_atoms.extend(sorted(cube))
            init_ptr.append(len(init_atoms))
        acc = np.zeros(n, dtype=np.bool_)
        acc[list(self.accepting)] = True
        return (
            np.asarray(cube_atoms, dtype=np.int64),
            np.asarray(cube_ptr, dtype=np.int64),
            atom_cubes,
            acc,
            np.asarray(init_atoms, dtype=np.int64),
            np.asarray(init_ptr, dtype=np.int64),
        )


def monitor_to_afa(m: Monitor, polarity: Polarity = ACCEPT) -> AFA:
    """Alternating automaton over the submonitors of ``m`` for L_a(m) or L_r(m).

    Exact for reactive (or padded) monitors; parallel compositions become
    conjunctions/disjunctions of their components.
    """
    if free_vars(m.term):
        raise OpenTermError(f"open term: free {sorted(free_vars(m.term))}")
    target = YES if polarity is ACCEPT else NO
    conj = ParAnd if polarity is ACCEPT else ParOr
    binders = m.binders
    acts = m.alphabet.actions

    # Distinct subterms, children first.
    order: list[Term] = []
    seen: set[Term] = set()

    def collect(t: Term) -> None:
        stack = [(t, False)]
        while stack:
            s, done = stack.pop()
            if done:
                order.append(s)
                continue
            if s in seen:
                continue
            seen.add(s)
            stack.append((s, True))
            if isinstance(s, (Prefix, Rec)):
                stack.append((s.body, False))
            elif isinstance(s, (Choice, ParAnd, ParOr)):
                stack.append((s.right, False))
                stack.append((s.left, False))

    collect(m.term)

    def resolve(t: Term) -> Term:
        return binders[t.name] if isinstance(t, Var) else t

    # now(t): t reaches the target verdict by τ-steps alone (least fixpoint);
    # plus(t): the same with at least one step.
    now = {t: False for t in order}
    plus = {t: False for t in order}
    changed = True
    while changed:
        changed = False
        for t in order:
            if isinstance(t, Verdict):
                n_, p_ = t == target, False
            elif isinstance(t, Prefix):
                n_ = p_ = False
            elif isinstance(t, Choice):
                n_ = p_ = plus[t.left] or plus[t.right]
            elif isinstance(t, Rec):
                n_ = p_ = now[t.body]
            elif isinstance(t, Var):
                n_ = p_ = now[resolve(t)]
            elif isinstance(t, conj):
                n_ = p_ = now[t.left] and now[t.right]
            else:
                n_ = p_ = now[t.left] or now[t.right]
            if n_ != now[t] or p_ != plus[t]:
                now[t], plus[t] = n_, p_
                changed = True

    index: dict[Term, int] = {}

    def is_atom(t: Term) -> bool:
        return not isinstance(t, (ParAnd, ParOr, Var)) and not (isinstance(t, Verdict) and t != target)

    for t in order:
        if is_atom(t):
            index[t] = len(index)

    def E(t: Term) -> DNF:
        t = resolve(t)
        if isinstance(t, Verdict) and t != target:
            return FALSE
        if isinstance(t, (ParAnd, ParOr)):
            return (dnf_and if isinstance(t, conj) else dnf_or)(E(t.left), E(t.right))
        return dnf_atom(index[t])

    # D[t][a]: t accepts a·rest, as a formula over the atoms' values on rest.
    D = {t: [FALSE] * len(acts) for t in order}
    changed = True
    while changed:
        changed = False
        for t in order:
            row = D[t]
            for ai, a in enumerate(acts):
                if now[t]:
                    f = TRUE
                elif isinstance(t, Verdict):
                    f = FALSE
                elif isinstance(t, Prefix):
                    f = E(t.body) if t.action == a else FALSE
                elif isinstance(t, Choice):
                    f = dnf_or(D[t.left][ai], D[t.right][ai])
                elif isinstance(t, Rec):
                    f = D[t.body][ai]
                elif isinstance(t, Var):
                    f = D[resolve(t)][ai]
                elif isinstance(t, conj):
                    f = dnf_and(D[t.left][ai], D[t.right][ai])
                else:
                    f = dnf_or(D[t.left][ai], D[t.right][ai])
                if f != row[ai]:
                    row[ai] = f
                    changed = True

    atoms = list(index)
    delta = [[D[t][ai] for ai in range(len(acts))] for t in atoms]
    accepting = {index[t] for t in atoms if now[t]}
    return reduce_afa(
        _prune_afa(
            AFA(m.alphabet, tuple(atoms), E(m.term), tuple(tuple(r) for r in delta), frozenset(accepting), polarity)
        )
    )


def _prune_afa(a: AFA) -> AFA:
    """Fold states that can never accept into FALSE, then keep reachable states."""
    n, k = a.n_states, len(a.alphabet)
    live = [q in a.accepting for q in range(n)]
    changed = True
    while changed:
        changed = False
        for q in range(n):
            if not live[q] and any(any(all(live[p] for p in cube) for cube in a.delta[q][x]) for x in range(k)):
                live[q] = True
                changed = True

    def keep(f: DNF) -> DNF:
        return frozenset(c for c in f if all(live[p] for p in c))

    init = keep(a.initial)
    reach: list[int] = []
    pos: dict[int, int] = {}
    work = deque(sorted({q for c in init for q in c}))
    for q in work:
        pos[q] = len(reach)
        reach.append(q)
    while work:
        q = work.popleft()
        for x in range(k):
            for c in keep(a.delta[q][x]):
                for p in sorted(c):
                    if p not in pos:
                        pos[p] = len(reach)
                        reach.append(p)
                        work.append(p)

    def remap(f: DNF) -> DNF:
        return frozenset(frozenset(pos[p] for p in c) for c in keep(f))

    return AFA(
        a.alphabet,
        tuple(a.states[q] for q in reach),
        remap(a.initial),
        tuple(tuple(remap(a.delta[q][x]) for x in range(k)) for q in reach),
        frozenset(pos[q] for q in reach if q in a.accepting),
        a.polarity,
    )


def reduce_afa(a: AFA) -> AFA:
    """Quotient by the coarsest bisimulation: states are merged when they agree
    on acceptance and their transition formulas coincide up to the partition.
    Merged states recognise the same language.  The representative of a class
    is its first member."""
    n, k = a.n_states, len(a.alphabet)
    block = [int(q in a.accepting) for q in range(n)]
    count = len(set(block))
    while True:
        sigs: dict = {}
        new = []
        for q in range(n):
            sig = (block[q],) + tuple(absorb(frozenset(block[p] for p in c) for c in a.delta[q][x]) for x in range(k))
            new.append(sigs.setdefault(sig, len(sigs)))
        block = new
        if len(sigs) == count:
            break
        count = len(sigs)
    reps: dict[int, int] = {}
    for q in range(n):
        reps.setdefault(block[q], q)
    if len(reps) == n:
        return a
    order = sorted(reps.values())
    pos = {block[q]: i for i, q in enumerate(order)}

    def remap(f: DNF) -> DNF:
        return absorb(frozenset(pos[block[p]] for p in c) for c in f)

    return AFA(
        a.alphabet,
        tuple(a.states[q] for q in order),
        remap(a.initial),
        tuple(tuple(remap(a.delta[q][x]) for x in range(k)) for q in order),
        frozenset(i for i, q in enumerate(order) if q in a.accepting),
        a.polarity,
    )


def afa_accepts(a: AFA, trace: Sequence[str]) -> bool:
    """Reference evaluator: backward induction over the trace."""
    trace = a.alphabet.check_trace(trace)
    vals = [q in a.accepting for q in range(a.n_states)]
    for act in reversed(trace):
        x = a.alphabet.index(act)
        vals = [dnf_eval(a.delta[q][x], vals) for q in range(a.n_states)]
    return dnf_eval(a.initial, vals)


def afa_accepts_batch(a: AFA, traces: Sequence[Sequence[str]], backend: str | None = None) -> np.ndarray:
    if not traces:
        return np.zeros(0, dtype=bool)
    enc, lengths = _kernels.encode_traces(traces, {x: i for i, x in enumerate(a.alphabet)})
    if a.n_states == 0:
        return np.full(len(traces), a.initial == TRUE)
    return _kernels.afa_eval(a.compile(), enc, lengths, backend)


# ---------------------------------------------------------------------------
# NFA / DFA


@dataclass(frozen=True, eq=False)
class NFA:
    alphabet: Alphabet
    n_states: int
    initial: frozenset
    delta: tuple  # delta[q][a] -> frozenset of states
    accepting: frozenset
    labels: tuple | None = None

    def step(self, states: Iterable[int], a: int) -> frozenset:
        out: set[int] = set()
        for q in states:
            out |= self.delta[q][a]
        return frozenset(out)

    def accepts(self, trace: Sequence[str]) -> bool:
        cur = self.initial
        for act in self.alphabet.check_trace(trace):
            cur = self.step(cur, self.alphabet.index(act))
        return bool(cur & self.accepting)

    @property
    def extension_closed(self) -> bool:
        return all(self.delta[q][x] == frozenset({q}) for q in self.accepting for x in range(len(self.alphabet)))

    def coaccessible(self) -> list[bool]:
        """States from which an accepting state is reachable."""
        rev: list[set[int]] = [set() for _ in range(self.n_states)]
        for q in range(self.n_states):
            for succ in self.delta[q]:
                for p in succ:
                    rev[p].add(q)
        ok = [False] * self.n_states
        work = deque(self.accepting)
        for q in self.accepting:
            ok[q] = True
        while work:
            p = work.popleft()
            for q in rev[p]:
                if not ok[q]:
                    ok[q] = True
                    work.append(q)
        return ok


@dataclass(frozen=True, eq=False)
class DFA:
    alphabet: Alphabet
    trans: np.ndarray  # (n, k) int
    accepting: np.ndarray  # (n,) bool
    initial: int = 0
    labels: tuple | None = None

    @property
    def n_states(self) -> int:
        return int(self.trans.shape[0])

    def run(self, trace: Sequence[str], start: int | None = None) -> int:
        s = self.initial if start is None else start
        for act in trace:
            s = int(self.trans[s, self.alphabet.index(act)])
        return s

    def accepts(self, trace: Sequence[str]) -> bool:
        return bool(self.accepting[self.run(self.alphabet.check_trace(trace))])

    @property
    def extension_closed(self) -> bool:
        idx = np.nonzero(self.accepting)[0]
        return bool(np.all(self.trans[idx] == idx[:, None]))

    def first_accept_batch(self, traces: Sequence[Sequence[str]], backend: str | None = None) -> np.ndarray:
        """Shortest accepted prefix length of each trace, -1 if none."""
        if not traces:
            return np.zeros(0, dtype=np.int64)
        enc, lengths = _kernels.encode_traces(traces, {x: i for i, x in enumerate(self.alphabet)})
        return _kernels.dfa_first_accept(self.trans, self.accepting, self.initial, enc, lengths, backend)

    def coaccessible(self) -> np.ndarray:
        n = self.n_states
        ok = self.accepting.copy()
        rev: list[list[int]] = [[] for _ in range(n)]
        for q in range(n):
            for p in set(self.trans[q].tolist()):
                rev[p].append(q)
        work = deque(np.nonzero(ok)[0].tolist())
        while work:
            p = work.popleft()
            for q in rev[p]:
                if not ok[q]:
                    ok[q] = True
                    work.append(q)
        return ok


def afa_to_nfa(a: AFA, max_states: int | None = None) -> NFA:
    """Powerset construction: NFA states are conjunctive sets (cubes) of AFA states."""
    k = len(a.alphabet)
    index: dict[frozenset, int] = {}
    cubes: list[frozenset] = []

    def intern(c: frozenset) -> int:
        i = index.get(c)
        if i is None:
            i = index[c] = len(cubes)
            cubes.append(c)
            if max_states is not None and len(cubes) > max_states:
                raise ResourceGuardExceeded(f"NFA exceeds {max_states} states")
        return i

    init = frozenset(intern(c) for c in sorted(a.initial, key=sorted))
    delta: list[list[frozenset]] = []
    i = 0
    while i < len(cubes):
        c = cubes[i]
        row = []
        for x in range(k):
            f = TRUE
            for q in c:
                f = dnf_and(f, a.delta[q][x])
                if not f:
                    break
            row.append(frozenset(intern(d) for d in sorted(f, key=sorted)))
        delta.append(row)
        i += 1
    accepting = frozenset(j for j, c in enumerate(cubes) if c <= a.accepting)
    labels = tuple(tuple(sorted(c)) for c in cubes)
    return NFA(a.alphabet, len(cubes), init, tuple(tuple(r) for r in delta), accepting, labels)


def nfa_to_dfa(n: NFA, max_states: int | None = None) -> DFA:
    """Subset construction with reachable pruning; the empty set is the sink."""
    k = len(n.alphabet)
    index: dict[frozenset, int] = {n.initial: 0}
    sets = [n.initial]
    rows: list[list[int]] = []
    i = 0
    while i < len(sets):
        s = sets[i]
        row = []
        for x in range(k):
            t = n.step(s, x)
            j = index.get(t)
            if j is None:
                j = index[t] = len(sets)
                sets.append(t)
                if max_states is not None and len(sets) > max_states:
                    raise ResourceGuardExceeded(f"DFA exceeds {max_states} states")
            row.append(j)
        rows.append(row)
        i += 1
    trans = np.asarray(rows, dtype=np.int64).reshape(len(sets), k)
    accepting = np.array([bool(s & n.accepting) for s in sets], dtype=bool)
    return DFA(n.alphabet, trans, accepting, 0, tuple(tuple(sorted(s)) for s in sets))


def afa_to_dfa(a: AFA, max_states: int | None = None) -> DFA:
    """Direct determinisation: DFA states are canonical DNFs (antichains of cubes).

    Recognises the same language as ``nfa_to_dfa(afa_to_nfa(a))`` with
    absorption merging subsets whose cube sets are equivalent.
    """
    k = len(a.alphabet)
    index = {a.initial: 0}
    forms = [a.initial]
    rows = []
    i = 0
    while i < len(forms):
        f = forms[i]
        row = []
        for x in range(k):
            g = dnf_substitute(f, [a.delta[q][x] for q in range(a.n_states)])
            j = index.get(g)
            if j is None:
                j = index[g] = len(forms)
                forms.append(g)
                if max_states is not None and len(forms) > max_states:
                    raise ResourceGuardExceeded(f"DFA exceeds {max_states} states")
            row.append(j)
        rows.append(row)
        i += 1
    trans = np.asarray(rows, dtype=np.int64).reshape(len(forms), k)
    accepting = np.array([any(c <= a.accepting for c in f) for f in forms], dtype=bool)
    return DFA(a.alphabet, trans, accepting, 0, None)


def extension_close(x):
    """Make every accepting state absorbing: recognises {t : some prefix of t ∈ L}."""
    if isinstance(x, DFA):
        trans = x.trans.copy()
        idx = np.nonzero(x.accepting)[0]
        trans[idx] = idx[:, None]
        return DFA(x.alphabet, trans, x.accepting.copy(), x.initial, x.labels)
    if isinstance(x, NFA):
        k = len(x.alphabet)
        delta = tuple(
            tuple(frozenset({q}) for _ in range(k)) if q in x.accepting else x.delta[q] for q in range(x.n_states)
        )
        return NFA(x.alphabet, x.n_states, x.initial, delta, x.accepting, x.labels)
    raise TypeError(f"expected NFA or DFA, got {type(x).__name__}")


def omega_normalize(d: DFA) -> DFA:
    """For an extension-closed DFA, mark every state from which acceptance is
    unavoidable as accepting.  Two such DFAs have equal languages iff their
    ω-extensions L·Σ^ω coincide."""
    if not d.extension_closed:
        raise NotExtensionClosed("omega_normalize needs an extension-closed DFA")
    # safe: non-accepting states with an infinite accepting-free path (gfp)
    safe = ~d.accepting.copy()
    changed = True
    while changed:
        new = safe & safe[d.trans].any(axis=1)
        changed = bool((new != safe).any())
        safe = new
    acc = ~safe
    trans = d.trans.copy()
    idx = np.nonzero(acc)[0]
    trans[idx] = idx[:, None]
    return DFA(d.alphabet, trans, acc, d.initial, d.labels)


def _check_same_alphabet(x, y) -> None:
    if x.alphabet != y.alphabet:
        raise AlphabetError(f"alphabet mismatch: {list(x.alphabet)} vs {list(y.alphabet)}")


def dfa_language_equal(d1: DFA, d2: DFA):
    """True, or a shortest distinguishing trace (ties broken by alphabet order)."""
    _check_same_alphabet(d1, d2)
    acts = d1.alphabet.actions
    start = (d1.initial, d2.initial)
    parent: dict[tuple[int, int], tuple | None] = {start: None}
    work = deque([start])
    while work:
        p = work.popleft()
        if bool(d1.accepting[p[0]]) != bool(d2.accepting[p[1]]):
            return _path(parent, p, acts)
        for x in range(len(acts)):
            q = (int(d1.trans[p[0], x]), int(d2.trans[p[1], x]))
            if q not in parent:
                parent[q] = (p, x)
                work.append(q)
    return True


def _path(parent, node, acts) -> tuple[str, ...]:
    out = []
    while parent[node] is not None:
        node, x = parent[node]
        out.append(acts[x])
    return tuple(reversed(out))


def lasso_member(d: DFA, u: Sequence[str], v: Sequence[str]) -> bool:
    """Does u·v^ω have a prefix in L(d)?"""
    if not v:
        raise ValueError("lasso period must be non-empty")
    u = d.alphabet.check_trace(u)
    v = d.alphabet.check_trace(v)
    s = d.initial
    if d.accepting[s]:
        return True
    for act in u:
        s = int(d.trans[s, d.alphabet.index(act)])
        if d.accepting[s]:
            return True
    seen = set()
    vx = [d.alphabet.index(a) for a in v]
    while s not in seen:
        seen.add(s)
        for x in vx:
            s = int(d.trans[s, x])
            if d.accepting[s]:
                return True
    return False


def distinguishing_suffix(d: DFA, f: Sequence[str], g: Sequence[str]) -> tuple[str, ...] | None:
    """Shortest h with exactly one of f·h, g·h in L(d), or None if none exists."""
    p, q = d.run(d.alphabet.check_trace(f)), d.run(d.alphabet.check_trace(g))
    acts = d.alphabet.actions
    start = (p, q)
    parent: dict = {start: None}
    work = deque([start])
    while work:
        node = work.popleft()
        if bool(d.accepting[node[0]]) != bool(d.accepting[node[1]]):
            return _path(parent, node, acts)
        for x in range(len(acts)):
            nxt = (int(d.trans[node[0], x]), int(d.trans[node[1], x]))
            if nxt not in parent:
                parent[nxt] = (node, x)
                work.append(nxt)
    return None


def nfa_intersection_empty(n1: NFA, n2: NFA) -> bool:
    _check_same_alphabet(n1, n2)
    k = len(n1.alphabet)
    seen = {(p, q) for p in n1.initial for q in n2.initial}
    work = deque(seen)
    while work:
        p, q = work.popleft()
        if p in n1.accepting and q in n2.accepting:
            return False
        for x in range(k):
            for p2 in n1.delta[p][x]:
                for q2 in n2.delta[q][x]:
                    if (p2, q2) not in seen:
                        seen.add((p2, q2))
                        work.append((p2, q2))
    return True


def dfa_product(d1: DFA, d2: DFA) -> tuple[DFA, list[tuple[int, int]]]:
    """Reachable synchronous product; accepting where d1 accepts.  Returns the
    product and the component pair of each product state."""
    _check_same_alphabet(d1, d2)
    k = len(d1.alphabet)
    index = {(d1.initial, d2.initial): 0}
    pairs = [(d1.initial, d2.initial)]
    rows = []
    i = 0
    while i < len(pairs):
        p, q = pairs[i]
        row = []
        for x in range(k):
            nxt = (int(d1.trans[p, x]), int(d2.trans[q, x]))
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(pairs)
                pairs.append(nxt)
            row.append(j)
        rows.append(row)
        i += 1
    trans = np.asarray(rows, dtype=np.int64).reshape(len(pairs), k)
    acc = np.array([bool(d1.accepting[p]) for p, _ in pairs])
    return DFA(d1.alphabet, trans, acc, 0, tuple(pairs)), pairs


# ---------------------------------------------------------------------------
# Automata back to monitors

DEFAULT_MAX_TERM_SIZE = 2_000_000


def _unfold(
    roots: list[int],
    succ: Callable[[int], list[tuple[str, int]]],
    verdict_of: Callable[[int], Verdict | None],
    max_size: int,
) -> Term:
    """Tree-unfold a transition graph into a closed regular monitor.

    Each state becomes ``rec x.(Σ a.child)``; a child already on the DFS stack
    becomes its variable, every other child is inlined (duplicated).  Binders
    that end up unused are dropped.
    """
    counter = [0]
    size = [0]

    def charge(n: int) -> None:
        size[0] += n
        if size[0] > max_size:
            raise ResourceGuardExceeded(f"monitor exceeds {max_size} symbols")

    on_stack: dict[int, str] = {}
    used: set[str] = set()

    # Explicit-stack DFS; each frame builds one state's term.
    def build(root: int) -> Term:
        v = verdict_of(root)
        if v is not None:
            charge(1)
            return v
        result: list[Term] = []
        frames: list[list] = []

        def enter(q: int) -> None:
            name = f"x{counter[0]}"
            counter[0] += 1
            on_stack[q] = name
            frames.append([q, name, succ(q), 0, []])

        def finish(t: Term) -> None:
            if frames:
                frames[-1][4].append(t)
            else:
                result.append(t)

        def leaf(q: int) -> Term | None:
            v = verdict_of(q)
            if v is not None:
                charge(1)
                return v
            if q in on_stack:
                used.add(on_stack[q])
                charge(1)
                return Var(on_stack[q])
            return None

        enter(root)
        while frames:
            fr = frames[-1]
            q, name, edges, i, done = fr
            if i < len(edges):
                fr[3] += 1
                _, child = edges[i]
                t = leaf(child)
                if t is not None:
                    done.append(t)
                else:
                    enter(child)
                continue
            frames.pop()
            del on_stack[q]
            parts = [Prefix(a, t) for (a, _), t in zip(edges, done)]
            charge(2 * len(parts) + max(len(parts) - 1, 0))
            body = choice(*parts) if parts else END
            if not parts:
                charge(1)
            if name in used:
                charge(3)
                body = Rec(name, body)
            finish(body)
        return result[0]

    parts = [build(r) for r in roots]
    if not parts:
        return END
    return choice(*parts)


def nfa_to_monitor(
    n: NFA, verdict: Verdict = YES, max_size: int = DEFAULT_MAX_TERM_SIZE
) -> Monitor:
    """Closed regular monitor whose acceptance (yes) or rejection (no) language is L(n)."""
    if not n.extension_closed:
        raise NotExtensionClosed("nfa_to_monitor requires an extension-closed NFA")
    if verdict not in (YES, NO):
        raise ValueError("verdict must be yes or no")
    useful = n.coaccessible()
    acts = n.alphabet.actions
    if n.initial & n.accepting:
        return Monitor(verdict, n.alphabet)

    def succ(q: int):
        return [(acts[x], p) for x in range(len(acts)) for p in sorted(n.delta[q][x]) if useful[p]]

    def verdict_of(q: int):
        return verdict if q in n.accepting else None

    roots = [q for q in sorted(n.initial) if useful[q]]
    return Monitor(_unfold(roots, succ, verdict_of, max_size), n.alphabet)


def dfa_to_monitor(d: DFA, verdict: Verdict = YES, max_size: int = DEFAULT_MAX_TERM_SIZE) -> Monitor:
    """Deterministic monitor whose acceptance (yes) or rejection (no) language is L(d)."""
    if not d.extension_closed:
        raise NotExtensionClosed("dfa_to_monitor requires an extension-closed DFA")
    if verdict not in (YES, NO):
        raise ValueError("verdict must be yes or no")
    return dfa_to_deterministic(d, {int(q): verdict for q in np.nonzero(d.accepting)[0]}, max_size)


def dfa_to_deterministic(d: DFA, verdicts: dict[int, Verdict], max_size: int = DEFAULT_MAX_TERM_SIZE) -> Monitor:
    """Deterministic monitor emitting ``verdicts[q]`` on reaching state q.

    States mapped to a verdict must be absorbing; states that cannot reach one
    are dropped from sums (or become ``end``)."""
    n = d.n_states
    target = np.zeros(n, dtype=bool)
    target[list(verdicts)] = True
    useful = DFA(d.alphabet, d.trans, target, d.initial).coaccessible()
    acts = d.alphabet.actions

    def succ(q: int):
        return [(acts[x], int(d.trans[q, x])) for x in range(len(acts)) if useful[int(d.trans[q, x])]]

    roots = [d.initial] if useful[d.initial] else []
    return Monitor(_unfold(roots, succ, verdicts.get, max_size), d.alphabet)


# ---------------------------------------------------------------------------
# Monitor-level conveniences


def monitor_nfa(m: Monitor, polarity: Polarity, max_states: int | None = None) -> NFA:
    return afa_to_nfa(monitor_to_afa(m, polarity), max_states)


def monitor_dfa(m: Monitor, polarity: Polarity, max_states: int | None = None) -> DFA:
    return nfa_to_dfa(monitor_nfa(m, polarity, max_states), max_states)


def language_dfa(m: Monitor, polarity: Polarity, max_states: int | None = None) -> DFA:
    """DFA for L_a(m)/L_r(m) via the direct AFA determinisation (usually smaller)."""
    return afa_to_dfa(monitor_to_afa(m, polarity), max_states)


# ---------------------------------------------------------------------------
# Export


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(x, name: str = "A") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  start [shape=point];']
    acts = x.alphabet.actions
    if isinstance(x, DFA):
        for q in range(x.n_states):
            shape = "doublecircle" if x.accepting[q] else "circle"
            lines.append(f"  q{q} [shape={shape}, label={_q(str(q))}];")
        lines.append(f"  start -> q{x.initial};")
        for q in range(x.n_states):
            by_target: dict[int, list[str]] = {}
            for i, a in enumerate(acts):
                by_target.setdefault(int(x.trans[q, i]), []).append(a)
            for p, labs in sorted(by_target.items()):
                lines.append(f"  q{q} -> q{p} [label={_q(','.join(labs))}];")
    elif isinstance(x, NFA):
        for q in range(x.n_states):
            shape = "doublecircle" if q in x.accepting else "circle"
            lines.append(f"  q{q} [shape={shape}, label={_q(str(q))}];")
        for q in sorted(x.initial):
            lines.append(f"  start -> q{q};")
        for q in range(x.n_states):
            for i, a in enumerate(acts):
                for p in sorted(x.delta[q][i]):
                    lines.append(f"  q{q} -> q{p} [label={_q(a)}];")
    elif isinstance(x, AFA):
        for q in range(x.n_states):
            shape = "doublecircle" if q in x.accepting else "circle"
            lines.append(f"  q{q} [shape={shape}, label={_q(show(x.states[q]) if isinstance(x.states[q], Term) else str(x.states[q]))}];")
        gate = [0]

        def emit(src: str, f: DNF, label: str) -> None:
            if not f:
                return
            if f == TRUE:
                lines.append(f"  {src} -> true [label={_q(label)}];")
                return
            g = f"g{gate[0]}"
            gate[0] += 1
            lines.append(f"  {g} [shape=diamond, label=\"∨\", width=0.2];")
            lines.append(f"  {src} -> {g} [label={_q(label)}];")
            for cube in sorted(f, key=sorted):
                if len(cube) == 1:
                    (p,) = cube
                    lines.append(f"  {g} -> q{p};")
                else:
                    h = f"g{gate[0]}"
                    gate[0] += 1
                    lines.append(f"  {h} [shape=box, label=\"∧\", width=0.2];")
                    lines.append(f"  {g} -> {h};")
                    for p in sorted(cube):
                        lines.append(f"  {h} -> q{p};")

        lines.append('  true [shape=plaintext, label="TRUE"];')
        emit("start", x.initial, "")
        for q in range(x.n_states):
            for i, a in enumerate(acts):
                emit(f"q{q}", x.delta[q][i], a)
    else:
        raise TypeError(f"cannot export {type(x).__name__}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dnf_doc(f: DNF) -> list[list[int]]:
    return [sorted(c) for c in sorted(f, key=lambda c: (len(c), sorted(c)))]


def automaton_to_doc(x) -> dict:
    base = {"format": "monitorkit", "version": 1, "alphabet": list(x.alphabet)}
    acts = x.alphabet.actions
    if isinstance(x, DFA):
        return {
            **base,
            "kind": "dfa",
            "states": x.n_states,
            "initial": x.initial,
            "accepting": np.nonzero(x.accepting)[0].tolist(),
            "transitions": x.trans.tolist(),
        }
    if isinstance(x, NFA):
        return {
            **base,
            "kind": "nfa",
            "states": x.n_states,
            "initial": sorted(x.initial),
            "accepting": sorted(x.accepting),
            "transitions": [{a: sorted(x.delta[q][i]) for i, a in enumerate(acts)} for q in range(x.n_states)],
        }
    if isinstance(x, AFA):
        return {
            **base,
            "kind": "afa",
            "polarity": x.polarity.value if x.polarity else None,
            "states": [show(s) if isinstance(s, Term) else str(s) for s in x.states],
            "initial": _dnf_doc(x.initial),
            "accepting": sorted(x.accepting),
            "transitions": [{a: _dnf_doc(x.delta[q][i]) for i, a in enumerate(acts)} for q in range(x.n_states)],
        }
    raise TypeError(f"cannot export {type(x).__name__}")


def automaton_from_doc(doc: dict):
    alphabet = Alphabet(doc["alphabet"])
    acts = alphabet.actions
    kind = doc.get("kind")
    if kind == "dfa":
        trans = np.asarray(doc["transitions"], dtype=np.int64).reshape(doc["states"], len(acts))
        acc = np.zeros(doc["states"], dtype=bool)
        acc[doc["accepting"]] = True
        return DFA(alphabet, trans, acc, doc["initial"])
    if kind == "nfa":
        delta = tuple(tuple(frozenset(row[a]) for a in acts) for row in doc["transitions"])
        return NFA(alphabet, doc["states"], frozenset(doc["initial"]), delta, frozenset(doc["accepting"]))
    if kind == "afa":

        def f(cubes):
            return absorb(frozenset(c) for c in cubes)

        delta = tuple(tuple(f(row[a]) for a in acts) for row in doc["transitions"])
        pol = Polarity(doc["polarity"]) if doc.get("polarity") else None
        return AFA(alphabet, tuple(doc["states"]), f(doc["initial"]), delta, frozenset(doc["accepting"]), pol)
    raise ValueError(f"unknown automaton kind {kind!r}")
