"""Succinctness-gap witnesses over Σ_$ = {0,1,#,$}.

Membership oracles for L_A^k and L_U^k work on plain strings and share no code
with the monitor stack.  The builders return the auxiliary monitors and the two
composite monitors; every sum with a prefix gets the ``+ end`` padding.

Three repairs are applied to the composite monitors (the auxiliary builders
stay literal, see ``build_aux``):

* ``matching`` gets a base case ``#.yes``; without it the recursion can never
  reach a verdict.
* m_A skips to the chosen ``#`` over ``$`` as well, so ``u`` may contain ``$``.
* inside m_U, ``perm`` also accepts a block terminated by ``$`` (the last block),
  and the whole monitor must start with ``#``.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Sequence

from . import __version__
from .terms import (
    YES,
    Alphabet,
    Monitor,
    ParAnd,
    ParOr,
    Prefix,
    Rec,
    Term,
    Var,
    choice,
    pad,
    par_and,
)

SIGMA = Alphabet(("0", "1", "#", "$"))
BITS = ("0", "1")


class GuardError(ValueError):
    pass


@dataclass(frozen=True)
class GapParams:
    l: int

    def __post_init__(self):
        if not isinstance(self.l, int) or self.l < 1:
            raise ValueError("l must be an integer >= 1")
        if self.l > 6:
            raise GuardError("l > 6 is beyond desk scale")

    @property
    def k(self) -> int:
        return 2**self.l

    @property
    def block(self) -> int:
        return self.l + 1


# ---------------------------------------------------------------------------
# Plain-string oracles


def bin_str(i: int, width: int) -> str:
    return format(i, "b").zfill(width) if width else ""


def in_W(w: str, p: GapParams) -> bool:
    l, k = p.l, p.k
    if len(w) != (l + 1) * k or any(c not in "01" for c in w):
        return False
    idx = [w[i : i + l] for i in range(0, len(w), l + 1)]
    return sorted(idx) == [bin_str(i, l) for i in range(k)]


def _bits_by_index(w: str, l: int) -> dict[str, str]:
    return {w[i : i + l]: w[i + l] for i in range(0, len(w), l + 1)}


def equiv_W(w: str, w2: str, p: GapParams) -> bool:
    """w ≡ w2 for members of W: equal indices carry equal bits."""
    a, b = _bits_by_index(w, p.l), _bits_by_index(w2, p.l)
    return all(b.get(i, bit) == bit for i, bit in a.items())


def decode(w: str, p: GapParams) -> str:
    bits = _bits_by_index(w, p.l)
    return "".join(bits[bin_str(i, p.l)] for i in range(p.k))


def enc(s: str, p: GapParams) -> str:
    """Ordered encoding of s ∈ {0,1}^k: blocks bin(i)·s_i."""
    if len(s) != p.k or any(c not in "01" for c in s):
        raise ValueError(f"enc expects a {p.k}-bit string")
    return "".join(bin_str(i, p.l) + s[i] for i in range(p.k))


def _as_str(t) -> str:
    s = t if isinstance(t, str) else "".join(t)
    if any(c not in "01#$" for c in s):
        raise ValueError(f"trace {s!r} leaves the alphabet 0,1,#,$")
    return s


def _in_LA(s: str, p: GapParams) -> bool:
    j = s.find("#$")
    while j >= 0:
        i = j
        while i > 0 and s[i - 1] in "01":
            i -= 1
        w2 = s[i:j]
        if i >= 1 and s[i - 1] == "#" and in_W(w2, p):
            d = s.rfind("$", 0, i - 1)
            if d >= 0:
                seg = s[s.rfind("$", 0, d) + 1 : d]
                for a, c in enumerate(seg):
                    if c != "#":
                        continue
                    b = a + 1
                    while b < len(seg) and seg[b] in "01":
                        b += 1
                    if b < len(seg) and seg[b] == "#":
                        w = seg[a + 1 : b]
                        if in_W(w, p) and equiv_W(w, w2, p):
                            return True
        j = s.find("#$", j + 1)
    return False


def _in_LU(s: str, p: GapParams) -> bool:
    if not s.startswith("#"):
        return False
    d = s.find("$")
    if d < 0:
        return False
    blocks = s[1:d].split("#")
    if not all(in_W(w, p) for w in blocks):
        return False
    dec = [decode(w, p) for w in blocks]
    return all(x < y for x, y in zip(dec, dec[1:]))


def oracle_membership(family: str, p: GapParams, t) -> bool:
    s = _as_str(t)
    if family == "A":
        return _in_LA(s, p)
    if family == "U":
        return _in_LU(s, p)
    raise ValueError("family must be 'A' or 'U'")


# ---------------------------------------------------------------------------
# Monitor builders


class _Names:
    def __init__(self):
        self.n = 0

    def __call__(self, stem: str = "x") -> str:
        self.n += 1
        return f"{stem}{self.n}"


def trie(strings: Sequence[str], body) -> Term:
    """T.m for a set T of equal-length strings; ``body`` is a term or a
    function of the string."""
    strings = sorted(set(strings))
    if strings == [""]:
        return body("") if callable(body) else body

    def go(prefix: str, group: list[str]) -> Term:
        if len(group) == 1 and len(group[0]) == len(prefix):
            return body(prefix) if callable(body) else body
        parts = []
        for c, sub in itertools.groupby(group, key=lambda s: s[len(prefix)]):
            parts.append(Prefix(c, go(prefix + c, list(sub))))
        return choice(*parts)

    return go("", strings)


def all_strings(n: int) -> list[str]:
    return ["".join(b) for b in itertools.product(BITS, repeat=n)]


def skip_hash(m: Term, names=None) -> Term:
    names = names or _Names()
    x = names()
    loop = choice(Prefix("0", Var(x)), Prefix("1", Var(x)), Prefix("#", Var(x)))
    return Rec(x, ParOr(loop, Prefix("#", m)))


def skip_any(m: Term, names=None) -> Term:
    """skip_# that also skips over $."""
    names = names or _Names()
    x = names()
    loop = choice(*(Prefix(a, Var(x)) for a in ("0", "1", "#", "$")))
    return Rec(x, ParOr(loop, Prefix("#", m)))


def next_hash(m: Term, names=None) -> Term:
    names = names or _Names()
    x = names()
    return Rec(x, choice(Prefix("0", Var(x)), Prefix("1", Var(x)), Prefix("#", m)))


def next_dollar(m: Term, names=None) -> Term:
    names = names or _Names()
    x = names()
    return Rec(x, choice(Prefix("0", Var(x)), Prefix("1", Var(x)), Prefix("#", Var(x)), Prefix("$", m)))


def skip_last(m: Term, names=None) -> Term:
    names = names or _Names()
    x, y = names(), names()
    tail = Rec(y, choice(Prefix("0", Var(y)), Prefix("1", Var(y)), Prefix("#", Prefix("$", YES))))
    return Rec(
        x,
        choice(Prefix("0", Var(x)), Prefix("1", Var(x)), Prefix("#", Var(x)), Prefix("#", ParAnd(m, tail))),
    )


def all_(p: GapParams, names=None) -> Term:
    names = names or _Names()
    parts = []
    for a in all_strings(p.l):
        x = names()
        parts.append(Rec(x, ParOr(trie(all_strings(p.block), Var(x)), trie([a + "0", a + "1"], YES))))
    return par_and(*parts)


def _ends(terminators: Sequence[str]) -> list[Term]:
    return [Prefix(c, YES) for c in terminators]


def no_more(a: str, p: GapParams, names=None, terminators=("#",)) -> Term:
    names = names or _Names()
    x = names()
    others = [b + c for b in all_strings(p.l) if b != a for c in BITS]
    parts = _ends(terminators)
    if others:
        parts.append(trie(others, Var(x)))
    return Rec(x, choice(*parts))


def unique(p: GapParams, names=None, terminators=("#",)) -> Term:
    names = names or _Names()
    x = names()
    branch = trie(
        [a + c for a in all_strings(p.l) for c in BITS],
        lambda s: no_more(s[:-1], p, names, terminators),
    )
    return Rec(x, choice(*_ends(terminators), ParAnd(trie(all_strings(p.block), Var(x)), branch)))


def perm(p: GapParams, names=None, terminators=("#",)) -> Term:
    names = names or _Names()
    return ParAnd(all_(p, names), unique(p, names, terminators))


def find(beta: str, p: GapParams, names=None) -> Term:
    names = names or _Names()
    x = names()
    others = [s for s in all_strings(p.block) if s != beta]
    return Rec(x, choice(trie([beta], YES), trie(others, Var(x))))


def match(beta: str, p: GapParams, names=None) -> Term:
    names = names or _Names()
    return next_dollar(skip_last(find(beta, p, names), names), names)


def matching(p: GapParams, names=None, base_case: bool = True) -> Term:
    names = names or _Names()
    x = names()
    body = trie(all_strings(p.block), lambda b: ParAnd(Var(x), match(b, p, names)))
    return Rec(x, choice(Prefix("#", YES), body) if base_case else body)


def smaller(p: GapParams, names=None) -> Term:
    names = names or _Names()
    alts = []
    for a in all_strings(p.l):
        parts = [find(a + "0", p, names), next_hash(find(a + "1", p, names), names)]
        for g in all_strings(p.l):
            if g >= a:
                break
            parts.append(
                choice(*(ParAnd(find(g + b, p, names), next_hash(find(g + b, p, names), names)) for b in BITS))
            )
        alts.append(par_and(*parts))
    return choice(*alts)


def last(names=None) -> Term:
    names = names or _Names()
    x = names()
    return Rec(x, choice(Prefix("0", Var(x)), Prefix("1", Var(x)), Prefix("$", YES)))


AUX_KINDS = (
    "skip_#", "next_#", "next_$", "skip_last", "all", "no_more", "unique",
    "perm", "find", "match", "matching", "smaller", "last",
)


def build_aux(kind: str, p: GapParams | None = None, arg=None) -> Monitor:
    """One auxiliary monitor, padded.  ``arg`` is the continuation monitor (a
    Term or Monitor) for the skip/next family, a bit block for find/match and
    an index for no_more.  ``matching`` is built literally, without base case."""
    names = _Names()
    if kind in ("skip_#", "next_#", "next_$", "skip_last"):
        if arg is None:
            raise ValueError(f"{kind} needs a continuation monitor")
        m = arg.term if isinstance(arg, Monitor) else arg
        fn = {"skip_#": skip_hash, "next_#": next_hash, "next_$": next_dollar, "skip_last": skip_last}[kind]
        return Monitor(pad(fn(m, names)), SIGMA)
    if kind == "last":
        return Monitor(pad(last(names)), SIGMA)
    if p is None:
        raise ValueError(f"{kind} needs GapParams")
    if kind in ("find", "match"):
        if not isinstance(arg, str) or len(arg) != p.block or any(c not in "01" for c in arg):
            raise ValueError(f"{kind} needs a block of {p.block} bits")
        fn = find if kind == "find" else match
        return Monitor(pad(fn(arg, p, names)), SIGMA)
    if kind == "no_more":
        if not isinstance(arg, str) or len(arg) != p.l or any(c not in "01" for c in arg):
            raise ValueError(f"no_more needs an index of {p.l} bits")
        return Monitor(pad(no_more(arg, p, names)), SIGMA)
    builders = {
        "all": lambda: all_(p, names),
        "unique": lambda: unique(p, names),
        "perm": lambda: perm(p, names),
        "matching": lambda: matching(p, names, base_case=False),
        "smaller": lambda: smaller(p, names),
    }
    if kind not in builders:
        raise ValueError(f"unknown auxiliary monitor {kind!r}; expected one of {', '.join(AUX_KINDS)}")
    return Monitor(pad(builders[kind]()), SIGMA)


def build_gap_monitor(family: str, p: GapParams) -> Monitor:
    names = _Names()
    if family == "A":
        inner = par_and(
            perm(p, names),
            next_dollar(skip_last(perm(p, names), names), names),
            matching(p, names),
        )
        return Monitor(pad(skip_any(inner, names)), SIGMA)
    if family == "U":
        x = names()
        body = ParAnd(perm(p, names, ("#", "$")), ParOr(last(names), ParAnd(smaller(p, names), Var(x))))
        mu = Rec(x, next_hash(body, names))
        return Monitor(pad(ParAnd(Prefix("#", YES), mu)), SIGMA)
    raise ValueError("family must be 'A' or 'U'")


# ---------------------------------------------------------------------------
# t_K


@dataclass(frozen=True)
class TKParams:
    """Partition (C, D) of {0,1}^k and orderings P_C, P_D of their non-empty subsets."""

    p: GapParams
    C: tuple
    D: tuple
    P_C: tuple
    P_D: tuple

    @property
    def K(self) -> int:
        return 2 ** (2 ** (self.p.k - 1))

    def __post_init__(self):
        words = set(all_strings(self.p.k))
        C, D = set(self.C), set(self.D)
        if C & D or C | D != words or len(C) != len(D):
            raise ValueError("C and D must split {0,1}^k into halves")
        for P, S in ((self.P_C, C), (self.P_D, D)):
            subsets = {frozenset(x) for x in P}
            if len(subsets) != len(P) or len(P) != 2 ** len(S) - 1 or any(not x or not set(x) <= S for x in P):
                raise ValueError("P_C/P_D must order the non-empty subsets of C/D")


def default_tk_params(p: GapParams, seed: int = 0, max_k: int = 2) -> TKParams:
    if p.k > max_k:
        raise GuardError(f"t_K is only built for k <= {max_k} (K grows as 2^(2^(k-1)))")
    rng = random.Random(seed)
    words = all_strings(p.k)
    half = len(words) // 2
    C, D = tuple(words[:half]), tuple(words[half:])

    def order(S):
        subs = [tuple(c) for r in range(1, len(S) + 1) for c in itertools.combinations(S, r)]
        rng.shuffle(subs)
        return tuple(subs)

    return TKParams(p, C, D, order(C), order(D))


def build_tK(tp: TKParams, max_k: int = 2) -> str:
    """t_0 $ s_0 $ t_1 $ … $ s_{K-2}: one segment per listed subset, each
    ``#enc(w)#…#enc(w')#`` over the subset's words."""
    if tp.p.k > max_k:
        raise GuardError(f"t_K is only built for k <= {max_k}")

    def seg(words) -> str:
        return "#" + "#".join(enc(w, tp.p) for w in words) + "#"

    parts = []
    for ci, di in zip(tp.P_C, tp.P_D):
        parts += [seg(ci), seg(di)]
    return "$".join(parts)


# ---------------------------------------------------------------------------
# Size ledger


COLUMNS = (
    "family", "l", "k", "parallel_l", "afa_accept", "afa_reject", "nfa_accept", "nfa_reject",
    "dfa_accept", "dfa_reject", "regular_l", "deterministic_l", "regular_equiv", "deterministic_equiv",
)


@dataclass
class BlowupRow:
    """One ledger row.  ``bounds`` holds strict lower bounds for size columns
    whose construction hit the size guard."""

    values: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    bounds: dict = field(default_factory=dict)


def pipeline_row(m: Monitor, max_states: int = 200_000, max_size: int = 2_000_000, check: bool = True,
                 **labels) -> BlowupRow:
    """Sizes of ``m`` along the pipeline.  A guard hit is recorded as
    ``"guard"`` in the affected columns; the remaining columns are still filled."""
    from .automata import (
        ACCEPT, REJECT, ResourceGuardExceeded, afa_to_dfa, afa_to_nfa, dfa_language_equal, extension_close,
        monitor_to_afa,
    )
    from .transform import Options, parallel_to_deterministic, parallel_to_regular, verdict_dfa

    row = BlowupRow({c: None for c in COLUMNS})
    v = row.values
    v.update(labels)
    v["parallel_l"] = m.size()
    opts = Options(max_states=max_states, max_size=max_size)
    closed = {}
    for pol in (ACCEPT, REJECT):
        afa = monitor_to_afa(m, pol)
        v[f"afa_{pol.value}"] = afa.n_states
        try:
            v[f"nfa_{pol.value}"] = afa_to_nfa(afa, max_states).n_states
        except ResourceGuardExceeded as exc:
            v[f"nfa_{pol.value}"] = "guard"
            row.notes.append(f"nfa_{pol.value}: {exc}")
        try:
            d = afa_to_dfa(afa, max_states)
            v[f"dfa_{pol.value}"] = d.n_states
            closed[pol] = extension_close(d)
        except ResourceGuardExceeded as exc:
            v[f"dfa_{pol.value}"] = "guard"
            row.notes.append(f"dfa_{pol.value}: {exc}")
    for col, fn, eq in (
        ("regular_l", parallel_to_regular, "regular_equiv"),
        ("deterministic_l", parallel_to_deterministic, "deterministic_equiv"),
    ):
        try:
            out = fn(m, opts)
        except ResourceGuardExceeded as exc:
            v[col] = "guard"
            row.notes.append(f"{col}: {exc}")
            if "symbols" in str(exc):
                row.bounds[col] = max_size
            continue
        v[col] = out.size()
        if not check:
            continue
        try:
            same = True
            for pol in (ACCEPT, REJECT):
                mine = closed[pol] if pol in closed else verdict_dfa(m, pol, max_states)
                same = same and dfa_language_equal(mine, verdict_dfa(out, pol, max_states)) is True
            v[eq] = same
        except ResourceGuardExceeded as exc:
            v[eq] = "guard"
            row.notes.append(f"{eq}: {exc}")
    return row


def blowup_report(p: GapParams, family: str, max_states: int = 200_000, max_size: int = 2_000_000,
                  check: bool = True) -> BlowupRow:
    m = build_gap_monitor(family, p)
    return pipeline_row(m, max_states, max_size, check, family=family, l=p.l, k=p.k)


def report_table(rows: list[BlowupRow], sep: str = "\t") -> str:
    lines = [sep.join(COLUMNS)]
    for r in rows:
        lines.append(sep.join("" if r.values[c] is None else str(r.values[c]) for c in COLUMNS))
    return "\n".join(lines) + "\n"


def report_doc(rows: list[BlowupRow], seed: int | None = None) -> dict:
    return {
        "format": "monitorkit",
        "version": 1,
        "kind": "blowup_report",
        "tool_version": __version__,
        "seed": seed,
        "columns": list(COLUMNS),
        "rows": [r.values for r in rows],
        "notes": [n for r in rows for n in r.notes],
        "lower_bounds": [{"row": i, "column": c, "exceeds": b} for i, r in enumerate(rows) for c, b in r.bounds.items()],
        "plot": [
            {"family": r.values["family"], "l": r.values["l"], "series": c, "size": r.values[c]}
            for r in rows
            for c in ("parallel_l", "regular_l", "deterministic_l")
            if isinstance(r.values[c], int)
        ],
    }


def dumps_report(rows, seed=None) -> str:
    return json.dumps(report_doc(rows, seed), indent=2, sort_keys=False, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Trace suites


def _orders(w: str, p: GapParams) -> list[str]:
    blocks = [w[i : i + p.block] for i in range(0, len(w), p.block)]
    return sorted({"".join(q) for q in itertools.permutations(blocks)})


def minimal_members(family: str, p: GapParams, rng: random.Random, limit: int = 48) -> list[str]:
    """Short members: every block ordering of matching encodings (sampled when large)."""
    words = all_strings(p.k)
    out: set[str] = set()
    if family == "A":
        for s in words:
            for w in _orders(enc(s, p), p)[:6]:
                for w2 in _orders(enc(s, p), p)[:6]:
                    out.add(f"#{w}#$#{w2}#$")
            other = enc(words[(words.index(s) + 1) % len(words)], p)
            out.add(f"#{other}#{enc(s, p)}#$#{enc(s, p)}#$")
            out.add(f"#{enc(s, p)}#$#{other}#{enc(s, p)}#$")
            out.add(f"#{enc(s, p)}#0#$1#{enc(s, p)}#$")
    else:
        for s in words:
            for w in _orders(enc(s, p), p)[:6]:
                out.add(f"#{w}$")
        for s, s2 in itertools.combinations(words, 2):
            for w2 in _orders(enc(s2, p), p)[:2]:
                out.add(f"#{enc(s, p)}#{w2}$")
        for s, s2, s3 in itertools.combinations(words, 3):
            out.add(f"#{enc(s, p)}#{enc(s2, p)}#{enc(s3, p)}$")
    out = sorted(out)
    if len(out) > limit:
        out = sorted(rng.sample(out, limit))
    return out


def targeted_suite(family: str, p: GapParams, rng: random.Random | None = None, limit: int = 48) -> list[str]:
    """Minimal members, all their single-bit corruptions and all $ misplacements."""
    rng = rng or random.Random(0)
    members = minimal_members(family, p, rng, limit)
    out = set(members)
    for t in members:
        for i, c in enumerate(t):
            if c in "01":
                out.add(t[:i] + ("1" if c == "0" else "0") + t[i + 1 :])
        for d in [i for i, c in enumerate(t) if c == "$"]:
            base = t[:d] + t[d + 1 :]
            for j in range(len(base) + 1):
                out.add(base[:j] + "$" + base[j:])
        stripped = t.replace("$", "")
        for j in range(len(stripped) + 1):
            out.add(stripped[:j] + "$" + stripped[j:])
        out.update((t + "0", "0" + t, "$" + t, "#" + t))
    return sorted(out, key=lambda s: (len(s), s))


def _shuffle_blocks(w: str, p: GapParams, rng: random.Random) -> str:
    blocks = [w[i : i + p.block] for i in range(0, len(w), p.block)]
    rng.shuffle(blocks)
    return "".join(blocks)


def random_traces(n: int, max_len: int, seed: int, alphabet: str = "01#$") -> list[str]:
    rng = random.Random(seed)
    return ["".join(rng.choice(alphabet) for _ in range(rng.randint(0, max_len))) for _ in range(n)]
