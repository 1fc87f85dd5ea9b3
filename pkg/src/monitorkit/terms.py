"""Monitor syntax: alphabets, term nodes, parsing, printing, size and validation.

Concrete grammar (loosest binding first)::

    par  := sum (('&' | '|') sum)*         # & is conjunctive, | disjunctive
    sum  := pre ('+' pre)*
    pre  := ACTION '.' pre | 'rec' VAR '.' pre | atom
    atom := 'yes' | 'no' | 'end' | VAR | '(' par ')'

Binary operators associate to the left; the printer parenthesises right-nested
operands so that ``parse(print(m)) == m`` holds structurally.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

TAU = "τ"
RESERVED = frozenset({"yes", "no", "end", "rec", "tau", TAU})


class MonitorSyntaxError(ValueError):
    """Raised for malformed monitor or formula text; carries the offset."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class AlphabetError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Alphabet and traces


class Alphabet:
    """An ordered, finite set of visible actions."""

    __slots__ = ("actions", "_index")

    def __init__(self, actions: Iterable[str]):
        acts = tuple(actions)
        if not acts:
            raise AlphabetError("alphabet must be non-empty")
        if len(set(acts)) != len(acts):
            raise AlphabetError(f"duplicate actions in {acts!r}")
        for a in acts:
            if not isinstance(a, str) or not a or a in RESERVED or any(c.isspace() for c in a):
                raise AlphabetError(f"invalid action name {a!r}")
        self.actions = acts
        self._index = {a: i for i, a in enumerate(acts)}

    def __iter__(self) -> Iterator[str]:
        return iter(self.actions)

    def __len__(self) -> int:
        return len(self.actions)

    def __contains__(self, a: object) -> bool:
        return a in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.actions == other.actions

    def __hash__(self) -> int:
        return hash(self.actions)

    def __repr__(self) -> str:
        return f"Alphabet({list(self.actions)!r})"

    def index(self, a: str) -> int:
        try:
            return self._index[a]
        except KeyError:
            raise AlphabetError(f"unknown action {a!r}; alphabet is {list(self.actions)}") from None

    @property
    def single_char(self) -> bool:
        return all(len(a) == 1 for a in self.actions)

    def extended(self, *extra: str) -> "Alphabet":
        return Alphabet(self.actions + tuple(extra))

    def check_trace(self, trace: Sequence[str]) -> tuple[str, ...]:
        for a in trace:
            if a not in self._index:
                raise AlphabetError(f"action {a!r} not in alphabet {list(self.actions)}")
        return tuple(trace)

    def parse_trace(self, text: str) -> tuple[str, ...]:
        """Whitespace/comma separated actions; unseparated for single-char alphabets."""
        text = text.strip()
        if not text or text in ("ε", "eps"):
            return ()
        if re.search(r"[\s,]", text):
            parts = [p for p in re.split(r"[\s,]+", text) if p]
        elif text in self._index:
            parts = [text]
        elif self.single_char:
            parts = list(text)
        else:
            raise AlphabetError(f"cannot split trace {text!r}: separate multi-character actions")
        return self.check_trace(parts)

    def format_trace(self, trace: Sequence[str]) -> str:
        if not trace:
            return "ε"
        return "".join(trace) if self.single_char else " ".join(trace)

    def traces(self, max_len: int) -> Iterator[tuple[str, ...]]:
        """All traces of length <= max_len, shortest first, in alphabet order."""
        for n in range(max_len + 1):
            yield from itertools.product(self.actions, repeat=n)


# ---------------------------------------------------------------------------
# Term nodes


class Term:
    """Base of immutable monitor nodes with a cached structural hash."""

    __slots__ = ("_hash",)

    def _key(self) -> tuple:
        raise NotImplementedError

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:  # type: ignore[attr-defined]
            return False
        return self._key() == other._key()  # type: ignore[attr-defined]

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def _init(self, **fields) -> None:
        for k, v in fields.items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "_hash", hash((type(self).__name__,) + self._key()))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {show(self)}>"

    def __str__(self) -> str:
        return show(self)


class Verdict(Term):
    __slots__ = ("value",)

    def __init__(self, value: str):
        if value not in ("yes", "no", "end"):
            raise ValueError(f"bad verdict {value!r}")
        self._init(value=value)

    def _key(self):
        return (self.value,)


class Prefix(Term):
    __slots__ = ("action", "body")

    def __init__(self, action: str, body: Term):
        self._init(action=action, body=body)

    def _key(self):
        return (self.action, self.body)


class Choice(Term):
    __slots__ = ("left", "right")

    def __init__(self, left: Term, right: Term):
        self._init(left=left, right=right)

    def _key(self):
        return (self.left, self.right)


class Rec(Term):
    __slots__ = ("var", "body")

    def __init__(self, var: str, body: Term):
        self._init(var=var, body=body)

    def _key(self):
        return (self.var, self.body)


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self._init(name=name)

    def _key(self):
        return (self.name,)


class ParAnd(Term):
    """Conjunctive parallel composition (printed ``&``)."""

    __slots__ = ("left", "right")

    def __init__(self, left: Term, right: Term):
        self._init(left=left, right=right)

    def _key(self):
        return (self.left, self.right)


class ParOr(Term):
    """Disjunctive parallel composition (printed ``|``)."""

    __slots__ = ("left", "right")

    def __init__(self, left: Term, right: Term):
        self._init(left=left, right=right)

    def _key(self):
        return (self.left, self.right)


YES = Verdict("yes")
NO = Verdict("no")
END = Verdict("end")
Parallel = (ParAnd, ParOr)


def choice(*terms: Term) -> Term:
    """Left-nested sum of one or more terms."""
    if not terms:
        raise ValueError("empty sum")
    acc = terms[0]
    for t in terms[1:]:
        acc = Choice(acc, t)
    return acc


def par_and(*terms: Term) -> Term:
    acc = terms[0]
    for t in terms[1:]:
        acc = ParAnd(acc, t)
    return acc


def par_or(*terms: Term) -> Term:
    acc = terms[0]
    for t in terms[1:]:
        acc = ParOr(acc, t)
    return acc


def prefixes(actions: Sequence[str], body: Term) -> Term:
    """``a1.a2.….an.body``."""
    for a in reversed(actions):
        body = Prefix(a, body)
    return body


def summands(t: Term) -> list[Term]:
    """Flatten a maximal sum into its summands."""
    out: list[Term] = []
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Choice):
            stack.append(s.right)
            stack.append(s.left)
        else:
            out.append(s)
    return out


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk over every node (with repetition of shared subterms)."""
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        if isinstance(s, (Prefix, Rec)):
            stack.append(s.body)
        elif isinstance(s, (Choice, ParAnd, ParOr)):
            stack.append(s.right)
            stack.append(s.left)


def free_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Verdict):
        return set()
    if isinstance(t, Prefix):
        return free_vars(t.body)
    if isinstance(t, Rec):
        return free_vars(t.body) - {t.var}
    return free_vars(t.left) | free_vars(t.right)


def is_regular(t: Term) -> bool:
    return not any(isinstance(s, Parallel) for s in subterms(t))


# ---------------------------------------------------------------------------
# Monitors (term + alphabet + binder map)


class Monitor:
    """A closed, alpha-normalised monitor term over an alphabet.

    ``binders`` maps every rec-variable to its unique binding subterm ``p_x``.
    """

    __slots__ = ("term", "alphabet", "binders")

    def __init__(self, term: Term, alphabet: Alphabet, *, check: bool = True):
        term = alpha_normalize(term)
        binders: dict[str, Rec] = {}
        for s in subterms(term):
            if isinstance(s, Rec):
                binders[s.var] = s
            elif check and isinstance(s, Prefix) and s.action not in alphabet:
                raise AlphabetError(f"unknown action {s.action!r}; alphabet is {list(alphabet)}")
        object.__setattr__(self, "term", term)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "binders", binders)

    def __setattr__(self, name, value):
        raise AttributeError("monitors are immutable")

    @property
    def closed(self) -> bool:
        return not free_vars(self.term)

    @property
    def regular(self) -> bool:
        return is_regular(self.term)

    def __str__(self) -> str:
        return show(self.term)

    def __repr__(self) -> str:
        return f"Monitor({show(self.term)!r}, {self.alphabet!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Monitor) and self.term == other.term and self.alphabet == other.alphabet

    def __hash__(self) -> int:
        return hash((self.term, self.alphabet))

    def size(self) -> int:
        return term_size(self.term)


def alpha_normalize(t: Term) -> Term:
    """Rename colliding rec-binders so each variable name is bound at most once.

    The first binder of a name (pre-order) keeps it; later ones get fresh
    ``x0, x1, …`` names not otherwise used in the term.
    """
    names = [s.var for s in subterms(t) if isinstance(s, Rec)]
    if len(names) == len(set(names)):
        return t
    used = names_in(t)
    fresh = (f"x{i}" for i in itertools.count())
    seen: set[str] = set()

    def next_name() -> str:
        for n in fresh:
            if n not in used:
                used.add(n)
                return n
        raise AssertionError  # pragma: no cover

    def go(s: Term, env: dict[str, str]) -> Term:
        if isinstance(s, Var):
            return Var(env.get(s.name, s.name))
        if isinstance(s, Verdict):
            return s
        if isinstance(s, Prefix):
            return Prefix(s.action, go(s.body, env))
        if isinstance(s, Rec):
            name = s.var
            if name in seen:
                name = next_name()
            seen.add(name)
            return Rec(name, go(s.body, {**env, s.var: name}))
        return type(s)(go(s.left, env), go(s.right, env))

    return go(t, {})


def canonical(t: Term) -> Term:
    """Rename every binder to x0, x1, … in pre-order (alpha-equivalence key)."""
    count = itertools.count()

    def go(s: Term, env: dict[str, str]) -> Term:
        if isinstance(s, Var):
            return Var(env.get(s.name, s.name))
        if isinstance(s, Verdict):
            return s
        if isinstance(s, Prefix):
            return Prefix(s.action, go(s.body, env))
        if isinstance(s, Rec):
            name = f"x{next(count)}"
            return Rec(name, go(s.body, {**env, s.var: name}))
        return type(s)(go(s.left, env), go(s.right, env))

    return go(t, {})


def names_in(t: Term) -> set[str]:
    out = set()
    for s in subterms(t):
        if isinstance(s, Var):
            out.add(s.name)
        elif isinstance(s, Rec):
            out.add(s.var)
    return out


# ---------------------------------------------------------------------------
# Size


def term_size(t) -> int:
    """Symbol count l(·) of a monitor term, Monitor, or Formula."""
    if isinstance(t, Monitor):
        t = t.term
    if not isinstance(t, Term):
        from .logic import formula_size

        return formula_size(t)
    total = 0
    for s in subterms(t):
        if isinstance(s, (Verdict, Var)):
            total += 1
        elif isinstance(s, Prefix):
            total += 2
        elif isinstance(s, Rec):
            total += 3
        else:
            total += 1
    return total


# ---------------------------------------------------------------------------
# Printing


def show(t: Term) -> str:
    return _show(t, 0)


def _show(t: Term, level: int) -> str:
    # level 0: par position, 1: sum position, 2: prefix/atom position
    if isinstance(t, Verdict):
        return t.value
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Prefix):
        return f"{t.action}.{_show(t.body, 2)}"
    if isinstance(t, Rec):
        return f"rec {t.var}.{_show(t.body, 2)}"
    if isinstance(t, Choice):
        s = f"{_show(t.left, 1)} + {_show(t.right, 2)}"
        return s if level <= 1 else f"({s})"
    op = "&" if isinstance(t, ParAnd) else "|"
    s = f"{_show(t.left, 0)} {op} {_show(t.right, 1)}"
    return s if level == 0 else f"({s})"


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z0-9_][A-Za-z0-9_']*)|(?P<op>[().+&|])|(?P<sym>[^\sA-Za-z0-9_().+&|]))"
)


def tokenize(text: str, ops: str = "().+&|") -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise MonitorSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        toks.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    toks.append(("eof", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet):
        self.toks = tokenize(text)
        self.i = 0
        self.alphabet = alphabet

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value or kind == "eof":
            where = "end of input" if kind == "eof" else repr(v)
            raise MonitorSyntaxError(f"expected {value!r}, found {where}", pos)

    def error(self, what: str):
        kind, v, pos = self.peek()
        where = "end of input" if kind == "eof" else repr(v)
        raise MonitorSyntaxError(f"expected {what}, found {where}", pos)

    def parse(self) -> Term:
        t = self.par()
        if self.peek()[0] != "eof":
            self.error("end of input")
        return t

    def par(self) -> Term:
        t = self.sum()
        while self.peek()[1] in ("&", "|") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.sum()
            t = ParAnd(t, rhs) if op == "&" else ParOr(t, rhs)
        return t

    def sum(self) -> Term:
        t = self.pre()
        while self.peek()[:2] == ("op", "+"):
            self.take()
            t = Choice(t, self.pre())
        return t

    def pre(self) -> Term:
        kind, v, pos = self.peek()
        if kind == "ident" and v == "rec":
            self.take()
            kind, var, vpos = self.take()
            if kind != "ident" or var in RESERVED:
                raise MonitorSyntaxError("expected a variable after 'rec'", vpos)
            self.expect(".")
            return Rec(var, self.pre())
        if kind in ("ident", "sym") and self.toks[self.i + 1][:2] == ("op", "."):
            if v in RESERVED:
                raise MonitorSyntaxError(f"{v!r} cannot be used as an action", pos)
            if v not in self.alphabet:
                raise MonitorSyntaxError(f"unknown action {v!r}", pos)
            self.take()
            self.take()
            return Prefix(v, self.pre())
        return self.atom()

    def atom(self) -> Term:
        kind, v, pos = self.peek()
        if kind == "op" and v == "(":
            self.take()
            t = self.par()
            self.expect(")")
            return t
        if kind == "ident":
            self.take()
            if v in ("yes", "no", "end"):
                return Verdict(v)
            if v in RESERVED:
                raise MonitorSyntaxError(f"unexpected keyword {v!r}", pos)
            return Var(v)
        if kind == "sym" and v == TAU:
            raise MonitorSyntaxError("τ cannot be used as an action", pos)
        self.error("a monitor")
        raise AssertionError  # pragma: no cover


def parse_term(text: str, alphabet: Alphabet) -> Term:
    return _Parser(text, alphabet).parse()


def parse_monitor(text: str, alphabet: Alphabet) -> Monitor:
    """Parse concrete syntax into a normalised Monitor (may be open)."""
    return Monitor(parse_term(text, alphabet), alphabet)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class ValidationReport:
    closed: bool
    free_variables: tuple[str, ...]
    regular: bool
    deterministic: bool
    renamed: bool
    padded: bool
    findings: tuple[str, ...] = field(default=())
    monitor: Monitor | None = None


def is_deterministic(t: Term) -> bool:
    """Every maximal sum with >= 2 summands is a sum of prefixes on distinct actions."""
    if not is_regular(t) or free_vars(t):
        return False
    return _det_violation(t) is None


def _det_violation(t: Term) -> Term | None:
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Choice):
            parts = summands(s)
            acts = [p.action for p in parts if isinstance(p, Prefix)]
            if len(acts) != len(parts) or len(set(acts)) != len(acts):
                return s
            stack.extend(p.body for p in parts)
        elif isinstance(s, (Prefix, Rec)):
            stack.append(s.body)
        elif isinstance(s, Parallel):
            stack.extend((s.left, s.right))
    return None


def is_padded(t: Term) -> bool:
    """Every maximal sum that contains a prefix summand also has an ``end`` summand."""
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, (Choice, Prefix)):
            parts = summands(s)
            if any(isinstance(p, Prefix) for p in parts) and END not in parts:
                return False
            for p in parts:
                if isinstance(p, Prefix):
                    stack.append(p.body)
                elif not isinstance(p, Verdict):
                    stack.append(p)
        elif isinstance(s, Rec):
            stack.append(s.body)
        elif isinstance(s, Parallel):
            stack.extend((s.left, s.right))
    return True


def pad(t: Term) -> Term:
    """Append ``end`` to every maximal sum containing a prefix (no-op if present)."""
    if isinstance(t, (Verdict, Var)):
        return t
    if isinstance(t, Rec):
        return Rec(t.var, pad(t.body))
    if isinstance(t, Parallel):
        return type(t)(pad(t.left), pad(t.right))
    parts = summands(t)
    new = [Prefix(p.action, pad(p.body)) if isinstance(p, Prefix) else pad(p) for p in parts]
    if any(isinstance(p, Prefix) for p in parts) and END not in parts:
        new.append(END)
    return choice(*new)


def validate(m: Monitor | Term, alphabet: Alphabet | None = None) -> ValidationReport:
    if isinstance(m, Monitor):
        original, alphabet = m.term, m.alphabet
        mon = m
    else:
        if alphabet is None:
            raise ValueError("alphabet required for a bare term")
        original = m
        mon = Monitor(m, alphabet)
    renamed = mon.term != original
    fv = tuple(sorted(free_vars(mon.term)))
    regular = is_regular(mon.term)
    det = regular and not fv and _det_violation(mon.term) is None
    findings = []
    if fv:
        findings.append(f"free variables: {', '.join(fv)}")
    if renamed:
        findings.append("rec-variables renamed to keep binders unique")
    if regular and not det:
        v = _det_violation(mon.term)
        if v is not None:
            findings.append(f"non-deterministic sum: {show(v)}")
    return ValidationReport(
        closed=not fv,
        free_variables=fv,
        regular=regular,
        deterministic=det,
        renamed=renamed,
        padded=is_padded(mon.term),
        findings=tuple(findings),
        monitor=mon,
    )


# ---------------------------------------------------------------------------
# Structured documents

DOC_FORMAT = "monitorkit"
DOC_VERSION = 1

_NODE_KIND = {Prefix: "prefix", Choice: "choice", Rec: "rec", Var: "var", ParAnd: "par_and", ParOr: "par_or"}


def term_to_tree(t: Term) -> dict:
    if isinstance(t, Verdict):
        return {"node": "verdict", "value": t.value}
    if isinstance(t, Var):
        return {"node": "var", "name": t.name}
    if isinstance(t, Prefix):
        return {"node": "prefix", "action": t.action, "children": [term_to_tree(t.body)]}
    if isinstance(t, Rec):
        return {"node": "rec", "var": t.var, "children": [term_to_tree(t.body)]}
    return {"node": _NODE_KIND[type(t)], "children": [term_to_tree(t.left), term_to_tree(t.right)]}


def tree_to_term(d: dict) -> Term:
    try:
        kind = d["node"]
        kids = [tree_to_term(c) for c in d.get("children", [])]
        if kind == "verdict":
            return Verdict(d["value"])
        if kind == "var":
            return Var(d["name"])
        if kind == "prefix":
            (body,) = kids
            return Prefix(d["action"], body)
        if kind == "rec":
            (body,) = kids
            return Rec(d["var"], body)
        left, right = kids
        return {"choice": Choice, "par_and": ParAnd, "par_or": ParOr}[kind](left, right)
    except (KeyError, ValueError, TypeError) as exc:
        raise MonitorSyntaxError(f"malformed term document: {exc}") from exc


def monitor_to_doc(m: Monitor) -> dict:
    return {
        "format": DOC_FORMAT,
        "version": DOC_VERSION,
        "kind": "monitor",
        "alphabet": list(m.alphabet),
        "term": term_to_tree(m.term),
    }


def monitor_from_doc(doc: dict) -> Monitor:
    if doc.get("kind") != "monitor":
        raise MonitorSyntaxError(f"expected a monitor document, got kind={doc.get('kind')!r}")
    return Monitor(tree_to_term(doc["term"]), Alphabet(doc["alphabet"]))


def dumps_doc(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=False)
