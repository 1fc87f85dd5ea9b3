"""recHML formulas: syntax, fragments, lasso semantics and monitor synthesis.

Formula grammar (loosest first)::

    or    := and ('||' and)*
    and   := unary ('&&' unary)*
    unary := '[' act ']' unary | '<' act '>' unary
           | ('max' | 'min') VAR '.' unary | atom
    atom  := 'tt' | 'ff' | VAR | '(' or ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .automata import ACCEPT, REJECT, Polarity, lasso_member
from .terms import (
    END,
    NO,
    YES,
    Alphabet,
    Choice,
    Monitor,
    MonitorSyntaxError,
    ParAnd,
    ParOr,
    Prefix,
    Rec,
    Term,
    Var,
    Verdict,
    choice,
)

KEYWORDS = frozenset({"tt", "ff", "max", "min"})


class FormulaError(ValueError):
    pass


class FragmentError(FormulaError):
    pass


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return show_formula(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {show_formula(self)}>"


@dataclass(frozen=True, repr=False)
class TT(Formula):
    pass


@dataclass(frozen=True, repr=False)
class FF(Formula):
    pass


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Box(Formula):
    action: str
    body: Formula


@dataclass(frozen=True, repr=False)
class Diamond(Formula):
    action: str
    body: Formula


@dataclass(frozen=True, repr=False)
class Max(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, repr=False)
class Min(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, repr=False)
class FVar(Formula):
    name: str


TRUE_F = TT()
FALSE_F = FF()


def f_subterms(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, (And, Or)):
            stack.extend((g.right, g.left))
        elif isinstance(g, (Box, Diamond, Max, Min)):
            stack.append(g.body)


def f_free_vars(f: Formula) -> set[str]:
    if isinstance(f, FVar):
        return {f.name}
    if isinstance(f, (TT, FF)):
        return set()
    if isinstance(f, (And, Or)):
        return f_free_vars(f.left) | f_free_vars(f.right)
    if isinstance(f, (Max, Min)):
        return f_free_vars(f.body) - {f.var}
    return f_free_vars(f.body)


def formula_size(f: Formula) -> int:
    total = 0
    for g in f_subterms(f):
        if isinstance(g, (TT, FF, FVar)):
            total += 1
        elif isinstance(g, (And, Or)):
            total += 1
        elif isinstance(g, (Box, Diamond)):
            total += 2
        else:
            total += 3
    return total


# ---------------------------------------------------------------------------
# Fragments

_SHML = (TT, FF, And, Box, Max, FVar)
_CHML = (TT, FF, Or, Diamond, Min, FVar)


def in_shml(f: Formula) -> bool:
    return all(isinstance(g, _SHML) for g in f_subterms(f))


def in_chml(f: Formula) -> bool:
    return all(isinstance(g, _CHML) for g in f_subterms(f))


def in_maxhml(f: Formula) -> bool:
    return not any(isinstance(g, Min) for g in f_subterms(f))


def in_minhml(f: Formula) -> bool:
    return not any(isinstance(g, Max) for g in f_subterms(f))


def fragments(f: Formula) -> tuple[str, ...]:
    out = []
    for name, pred in (("sHML", in_shml), ("cHML", in_chml), ("maxHML", in_maxhml), ("minHML", in_minhml)):
        if pred(f):
            out.append(name)
    return tuple(out)


def default_polarity(f: Formula) -> Polarity:
    if in_shml(f):
        return REJECT
    if in_chml(f):
        return ACCEPT
    if in_maxhml(f):
        return REJECT
    if in_minhml(f):
        return ACCEPT
    raise FragmentError("formula mixes min and max fixpoints: outside every monitorable fragment")


# ---------------------------------------------------------------------------
# Printing and parsing


def show_formula(f: Formula) -> str:
    return _showf(f, 0)


def _showf(f: Formula, level: int) -> str:
    # level 0: or, 1: and, 2: unary
    if isinstance(f, TT):
        return "tt"
    if isinstance(f, FF):
        return "ff"
    if isinstance(f, FVar):
        return f.name
    if isinstance(f, Box):
        return f"[{f.action}]{_showf(f.body, 2)}"
    if isinstance(f, Diamond):
        return f"<{f.action}>{_showf(f.body, 2)}"
    if isinstance(f, (Max, Min)):
        kw = "max" if isinstance(f, Max) else "min"
        return f"{kw} {f.var}.{_showf(f.body, 2)}"
    if isinstance(f, And):
        s = f"{_showf(f.left, 1)} && {_showf(f.right, 2)}"
        return s if level <= 1 else f"({s})"
    s = f"{_showf(f.left, 0)} || {_showf(f.right, 1)}"
    return s if level == 0 else f"({s})"


_FTOKEN = re.compile(r"(?P<op>&&|\|\||[\[\]<>().])|(?P<ident>[A-Za-z0-9_][A-Za-z0-9_']*)|(?P<sym>\S)")


def _ftokens(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _FTOKEN.match(text, pos)
        toks.append((m.lastgroup, m.group(m.lastgroup), pos))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _FParser:
    def __init__(self, text: str, alphabet: Alphabet | None):
        self.toks = _ftokens(text)
        self.i = 0
        self.alphabet = alphabet

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, what: str):
        kind, v, pos = self.peek()
        where = "end of input" if kind == "eof" else repr(v)
        raise MonitorSyntaxError(f"expected {what}, found {where}", pos)

    def expect(self, v: str):
        if self.peek()[1] != v or self.peek()[0] == "eof":
            self.error(repr(v))
        self.take()

    def parse(self) -> Formula:
        f = self.or_()
        if self.peek()[0] != "eof":
            self.error("end of input")
        return f

    def or_(self) -> Formula:
        f = self.and_()
        while self.peek()[:2] == ("op", "||"):
            self.take()
            f = Or(f, self.and_())
        return f

    def and_(self) -> Formula:
        f = self.unary()
        while self.peek()[:2] == ("op", "&&"):
            self.take()
            f = And(f, self.unary())
        return f

    def action(self, close: str) -> str:
        kind, v, pos = self.take()
        if kind not in ("ident", "sym"):
            raise MonitorSyntaxError("expected an action", pos)
        if self.alphabet is not None and v not in self.alphabet:
            raise MonitorSyntaxError(f"unknown action {v!r}", pos)
        self.expect(close)
        return v

    def unary(self) -> Formula:
        kind, v, pos = self.peek()
        if (kind, v) == ("op", "["):
            self.take()
            a = self.action("]")
            return Box(a, self.unary())
        if (kind, v) == ("op", "<"):
            self.take()
            a = self.action(">")
            return Diamond(a, self.unary())
        if kind == "ident" and v in ("max", "min"):
            self.take()
            k2, var, vpos = self.take()
            if k2 != "ident" or var in KEYWORDS:
                raise MonitorSyntaxError(f"expected a variable after {v!r}", vpos)
            self.expect(".")
            body = self.unary()
            return Max(var, body) if v == "max" else Min(var, body)
        return self.atom()

    def atom(self) -> Formula:
        kind, v, pos = self.peek()
        if (kind, v) == ("op", "("):
            self.take()
            f = self.or_()
            self.expect(")")
            return f
        if kind == "ident":
            self.take()
            if v == "tt":
                return TRUE_F
            if v == "ff":
                return FALSE_F
            if v in KEYWORDS:
                raise MonitorSyntaxError(f"unexpected keyword {v!r}", pos)
            return FVar(v)
        self.error("a formula")
        raise AssertionError  # pragma: no cover


def parse_formula(text: str, alphabet: Alphabet | None = None) -> Formula:
    f = _FParser(text, alphabet).parse()
    free = f_free_vars(f)
    if free:
        raise FormulaError(f"unbound variable(s): {', '.join(sorted(free))}")
    return f


# ---------------------------------------------------------------------------
# Lasso semantics


@dataclass(frozen=True)
class Lasso:
    u: tuple
    v: tuple

    def __post_init__(self):
        if not self.v:
            raise ValueError("lasso period must be non-empty")


def eval_formula_lasso(f: Formula, u, v=None) -> bool:
    """Does u·v^ω satisfy f?  Positions of the lasso are 0..|u|+|v|-1; sets of
    positions are int bitmasks and fixpoints are iterated to stability."""
    if isinstance(u, Lasso):
        u, v = u.u, u.v
    u, v = tuple(u), tuple(v)
    if not v:
        raise ValueError("lasso period must be non-empty")
    if f_free_vars(f):
        raise FormulaError("open formula")
    word = u + v
    n = len(word)
    full = (1 << n) - 1
    succ = [i + 1 if i + 1 < n else len(u) for i in range(n)]
    by_action: dict[str, int] = {}
    for i, a in enumerate(word):
        by_action[a] = by_action.get(a, 0) | (1 << i)

    def pre(mask: int) -> int:
        # positions whose successor is in mask
        out = 0
        for i in range(n):
            if mask >> succ[i] & 1:
                out |= 1 << i
        return out

    def ev(g: Formula, env: dict) -> int:
        if isinstance(g, TT):
            return full
        if isinstance(g, FF):
            return 0
        if isinstance(g, FVar):
            return env[g.name]
        if isinstance(g, And):
            return ev(g.left, env) & ev(g.right, env)
        if isinstance(g, Or):
            return ev(g.left, env) | ev(g.right, env)
        if isinstance(g, Box):
            here = by_action.get(g.action, 0)
            return (full & ~here) | (here & pre(ev(g.body, env)))
        if isinstance(g, Diamond):
            return by_action.get(g.action, 0) & pre(ev(g.body, env))
        cur = full if isinstance(g, Max) else 0
        while True:
            nxt = ev(g.body, {**env, g.var: cur})
            if nxt == cur:
                return cur
            cur = nxt

    return bool(ev(f, {}) & 1)


# ---------------------------------------------------------------------------
# Synthesis and back


def synthesize(f: Formula, alphabet: Alphabet, polarity: Polarity | None = None) -> Monitor:
    """Monitor for f: a rejection monitor (L_r·Act^ω = complement of f) for the
    max fragments, an acceptance monitor (L_a·Act^ω = f) for the min fragments."""
    if f_free_vars(f):
        raise FormulaError("open formula")
    pol = polarity or default_polarity(f)
    if pol is REJECT and not in_maxhml(f):
        raise FragmentError("rejection monitors need a formula without least fixpoints")
    if pol is ACCEPT and not in_minhml(f):
        raise FragmentError("acceptance monitors need a formula without greatest fixpoints")
    for g in f_subterms(f):
        if isinstance(g, (Box, Diamond)) and g.action not in alphabet:
            raise FormulaError(f"unknown action {g.action!r}")
    acts = alphabet.actions
    counter = [0]
    target = NO if pol is REJECT else YES

    def go(g: Formula, env: dict) -> Term:
        if isinstance(g, TT):
            return END if pol is REJECT else YES
        if isinstance(g, FF):
            return NO if pol is REJECT else END
        if isinstance(g, FVar):
            return Var(env[g.name])
        if isinstance(g, (Max, Min)):
            x = f"x{counter[0]}"
            counter[0] += 1
            return Rec(x, go(g.body, {**env, g.var: x}))
        if isinstance(g, (And, Or)):
            l, r = go(g.left, env), go(g.right, env)
            # the connective whose violation/satisfaction is a union becomes a sum
            if isinstance(g, And) == (pol is REJECT):
                return Choice(l, r)
            return ParOr(l, r) if pol is REJECT else ParAnd(l, r)
        body = go(g.body, env)
        guarded = isinstance(g, Box) == (pol is REJECT)
        if guarded:
            return choice(Prefix(g.action, body), END)
        others = [Prefix(b, target) for b in acts if b != g.action]
        return choice(*others, Prefix(g.action, body), END)

    return Monitor(go(f, {}), alphabet)


def monitor_to_formula(m: Monitor, polarity: Polarity) -> Formula:
    """Formula whose models are the traces m does not reject (Reject) or the
    traces m accepts (Accept), on infinite traces."""
    from .semantics import OpenTermError
    from .terms import free_vars

    if free_vars(m.term):
        raise OpenTermError(f"open term: free {sorted(free_vars(m.term))}")
    rej = polarity is REJECT

    def go(t: Term) -> Formula:
        if isinstance(t, Verdict):
            if rej:
                return FALSE_F if t == NO else TRUE_F
            return TRUE_F if t == YES else FALSE_F
        if isinstance(t, Var):
            return FVar(t.name.upper())
        if isinstance(t, Rec):
            v = t.var.upper()
            return Max(v, go(t.body)) if rej else Min(v, go(t.body))
        if isinstance(t, Prefix):
            return Box(t.action, go(t.body)) if rej else Diamond(t.action, go(t.body))
        l, r = go(t.left), go(t.right)
        if isinstance(t, Choice):
            return And(l, r) if rej else Or(l, r)
        if isinstance(t, ParAnd):
            return And(l, r)
        return Or(l, r)

    return simplify(go(m.term))


def simplify(f: Formula) -> Formula:
    """Constant folding for tt/ff under the boolean connectives."""
    if isinstance(f, (TT, FF, FVar)):
        return f
    if isinstance(f, (Box, Diamond)):
        body = simplify(f.body)
        if isinstance(f, Box) and isinstance(body, TT):
            return TRUE_F
        if isinstance(f, Diamond) and isinstance(body, FF):
            return FALSE_F
        return type(f)(f.action, body)
    if isinstance(f, (Max, Min)):
        body = simplify(f.body)
        if f.var not in f_free_vars(body):
            return body
        return type(f)(f.var, body)
    l, r = simplify(f.left), simplify(f.right)
    if isinstance(f, And):
        if isinstance(l, FF) or isinstance(r, FF):
            return FALSE_F
        if isinstance(l, TT):
            return r
        if isinstance(r, TT):
            return l
        return And(l, r)
    if isinstance(l, TT) or isinstance(r, TT):
        return TRUE_F
    if isinstance(l, FF):
        return r
    if isinstance(r, FF):
        return l
    return Or(l, r)


def translate_max_to_safety(f: Formula, alphabet: Alphabet, opts=None, ledger=None) -> Formula:
    """Equivalent sHML formula for a maxHML formula, through the monitor pipeline."""
    from .transform import DEFAULT_OPTIONS, parallel_to_regular

    if not in_maxhml(f):
        raise FragmentError("translate_max_to_safety needs a maxHML formula")
    m = synthesize(f, alphabet, REJECT)
    r = parallel_to_regular(m, opts or DEFAULT_OPTIONS, ledger)
    return monitor_to_formula(r, REJECT)


def monitor_lasso_verdict(dfa, u, v) -> bool:
    """Lasso membership in an extension-closed verdict DFA."""
    return lasso_member(dfa, u, v)


# ---------------------------------------------------------------------------
# Documents


def formula_to_tree(f: Formula) -> dict:
    if isinstance(f, TT):
        return {"node": "tt"}
    if isinstance(f, FF):
        return {"node": "ff"}
    if isinstance(f, FVar):
        return {"node": "var", "var": f.name}
    if isinstance(f, (And, Or)):
        return {"node": "and" if isinstance(f, And) else "or", "children": [formula_to_tree(f.left), formula_to_tree(f.right)]}
    if isinstance(f, (Box, Diamond)):
        return {"node": "box" if isinstance(f, Box) else "diamond", "action": f.action, "children": [formula_to_tree(f.body)]}
    return {"node": "max" if isinstance(f, Max) else "min", "var": f.var, "children": [formula_to_tree(f.body)]}


def tree_to_formula(d: dict) -> Formula:
    node = d.get("node")
    kids = [tree_to_formula(c) for c in d.get("children", [])]
    if node == "tt":
        return TRUE_F
    if node == "ff":
        return FALSE_F
    if node == "var":
        return FVar(d["var"])
    if node in ("and", "or") and len(kids) == 2:
        return (And if node == "and" else Or)(*kids)
    if node in ("box", "diamond") and len(kids) == 1:
        return (Box if node == "box" else Diamond)(d["action"], kids[0])
    if node in ("max", "min") and len(kids) == 1:
        return (Max if node == "max" else Min)(d["var"], kids[0])
    raise ValueError(f"malformed formula node {d!r}")


def formula_to_doc(f: Formula, alphabet: Alphabet | None = None) -> dict:
    doc = {"format": "monitorkit", "version": 1, "kind": "formula", "fragments": list(fragments(f))}
    if alphabet is not None:
        doc["alphabet"] = list(alphabet)
    doc["formula"] = formula_to_tree(f)
    return doc


def formula_from_doc(doc: dict) -> Formula:
    if doc.get("format") != "monitorkit" or doc.get("kind") != "formula":
        raise ValueError("not a monitorkit formula document")
    f = tree_to_formula(doc["formula"])
    if f_free_vars(f):
        raise FormulaError("open formula")
    return f
