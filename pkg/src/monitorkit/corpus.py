"""Seeded random monitors and formulas for property tests and benchmarks."""

from __future__ import annotations

import random

from .logic import FF, TT, And, Box, Diamond, Formula, FVar, Max, Min, Or
from .semantics import Budget, Reactivity, check_reactive
from .terms import END, NO, YES, Alphabet, Choice, Monitor, ParAnd, ParOr, Prefix, Rec, Term, Var, pad, term_size

AB = Alphabet(("a", "b"))


def random_term(rng: random.Random, depth: int, alphabet: Alphabet, parallel: bool,
                guarded=(), unguarded=(), counter=None) -> Term:
    """Closed term with guarded recursion.  Variables bound outside a parallel
    operator are visible inside it only rarely, which keeps τ-closures small."""
    counter = counter if counter is not None else [0]
    leaves = [YES, NO, END] + [Var(x) for x in guarded]
    if depth <= 0:
        return rng.choice(leaves)
    r = rng.random()
    if r < 0.18:
        return rng.choice(leaves)
    if r < 0.50:
        a = rng.choice(alphabet.actions)
        return Prefix(a, random_term(rng, depth - 1, alphabet, parallel, guarded + unguarded, (), counter))
    if r < 0.68:
        return Choice(
            random_term(rng, depth - 1, alphabet, parallel, guarded, unguarded, counter),
            random_term(rng, depth - 1, alphabet, parallel, guarded, unguarded, counter),
        )
    if r < 0.82:
        x = f"x{counter[0]}"
        counter[0] += 1
        return Rec(x, random_term(rng, depth - 1, alphabet, parallel, guarded, unguarded + (x,), counter))
    if parallel:
        inner = guarded if rng.random() < 0.1 else ()
        op = ParAnd if rng.random() < 0.5 else ParOr
        return op(
            random_term(rng, depth - 1, alphabet, parallel, inner, (), counter),
            random_term(rng, depth - 1, alphabet, parallel, inner, (), counter),
        )
    a = rng.choice(alphabet.actions)
    return Prefix(a, random_term(rng, depth - 1, alphabet, parallel, guarded + unguarded, (), counter))


def random_monitors(n: int, seed: int = 0, alphabet: Alphabet = AB, max_size: int = 25,
                    parallel_ratio: float = 0.5, budget: Budget = Budget(500, 2000), depth: int = 5,
                    padded: bool = True, require_parallel: bool = False) -> list[Monitor]:
    """n distinct closed, reactive (padded) monitors of size <= max_size."""
    rng = random.Random(seed)
    out: list[Monitor] = []
    seen = set()
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 200 * n + 1000:
            raise RuntimeError("corpus generator could not find enough monitors")
        par = rng.random() < parallel_ratio
        t = random_term(rng, depth, alphabet, par)
        if padded:
            t = pad(t)
        if term_size(t) > max_size or t in seen:
            continue
        if par and require_parallel and not any(isinstance(s, (ParAnd, ParOr)) for s in _nodes(t)):
            continue
        m = Monitor(t, alphabet)
        if check_reactive(m, budget).status is not Reactivity.REACTIVE:
            continue
        seen.add(t)
        out.append(m)
    return out


def _nodes(t: Term):
    from .terms import subterms

    return subterms(t)


# ---------------------------------------------------------------------------
# Formulas

FRAGMENTS = ("sHML", "cHML", "maxHML", "minHML")


def random_formula(rng: random.Random, fragment: str, depth: int, alphabet: Alphabet = AB,
                   bound=(), counter=None) -> Formula:
    counter = counter if counter is not None else [0]
    leaves = [TT(), FF()] + [FVar(x) for x in bound]
    if depth <= 0 or rng.random() < 0.15:
        return rng.choice(leaves)
    a = rng.choice(alphabet.actions)
    ops = {
        "sHML": ("and", "box", "max"),
        "cHML": ("or", "dia", "min"),
        "maxHML": ("and", "or", "box", "dia", "max"),
        "minHML": ("and", "or", "box", "dia", "min"),
    }[fragment]
    op = rng.choice(ops)
    sub = lambda b=bound: random_formula(rng, fragment, depth - 1, alphabet, b, counter)  # noqa: E731
    if op == "and":
        return And(sub(), sub())
    if op == "or":
        return Or(sub(), sub())
    if op == "box":
        return Box(a, sub())
    if op == "dia":
        return Diamond(a, sub())
    x = f"X{counter[0]}"
    counter[0] += 1
    body = sub(bound + (x,))
    return Max(x, body) if op == "max" else Min(x, body)


def random_formulas(n: int, fragment: str, seed: int = 0, depth: int = 5, alphabet: Alphabet = AB) -> list[Formula]:
    rng = random.Random(f"{fragment}:{seed}")
    return [random_formula(rng, fragment, depth, alphabet) for _ in range(n)]
