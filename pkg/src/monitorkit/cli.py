"""Command-line interface.

Exit codes: 0 success or true, 1 false or negative result, 2 usage or input
error, 3 resource guard.  Errors go to stderr as ``error[<class>]: message``.
Files may be ``-`` for stdin; a file whose first character is ``{`` is read as
a structured document.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys

from . import __version__
from .automata import (
    ACCEPT,
    DFA,
    REJECT,
    NFA,
    Polarity,
    ResourceGuardExceeded,
    afa_to_dfa,
    afa_to_nfa,
    automaton_from_doc,
    automaton_to_doc,
    dnf_str,
    monitor_to_afa,
    to_dot,
)
from .logic import (
    Box,
    Diamond,
    FormulaError,
    Lasso,
    eval_formula_lasso,
    f_subterms,
    formula_from_doc,
    formula_to_doc,
    fragments,
    parse_formula,
    show_formula,
    synthesize,
)
from .semantics import Budget, BudgetExceeded, Kind, OpenTermError, run_finite_trace
from .terms import (
    RESERVED,
    Alphabet,
    AlphabetError,
    Monitor,
    MonitorSyntaxError,
    dumps_doc,
    monitor_from_doc,
    monitor_to_doc,
    parse_monitor,
    show,
    tokenize,
    validate,
)
from .transform import (
    InconsistentMonitorError,
    NotReactiveError,
    Options,
    SizeLedger,
    check_equivalence,
    parallel_to_deterministic,
    parallel_to_regular,
)

OK, FALSE, INPUT, GUARD = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int):
        super().__init__(message)
        self.kind = kind
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, INPUT)


# ---------------------------------------------------------------------------
# Input


def _read(path: str, stdin: str | None) -> str:
    if path == "-":
        return stdin if stdin is not None else sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError("input", f"cannot read {path}: {exc.strerror}", INPUT) from None


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("//", 1)[0] for line in text.splitlines())


def _as_doc(text: str) -> dict | None:
    if not text.lstrip().startswith("{"):
        return None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError("input", f"malformed document: {exc}", INPUT) from None
    if not isinstance(doc, dict) or doc.get("format") != "monitorkit":
        raise CliError("input", "not a monitorkit document", INPUT)
    return doc


def _split_alphabet(text: str | None) -> Alphabet | None:
    if text is None:
        return None
    return Alphabet(a for a in (s.strip() for s in text.split(",")) if a)


def _term_actions(text: str) -> set[str]:
    toks = tokenize(text)
    out = set()
    for i, (kind, v, _) in enumerate(toks[:-1]):
        after_rec = i > 0 and toks[i - 1][1] == "rec"
        if kind in ("ident", "sym") and toks[i + 1][:2] == ("op", ".") and not after_rec and v not in RESERVED:
            out.add(v)
    return out


def _formula_actions(text: str) -> set[str]:
    f = parse_formula(text)
    return {g.action for g in f_subterms(f) if isinstance(g, (Box, Diamond))}


def _alphabet(explicit: Alphabet | None, *action_sets: set[str]) -> Alphabet:
    if explicit is not None:
        return explicit
    acts = set().union(*action_sets)
    if not acts:
        raise CliError("input", "no actions to infer an alphabet from; pass --alphabet", INPUT)
    return Alphabet(sorted(acts))


def _load_monitors(paths, args, stdin) -> list[Monitor]:
    texts = [_strip_comments(_read(p, stdin)) for p in paths]
    docs = [_as_doc(t) for t in texts]
    explicit = _split_alphabet(args.alphabet)
    inferred = [_term_actions(t) for t, d in zip(texts, docs) if d is None]
    inferred += [set(d.get("alphabet", ())) for d in docs if d is not None]
    alphabet = _alphabet(explicit, *inferred)
    out = []
    for text, doc in zip(texts, docs):
        if doc is not None:
            m = monitor_from_doc(doc)
            if explicit is not None and m.alphabet != explicit:
                raise CliError("input", "document alphabet differs from --alphabet", INPUT)
            out.append(Monitor(m.term, alphabet))
        else:
            out.append(parse_monitor(text, alphabet))
    return out


def _load_formula(path, args, stdin):
    text = _strip_comments(_read(path, stdin))
    doc = _as_doc(text)
    explicit = _split_alphabet(args.alphabet)
    if doc is not None:
        f = formula_from_doc(doc)
        acts = set(doc.get("alphabet", ()))
    else:
        f = parse_formula(text, explicit)
        acts = set()
    acts |= {g.action for g in f_subterms(f) if isinstance(g, (Box, Diamond))}
    return f, _alphabet(explicit, acts)


def _polarity(name: str) -> Polarity:
    return ACCEPT if name == "accept" else REJECT


def _options(args) -> Options:
    return Options(
        pad=getattr(args, "pad", False),
        max_states=args.max_states,
        max_size=args.max_size,
        budget=Budget(args.tau_budget, args.frontier_budget),
    )


def _emit(args, doc: dict, text: str) -> None:
    if args.format == "doc":
        print(dumps_doc(doc))
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _automaton_text(x) -> str:
    acts = x.alphabet.actions
    if isinstance(x, DFA):
        lines = [f"DFA states={x.n_states} initial={x.initial}"]
        for q in range(x.n_states):
            mark = "*" if x.accepting[q] else " "
            lines.append(f"{mark}{q}: " + " ".join(f"{a}->{int(x.trans[q, i])}" for i, a in enumerate(acts)))
    elif isinstance(x, NFA):
        lines = [f"NFA states={x.n_states} initial={sorted(x.initial)}"]
        for q in range(x.n_states):
            mark = "*" if q in x.accepting else " "
            lines.append(f"{mark}{q}: " + " ".join(f"{a}->{sorted(x.delta[q][i])}" for i, a in enumerate(acts)))
    else:
        pol = x.polarity.value if x.polarity else "-"
        lines = [f"AFA polarity={pol} states={x.n_states} initial={dnf_str(x.initial)}"]
        for q in range(x.n_states):
            mark = "*" if q in x.accepting else " "
            label = show(x.states[q]) if not isinstance(x.states[q], str) else x.states[q]
            lines.append(f"{mark}{q} [{label}]")
            for i, a in enumerate(acts):
                lines.append(f"    {a} -> {dnf_str(x.delta[q][i])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subcommands


def _guess_kind(text: str, args) -> str:
    try:
        parse_monitor(text, _alphabet(_split_alphabet(args.alphabet), _term_actions(text), {"_"}))
        return "monitor"
    except (MonitorSyntaxError, AlphabetError) as exc:
        try:
            parse_formula(text)
            return "formula"
        except (MonitorSyntaxError, FormulaError):
            raise exc from None


def cmd_parse(args, stdin) -> int:
    text = _strip_comments(_read(args.file, stdin))
    doc = _as_doc(text)
    kind = args.kind
    if kind == "auto":
        kind = doc.get("kind", "") if doc is not None else _guess_kind(text, args)
    if kind == "monitor":
        (m,) = _load_monitors([args.file], args, text)
        rep = validate(m)
        info = (
            f"alphabet: {','.join(m.alphabet)}\nsize: {m.size()}\nclosed: {rep.closed}\n"
            f"regular: {rep.regular}\ndeterministic: {rep.deterministic}\npadded: {rep.padded}\n"
        )
        info += "".join(f"note: {f}\n" for f in rep.findings)
        _emit(args, monitor_to_doc(m), show(m.term) + "\n" + (info if args.verbose else ""))
        return OK
    if kind == "formula":
        f, alphabet = _load_formula(args.file, args, text)
        info = f"fragments: {','.join(fragments(f)) or 'none'}\n"
        _emit(args, formula_to_doc(f, alphabet), show_formula(f) + "\n" + (info if args.verbose else ""))
        return OK
    if kind in ("afa", "nfa", "dfa"):
        x = automaton_from_doc(doc)
        _emit(args, automaton_to_doc(x), _automaton_text(x))
        return OK
    if kind == "blowup_report":
        from .gapbench import COLUMNS

        rows = doc["rows"]
        lines = ["\t".join(COLUMNS)]
        lines += ["\t".join("" if r.get(c) is None else str(r.get(c)) for c in COLUMNS) for r in rows]
        _emit(args, doc, "\n".join(lines) + "\n")
        return OK
    raise CliError("input", f"unknown document kind {kind!r}", INPUT)


def cmd_run(args, stdin) -> int:
    (m,) = _load_monitors([args.monitor], args, stdin)
    if args.trace is not None and args.trace_file is not None:
        raise CliError("usage", "give either -t or --trace-file", INPUT)
    raw = args.trace if args.trace is not None else _read(args.trace_file or "-", stdin if args.monitor != "-" else None)
    trace = m.alphabet.parse_trace(raw)
    out = run_finite_trace(m, trace, Budget(args.tau_budget, args.frontier_budget))
    doc = {
        "format": "monitorkit",
        "version": 1,
        "kind": "outcome",
        "trace": list(trace),
        "outcome": out.kind.value,
        "witness_prefix_length": out.witness_prefix_length,
        "accept_at": out.accept_at,
        "reject_at": out.reject_at,
    }
    _emit(args, doc, str(out))
    if out.kind is Kind.BUDGET_EXCEEDED:
        print(f"error[guard]: τ/frontier budget exhausted (--tau-budget {args.tau_budget}, "
              f"--frontier-budget {args.frontier_budget})", file=sys.stderr)
        return GUARD
    return OK


def cmd_transform(args, stdin) -> int:
    (m,) = _load_monitors([args.monitor], args, stdin)
    opts = _options(args)
    if args.pad:
        from .terms import pad

        m = Monitor(pad(m.term), m.alphabet)
    ledger = SizeLedger(m.size())
    if args.to in ("regular", "deterministic"):
        fn = parallel_to_regular if args.to == "regular" else parallel_to_deterministic
        out = fn(m, Options(False, False, opts.max_states, opts.max_size, opts.budget), ledger)
        if args.emit == "sizes":
            _emit(args, {"format": "monitorkit", "version": 1, "kind": "size_ledger", **ledger.as_dict()},
                  "\n".join(ledger.lines()) + "\n")
        else:
            _emit(args, monitor_to_doc(out), show(out.term))
        return OK
    pol = _polarity(args.polarity)
    afa = monitor_to_afa(m, pol)
    x = afa if args.to == "afa" else afa_to_nfa(afa, opts.max_states) if args.to == "nfa" else afa_to_dfa(afa, opts.max_states)
    if args.emit == "sizes":
        doc = {"format": "monitorkit", "version": 1, "kind": "size_ledger", "input_size": m.size(),
               "automaton": args.to, "polarity": pol.value, "states": x.n_states}
        _emit(args, doc, f"input l = {m.size()}\n{args.to.upper()} states ({pol.value}) = {x.n_states}\n")
    else:
        _emit(args, automaton_to_doc(x), _automaton_text(x))
    return OK


def cmd_equiv(args, stdin) -> int:
    m1, m2 = _load_monitors([args.m1, args.m2], args, stdin)
    mode = "omega" if args.omega else "verdict"
    res = check_equivalence(m1, m2, mode, args.max_states)
    doc = {"format": "monitorkit", "version": 1, "kind": "equivalence", "mode": mode, "equivalent": res is True}
    if res is True:
        _emit(args, doc, f"EQUIVALENT ({mode})")
        return OK
    doc["counterexample"] = {
        "polarity": res.polarity.value,
        "trace": list(res.trace),
        "lasso": [list(res.lasso[0]), list(res.lasso[1])] if res.lasso else None,
    }
    _emit(args, doc, f"NOT EQUIVALENT ({mode})\ncounterexample {res.describe(m1.alphabet)}")
    return FALSE


def cmd_synth(args, stdin) -> int:
    f, alphabet = _load_formula(args.formula, args, stdin)
    pol = _polarity(args.polarity) if args.polarity else None
    m = synthesize(f, alphabet, pol)
    _emit(args, monitor_to_doc(m), show(m.term))
    return OK


def _parse_lasso(text: str, alphabet: Alphabet) -> Lasso:
    if text.count(":") != 1:
        raise CliError("input", "lasso must be written U:V", INPUT)
    u, v = text.split(":")
    v = alphabet.parse_trace(v)
    if not v:
        raise CliError("input", "lasso period V must be non-empty", INPUT)
    return Lasso(alphabet.parse_trace(u), v)


def cmd_eval(args, stdin) -> int:
    f, alphabet = _load_formula(args.formula, args, stdin)
    lasso = _parse_lasso(args.lasso, alphabet)
    val = eval_formula_lasso(f, lasso)
    doc = {"format": "monitorkit", "version": 1, "kind": "evaluation", "u": list(lasso.u), "v": list(lasso.v),
           "value": val}
    _emit(args, doc, "true" if val else "false")
    return OK if val else FALSE


def cmd_bench(args, stdin) -> int:
    from .gapbench import GapParams, GuardError, blowup_report, report_doc, report_table

    try:
        rows = [blowup_report(GapParams(l), args.family, args.max_states, args.max_size, not args.no_check)
                for l in args.l]
    except GuardError as exc:
        raise CliError("guard", str(exc), GUARD) from None
    text = f"# monitorkit {__version__} seed={args.seed}\n" + report_table(rows)
    text += "".join(f"# guard: {n}\n" for r in rows for n in r.notes)
    _emit(args, report_doc(rows, args.seed), text)
    return OK


def cmd_export(args, stdin) -> int:
    (m,) = _load_monitors([args.monitor], args, stdin)
    afa = monitor_to_afa(m, _polarity(args.polarity))
    x = afa if args.automaton == "afa" else afa_to_nfa(afa, args.max_states) if args.automaton == "nfa" \
        else afa_to_dfa(afa, args.max_states)
    if args.format == "doc":
        print(dumps_doc(automaton_to_doc(x)))
    else:
        sys.stdout.write(to_dot(x, args.automaton.upper()))
    return OK


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="monitorkit", description="Runtime monitors: parallel, regular and deterministic.")
    p.add_argument("--version", action="version", version=f"monitorkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, guards=False):
        sp.add_argument("--format", choices=("text", "doc"), default="text")
        sp.add_argument("--alphabet", help="comma-separated actions (default: inferred, sorted)")
        if guards:
            sp.add_argument("--max-states", type=int, default=200_000, help="automaton state guard (default 200000)")
            sp.add_argument("--max-size", type=int, default=2_000_000, help="output term size guard (default 2000000)")
        sp.add_argument("--tau-budget", type=int, default=10_000, help="τ-steps per action (default 10000)")
        sp.add_argument("--frontier-budget", type=int, default=100_000, help="frontier terms (default 100000)")

    sp = sub.add_parser("parse", help="validate and pretty-print a monitor, formula or document")
    sp.add_argument("file")
    sp.add_argument("--kind", choices=("auto", "monitor", "formula"), default="auto")
    sp.add_argument("-v", "--verbose", action="store_true", help="also print the validation report")
    common(sp)
    sp.set_defaults(fn=cmd_parse)

    sp = sub.add_parser("run", help="run a monitor on a finite trace")
    sp.add_argument("-m", "--monitor", required=True)
    sp.add_argument("-t", "--trace")
    sp.add_argument("--trace-file")
    common(sp)
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("transform", help="convert a monitor")
    sp.add_argument("-m", "--monitor", required=True)
    sp.add_argument("--to", required=True, choices=("regular", "deterministic", "afa", "nfa", "dfa"))
    sp.add_argument("--pad", action="store_true", help="add '+ end' to every sum with a prefix first")
    sp.add_argument("--emit", choices=("result", "sizes"), default="result")
    sp.add_argument("--polarity", choices=("accept", "reject"), default="accept", help="for afa/nfa/dfa")
    common(sp, guards=True)
    sp.set_defaults(fn=cmd_transform)

    sp = sub.add_parser("equiv", help="verdict (or ω-verdict) equivalence of two monitors")
    sp.add_argument("-m1", required=True)
    sp.add_argument("-m2", required=True)
    sp.add_argument("--omega", action="store_true")
    common(sp, guards=True)
    sp.set_defaults(fn=cmd_equiv)

    sp = sub.add_parser("synth", help="synthesise a monitor from a formula")
    sp.add_argument("-f", "--formula", required=True)
    sp.add_argument("--polarity", choices=("accept", "reject"))
    common(sp)
    sp.set_defaults(fn=cmd_synth)

    sp = sub.add_parser("eval", help="evaluate a formula on a lasso u·v^ω")
    sp.add_argument("-f", "--formula", required=True)
    sp.add_argument("--lasso", required=True, help="U:V with V non-empty")
    common(sp)
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("bench", help="size measurements")
    bsub = sp.add_subparsers(dest="bench", required=True, parser_class=_Parser)
    gp = bsub.add_parser("gap", help="size ledger for the gap families")
    gp.add_argument("--family", required=True, choices=("A", "U"))
    gp.add_argument("--l", type=int, nargs="+", required=True)
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--no-check", action="store_true", help="skip the equivalence checks")
    common(gp, guards=True)
    gp.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("export", help="export an automaton of a monitor")
    sp.add_argument("-m", "--monitor", required=True)
    sp.add_argument("--dot", action="store_true", help="DOT output (the text format)")
    sp.add_argument("--automaton", choices=("afa", "nfa", "dfa"), default="dfa")
    sp.add_argument("--polarity", choices=("accept", "reject"), default="accept")
    common(sp, guards=True)
    sp.set_defaults(fn=cmd_export)
    return p


_ERRORS = (
    ((ResourceGuardExceeded, BudgetExceeded), "guard", GUARD),
    ((MonitorSyntaxError, FormulaError, AlphabetError, OpenTermError, InconsistentMonitorError,
      NotReactiveError, KeyError, ValueError, TypeError), "input", INPUT),
)


def dispatch(argv: list[str], stdin: str | None = None) -> tuple[int, str, str]:
    """Run one command; returns (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = _run(argv, stdin)
    return code, out.getvalue(), err.getvalue()


def _run(argv, stdin) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args, stdin)
    except CliError as exc:
        print(f"error[{exc.kind}]: {exc}", file=sys.stderr)
        return exc.code
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:
        for types, kind, code in _ERRORS:
            if isinstance(exc, types):
                print(f"error[{kind}]: {exc}", file=sys.stderr)
                return code
        raise


def main(argv: list[str] | None = None) -> int:
    return _run(sys.argv[1:] if argv is None else argv, None)


if __name__ == "__main__":
    sys.exit(main())
