"""Runtime monitors with parallel composition: execution, automata, transformations,
recHML synthesis and succinctness-gap benchmarks."""

__version__ = "0.1.0"

from .terms import (  # noqa: E402
    END,
    NO,
    YES,
    Alphabet,
    Monitor,
    parse_monitor,
    show,
    term_size,
    validate,
)
from .semantics import Budget, Kind, Outcome, check_consistent, check_reactive, run_finite_trace  # noqa: E402
from .automata import (  # noqa: E402
    ACCEPT,
    REJECT,
    afa_accepts,
    afa_to_nfa,
    dfa_language_equal,
    extension_close,
    monitor_to_afa,
    nfa_to_dfa,
)
from .transform import (  # noqa: E402
    check_equivalence,
    determinize_regular,
    parallel_to_deterministic,
    parallel_to_regular,
)
from .logic import eval_formula_lasso, parse_formula, synthesize  # noqa: E402

__all__ = [
    "END", "NO", "YES", "Alphabet", "Monitor", "parse_monitor", "show", "term_size", "validate",
    "Budget", "Kind", "Outcome", "check_consistent", "check_reactive", "run_finite_trace",
    "ACCEPT", "REJECT", "afa_accepts", "afa_to_nfa", "dfa_language_equal", "extension_close",
    "monitor_to_afa", "nfa_to_dfa", "check_equivalence", "determinize_regular",
    "parallel_to_deterministic", "parallel_to_regular", "eval_formula_lasso", "parse_formula", "synthesize",
]
