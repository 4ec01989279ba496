"""hornxor: compile Horn theories with xor into xor-free companions.

The package parses a small Horn-clause protocol language with an
exclusive-or operator, checks the linearity and domination side
conditions, builds the equivalent xor-free theory, emits it in a
ProVerif-compatible Horn dialect, and ships a bounded derivation engine
(plain syntactic and modulo-xor) for validating both sides.
"""

from .terms import (
    App,
    Substitution,
    Term,
    Var,
    Xor,
    ZERO,
    apply_subst,
    compose_subst,
    const,
    equiv_mod_xor,
    is_ground,
    is_standard,
    reduced_summands,
    term_key,
    term_size,
    vars_of,
    xor,
    xor_reduce,
    xor_summands,
)
from .theory import (
    Atom,
    CorrespondenceQuery,
    Diagnostic,
    HornClause,
    ParseResult,
    Query,
    SecrecyQuery,
    Theory,
    TheoryError,
    load_theory,
    parse_theory,
    print_atom,
    print_term,
    print_theory,
    validate,
)
from .domination import (
    ClosureCapExceeded,
    CSet,
    NotXorLinear,
    compute_c_set,
    in_xor_closure,
    is_bad,
    is_c_dominated,
    is_xor_linear,
)
from .normalization import (
    NotCDominated,
    fragile_subterms,
    fsub,
    is_normal_form,
    match_bounded,
    match_mod_xor,
    normal_form,
    sigma_of,
)
from .reduction import (
    ClauseOrigin,
    ReducedTheory,
    XorOrigin,
    build_t_plus,
    reduce_stats,
)
from .engine import (
    CorrespondenceResult,
    Derivation,
    SearchBounds,
    SearchResult,
    check_correspondence,
    derive_mod_xor,
    derive_syntactic,
    format_trace,
    replay_to_xor,
    trace_json,
    verify_derivation,
)
from .emitter import (
    DIALECT,
    EmitError,
    EmitOptions,
    check_emitted,
    decode_proverif,
    emit_proverif,
)
from .corpus import list_examples, load_example

__version__ = "0.1.0"

__all__ = [
    "App", "Substitution", "Term", "Var", "Xor", "ZERO",
    "apply_subst", "compose_subst", "const", "equiv_mod_xor", "is_ground",
    "is_standard", "reduced_summands", "term_key", "term_size", "vars_of",
    "xor", "xor_reduce", "xor_summands",
    "Atom", "CorrespondenceQuery", "Diagnostic", "HornClause", "ParseResult",
    "Query", "SecrecyQuery", "Theory", "TheoryError", "load_theory",
    "parse_theory", "print_atom", "print_term", "print_theory", "validate",
    "ClosureCapExceeded", "CSet", "NotXorLinear", "compute_c_set",
    "in_xor_closure", "is_bad", "is_c_dominated", "is_xor_linear",
    "NotCDominated", "fragile_subterms", "fsub", "is_normal_form",
    "match_bounded", "match_mod_xor", "normal_form", "sigma_of",
    "ClauseOrigin", "ReducedTheory", "XorOrigin", "build_t_plus",
    "reduce_stats",
    "CorrespondenceResult", "Derivation", "SearchBounds", "SearchResult",
    "check_correspondence", "derive_mod_xor", "derive_syntactic",
    "format_trace", "replay_to_xor", "trace_json", "verify_derivation",
    "DIALECT", "EmitError", "EmitOptions", "check_emitted",
    "decode_proverif", "emit_proverif",
    "list_examples", "load_example",
    "__version__",
]
