"""Static secrecy analysis for cryptographic protocols.

The analyzer reads a protocol description, projects it into per-agent role
views, collects the encrypted patterns those views exchange, and compares
two information-flow bounds for every value an agent sends: who the
protecting pattern could be addressing, against who could have authored the
material the agent was given.  When the first reads at least as tightly as
the second on every send, the protocol keeps its declared secrets; when it
does not, the analyzer reports the names it could not justify and makes no
claim either way.
"""

from .context import (
    BOTTOM,
    TOP,
    KeyDeclaration,
    SecurityLevel,
    VerificationContext,
    finite,
    geq,
    intruder_allowed,
    intruder_knowledge,
    inverse_key,
    is_identity,
    join,
    key_mode,
    level_of,
    make_context,
    meet,
    meet_all,
)
from .derive import contribution_of, derive, derive_all, derive_keeping, f_derivative
from .errors import (
    AnalyzerError,
    ContextError,
    MessageSyntaxError,
    MismatchedUniverse,
    NoProtectivePattern,
    NonTermination,
    NotAKey,
    OccurrenceNotFound,
    SubstitutedIntoKeyPosition,
    UndeclaredIdentifier,
    UnleveledKey,
    VariableInKeyPosition,
    WellProtectionViolation,
)
from .oracle import (
    DeductionResult,
    PropertyReport,
    check_full_invariance,
    check_non_disclosure,
    deduce_closure,
    derivable,
    random_well_protected_set,
)
from .rewrite import (
    RewriteRule,
    ValidationReport,
    WellProtectedReport,
    access,
    check_well_protected,
    clear_atoms,
    default_rules,
    keys_of,
    normalize,
    validate_rewrite_system,
)
from .roles import (
    GeneralizedRole,
    Protocol,
    RoleStep,
    Step,
    extract_generalized_roles,
    generalized_message_space,
    load_protocol,
    parse_protocol,
    pattern_space,
    roles_for,
)
from .selection import (
    ALL_ATOMS,
    BROAD,
    KEY_ONLY,
    NEIGHBORS,
    SelectionInstance,
    SelectionResult,
    finite_selection,
    instance,
    interpret,
    psi,
    select,
    value_function,
)
from .terms import (
    EMPTY,
    Atom,
    Atomic,
    Concat,
    Empty,
    Enc,
    Message,
    Mode,
    Sort,
    Substitution,
    SymbolTable,
    atoms,
    body_atoms_in_order,
    concat,
    enc,
    encryption_patterns,
    flatten,
    parse_message,
    print_message,
    substitute,
    subterms,
    variables_of,
)
from .unify import candidate_sources, candidate_values, unify, unify_all
from .witness import (
    SYMBOLIC_UNKNOWN,
    AnalysisReport,
    CriterionRow,
    RowRecord,
    analyze,
    from_json_lines,
    lower_bound,
    reception_estimate,
    render_table,
    row_record,
    to_json_lines,
    upper_bound,
    witness_value,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
