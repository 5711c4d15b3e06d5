"""efmct: symbolic-graph representation of extended feature models, edit
rules as graph transformations, and static pairwise conflict detection."""

from .analysis import (
    ConflictReason,
    ContextTrace,
    ContextVerdict,
    CpaKind,
    OverlapContext,
    PairOutcome,
    PairVerdict,
    analyze_pair,
    analyze_ruleset,
    auxiliary_vars,
    check_direct_confluence,
    check_result_equivalence,
    cpa_filter,
    enumerate_overlaps,
    filter_wellformed,
)
from .efm import (
    ConfigSpace,
    ConfigurationAssignment,
    WellFormednessConstraint,
    builtin_constraints,
    check_configuration,
    check_wellformed,
    efm_type_graph,
    encode_config_semantics,
    has_valid_configuration,
)
from .formula import Formula, Substitution, free_vars, substitute
from .gluing import Overlap, glue
from .graph import Morphism, SymbolicGraph, TypeGraph, validate_graph
from .matching import find_isomorphisms, find_matches, kernel_name
from .rules import (
    Admissibility,
    ApplicationResult,
    ApplyStatus,
    SymbolicRule,
    apply,
    check_admissibility,
    find_rule_matches,
    validate_rule,
)
from .smt import SatResult, SmtVerdict, SolverConfig, Validity, check_sat, check_validity, emit_smtlib
from .sorts import BOOLEAN, NATURAL, REAL, Sort, Variable, enumeration

__version__ = "0.1.0"
