"""Domain vocabulary: sets, pairs, states, instances and decompositions"""

from .intset import IntSet, SetKind
from .states import (
    Flavor,
    State,
    StateString,
    Language,
    sigma,
    rho,
    state_of,
    parse_state,
    parse_string,
    string_code,
    weight_vector,
)
from .pair import (
    Pair,
    PairFamily,
    Structure,
    Triviality,
    ManagerCase,
    UNBOUNDED,
    compute_tops,
    max_structured,
    is_m_structured,
    c_sigma_rho,
    invert_state,
    invert_string,
    is_trivial,
    trivial_count,
    manager_eligibility,
    alphabet_for_case,
)
from .instance import Constraint, GraphRelInstance, InstanceBuilder, popcount
from .decomposition import (
    PathDecomposition,
    DecompositionReport,
    validate_path_decomposition,
    covering_bag,
    fill_intervals,
    cover_missing,
    repair,
    splice_after,
    append_to_all,
)
from .srg_format import SrgDocument, parse_srg, serialize_srg

__all__ = [
    "IntSet",
    "SetKind",
    "Flavor",
    "State",
    "StateString",
    "Language",
    "sigma",
    "rho",
    "state_of",
    "parse_state",
    "parse_string",
    "string_code",
    "weight_vector",
    "Pair",
    "PairFamily",
    "Structure",
    "Triviality",
    "ManagerCase",
    "UNBOUNDED",
    "compute_tops",
    "max_structured",
    "is_m_structured",
    "c_sigma_rho",
    "invert_state",
    "invert_string",
    "is_trivial",
    "trivial_count",
    "manager_eligibility",
    "alphabet_for_case",
    "Constraint",
    "GraphRelInstance",
    "InstanceBuilder",
    "popcount",
    "PathDecomposition",
    "DecompositionReport",
    "validate_path_decomposition",
    "covering_bag",
    "fill_intervals",
    "cover_missing",
    "repair",
    "splice_after",
    "append_to_all",
    "SrgDocument",
    "parse_srg",
    "serialize_srg",
]
