"""Exhaustive ground truth: counts, languages, certification"""

from .gadget import PortalGadget, closed_neighbourhoods_disjoint, is_bipartite, is_regular
from .search import SolutionSearch, search_size, check_cap
from .oracle import (
    Count,
    ExtTable,
    LanguageReport,
    count_sets,
    partitioned_count,
    realized_language,
    all_witnesses,
    ext_table,
    evaluate_selection,
    selection_weight,
    normalise,
)
from .certify import (
    Verdict,
    CertificationResult,
    ManagerCertificate,
    ManagerFailure,
    certify_gadget,
    certify_manager,
    certify_witnesses,
    check_manager_structure,
)

__all__ = [
    "PortalGadget",
    "closed_neighbourhoods_disjoint",
    "is_bipartite",
    "is_regular",
    "SolutionSearch",
    "search_size",
    "check_cap",
    "Count",
    "ExtTable",
    "LanguageReport",
    "count_sets",
    "partitioned_count",
    "realized_language",
    "all_witnesses",
    "ext_table",
    "evaluate_selection",
    "selection_weight",
    "normalise",
    "Verdict",
    "CertificationResult",
    "ManagerCertificate",
    "ManagerFailure",
    "certify_gadget",
    "certify_manager",
    "certify_witnesses",
    "check_manager_structure",
]
