"""Realizers for relations and the relation-removal pipelines"""

from .realize import (
    RealizationReport,
    RealizationStage,
    exactly_one_unit,
    realize_arbitrary,
    realize_compact,
    realize_eq,
    relation_language,
    relation_string,
)
from .decision import (
    build_forced_selected,
    forced_selected_core,
    forced_selected_helper,
    infeasible_gadget,
    realize_hw1_decision,
)
from .pipeline import RemovalReport, SpliceResult, reduce_to_hw1, remove_relations_decision, splice

__all__ = [
    "RealizationReport",
    "RealizationStage",
    "exactly_one_unit",
    "realize_arbitrary",
    "realize_compact",
    "realize_eq",
    "relation_language",
    "relation_string",
    "build_forced_selected",
    "forced_selected_core",
    "forced_selected_helper",
    "infeasible_gadget",
    "realize_hw1_decision",
    "RemovalReport",
    "SpliceResult",
    "reduce_to_hw1",
    "remove_relations_decision",
    "splice",
]
