"""SAT to (sigma, rho)-domination with relations"""

from .cnf import Assignment, SatInstance, clause_satisfied, parse_dimacs
from .encoding import (
    EncodingMap,
    choose_parameters,
    formula_q,
    invert_codeword,
    suggest_group_width,
    weight_classes,
)
from .compiler import CompiledSat, Port, SatAudit, audit_solution, compile_sat

__all__ = [
    "Assignment",
    "SatInstance",
    "clause_satisfied",
    "parse_dimacs",
    "EncodingMap",
    "choose_parameters",
    "formula_q",
    "invert_codeword",
    "suggest_group_width",
    "weight_classes",
    "CompiledSat",
    "Port",
    "SatAudit",
    "audit_solution",
    "compile_sat",
]
