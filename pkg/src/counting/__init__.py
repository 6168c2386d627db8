"""Counting-side relation removal: interpolation, weighted kernels, reduction plans"""

from .interpolation import (
    coefficient_weights,
    evaluate_grid,
    evaluate_poly,
    exp_poly_weights,
    interpolate_grid,
    interpolate_poly,
    merge_terms,
    unknown_count,
)
from .kernels import (
    LINK_MATRIX,
    SATURATED,
    LinkOption,
    LinkWeights,
    certified_mirror_link,
    downshift_matrix,
    link_gadget,
    mirror_link_gadget,
    mirror_link_options,
    solve_downshift_weights,
    solve_link_weights,
)
from .profile import (
    GadgetClass,
    GadgetProfile,
    build_winner_or_strong_candidate,
    bundle,
    certify_profile,
    classify,
    hub,
    hub_gadget,
    pendant_gadget,
)
from .plan import Isolation, Op, OpCode, PlanQuery, ReductionPlan, ReductionStep, StepKind, run_program, step
from .steps import FORCED, ZERO_PAIR, apply_counting_step, selected, unselected
from .pipeline import case_a_steps, case_b_steps, case_c_steps, counting_case, remove_relations_counting

__all__ = [
    "coefficient_weights",
    "evaluate_grid",
    "evaluate_poly",
    "exp_poly_weights",
    "interpolate_grid",
    "interpolate_poly",
    "merge_terms",
    "unknown_count",
    "LINK_MATRIX",
    "SATURATED",
    "LinkWeights",
    "downshift_matrix",
    "link_gadget",
    "mirror_link_gadget",
    "mirror_link_options",
    "certified_mirror_link",
    "LinkOption",
    "solve_downshift_weights",
    "solve_link_weights",
    "GadgetClass",
    "GadgetProfile",
    "build_winner_or_strong_candidate",
    "bundle",
    "certify_profile",
    "classify",
    "hub",
    "hub_gadget",
    "pendant_gadget",
    "Isolation",
    "Op",
    "OpCode",
    "PlanQuery",
    "ReductionPlan",
    "ReductionStep",
    "StepKind",
    "run_program",
    "step",
    "FORCED",
    "ZERO_PAIR",
    "apply_counting_step",
    "selected",
    "unselected",
    "case_a_steps",
    "case_b_steps",
    "case_c_steps",
    "counting_case",
    "remove_relations_counting",
]
