"""
Counting relation removal: picks the chain of reduction steps for the pair
and returns it as a lazy ReductionPlan. Only the exactly-one rewrite runs
eagerly; every later step is applied when the plan is expanded or executed.
"""

from typing import List, Optional

from loguru import logger

from ..core.decomposition import PathDecomposition, validate_path_decomposition
from ..core.instance import GraphRelInstance
from ..core.pair import Pair, is_trivial
from ..exceptions import DecompositionError, PreconditionError
from ..relations.pipeline import reduce_to_hw1
from .plan import Isolation, ReductionPlan, ReductionStep, StepKind, step


def counting_case(pair: Pair) -> str:
    """"A" when rho != Z>=0, "B" for rho = Z>=0 with finite sigma, "C" otherwise."""
    if not pair.rho.is_everything:
        return "A"
    return "B" if pair.sigma.is_finite else "C"


def case_a_steps(pair: Pair) -> List[ReductionStep]:
    rho_set, top = pair.rho, pair.r_top
    if rho_set.is_cofinite:
        first = [step(StepKind.HW1_TO_HW_GE1), step(StepKind.HW_GE1_TO_VERTEX)]
    elif top - 1 in rho_set:
        first = [step(StepKind.HW1_TO_HW_LE1), step(StepKind.HW_LE1_TO_VERTEX)]
    else:
        first = [step(StepKind.HW1_TO_UNSEL_ONE)]
    return first + [step(StepKind.SHIFT_RHO_BY_I, amount=top - 1), step(StepKind.FORCE_UNSELECTED)]


def case_b_steps(isolation: Isolation, hw1: bool = True) -> List[ReductionStep]:
    steps = [step(StepKind.HW1_TO_HW_GE1)] if hw1 else []
    return steps + [
        step(StepKind.HW_GE1_TO_ZERO_PAIR, isolation=isolation),
        step(StepKind.ZERO_PAIR_TO_FORCED_SEL),
        step(StepKind.REMOVE_FORCED_SEL_FINITE),
    ]


def case_c_steps(pair: Pair, isolation: Isolation, bits: int = 0) -> List[ReductionStep]:
    """Steps for cofinite sigma; bits bounds the count by 2^bits for the single-query weight removal."""
    return [
        step(StepKind.DAGGER_LINK),
        step(StepKind.DAGGER_REL_WEIGHTS),
        step(StepKind.DAGGER_VERTEX_WEIGHTS, amount=bits, isolation=isolation),
        step(StepKind.DAGGER_TO_HW1),
        step(StepKind.DAGGER_HW1_TO_GE1, isolation=isolation),
        step(StepKind.DAGGER_GE1_TO_VERTICES, isolation=isolation),
        step(StepKind.SHIFT_PAIR, amount=pair.s_top - 1),
        step(StepKind.REMOVE_FORCED_SEL_COFINITE, isolation=isolation),
    ]


def remove_relations_counting(
    inst: GraphRelInstance,
    pd: PathDecomposition,
    pair: Optional[Pair] = None,
    isolation: Isolation = Isolation.THRESHOLD,
    expand: bool = False,
) -> ReductionPlan:
    """
    Plan computing the number of (sigma, rho)-sets of inst from counts of
    relation-free plain instances.

    Args:
        inst: unweighted plain-mode instance over a single pair
        pd: path decomposition of inst
        pair: expected base pair, defaults to inst.pair
        isolation: how threshold-style steps isolate their term
        expand: apply every step now instead of on execution

    Raises:
        PreconditionError: trivial pair, pair mismatch, labelled, weighted or dagger input
        DecompositionError: pd is not a decomposition of inst
    """
    pair = pair or inst.pair
    if pair != inst.pair:
        raise PreconditionError("RemoveRelationsCounting", f"instance is over {inst.pair}, not {pair}")
    if is_trivial(pair).trivial:
        raise PreconditionError("RemoveRelationsCounting", f"trivial pair {pair}")
    if inst.dagger_mode or inst.is_weighted or len(inst.family.pairs) != 1:
        raise PreconditionError("RemoveRelationsCounting", "needs an unweighted single-pair plain-mode instance")
    report = validate_path_decomposition(inst, pd)
    if not report.valid:
        raise DecompositionError(f"invalid decomposition: {report.violation} {report.detail}")

    case = counting_case(pair)
    if not inst.constraints:
        return ReductionPlan.identity(inst, pd, note=f"case {case}: no relations")

    steps: List[ReductionStep]
    current, current_pd = inst, pd
    if case == "C":
        steps = case_c_steps(pair, isolation, inst.n)
    elif case == "B" and all(c.is_hw_ge1() for c in inst.constraints):
        steps = case_b_steps(isolation, hw1=False)
    else:
        if not all(c.is_hw1() for c in inst.constraints):
            current, current_pd, removal = reduce_to_hw1(inst, pd, compact=True)
            logger.debug(f"exactly-one rewrite: width {removal.width_in} -> {removal.width_out}")
        steps = case_a_steps(pair) if case == "A" else case_b_steps(isolation)

    plan = ReductionPlan.identity(current, current_pd, note=f"case {case} for {pair}").then(*steps)
    logger.info(f"counting removal for {pair}: case {case}, {len(steps)} step(s) scheduled")
    return plan.expand() if expand else plan
