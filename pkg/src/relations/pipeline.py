"""
Relation removal by splicing realizers into the host instance.

The first phase rewrites every relation into exactly-one relations and is
parsimonious; the second phase swaps exactly-one relations for
relation-free gadgets and only keeps solvability. Each realizer lands in
a fresh copy of a bag covering its scope, inserted right after that bag.
"""

from typing import Callable, Dict, List, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from ..core.decomposition import PathDecomposition, covering_bag, splice_after, validate_path_decomposition
from ..core.instance import Constraint, GraphRelInstance, InstanceBuilder
from ..core.pair import Pair
from ..exceptions import DecompositionError, PreconditionError
from ..oracle.gadget import PortalGadget
from .decision import infeasible_gadget, realize_hw1_decision
from .realize import RealizationReport, RealizationStage, realize_arbitrary, realize_compact, realize_eq


class SpliceResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    instance: GraphRelInstance
    decomposition: PathDecomposition
    mapping: Dict[int, int]


class RemovalReport(BaseModel):
    """What a relation-removal run did to the instance and its decomposition"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    width_in: int
    width_out: int
    width_constant: int = Field(description="sum over stages of the largest single splice")
    stage_sizes: Dict[RealizationStage, Tuple[int, ...]] = Field(default_factory=dict)
    realizations: Tuple[RealizationReport, ...] = ()

    @property
    def width_increase(self) -> int:
        return self.width_out - self.width_in


def splice(
    inst: GraphRelInstance,
    pd: PathDecomposition,
    index: int,
    gadget: PortalGadget,
) -> SpliceResult:
    """
    Replace constraint ``index`` of inst by gadget, identifying the gadget's
    i-th portal with the i-th scope vertex. The gadget's other vertices go
    into copies of the first bag covering the scope, one copy per bag of the
    gadget's own decomposition when it has one.
    """
    relation = inst.constraints[index]
    if len(gadget.portals) != relation.arity:
        raise PreconditionError("Splice", f"{gadget.name} has {len(gadget.portals)} portals for arity {relation.arity}")
    builder = InstanceBuilder.from_instance(inst)
    builder.constraints = [c for i, c in enumerate(inst.constraints) if i != index]
    mapping = builder.paste(gadget.instance, dict(zip(gadget.portals, relation.scope)))

    target = covering_bag(pd, relation.scope)
    if target is None:
        raise DecompositionError(f"no bag covers the scope {relation.scope}")
    if gadget.decomposition is not None and gadget.decomposition.bags:
        extra = [[mapping[v] for v in bag] for bag in gadget.decomposition.bags]
    else:
        extra = [[mapping[v] for v in range(gadget.n)]]
    return SpliceResult(instance=builder.freeze(), decomposition=splice_after(pd, target, extra), mapping=mapping)


def _check_input(inst: GraphRelInstance, pd: PathDecomposition) -> None:
    if inst.dagger_mode:
        raise PreconditionError("RemoveRelations", "dagger instances are not supported")
    if any(c.weights is not None for c in inst.constraints):
        raise PreconditionError("RemoveRelations", "weighted relations are not supported")
    report = validate_path_decomposition(inst, pd)
    if not report.valid:
        raise DecompositionError(f"invalid decomposition: {report.violation} {report.detail}")


class _Run:
    """Applies one stage at a time, rescanning the constraint list after each splice."""

    def __init__(self, inst: GraphRelInstance, pd: PathDecomposition):
        self.inst = inst
        self.pd = pd
        self.width_in = pd.width
        self.reports: List[RealizationReport] = []
        self.sizes: Dict[RealizationStage, List[int]] = {}

    def stage(
        self,
        stage: RealizationStage,
        wants: Callable[[Constraint], bool],
        build: Callable[[Constraint], PortalGadget],
        parsimonious: bool,
    ) -> None:
        sizes = self.sizes.setdefault(stage, [])
        while True:
            index = next((i for i, c in enumerate(self.inst.constraints) if wants(c)), None)
            if index is None:
                break
            relation = self.inst.constraints[index]
            gadget = build(relation)
            spliced = splice(self.inst, self.pd, index, gadget)
            added = gadget.n - len(gadget.portals)
            self.inst, self.pd = spliced.instance, spliced.decomposition
            sizes.append(added)
            self.reports.append(RealizationReport(
                relation=relation, gadget=gadget, stage=stage, parsimonious=parsimonious, added_vertices=added,
            ))
        logger.debug(f"stage {stage.value}: {len(sizes)} splice(s)")

    def report(self) -> RemovalReport:
        return RemovalReport(
            width_in=self.width_in,
            width_out=self.pd.width,
            width_constant=sum(max(sizes, default=0) for sizes in self.sizes.values()),
            stage_sizes={stage: tuple(sizes) for stage, sizes in self.sizes.items()},
            realizations=tuple(self.reports),
        )


def _to_hw1(run: _Run, pair: Pair) -> None:
    run.stage(
        RealizationStage.TO_HW1_EQ,
        lambda c: not c.is_hw1() and not c.is_equality(),
        lambda c: realize_arbitrary(c, pair),
        parsimonious=True,
    )
    run.stage(
        RealizationStage.EQ_TO_HW1,
        lambda c: c.is_equality() and not c.is_hw1(),
        lambda c: realize_eq(c.arity, pair) if c.arity else realize_arbitrary(c, pair),
        parsimonious=True,
    )


def reduce_to_hw1(
    inst: GraphRelInstance,
    pd: PathDecomposition,
    compact: bool = False,
) -> Tuple[GraphRelInstance, PathDecomposition, RemovalReport]:
    """
    Parsimonious rewrite of every relation into exactly-one relations of
    arity at most 2^d + 1. Needs non-empty σ, ρ with ρ != {0}.

    With compact, every relation that is not exactly-one goes through
    realize_compact in one stage, equalities included; the counting
    pipeline uses it to keep the rewritten instance small.

    Raises:
        PreconditionError: unsupported pair or instance
        DecompositionError: pd is not a decomposition of inst
    """
    _check_input(inst, pd)
    run = _Run(inst, pd)
    if compact:
        run.stage(
            RealizationStage.TO_HW1_EQ,
            lambda c: not c.is_hw1(),
            lambda c: realize_compact(c, inst.pair),
            parsimonious=True,
        )
    else:
        _to_hw1(run, inst.pair)
    report = run.report()
    logger.info(
        f"relations to exactly-one: {inst.n} -> {run.inst.n} vertices, "
        f"width {report.width_in} -> {report.width_out}"
    )
    return run.inst, run.pd, report


def remove_relations_decision(
    inst: GraphRelInstance,
    pd: PathDecomposition,
) -> Tuple[GraphRelInstance, PathDecomposition, RemovalReport]:
    """
    Relation-free instance that has a solution iff inst has one, with a
    decomposition whose width grows by at most report.width_constant.

    Raises:
        PreconditionError: infinite σ or ρ, 0 in ρ, several pairs, dagger or weighted input
        DecompositionError: pd is not a decomposition of inst
    """
    _check_input(inst, pd)
    if len(inst.family.pairs) != 1:
        raise PreconditionError("RemoveRelations", "the decision pipeline takes single-pair instances")
    pair = inst.pair
    if not (pair.sigma.is_finite and pair.rho.is_finite) or 0 in pair.rho:
        raise PreconditionError("RemoveRelations", "sigma and rho must be finite with 0 not in rho")

    run = _Run(inst, pd)
    if inst.constraints:
        _to_hw1(run, pair)
        run.stage(
            RealizationStage.HW1_TO_GRAPH,
            lambda c: True,
            lambda c: realize_hw1_decision(c.arity, pair) if c.arity else infeasible_gadget(pair),
            parsimonious=False,
        )
    report = run.report()
    logger.info(
        f"removed relations: {inst.n} -> {run.inst.n} vertices, {len(report.realizations)} splice(s), "
        f"width {report.width_in} -> {report.width_out} (constant {report.width_constant})"
    )
    return run.inst, run.pd, report

