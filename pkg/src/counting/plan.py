"""
Reduction plans: query instances plus a postfix program that recombines
their counts into the count of the source instance.

A query may still carry pending reduction steps. Executing a plan expands
those steps one query at a time, so only one branch of the expansion is in
memory at once; expand() materialises everything for transcripts.
"""

import json
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from ..config import get_settings
from ..core.decomposition import PathDecomposition
from ..core.instance import GraphRelInstance, to_fraction
from ..core.pair import Pair
from ..core.srg_format import serialize_srg
from ..dp import count_dp
from ..exceptions import ConstructionError, IsolationError, ValidationError
from ..oracle.oracle import Count, count_sets, normalise
from .interpolation import evaluate_grid, interpolate_grid, interpolate_poly


class StepKind(str, Enum):
    COF_SHIFT_SIGMA = "cof_shift_sigma"
    COF_SHIFT_RHO = "cof_shift_rho"
    REL_WEIGHTS_TO_VERTEX_WEIGHTS = "rel_weights_to_vertex_weights"
    REMOVE_VERTEX_WEIGHTS = "remove_vertex_weights"
    HW1_TO_UNSEL_ONE = "hw1_to_unsel_one"
    HW1_TO_HW_LE1 = "hw1_to_hw_le1"
    HW_LE1_TO_VERTEX = "hw_le1_to_vertex"
    HW1_TO_HW_GE1 = "hw1_to_hw_ge1"
    HW_GE1_TO_VERTEX = "hw_ge1_to_vertex"
    SHIFT_RHO_BY_I = "shift_rho_by_i"
    FORCE_UNSELECTED = "force_unselected"
    HW_GE1_TO_ZERO_PAIR = "hw_ge1_to_zero_pair"
    ZERO_PAIR_TO_FORCED_SEL = "zero_pair_to_forced_sel"
    REMOVE_FORCED_SEL_FINITE = "remove_forced_sel_finite"
    DAGGER_LINK = "dagger_link"
    DAGGER_REL_WEIGHTS = "dagger_rel_weights"
    DAGGER_VERTEX_WEIGHTS = "dagger_vertex_weights"
    DAGGER_TO_HW1 = "dagger_to_hw1"
    DAGGER_HW1_TO_GE1 = "dagger_hw1_to_ge1"
    DAGGER_GE1_TO_VERTICES = "dagger_ge1_to_vertices"
    SHIFT_PAIR = "shift_pair"
    REMOVE_FORCED_SEL_COFINITE = "remove_forced_sel_cofinite"


class Isolation(str, Enum):
    """How a step reads the wanted term off its queries"""
    THRESHOLD = "threshold"
    SOLVE = "solve"


class ReductionStep(BaseModel):
    """One counting reduction with its parameters"""

    model_config = ConfigDict(frozen=True)

    kind: StepKind
    amount: int = Field(default=0, ge=0, description=(
        "i for shift_rho_by_i, s for shift_pair, b with |count| <= 2^b for dagger_vertex_weights"))
    target: Optional[Pair] = Field(default=None, description="target pair of the cofinite shifts")
    isolation: Optional[Isolation] = None

    def describe(self) -> str:
        text = self.kind.value
        if self.kind in (StepKind.SHIFT_RHO_BY_I, StepKind.SHIFT_PAIR) or self.amount:
            text += f"({self.amount})"
        if self.target is not None:
            text += f"[{self.target}]"
        if self.isolation is not None:
            text += f"/{self.isolation.value}"
        return text


def step(kind: StepKind, amount: int = 0, target: Optional[Pair] = None,
         isolation: Optional[Isolation] = None) -> ReductionStep:
    return ReductionStep(kind=kind, amount=amount, target=target, isolation=isolation)


class OpCode(str, Enum):
    QUERY = "query"
    PUSH = "push"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    FLOORDIV = "floordiv"
    MOD = "mod"
    DOT = "dot"
    COEFF = "coeff"
    EVALGRID = "evalgrid"
    CHECK = "check"


class Op(BaseModel):
    """One instruction of the recombination program"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    code: OpCode
    index: int = 0
    value: Optional[Fraction] = None
    nodes: Tuple[Fraction, ...] = ()
    axes: Tuple[Tuple[Fraction, ...], ...] = ()
    point: Tuple[Fraction, ...] = ()
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    note: str = ""

    @classmethod
    def query(cls, index: int) -> "Op":
        return cls(code=OpCode.QUERY, index=index)

    @classmethod
    def push(cls, value) -> "Op":
        return cls(code=OpCode.PUSH, value=to_fraction(value))

    @classmethod
    def binary(cls, code: OpCode) -> "Op":
        return cls(code=code)

    @classmethod
    def dot(cls, coefficients: Sequence) -> "Op":
        """Pop len(coefficients) values, push their weighted sum."""
        return cls(code=OpCode.DOT, nodes=tuple(to_fraction(c) for c in coefficients))

    @classmethod
    def coeff(cls, nodes: Sequence, index: int) -> "Op":
        """Pop one value per node, push coefficient ``index`` of the interpolating polynomial."""
        return cls(code=OpCode.COEFF, nodes=tuple(to_fraction(x) for x in nodes), index=index)

    @classmethod
    def evalgrid(cls, axes: Sequence[Sequence], point: Sequence) -> "Op":
        """Pop one value per grid point, push the grid polynomial at point."""
        return cls(code=OpCode.EVALGRID, axes=tuple(tuple(to_fraction(x) for x in a) for a in axes),
                   point=tuple(to_fraction(x) for x in point))

    @classmethod
    def check(cls, lo=None, hi=None, note: str = "") -> "Op":
        """Assert lo <= top < hi without popping."""
        return cls(code=OpCode.CHECK, lo=None if lo is None else to_fraction(lo),
                   hi=None if hi is None else to_fraction(hi), note=note)

    @property
    def arity(self) -> int:
        if self.code in (OpCode.DOT, OpCode.COEFF):
            return len(self.nodes)
        if self.code == OpCode.EVALGRID:
            size = 1
            for axis in self.axes:
                size *= len(axis)
            return size
        if self.code in (OpCode.QUERY, OpCode.PUSH):
            return 0
        if self.code == OpCode.CHECK:
            return 1
        return 2

    def describe(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"op": self.code.value}
        if self.code in (OpCode.QUERY, OpCode.COEFF):
            data["index"] = self.index
        if self.value is not None:
            data["value"] = str(self.value)
        if self.nodes:
            data["nodes"] = [str(x) for x in self.nodes]
        if self.axes:
            data["axes"] = [[str(x) for x in axis] for axis in self.axes]
            data["point"] = [str(x) for x in self.point]
        if self.lo is not None:
            data["lo"] = str(self.lo)
        if self.hi is not None:
            data["hi"] = str(self.hi)
        if self.note:
            data["note"] = self.note
        return data


def run_program(program: Sequence[Op], values: Sequence[Fraction]) -> Fraction:
    """
    Evaluate a postfix program over the query counts.

    Raises:
        IsolationError: a CHECK fails
        ConstructionError: malformed program
    """
    stack: List[Fraction] = []

    def pop(k: int) -> List[Fraction]:
        if len(stack) < k:
            raise ConstructionError(f"program stack underflow: need {k}, have {len(stack)}")
        taken = stack[len(stack) - k:]
        del stack[len(stack) - k:]
        return taken

    for op in program:
        code = op.code
        if code == OpCode.QUERY:
            stack.append(to_fraction(values[op.index]))
        elif code == OpCode.PUSH:
            stack.append(op.value)
        elif code == OpCode.DOT:
            taken = pop(len(op.nodes))
            stack.append(sum((c * v for c, v in zip(op.nodes, taken)), Fraction(0)))
        elif code == OpCode.COEFF:
            taken = pop(len(op.nodes))
            coefficients = interpolate_poly(list(zip(op.nodes, taken)))
            stack.append(coefficients[op.index] if op.index < len(coefficients) else Fraction(0))
        elif code == OpCode.EVALGRID:
            taken = pop(op.arity)
            stack.append(evaluate_grid(interpolate_grid(op.axes, taken), op.point))
        elif code == OpCode.CHECK:
            if not stack:
                raise ConstructionError("check on an empty stack")
            top = stack[-1]
            if (op.lo is not None and top < op.lo) or (op.hi is not None and top >= op.hi):
                raise IsolationError(f"isolation check failed: {top} outside [{op.lo}, {op.hi}) {op.note}")
        else:
            a, b = pop(2)
            if code == OpCode.ADD:
                stack.append(a + b)
            elif code == OpCode.SUB:
                stack.append(a - b)
            elif code == OpCode.MUL:
                stack.append(a * b)
            elif code == OpCode.DIV:
                if b == 0:
                    raise ConstructionError("division by zero in plan program")
                stack.append(a / b)
            elif code == OpCode.FLOORDIV:
                stack.append(Fraction(a // b))
            elif code == OpCode.MOD:
                stack.append(a % b)
    if len(stack) != 1:
        raise ConstructionError(f"program left {len(stack)} values on the stack")
    return stack[0]


class PlanQuery(BaseModel):
    """A query instance, its decomposition and the steps still to apply to it"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    instance: GraphRelInstance
    decomposition: PathDecomposition
    pending: Tuple[ReductionStep, ...] = ()


class ReductionPlan(BaseModel):
    """
    Queries and a program over their counts. Executing the program on exact
    counts of the queries yields the count of the instance the plan was
    built for.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    queries: Tuple[PlanQuery, ...]
    program: Tuple[Op, ...]
    notes: Tuple[str, ...] = ()

    @classmethod
    def identity(cls, inst: GraphRelInstance, pd: PathDecomposition, note: str = "") -> "ReductionPlan":
        return cls(queries=(PlanQuery(instance=inst, decomposition=pd),), program=(Op.query(0),),
                   notes=(note,) if note else ())

    @classmethod
    def of(cls, queries: Sequence[Tuple[GraphRelInstance, PathDecomposition]], program: Sequence[Op],
           notes: Sequence[str] = ()) -> "ReductionPlan":
        return cls(queries=tuple(PlanQuery(instance=i, decomposition=d) for i, d in queries),
                   program=tuple(program), notes=tuple(notes))

    @property
    def query_count(self) -> int:
        return len(self.queries)

    @property
    def is_expanded(self) -> bool:
        return all(not q.pending for q in self.queries)

    @property
    def width(self) -> int:
        return max((q.decomposition.width for q in self.queries), default=-1)

    def then(self, *steps: ReductionStep) -> "ReductionPlan":
        """Schedule steps on every query (applied on expansion or execution)."""
        queries = tuple(q.model_copy(update={"pending": q.pending + tuple(steps)}) for q in self.queries)
        return self.model_copy(update={"queries": queries})

    def compose(self, subplans: Sequence["ReductionPlan"]) -> "ReductionPlan":
        """Replace query i by subplans[i]: queries are concatenated and programs inlined."""
        if len(subplans) != len(self.queries):
            raise ValidationError(f"{len(self.queries)} queries but {len(subplans)} sub-plans")
        offsets, queries, notes = [], [], list(self.notes)
        for sub in subplans:
            offsets.append(len(queries))
            queries.extend(sub.queries)
            notes.extend(sub.notes)
        program: List[Op] = []
        for op in self.program:
            if op.code != OpCode.QUERY:
                program.append(op)
                continue
            sub = subplans[op.index]
            for inner in sub.program:
                program.append(Op.query(inner.index + offsets[op.index]) if inner.code == OpCode.QUERY else inner)
        return ReductionPlan(queries=tuple(queries), program=tuple(program), notes=tuple(notes))

    def _expand_query(self, query: PlanQuery) -> "ReductionPlan":
        from .steps import apply_counting_step

        first, rest = query.pending[0], query.pending[1:]
        return apply_counting_step(first, query.instance, query.decomposition).then(*rest)

    def expand(self) -> "ReductionPlan":
        """Apply every pending step."""
        if self.is_expanded:
            return self
        subplans = [
            self._expand_query(q).expand() if q.pending else ReductionPlan(queries=(q,), program=(Op.query(0),))
            for q in self.queries
        ]
        return self.compose(subplans)

    def execute(self, engine: Optional[str] = None, cap: Optional[int] = None, expand: bool = True,
                depth: Optional[int] = None) -> Count:
        """
        Count every query and run the program.

        Args:
            engine: "oracle" or "dp", defaults to the configured back end
            cap: oracle search cap
            expand: apply pending steps first; when False the queries are
                counted as they are, which both back ends support for
                labelled, weighted and dagger instances
            depth: expand at most this many levels of pending steps

        Raises:
            ValidationError: unknown engine
            IsolationError: a certified isolation check failed
        """
        engine = engine or get_settings().default_engine
        if engine not in ("oracle", "dp"):
            raise ValidationError(f"unknown engine '{engine}'")
        values: List[Fraction] = []
        for query in self.queries:
            if query.pending and expand and (depth is None or depth > 0):
                value = self._expand_query(query).execute(engine, cap, expand, None if depth is None else depth - 1)
            elif engine == "dp":
                value = count_dp(query.instance, query.decomposition)
            else:
                value = count_sets(query.instance, cap=cap)
            values.append(to_fraction(value))
        result = normalise(run_program(self.program, values))
        logger.debug(f"plan with {len(self.queries)} queries evaluated to {result}")
        return result

    def transcript(self) -> str:
        """JSON text with every query in srg form and the program."""
        data = {
            "queries": [
                {
                    "srg": serialize_srg(q.instance, q.decomposition),
                    "pending": [s.describe() for s in q.pending],
                }
                for q in self.queries
            ],
            "program": [op.describe() for op in self.program],
            "notes": list(self.notes),
        }
        return json.dumps(data, indent=2, ensure_ascii=False)
