"""
Ground-truth counting, realized languages and extension tables.
"""

from fractions import Fraction
from itertools import product
from typing import Dict, FrozenSet, List, Mapping, Optional, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from ..core.instance import GraphRelInstance
from ..core.states import Language, State, StateString, rho, sigma, state_of
from ..exceptions import ValidationError
from .gadget import PortalGadget
from .search import SolutionSearch, check_cap


Count = Union[int, Fraction]


def normalise(value: Fraction) -> Count:
    """Integers stay integers"""
    return value.numerator if value.denominator == 1 else value


def count_sets(
    inst: GraphRelInstance,
    cap: Optional[int] = None,
    fixed: Optional[Mapping[int, bool]] = None,
) -> Count:
    """
    Number of lambda-sets of inst (weighted sum when weights are present,
    dagger semantics when the flag is set).

    Args:
        inst: instance
        cap: search-size cap, defaults to the configured oracle cap
        fixed: vertices whose selection status is fixed in advance

    Raises:
        OracleCapExceeded: the search would exceed the cap
    """
    check_cap(inst, cap, fixed)
    total = [Fraction(0)]

    def on_leaf(value, sel, weight):
        total[0] += weight

    search = SolutionSearch(inst, fixed=fixed)
    search.run(on_leaf)
    logger.debug(f"count_sets: {search.nodes} search nodes")
    return normalise(total[0])


def partitioned_count(inst: GraphRelInstance, prefix: int, cap: Optional[int] = None) -> Count:
    """Sum of count_sets over all 2^prefix fixings of vertices 0..prefix-1."""
    prefix = min(prefix, inst.n)
    check_cap(inst, cap)
    total = Fraction(0)
    for bits in product((False, True), repeat=prefix):
        fixed = {v: bits[v] for v in range(prefix)}
        total += Fraction(count_sets(inst, cap=10 ** 9, fixed=fixed))
    return normalise(total)


def evaluate_selection(
    inst: GraphRelInstance,
    selection,
    portals=(),
) -> Optional[StateString]:
    """
    The portal string witnessed by selection, or None when selection is not
    a partial solution (relations included).
    """
    chosen = set(selection)
    adj = inst.adjacency()
    exempt = set(portals)
    if inst.dagger_mode:
        exempt |= inst.scoped_vertices()
    for v in range(inst.n):
        if v in exempt:
            continue
        seen = sum(1 for u in adj[v] if u in chosen)
        pair = inst.pair_of(v)
        if seen not in (pair.sigma if v in chosen else pair.rho):
            return None
    for c in inst.constraints:
        if c.mask_of(chosen) not in c.accepted:
            return None
    return tuple(state_of(p in chosen, sum(1 for u in adj[p] if u in chosen)) for p in portals)


def selection_weight(inst: GraphRelInstance, selection) -> Fraction:
    chosen = set(selection)
    weight = Fraction(1)
    for c in inst.constraints:
        weight *= c.weight(c.mask_of(chosen))
    for v in chosen:
        weight *= inst.vertex_weight(v)
    return weight


class LanguageReport(BaseModel):
    """Realized language with multiplicities"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    language: Language
    multiplicity: Dict[StateString, int] = Field(default_factory=dict)
    weight: Dict[StateString, Fraction] = Field(default_factory=dict)
    witnesses: Dict[StateString, FrozenSet[int]] = Field(default_factory=dict)

    def count(self, x) -> int:
        return self.multiplicity.get(tuple(x), 0)


def _portal_report(
    inst: GraphRelInstance,
    portals,
    cap: Optional[int],
    keep_all: bool = False,
):
    check_cap(inst, cap)
    portals = list(portals)
    multiplicity: Dict[StateString, int] = {}
    weight: Dict[StateString, Fraction] = {}
    witnesses: Dict[StateString, FrozenSet[int]] = {}
    every: Dict[StateString, List[FrozenSet[int]]] = {}

    def on_leaf(value, sel, w):
        x = tuple(state_of(value[p] == 1, sel[p]) for p in portals)
        multiplicity[x] = multiplicity.get(x, 0) + 1
        weight[x] = weight.get(x, Fraction(0)) + w
        if x not in witnesses or keep_all:
            chosen = frozenset(v for v, b in enumerate(value) if b == 1)
            witnesses.setdefault(x, chosen)
            if keep_all:
                every.setdefault(x, []).append(chosen)

    SolutionSearch(inst, portals=portals).run(on_leaf)
    report = LanguageReport(
        language=Language.of(len(portals), multiplicity.keys()),
        multiplicity=multiplicity,
        weight=weight,
        witnesses=witnesses,
    )
    return report, every


def realized_language(g: PortalGadget, cap: Optional[int] = None) -> LanguageReport:
    """
    All portal strings witnessed by some partial solution, each with its
    number of witnesses.
    """
    report, _ = _portal_report(g.instance, g.portals, cap)
    return report


def all_witnesses(g: PortalGadget, cap: Optional[int] = None) -> Dict[StateString, List[FrozenSet[int]]]:
    """Every partial solution grouped by the string it witnesses."""
    _, every = _portal_report(g.instance, g.portals, cap, keep_all=True)
    return every


class ExtTable(BaseModel):
    """Weighted number of partial solutions per portal state"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    entries: Dict[State, Fraction] = Field(default_factory=dict)

    def __getitem__(self, state: State) -> Count:
        return normalise(self.entries.get(state, Fraction(0)))

    def rho(self, i: int) -> Count:
        return self[rho(i)]

    def sigma(self, i: int) -> Count:
        return self[sigma(i)]

    def total(self) -> Count:
        return normalise(sum(self.entries.values(), Fraction(0)))


def ext_table(g: PortalGadget, cap: Optional[int] = None) -> ExtTable:
    """
    Extension counts of a single-portal gadget.

    Raises:
        ValidationError: the gadget does not have exactly one portal
    """
    if len(g.portals) != 1:
        raise ValidationError(f"ext_table needs exactly one portal, got {len(g.portals)}")
    report = realized_language(g, cap)
    entries = {x[0]: w for x, w in report.weight.items()}
    return ExtTable(n=g.n, entries=entries)
