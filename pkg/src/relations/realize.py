"""
Parsimonious realizers of arbitrary relations and of equality, built only
from exactly-one relations over {σ_s, ρ_r}-providers.

A relation R over d vertices is realized through the language L_R: the
string x_r is σ0 where r selects the scope vertex and ρ0 elsewhere, so a
realizer's portals never have graph neighbours inside the realizer.
"""

from enum import Enum
from typing import Dict, List, Tuple

from pydantic import BaseModel, ConfigDict

from ..core.instance import Constraint
from ..core.pair import Pair
from ..core.states import StateString, rho, sigma
from ..exceptions import PreconditionError, ValidationError
from ..oracle.gadget import PortalGadget
from ..providers import GadgetBuilder, first_member, parsimonious_sigma_rho


class RealizationStage(str, Enum):
    TO_HW1_EQ = "to_hw1_eq"
    EQ_TO_HW1 = "eq_to_hw1"
    HW1_TO_GRAPH = "hw1_to_graph"
    FORCED_SELECT = "forced_select"


class RealizationReport(BaseModel):
    """One relation replaced by a realizer"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    relation: Constraint
    gadget: PortalGadget
    stage: RealizationStage
    parsimonious: bool
    added_vertices: int = 0


def relation_string(mask: int, d: int) -> StateString:
    """x_r for the selection encoded by mask"""
    return tuple(sigma(0) if mask >> i & 1 else rho(0) for i in range(d))


def relation_language(relation: Constraint) -> List[StateString]:
    return [relation_string(mask, relation.arity) for mask in relation.accepted]


def _unit_states(pair: Pair) -> Tuple[int, int]:
    if not pair.non_empty:
        raise PreconditionError("Realizer", "sigma and rho must be non-empty")
    r = first_member(pair.rho, 1)
    if r is None:
        raise PreconditionError("Realizer", "rho must contain an element r >= 1 (rho = {0} is excluded)")
    return pair.s_min, r


def exactly_one_unit(pair: Pair) -> PortalGadget:
    """Parsimonious {σ_s, ρ_r}-provider using only HW(2)=1 relations."""
    s, r = _unit_states(pair)
    return parsimonious_sigma_rho(pair, s, r, via="hw1")


class _Units:
    """Attaches exactly-one units to fresh hub vertices and records the on/off witnesses."""

    def __init__(self, b: GadgetBuilder, pair: Pair):
        self.b = b
        self.unit = exactly_one_unit(pair)
        s, r = _unit_states(pair)
        self.on: StateString = (sigma(s),)
        self.off: StateString = (rho(r),)
        self.attached = {}

    def hub(self) -> int:
        v = self.b.vertex()
        self.attached[v] = self.b.attach(self.unit, [v])
        return v

    def selection(self, selected_hubs) -> List[int]:
        chosen: List[int] = []
        for v, copy in self.attached.items():
            chosen.extend(copy.witness(self.on if v in selected_hubs else self.off))
        return chosen


def realize_arbitrary(relation: Constraint, pair: Pair) -> PortalGadget:
    """
    Parsimonious realizer of L_R using exactly-one and equality relations.

    Per accepted selection q_i there is a hub t_i and one hub s_ij for each
    scope position j outside q_i; EQ ties the s_ij to t_i, one HW=1 over all
    t_i picks the selection, and per position j a HW=1 over u_j and every
    s_*j forces u_j. Relation arities stay at most |R| + 1.

    Raises:
        PreconditionError: rho = {0} or an empty set
        ValidationError: weighted relation
    """
    if relation.weights is not None:
        raise ValidationError("weighted relations have no decision realizer")
    d = relation.arity
    b = GadgetBuilder(pair, f"realize_arbitrary(d={d},|R|={len(relation.accepted)})")
    ports = b.portals_n(d)
    units = _Units(b, pair)

    ts: List[int] = []
    hubs_at: Dict[int, List[int]] = {j: [] for j in range(d)}
    picked: Dict[int, List[int]] = {}
    for mask in relation.accepted:
        missing = [j for j in range(d) if not mask >> j & 1]
        s_hubs = []
        for j in missing:
            s = units.hub()
            hubs_at[j].append(s)
            s_hubs.append(s)
        t = units.hub()
        ts.append(t)
        picked[mask] = s_hubs + [t]
        if s_hubs:
            b.graph.add_constraint(Constraint.equality(s_hubs + [t]))
    b.graph.add_constraint(Constraint.hw_eq(ts, 1))
    for j in range(d):
        b.graph.add_constraint(Constraint.hw_eq([ports[j]] + hubs_at[j], 1))

    witnesses: Dict[StateString, List[int]] = {}
    for mask in relation.accepted:
        chosen = [ports[j] for j in range(d) if mask >> j & 1]
        chosen.extend(units.selection(set(picked[mask])))
        witnesses[relation_string(mask, d)] = chosen
    return b.build(witnesses.keys(), witnesses, parsimonious=True)


def realize_eq(k: int, pair: Pair) -> PortalGadget:
    """
    Parsimonious realizer of EQ(k): for k >= 2 one hub v carrying an
    exactly-one unit and a pairwise HW(2)=1 between v and every portal.

    Raises:
        ValidationError: k < 1
        PreconditionError: rho = {0}
    """
    if k < 1:
        raise ValidationError(f"equality arity must be positive, got {k}")
    _unit_states(pair)
    b = GadgetBuilder(pair, f"realize_eq(k={k})")
    ports = b.portals_n(k)
    if k == 1:
        return b.build([(sigma(0),), (rho(0),)], {(sigma(0),): ports, (rho(0),): []}, parsimonious=True)
    units = _Units(b, pair)
    v = units.hub()
    for u in ports:
        b.graph.add_constraint(Constraint.hw_eq([v, u], 1))
    all_on = tuple([sigma(0)] * k)
    all_off = tuple([rho(0)] * k)
    witnesses = {
        all_on: list(ports) + units.selection(set()),
        all_off: units.selection({v}),
    }
    return b.build(witnesses.keys(), witnesses, parsimonious=True)



def realize_compact(relation: Constraint, pair: Pair) -> PortalGadget:
    """
    Parsimonious realizer of L_R using exactly-one relations only: one hub
    t_q per accepted selection q under a HW=1 over all hubs, and per scope
    position j a HW=1 over u_j and the t_q with j outside q. Needs |R| hubs
    where realize_arbitrary needs one per missing position as well.

    Raises:
        PreconditionError: rho = {0} or an empty set
        ValidationError: weighted relation
    """
    if relation.weights is not None:
        raise ValidationError("weighted relations have no decision realizer")
    d = relation.arity
    b = GadgetBuilder(pair, f"realize_compact(d={d},|R|={len(relation.accepted)})")
    ports = b.portals_n(d)
    units = _Units(b, pair)
    hubs = {mask: units.hub() for mask in relation.accepted}
    b.graph.add_constraint(Constraint.hw_eq(list(hubs.values()), 1))
    for j in range(d):
        outside = [t for mask, t in hubs.items() if not mask >> j & 1]
        b.graph.add_constraint(Constraint.hw_eq([ports[j]] + outside, 1))

    witnesses: Dict[StateString, List[int]] = {}
    for mask, t in hubs.items():
        chosen = [ports[j] for j in range(d) if mask >> j & 1]
        chosen.extend(units.selection({t}))
        witnesses[relation_string(mask, d)] = chosen
    return b.build(witnesses.keys(), witnesses, parsimonious=True)
