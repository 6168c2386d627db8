"""
Parsimonious providers: every declared string has exactly one witness and
no other string is realized.
"""

from enum import Enum
from typing import Dict, List, Optional, Union

from ..core.instance import Constraint
from ..core.pair import Pair
from ..core.states import StateString, rho, sigma
from ..exceptions import PreconditionError
from ..oracle.gadget import PortalGadget
from .builder import GadgetBuilder
from .simple import first_member, sigma_rho_provider


class Via(str, Enum):
    RELATION = "relation"
    HW1 = "hw1"


def parsimonious_sigma_rho(
    pair: Pair,
    s: Optional[int] = None,
    r: Optional[int] = None,
    via: Union[Via, str] = Via.RELATION,
) -> PortalGadget:
    """
    Parsimonious {σ_s, ρ_r}-provider.

    With via="relation" a single relation over all vertices accepts exactly
    the two witnesses. With via="hw1" (needs r >= 1) the two witnesses
    partition the vertex set and every cross pair carries HW(2)=1, so only
    pairwise exactly-one relations are used.
    """
    via = Via(via)
    if via == Via.HW1:
        r = first_member(pair.rho, 1) if r is None else r
        if r is None or r < 1:
            raise PreconditionError("ParsimoniousSR", "the exactly-one variant needs some r >= 1 in rho")
    s = pair.s_min if s is None else s
    r = pair.r_min if r is None else r
    base = sigma_rho_provider(pair, s, r)
    on = base.witness((sigma(s),))
    off = base.witness((rho(r),))

    b = GadgetBuilder(pair, f"parsimonious_sigma_rho(s={s},r={r},{via.value})")
    b.portal()
    mapping = b.graph.paste(base.instance, {base.portals[0]: 0})
    on_h = sorted(mapping[v] for v in on)
    off_h = sorted(mapping[v] for v in off)
    if via == Via.HW1:
        for v in off_h:
            for u in on_h:
                b.graph.add_constraint(Constraint.hw_eq([v, u], 1))
    else:
        scope = list(range(b.graph.n))
        b.graph.add_constraint(Constraint.from_sets(scope, [on_h, off_h]))
    return b.build(
        [(sigma(s),), (rho(r),)],
        {(sigma(s),): on_h, (rho(r),): off_h},
        parsimonious=True,
    )


def cofinite_sigma_aux(pair: Pair) -> PortalGadget:
    """
    Parsimonious {σ0, σ1, ρ0}-provider for cofinite σ. The portal u hangs
    off w, w sees v_1..v_ttop, each v_i carries a parsimonious
    {σ_stop, ρ_rmin}-provider, and one relation over u, w, v_* keeps
    exactly three selections.
    """
    if not pair.sigma.is_cofinite:
        raise PreconditionError("CofSigmaAux", "sigma must be cofinite")
    s_top, r_top, t_top = pair.s_top, pair.r_top, pair.t_top
    if r_top == 0 and 1 not in pair.rho:
        raise PreconditionError("CofSigmaAux", "rho must contain r_top >= 1 or 1")
    r_min = pair.r_min
    unit = parsimonious_sigma_rho(pair, s_top, r_min)

    b = GadgetBuilder(pair, "cofinite_sigma_aux")
    u = b.portal()
    w = b.vertex()
    vs = b.vertices(t_top)
    b.edge(u, w)
    for v in vs:
        b.edge(w, v)
    hubs = [b.attach(unit, [v]) for v in vs]

    def collect(core: List[int], selected_v: int) -> List[int]:
        chosen = list(core)
        for i, hub in enumerate(hubs):
            chosen.extend(hub.witness((sigma(s_top),) if i < selected_v else (rho(r_min),)))
        return chosen

    core_scope = [u, w, *vs]
    lowered = max(r_top - 1, 0)
    selections = {
        (rho(0),): ([], r_top),
        (sigma(0),): ([u], lowered),
        (sigma(1),): ([u, w], t_top),
    }
    witnesses: Dict[StateString, List[int]] = {}
    accepted = []
    for x, (core, k) in selections.items():
        witnesses[x] = collect(core, k)
        accepted.append(set(core) | set(vs[:k]))
    b.graph.add_constraint(Constraint.from_sets(core_scope, accepted))
    return b.build(witnesses.keys(), witnesses, parsimonious=True)


def cofinite_rho_aux(pair: Pair) -> PortalGadget:
    """
    Parsimonious {σ0, ρ0, ρ1}-provider for cofinite ρ: the portal u hangs
    off w, which carries a parsimonious {σ_smin, ρ_rtop}-provider, and a
    relation on (u, w) forbids selecting both.
    """
    if not pair.rho.is_cofinite:
        raise PreconditionError("CofRhoAux", "rho must be cofinite")
    s_min, r_top = pair.s_min, pair.r_top
    unit = parsimonious_sigma_rho(pair, s_min, r_top)

    b = GadgetBuilder(pair, "cofinite_rho_aux")
    u = b.portal()
    w = b.vertex()
    b.edge(u, w)
    hub = b.attach(unit, [w])
    b.graph.add_constraint(Constraint.from_sets([u, w], [[], [u], [w]]))
    witnesses = {
        (rho(0),): hub.witness((rho(r_top),)),
        (sigma(0),): {u} | hub.witness((rho(r_top),)),
        (rho(1),): hub.witness((sigma(s_min),)),
    }
    return b.build(witnesses.keys(), witnesses, parsimonious=True)
