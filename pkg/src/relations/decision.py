"""
Relation-free gadgets for the decision pipeline: a vertex that is always
selected with s_top selected neighbours, exactly-one realizers and a graph
without solutions. All of them need finite σ, ρ with 0 ∉ ρ.
"""

import math
from typing import List

from loguru import logger

from ..core.pair import Pair
from ..core.states import StateString, rho, sigma
from ..exceptions import PreconditionError, ValidationError
from ..oracle.gadget import PortalGadget
from ..providers import GadgetBuilder


def _require_decision_pair(pair: Pair, construction: str) -> None:
    if not pair.non_empty:
        raise PreconditionError(construction, "sigma and rho must be non-empty")
    if not (pair.sigma.is_finite and pair.rho.is_finite):
        raise PreconditionError(construction, "sigma and rho must be finite")
    if 0 in pair.rho:
        raise PreconditionError(construction, "0 must not lie in rho")


def forced_selected_helper(pair: Pair) -> PortalGadget:
    """
    {σ_smin}-provider whose portal is selected with at least s_min selected
    neighbours in every partial solution.

    0 < s_min < r_min: a clique on s_min + 1 vertices.
    s_min >= r_min >= 1: a clique C on s_min + 1 vertices and an independent
    set I where every I vertex sees r_min clique vertices and every clique
    vertex sees I.
    s_min = 0: the complete bipartite graph K(r_min, r_top + 1), portal on
    the r_min side.
    """
    _require_decision_pair(pair, "ForcedSelected")
    s_min, r_min, r_top = pair.s_min, pair.r_min, pair.r_top
    b = GadgetBuilder(pair, f"forced_helper(s_min={s_min},r_min={r_min})")
    u = b.portal()
    if 0 < s_min < r_min:
        clique = [u] + b.vertices(s_min)
        b.clique(clique)
        chosen = clique
    elif s_min >= r_min:
        clique = [u] + b.vertices(s_min)
        b.clique(clique)
        size = len(clique)
        for i in range(math.ceil(size / r_min)):
            x = b.vertex()
            for k in range(r_min):
                b.edge(x, clique[(i * r_min + k) % size])
        chosen = clique
    else:
        side_a = [u] + b.vertices(r_min - 1)
        side_b = b.vertices(r_top + 1)
        b.biclique(side_a, side_b)
        chosen = side_a
    x = (sigma(s_min),)
    return b.build([x], {x: chosen})


def forced_selected_core(pair: Pair) -> PortalGadget:
    """
    s_top - s_min + 1 helper copies whose portals form a clique.

    Once its portal is an ordinary vertex of a larger graph, that vertex is
    selected with s_top selected neighbours inside the core, so every
    neighbour outside the core is unselected. As a gadget with an exempt
    portal it is only a {σ_stop}-provider.
    """
    helper = forced_selected_helper(pair)
    b = GadgetBuilder(pair, f"forced_core(s_top={pair.s_top})")
    u = b.portal()
    heads = [u] + b.vertices(pair.s_top - pair.s_min)
    b.clique(heads)
    chosen: List[int] = []
    for head in heads:
        copy = b.attach(helper, [head])
        chosen.extend(copy.witness((sigma(pair.s_min),)))
    x = (sigma(pair.s_top),)
    return b.build([x], {x: chosen})


def _enforcer_count(pair: Pair) -> int:
    """
    Number c of saturated neighbours for the vertex that pins the portal:
    c not in ρ and c + 1 in ρ. 0 when ρ is an interval starting at 1.
    """
    gaps = [r for r in pair.rho.support if r >= 2 and r - 1 not in pair.rho]
    return min(gaps) - 1 if gaps else 0


def build_forced_selected(pair: Pair) -> PortalGadget:
    """
    {σ_stop}-realizer without relations.

    Every neighbour of the portal u has a fixed state in every partial
    solution:

    - s_min vertices K forming a clique with u; when s_min >= r_min an
      independent set I sees r_min vertices of K each and covers K. A vertex
      of K cannot be unselected, and I never touches u.
    - s_top - s_min heads forming a clique, each adjacent to u and to its
      own helper copy; they are selected with exactly s_top neighbours.
    - an enforcer a, unselected, with c saturated core heads where c is not
      in ρ and c + 1 is. a is valid only when u is selected. When ρ is an
      interval from 1, c = 0 and a sees a guard z instead: z is unselected
      next to r_top saturated heads, so selecting a would overload z.

    Raises:
        PreconditionError: infinite σ or ρ, or 0 in ρ
    """
    helper = forced_selected_helper(pair)
    core = forced_selected_core(pair)
    s_min, s_top, r_min, r_top = pair.s_min, pair.s_top, pair.r_min, pair.r_top
    b = GadgetBuilder(pair, f"forced_selected(s_top={s_top})")
    u = b.portal()
    chosen: List[int] = [u]

    def saturated(host: int) -> None:
        chosen.extend(b.attach(core, [host]).witness((sigma(s_top),)))

    if s_min > 0:
        support = b.vertices(s_min)
        b.clique([u] + support)
        chosen.extend(support)
        if s_min >= r_min:
            for i in range(math.ceil(s_min / r_min)):
                x = b.vertex()
                for k in range(r_min):
                    b.edge(x, support[(i * r_min + k) % s_min])

    heads = b.vertices(s_top - s_min)
    b.clique(heads)
    for head in heads:
        b.edge(u, head)
        chosen.extend(b.attach(helper, [head]).witness((sigma(s_min),)))

    a = b.vertex()
    b.edge(u, a)
    c = _enforcer_count(pair)
    if c > 0:
        for _ in range(c):
            head = b.vertex()
            b.edge(a, head)
            saturated(head)
    else:
        z = b.vertex()
        b.edge(a, z)
        for _ in range(r_top):
            head = b.vertex()
            b.edge(z, head)
            saturated(head)

    x = (sigma(s_top),)
    logger.debug(f"forced-selected realizer for {pair}: enforcer sees {c} saturated heads")
    return b.build([x], {x: chosen})


def _hw1_case(pair: Pair) -> int:
    """
    1: some r in ρ with r >= 2 and r - 1 not in ρ
    2: ρ = [1..r] with r >= 2
    3: ρ = {1}
    """
    members = sorted(pair.rho.support)
    if any(r >= 2 and r - 1 not in pair.rho for r in members):
        return 1
    if members == [1]:
        return 3
    return 2


def realize_hw1_decision(k: int, pair: Pair) -> PortalGadget:
    """
    Relation-free realizer of HW(k)=1, not necessarily parsimonious. Hubs
    hang off saturated core heads so they are unselected; one hub needs
    a selected portal, another allows at most one.

    Raises:
        ValidationError: k < 1
        PreconditionError: infinite σ or ρ, or 0 in ρ
    """
    if k < 1:
        raise ValidationError(f"exactly-one arity must be positive, got {k}")
    _require_decision_pair(pair, "ExactlyOne")
    core = forced_selected_core(pair)
    case = _hw1_case(pair)
    r_top = pair.r_top
    b = GadgetBuilder(pair, f"realize_hw1(k={k},case={case})")
    ports = b.portals_n(k)
    chosen: List[int] = []

    def hang(hub: int, count: int) -> None:
        for _ in range(count):
            head = b.vertex()
            b.edge(hub, head)
            chosen.extend(b.attach(core, [head]).witness((sigma(pair.s_top),)))

    if case == 1:
        r = min(r for r in pair.rho.support if r >= 2 and r - 1 not in pair.rho)
        v, w = b.vertex(), b.vertex()
        b.biclique([v, w], ports)
        hang(v, r - 1)
        hang(w, r_top - 1)
    else:
        v1, v2 = b.vertex(), b.vertex()
        b.edge(v1, v2)
        b.biclique([v2], ports)
        hang(v1, r_top)
        if case == 2:
            w = b.vertex()
            b.biclique([w], ports)
            hang(w, r_top - 1)

    witnesses = {}
    for i, p in enumerate(ports):
        x: StateString = tuple(sigma(0) if j == i else rho(0) for j in range(k))
        witnesses[x] = [p] + chosen
    logger.debug(f"exactly-one realizer case {case} for {pair}")
    return b.build(witnesses.keys(), witnesses)


def infeasible_gadget(pair: Pair) -> PortalGadget:
    """
    A portal-free graph without solutions: a vertex y adjacent to r_top + 1
    forced-selected vertices can be neither unselected nor selected.
    """
    core = forced_selected_core(pair)
    b = GadgetBuilder(pair, "infeasible")
    y = b.vertex()
    for _ in range(pair.r_top + 1):
        head = b.vertex()
        b.edge(y, head)
        b.attach(core, [head])
    return b.build([], {})
