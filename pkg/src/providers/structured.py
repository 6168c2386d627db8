"""
Providers that let selected portals see selected neighbours, for pairs
whose maximum structure is 1 or 2.
"""

from typing import Dict, List, Optional

from ..core.pair import Pair, max_structured
from ..core.states import State, StateString, rho, sigma
from ..exceptions import PreconditionError
from ..oracle.gadget import PortalGadget
from .builder import Attached, GadgetBuilder
from .mixed import rho_m_sigma0


def _ladder_states(top: int, lowered: bool) -> List[State]:
    """States of the top copies at one K vertex: all ρ1, or one of them ρ0."""
    states = [rho(1)] * top
    if lowered and top:
        states[-1] = rho(0)
    return states


def pair_ladder(pair: Pair, j: Optional[PortalGadget] = None) -> PortalGadget:
    """
    {ρ0ρ0, ρ0σ0, σ0σ0, σ1σ1}-provider with disjoint closed portal
    neighbourhoods: a clique on s_top+1 vertices missing v1 v2, the portals
    hanging off v1 and v2, and r_top copies of a {ρ0, ρ1, σ0}-provider on
    every clique vertex.
    """
    s_top, r_top = pair.s_top, pair.r_top
    if s_top < 1:
        raise PreconditionError("PairLadder", "s_top must be at least 1")
    if r_top >= 1 and j is None:
        j = rho_m_sigma0(pair, m=1)

    b = GadgetBuilder(pair, "pair_ladder")
    u1, u2 = b.portals_n(2)
    ks = b.vertices(s_top + 1)
    b.clique(ks)
    b.graph.remove_edge(ks[0], ks[1])
    b.edge(u1, ks[0])
    b.edge(u2, ks[1])
    copies: List[List[Attached]] = [[b.attach(j, [v]) for _ in range(r_top)] for v in ks]

    def collect(base: List[int], lowered: set) -> List[int]:
        chosen = list(base)
        for i, attached in enumerate(copies):
            for copy, state in zip(attached, _ladder_states(r_top, i in lowered)):
                chosen.extend(copy.witness((state,)))
        return chosen

    witnesses: Dict[StateString, List[int]] = {
        (rho(0), rho(0)): collect([], set()),
        (rho(0), sigma(0)): collect([u2], {1}),
        (sigma(0), sigma(0)): collect([u1, u2], {0, 1}),
    }
    all_k = [u1, u2, *ks]
    for attached in copies:
        for copy in attached:
            all_k.extend(copy.witness((sigma(0),)))
    witnesses[(sigma(1), sigma(1))] = all_k
    return b.build(witnesses.keys(), witnesses)


def mixed_pair(pair: Pair) -> PortalGadget:
    """
    {ρ0σ0, ρ1σ0, σ0σ0, σ1σ1}-provider (without ρ1σ0 when r_top = 0), with
    disjoint closed portal neighbourhoods.
    """
    if pair.s_top < 1:
        raise PreconditionError("MixedPair", "s_top must be at least 1")
    if pair.rho.is_finite and pair.rho.support == (0,):
        raise PreconditionError("MixedPair", "rho must differ from {0}")
    if max_structured(pair) != 1:
        raise PreconditionError("MixedPair", "the maximum structure must be 1")

    b = GadgetBuilder(pair, "mixed_pair")
    u1, u2 = b.portals_n(2)
    if pair.r_top == 0:
        g3 = b.attach(pair_ladder(pair), [u1, u2])
        witnesses = {
            x: g3.witness(x)
            for x in ((rho(0), sigma(0)), (sigma(0), sigma(0)), (sigma(1), sigma(1)))
        }
        return b.build(witnesses.keys(), witnesses)

    j = rho_m_sigma0(pair, m=1)
    g1 = b.attach(j, [u1])
    g2 = b.attach(j, [u2])
    g3 = b.attach(pair_ladder(pair, j), [u1, u2])
    plan = {
        (rho(0), sigma(0)): ((rho(0), sigma(0)), rho(0)),
        (rho(1), sigma(0)): ((rho(0), sigma(0)), rho(1)),
        (sigma(0), sigma(0)): ((sigma(0), sigma(0)), sigma(0)),
        (sigma(1), sigma(1)): ((sigma(1), sigma(1)), sigma(0)),
    }
    witnesses = {
        x: g3.witness(inner) | g1.witness((first,)) | g2.witness((sigma(0),))
        for x, (inner, first) in plan.items()
    }
    return b.build(witnesses.keys(), witnesses)


def _require_even_structure(pair: Pair, construction: str) -> None:
    if pair.r_top < 1:
        raise PreconditionError(construction, "r_top must be at least 1")
    if max_structured(pair) != 2:
        raise PreconditionError(construction, "the maximum structure must be 2")


def even_single(pair: Pair) -> PortalGadget:
    """
    {ρ0, ρ2, σ0, σ2}-provider: a {ρ0, ρ2, σ0}-provider sharing its portal
    with K_{s_top,s_top} minus w1 w1', whose vertex pairs (w_i, w_i') carry
    r_top copies of the two-portal {ρ0ρ0, ρ1ρ1, σ0σ0}-provider.
    """
    _require_even_structure(pair, "EvenSingle")
    s_top, r_top = pair.s_top, pair.r_top
    if s_top < 1:
        raise PreconditionError("EvenSingle", "s_top must be at least 1")

    b = GadgetBuilder(pair, "even_single")
    u = b.portal()
    side = rho_m_sigma0(pair, m=2)
    g_side = b.attach(side, [u])
    ws = b.vertices(s_top)
    ws_bar = b.vertices(s_top)
    b.biclique(ws, ws_bar)
    b.graph.remove_edge(ws[0], ws_bar[0])
    b.edge(u, ws[0])
    b.edge(u, ws_bar[0])
    twin = rho_m_sigma0(pair, m=2, two_portal=True)
    copies = [[b.attach(twin, [w, w_bar]) for _ in range(r_top)] for w, w_bar in zip(ws, ws_bar)]

    def collect(base: List[int], lowered: bool, selected_k: bool) -> List[int]:
        chosen = list(base)
        for i, attached in enumerate(copies):
            if selected_k:
                states = [sigma(0)] * r_top
            else:
                states = _ladder_states(r_top, lowered and i == 0)
            for copy, state in zip(attached, states):
                chosen.extend(copy.witness((state, state)))
        return chosen

    witnesses = {
        (rho(0),): collect(list(g_side.witness((rho(0),))), False, False),
        (rho(2),): collect(list(g_side.witness((rho(2),))), False, False),
        (sigma(0),): collect(list(g_side.witness((sigma(0),))), True, False),
        (sigma(2),): collect(list(g_side.witness((sigma(0),))) + ws + ws_bar, False, True),
    }
    return b.build(witnesses.keys(), witnesses)


def even_all(pair: Pair) -> PortalGadget:
    """
    Provider of every even ρ_i up to r_top and every even σ_i up to s_top:
    t_top/2 copies of the {ρ0, ρ2, σ0, σ2}-provider (or, when s_top = 0, of
    the {ρ0, ρ2, σ0}-provider) glued at the portal.
    """
    _require_even_structure(pair, "EvenAll")
    if not (pair.sigma.is_finite and pair.rho.is_finite):
        raise PreconditionError("EvenAll", "sigma and rho must be finite")
    if any(v % 2 for v in (*pair.sigma.support, *pair.rho.support)):
        raise PreconditionError("EvenAll", "all elements of sigma and rho must be even")

    unit = even_single(pair) if pair.s_top >= 1 else rho_m_sigma0(pair, m=2)
    half = pair.t_top // 2
    b = GadgetBuilder(pair, f"even_all(copies={half})")
    u = b.portal()
    copies = [b.attach(unit, [u]) for _ in range(half)]

    witnesses: Dict[StateString, set] = {}
    for top, high, low in ((pair.r_top, rho(2), rho(0)), (pair.s_top, sigma(2), sigma(0))):
        for i in range(0, top + 1, 2):
            chosen: set = set()
            for index, copy in enumerate(copies):
                chosen |= copy.witness((high if index < i // 2 else low,))
            state = rho(i) if not high.selected else sigma(i)
            witnesses[(state,)] = chosen
    return b.build(witnesses.keys(), witnesses)
