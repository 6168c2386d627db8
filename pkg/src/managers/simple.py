"""
Managers whose blocks are independent copies of a one-portal provider
hanging off u_i, with one relation per block that keeps exactly the
intended selection for every state of u_i.
"""

from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from ..core.instance import Constraint
from ..core.pair import ManagerCase, Pair, alphabet_for_case, invert_state
from ..core.states import State, StateString, rho, sigma
from ..exceptions import PreconditionError
from ..oracle.gadget import PortalGadget
from ..providers.builder import Attached, GadgetBuilder
from ..providers.mixed import rho_m_sigma0
from ..providers.simple import rho_ladder
from ..providers.structured import even_all
from .manager import Manager, ManagerInstance, blocks_from_owner

# per state of u_i: the states of the copies in B_i and in Bbar_i
Split = Callable[[State], Tuple[List[State], List[State]]]


def mirrored(pair: Pair) -> Split:
    """One copy per side; Bbar gets the inverted state."""
    def split(state: State) -> Tuple[List[State], List[State]]:
        return [state], [invert_state(state, pair)]
    return split


def unary(pair: Pair, copies: int) -> Split:
    """
    copies {ρ0, ρ1, σ0}-units per side: ρ_r switches the first r units of
    B_i and the first r_top - r units of Bbar_i to ρ1.
    """
    def split(state: State) -> Tuple[List[State], List[State]]:
        if state.selected:
            return [sigma(0)] * copies, [sigma(0)] * copies
        here = state.count
        there = pair.r_top - here
        return ([rho(1)] * here + [rho(0)] * (copies - here),
                [rho(1)] * there + [rho(0)] * (copies - there))
    return split


def two_sided_rank(
    pair: Pair,
    alphabet: Sequence[State],
    unit: Optional[PortalGadget],
    copies: int,
    split: Split,
    rank: int,
    name: str,
) -> ManagerInstance:
    b = GadgetBuilder(pair, f"{name}[{rank}]")
    us = b.vertices(rank)
    owner: Dict[int, Tuple[int, int]] = {}
    sides: List[Tuple[List[Attached], List[Attached]]] = []
    for i, u in enumerate(us):
        attached: List[List[Attached]] = [[], []]
        for side in (0, 1):
            for _ in range(copies if unit is not None else 0):
                copy = b.attach(unit, [u])
                attached[side].append(copy)
                for v in copy.inner():
                    owner[v] = (side, i)
        sides.append((attached[0], attached[1]))

    def selection(i: int, state: State, side: int) -> Set[int]:
        chosen: Set[int] = {us[i]} if state.selected else set()
        for copy, s in zip(sides[i][side], split(state)[side]):
            chosen |= copy.witness((s,))
        return chosen

    for i, u in enumerate(us):
        for side in (0, 1):
            if not sides[i][side]:
                continue
            scope = [u] + sorted(v for v, (sd, k) in owner.items() if sd == side and k == i)
            b.graph.add_constraint(Constraint.from_sets(scope, [selection(i, x, side) for x in alphabet]))

    def solve(x: StateString) -> FrozenSet[int]:
        chosen: Set[int] = set()
        for i, state in enumerate(x):
            chosen |= selection(i, state, 0) | selection(i, state, 1)
        return frozenset(chosen)

    blocks, blocks_bar = blocks_from_owner(owner, rank)
    bound = copies * (unit.n - 1) if unit is not None else 0
    return ManagerInstance(
        rank=rank,
        alphabet=tuple(alphabet),
        instance=b.graph.freeze(),
        distinguished=tuple(us),
        blocks=blocks,
        blocks_bar=blocks_bar,
        bound=bound,
        solver=solve,
    )


def rho_manager(pair: Pair) -> Manager:
    """ℝ-manager: two {ρ0..ρ_rtop}-providers per distinguished vertex."""
    if not pair.non_empty:
        raise PreconditionError("RCase", "sigma and rho must be non-empty")
    unit = rho_ladder(pair)
    alphabet = alphabet_for_case(ManagerCase.RCASE, pair)
    split = mirrored(pair)
    return Manager(ManagerCase.RCASE, pair, alphabet,
                   lambda k: two_sided_rank(pair, alphabet, unit, 1, split, k, "rcase"))


def even_manager(pair: Pair) -> Manager:
    """Manager of the even states, from the all-even provider."""
    unit = even_all(pair)
    alphabet = alphabet_for_case(ManagerCase.EVEN, pair)
    split = mirrored(pair)
    return Manager(ManagerCase.EVEN, pair, alphabet,
                   lambda k: two_sided_rank(pair, alphabet, unit, 1, split, k, "even"))


def sigma_zero_manager(pair: Pair) -> Manager:
    """
    𝔸-manager for s_top = 0: t_top copies of a {ρ0, ρ1, σ0}-provider per
    block, or the bare distinguished vertices when r_top = 0 as well.
    """
    if pair.s_top != 0:
        raise PreconditionError("ACase", "this route needs s_top = 0")
    alphabet = alphabet_for_case(ManagerCase.ACASE, pair)
    if pair.r_top == 0:
        unit, copies = None, 0
    else:
        unit, copies = rho_m_sigma0(pair, m=1), pair.t_top
    split = unary(pair, copies)
    return Manager(ManagerCase.ACASE, pair, alphabet,
                   lambda k: two_sided_rank(pair, alphabet, unit, copies, split, k, "acase_sigma0"),
                   name="acase_sigma0")
