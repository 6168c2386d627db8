"""
The four manager families and the four-portal provider the 𝔸 family is
built from.
"""

from itertools import combinations, product
from typing import Dict, List, Set

from loguru import logger

from ..core.intset import IntSet
from ..core.pair import ManagerCase, Pair, alphabet_for_case, max_structured
from ..core.states import State, StateString, rho, sigma
from ..exceptions import PreconditionError
from ..oracle.gadget import PortalGadget
from ..providers.builder import GadgetBuilder
from ..providers.simple import lr_block
from ..providers.structured import mixed_pair
from .blueprint import build_manager_from_provider
from .manager import LBetaSpec, Manager
from .simple import even_manager, rho_manager, sigma_zero_manager


def quad_provider(pair: Pair) -> PortalGadget:
    """
    Four portals, one mixed-pair provider per pair of portals i < j with u_i
    first. Provides the strings of L_1^(4) whose unselected portal, if any,
    is the first one (only ρ0 there when r_top = 0).
    """
    z = mixed_pair(pair)
    b = GadgetBuilder(pair, "quad")
    us = b.portals_n(4)
    copies = {(i, j): b.attach(z, [us[i], us[j]]) for i, j in combinations(range(4), 2)}

    first_states = [rho(0)] + ([rho(1)] if pair.r_top >= 1 else []) + [sigma(0), sigma(1)]
    witnesses: Dict[StateString, Set[int]] = {}
    for head in first_states:
        for rest in product((sigma(0), sigma(1)), repeat=3):
            x = (head,) + rest
            ones = [p for p, s in enumerate(x) if s == sigma(1)]
            if len(ones) not in (0, 2):
                continue
            chosen = {us[p] for p, s in enumerate(x) if s.selected}
            for (i, j), copy in copies.items():
                if not x[i].selected:
                    first = rho(1) if x[i] == rho(1) and j == 1 else rho(0)
                    inner = (first, sigma(0))
                elif ones == [i, j]:
                    inner = (sigma(1), sigma(1))
                else:
                    inner = (sigma(0), sigma(0))
                chosen |= copy.witness(inner)
            witnesses[x] = chosen
    return b.build(witnesses.keys(), witnesses)


def _scase_c(pair: Pair) -> int:
    for c in range(1, pair.s_top + 1):
        if c in pair.rho:
            return c
    raise PreconditionError("SCase", "rho needs some c with 1 <= c <= s_top")


def _require_acase(pair: Pair) -> None:
    if pair.rho == IntSet.finite(0):
        raise PreconditionError("ACase", "rho must differ from {0}")
    if max_structured(pair) != 1:
        raise PreconditionError("ACase", "the maximum structure must be 1")


def _require_even(pair: Pair) -> None:
    if pair.r_top < 1:
        raise PreconditionError("EvenCase", "r_top must be at least 1")
    if max_structured(pair) != 2:
        raise PreconditionError("EvenCase", "the maximum structure must be 2")
    if not (pair.sigma.is_finite and pair.rho.is_finite):
        raise PreconditionError("EvenCase", "sigma and rho must be finite")
    if any(v % 2 for v in (*pair.sigma.support, *pair.rho.support)):
        raise PreconditionError("EvenCase", "all elements of sigma and rho must be even")


def _blueprint_manager(case: ManagerCase, pair: Pair, spec: LBetaSpec, provider: PortalGadget, alphabet: List[State]) -> Manager:
    name = f"{case.value}_blueprint(d={spec.d},beta={spec.beta})"
    return Manager(case, pair, alphabet,
                   lambda k: build_manager_from_provider(spec, provider, k, alphabet),
                   name=name)


def build_manager(case: ManagerCase, pair: Pair) -> Manager:
    """
    Manager family of the given case.

    Raises:
        PreconditionError: the pair does not meet the case's conditions
    """
    case = ManagerCase(case)
    if not pair.non_empty:
        raise PreconditionError(case.value, "sigma and rho must be non-empty")
    if case == ManagerCase.RCASE:
        manager = rho_manager(pair)
    elif case == ManagerCase.EVEN:
        _require_even(pair)
        manager = even_manager(pair)
    elif case == ManagerCase.SCASE:
        c = _scase_c(pair)
        spec = LBetaSpec(d=2 * c, beta=0)
        manager = _blueprint_manager(case, pair, spec, lr_block(pair, c), alphabet_for_case(case, pair))
    else:
        _require_acase(pair)
        if pair.s_top == 0:
            manager = sigma_zero_manager(pair)
        else:
            spec = LBetaSpec(d=2, beta=1)
            manager = _blueprint_manager(case, pair, spec, quad_provider(pair), alphabet_for_case(case, pair))
    logger.info(f"manager {manager.name} for {pair}: |A| = {len(manager.alphabet)}")
    return manager
