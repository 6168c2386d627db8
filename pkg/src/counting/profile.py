"""
Single-portal gadgets whose portal hangs off one vertex, their extension
profiles, and the search for a winner or a strong candidate.

Extension tables compose without enumeration: identifying the portals of
several gadgets convolves their tables, and hanging a new portal p off the
shared vertex u turns the bundle into a four-entry table because p can
only see u.
"""

from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict

from ..config import get_settings
from ..core.decomposition import PathDecomposition
from ..core.intset import IntSet
from ..core.pair import Pair, is_trivial
from ..core.states import Flavor, State, rho, sigma
from ..exceptions import CertificationError, ConstructionError, OracleCapExceeded, PreconditionError
from ..oracle.gadget import PortalGadget
from ..oracle.oracle import ExtTable, ext_table
from ..providers import GadgetBuilder, first_member, sigma_rho_provider


class GadgetClass(str, Enum):
    WINNER = "winner"
    STRONG_CANDIDATE = "strong_candidate"
    CANDIDATE = "candidate"
    NONE = "none"


class GadgetProfile(BaseModel):
    """The four extension counts that matter for a pendant portal, and their class."""

    model_config = ConfigDict(frozen=True)

    rho0: int
    rho1: int
    sigma0: int
    sigma1: int
    higher_zero: bool = True
    classification: GadgetClass = GadgetClass.NONE

    @classmethod
    def of(cls, rho0: int, rho1: int, sigma0: int, sigma1: int, higher_zero: bool = True) -> "GadgetProfile":
        return cls(rho0=rho0, rho1=rho1, sigma0=sigma0, sigma1=sigma1, higher_zero=higher_zero,
                   classification=classify(rho0, rho1, sigma0, sigma1, higher_zero))

    @classmethod
    def from_table(cls, table: ExtTable) -> "GadgetProfile":
        higher = all(v == 0 for state, v in table.entries.items() if state.count >= 2)
        return cls.of(int(table.rho(0)), int(table.rho(1)), int(table.sigma(0)), int(table.sigma(1)), higher)

    @property
    def is_candidate(self) -> bool:
        return self.classification != GadgetClass.NONE

    def describe(self) -> str:
        return (f"rho0={self.rho0} rho1={self.rho1} sigma0={self.sigma0} sigma1={self.sigma1} "
                f"-> {self.classification.value}")


def classify(rho0: int, rho1: int, sigma0: int, sigma1: int, higher_zero: bool = True) -> GadgetClass:
    """
    Candidate: rho0, sigma0 >= 1, rho0 != sigma0 and nothing beyond count 1.
    A candidate with rho1 = sigma1 = 0 is a winner; one with rho1 >= 1 and
    rho0 != sigma0 + sigma1 is a strong candidate.
    """
    if not (rho0 >= 1 and sigma0 >= 1 and rho0 != sigma0 and higher_zero):
        return GadgetClass.NONE
    if rho1 == 0 and sigma1 == 0:
        return GadgetClass.WINNER
    if rho1 >= 1 and rho0 != sigma0 + sigma1:
        return GadgetClass.STRONG_CANDIDATE
    return GadgetClass.CANDIDATE


# extension-table algebra

def _row(table: ExtTable, flavor: Flavor) -> Dict[int, Fraction]:
    return {state.count: value for state, value in table.entries.items() if state.flavor == flavor and value}


def _convolve(rows: Sequence[Dict[int, Fraction]]) -> Dict[int, Fraction]:
    result = {0: Fraction(1)}
    for row in rows:
        nxt: Dict[int, Fraction] = {}
        for i, a in result.items():
            for j, b in row.items():
                nxt[i + j] = nxt.get(i + j, Fraction(0)) + a * b
        result = nxt
    return result


def bundle(tables: Sequence[ExtTable]) -> ExtTable:
    """Table of the gadgets glued at their portals."""
    selected = _convolve([_row(t, Flavor.SIGMA) for t in tables])
    unselected = _convolve([_row(t, Flavor.RHO) for t in tables])
    entries: Dict[State, Fraction] = {}
    entries.update({sigma(k): v for k, v in selected.items() if v})
    entries.update({rho(k): v for k, v in unselected.items() if v})
    return ExtTable(n=sum(t.n - 1 for t in tables) + 1, entries=entries)


def hub(tables: Sequence[ExtTable], pair: Pair) -> ExtTable:
    """Table after gluing the gadgets at u and adding a new portal p adjacent to u only."""
    glued = bundle(tables)
    up = _row(glued, Flavor.SIGMA)
    down = _row(glued, Flavor.RHO)
    entries = {
        rho(0): sum((v for r, v in down.items() if r in pair.rho), Fraction(0)),
        rho(1): sum((v for s, v in up.items() if s in pair.sigma), Fraction(0)),
        sigma(0): sum((v for r, v in down.items() if r + 1 in pair.rho), Fraction(0)),
        sigma(1): sum((v for s, v in up.items() if s + 1 in pair.sigma), Fraction(0)),
    }
    return ExtTable(n=glued.n + 1, entries={k: v for k, v in entries.items() if v})


# gadgets

def pendant_gadget(pair: Pair) -> PortalGadget:
    """Portal p adjacent to u, where u carries a {σ_smin, ρ_r}-provider with r the least positive element of ρ."""
    r = first_member(pair.rho, 1)
    if r is None:
        raise PreconditionError("Pendant", f"rho needs a positive element, got {pair.rho}")
    provider = sigma_rho_provider(pair, pair.s_min, r)
    b = GadgetBuilder(pair, f"pendant(s={pair.s_min},r={r})")
    p = b.portal()
    u = b.vertex()
    b.edge(p, u)
    b.attach(provider, [u])
    gadget = b.build([], {})
    return gadget.model_copy(update={"decomposition": PathDecomposition.single_bag(gadget.n)})


def hub_gadget(children: Sequence[PortalGadget], pair: Pair, name: str = "hub") -> PortalGadget:
    """
    Children glued at a fresh vertex u, plus a new portal p adjacent to u.
    The decomposition runs through the children's own bags, each extended
    by p and u.
    """
    b = GadgetBuilder(pair, name)
    p = b.portal()
    u = b.vertex()
    b.edge(p, u)
    bags: List[List[int]] = []
    for child in children:
        copy = b.attach(child, [u])
        if child.decomposition is not None and child.decomposition.bags:
            child_bags = [[copy.mapping[v] for v in bag] for bag in child.decomposition.bags]
        else:
            child_bags = [copy.vertices()]
        bags.extend([p, u, *bag] for bag in child_bags)
    gadget = b.build([], {})
    return gadget.model_copy(update={"decomposition": PathDecomposition.of(bags or [[p, u]])})


def certify_profile(gadget: PortalGadget, profile: GadgetProfile, cap: Optional[int] = None) -> ExtTable:
    """
    Recompute the extension table by enumeration and compare.

    Raises:
        CertificationError: some entry differs
        OracleCapExceeded: the gadget is too large to enumerate
    """
    table = ext_table(gadget, cap)
    found = GadgetProfile.from_table(table)
    if found != profile:
        raise CertificationError(f"{gadget.name}: profile {found.describe()} != claimed {profile.describe()}")
    return table


class _Piece:
    """An extension table together with a recipe for the gadget it describes."""

    def __init__(self, table: ExtTable, build: Callable[[], PortalGadget], label: str):
        self.table = table
        self.build = build
        self.label = label

    @property
    def profile(self) -> GadgetProfile:
        return GadgetProfile.from_table(self.table)


def _hub_piece(children: Sequence[_Piece], pair: Pair, label: str) -> _Piece:
    table = hub([c.table for c in children], pair)
    return _Piece(table, lambda: hub_gadget([c.build() for c in children], pair, label), label)


def _good(profile: GadgetProfile) -> bool:
    return profile.classification in (GadgetClass.WINNER, GadgetClass.STRONG_CANDIDATE)


@lru_cache(maxsize=None)
def _pendant_piece(pair: Pair) -> _Piece:
    gadget = pendant_gadget(pair)
    return _Piece(ext_table(gadget), lambda: gadget, "J")


def build_winner_or_strong_candidate(
    pair: Pair,
    limit: Optional[int] = None,
    certify: bool = True,
) -> Tuple[PortalGadget, GadgetProfile]:
    """
    Fan out x copies of the pendant gadget J behind a new portal until the
    result is a candidate. A winner is returned as is; a candidate with
    rho1 = 0 gets x more copies of J and one copy of itself glued in before
    the check, and a candidate that is still not strong is fanned out once
    more, y copies at a time, when rho is finite.

    Args:
        pair: non-trivial pair with rho not in {{0}, Z>=0}
        limit: largest x and y tried, defaults to the configured limit
        certify: re-check the returned profile by enumeration when the
            gadget is small enough for the oracle

    Raises:
        PreconditionError: unsupported pair
        ConstructionError: nothing found within the limit
    """
    if is_trivial(pair).trivial or pair.rho == IntSet.finite(0) or pair.rho.is_everything:
        raise PreconditionError("WinnerSearch", f"needs a non-trivial pair with rho not in {{0}}, Z>=0: {pair}")
    limit = get_settings().winner_search_limit if limit is None else limit
    j = _pendant_piece(pair)
    trace: List[str] = [f"J: {j.profile.describe()}"]

    found: Optional[_Piece] = None
    for x in range(1, limit + 1):
        z = _hub_piece([j] * x, pair, f"Z(x={x})")
        trace.append(f"{z.label}: {z.profile.describe()}")
        if not z.profile.is_candidate:
            continue
        if z.profile.classification == GadgetClass.WINNER:
            found = z
            break
        g = z
        if z.profile.rho1 == 0:
            g = _hub_piece([j] * x + [z], pair, f"Z*(x={x})")
            trace.append(f"{g.label}: {g.profile.describe()}")
        if _good(g.profile):
            found = g
            break
        if pair.rho.is_cofinite:
            continue
        for y in range(1, limit + 1):
            fan = _hub_piece([g] * y, pair, f"{g.label}^{y}")
            trace.append(f"{fan.label}: {fan.profile.describe()}")
            if _good(fan.profile):
                found = fan
                break
        if found is not None:
            break

    if found is None:
        raise ConstructionError(f"no winner or strong candidate for {pair} within {limit}: " + "; ".join(trace))

    gadget = found.build()
    profile = found.profile
    if certify:
        try:
            certify_profile(gadget, profile)
        except OracleCapExceeded:
            logger.debug(f"{found.label}: {gadget.n} vertices, profile kept from the table algebra")
    logger.info(f"{pair}: {found.label} with {gadget.n} vertices is a {profile.classification.value}")
    return gadget, profile
