"""
Certification of gadget and manager claims by exhaustive search.
"""

from enum import Enum
from itertools import product
from typing import TYPE_CHECKING, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from ..core.states import State, StateString, state_of, string_code
from .gadget import PortalGadget
from .oracle import LanguageReport, evaluate_selection, realized_language
from .search import SolutionSearch, check_cap

if TYPE_CHECKING:
    from ..managers.manager import ManagerInstance


class Verdict(str, Enum):
    PROVIDER = "provider"
    PARSIMONIOUS_PROVIDER = "parsimonious_provider"
    REALIZER = "realizer"
    PARSIMONIOUS_REALIZER = "parsimonious_realizer"
    FAIL = "fail"


class CertificationResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    verdict: Verdict
    offending: Optional[StateString] = None
    reason: str = ""
    report: Optional[LanguageReport] = None

    @property
    def ok(self) -> bool:
        return self.verdict != Verdict.FAIL

    @property
    def is_provider(self) -> bool:
        return self.ok

    @property
    def is_parsimonious(self) -> bool:
        return self.verdict in (Verdict.PARSIMONIOUS_PROVIDER, Verdict.PARSIMONIOUS_REALIZER)

    @property
    def is_realizer(self) -> bool:
        return self.verdict in (Verdict.REALIZER, Verdict.PARSIMONIOUS_REALIZER)


def certify_gadget(g: PortalGadget, cap: Optional[int] = None) -> CertificationResult:
    """
    Compare the declared language with the realized one.

    Returns the strongest verdict that holds, or FAIL naming a declared
    string that is not realized (or whose recorded witness is wrong).
    """
    if g.declared_language is None:
        return CertificationResult(verdict=Verdict.FAIL, reason="no declared language")
    report = realized_language(g, cap)
    declared = g.declared_language.strings
    realized = report.language.strings

    for x in g.declared_language.sorted():
        if x not in realized:
            logger.debug(f"{g.name}: declared string {string_code(x)} not realized")
            return CertificationResult(verdict=Verdict.FAIL, offending=x,
                                       reason="declared string not realized", report=report)
    for x, selection in g.witnesses.items():
        if evaluate_selection(g.instance, selection, g.portals) != x:
            return CertificationResult(verdict=Verdict.FAIL, offending=x,
                                       reason="recorded witness does not witness its string", report=report)

    unique = all(report.count(x) == 1 for x in declared)
    if declared == realized:
        verdict = Verdict.PARSIMONIOUS_REALIZER if unique else Verdict.REALIZER
    else:
        verdict = Verdict.PARSIMONIOUS_PROVIDER if unique else Verdict.PROVIDER
    if g.parsimonious_claim and not unique:
        bad = next(x for x in g.declared_language.sorted() if report.count(x) != 1)
        return CertificationResult(verdict=Verdict.FAIL, offending=bad,
                                   reason=f"parsimony claimed but {report.count(bad)} witnesses", report=report)
    return CertificationResult(verdict=verdict, report=report)


def certify_witnesses(g: PortalGadget) -> CertificationResult:
    """
    Provider check from the recorded witnesses alone, for gadgets too large
    to enumerate. A valid witness per declared string proves the provider
    claim; realizer and parsimony claims are not decided, so the verdict is
    at most PROVIDER and carries no report.
    """
    if g.declared_language is None:
        return CertificationResult(verdict=Verdict.FAIL, reason="no declared language")
    for x in g.declared_language.sorted():
        selection = g.witnesses.get(x)
        if selection is None:
            return CertificationResult(verdict=Verdict.FAIL, offending=x, reason="no recorded witness")
        if evaluate_selection(g.instance, selection, g.portals) != x:
            return CertificationResult(verdict=Verdict.FAIL, offending=x,
                                       reason="recorded witness does not witness its string")
    logger.debug(f"{g.name}: {len(g.declared_language)} declared string(s) witnessed")
    return CertificationResult(verdict=Verdict.PROVIDER)


class ManagerCertificate(BaseModel):
    """Checked manager structure of one rank"""

    model_config = ConfigDict(frozen=True)

    rank: int
    alphabet: Tuple[State, ...]
    blocks: Tuple[Tuple[int, ...], ...]
    blocks_bar: Tuple[Tuple[int, ...], ...]
    bound: int
    solutions: Dict[StateString, FrozenSet[int]] = Field(default_factory=dict)


class ManagerFailure(BaseModel):
    model_config = ConfigDict(frozen=True)

    rank: int
    string: Optional[StateString] = None
    reason: str


def check_manager_structure(mi: "ManagerInstance") -> Optional[str]:
    """
    The block bullets: partition of the non-distinguished vertices, block
    sizes, neighbourhoods of u_i, and which blocks may share edges.
    Returns a description of the first violation.
    """
    inst = mi.instance
    ell = mi.rank
    owner: Dict[int, Tuple[str, int]] = {}
    for side, blocks in (("B", mi.blocks), ("Bbar", mi.blocks_bar)):
        if len(blocks) != ell:
            return f"{side}: expected {ell} blocks, got {len(blocks)}"
        for i, block in enumerate(blocks):
            if len(block) > mi.bound:
                return f"{side}_{i + 1} has {len(block)} > b = {mi.bound} vertices"
            for v in block:
                if v in owner:
                    return f"vertex {v} in two blocks"
                owner[v] = (side, i)
    distinguished = set(mi.distinguished)
    for v in range(inst.n):
        if v not in owner and v not in distinguished:
            return f"vertex {v} in no block"
        if v in owner and v in distinguished:
            return f"distinguished vertex {v} inside a block"
    adj = inst.adjacency()
    for i, u in enumerate(mi.distinguished):
        for w in adj[u]:
            if w not in owner or owner[w][1] != i:
                return f"u_{i + 1} has neighbour {w} outside B_{i + 1} and Bbar_{i + 1}"
    for a, b in inst.edges:
        if a in distinguished or b in distinguished:
            continue
        (sa, ia), (sb, ib) = owner[a], owner[b]
        if sa == sb and abs(ia - ib) <= 1:
            continue
        if sa != sb and ia == ib == ell - 1:
            continue
        return f"edge ({a},{b}) joins {sa}_{ia + 1} and {sb}_{ib + 1}"
    return None


def certify_manager(
    mi: "ManagerInstance",
    cap: Optional[int] = None,
) -> Union[ManagerCertificate, ManagerFailure]:
    """
    Check that every x in A^rank has exactly one solution S_x with the
    prescribed status of each u_i and the prescribed split of its selected
    neighbours between B_i and Bbar_i.
    """
    problem = check_manager_structure(mi)
    if problem is not None:
        return ManagerFailure(rank=mi.rank, reason=problem)

    inst = mi.instance
    pair = inst.pair
    s_top, r_top = pair.s_top, pair.r_top
    check_cap(inst, cap)
    adj = inst.adjacency()
    in_b = [set(b) for b in mi.blocks]
    in_bar = [set(b) for b in mi.blocks_bar]
    u_list = list(mi.distinguished)
    nb_b = [[w for w in adj[u] if w in in_b[i]] for i, u in enumerate(u_list)]
    nb_bar = [[w for w in adj[u] if w in in_bar[i]] for i, u in enumerate(u_list)]

    buckets: Dict[StateString, List[FrozenSet[int]]] = {}

    def on_leaf(value, sel, weight):
        x = []
        for i, u in enumerate(u_list):
            chosen = value[u] == 1
            here = sum(1 for w in nb_b[i] if value[w] == 1)
            there = sum(1 for w in nb_bar[i] if value[w] == 1)
            top = s_top if chosen else r_top
            if here + there != top:
                return
            x.append(state_of(chosen, here))
        key = tuple(x)
        buckets.setdefault(key, []).append(frozenset(v for v, b in enumerate(value) if b == 1))

    SolutionSearch(inst, portals=u_list).run(on_leaf)

    solutions: Dict[StateString, FrozenSet[int]] = {}
    for x in product(mi.alphabet, repeat=mi.rank):
        found = buckets.get(tuple(x), [])
        if len(found) != 1:
            reason = "missing" if not found else f"{len(found)} solutions"
            logger.debug(f"manager rank {mi.rank}: {string_code(x)} {reason}")
            return ManagerFailure(rank=mi.rank, string=tuple(x), reason=reason)
        solutions[tuple(x)] = found[0]
    return ManagerCertificate(
        rank=mi.rank,
        alphabet=tuple(mi.alphabet),
        blocks=tuple(tuple(sorted(b)) for b in mi.blocks),
        blocks_bar=tuple(tuple(sorted(b)) for b in mi.blocks_bar),
        bound=mi.bound,
        solutions=solutions,
    )
