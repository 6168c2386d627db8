"""
Shared plumbing for provider constructions: portal-first numbering,
attaching sub-gadgets by portal identification, and composing the intended
witness selections.
"""

from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set

from loguru import logger

from ..core.instance import InstanceBuilder
from ..core.pair import Pair, PairFamily
from ..core.states import Language, State, StateString
from ..oracle.gadget import PortalGadget


class GadgetBuilder:
    """Builds one PortalGadget; portals are created first."""

    def __init__(self, pair: Pair, name: str, family: Optional[PairFamily] = None, dagger_mode: bool = False):
        self.pair = pair
        self.name = name
        self.graph = InstanceBuilder(family or PairFamily.single(pair), dagger_mode=dagger_mode)
        self.portals: List[int] = []

    def portal(self) -> int:
        v = self.graph.add_vertex()
        self.portals.append(v)
        return v

    def portals_n(self, k: int) -> List[int]:
        return [self.portal() for _ in range(k)]

    def vertex(self, label: int = 0) -> int:
        return self.graph.add_vertex(label)

    def vertices(self, k: int, label: int = 0) -> List[int]:
        return self.graph.add_vertices(k, label)

    def edge(self, u: int, v: int) -> None:
        self.graph.add_edge(u, v)

    def clique(self, vertices: Sequence[int]) -> None:
        for i, u in enumerate(vertices):
            for v in vertices[i + 1:]:
                self.edge(u, v)

    def biclique(self, left: Iterable[int], right: Iterable[int]) -> None:
        right = list(right)
        for u in left:
            for v in right:
                self.edge(u, v)

    def attach(self, gadget: PortalGadget, hosts: Sequence[int]) -> "Attached":
        """
        Paste gadget, identifying its i-th portal with hosts[i].
        """
        mapping = self.graph.paste(gadget.instance, {p: h for p, h in zip(gadget.portals, hosts)})
        return Attached(gadget, mapping)

    def build(
        self,
        declared: Iterable[Sequence[State]],
        witnesses: Mapping[StateString, Iterable[int]],
        parsimonious: bool = False,
    ) -> PortalGadget:
        language = Language.of(len(self.portals), declared)
        gadget = PortalGadget(
            name=self.name,
            instance=self.graph.freeze(),
            portals=tuple(self.portals),
            declared_language=language,
            parsimonious_claim=parsimonious,
            witnesses={tuple(x): frozenset(sel) for x, sel in witnesses.items()},
        )
        logger.debug(f"built {self.name}: {gadget.n} vertices, {len(gadget.instance.edges)} edges, "
                     f"{len(gadget.instance.constraints)} relations")
        return gadget


class Attached:
    """A pasted sub-gadget together with its vertex mapping."""

    def __init__(self, gadget: PortalGadget, mapping: Dict[int, int]):
        self.gadget = gadget
        self.mapping = mapping

    def witness(self, x: Sequence[State]) -> Set[int]:
        """Host vertices selected by the sub-gadget's witness for x."""
        return {self.mapping[v] for v in self.gadget.witness(tuple(x))}

    def vertices(self) -> List[int]:
        return sorted(set(self.mapping.values()))

    def inner(self) -> List[int]:
        """Host vertices that are not identified portals."""
        portals = {self.mapping[p] for p in self.gadget.portals}
        return [v for v in self.vertices() if v not in portals]


def uniform(state: State, k: int) -> StateString:
    return tuple([state] * k)
