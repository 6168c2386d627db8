"""Graphs with portals"""

from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.decomposition import PathDecomposition
from ..core.instance import GraphRelInstance
from ..core.states import Language, StateString, string_code
from ..exceptions import ValidationError


class PortalGadget(BaseModel):
    """
    An instance with an ordered portal list, the language it is meant to
    provide and, per declared string, the selection the builder intended as
    its witness.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str = ""
    instance: GraphRelInstance
    portals: Tuple[int, ...] = ()
    declared_language: Optional[Language] = None
    parsimonious_claim: bool = False
    witnesses: Dict[StateString, FrozenSet[int]] = Field(default_factory=dict)
    decomposition: Optional[PathDecomposition] = None

    @model_validator(mode="after")
    def _check(self) -> "PortalGadget":
        if len(set(self.portals)) != len(self.portals):
            raise ValidationError(f"{self.name}: portals not distinct")
        for p in self.portals:
            if not 0 <= p < self.instance.n:
                raise ValidationError(f"{self.name}: portal {p} out of range")
        if self.declared_language is not None and self.declared_language.portal_count != len(self.portals):
            raise ValidationError(f"{self.name}: declared language length differs from portal count")
        for x, selection in self.witnesses.items():
            if len(x) != len(self.portals):
                raise ValidationError(f"{self.name}: witness for {string_code(x)} has wrong length")
        return self

    @property
    def n(self) -> int:
        return self.instance.n

    def witness(self, x: Sequence) -> FrozenSet[int]:
        return self.witnesses[tuple(x)]

    def closed_neighbourhoods(self) -> List[FrozenSet[int]]:
        adj = self.instance.adjacency()
        return [frozenset([p, *adj[p]]) for p in self.portals]


def closed_neighbourhoods_disjoint(gadget: PortalGadget) -> bool:
    """Whether the portals' closed neighbourhoods are pairwise disjoint."""
    seen: set = set()
    for hood in gadget.closed_neighbourhoods():
        if seen & hood:
            return False
        seen |= hood
    return True


def is_bipartite(gadget: PortalGadget) -> bool:
    return nx.is_bipartite(gadget.instance.to_networkx())


def is_regular(gadget: PortalGadget, d: int) -> bool:
    """Every vertex has degree d."""
    graph = gadget.instance.to_networkx()
    return all(deg == d for _, deg in graph.degree())
