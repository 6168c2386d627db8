"""
Graphs with relations: constraints, instances and the mutable builder used
by every construction.
"""

from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..exceptions import ConstructionError, ValidationError
from .pair import Pair, PairFamily


Edge = Tuple[int, int]


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class Constraint(BaseModel):
    """
    A relation over an ordered scope. Bit i of a mask stands for the i-th
    scope vertex being selected.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scope: Tuple[int, ...]
    accepted: Tuple[int, ...]
    weights: Optional[Dict[int, Fraction]] = None

    @field_validator("accepted", mode="before")
    @classmethod
    def _dedup(cls, value: Iterable[int]) -> Tuple[int, ...]:
        return tuple(sorted(set(int(v) for v in value)))

    @field_validator("weights", mode="before")
    @classmethod
    def _fractions(cls, value):
        if value is None:
            return None
        return {int(k): to_fraction(v) for k, v in dict(value).items()}

    @model_validator(mode="after")
    def _check(self) -> "Constraint":
        if len(set(self.scope)) != len(self.scope):
            raise ValidationError(f"scope has repeated vertices: {self.scope}")
        limit = 1 << len(self.scope)
        for mask in self.accepted:
            if mask < 0 or mask >= limit:
                raise ValidationError(f"mask {mask:x} out of range for arity {len(self.scope)}")
        if self.weights is not None and set(self.weights) != set(self.accepted):
            raise ValidationError("weights domain must equal the accepted set")
        return self

    # factories

    @classmethod
    def from_sets(cls, scope: Sequence[int], selections: Iterable[Iterable[int]],
                  weights: Optional[Mapping[FrozenSet[int], Fraction]] = None) -> "Constraint":
        position = {v: i for i, v in enumerate(scope)}
        accepted = []
        weight_map = {} if weights is not None else None
        for selection in selections:
            mask = 0
            for v in selection:
                mask |= 1 << position[v]
            accepted.append(mask)
            if weight_map is not None:
                weight_map[mask] = weights[frozenset(selection)]
        return cls(scope=tuple(scope), accepted=accepted, weights=weight_map)

    @classmethod
    def hamming(cls, scope: Sequence[int], allowed: Iterable[int]) -> "Constraint":
        """HW in allowed: masks whose popcount lies in allowed"""
        allowed = set(allowed)
        k = len(scope)
        return cls(scope=tuple(scope), accepted=[m for m in range(1 << k) if popcount(m) in allowed])

    @classmethod
    def hw_eq(cls, scope: Sequence[int], weight: int) -> "Constraint":
        return cls.hamming(scope, [weight])

    @classmethod
    def hw_at_least(cls, scope: Sequence[int], weight: int) -> "Constraint":
        return cls.hamming(scope, range(weight, len(scope) + 1))

    @classmethod
    def hw_at_most(cls, scope: Sequence[int], weight: int) -> "Constraint":
        return cls.hamming(scope, range(0, weight + 1))

    @classmethod
    def equality(cls, scope: Sequence[int]) -> "Constraint":
        full = (1 << len(scope)) - 1
        return cls(scope=tuple(scope), accepted=[0, full])

    # queries

    @property
    def arity(self) -> int:
        return len(self.scope)

    def mask_of(self, selected: Iterable[int]) -> int:
        selected = set(selected)
        mask = 0
        for i, v in enumerate(self.scope):
            if v in selected:
                mask |= 1 << i
        return mask

    def weight(self, mask: int) -> Fraction:
        if self.weights is None:
            return Fraction(1)
        return self.weights[mask]

    def is_hw1(self) -> bool:
        k = self.arity
        return self.weights is None and set(self.accepted) == {1 << i for i in range(k)}

    def is_hw_le1(self) -> bool:
        return self.weights is None and set(self.accepted) == {0} | {1 << i for i in range(self.arity)}

    def is_hw_ge1(self) -> bool:
        return self.weights is None and set(self.accepted) == set(range(1, 1 << self.arity))

    def is_equality(self) -> bool:
        full = (1 << self.arity) - 1
        return self.weights is None and set(self.accepted) == {0, full}

    def selections(self) -> List[FrozenSet[int]]:
        return [frozenset(v for i, v in enumerate(self.scope) if mask >> i & 1) for mask in self.accepted]

    def relabeled(self, mapping: Mapping[int, int]) -> "Constraint":
        return Constraint(scope=tuple(mapping[v] for v in self.scope), accepted=self.accepted,
                          weights=self.weights)


class GraphRelInstance(BaseModel):
    """
    Simple graph with relations, pair labels, optional vertex weights and the
    dagger flag (scoped vertices are unconstrained apart from relations).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=0)
    edges: Tuple[Edge, ...] = ()
    constraints: Tuple[Constraint, ...] = ()
    family: PairFamily
    labels: Tuple[int, ...] = ()
    vertex_weights: Optional[Dict[int, Fraction]] = None
    dagger_mode: bool = False

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            if not data.get("labels"):
                data["labels"] = tuple([0] * int(data.get("n", 0)))
            if not data.get("vertex_weights"):
                data["vertex_weights"] = None
        return data

    @field_validator("edges", mode="before")
    @classmethod
    def _normalise_edges(cls, value: Iterable[Sequence[int]]) -> Tuple[Edge, ...]:
        normal = []
        for u, v in value:
            u, v = int(u), int(v)
            normal.append((u, v) if u < v else (v, u))
        return tuple(sorted(normal))

    @field_validator("vertex_weights", mode="before")
    @classmethod
    def _fractions(cls, value):
        if value is None:
            return None
        return {int(k): to_fraction(v) for k, v in dict(value).items()}

    @model_validator(mode="after")
    def _check(self) -> "GraphRelInstance":
        n = self.n
        seen: Set[Edge] = set()
        for u, v in self.edges:
            if u == v:
                raise ValidationError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u},{v}) out of range")
            if (u, v) in seen:
                raise ValidationError(f"multi-edge ({u},{v})")
            seen.add((u, v))
        for c in self.constraints:
            for v in c.scope:
                if not 0 <= v < n:
                    raise ValidationError(f"scope vertex {v} out of range")
        if self.labels and len(self.labels) != n:
            raise ValidationError(f"labels cover {len(self.labels)} of {n} vertices")
        usage: Dict[int, int] = {}
        for v, lab in enumerate(self.labels):
            if not 0 <= lab < len(self.family.pairs):
                raise ValidationError(f"label {lab} of vertex {v} outside the family")
            usage[lab] = usage.get(lab, 0) + 1
        for lab, used in usage.items():
            bound = self.family.bound(lab)
            if bound is not None and used > bound:
                raise ValidationError(f"pair {lab} used {used} times, bound {bound}")
        if self.vertex_weights:
            for v in self.vertex_weights:
                if not 0 <= v < n:
                    raise ValidationError(f"weighted vertex {v} out of range")
        return self

    @classmethod
    def plain(cls, n: int, edges: Iterable[Sequence[int]], pair: Pair, **kwargs) -> "GraphRelInstance":
        return cls(n=n, edges=tuple(edges), family=PairFamily.single(pair), **kwargs)

    @property
    def pair(self) -> Pair:
        return self.family.base

    def label(self, v: int) -> int:
        return self.labels[v] if self.labels else 0

    def pair_of(self, v: int) -> Pair:
        return self.family.pairs[self.label(v)]

    def adjacency(self) -> List[List[int]]:
        adj: List[List[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def scoped_vertices(self) -> Set[int]:
        return {v for c in self.constraints for v in c.scope}

    @property
    def size(self) -> int:
        """n + sum of relation sizes"""
        return self.n + sum(len(c.accepted) for c in self.constraints)

    @property
    def arity(self) -> int:
        return max((c.arity for c in self.constraints), default=0)

    @property
    def is_weighted(self) -> bool:
        return bool(self.vertex_weights) or any(c.weights is not None for c in self.constraints)

    @property
    def is_plain(self) -> bool:
        """No relations, no labels other than the base pair, no weights, not dagger."""
        return (not self.constraints and not self.is_weighted and not self.dagger_mode
                and all(lab == 0 for lab in self.labels))

    def vertex_weight(self, v: int) -> Fraction:
        if not self.vertex_weights:
            return Fraction(1)
        return self.vertex_weights.get(v, Fraction(1))

    def to_networkx(self):
        import networkx as nx

        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def with_constraints(self, constraints: Sequence[Constraint]) -> "GraphRelInstance":
        return self.model_copy(update={"constraints": tuple(constraints)})


class InstanceBuilder:
    """
    Mutable companion of GraphRelInstance. Builders add vertices, edges and
    constraints, and paste other instances with some vertices identified.
    """

    def __init__(self, family: PairFamily, dagger_mode: bool = False):
        self.family = family
        self.dagger_mode = dagger_mode
        self.n = 0
        self.edges: Set[Edge] = set()
        self.constraints: List[Constraint] = []
        self.labels: List[int] = []
        self.vertex_weights: Dict[int, Fraction] = {}

    @classmethod
    def for_pair(cls, pair: Pair) -> "InstanceBuilder":
        return cls(PairFamily.single(pair))

    @classmethod
    def from_instance(cls, inst: GraphRelInstance) -> "InstanceBuilder":
        builder = cls(inst.family, inst.dagger_mode)
        builder.n = inst.n
        builder.edges = set(inst.edges)
        builder.constraints = list(inst.constraints)
        builder.labels = [inst.label(v) for v in range(inst.n)]
        builder.vertex_weights = dict(inst.vertex_weights or {})
        return builder

    def add_vertex(self, label: int = 0) -> int:
        self.labels.append(label)
        self.n += 1
        return self.n - 1

    def add_vertices(self, k: int, label: int = 0) -> List[int]:
        return [self.add_vertex(label) for _ in range(k)]

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise ConstructionError(f"loop at vertex {u}")
        edge = (u, v) if u < v else (v, u)
        if edge in self.edges:
            raise ConstructionError(f"edge {edge} added twice")
        self.edges.add(edge)

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edges

    def remove_edge(self, u: int, v: int) -> None:
        edge = (u, v) if u < v else (v, u)
        if edge not in self.edges:
            raise ConstructionError(f"edge {edge} not present")
        self.edges.remove(edge)

    def add_constraint(self, constraint: Constraint) -> None:
        self.constraints.append(constraint)

    def set_label(self, v: int, label: int) -> None:
        self.labels[v] = label

    def set_weight(self, v: int, weight) -> None:
        self.vertex_weights[v] = to_fraction(weight)

    def use_pair(self, pair: Pair, bound: Optional[int] = None) -> int:
        """Index of pair in the family, adding it when missing."""
        self.family, index = self.family.with_pair(pair, bound)
        return index

    def paste(self, inst: GraphRelInstance, identify: Optional[Mapping[int, int]] = None) -> Dict[int, int]:
        """
        Copy inst into the builder. Vertices listed in identify are mapped onto
        existing vertices; the rest become fresh vertices in increasing order.
        Labels of inst refer to inst.family and are translated, the base pair
        included; the bounds of inst.family are added to the builder's.
        """
        identify = dict(identify or {})
        label_map = {
            index: self.use_pair(pair, inst.family.bound(index))
            for index, pair in enumerate(inst.family.pairs)
        }
        mapping: Dict[int, int] = {}
        for v in range(inst.n):
            if v in identify:
                mapping[v] = identify[v]
            else:
                mapping[v] = self.add_vertex(label_map[inst.label(v)])
        for u, v in inst.edges:
            self.add_edge(mapping[u], mapping[v])
        for c in inst.constraints:
            self.add_constraint(c.relabeled(mapping))
        if inst.vertex_weights:
            for v, w in inst.vertex_weights.items():
                self.vertex_weights[mapping[v]] = w
        return mapping

    def freeze(self) -> GraphRelInstance:
        return GraphRelInstance(
            n=self.n,
            edges=tuple(self.edges),
            constraints=tuple(self.constraints),
            family=self.family,
            labels=tuple(self.labels),
            vertex_weights=dict(self.vertex_weights) if self.vertex_weights else None,
            dagger_mode=self.dagger_mode,
        )
