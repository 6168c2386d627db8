"""
Path decompositions of graphs with relations. Constraint scopes count as
cliques.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .instance import GraphRelInstance


class PathDecomposition(BaseModel):
    """Ordered list of bags"""

    model_config = ConfigDict(frozen=True)

    bags: Tuple[Tuple[int, ...], ...] = ()

    @classmethod
    def of(cls, bags: Iterable[Iterable[int]]) -> "PathDecomposition":
        return cls(bags=tuple(tuple(sorted(set(b))) for b in bags))

    @classmethod
    def single_bag(cls, n: int) -> "PathDecomposition":
        return cls.of([range(n)])

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def __len__(self) -> int:
        return len(self.bags)


class DecompositionReport(BaseModel):
    """Outcome of validating a decomposition against an instance."""

    model_config = ConfigDict(frozen=True)

    valid: bool
    width: int = -1
    violation: Optional[str] = Field(default=None, description="T.1, T.2, T.2-scope or T.3")
    witness: Tuple[int, ...] = ()
    detail: str = ""


def validate_path_decomposition(inst: GraphRelInstance, pd: PathDecomposition) -> DecompositionReport:
    """
    Check coverage of vertices (T.1), of edges and scopes (T.2) and
    contiguity (T.3). Violations are returned, not raised.
    """
    occurrences: Dict[int, List[int]] = {}
    for index, bag in enumerate(pd.bags):
        for v in bag:
            if not 0 <= v < inst.n:
                return DecompositionReport(valid=False, violation="T.1", witness=(v,),
                                           detail=f"bag {index} holds unknown vertex {v}")
            occurrences.setdefault(v, []).append(index)

    for v in range(inst.n):
        if v not in occurrences:
            return DecompositionReport(valid=False, violation="T.1", witness=(v,),
                                       detail=f"vertex {v} in no bag")

    for v, where in occurrences.items():
        if where[-1] - where[0] + 1 != len(where):
            return DecompositionReport(valid=False, violation="T.3", witness=(v,),
                                       detail=f"vertex {v} occurs in bags {where}")

    span = {v: (where[0], where[-1]) for v, where in occurrences.items()}
    for u, v in inst.edges:
        if max(span[u][0], span[v][0]) > min(span[u][1], span[v][1]):
            return DecompositionReport(valid=False, violation="T.2", witness=(u, v),
                                       detail=f"edge ({u},{v}) in no bag")

    for index, c in enumerate(inst.constraints):
        if not c.scope:
            continue
        lo = max(span[v][0] for v in c.scope)
        hi = min(span[v][1] for v in c.scope)
        if lo > hi:
            return DecompositionReport(valid=False, violation="T.2-scope", witness=c.scope,
                                       detail=f"scope of constraint {index} in no bag")

    return DecompositionReport(valid=True, width=pd.width)


def covering_bag(pd: PathDecomposition, vertices: Iterable[int]) -> Optional[int]:
    """Index of the first bag containing all the vertices."""
    wanted = set(vertices)
    for index, bag in enumerate(pd.bags):
        if wanted.issubset(bag):
            return index
    return None


def fill_intervals(bags: Sequence[Iterable[int]]) -> List[Set[int]]:
    """Add every vertex to all bags between its first and last occurrence."""
    filled = [set(b) for b in bags]
    first: Dict[int, int] = {}
    last: Dict[int, int] = {}
    for index, bag in enumerate(filled):
        for v in bag:
            first.setdefault(v, index)
            last[v] = index
    for v, lo in first.items():
        for index in range(lo, last[v] + 1):
            filled[index].add(v)
    return filled


def cover_missing(inst: GraphRelInstance, bags: Sequence[Iterable[int]]) -> List[Set[int]]:
    """
    Make sure every vertex, edge and scope lies in some bag by adding missing
    vertices to the bag that already holds most of them. Contiguity is not
    restored here; follow with fill_intervals.
    """
    bags = [set(b) for b in bags] or [set()]
    where: Dict[int, Set[int]] = {}
    for index, bag in enumerate(bags):
        for v in bag:
            where.setdefault(v, set()).add(index)

    def ensure(group: Sequence[int]) -> None:
        if not group:
            return
        common = set.intersection(*(where.get(v, set()) for v in group))
        if common:
            return
        score: Dict[int, int] = {}
        for v in group:
            for index in where.get(v, ()):
                score[index] = score.get(index, 0) + 1
        target = max(score, key=lambda i: (score[i], -i)) if score else len(bags) - 1
        for v in group:
            if target not in where.setdefault(v, set()):
                bags[target].add(v)
                where[v].add(target)

    for v in range(inst.n):
        ensure([v])
    for u, v in inst.edges:
        ensure([u, v])
    for c in inst.constraints:
        ensure(list(c.scope))
    return bags


def repair(inst: GraphRelInstance, bags: Sequence[Iterable[int]]) -> PathDecomposition:
    """cover_missing followed by fill_intervals"""
    return PathDecomposition.of(fill_intervals(cover_missing(inst, bags)))


def splice_after(pd: PathDecomposition, index: int, extra: Sequence[Iterable[int]]) -> PathDecomposition:
    """
    Insert copies of bag ``index`` right after it, the k-th copy extended by
    extra[k].
    """
    base = pd.bags[index]
    inserted = [tuple(sorted(set(base) | set(e))) for e in extra]
    return PathDecomposition(bags=pd.bags[: index + 1] + tuple(inserted) + pd.bags[index + 1:])


def append_to_all(pd: PathDecomposition, vertices: Iterable[int]) -> PathDecomposition:
    extra = set(vertices)
    bags = pd.bags or ((),)
    return PathDecomposition.of(set(b) | extra for b in bags)
