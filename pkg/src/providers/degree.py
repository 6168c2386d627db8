"""
Bipartite graphs with prescribed degrees, padded on both sides.
"""

from typing import List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict

from ..exceptions import ConstructionError, PreconditionError


class DegreeBipartite(BaseModel):
    """
    Left side: the prescribed vertices followed by `padding` vertices of
    degree a. Right side likewise. Edges are (left index, right index).
    """

    model_config = ConfigDict(frozen=True)

    left_degrees: Tuple[int, ...]
    right_degrees: Tuple[int, ...]
    padding: int
    a: int
    edges: Tuple[Tuple[int, int], ...]

    @property
    def left_size(self) -> int:
        return len(self.left_degrees) + self.padding

    @property
    def right_size(self) -> int:
        return len(self.right_degrees) + self.padding

    def degree_left(self, i: int) -> int:
        return sum(1 for a, _ in self.edges if a == i)

    def degree_right(self, j: int) -> int:
        return sum(1 for _, b in self.edges if b == j)


def build_degree_bipartite(
    left: Sequence[int],
    right: Sequence[int],
    a: int,
    padding: Optional[int] = None,
) -> DegreeBipartite:
    """
    Simple bipartite graph whose left vertices have degrees `left`, right
    vertices degrees `right`, plus `padding` extra vertices of degree a on
    each side (default a).

    Each right vertex in turn is joined to the left vertices with the most
    remaining capacity.

    Raises:
        PreconditionError: unequal degree sums, or a below some degree
        ConstructionError: the capacity procedure got stuck (padding too small)
    """
    if sum(left) != sum(right):
        raise PreconditionError("degree bipartite", f"sum {sum(left)} != sum {sum(right)}")
    if any(c > a for c in [*left, *right]) or a < 0:
        raise PreconditionError("degree bipartite", f"a = {a} below a prescribed degree")
    s = a if padding is None else padding

    cap_left: List[int] = list(left) + [a] * s
    cap_right: List[int] = list(right) + [a] * s
    edges: List[Tuple[int, int]] = []
    for j in range(len(cap_right)):
        d = cap_right[j]
        if d == 0:
            continue
        order = sorted(range(len(cap_left)), key=lambda i: (-cap_left[i], i))[:d]
        if len(order) < d or any(cap_left[i] < 1 for i in order):
            raise ConstructionError(f"degree bipartite stuck at right vertex {j} with padding {s}")
        for i in order:
            cap_left[i] -= 1
            edges.append((i, j))
        cap_right[j] = 0
    if any(cap_left):
        raise ConstructionError(f"degree bipartite left capacity remains with padding {s}")
    logger.debug(f"degree bipartite: {len(edges)} edges, padding {s}")
    return DegreeBipartite(
        left_degrees=tuple(left), right_degrees=tuple(right), padding=s, a=a, edges=tuple(edges)
    )


def smallest_padding(left: Sequence[int], right: Sequence[int], a: int) -> DegreeBipartite:
    """The construction with the fewest padding vertices that succeeds (at most a)."""
    for s in range(a):
        try:
            return build_degree_bipartite(left, right, a, s)
        except ConstructionError:
            continue
    return build_degree_bipartite(left, right, a, a)
