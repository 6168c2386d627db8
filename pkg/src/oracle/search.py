"""
Exact enumeration of lambda-sets (and partial solutions) by backtracking.

The search assigns vertices one at a time, or a whole relation scope at once
when a relation admits fewer completions than its free vertices would. It
prunes on two conditions: a constrained vertex whose count can no longer
reach its set, and a relation with no consistent mask. Every complete
assignment that survives is a solution, so the result equals plain
enumeration of all 2^n subsets.
"""

import math
import sys
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Set, Tuple

from loguru import logger

from ..config import get_settings
from ..core.instance import GraphRelInstance
from ..core.intset import IntSet
from ..exceptions import OracleCapExceeded


# leaf callback: (selection flags, selected-neighbour counts, weight)
LeafCallback = Callable[[List[int], List[int], Fraction], None]


def search_size(inst: GraphRelInstance, fixed: Optional[Mapping[int, bool]] = None) -> float:
    """
    log2 of the size of the space the search walks: free vertices count one
    bit each, a relation counts log2 of its accepted masks for the scope
    vertices it is first to cover.
    """
    fixed = fixed or {}
    covered: Set[int] = set(fixed)
    size = 0.0
    for c in sorted(inst.constraints, key=lambda c: len(c.accepted)):
        fresh = [v for v in c.scope if v not in covered]
        if not fresh:
            continue
        size += min(float(len(fresh)), math.log2(max(1, len(c.accepted))))
        covered.update(fresh)
    size += sum(1 for v in range(inst.n) if v not in covered)
    return size


def check_cap(inst: GraphRelInstance, cap: Optional[int], fixed: Optional[Mapping[int, bool]] = None) -> None:
    cap = get_settings().oracle_cap if cap is None else cap
    size = search_size(inst, fixed)
    logger.debug(f"oracle search size {size:.1f} (n={inst.n}, relations={len(inst.constraints)})")
    if size > cap + 1e-9:
        raise OracleCapExceeded(size, cap)


class SolutionSearch:
    """
    Backtracking enumerator over one instance. Portal vertices are exempt
    from their sigma/rho constraint; so is every scoped vertex in dagger mode.
    """

    def __init__(
        self,
        inst: GraphRelInstance,
        portals: Sequence[int] = (),
        fixed: Optional[Mapping[int, bool]] = None,
    ):
        self.inst = inst
        n = inst.n
        self.n = n
        self.adj = inst.adjacency()
        self.portals = list(portals)

        exempt = [False] * n
        for p in self.portals:
            exempt[p] = True
        if inst.dagger_mode:
            for v in inst.scoped_vertices():
                exempt[v] = True
        self.exempt = exempt

        self.sel_set: List[IntSet] = []
        self.uns_set: List[IntSet] = []
        for v in range(n):
            pair = inst.pair_of(v)
            self.sel_set.append(pair.sigma)
            self.uns_set.append(pair.rho)
        self.sel_free = [s.is_everything for s in self.sel_set]
        self.uns_free = [s.is_everything for s in self.uns_set]

        self.scopes = [list(c.scope) for c in inst.constraints]
        self.cands: List[List[int]] = [list(c.accepted) for c in inst.constraints]
        self.free = [len(s) for s in self.scopes]
        self.vpos: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
        for ci, scope in enumerate(self.scopes):
            for bit, v in enumerate(scope):
                self.vpos[v].append((ci, bit))

        self.value = [-1] * n
        self.sel = [0] * n
        self.unk = [len(a) for a in self.adj]
        self.trail: List[int] = []
        self.cand_trail: List[Tuple[int, List[int]]] = []
        self.assigned = 0

        self.order = self._branch_order()
        self.pos = 0
        self.fixed = dict(fixed or {})
        self.nodes = 0

    def _branch_order(self) -> List[int]:
        """BFS over graph and scope adjacency, portals first."""
        n = self.n
        neighbours = [list(a) for a in self.adj]
        for scope in self.scopes:
            for v in scope:
                neighbours[v].extend(u for u in scope if u != v)
        seen = [False] * n
        order: List[int] = []
        starts = self.portals + list(range(n))
        for s in starts:
            if seen[s]:
                continue
            seen[s] = True
            queue = [s]
            head = 0
            while head < len(queue):
                v = queue[head]
                head += 1
                order.append(v)
                for u in neighbours[v]:
                    if not seen[u]:
                        seen[u] = True
                        queue.append(u)
        return order

    # state updates

    def _feasible(self, v: int) -> bool:
        val = self.value[v]
        if val < 0 or self.exempt[v]:
            return True
        if val:
            if self.sel_free[v]:
                return True
            return self.sel_set[v].intersects_range(self.sel[v], self.sel[v] + self.unk[v])
        if self.uns_free[v]:
            return True
        return self.uns_set[v].intersects_range(self.sel[v], self.sel[v] + self.unk[v])

    def _assign(self, v: int, val: int) -> bool:
        self.value[v] = val
        self.trail.append(v)
        self.assigned += 1
        ok = True
        for u in self.adj[v]:
            self.unk[u] -= 1
            if val:
                self.sel[u] += 1
        for ci, bit in self.vpos[v]:
            self.free[ci] -= 1
            old = self.cands[ci]
            new = [m for m in old if (m >> bit) & 1 == val]
            self.cand_trail.append((ci, old))
            self.cands[ci] = new
            if not new:
                ok = False
        if not ok:
            return False
        if not self._feasible(v):
            return False
        for u in self.adj[v]:
            if not self._feasible(u):
                return False
        return True

    def _undo(self, trail_mark: int, cand_mark: int) -> None:
        while len(self.cand_trail) > cand_mark:
            ci, old = self.cand_trail.pop()
            self.cands[ci] = old
        while len(self.trail) > trail_mark:
            v = self.trail.pop()
            val = self.value[v]
            self.value[v] = -1
            self.assigned -= 1
            for u in self.adj[v]:
                self.unk[u] += 1
                if val:
                    self.sel[u] -= 1
            for ci, _ in self.vpos[v]:
                self.free[ci] += 1

    # search

    def run(self, on_leaf: LeafCallback) -> None:
        for ci, scope in enumerate(self.scopes):
            if not scope and not self.cands[ci]:
                return
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 4 * self.n + 10_000))
        try:
            ok = True
            for v, val in sorted(self.fixed.items()):
                if not self._assign(v, 1 if val else 0):
                    ok = False
                    break
            if ok:
                self._search(on_leaf)
        finally:
            sys.setrecursionlimit(limit)

    def _leaf_weight(self) -> Fraction:
        weight = Fraction(1)
        for ci, c in enumerate(self.inst.constraints):
            if c.weights is not None:
                weight *= c.weights[self.cands[ci][0]]
        if self.inst.vertex_weights:
            for v, w in self.inst.vertex_weights.items():
                if self.value[v] == 1:
                    weight *= w
        return weight

    def _search(self, on_leaf: LeafCallback) -> None:
        self.nodes += 1
        if self.assigned == self.n:
            on_leaf(self.value, self.sel, self._leaf_weight())
            return

        best = -1
        best_count = 0
        for ci in range(len(self.scopes)):
            free = self.free[ci]
            if free == 0:
                continue
            count = len(self.cands[ci])
            if count < (1 << free) and (best < 0 or count < best_count):
                best, best_count = ci, count
                if count <= 1:
                    break

        trail_mark = len(self.trail)
        cand_mark = len(self.cand_trail)

        if best >= 0:
            scope = self.scopes[best]
            for mask in list(self.cands[best]):
                ok = True
                for bit, v in enumerate(scope):
                    if self.value[v] < 0 and not self._assign(v, (mask >> bit) & 1):
                        ok = False
                        break
                if ok:
                    self._search(on_leaf)
                self._undo(trail_mark, cand_mark)
            return

        saved = self.pos
        i = self.pos
        while self.value[self.order[i]] >= 0:
            i += 1
        self.pos = i
        v = self.order[i]
        for val in (0, 1):
            if self._assign(v, val):
                self._search(on_leaf)
            self._undo(trail_mark, cand_mark)
        self.pos = saved
