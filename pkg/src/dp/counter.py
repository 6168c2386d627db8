"""
Counting lambda-sets over a path decomposition.

Each live vertex carries (selected?, seen) where seen is the number of
selected neighbours met so far. A counter saturates at the top of a cofinite
set and dies beyond the top of a finite set, giving at most
s_top + r_top + 2 values per vertex.
"""

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from loguru import logger

from ..config import get_settings
from ..core.decomposition import PathDecomposition, validate_path_decomposition
from ..core.instance import GraphRelInstance
from ..core.intset import IntSet
from ..core.pair import Pair
from ..exceptions import DecompositionError, DpStateLimitExceeded
from ..oracle.oracle import Count, normalise


DEAD = -1


class _Counter:
    """Per-vertex saturation rule for one of sigma / rho."""

    __slots__ = ("allowed", "top", "saturates", "empty", "free")

    def __init__(self, s: IntSet, exempt: bool):
        self.empty = s.is_empty and not exempt
        self.free = exempt or s.is_everything
        if self.free or self.empty:
            self.top = 0
            self.saturates = True
            self.allowed = s
            return
        self.allowed = s
        self.top = s.top
        self.saturates = s.is_cofinite

    def bump(self, seen: int) -> int:
        if self.free:
            return 0
        seen += 1
        if seen > self.top:
            return self.top if self.saturates else DEAD
        return seen

    def accepts(self, seen: int) -> bool:
        if self.free:
            return True
        if self.saturates and seen >= self.top:
            return True
        return seen in self.allowed


def state_space_size(pair: Pair) -> int:
    """Number of distinct (flavour, capped seen) values of a vertex."""
    size = 0
    for s in (pair.sigma, pair.rho):
        if not s.is_empty:
            size += s.top + 1
    return size


def count_dp(inst: GraphRelInstance, pd: PathDecomposition, max_states: Optional[int] = None) -> Count:
    """
    Exact count of lambda-sets (weighted, dagger semantics as flagged).

    Raises:
        DecompositionError: pd does not validate against inst
        DpStateLimitExceeded: a bag produced more than max_states table entries
    """
    report = validate_path_decomposition(inst, pd)
    if not report.valid:
        raise DecompositionError(f"invalid decomposition: {report.violation} {report.detail}")
    max_states = max_states or get_settings().dp_max_states

    n = inst.n
    adj = [set(a) for a in inst.adjacency()]
    scoped = inst.scoped_vertices() if inst.dagger_mode else set()
    counters: List[Tuple[_Counter, _Counter]] = []
    for v in range(n):
        pair = inst.pair_of(v)
        exempt = v in scoped
        counters.append((_Counter(pair.rho, exempt), _Counter(pair.sigma, exempt)))

    bags = [set(b) for b in pd.bags]
    # step at which each vertex leaves: index of the first later bag without it
    leave: Dict[int, int] = {}
    for index, bag in enumerate(bags):
        for v in bag:
            leave[v] = index + 1
    steps = len(bags) + 1

    global_weight = Fraction(1)
    due: List[List[int]] = [[] for _ in range(steps)]
    for ci, c in enumerate(inst.constraints):
        if not c.scope:
            if 0 not in c.accepted:
                return 0
            global_weight *= c.weight(0)
            continue
        due[min(leave[v] for v in c.scope)].append(ci)

    current: List[int] = []
    table: Dict[Tuple[int, ...], Fraction] = {(): Fraction(1)}

    def forget(step: int, leaving: List[int]) -> None:
        nonlocal table, current
        if due[step]:
            position = {v: i for i, v in enumerate(current)}
            for ci in due[step]:
                c = inst.constraints[ci]
                idx = [position[v] for v in c.scope]
                filtered: Dict[Tuple[int, ...], Fraction] = {}
                accepted = set(c.accepted)
                for state, value in table.items():
                    mask = 0
                    for bit, i in enumerate(idx):
                        if state[i] & 1:
                            mask |= 1 << bit
                    if mask in accepted:
                        filtered[state] = value * c.weight(mask)
                table = filtered
        for v in leaving:
            i = current.index(v)
            rho_c, sigma_c = counters[v]
            merged: Dict[Tuple[int, ...], Fraction] = {}
            for state, value in table.items():
                code = state[i]
                chosen, seen = code & 1, code >> 1
                if not (sigma_c if chosen else rho_c).accepts(seen):
                    continue
                key = state[:i] + state[i + 1:]
                merged[key] = merged.get(key, Fraction(0)) + value
            table = merged
            current = current[:i] + current[i + 1:]

    def introduce(v: int, index: int) -> None:
        nonlocal table, current
        rho_c, sigma_c = counters[v]
        present = [i for i, u in enumerate(current) if u in adj[v]]
        weight = inst.vertex_weight(v)
        grown: Dict[Tuple[int, ...], Fraction] = {}
        for state, value in table.items():
            for chosen in (0, 1):
                own = sigma_c if chosen else rho_c
                if own.empty:
                    continue
                seen = 0
                new = list(state)
                alive = True
                for i in present:
                    code = new[i]
                    if code & 1:
                        seen = own.bump(seen)
                        if seen == DEAD:
                            alive = False
                            break
                    if chosen:
                        u = current[i]
                        u_c = counters[u][code & 1]
                        bumped = u_c.bump(code >> 1)
                        if bumped == DEAD:
                            alive = False
                            break
                        new[i] = (bumped << 1) | (code & 1)
                if not alive:
                    continue
                new.append((seen << 1) | chosen)
                key = tuple(new)
                grown[key] = grown.get(key, Fraction(0)) + (value * weight if chosen else value)
        table = grown
        current = current + [v]
        if len(table) > max_states:
            raise DpStateLimitExceeded(len(table), max_states, index)

    for index, bag in enumerate(bags):
        leaving = [v for v in current if v not in bag]
        forget(index, leaving)
        for v in sorted(bag):
            if v not in current:
                introduce(v, index)
    forget(len(bags), list(current))

    total = sum(table.values(), Fraction(0)) * global_weight
    logger.debug(f"count_dp: width {pd.width}, result {total}")
    return normalise(total)
