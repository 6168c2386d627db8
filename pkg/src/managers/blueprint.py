"""
Managers assembled from an L_beta^(2d)-provider.

Each side (B and Bbar) is a chain of layers of d vertices. Layer g carries
s_top fill copies of the provider, each layer vertex standing for two of its
portals, and consecutive layers are joined through one copy J per step whose
first portal is u_i. Step z of block i gives u_i one more selected neighbour
while z is at most its target count; mu tracks how many vertices of the
current layer still miss a neighbour. Auxiliary vertices after u_rank pad
the chains until both sides close on the shared last layer.
"""

from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from loguru import logger

from ..core.instance import Constraint
from ..core.pair import Pair
from ..core.states import State, StateString, rho, sigma, string_code
from ..exceptions import CertificationError, ConstructionError, PreconditionError
from ..oracle.certify import certify_gadget
from ..oracle.gadget import PortalGadget, closed_neighbourhoods_disjoint
from ..providers.builder import Attached, GadgetBuilder
from .manager import LBetaSpec, ManagerInstance, blocks_from_owner

# (mu_B, wrap_B, mu_Bbar, wrap_Bbar) at a block boundary
Interface = Tuple[int, bool, int, bool]


def tail_length(spec: LBetaSpec, rank: int) -> int:
    """Number of auxiliary vertices after u_rank."""
    if spec.beta == 1:
        return spec.d
    return spec.d - rank % spec.d


def _check_provider(spec: LBetaSpec, provider: PortalGadget, pair: Pair) -> None:
    if pair.s_top < 1:
        raise PreconditionError("Blueprint", "s_top must be at least 1")
    if len(provider.portals) != spec.length:
        raise PreconditionError("Blueprint", f"provider has {len(provider.portals)} portals, expected {spec.length}")
    if not closed_neighbourhoods_disjoint(provider):
        raise PreconditionError("Blueprint", "closed neighbourhoods of the portals must be disjoint")
    if provider.declared_language is None:
        raise PreconditionError("Blueprint", "provider declares no language")
    for x in provider.declared_language.sorted():
        if not spec.contains(x):
            raise PreconditionError("Blueprint", f"declared string {string_code(x)} lies outside L_{spec.beta}^({spec.length})")


class Blueprint:
    """The rank-specific graph together with its intended solutions."""

    def __init__(self, spec: LBetaSpec, provider: PortalGadget, pair: Pair, alphabet: Sequence[State], rank: int):
        self.spec = spec
        self.provider = provider
        self.pair = pair
        self.alphabet = tuple(alphabet)
        self.rank = rank
        self.d = spec.d
        self.t = pair.t_top
        self.s_top = pair.s_top
        self.ell_star = rank + tail_length(spec, rank)
        self.last = self.ell_star * self.t

        aux = [sigma(0)] + ([rho(0)] if spec.beta == 1 else [])
        aux += [x for x in self.alphabet if x.selected and x not in aux]
        self.aux = aux
        self._active = tuple([sigma(1)] * self.d + [sigma(0)] * self.d)
        self._idle = tuple([sigma(0)] * (2 * self.d))
        self._cache: Dict[tuple, tuple] = {}
        self._build_graph()

    # graph

    def _build_graph(self) -> None:
        d, t = self.d, self.t
        b = GadgetBuilder(self.pair, f"blueprint[{self.rank}]")
        self.builder = b
        self.us = b.vertices(self.ell_star)
        self.layers: List[List[List[int]]] = [[b.vertices(d) for _ in range(self.last + 1)]]
        bar = [b.vertices(d) for _ in range(self.last)]
        bar.append(list(reversed(self.layers[0][self.last])))
        self.layers.append(bar)

        self.fills: List[List[List[Attached]]] = [[], []]
        for side in (0, 1):
            for g, layer in enumerate(self.layers[side]):
                if side == 1 and g == self.last:
                    self.fills[1].append(self.fills[0][self.last])
                    continue
                self.fills[side].append([b.attach(self.provider, layer + layer) for _ in range(self.s_top)])

        self.js: List[List[List[Attached]]] = [[], []]
        for side in (0, 1):
            for i in range(self.ell_star):
                row = []
                for z in range(t):
                    g = i * t + z + 1
                    hosts = [self.us[i]] + self.layers[side][g - 1][:d - 1] + self.layers[side][g]
                    row.append(b.attach(self.provider, hosts))
                self.js[side].append(row)

    def _block_index(self, i: int) -> int:
        return min(i, self.rank - 1)

    def owner(self) -> Dict[int, Tuple[int, int]]:
        owner: Dict[int, Tuple[int, int]] = {}
        for side in (0, 1):
            for g, layer in enumerate(self.layers[side]):
                place = (1, self.rank - 1) if g == self.last else (side, self._block_index(g // self.t))
                for v in layer:
                    owner[v] = place
                for f in self.fills[side][g]:
                    for v in f.inner():
                        owner[v] = place
            for i, row in enumerate(self.js[side]):
                for j in row:
                    for v in j.inner():
                        owner[v] = (side, self._block_index(i))
        for u in self.us[self.rank:]:
            owner[u] = (0, self.rank - 1)
        return owner

    def bound(self) -> int:
        """(d+1)(s_top+1)(t_top+1) provider sizes; the tail never exceeds d+1 blocks."""
        return (self.d + 1) * (self.s_top + 1) * (self.t + 1) * self.provider.n

    # selections

    def _witness(self, copy: Attached, x: Sequence[State]) -> Set[int]:
        try:
            return copy.witness(x)
        except KeyError:
            raise ConstructionError(f"{self.provider.name} has no witness for {string_code(x)}") from None

    def _fill_selection(self, side: int, g: int, top_active: bool) -> Set[int]:
        chosen: Set[int] = set(self.layers[side][g])
        for y, f in enumerate(self.fills[side][g]):
            active = y < self.s_top - 1 or top_active
            chosen |= self._witness(f, self._active if active else self._idle)
        return chosen

    def _step(self, selected: bool, inc: bool, mu: int) -> Tuple[StateString, int, bool]:
        """J string for one step, the new mu and whether the layer wraps."""
        d = self.d
        first = (sigma if selected else rho)(1 if inc else 0)
        prev = [sigma(1)] * mu + [sigma(0)] * (d - 1 - mu)
        if inc and selected:
            cur = [sigma(0)] * (mu + 1) + [sigma(1)] * (d - mu - 1)
            mu += 1
            wrap = mu == d
            if wrap:
                mu = 0
        else:
            cur = [sigma(0)] * mu + [sigma(1)] * (d - mu)
            wrap = False
        return tuple([first] + prev + cur), mu, wrap

    def _target(self, side: int, state: State) -> int:
        if side == 0:
            return state.count
        top = self.s_top if state.selected else self.pair.r_top
        return top - state.count

    def block(self, side: int, i: int, state: State, mu: int, wrap_in: bool, close: bool = True):
        """
        Selection of block i on one side: its start layer, its J copies and
        its later layers. With close=False the shared last layer's fills
        are left to the caller.
        Returns (selection, mu_out, wrap_out, last J string).
        """
        key = (side, i, state, mu, wrap_in, close)
        if key in self._cache:
            return self._cache[key]
        t = self.t
        chosen = {self.us[i]} if state.selected else set()
        chosen |= self._fill_selection(side, i * t, wrap_in)
        target = self._target(side, state)
        x: StateString = ()
        wrap = wrap_in
        for z in range(t):
            x, mu, wrap = self._step(state.selected, z < target, mu)
            chosen |= self._witness(self.js[side][i][z], x)
            g = i * t + z + 1
            if g == self.last and not close:
                chosen |= set(self.layers[side][g])
            else:
                chosen |= self._fill_selection(side, g, wrap)
        result = (frozenset(chosen), mu, wrap, x)
        self._cache[key] = result
        return result

    def _check_invariant(self, mu: int, mu_bar: int, selected_count: int, where: str) -> None:
        if (mu + mu_bar - self.s_top * selected_count) % self.d:
            raise ConstructionError(
                f"blueprint[{self.rank}] {where}: mu={mu}, mu_bar={mu_bar} with "
                f"{selected_count} selected breaks the counting invariant mod {self.d}"
            )

    def _closes(self, last_b: StateString, last_bar: StateString, wrap: bool) -> bool:
        """Every vertex of the shared layer gets exactly one more neighbour."""
        d = self.d
        cur_b, cur_bar = last_b[d:], last_bar[d:]
        for j in range(d):
            extra = (cur_b[j] == sigma(1)) + (cur_bar[d - 1 - j] == sigma(1)) + wrap
            if extra != 1:
                return False
        return True

    def tail(self, interface: Interface, pattern: Sequence[State], selected_count: Optional[int] = None):
        """Selection of the auxiliary part for one padding pattern, or None if it does not close."""
        mu, wrap, mu_bar, wrap_bar = interface
        chosen: Set[int] = set()
        last_b: StateString = ()
        last_bar: StateString = ()
        for k, state in enumerate(pattern):
            i = self.rank + k
            close = i != self.ell_star - 1
            sel_b, mu, wrap, last_b = self.block(0, i, state, mu, wrap, close)
            sel_bar, mu_bar, wrap_bar, last_bar = self.block(1, i, state, mu_bar, wrap_bar, close)
            chosen |= sel_b | sel_bar
            if selected_count is not None:
                selected_count += state.selected
                self._check_invariant(mu, mu_bar, selected_count, f"aux {i + 1}")
        top_active = wrap or wrap_bar
        if not self._closes(last_b, last_bar, top_active):
            return None
        chosen |= self._fill_selection(0, self.last, top_active)
        return frozenset(chosen)

    def choose_tail(self, interface: Interface) -> Tuple[Tuple[State, ...], FrozenSet[int]]:
        """First padding pattern, in the order of the auxiliary alphabet, that closes."""
        length = self.ell_star - self.rank
        for pattern in product(self.aux, repeat=length):
            chosen = self.tail(interface, pattern)
            if chosen is not None:
                return pattern, chosen
        raise ConstructionError(f"blueprint[{self.rank}]: no padding closes interface {interface}")

    # relations and solutions

    def head(self, x: StateString) -> Tuple[FrozenSet[int], Interface, int]:
        mu, wrap, mu_bar, wrap_bar = 0, True, 0, True
        chosen: Set[int] = set()
        count = 0
        for i, state in enumerate(x):
            sel_b, mu, wrap, _ = self.block(0, i, state, mu, wrap)
            sel_bar, mu_bar, wrap_bar, _ = self.block(1, i, state, mu_bar, wrap_bar)
            chosen |= sel_b | sel_bar
            count += state.selected
        return frozenset(chosen), (mu, wrap, mu_bar, wrap_bar), count

    def solve(self, x: StateString) -> FrozenSet[int]:
        chosen, interface, _ = self.head(x)
        _, tail = self.choose_tail(interface)
        return chosen | tail

    def add_relations(self) -> None:
        """
        Walk all reachable block interfaces: one relation per head block and
        side over u_i and the block, one relation over the auxiliary part.
        """
        t = self.t
        frontier = {(0, True, 0, True, 0)}
        for i in range(self.rank):
            seen: List[Set[FrozenSet[int]]] = [set(), set()]
            nxt = set()
            for mu, wrap, mu_bar, wrap_bar, count in frontier:
                for state in self.alphabet:
                    sel_b, mu2, wrap2, _ = self.block(0, i, state, mu, wrap)
                    sel_bar, mu_bar2, wrap_bar2, _ = self.block(1, i, state, mu_bar, wrap_bar)
                    seen[0].add(sel_b)
                    seen[1].add(sel_bar)
                    count2 = count + state.selected
                    self._check_invariant(mu2, mu_bar2, count2, f"block {i + 1}")
                    nxt.add((mu2, wrap2, mu_bar2, wrap_bar2, count2 % self.d))
            for side in (0, 1):
                scope = {self.us[i]}
                for g in range(i * t, (i + 1) * t + 1):
                    for f in self.fills[side][g]:
                        scope.update(f.vertices())
                for j in self.js[side][i]:
                    scope.update(j.vertices())
                self._relation(scope, seen[side])
            frontier = nxt

        tails: Set[FrozenSet[int]] = set()
        chosen_patterns: Dict[Interface, Tuple[State, ...]] = {}
        for mu, wrap, mu_bar, wrap_bar, count in frontier:
            interface = (mu, wrap, mu_bar, wrap_bar)
            if interface not in chosen_patterns:
                chosen_patterns[interface], _ = self.choose_tail(interface)
            tails.add(self.tail(interface, chosen_patterns[interface], count))
        scope = set(self.us[self.rank:])
        for side in (0, 1):
            for g in range(self.rank * t, self.last + 1):
                for f in self.fills[side][g]:
                    scope.update(f.vertices())
            for row in self.js[side][self.rank:]:
                for j in row:
                    scope.update(j.vertices())
        self._relation(scope, tails)
        logger.debug(f"blueprint[{self.rank}]: {len(chosen_patterns)} tail interfaces, "
                     f"padding {sorted(string_code(p) for p in chosen_patterns.values())}")

    def _relation(self, scope: Iterable[int], selections: Iterable[FrozenSet[int]]) -> None:
        ordered = sorted(scope)
        inside = set(ordered)
        self.builder.graph.add_constraint(Constraint.from_sets(ordered, [sel & inside for sel in selections]))

    def instance(self) -> ManagerInstance:
        self.add_relations()
        blocks, blocks_bar = blocks_from_owner(self.owner(), self.rank)
        return ManagerInstance(
            rank=self.rank,
            alphabet=self.alphabet,
            instance=self.builder.graph.freeze(),
            distinguished=tuple(self.us[:self.rank]),
            blocks=blocks,
            blocks_bar=blocks_bar,
            bound=self.bound(),
            solver=self.solve,
        )


def default_alphabet(spec: LBetaSpec, pair: Pair) -> List[State]:
    if spec.beta == 0:
        return [sigma(i) for i in range(pair.s_top + 1)]
    return pair.alphabet()


def build_manager_from_provider(
    spec: LBetaSpec,
    provider: PortalGadget,
    rank: int,
    alphabet: Optional[Sequence[State]] = None,
    certify: bool = False,
    cap: Optional[int] = None,
) -> ManagerInstance:
    """
    Rank-`rank` manager from an L_beta^(2d)-provider whose portals have
    disjoint closed neighbourhoods. The alphabet defaults to all σ states
    (beta = 0) or the whole truncated alphabet (beta = 1).

    Raises:
        PreconditionError: the provider does not fit spec
        CertificationError: certify=True and the oracle rejects the provider
        ConstructionError: no padding closes the chains, or the counting
            invariant fails while emitting solutions
    """
    pair = provider.instance.pair
    _check_provider(spec, provider, pair)
    if certify:
        result = certify_gadget(provider, cap=cap)
        if not result.is_provider:
            raise CertificationError(f"{provider.name}: {result.reason}")
    alphabet = list(alphabet) if alphabet is not None else default_alphabet(spec, pair)
    if spec.beta == 0 and any(not x.selected for x in alphabet):
        raise PreconditionError("Blueprint", "beta = 0 manages σ states only")
    if any(x.count > (pair.s_top if x.selected else pair.r_top) for x in alphabet):
        raise PreconditionError("Blueprint", "alphabet exceeds the truncated alphabet")
    return Blueprint(spec, provider, pair, alphabet, rank).instance()
