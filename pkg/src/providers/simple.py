"""
Single-flavour providers: {σ_s, ρ_r}, the ρ ladder, circulant bipartite
graphs and the σ0/σ1 block provider.
"""

from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from ..core.intset import IntSet
from ..core.pair import Pair
from ..core.states import StateString, rho, sigma
from ..exceptions import PreconditionError
from ..oracle.gadget import PortalGadget
from .builder import GadgetBuilder


def first_member(s: IntSet, lo: int = 0) -> Optional[int]:
    """Least element of s that is at least lo."""
    if s.is_cofinite:
        k = lo
        while k not in s:
            k += 1
        return k
    candidates = [v for v in s.support if v >= lo]
    return min(candidates) if candidates else None


def sigma_rho_provider(pair: Pair, s: int, r: int) -> PortalGadget:
    """
    {σ_s, ρ_r}-provider with one portal.

    For r >= 1: 2r cliques X_i, Y_i on s+1 vertices, vertex j of every X
    clique adjacent to vertex j of every Y clique; X and Y are the two
    witnesses. For r = 0: a clique on s+1 vertices.
    """
    if s not in pair.sigma or r not in pair.rho:
        raise PreconditionError("SigmaRho", f"need s={s} in sigma and r={r} in rho")
    b = GadgetBuilder(pair, f"sigma_rho(s={s},r={r})")
    u = b.portal()
    if r == 0:
        clique = [u] + b.vertices(s)
        b.clique(clique)
        return b.build([(sigma(s),), (rho(0),)], {(sigma(s),): clique, (rho(0),): []})

    xs = [[u] + b.vertices(s)] + [b.vertices(s + 1) for _ in range(r - 1)]
    ys = [b.vertices(s + 1) for _ in range(r)]
    for clique in xs + ys:
        b.clique(clique)
    for j in range(s + 1):
        b.biclique([x[j] for x in xs], [y[j] for y in ys])
    chosen_x = [v for clique in xs for v in clique]
    chosen_y = [v for clique in ys for v in clique]
    return b.build([(sigma(s),), (rho(r),)], {(sigma(s),): chosen_x, (rho(r),): chosen_y})


def rho_ladder(pair: Pair, s: Optional[int] = None, r: Optional[int] = None) -> PortalGadget:
    """
    {ρ0, ..., ρ_rtop}-provider: r_top copies of a {σ_s, ρ_r}-provider whose
    portals are all adjacent to the portal u.
    """
    if not pair.non_empty:
        raise PreconditionError("RhoLadder", "sigma and rho must be non-empty")
    s = pair.s_min if s is None else s
    r = pair.r_min if r is None else r
    inner = sigma_rho_provider(pair, s, r)
    top = pair.r_top
    b = GadgetBuilder(pair, f"rho_ladder(r_top={top})")
    u = b.portal()
    copies = []
    for _ in range(top):
        hub = b.vertex()
        b.edge(u, hub)
        copies.append(b.attach(inner, [hub]))
    witnesses: Dict[StateString, List[int]] = {}
    for j in range(top + 1):
        chosen: List[int] = []
        for index, copy in enumerate(copies):
            chosen.extend(copy.witness((sigma(s),) if index < j else (rho(r),)))
        witnesses[(rho(j),)] = chosen
    return b.build(witnesses.keys(), witnesses)


def circulant_edges(n: int, d: int) -> List[Tuple[int, int]]:
    """
    Edges (i, j) joining v_i and w_j whenever (i - j) mod n lies in [0, d).
    The graph is d-regular and contains every v_i w_i.
    """
    if not 0 <= d <= n:
        raise PreconditionError("Circulant", f"need 0 <= d={d} <= n={n}")
    return [(i, (i - b) % n) for i in range(n) for b in range(d)]


def circulant(pair: Pair, n: int, d: int) -> PortalGadget:
    """The circulant bipartite graph as a portal-free gadget (v side first)."""
    b = GadgetBuilder(pair, f"circulant(n={n},d={d})")
    vs = b.vertices(n)
    ws = b.vertices(n)
    for i, j in circulant_edges(n, d):
        b.edge(vs[i], ws[j])
    return PortalGadget(name=b.name, instance=b.graph.freeze())


def _chunks(vertices: Sequence[int], size: int) -> List[List[int]]:
    return [list(vertices[i:i + size]) for i in range(0, len(vertices), size)]


def lr_block(pair: Pair, r: int, s: Optional[int] = None) -> PortalGadget:
    """
    Provider of all strings over {σ0, σ1} of length 4r with zero or exactly
    2r σ1's. Portals have pairwise disjoint closed neighbourhoods.

    Per 2r-subset A of the portals there is a part V_A (2s+2 blocks of r)
    and a part W_A (2s+2 blocks, the first two of size r-1), complete
    between equal blocks, s-regular inside W_A and inside V_A except for
    the first two V blocks, which have degree s-1.
    """
    if r < 1 or r not in pair.rho:
        raise PreconditionError("LrBlock", f"need r={r} >= 1 in rho")
    s = first_member(pair.sigma, r) if s is None else s
    if s is None or s < r or s not in pair.sigma:
        raise PreconditionError("LrBlock", f"sigma needs an element s >= r={r}")

    b = GadgetBuilder(pair, f"lr_block(r={r},s={s})")
    ports = b.portals_n(4 * r)
    parts: List[Tuple[Tuple[int, ...], List[int], List[int]]] = []
    for subset in combinations(range(4 * r), 2 * r):
        nv = (s + 1) * r
        vs, ws = b.vertices(nv), b.vertices(nv)
        for i, j in circulant_edges(nv, s):
            if i == j and i < r:
                continue
            b.edge(vs[i], ws[j])
        v_blocks = [vs[:r], ws[:r]] + _chunks(vs[r:] + ws[r:], r)

        nw = s * r + r - 1
        xs, ys = b.vertices(nw), b.vertices(nw)
        for i, j in circulant_edges(nw, s):
            b.edge(xs[i], ys[j])
        w_blocks = [xs[:r - 1], ys[:r - 1]] + _chunks(xs[r - 1:] + ys[r - 1:], r)

        for vq, wq in zip(v_blocks, w_blocks):
            b.biclique(vq, wq)
        for p, k in enumerate(subset):
            target = v_blocks[0][p] if p < r else v_blocks[1][p - r]
            b.edge(ports[k], target)
        parts.append((subset, vs + ws, xs + ys))

    witnesses: Dict[StateString, List[int]] = {}
    witnesses[tuple([sigma(0)] * (4 * r))] = ports + [w for _, _, w_part in parts for w in w_part]
    for subset, v_part, _ in parts:
        x = tuple(sigma(1) if k in subset else sigma(0) for k in range(4 * r))
        chosen = list(ports) + list(v_part)
        for other, _, w_part in parts:
            if other != subset:
                chosen.extend(w_part)
        witnesses[x] = chosen
    return b.build(witnesses.keys(), witnesses)
