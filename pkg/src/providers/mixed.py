"""
Providers whose witnesses mix selected and unselected portals: the
three-part provider, the δ-portal triple provider and the {ρ0, ρ_m, σ0}
provider built from a degree-balanced bipartite core.
"""

from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger
from sympy import gcdex

from ..core.pair import Pair
from ..core.states import State, StateString, rho, sigma
from ..exceptions import ConstructionError, PreconditionError
from ..oracle.gadget import PortalGadget
from .builder import Attached, GadgetBuilder, uniform
from .degree import DegreeBipartite, build_degree_bipartite, smallest_padding
from .simple import sigma_rho_provider


def triple_lsr(pair: Pair, s: int, r: int) -> PortalGadget:
    """
    Provider of {σ_{s-1}σ_{s-1}ρ_{r-1}, ρ_rρ_rρ_r, ρ_{r-1}ρ_rσ_s}.

    Three parts X, Y, Z of r cliques on s+1 vertices; vertices at the same
    clique position in different parts are joined completely. Portals are
    x_1^1, x_1^2 and z_1^1, and the edges x_1^1 x_1^2 and x_1^1 z_1^1 are
    removed.
    """
    if s < 1 or r < 1 or s not in pair.sigma or r not in pair.rho:
        raise PreconditionError("TripleLsr", f"need s={s} >= 1 in sigma and r={r} >= 1 in rho")
    b = GadgetBuilder(pair, f"triple_lsr(s={s},r={r})")
    u1, u2, u3 = b.portals_n(3)

    def part(first: List[int]) -> List[List[int]]:
        cliques = [first + b.vertices(s + 1 - len(first))]
        cliques += [b.vertices(s + 1) for _ in range(r - 1)]
        return cliques

    xs = part([u1, u2])
    ys = part([])
    zs = part([u3])
    for clique in xs + ys + zs:
        b.clique(clique)
    for left, right in ((xs, ys), (xs, zs), (ys, zs)):
        for j in range(s + 1):
            b.biclique([c[j] for c in left], [c[j] for c in right])
    b.graph.remove_edge(u1, u2)
    b.graph.remove_edge(u1, u3)

    def flat(cliques: List[List[int]]) -> List[int]:
        return [v for c in cliques for v in c]

    witnesses = {
        (sigma(s - 1), sigma(s - 1), rho(r - 1)): flat(xs),
        (rho(r), rho(r), rho(r)): flat(ys),
        (rho(r - 1), rho(r), sigma(s)): flat(zs),
    }
    return b.build(witnesses.keys(), witnesses)


def delta_triple(
    pair: Pair,
    s: int,
    s_prime: int,
    r: int,
    k: int,
    s_min: Optional[int] = None,
) -> PortalGadget:
    """
    Provider of {(ρ_r)^δ, (ρ_{r-1})^δ, (σ_s)^δ} with δ = k(s' - s_min)
    portals, which all take the same state.
    """
    s_min = pair.s_min if s_min is None else s_min
    if s < 1 or r < 1 or s not in pair.sigma or r not in pair.rho:
        raise PreconditionError("DeltaTriple", f"need s={s} >= 1 in sigma and r={r} >= 1 in rho")
    if s_prime not in pair.sigma or s_min not in pair.sigma or s_prime <= s_min:
        raise PreconditionError("DeltaTriple", f"need s'={s_prime} > s_min={s_min}, both in sigma")
    if k < 1:
        raise PreconditionError("DeltaTriple", f"k={k} must be positive")
    step = s_prime - s_min
    delta = k * step

    b = GadgetBuilder(pair, f"delta_triple(s={s},s'={s_prime},r={r},k={k})")
    cs = b.portals_n(delta)
    a_side = b.vertices(delta)
    b_side = b.vertices(delta)
    triple = triple_lsr(pair, s, r)
    js = [b.attach(triple, [a_side[i], b_side[i], cs[i]]) for i in range(delta)]

    hub = sigma_rho_provider(pair, s_min, r)

    def hubs(side: List[int]) -> List[Attached]:
        ds = b.vertices(k)
        for i, v in enumerate(side):
            b.edge(v, ds[i // step])
        return [b.attach(hub, [d]) for d in ds]

    d_a = hubs(a_side)
    d_b = hubs(b_side)

    def collect(j_state: Sequence[State], a_state: State, b_state: State, extra: Sequence[int]) -> List[int]:
        chosen = list(extra)
        for j in js:
            chosen.extend(j.witness(j_state))
        for d in d_a:
            chosen.extend(d.witness((a_state,)))
        for d in d_b:
            chosen.extend(d.witness((b_state,)))
        return chosen

    lo, hi = sigma(s_min), rho(r)
    witnesses = {
        uniform(rho(r), delta): collect((rho(r), rho(r), rho(r)), hi, hi, []),
        uniform(rho(r - 1), delta): collect((sigma(s - 1), sigma(s - 1), rho(r - 1)), lo, lo, a_side + b_side),
        uniform(sigma(s), delta): collect((rho(r - 1), rho(r), sigma(s)), lo, hi, []),
    }
    return b.build(witnesses.keys(), witnesses)


def bezout(values: Sequence[int]) -> Tuple[List[int], int]:
    """Coefficients c with sum(c_i * v_i) = gcd(values)."""
    if not values:
        return [], 0
    coeffs = [1]
    g = values[0]
    for v in values[1:]:
        x, y, g = (int(t) for t in gcdex(g, v))
        coeffs = [c * x for c in coeffs] + [y]
    return coeffs, g


def _core_pair(pair: Pair) -> Tuple[List[int], List[int]]:
    return list(pair.sigma.finite_core().support), list(pair.rho.finite_core().support)


def core_structure(pair: Pair) -> int:
    """gcd of all differences inside the finite cores (0 when both are singletons)."""
    ss, rs = _core_pair(pair)
    g = 0
    for v in [x - rs[0] for x in rs[1:]] + [x - ss[0] for x in ss[1:]]:
        g = gcd(g, v)
    return g


def rho_m_sigma0(pair: Pair, m: Optional[int] = None, two_portal: bool = False) -> PortalGadget:
    """
    {ρ0, ρ_m, σ0}-provider, or with two_portal (m = 2) the
    {ρ0ρ0, ρ1ρ1, σ0σ0}-provider obtained by splitting the portal.

    Two sides L (with the portal) and R are joined by a bipartite graph with
    prescribed degrees. Fully selecting R puts the portal in ρ_m, fully
    selecting L puts it in σ0.
    """
    if pair.r_top < 1:
        raise PreconditionError("RhoMSigma0", "r_top must be at least 1")
    structure = core_structure(pair)
    if structure == 0:
        raise PreconditionError("RhoMSigma0", "the pair is m-structured for every m")
    if m is not None and m != structure:
        raise PreconditionError("RhoMSigma0", f"maximum structure is {structure}, not {m}")
    m = structure
    if two_portal and m != 2:
        raise PreconditionError("RhoMSigma0", "the two-portal variant needs m = 2")

    ss, rs = _core_pair(pair)
    s1, r1 = ss[0], rs[0]
    rho_gens = [x - r1 for x in rs[1:]]
    sigma_gens = [x - s1 for x in ss[1:]]
    coeffs, g = bezout(rho_gens)
    if g == m:
        coeffs = coeffs + [0] * len(sigma_gens)
    else:
        coeffs, g = bezout(rho_gens + sigma_gens)
    if g != m:
        raise ConstructionError(f"RhoMSigma0: Bezout combination reached {g}, expected {m}")
    # m + sum(gen * (x - x~)) = 0 with x - x~ = -coeff
    plus = [max(-c, 0) for c in coeffs]
    minus = [max(c, 0) for c in coeffs]
    nr = len(rho_gens)
    x, x_t = plus[:nr], minus[:nr]
    y, y_t = plus[nr:], minus[nr:]

    a_star = rs[-1] - r1
    left = ([1, 1] if two_portal else [m])
    left += [d for d, cnt in zip(rho_gens, x) for _ in range(cnt)]
    left += [1] * sum(e * cnt for e, cnt in zip(sigma_gens, y))
    right = [d for d, cnt in zip(rho_gens, x_t) for _ in range(cnt)]
    right += [1] * sum(e * cnt for e, cnt in zip(sigma_gens, y_t))
    a = max([a_star, *left, *right])
    core = _balance(left, right, a, a_star)
    logger.debug(f"rho_m_sigma0: m={m}, x={x}, x~={x_t}, y={y}, y~={y_t}, padding={core.padding}")

    name = f"rho_m_sigma0(m={m}{',two' if two_portal else ''})"
    b = GadgetBuilder(pair, name)
    ports = b.portals_n(2 if two_portal else 1)
    left_v = ports + b.vertices(len(left) - len(ports) + core.padding)
    right_v = b.vertices(len(right) + core.padding)
    for i, j in core.edges:
        b.edge(left_v[i], right_v[j])

    # positions of the A-type and B-type vertices on both sides
    n_ax = sum(x)
    n_ax_t = sum(x_t)
    l_a = left_v[len(ports):len(ports) + n_ax] + left_v[len(left):]
    r_a = right_v[:n_ax_t] + right_v[len(right):]
    hub = sigma_rho_provider(pair, s1, r1)
    a_hubs = [b.attach(hub, [v]) for v in l_a]
    a_hubs_t = [b.attach(hub, [v]) for v in r_a]

    j_s, j_r = (ss[-1], rs[-1])
    j_left: List[Attached] = []
    j_right: List[Attached] = []
    lb = len(ports) + n_ax
    rb = n_ax_t
    for e, sj, cnt, cnt_t in zip(sigma_gens, ss[1:], y, y_t):
        if cnt:
            gadget = delta_triple(pair, j_s, sj, j_r, cnt, s_min=s1)
            j_left.append(b.attach(gadget, left_v[lb:lb + e * cnt]))
            lb += e * cnt
        if cnt_t:
            gadget = delta_triple(pair, j_s, sj, j_r, cnt_t, s_min=s1)
            j_right.append(b.attach(gadget, right_v[rb:rb + e * cnt_t]))
            rb += e * cnt_t

    def collect(base: Sequence[int], a_state: State, a_state_t: State, j_state: State, j_state_t: State):
        chosen = list(base)
        for h in a_hubs:
            chosen.extend(h.witness((a_state,)))
        for h in a_hubs_t:
            chosen.extend(h.witness((a_state_t,)))
        for j in j_left:
            chosen.extend(j.witness(uniform(j_state, len(j.gadget.portals))))
        for j in j_right:
            chosen.extend(j.witness(uniform(j_state_t, len(j.gadget.portals))))
        return chosen

    lo, hi = sigma(s1), rho(r1)
    none = collect([], hi, hi, rho(j_r), rho(j_r))
    right_on = collect(right_v, hi, lo, rho(j_r - 1), sigma(j_s))
    left_on = collect(left_v, lo, hi, sigma(j_s), rho(j_r - 1))
    k = len(ports)
    top = rho(1) if two_portal else rho(m)
    witnesses: Dict[StateString, List[int]] = {
        uniform(rho(0), k): none,
        uniform(top, k): right_on,
        uniform(sigma(0), k): left_on,
    }
    return b.build(witnesses.keys(), witnesses)


def _balance(left: List[int], right: List[int], a: int, a_star: int) -> DegreeBipartite:
    """
    Bipartite core with the fewest padding vertices. Padding vertices have
    degree a and are only available when a equals the A* degree.
    """
    if a_star == a and a >= 1:
        return smallest_padding(left, right, a)
    return build_degree_bipartite(left, right, a, 0)
