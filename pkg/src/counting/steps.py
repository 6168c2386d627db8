"""
Counting reduction steps. Each step turns one instance into a ReductionPlan
whose queries no longer use the feature the step removes.

Every step grows the instance through _Growth, which inserts the bags of
each new gadget next to a bag covering its anchor. An inserted bag holds
the anchor, the gadget part and only the vertices passing between its two
neighbours, so query widths stay within the input width plus the size of
one gadget.
"""

from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from loguru import logger

from ..config import get_settings
from ..core.decomposition import PathDecomposition
from ..core.instance import Constraint, GraphRelInstance, InstanceBuilder
from ..core.intset import IntSet
from ..core.pair import Pair, PairFamily, is_trivial
from ..exceptions import DecompositionError, IsolationError, PreconditionError
from ..oracle.gadget import PortalGadget
from ..oracle.oracle import count_sets, ext_table
from ..providers import (
    GadgetBuilder,
    cofinite_rho_aux,
    cofinite_sigma_aux,
    first_member,
    parsimonious_sigma_rho,
    sigma_rho_provider,
)
from .interpolation import exp_poly_weights, merge_terms, unknown_count
from .kernels import SATURATED, certified_mirror_link, solve_downshift_weights
from .plan import Isolation, Op, OpCode, ReductionPlan, ReductionStep, StepKind, step
from .profile import GadgetClass, build_winner_or_strong_candidate


FORCED = Pair.of(IntSet.everything(), IntSet.empty())
ZERO_PAIR = Pair.of(IntSet.finite(0), IntSet.everything())


def unselected(rho_set: IntSet) -> Pair:
    """(∅, rho_set): never selected"""
    return Pair.of(IntSet.empty(), rho_set)


def selected(sigma_set: IntSet) -> Pair:
    """(sigma_set, ∅): always selected"""
    return Pair.of(sigma_set, IntSet.empty())


Built = Tuple[GraphRelInstance, PathDecomposition]


class _Growth:
    """An instance under construction together with its bag list."""

    def __init__(self, inst: GraphRelInstance, pd: PathDecomposition):
        self.graph = InstanceBuilder.from_instance(inst)
        self.bags: List[Set[int]] = [set(b) for b in pd.bags] or [set()]
        self.shared: Set[int] = set()

    def label(self, pair: Pair, bound: Optional[int] = None) -> int:
        return self.graph.use_pair(pair, bound)

    def _slot(self, anchor: Iterable[int]) -> Tuple[int, Set[int]]:
        """
        Where to insert bags for a gadget on anchor, and what they must carry:
        the anchor plus whatever passes between the two bags they split.
        """
        wanted = set(anchor) - self.shared
        best: Optional[Tuple[int, int, Set[int]]] = None
        last = len(self.bags) - 1
        for index, bag in enumerate(self.bags):
            if not wanted <= bag:
                continue
            for at in (index + 1, index):
                left = self.bags[at - 1] if at > 0 else set()
                right = self.bags[at] if at <= last else set()
                carry = (left & right) | wanted
                if len(carry) == len(wanted):
                    return at, carry
                if best is None or len(carry) < best[0]:
                    best = (len(carry), at, carry)
        if best is None:
            raise DecompositionError(f"no bag covers {sorted(wanted)}")
        return best[1], best[2]

    def beside(self, anchor: Iterable[int], *groups: Iterable[int]) -> None:
        """Insert one bag per group next to a bag holding anchor; each keeps the anchor and what passes through."""
        at, carry = self._slot(anchor)
        self.bags[at:at] = [carry | set(g) for g in groups]

    def everywhere(self, vertices: Iterable[int]) -> None:
        self.shared.update(vertices)

    def attach(self, gadget: PortalGadget, hosts: Sequence[int]) -> Dict[int, int]:
        """Paste gadget with its portals on hosts; its own bags go beside the hosts."""
        mapping = self.graph.paste(gadget.instance, dict(zip(gadget.portals, hosts)))
        if gadget.decomposition is not None and gadget.decomposition.bags:
            groups = [[mapping[v] for v in bag] for bag in gadget.decomposition.bags]
        else:
            groups = [list(mapping.values())]
        self.beside(hosts, *groups)
        return mapping

    def finish(self) -> Built:
        bags = [bag | self.shared for bag in self.bags]
        return self.graph.freeze(), PathDecomposition.of(bags)


def _require(ok: bool, construction: str, condition: str) -> None:
    if not ok:
        raise PreconditionError(construction, condition)


def _carrying(inst: GraphRelInstance, pair: Pair) -> List[int]:
    """Vertices labelled with pair; empty when pair is the base pair or absent."""
    index = inst.family.index_of(pair)
    if not index:
        return []
    return [v for v in range(inst.n) if inst.label(v) == index]


def _relation_free(inst: GraphRelInstance, construction: str) -> None:
    _require(not inst.constraints, construction, "instance must be relation-free")
    _require(not inst.dagger_mode, construction, "dagger instances are not supported")


def _coefficient_plan(builds: Sequence[Built], factors: Sequence[Fraction], nodes: Sequence[Fraction],
                      index: int, note: str) -> ReductionPlan:
    """count_k / factors[k] = P(nodes[k]); the plan returns coefficient ``index`` of P."""
    program: List[Op] = []
    for k, factor in enumerate(factors):
        program.append(Op.query(k))
        if factor != 1:
            program += [Op.push(factor), Op.binary(OpCode.DIV)]
    program.append(Op.coeff(nodes, index))
    return ReductionPlan.of(builds, program, [note])


def _solve_plan(builds: Sequence[Built], weights: Sequence[Fraction], note: str) -> ReductionPlan:
    program = [Op.query(k) for k in range(len(builds))] + [Op.dot(weights)]
    return ReductionPlan.of(builds, program, [note])


# cofinite shifts

def _cofinite_shift(inst: GraphRelInstance, pd: PathDecomposition, target: Pair, flavour: str) -> ReductionPlan:
    name = "CofShiftSigma" if flavour == "sigma" else "CofShiftRho"
    _require(not inst.dagger_mode, name, "dagger instances are not supported")
    if flavour == "sigma":
        _require(target.sigma.is_cofinite and target.s_top >= 1, name, "target sigma must be cofinite with s_top >= 1")
        top = target.s_top
        source = Pair.of(IntSet.at_least(top), target.rho)
        aux = cofinite_sigma_aux(target)
        weights = solve_downshift_weights(target.sigma)
    else:
        _require(target.rho.is_cofinite and target.r_top >= 1, name, "target rho must be cofinite with r_top >= 1")
        top = target.r_top
        source = Pair.of(target.sigma, IntSet.at_least(top))
        aux = cofinite_rho_aux(target)
        weights = solve_downshift_weights(target.rho)
    _require(inst.pair == source, name, f"base pair must be {source}, got {inst.pair}")

    g = _Growth(inst, pd)
    g.graph.family = PairFamily(pairs=(target,) + inst.family.pairs[1:], bounds=inst.family.bounds)
    portal = aux.portals[0]
    inner = aux.instance.adjacency()[portal][0]
    for v in range(inst.n):
        if inst.label(v) != 0:
            continue
        ws: List[int] = []
        groups = []
        for _ in range(top):
            mapping = g.graph.paste(aux.instance, {portal: v})
            copy = [mapping[x] for x in range(aux.n) if x != portal]
            groups.append(set(copy) | set(ws))
            ws.append(mapping[inner])
        groups.append(set(ws))
        g.beside([v], *groups)
        if flavour == "sigma":
            table = {frozenset(): Fraction(1)}
            table.update({frozenset([v, *ws[:gamma]]): weights[gamma] for gamma in range(top + 1)})
        else:
            table = {frozenset([v]): Fraction(1)}
            table.update({frozenset(ws[:gamma]): weights[gamma] for gamma in range(top + 1)})
        table = {sel: w for sel, w in table.items() if w != 0}
        g.graph.add_constraint(Constraint.from_sets([v, *ws], list(table), table))
    return ReductionPlan.identity(*g.finish(), note=f"{name}: {source} -> {target}")


# weights

def _product_form(c: Constraint) -> Optional[Tuple[Fraction, Dict[int, Fraction]]]:
    """(kappa, omega) with weight(S) = kappa * prod of omega over S for every accepted S of nonzero weight."""
    table = {sel: c.weights[mask] for mask, sel in zip(c.accepted, c.selections()) if c.weights[mask] != 0}
    if not table:
        return None
    kappa = table.get(frozenset(), Fraction(1))
    omega: Dict[int, Fraction] = {}
    progress = True
    while progress:
        progress = False
        for sel, w in table.items():
            unknown = [v for v in sel if v not in omega]
            if len(unknown) != 1:
                continue
            known = kappa
            for v in sel:
                if v in omega:
                    known *= omega[v]
            omega[unknown[0]] = w / known
            progress = True
    if any(v not in omega for sel in table for v in sel):
        return None
    for sel, w in table.items():
        value = kappa
        for v in sel:
            value *= omega[v]
        if value != w:
            return None
    return kappa, omega


def _rel_weights(inst: GraphRelInstance, pd: PathDecomposition, dagger: bool) -> ReductionPlan:
    """
    Weighted relations become unweighted ones over weighted vertices. In
    dagger mode a relation whose weights factor over its scope keeps its
    scope, with the factors on the scope vertices and the constant in the
    plan; any other relation gets one weighted hub per distinct weight.
    """
    name = "DaggerRelWeights" if dagger else "RelWeightsToVertexWeights"
    _require(inst.dagger_mode == dagger, name, f"expects dagger_mode={dagger}")
    pair = inst.pair
    provider = None if dagger else parsimonious_sigma_rho(pair, pair.s_min, pair.r_min)
    g = _Growth(inst, pd)
    g.graph.constraints = [c for c in inst.constraints if c.weights is None]
    scale = Fraction(1)
    factored = 0
    for c in inst.constraints:
        if c.weights is None:
            continue
        factors = _product_form(c) if dagger else None
        if factors is not None:
            kappa, omega = factors
            scale *= kappa
            factored += 1
            for v, w in omega.items():
                if w != 1:
                    g.graph.set_weight(v, g.graph.vertex_weights.get(v, Fraction(1)) * w)
            selections = [sel for mask, sel in zip(c.accepted, c.selections()) if c.weights[mask] != 0]
            g.graph.add_constraint(Constraint.from_sets(c.scope, selections))
            continue
        distinct = sorted({w for w in c.weights.values() if w != 0})
        hubs = {w: g.graph.add_vertex() for w in distinct}
        group: Set[int] = set(hubs.values())
        for w, h in hubs.items():
            g.graph.set_weight(h, w)
            if provider is not None:
                mapping = g.graph.paste(provider.instance, {provider.portals[0]: h})
                group.update(mapping.values())
        selections = [sel | {hubs[c.weights[mask]]}
                      for mask, sel in zip(c.accepted, c.selections()) if c.weights[mask] != 0]
        g.graph.add_constraint(Constraint.from_sets([*c.scope, *hubs.values()], selections))
        g.beside(c.scope, group)
    note = f"{name}: relation weights moved to vertices"
    if factored:
        note += f", {factored} factored with constant {scale}"
    if scale == 1:
        return ReductionPlan.identity(*g.finish(), note=note)
    return ReductionPlan.of([g.finish()], [Op.query(0), Op.push(scale), Op.binary(OpCode.MUL)], [note])


def _power_of_two(w: Fraction) -> Optional[int]:
    if w.denominator != 1 or w.numerator < 2:
        return None
    n = w.numerator
    return n.bit_length() - 1 if n & (n - 1) == 0 else None


def _signed_power(w: Fraction) -> Optional[Tuple[bool, int]]:
    """(negative, e) with w = -+2^e, e of either sign."""
    num, den = abs(w.numerator), w.denominator
    if not num or num & (num - 1) or den & (den - 1):
        return None
    return w < 0, num.bit_length() - den.bit_length()


def _vertex_weights(inst: GraphRelInstance, pd: PathDecomposition, dagger: bool,
                    isolation: Optional[Isolation] = None, bits: int = 0) -> ReductionPlan:
    """
    Vertex weights become pendants. A pendant doubles the weight of its
    vertex: a provider copy in plain mode, a (Z>=1, Z>=0) vertex in dagger
    mode. Powers of two are realised directly and the other weights through
    a grid of pendant counts. In dagger mode with THRESHOLD isolation and
    the count known to lie within +-2^bits, weights -+2^e are instead read
    modulo L = 2^l + 1, l = bits + 1, where -1 = 2^l: a single query.
    """
    name = "DaggerVertexWeights" if dagger else "RemoveVertexWeights"
    _require(inst.dagger_mode == dagger, name, f"expects dagger_mode={dagger}")
    _require(all(c.weights is None for c in inst.constraints), name, "relation weights must be removed first")
    weights = {v: w for v, w in (inst.vertex_weights or {}).items() if w != 1}
    if not weights:
        return ReductionPlan.identity(inst.model_copy(update={"vertex_weights": None}), pd)
    if dagger:
        scoped = inst.scoped_vertices()
        _require(all(v in scoped for v in weights), name, "weighted vertices must lie in some scope")

    pair = inst.pair
    provider = None if dagger else parsimonious_sigma_rho(pair, pair.s_min, pair.r_min)

    def build(pendants: Dict[int, int]) -> Built:
        g = _Growth(inst, pd)
        g.graph.vertex_weights = {}
        saturated = g.label(SATURATED) if dagger else 0
        for v, k in pendants.items():
            if not k:
                continue
            groups = []
            for _ in range(k):
                pendant = g.graph.add_vertex(saturated)
                group = {pendant}
                if dagger:
                    g.graph.add_edge(v, pendant)
                else:
                    mapping = g.graph.paste(provider.instance, {provider.portals[0]: pendant})
                    group.update(mapping.values())
                    g.graph.add_constraint(Constraint.from_sets([v, pendant], [[], [v], [v, pendant]]))
                groups.append(group)
            g.beside([v], *groups)
        return g.finish()

    signed = {v: _signed_power(w) for v, w in weights.items()}
    if dagger and isolation == Isolation.THRESHOLD and bits > 0 and all(signed.values()):
        ell = bits + 1
        modulus = 2 ** ell + 1
        pendants = {v: (e + (ell if negative else 0)) % (2 * ell) for v, (negative, e) in sorted(signed.items())}
        bound = 2 ** bits
        program = [Op.query(0), Op.push(bound), Op.binary(OpCode.ADD), Op.push(modulus), Op.binary(OpCode.MOD),
                   Op.push(bound), Op.binary(OpCode.SUB)]
        note = f"{name}: {len(weights)} weight(s) modulo 2^{ell}+1, |count| <= 2^{bits}"
        return ReductionPlan.of([build(pendants)], program, [note])

    classes: Dict[Fraction, List[int]] = {}
    for v, w in sorted(weights.items()):
        classes.setdefault(w, []).append(v)
    direct = {w: _power_of_two(w) for w in classes if _power_of_two(w) is not None}
    interpolated = [w for w in classes if w not in direct]

    def on_grid(exponents: Dict[Fraction, int]) -> Built:
        return build({v: exponents[w] for w, vs in classes.items() for v in vs})

    axes = [list(range(len(classes[w]) + 1)) for w in interpolated]
    builds = [on_grid({**direct, **dict(zip(interpolated, ells))}) for ells in product(*axes)]
    note = f"{name}: {len(direct)} weight(s) realised directly, grid over {[str(w) for w in interpolated]}"
    if not interpolated:
        return ReductionPlan.of(builds, [Op.query(0)], [note])
    program = [Op.query(k) for k in range(len(builds))]
    program.append(Op.evalgrid([[2 ** e for e in axis] for axis in axes], interpolated))
    return ReductionPlan.of(builds, program, [note])


# exactly-one relations, plain mode

def _hw1_scopes(inst: GraphRelInstance, name: str, test: Callable[[Constraint], bool] = Constraint.is_hw1,
                what: str = "exactly-one") -> List[Tuple[int, ...]]:
    _require(all(test(c) for c in inst.constraints), name, f"every relation must be {what}")
    return [c.scope for c in inst.constraints]


def _relation_to_vertex(inst: GraphRelInstance, pd: PathDecomposition, name: str, label_pair: Pair,
                        test: Callable[[Constraint], bool], what: str) -> ReductionPlan:
    _require(not inst.dagger_mode, name, "dagger instances are not supported")
    scopes = _hw1_scopes(inst, name, test, what)
    g = _Growth(inst, pd)
    g.graph.constraints = []
    index = g.label(label_pair)
    for scope in scopes:
        v = g.graph.add_vertex(index)
        for z in scope:
            g.graph.add_edge(v, z)
        g.beside(scope, [v])
    return ReductionPlan.identity(*g.finish(), note=f"{name}: {len(scopes)} relation(s) -> {label_pair} vertices")


@lru_cache(maxsize=None)
def _split_gadget(pair: Pair) -> Tuple[PortalGadget, int, int]:
    """A gadget whose portal p is satisfied internally, with the extension counts for p selected / unselected."""
    if 0 in pair.sigma and 0 in pair.rho:
        b = GadgetBuilder(pair, "single")
        b.portal()
        return b.build([], {}), 1, 1
    gadget = sigma_rho_provider(pair, pair.s_min, pair.r_min)
    p = gadget.portals[0]
    alpha = int(count_sets(gadget.instance, fixed={p: True}))
    beta = int(count_sets(gadget.instance, fixed={p: False}))
    return gadget, alpha, beta


def _hw1_to_hw_le1(inst: GraphRelInstance, pd: PathDecomposition) -> ReductionPlan:
    name = "Hw1ToHwLe1"
    _require(not inst.dagger_mode, name, "dagger instances are not supported")
    scopes = _hw1_scopes(inst, name)
    gadget, alpha, beta = _split_gadget(inst.pair)
    _require(alpha >= 1 and beta >= 1, name, f"split gadget has alpha={alpha}, beta={beta}")
    m = len(scopes)
    p = gadget.portals[0]

    def build(x: int) -> Built:
        g = _Growth(inst, pd)
        g.graph.constraints = []
        for scope in scopes:
            for _ in range(x):
                mapping = g.graph.paste(gadget.instance)
                g.graph.add_constraint(Constraint.hw_at_most([*scope, mapping[p]], 1))
                g.beside(scope, mapping.values())
        return g.finish()

    xs = range(1, m + 2)
    return _coefficient_plan(
        [build(x) for x in xs],
        [Fraction(beta) ** (x * m) for x in xs],
        [Fraction(alpha + beta, beta) ** x for x in xs],
        0,
        f"{name}: alpha={alpha} beta={beta}, {m} scope(s)",
    )


def _hw1_to_hw_ge1(inst: GraphRelInstance, pd: PathDecomposition) -> ReductionPlan:
    name = "Hw1ToHwGe1"
    _require(not inst.dagger_mode, name, "dagger instances are not supported")
    scopes = _hw1_scopes(inst, name)
    gadget, alpha, beta = _split_gadget(inst.pair)
    _require(alpha >= 1 and beta >= 1, name, f"split gadget has alpha={alpha}, beta={beta}")
    m = len(scopes)
    spare = sum(max(len(scope) - 1, 0) for scope in scopes)
    p = gadget.portals[0]

    def build(x: int) -> Built:
        g = _Growth(inst, pd)
        g.graph.constraints = [Constraint.hw_at_least(scope, 1) for scope in scopes]
        for scope in scopes:
            for v in scope:
                rest = [z for z in scope if z != v]
                for _ in range(x):
                    mapping = g.graph.paste(gadget.instance)
                    g.graph.add_constraint(Constraint.hw_at_least([*rest, mapping[p]], 1))
                    g.beside(scope, mapping.values())
        return g.finish()

    xs = range(1, m + 2)
    return _coefficient_plan(
        [build(x) for x in xs],
        [Fraction(alpha) ** (x * m) * Fraction(alpha + beta) ** (x * spare) for x in xs],
        [Fraction(alpha + beta, alpha) ** x for x in xs],
        0,
        f"{name}: alpha={alpha} beta={beta}, {m} scope(s)",
    )


# forcing

def _selected_clique(g: _Growth, label: int, size: int) -> List[int]:
    clique = g.graph.add_vertices(size, label)
    for i, a in enumerate(clique):
        for b in clique[i + 1:]:
            g.graph.add_edge(a, b)
    return clique


def _shift_rho_by(inst: GraphRelInstance, pd: PathDecomposition, i: int) -> ReductionPlan:
    name = "ShiftRhoByI"
    pair = inst.pair
    _require(not pair.rho.is_empty and i <= pair.r_top, name, f"need 0 <= i={i} <= r_top")
    if i == 0:
        return ReductionPlan.identity(inst, pd, note=f"{name}(0): identity")
    source = unselected(pair.rho.shifted_down(i))
    vs = _carrying(inst, source)
    g = _Growth(inst, pd)
    target = g.label(unselected(pair.rho))
    forced = g.label(selected(pair.sigma))
    for v in vs:
        g.graph.set_label(v, target)
        for _ in range(i):
            clique = _selected_clique(g, forced, pair.s_min + 1)
            g.graph.add_edge(v, clique[0])
            g.beside([v], clique)
    return ReductionPlan.identity(*g.finish(), note=f"{name}({i}): {len(vs)} vertex(es) {source} -> {unselected(pair.rho)}")


def _with_unselected_neighbour(gadget: PortalGadget, pair: Pair) -> PortalGadget:
    """The gadget with the portal's neighbours relabelled (∅, rho)."""
    builder = InstanceBuilder.from_instance(gadget.instance)
    index = builder.use_pair(unselected(pair.rho))
    for v in gadget.instance.adjacency()[gadget.portals[0]]:
        builder.set_label(v, index)
    return gadget.model_copy(update={"instance": builder.freeze(), "name": gadget.name + "'"})


def _fan_out(inst: GraphRelInstance, pd: PathDecomposition, hosts: Sequence[int], gadget: PortalGadget,
             counts: Tuple[int, int], target_all: bool, note: str) -> ReductionPlan:
    """
    Relabel hosts to the base pair and hang x copies of a gadget with
    rho1 = sigma1 = 0 off each; counts = (rho0, sigma0). Reads off the
    term with every host selected (target_all) or none.
    """
    rho0, sigma0 = counts
    m = len(hosts)

    def build(x: int) -> Built:
        g = _Growth(inst, pd)
        for v in hosts:
            g.graph.set_label(v, 0)
            for _ in range(x):
                g.attach(gadget, [v])
        return g.finish()

    xs = range(1, m + 2)
    return _coefficient_plan(
        [build(x) for x in xs],
        [Fraction(rho0) ** (x * m) for x in xs],
        [Fraction(sigma0, rho0) ** x for x in xs],
        m if target_all else 0,
        note,
    )


def _strong_terms(pair: Pair, rho0: int, rho1: int, sigma0: int, sigma1: int):
    """Exponential-polynomial model of the count with x strong-candidate copies at one vertex."""
    r_star = pair.r_top if pair.rho.is_finite else pair.r_top - 1
    terms = [(Fraction(rho0), r_star)]
    if pair.rho.is_cofinite:
        terms.append((Fraction(rho0 + rho1), 0))
    if pair.sigma.is_everything:
        terms.append((Fraction(sigma0 + sigma1), 0))
    else:
        s_star = pair.s_top if pair.sigma.is_finite else pair.s_top - 1
        terms.append((Fraction(sigma0), s_star))
        if pair.sigma.is_cofinite:
            terms.append((Fraction(sigma0 + sigma1), 0))
    merged = merge_terms(terms)
    scale = Fraction(factorial(r_star)) * Fraction(rho0, rho1) ** r_star
    if pair.rho.is_cofinite:
        scale = -scale
    return merged, {(Fraction(rho0), r_star): scale}


def _force_unselected(inst: GraphRelInstance, pd: PathDecomposition) -> ReductionPlan:
    name = "ForceUnselected"
    _relation_free(inst, name)
    pair = inst.pair
    _require(not pair.rho.is_everything, name, "rho must differ from Z>=0")
    forced_sel = _carrying(inst, selected(pair.sigma))
    forced_unsel = _carrying(inst, unselected(pair.rho))
    if not forced_sel and not forced_unsel:
        return ReductionPlan.identity(inst, pd, note=f"{name}: nothing to force")

    gadget, profile = build_winner_or_strong_candidate(pair)
    counts = (profile.rho0, profile.sigma0)
    winner = profile.classification == GadgetClass.WINNER
    sel_gadget = gadget if winner else _with_unselected_neighbour(gadget, pair)

    if forced_sel:
        plan = _fan_out(inst, pd, forced_sel, sel_gadget, counts, True,
                        f"{name}: {len(forced_sel)} selected vertex(es) via {sel_gadget.name}")
    else:
        plan = ReductionPlan.identity(inst, pd)

    def second(query) -> ReductionPlan:
        q_inst, q_pd = query.instance, query.decomposition
        hosts = _carrying(q_inst, unselected(pair.rho))
        if not hosts:
            return ReductionPlan.identity(q_inst, q_pd)
        if winner:
            return _fan_out(q_inst, q_pd, hosts, gadget, counts, False,
                            f"{name}: {len(hosts)} unselected vertex(es) via {gadget.name}")
        return _isolate_through_strong(q_inst, q_pd, hosts, gadget, profile)

    return plan.compose([second(q) for q in plan.queries])


def _isolate_through_strong(inst: GraphRelInstance, pd: PathDecomposition, hosts: Sequence[int],
                            gadget: PortalGadget, profile) -> ReductionPlan:
    """
    One new vertex p joined to every host; the wanted count is the term with
    p unselected and no selected neighbour, read off x copies of the strong
    candidate at p.
    """
    pair = inst.pair
    terms, target = _strong_terms(pair, profile.rho0, profile.rho1, profile.sigma0, profile.sigma1)
    xs = list(range(1, unknown_count(terms) + 1))
    weights = exp_poly_weights(terms, xs, target)

    def build(x: int) -> Built:
        g = _Growth(inst, pd)
        p = g.graph.add_vertex(0)
        g.everywhere([p])
        for v in hosts:
            g.graph.set_label(v, 0)
            g.graph.add_edge(p, v)
        for _ in range(x):
            g.attach(gadget, [p])
        return g.finish()

    return _solve_plan([build(x) for x in xs], weights,
                       f"ForceUnselected: {len(hosts)} unselected vertex(es) through {gadget.name}, "
                       f"model {[(str(b), d) for b, d in terms]}")


# rho = Z>=0, finite sigma

def _hw_ge1_to_zero_pair(inst: GraphRelInstance, pd: PathDecomposition, isolation: Isolation) -> ReductionPlan:
    name = "HwGe1ToZeroPair"
    _require(not inst.dagger_mode, name, "dagger instances are not supported")
    _require(inst.pair.rho.is_everything, name, "rho must be Z>=0")
    scopes = _hw1_scopes(inst, name, Constraint.is_hw_ge1, "at-least-one")
    m, n = len(scopes), inst.n

    def build(x: int) -> Built:
        g = _Growth(inst, pd)
        g.graph.constraints = []
        label = g.label(ZERO_PAIR)
        for scope in scopes:
            for _ in range(x):
                v = g.graph.add_vertex(label)
                for z in scope:
                    g.graph.add_edge(v, z)
                g.beside(scope, [v])
        return g.finish()

    if isolation == Isolation.SOLVE:
        xs = range(1, m + 2)
        return _coefficient_plan([build(x) for x in xs], [Fraction(1)] * len(xs),
                                 [Fraction(2) ** x for x in xs], 0, f"{name}: interpolation in 2^x")
    x = n + 1
    program = [Op.query(0), Op.push(2 ** x), Op.binary(OpCode.MOD), Op.check(0, 2 ** n + 1, "a_0 <= 2^n")]
    return ReductionPlan.of([build(x)], program, [f"{name}: x={x}, a_0 <= 2^{n} < 2^{x}"])


def _zero_pair_to_forced_sel(inst: GraphRelInstance, pd: PathDecomposition) -> ReductionPlan:
    name = "ZeroPairToForcedSel"
    _relation_free(inst, name)
    pair = inst.pair
    _require(pair.rho.is_everything and pair.sigma.is_finite, name, "needs rho = Z>=0 and finite sigma")
    hosts = _carrying(inst, ZERO_PAIR)
    s_top = pair.s_top
    g = _Growth(inst, pd)
    forced = g.label(selected(pair.sigma)) if hosts and s_top > 0 else 0
    for u in hosts:
        g.graph.set_label(u, 0)
        if s_top == 0:
            continue
        if s_top - 1 not in pair.sigma:
            clique = _selected_clique(g, forced, s_top)
            v = g.graph.add_vertex(0)
            for c in clique:
                g.graph.add_edge(u, c)
                g.graph.add_edge(v, c)
            g.beside([u], clique + [v])
        else:
            for _ in range(s_top):
                clique = _selected_clique(g, forced, s_top)
                g.graph.add_edge(u, clique[0])
                g.beside([u], clique)
    return ReductionPlan.identity(*g.finish(), note=f"{name}: {len(hosts)} vertex(es)")


def _remove_forced_sel_finite(inst: GraphRelInstance, pd: PathDecomposition) -> ReductionPlan:
    name = "RemoveForcedSelFinite"
    _relation_free(inst, name)
    pair = inst.pair
    _require(pair.rho.is_everything and pair.sigma.is_finite, name, "needs rho = Z>=0 and finite sigma")
    hosts = _carrying(inst, selected(pair.sigma))
    if not hosts:
        return ReductionPlan.identity(inst, pd, note=f"{name}: nothing to remove")
    m, s_top, size = len(hosts), pair.s_top, pair.s_min + 1
    terms = [(Fraction(2) ** k, s_top * (m - k)) for k in range(m + 1)]
    xs = list(range(1, unknown_count(terms) + 1))
    weights = exp_poly_weights(terms, xs, {(Fraction(1), 0): 1})

    def build(x: int) -> Built:
        g = _Growth(inst, pd)
        for u in hosts:
            g.graph.set_label(u, 0)
            for _ in range(x):
                clique = _selected_clique(g, 0, size)
                g.graph.add_edge(u, clique[0])
                g.beside([u], clique)
        return g.finish()

    return _solve_plan([build(x) for x in xs], weights, f"{name}: {m} vertex(es), {len(xs)} queries")


# rho = Z>=0, cofinite sigma

def _dagger_link(inst: GraphRelInstance, pd: PathDecomposition) -> ReductionPlan:
    name = "DaggerLink"
    pair = inst.pair
    _require(pair.rho.is_everything and pair.sigma.is_cofinite, name, "needs rho = Z>=0 and cofinite sigma")
    _require(pair.s_top >= 1, name, "sigma = Z>=0 makes the pair trivial")
    _require(not inst.dagger_mode and not inst.is_weighted, name, "needs an unweighted plain-mode instance")
    scoped = inst.scoped_vertices()
    _require(all(inst.label(z) == 0 for z in scoped), name, "scoped vertices must carry the base pair")
    gadget = certified_mirror_link(pair)
    g = _Growth(inst, pd)
    g.graph.dagger_mode = True
    g.graph.constraints = []
    for c in inst.constraints:
        mirrors = {z: g.graph.add_vertex(0) for z in c.scope}
        g.beside(c.scope, mirrors.values())
        g.graph.add_constraint(c.relabeled(mirrors))
        for z, mirror in mirrors.items():
            g.attach(gadget, [z, mirror])
    return ReductionPlan.identity(*g.finish(), note=f"{name}: {len(inst.constraints)} relation(s) mirrored, "
                                                    f"{gadget.n}-vertex link")


def _dagger_to_hw1(inst: GraphRelInstance, pd: PathDecomposition) -> ReductionPlan:
    """
    Every relation becomes exactly-one relations over hub vertices: per
    accepted selection q a hub t_q, one exactly-one over all t_q, and per
    scope position j one exactly-one over u_j and the t_q with j outside q.
    An equality needs a single hub kept opposite to every scope vertex.
    """
    name = "DaggerToHw1"
    _require(inst.dagger_mode, name, "expects a dagger instance")
    _require(all(c.weights is None for c in inst.constraints), name, "relation weights must be removed first")
    g = _Growth(inst, pd)
    g.graph.constraints = []
    rewritten = 0
    for c in inst.constraints:
        if c.is_hw1():
            g.graph.add_constraint(c)
            continue
        rewritten += 1
        if c.is_equality() and c.arity >= 2:
            h = g.graph.add_vertex(0)
            for z in c.scope:
                g.graph.add_constraint(Constraint.hw_eq([h, z], 1))
            g.beside(c.scope, [h])
            continue
        hubs = g.graph.add_vertices(len(c.accepted), 0)
        g.graph.add_constraint(Constraint.hw_eq(hubs, 1))
        for j, z in enumerate(c.scope):
            outside = [t for t, mask in zip(hubs, c.accepted) if not mask >> j & 1]
            g.graph.add_constraint(Constraint.hw_eq([z, *outside], 1))
        g.beside(c.scope, hubs)
    return ReductionPlan.identity(*g.finish(), note=f"{name}: {rewritten} relation(s) rewritten")


def _dagger_hw1_to_ge1(inst: GraphRelInstance, pd: PathDecomposition, isolation: Isolation) -> ReductionPlan:
    """
    Exactly-one scopes become at-least-one scopes. For every scope Z and v in
    Z, x (Z>=1, Z>=0) checkers see Z - v; a selection with j scopes holding
    two or more selected vertices gains 2^(x (spare + j)) extensions, so the
    wanted term is the coefficient at j = 0.
    """
    name = "DaggerHw1ToGe1"
    _require(inst.dagger_mode, name, "expects a dagger instance")
    scopes = _hw1_scopes(inst, name)
    m, n = len(scopes), inst.n
    spare = sum(max(len(scope) - 1, 0) for scope in scopes)

    def build(x: int) -> Built:
        g = _Growth(inst, pd)
        g.graph.constraints = [Constraint.hw_at_least(scope, 1) for scope in scopes]
        saturated = g.label(SATURATED)
        for scope in scopes:
            if len(scope) < 2:
                continue
            added: List[int] = []
            for v in scope:
                for _ in range(x):
                    p = g.graph.add_vertex(saturated)
                    added.append(p)
                    for z in scope:
                        if z != v:
                            g.graph.add_edge(p, z)
            g.beside(scope, *[[p] for p in added])
        return g.finish()

    if isolation == Isolation.SOLVE:
        xs = range(1, m + 2)
        return _coefficient_plan(
            [build(x) for x in xs],
            [Fraction(2) ** (x * spare) for x in xs],
            [Fraction(2) ** x for x in xs],
            0,
            f"{name}: {m} scope(s)",
        )
    _require(not inst.is_weighted, name, "weights must be removed first")
    x = n + 1
    program = [Op.query(0), Op.push(2 ** (x * spare)), Op.binary(OpCode.DIV), Op.push(2 ** x),
               Op.binary(OpCode.MOD), Op.check(0, 2 ** n + 1, "a_0 <= 2^n")]
    return ReductionPlan.of([build(x)], program, [f"{name}: {m} scope(s), x={x}, a_0 <= 2^{n} < 2^{x}"])


def _dagger_ge1_to_vertices(inst: GraphRelInstance, pd: PathDecomposition, isolation: Isolation) -> ReductionPlan:
    """
    Scoped vertices become (Z>=1, Z>=0) vertices held free by one forced
    vertex w, and every at-least-one scope gets x (Z>=1, Z>=0) checkers. A
    selection meeting k scopes gains 2^(x k) extensions; the wanted term is
    the one with k = m.
    """
    name = "DaggerGe1ToVertices"
    _require(inst.dagger_mode, name, "expects a dagger instance")
    _require(not inst.is_weighted, name, "weights must be removed first")
    scopes = _hw1_scopes(inst, name, Constraint.is_hw_ge1, "at-least-one")
    scoped = sorted(inst.scoped_vertices())
    m, n = len(scopes), inst.n

    def build(x: int) -> Built:
        g = _Growth(inst, pd)
        g.graph.constraints = []
        g.graph.dagger_mode = False
        saturated = g.label(SATURATED)
        w = g.graph.add_vertex(g.label(FORCED, 1))
        g.everywhere([w])
        for v in scoped:
            g.graph.set_label(v, saturated)
            g.graph.add_edge(v, w)
        for scope in scopes:
            added = g.graph.add_vertices(x, saturated)
            for a in added:
                for z in scope:
                    g.graph.add_edge(a, z)
            g.beside(scope, *[[a] for a in added])
        return g.finish()

    if isolation == Isolation.SOLVE:
        xs = range(1, m + 2)
        return _coefficient_plan([build(x) for x in xs], [Fraction(1)] * len(xs),
                                 [Fraction(2) ** x for x in xs], m,
                                 f"{name}: {m} scope(s), {len(scoped)} free vertices")
    x = n + 1
    program = [Op.query(0), Op.push(2 ** (x * m)), Op.binary(OpCode.FLOORDIV),
               Op.check(0, 2 ** n + 1, "a_m <= 2^n")]
    return ReductionPlan.of([build(x)], program,
                            [f"{name}: {m} scope(s), x={x}, lower terms sum below 2^(x m) as 2^{n} < 2^{x}"])


def _shift_pair(inst: GraphRelInstance, pd: PathDecomposition, s: int) -> ReductionPlan:
    name = "ShiftPair"
    _require(not inst.constraints, name, "instance must be relation-free")
    pair = inst.pair
    source = Pair.of(pair.sigma.shifted_down(s), pair.rho.shifted_down(s))
    hosts = _carrying(inst, source)
    if s == 0 or not hosts:
        return ReductionPlan.identity(inst, pd, note=f"{name}({s}): identity")
    g = _Growth(inst, pd)
    forced = g.label(FORCED, s)
    helpers = g.graph.add_vertices(s, forced)
    g.everywhere(helpers)
    for v in hosts:
        g.graph.set_label(v, 0)
        for h in helpers:
            g.graph.add_edge(v, h)
    return ReductionPlan.identity(*g.finish(), note=f"{name}({s}): {len(hosts)} vertex(es) {source} -> {pair}")


def _cofinite_gadget(pair: Pair) -> PortalGadget:
    """
    Gadget hung x times off a forced-selected vertex u made plain. s_min > 0:
    u sees v_1, v_2 of an (s_min+1)-clique without the edge v_1 v_2. Else,
    with t the least value missing from sigma: u is joined to a t-clique,
    or, when t = 1, to a clique on the least positive member of sigma.
    """
    b = GadgetBuilder(pair, "forced_remover")
    u = b.portal()
    if pair.s_min > 0:
        clique = b.vertices(pair.s_min + 1)
        b.clique(clique)
        b.graph.remove_edge(clique[0], clique[1])
        b.edge(u, clique[0])
        b.edge(u, clique[1])
    else:
        t = next(k for k in range(pair.s_top + 1) if k not in pair.sigma)
        size = t if t >= 2 else first_member(pair.sigma, 1)
        clique = b.vertices(size)
        b.clique(clique)
        b.biclique([u], clique)
    return b.build([], {})


def _poly_power(base: Sequence[int], x: int, degree: int) -> List[int]:
    """Coefficients of base(z)^x up to z^degree."""
    result = [1] + [0] * degree
    for _ in range(x):
        nxt = [0] * (degree + 1)
        for i, a in enumerate(result):
            if not a:
                continue
            for j, b in enumerate(base[:degree + 1 - i]):
                nxt[i + j] += a * b
        result = nxt
    return result


def _remove_forced_sel_cofinite(inst: GraphRelInstance, pd: PathDecomposition,
                                isolation: Isolation) -> ReductionPlan:
    name = "RemoveForcedSelCofinite"
    _relation_free(inst, name)
    pair = inst.pair
    _require(pair.rho.is_everything and pair.sigma.is_cofinite, name, "needs rho = Z>=0 and cofinite sigma")
    _require(not is_trivial(pair).trivial, name, f"trivial pair {pair}")
    hosts = _carrying(inst, FORCED)
    if not hosts:
        return ReductionPlan.identity(inst, pd, note=f"{name}: nothing to remove")
    u = hosts[0]
    n, d, s_top = inst.n, len(inst.adjacency()[u]), pair.s_top

    gadget = _cofinite_gadget(pair)
    table = ext_table(gadget)
    top = max((state.count for state in table.entries), default=0)
    per_copy = [int(table.sigma(k)) for k in range(top + 1)]
    idle = int(table.total()) - sum(per_copy)
    full = sum(per_copy)
    _require(per_copy[0] == 1 and full != idle and full >= 2, name, f"unusable gadget profile {per_copy} / {idle}")

    def build(x: int) -> Built:
        g = _Growth(inst, pd)
        g.graph.set_label(u, 0)
        for _ in range(x):
            g.attach(gadget, [u])
        return g.finish()

    rest = step(StepKind.REMOVE_FORCED_SEL_COFINITE, isolation=isolation)
    if isolation == Isolation.SOLVE:
        terms = merge_terms([(Fraction(idle), 0), (Fraction(full), 0), (Fraction(1), s_top)])
        xs = list(range(1, unknown_count(terms) + 1))
        weights = exp_poly_weights(terms, xs, {(Fraction(full), 0): 1})
        plan = _solve_plan([build(x) for x in xs], weights, f"{name}: vertex {u}, exact solve over {len(xs)} queries")
        return plan.then(rest) if len(hosts) > 1 else plan

    limit = n + get_settings().isolation_search_limit
    bound = Fraction(2) ** n
    for x in range(1, limit + 1):
        low = _poly_power(per_copy, x, s_top)
        total = full ** x
        ext = [total - sum(low[s] for s in range(s_top + 1) if i + s not in pair.sigma) for i in range(d + 1)]
        least = min(ext)
        if least <= 0:
            continue
        spread = Fraction(max(ext), least) - 1
        if idle == 1:
            eps = max(Fraction(1, least), spread)
        else:
            if bound * total >= Fraction(idle) ** x:
                continue
            eps = spread
        if eps * bound < 1:
            break
    else:
        raise IsolationError(f"{name}: no x <= {limit} certifies the floor isolation (n={n}, d={d})")

    program = [Op.query(0)]
    if idle != 1:
        program += [Op.push(idle ** x), Op.binary(OpCode.MOD)]
    program += [Op.check(0, bound * max(ext) + 1, "count of the isolated part within 2^n * max ext"),
                Op.push(least), Op.binary(OpCode.FLOORDIV)]
    note = f"{name}: vertex {u}, x={x}, L={least}, (max ext / L - 1) * 2^{n} < 1"
    plan = ReductionPlan.of([build(x)], program, [note])
    return plan.then(rest) if len(hosts) > 1 else plan


def apply_counting_step(reduction: ReductionStep, inst: GraphRelInstance, pd: PathDecomposition) -> ReductionPlan:
    """
    Plan for the count of inst in terms of instances without the feature the
    step removes.

    Raises:
        PreconditionError: the instance does not meet the step's hypotheses
        IsolationError: no certified isolation within the configured range
        DecompositionError: pd does not cover a gadget anchor
    """
    kind = reduction.kind
    if kind in (StepKind.COF_SHIFT_SIGMA, StepKind.COF_SHIFT_RHO):
        _require(reduction.target is not None, kind.value, "needs a target pair")
        plan = _cofinite_shift(inst, pd, reduction.target, "sigma" if kind == StepKind.COF_SHIFT_SIGMA else "rho")
    elif kind == StepKind.REL_WEIGHTS_TO_VERTEX_WEIGHTS:
        plan = _rel_weights(inst, pd, dagger=False)
    elif kind == StepKind.DAGGER_REL_WEIGHTS:
        plan = _rel_weights(inst, pd, dagger=True)
    elif kind == StepKind.REMOVE_VERTEX_WEIGHTS:
        plan = _vertex_weights(inst, pd, dagger=False)
    elif kind == StepKind.DAGGER_VERTEX_WEIGHTS:
        plan = _vertex_weights(inst, pd, dagger=True, isolation=reduction.isolation or Isolation.THRESHOLD,
                               bits=reduction.amount)
    elif kind == StepKind.HW1_TO_UNSEL_ONE:
        plan = _relation_to_vertex(inst, pd, "Hw1ToUnselOne", unselected(IntSet.finite(1)),
                                   Constraint.is_hw1, "exactly-one")
    elif kind == StepKind.HW1_TO_HW_LE1:
        plan = _hw1_to_hw_le1(inst, pd)
    elif kind == StepKind.HW_LE1_TO_VERTEX:
        plan = _relation_to_vertex(inst, pd, "HwLe1ToVertex", unselected(IntSet.finite(0, 1)),
                                   Constraint.is_hw_le1, "at-most-one")
    elif kind == StepKind.HW1_TO_HW_GE1:
        plan = _hw1_to_hw_ge1(inst, pd)
    elif kind == StepKind.HW_GE1_TO_VERTEX:
        plan = _relation_to_vertex(inst, pd, "HwGe1ToVertex", unselected(IntSet.at_least(1)),
                                   Constraint.is_hw_ge1, "at-least-one")
    elif kind == StepKind.SHIFT_RHO_BY_I:
        plan = _shift_rho_by(inst, pd, reduction.amount)
    elif kind == StepKind.FORCE_UNSELECTED:
        plan = _force_unselected(inst, pd)
    elif kind == StepKind.HW_GE1_TO_ZERO_PAIR:
        plan = _hw_ge1_to_zero_pair(inst, pd, reduction.isolation or Isolation.THRESHOLD)
    elif kind == StepKind.ZERO_PAIR_TO_FORCED_SEL:
        plan = _zero_pair_to_forced_sel(inst, pd)
    elif kind == StepKind.REMOVE_FORCED_SEL_FINITE:
        plan = _remove_forced_sel_finite(inst, pd)
    elif kind == StepKind.DAGGER_LINK:
        plan = _dagger_link(inst, pd)
    elif kind == StepKind.DAGGER_TO_HW1:
        plan = _dagger_to_hw1(inst, pd)
    elif kind == StepKind.DAGGER_HW1_TO_GE1:
        plan = _dagger_hw1_to_ge1(inst, pd, reduction.isolation or Isolation.THRESHOLD)
    elif kind == StepKind.DAGGER_GE1_TO_VERTICES:
        plan = _dagger_ge1_to_vertices(inst, pd, reduction.isolation or Isolation.THRESHOLD)
    elif kind == StepKind.SHIFT_PAIR:
        plan = _shift_pair(inst, pd, reduction.amount)
    else:
        plan = _remove_forced_sel_cofinite(inst, pd, reduction.isolation or Isolation.THRESHOLD)
    logger.info(f"{reduction.describe()}: {inst.n} vertices -> {plan.query_count} quer(ies), "
                f"width {pd.width} -> {plan.width}")
    return plan
