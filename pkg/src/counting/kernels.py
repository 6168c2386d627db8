"""
Small exact linear systems behind the weighted gadgets: the down-shift
weights for cofinite sets, the weights of the three-state linking gadget
and the certified mirror link used by the dagger reduction.
"""

from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Tuple

import sympy
from loguru import logger
from pydantic import BaseModel, ConfigDict

from ..core.instance import Constraint
from ..core.intset import IntSet
from ..core.pair import Pair
from ..exceptions import CertificationError, PreconditionError
from ..oracle.gadget import PortalGadget
from ..oracle.oracle import realized_language
from ..providers import GadgetBuilder


SATURATED = Pair.of(IntSet.at_least(1), IntSet.everything())

LINK_MATRIX: Tuple[Tuple[int, ...], ...] = (
    (1, 1, 0),
    (1, 1, 2),
    (1, 2, 1),
)
LINK_OPTIONS = ("none", "a", "b")
LINK_STATES = ("sigma0", "sigma+", "rho")


def downshift_matrix(sigma_set: IntSet) -> List[List[int]]:
    """A[alpha][gamma] = [alpha + gamma in sigma] for alpha, gamma in 0..s_top."""
    top = sigma_set.top
    return [[int(alpha + gamma in sigma_set) for gamma in range(top + 1)] for alpha in range(top + 1)]


def solve_downshift_weights(sigma_set: IntSet) -> Tuple[Fraction, ...]:
    """
    f_0..f_stop with the sum of f_gamma over alpha + gamma in sigma equal to
    [alpha >= s_top] for every alpha >= 0.

    With g_j = f_j + ... + f_stop, row alpha = s_top - j reads
    sum_{gamma < j-1, alpha + gamma in sigma} f_gamma + g_j = [j = 0]
    (gamma = j-1 lands on s_top - 1, which sigma misses), so g_j and then
    f_{j-1} = g_{j-1} - g_j follow for j = 0, 1, ... in turn.

    Raises:
        PreconditionError: sigma is not cofinite or s_top = 0
        CertificationError: the solution fails re-substitution
    """
    if not sigma_set.is_cofinite:
        raise PreconditionError("DownshiftWeights", f"sigma must be cofinite, got {sigma_set}")
    top = sigma_set.top
    if top == 0:
        raise PreconditionError("DownshiftWeights", "s_top = 0 leaves no system to solve")

    f: List[Fraction] = []
    g_prev = Fraction(1)
    for j in range(1, top + 1):
        alpha = top - j
        g = -sum((f[gamma] for gamma in range(j - 1) if alpha + gamma in sigma_set), Fraction(0))
        f.append(g_prev - g)
        g_prev = g
    f.append(g_prev)

    for alpha, row in enumerate(downshift_matrix(sigma_set)):
        value = sum((c * w for c, w in zip(row, f)), Fraction(0))
        if value != (1 if alpha == top else 0):
            raise CertificationError(f"down-shift weights fail row {alpha}: {value}")
    logger.debug(f"down-shift weights for {sigma_set}: {[str(w) for w in f]}")
    return tuple(f)


class LinkWeights(BaseModel):
    """Relation weights of the linking gadget, keyed by (option at u, option at u')"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: Tuple[Tuple[int, ...], ...]
    determinant: int
    weights: Dict[Tuple[str, str], Fraction]

    def weight(self, left: str, right: str) -> Fraction:
        return self.weights[(left, right)]


def _kron(m: sympy.Matrix) -> sympy.Matrix:
    k = m.shape[0]
    return sympy.Matrix(k * k, k * k, lambda i, j: m[i // k, j // k] * m[i % k, j % k])


def link_gadget(pair: Pair, weights: Dict[Tuple[str, str], Fraction]) -> PortalGadget:
    """
    Two mirrored halves u - c - a, u - b and u' - c' - a', u' - b' with c, c'
    carrying (Z>=1, Z>=0) and one weighted relation over a, b, a', b' that
    never selects a together with b (or a' with b'). Portals are (u, u');
    the instance is in dagger mode so a, b, a', b' are unconstrained.
    """
    b = GadgetBuilder(pair, "link", dagger_mode=True)
    u, u2 = b.portals_n(2)
    saturated = b.graph.use_pair(SATURATED) if pair != SATURATED else 0
    a, bb, c = b.vertex(), b.vertex(), b.vertex(saturated)
    a2, bb2, c2 = b.vertex(), b.vertex(), b.vertex(saturated)
    for x, y in ((u, c), (u, bb), (c, a), (u2, c2), (u2, bb2), (c2, a2)):
        b.edge(x, y)
    options = {"none": [], "a": [a], "b": [bb]}
    options2 = {"none": [], "a": [a2], "b": [bb2]}
    selections, table = [], {}
    for left in LINK_OPTIONS:
        for right in LINK_OPTIONS:
            chosen = frozenset(options[left] + options2[right])
            selections.append(chosen)
            table[chosen] = weights[(left, right)]
    b.graph.add_constraint(Constraint.from_sets([a, bb, a2, bb2], selections, table))
    return b.build([], {})


def _link_class(selected: bool, count: int) -> str:
    if not selected:
        return "rho"
    return "sigma0" if count == 0 else "sigma+"


@lru_cache(maxsize=1)
def solve_link_weights() -> LinkWeights:
    """
    Weights (M (x) M)^-1 e with e the indicator of (sigma0, sigma0) and
    (rho, rho), post-verified on the gadget by weighted enumeration.

    Raises:
        CertificationError: the enumerated extension table differs from e
    """
    m = sympy.Matrix(LINK_MATRIX)
    det = int(m.det())
    goal = sympy.Matrix([
        1 if (s, t) in {("sigma0", "sigma0"), ("rho", "rho")} else 0
        for s in LINK_STATES for t in LINK_STATES
    ])
    solution = _kron(m).LUsolve(goal)
    weights: Dict[Tuple[str, str], Fraction] = {}
    for i, left in enumerate(LINK_OPTIONS):
        for j, right in enumerate(LINK_OPTIONS):
            value = sympy.Rational(solution[3 * i + j])
            weights[(left, right)] = Fraction(int(value.p), int(value.q))

    report = realized_language(link_gadget(SATURATED, weights))
    table: Dict[Tuple[str, str], Fraction] = {(s, t): Fraction(0) for s in LINK_STATES for t in LINK_STATES}
    for (x, y), w in report.weight.items():
        table[(_link_class(x.selected, x.count), _link_class(y.selected, y.count))] += w
    for (s, t), value in table.items():
        expected = 1 if (s, t) in {("sigma0", "sigma0"), ("rho", "rho")} else 0
        if value != expected:
            raise CertificationError(f"link gadget extension ({s}, {t}) = {value}, expected {expected}")
    return LinkWeights(matrix=LINK_MATRIX, determinant=det, weights=weights)


class LinkOption(BaseModel):
    """One hub of the mirror link: which side it selects and what it adds around u"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mirror: bool
    supports: bool
    extra: int
    weight: Fraction


def mirror_link_options(sigma_set: IntSet) -> Tuple[LinkOption, ...]:
    """
    Hubs of the mirror link for a cofinite sigma with s = s_top >= 1.

    Two hubs leave the mirror unselected; their weights -1 and 1 (the second
    one supports c) cancel when u is selected and sum to 1 otherwise. The
    mirror-selected hubs give u exactly j extra neighbours with weight
    (-1)^j for j < s, plus a hub at j = s supporting c with weight -1/2 (and,
    for even s, a plain one with weight 1). Their generating polynomial
    times (1 + z) is 1 + t (z^s - z^(s+1)) for a constant t, and every
    shift of that meets sigma like the constant 1 does.
    """
    if not sigma_set.is_cofinite:
        raise PreconditionError("MirrorLink", f"sigma must be cofinite, got {sigma_set}")
    top = sigma_set.top
    if top == 0:
        raise PreconditionError("MirrorLink", "sigma = Z>=0 needs no link")
    options = [
        LinkOption(mirror=False, supports=False, extra=0, weight=Fraction(-1)),
        LinkOption(mirror=False, supports=True, extra=0, weight=Fraction(1)),
    ]
    options += [LinkOption(mirror=True, supports=False, extra=j, weight=Fraction((-1) ** j)) for j in range(top)]
    if top % 2 == 0:
        options.append(LinkOption(mirror=True, supports=False, extra=top, weight=Fraction(1)))
    options.append(LinkOption(mirror=True, supports=True, extra=top, weight=Fraction(-1, 2)))
    return tuple(options)


def mirror_link_gadget(pair: Pair) -> PortalGadget:
    """
    Portals (u, u'). One hub per option under a weighted exactly-one
    relation; a second exactly-one ties u' to the mirror-selected hubs. A
    hub adding j >= 1 neighbours is joined to u, and helpers b_1..b_{s-1}
    joined to u are selected exactly when the chosen hub adds more than i.
    c carries (Z>=1, Z>=0) and sees u and the supporting hubs.
    """
    options = mirror_link_options(pair.sigma)
    b = GadgetBuilder(pair, "mirror_link", dagger_mode=True)
    u, mirror = b.portals_n(2)
    saturated = b.graph.use_pair(SATURATED) if pair != SATURATED else 0
    c = b.vertex(saturated)
    b.edge(u, c)
    hubs = b.vertices(len(options))
    for option, h in zip(options, hubs):
        if option.supports:
            b.edge(c, h)
        if option.extra:
            b.edge(u, h)
    table = {frozenset([h]): option.weight for option, h in zip(options, hubs)}
    b.graph.add_constraint(Constraint.from_sets(hubs, list(table), table))
    b.graph.add_constraint(Constraint.hw_eq([mirror] + [h for o, h in zip(options, hubs) if not o.mirror], 1))
    for i in range(1, pair.s_top):
        helper = b.vertex()
        b.edge(u, helper)
        b.graph.add_constraint(Constraint.hw_eq([helper] + [h for o, h in zip(options, hubs) if o.extra <= i], 1))
    return b.build([], {})


@lru_cache(maxsize=None)
def certified_mirror_link(pair: Pair) -> PortalGadget:
    """
    The mirror link for pair, checked by weighted enumeration: for every
    number alpha of outside neighbours of u, the weighted extensions are
    [alpha in sigma] when u and u' are both selected, 1 when both are
    unselected, and 0 when they disagree.

    Raises:
        CertificationError: some extension sum differs
    """
    gadget = mirror_link_gadget(pair)
    report = realized_language(gadget)
    for alpha in range(pair.s_top + 1):
        table = {(a, b): Fraction(0) for a in (False, True) for b in (False, True)}
        for (x, y), w in report.weight.items():
            if x.selected and alpha + x.count not in pair.sigma:
                continue
            table[(x.selected, y.selected)] += w
        for (a, b), value in table.items():
            expected = (int(alpha in pair.sigma) if a else 1) if a == b else 0
            if value != expected:
                raise CertificationError(f"mirror link for {pair}: alpha={alpha}, u={a}, u'={b} gives {value}")
    logger.debug(f"mirror link for {pair}: {gadget.n} vertices certified")
    return gadget
