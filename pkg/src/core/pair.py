"""
Set pairs (sigma, rho), pair families and the structure parameters derived
from them.
"""

from enum import Enum
from functools import reduce
from math import gcd
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..exceptions import SetParseError, TrivialPairError, ValidationError
from .intset import IntSet
from .states import Flavor, State, sigma, rho


class Unbounded(str, Enum):
    """Structure of a pair whose sets are both singletons"""
    UNBOUNDED = "unbounded"


UNBOUNDED = Unbounded.UNBOUNDED
Structure = Union[int, Unbounded]


class Pair(BaseModel):
    """A pair (sigma, rho) of finite or cofinite sets."""

    model_config = ConfigDict(frozen=True)

    sigma: IntSet
    rho: IntSet

    @classmethod
    def of(cls, sigma_set: IntSet, rho_set: IntSet) -> "Pair":
        return cls(sigma=sigma_set, rho=rho_set)

    @classmethod
    def parse(cls, text: str) -> "Pair":
        """
        Parse ``"sigma=finite:1,3 rho=cofinite:0"``.
        """
        parts = {}
        for token in text.split():
            key, sep, value = token.partition("=")
            if not sep:
                raise SetParseError(f"expected key=value, got '{token}'")
            parts[key.strip().lower()] = value
        if "sigma" not in parts or "rho" not in parts:
            raise SetParseError(f"pair needs sigma= and rho=: '{text}'")
        return cls(sigma=IntSet.parse(parts["sigma"]), rho=IntSet.parse(parts["rho"]))

    def describe(self) -> str:
        return f"sigma={self.sigma.describe()} rho={self.rho.describe()}"

    @property
    def s_top(self) -> int:
        return self.sigma.top

    @property
    def r_top(self) -> int:
        return self.rho.top

    @property
    def t_top(self) -> int:
        return max(self.s_top, self.r_top)

    @property
    def s_min(self) -> Optional[int]:
        return self.sigma.minimum

    @property
    def r_min(self) -> Optional[int]:
        return self.rho.minimum

    @property
    def non_empty(self) -> bool:
        return not self.sigma.is_empty and not self.rho.is_empty

    def alphabet(self) -> List[State]:
        """The truncated alphabet: sigma_0..sigma_stop, rho_0..rho_rtop"""
        return [sigma(i) for i in range(self.s_top + 1)] + [rho(i) for i in range(self.r_top + 1)]

    def accepts(self, state: State) -> bool:
        """Whether a vertex ending in this state is satisfied."""
        return state.count in (self.sigma if state.selected else self.rho)

    def __str__(self) -> str:
        return f"({self.sigma}, {self.rho})"


def compute_tops(pair: Pair) -> Tuple[int, int]:
    """
    (s_top, r_top) of a pair.

    Raises:
        UndefinedTopError: sigma or rho is empty
    """
    return pair.sigma.top, pair.rho.top


def _differences_gcd(s: IntSet) -> int:
    items = s.support
    return reduce(gcd, (v - items[0] for v in items[1:]), 0)


def max_structured(pair: Pair) -> Structure:
    """
    Largest m such that all of sigma share one residue mod m and all of rho
    share one residue mod m. Cofinite sets contain consecutive integers and
    force m = 1.
    """
    if not pair.non_empty:
        raise ValidationError("max_structured needs non-empty sigma and rho")
    if pair.sigma.is_cofinite or pair.rho.is_cofinite:
        return 1
    g = gcd(_differences_gcd(pair.sigma), _differences_gcd(pair.rho))
    return UNBOUNDED if g == 0 else g


def is_m_structured(pair: Pair, m: int) -> bool:
    structure = max_structured(pair)
    return structure is UNBOUNDED or structure % m == 0


class Triviality(BaseModel):
    """Result of the triviality test"""

    model_config = ConfigDict(frozen=True)

    trivial: bool
    rule: Optional[str] = Field(
        default=None,
        description="'all_subsets' (2^n) or 'components' (2^c over components with all degrees in sigma)"
    )


def is_trivial(pair: Pair) -> Triviality:
    if pair.rho == IntSet.finite(0):
        return Triviality(trivial=True, rule="components")
    if pair.sigma.is_everything and pair.rho.is_everything:
        return Triviality(trivial=True, rule="all_subsets")
    return Triviality(trivial=False)


def trivial_count(pair: Pair, n: int, edges: Iterable[Tuple[int, int]]) -> int:
    """
    Closed-form number of (sigma, rho)-sets of a plain graph for a trivial pair.
    """
    import networkx as nx

    verdict = is_trivial(pair)
    if not verdict.trivial:
        raise ValidationError(f"pair {pair} is not trivial")
    if verdict.rule == "all_subsets":
        return 2 ** n
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(edges)
    good = sum(
        1 for comp in nx.connected_components(graph)
        if all(graph.degree(v) in pair.sigma for v in comp)
    )
    return 2 ** good


def c_sigma_rho(pair: Pair) -> int:
    """
    The per-pathwidth base of the counting lower bound.

    Raises:
        TrivialPairError: rho = {0} or (sigma, rho) = (Z>=0, Z>=0)
    """
    if is_trivial(pair).trivial:
        raise TrivialPairError(f"trivial pair {pair}")
    s_top, r_top = compute_tops(pair)
    structure = max_structured(pair)
    if structure == 1:
        return s_top + r_top + 2
    if structure == 2 and s_top == r_top and s_top % 2 == 0:
        return max(s_top, r_top) + 2
    return max(s_top, r_top) + 1


def invert_state(state: State, pair: Pair) -> State:
    """sigma_s -> sigma_{s_top - s}, rho_r -> rho_{r_top - r}"""
    top = pair.s_top if state.selected else pair.r_top
    if state.count > top:
        raise ValidationError(f"state {state} outside the truncated alphabet (top {top})")
    return sigma(top - state.count) if state.selected else rho(top - state.count)


def invert_string(x: Sequence[State], pair: Pair) -> Tuple[State, ...]:
    return tuple(invert_state(s, pair) for s in x)


def invert_sigma_only(state: State, pair: Pair) -> State:
    return invert_state(state, pair) if state.selected else state


def invert_rho_only(state: State, pair: Pair) -> State:
    return state if state.selected else invert_state(state, pair)


class ManagerCase(str, Enum):
    RCASE = "rcase"
    SCASE = "scase"
    EVEN = "even"
    ACASE = "acase"


def manager_eligibility(pair: Pair) -> List[ManagerCase]:
    """Manager families available for a pair."""
    if not pair.non_empty or pair.rho == IntSet.finite(0):
        return []
    cases = [ManagerCase.RCASE]
    s_top, r_top = compute_tops(pair)
    if any(c in pair.rho for c in range(1, s_top + 1)):
        cases.append(ManagerCase.SCASE)
    structure = max_structured(pair)
    if structure == 2 and r_top >= 1 and s_top % 2 == 0 and r_top % 2 == 0:
        cases.append(ManagerCase.EVEN)
    if structure == 1:
        cases.append(ManagerCase.ACASE)
    return cases


def alphabet_for_case(case: ManagerCase, pair: Pair) -> List[State]:
    s_top, r_top = compute_tops(pair)
    if case == ManagerCase.RCASE:
        return [rho(i) for i in range(r_top + 1)]
    if case == ManagerCase.SCASE:
        return [sigma(i) for i in range(s_top + 1)]
    if case == ManagerCase.EVEN:
        return [rho(i) for i in range(0, r_top + 1, 2)] + [sigma(i) for i in range(0, s_top + 1, 2)]
    return pair.alphabet()


class PairFamily(BaseModel):
    """
    Indexed pairs; index 0 is the base pair. A bound limits how many vertices
    may carry the label (None = unbounded).
    """

    model_config = ConfigDict(frozen=True)

    pairs: Tuple[Pair, ...]
    bounds: Tuple[Optional[int], ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _fill_bounds(cls, data):
        if isinstance(data, dict) and not data.get("bounds"):
            data = dict(data)
            data["bounds"] = tuple([None] * len(data.get("pairs", ())))
        return data

    @model_validator(mode="after")
    def _check(self) -> "PairFamily":
        if not self.pairs:
            raise ValidationError("pair family needs a base pair")
        if not self.pairs[0].non_empty:
            raise ValidationError("base pair must have non-empty sigma and rho")
        if self.bounds and len(self.bounds) != len(self.pairs):
            raise ValidationError("bounds must match pairs")
        return self

    @classmethod
    def single(cls, pair: Pair) -> "PairFamily":
        return cls(pairs=(pair,), bounds=(None,))

    @property
    def base(self) -> Pair:
        return self.pairs[0]

    def bound(self, index: int) -> Optional[int]:
        return self.bounds[index] if self.bounds else None

    def index_of(self, pair: Pair) -> Optional[int]:
        for i, p in enumerate(self.pairs):
            if p == pair:
                return i
        return None

    def with_pair(self, pair: Pair, bound: Optional[int] = None) -> Tuple["PairFamily", int]:
        """Family extended by pair (reused when already present) and its index."""
        existing = self.index_of(pair)
        bounds = list(self.bounds) if self.bounds else [None] * len(self.pairs)
        if existing is not None:
            # an unbounded label stays unbounded
            if bound is not None and bounds[existing] is not None:
                bounds[existing] += bound
            return PairFamily(pairs=self.pairs, bounds=tuple(bounds)), existing
        return PairFamily(pairs=self.pairs + (pair,), bounds=tuple(bounds) + (bound,)), len(self.pairs)


def flavor_set(pair: Pair, flavor: Flavor) -> IntSet:
    return pair.sigma if flavor == Flavor.SIGMA else pair.rho
