"""
Manager families: per rank a graph with relations, distinguished vertices
u_1..u_rank and the block partition B_i / Bbar_i.
"""

from itertools import product
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.instance import GraphRelInstance
from ..core.pair import ManagerCase, Pair, invert_state
from ..core.srg_format import serialize_srg
from ..core.states import Language, State, StateString, rho, sigma, string_code
from ..exceptions import ConstructionError, ValidationError
from ..oracle.certify import ManagerCertificate, ManagerFailure, certify_manager


class LBetaSpec(BaseModel):
    """
    Strings of length 2d over {ρ0, ρ1, σ0, σ1} with zero or exactly d
    σ1's and at most beta unselected positions.
    """

    model_config = ConfigDict(frozen=True)

    d: int = Field(ge=1)
    beta: int = Field(ge=0, le=1)

    @property
    def length(self) -> int:
        return 2 * self.d

    def contains(self, x: Sequence[State]) -> bool:
        if len(x) != self.length:
            return False
        if any(s.count > 1 for s in x):
            return False
        ones = sum(1 for s in x if s.selected and s.count == 1)
        unselected = sum(1 for s in x if not s.selected)
        return ones in (0, self.d) and unselected <= self.beta

    def language(self) -> Language:
        letters = (rho(0), rho(1), sigma(0), sigma(1))
        return Language.of(self.length, [x for x in product(letters, repeat=self.length) if self.contains(x)])


class ManagerInstance(BaseModel):
    """One rank of a manager family."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rank: int = Field(ge=1)
    alphabet: Tuple[State, ...]
    instance: GraphRelInstance
    distinguished: Tuple[int, ...]
    blocks: Tuple[Tuple[int, ...], ...]
    blocks_bar: Tuple[Tuple[int, ...], ...]
    bound: int = Field(ge=0)
    solver: Optional[Callable[[StateString], FrozenSet[int]]] = Field(default=None, exclude=True)

    @model_validator(mode="after")
    def _check(self) -> "ManagerInstance":
        if len(self.distinguished) != self.rank:
            raise ValidationError(f"rank {self.rank} with {len(self.distinguished)} distinguished vertices")
        return self

    def solution(self, x: Sequence[State]) -> FrozenSet[int]:
        """The selection S_x the construction intends for x."""
        if self.solver is None:
            raise ConstructionError("manager instance carries no solution builder")
        if len(x) != self.rank or any(s not in self.alphabet for s in x):
            raise ValidationError(f"{string_code(x)} is not a string over the manager alphabet")
        return self.solver(tuple(x))

    def block_of(self, v: int) -> Optional[Tuple[str, int]]:
        for side, blocks in (("B", self.blocks), ("Bbar", self.blocks_bar)):
            for i, block in enumerate(blocks):
                if v in block:
                    return side, i
        return None

    def to_srg(self) -> str:
        blocks = [(i + 1, "B", b) for i, b in enumerate(self.blocks)]
        blocks += [(i + 1, "Bbar", b) for i, b in enumerate(self.blocks_bar)]
        notes = [f"manager rank {self.rank} alphabet {' '.join(s.code() for s in self.alphabet)} bound {self.bound}"]
        return serialize_srg(self.instance, portals=self.distinguished, blocks=blocks, notes=notes)


class Manager:
    """
    A manager family for one pair: ranks are built on demand and cached.
    The alphabet must be closed under inversion.
    """

    def __init__(
        self,
        case: ManagerCase,
        pair: Pair,
        alphabet: Iterable[State],
        build_rank: Callable[[int], ManagerInstance],
        name: str = "",
    ):
        self.case = case
        self.pair = pair
        self.alphabet: Tuple[State, ...] = tuple(alphabet)
        self.name = name or case.value
        self._build_rank = build_rank
        self._ranks: Dict[int, ManagerInstance] = {}
        for state in self.alphabet:
            if invert_state(state, pair) not in self.alphabet:
                raise ConstructionError(f"{self.name}: alphabet not closed under inversion at {state}")

    def __repr__(self) -> str:
        return f"Manager({self.name}, {self.pair}, |A|={len(self.alphabet)})"

    def at_rank(self, rank: int) -> ManagerInstance:
        if rank < 1:
            raise ValidationError(f"manager rank must be positive, got {rank}")
        if rank not in self._ranks:
            mi = self._build_rank(rank)
            logger.info(f"manager {self.name} rank {rank}: {mi.instance.n} vertices, "
                        f"{len(mi.instance.constraints)} relations, b={mi.bound}")
            self._ranks[rank] = mi
        return self._ranks[rank]

    @property
    def bound(self) -> int:
        return self.at_rank(1).bound

    def certify(
        self,
        ranks: Sequence[int] = (1, 2),
        cap: Optional[int] = None,
    ) -> List[Union[ManagerCertificate, ManagerFailure]]:
        return [certify_manager(self.at_rank(k), cap=cap) for k in ranks]


def blocks_from_owner(owner: Dict[int, Tuple[int, int]], rank: int) -> Tuple[Tuple[Tuple[int, ...], ...], Tuple[Tuple[int, ...], ...]]:
    """Group vertices by (side, index); side 0 is B, side 1 is Bbar."""
    sides: List[List[List[int]]] = [[[] for _ in range(rank)] for _ in range(2)]
    for v, (side, index) in sorted(owner.items()):
        sides[side][index].append(v)
    return tuple(tuple(b) for b in sides[0]), tuple(tuple(b) for b in sides[1])
