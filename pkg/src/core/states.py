"""
Portal states, state strings and languages.
"""

import re
from enum import Enum
from functools import lru_cache
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..exceptions import SetParseError, ValidationError


class Flavor(str, Enum):
    SIGMA = "sigma"
    RHO = "rho"


class State(BaseModel):
    """sigma_count (selected) or rho_count (unselected)"""

    model_config = ConfigDict(frozen=True)

    flavor: Flavor
    count: int

    @field_validator("count")
    @classmethod
    def _non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValidationError(f"negative state count {value}")
        return value

    @property
    def selected(self) -> bool:
        return self.flavor == Flavor.SIGMA

    def code(self) -> str:
        return f"{'s' if self.selected else 'r'}{self.count}"

    def __str__(self) -> str:
        return f"{'σ' if self.selected else 'ρ'}{self.count}"

    def __repr__(self) -> str:
        return f"State({self})"


@lru_cache(maxsize=None)
def sigma(count: int) -> State:
    return State(flavor=Flavor.SIGMA, count=count)


@lru_cache(maxsize=None)
def rho(count: int) -> State:
    return State(flavor=Flavor.RHO, count=count)


def state_of(selected: bool, count: int) -> State:
    return sigma(count) if selected else rho(count)


StateString = Tuple[State, ...]

_STATE_RE = re.compile(r"(s|r|σ|ρ|sigma|rho)_?(\d+)")


def parse_state(token: str) -> State:
    m = _STATE_RE.fullmatch(token.strip())
    if not m:
        raise SetParseError(f"bad state '{token}'")
    selected = m.group(1) in ("s", "σ", "sigma")
    return state_of(selected, int(m.group(2)))


def parse_string(text: str) -> StateString:
    """
    Parse ``"s0 r1"`` or ``"σ0ρ1"`` into a state string.
    """
    text = text.strip()
    if not text or text == "-":
        return ()
    tokens = text.split() if " " in text else _STATE_RE.findall(text)
    if tokens and isinstance(tokens[0], tuple):
        return tuple(parse_state(a + b) for a, b in tokens)
    return tuple(parse_state(t) for t in tokens)


def string_code(x: Sequence[State]) -> str:
    return " ".join(s.code() for s in x) if x else "-"


def weight_vector(x: Sequence[State]) -> Tuple[Tuple[int, ...], int]:
    """
    The vector of state counts of x and its weight.

    >>> weight_vector((sigma(2), rho(0), rho(3)))
    ((2, 0, 3), 5)
    """
    vec = tuple(s.count for s in x)
    return vec, sum(vec)


def sigma_alphabet(s_top: int) -> List[State]:
    return [sigma(i) for i in range(s_top + 1)]


def rho_alphabet(r_top: int) -> List[State]:
    return [rho(i) for i in range(r_top + 1)]


class Language(BaseModel):
    """A set of state strings of one fixed length."""

    model_config = ConfigDict(frozen=True)

    portal_count: int
    strings: FrozenSet[StateString] = frozenset()

    @model_validator(mode="after")
    def _lengths(self) -> "Language":
        for x in self.strings:
            if len(x) != self.portal_count:
                raise ValidationError(
                    f"string {string_code(x)} has length {len(x)}, expected {self.portal_count}"
                )
        return self

    @classmethod
    def of(cls, portal_count: int, strings: Iterable[Sequence[State]]) -> "Language":
        return cls(portal_count=portal_count, strings=frozenset(tuple(x) for x in strings))

    @classmethod
    def parse(cls, portal_count: int, texts: Iterable[str]) -> "Language":
        return cls.of(portal_count, (parse_string(t) for t in texts))

    @classmethod
    def power(cls, alphabet: Iterable[State], length: int) -> "Language":
        return cls.of(length, product(list(alphabet), repeat=length))

    def __contains__(self, x: Sequence[State]) -> bool:
        return tuple(x) in self.strings

    def __len__(self) -> int:
        return len(self.strings)

    def sorted(self) -> List[StateString]:
        return sorted(self.strings, key=lambda x: [(s.flavor.value, s.count) for s in x])

    def union(self, other: "Language") -> "Language":
        return Language.of(self.portal_count, self.strings | other.strings)

    def issubset(self, other: "Language") -> bool:
        return self.strings <= other.strings

    def __str__(self) -> str:
        return "{" + ", ".join("".join(str(s) for s in x) for x in self.sorted()) + "}"


def count_states(x: Sequence[State]) -> Dict[State, int]:
    counts: Dict[State, int] = {}
    for s in x:
        counts[s] = counts.get(s, 0) + 1
    return counts
