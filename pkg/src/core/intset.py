"""
Finite and cofinite sets of non-negative integers.
"""

from bisect import bisect_left
from enum import Enum
from typing import Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_validator

from ..exceptions import SetParseError, UndefinedTopError


class SetKind(str, Enum):
    """Encoding of an IntSet"""
    FINITE = "finite"
    COFINITE = "cofinite"


class IntSet(BaseModel):
    """
    A finite set (support = members) or a cofinite set (support = excluded
    elements) of non-negative integers.
    """

    model_config = ConfigDict(frozen=True)

    kind: SetKind
    support: Tuple[int, ...] = ()

    @field_validator("support", mode="before")
    @classmethod
    def _canonical(cls, value: Iterable[int]) -> Tuple[int, ...]:
        items = sorted(set(int(v) for v in value))
        if items and items[0] < 0:
            raise SetParseError(f"negative element {items[0]}")
        return tuple(items)

    # constructors

    @classmethod
    def finite(cls, *elements: int) -> "IntSet":
        return cls(kind=SetKind.FINITE, support=elements)

    @classmethod
    def cofinite(cls, *excluded: int) -> "IntSet":
        return cls(kind=SetKind.COFINITE, support=excluded)

    @classmethod
    def at_least(cls, k: int) -> "IntSet":
        """Z>=k"""
        return cls(kind=SetKind.COFINITE, support=range(k))

    @classmethod
    def everything(cls) -> "IntSet":
        return cls(kind=SetKind.COFINITE, support=())

    @classmethod
    def empty(cls) -> "IntSet":
        return cls(kind=SetKind.FINITE, support=())

    @classmethod
    def parse(cls, text: str) -> "IntSet":
        """
        Parse ``finite:1,3`` / ``cofinite:0`` / ``cofinite:`` / ``empty``.
        """
        text = text.strip()
        if text in ("empty", "finite:", "finite"):
            return cls.empty()
        if ":" not in text:
            if text == "cofinite":
                return cls.everything()
            raise SetParseError(f"expected '<finite|cofinite>:<ints>', got '{text}'")
        kind, _, body = text.partition(":")
        try:
            kind_enum = SetKind(kind.strip().lower())
        except ValueError:
            raise SetParseError(f"unknown set kind '{kind}'") from None
        try:
            values = [int(v) for v in body.replace(" ", "").split(",") if v != ""]
        except ValueError:
            raise SetParseError(f"non-integer element in '{text}'") from None
        if any(v < 0 for v in values):
            raise SetParseError(f"negative element in '{text}'")
        return cls(kind=kind_enum, support=values)

    # queries

    @property
    def is_finite(self) -> bool:
        return self.kind == SetKind.FINITE

    @property
    def is_cofinite(self) -> bool:
        return self.kind == SetKind.COFINITE

    @property
    def is_empty(self) -> bool:
        return self.is_finite and not self.support

    @property
    def is_everything(self) -> bool:
        return self.is_cofinite and not self.support

    @property
    def is_simple_cofinite(self) -> bool:
        """Cofinite of the form Z>=k"""
        return self.is_cofinite and self.support == tuple(range(len(self.support)))

    def __contains__(self, k: int) -> bool:
        return self.contains(k)

    def contains(self, k: int) -> bool:
        if k < 0:
            return False
        i = bisect_left(self.support, k)
        hit = i < len(self.support) and self.support[i] == k
        return hit if self.is_finite else not hit

    @property
    def top(self) -> int:
        """max for finite sets, largest excluded element + 1 for cofinite ones"""
        if self.is_empty:
            raise UndefinedTopError("undefined top: empty set")
        if self.is_finite:
            return self.support[-1]
        return self.support[-1] + 1 if self.support else 0

    @property
    def minimum(self) -> Optional[int]:
        if self.is_empty:
            return None
        if self.is_finite:
            return self.support[0]
        k = 0
        while k in self.support:
            k += 1
        return k

    def elements_up_to(self, bound: int) -> List[int]:
        return [k for k in range(bound + 1) if self.contains(k)]

    def missing_up_to(self, bound: int) -> List[int]:
        return [k for k in range(bound + 1) if not self.contains(k)]

    def intersects_range(self, lo: int, hi: int) -> bool:
        """Whether some k with lo <= k <= hi belongs to the set."""
        if hi < lo:
            return False
        if self.is_finite:
            i = bisect_left(self.support, lo)
            return i < len(self.support) and self.support[i] <= hi
        # cofinite: the range is covered iff all of it is excluded
        i = bisect_left(self.support, lo)
        j = bisect_left(self.support, hi + 1)
        return (j - i) < (hi - lo + 1)

    def shifted_down(self, s: int) -> "IntSet":
        """{k - s : k in self, k >= s}"""
        if self.is_finite:
            return IntSet.finite(*(k - s for k in self.support if k >= s))
        return IntSet.cofinite(*(k - s for k in self.support if k >= s))

    def shifted_up(self, s: int) -> "IntSet":
        """{k + s : k in self}"""
        if self.is_finite:
            return IntSet.finite(*(k + s for k in self.support))
        return IntSet.cofinite(*(list(range(s)) + [k + s for k in self.support]))

    def finite_core(self) -> "IntSet":
        """
        A finite subset used by constructions that need finite sets:
        the set itself when finite, else {t, t+1} for the least t with t, t+1
        both present.
        """
        if self.is_finite:
            return self
        t = 0
        while not (self.contains(t) and self.contains(t + 1)):
            t += 1
        return IntSet.finite(t, t + 1)

    def describe(self) -> str:
        body = ",".join(str(v) for v in self.support)
        return f"{self.kind.value}:{body}"

    def pretty(self) -> str:
        if self.is_empty:
            return "{}"
        if self.is_finite:
            return "{" + ",".join(str(v) for v in self.support) + "}"
        if self.is_simple_cofinite:
            return f"Z>={len(self.support)}"
        return "Z>=0\\{" + ",".join(str(v) for v in self.support) + "}"

    def __str__(self) -> str:
        return self.pretty()
