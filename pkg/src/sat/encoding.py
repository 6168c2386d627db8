"""
Constant-weight encodings of variable groups by strings over the manager
alphabet.
"""

import math
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from ..config import get_settings
from ..core.pair import Pair, invert_rho_only, invert_sigma_only
from ..core.states import Language, State, StateString, string_code, weight_vector
from ..exceptions import PreconditionError, ValidationError


class EncodingMap(BaseModel):
    """
    Group width g, group size q and the injective map from the 2^q
    assignments of a group (bit k = value of its k-th variable) to codewords.
    """

    model_config = ConfigDict(frozen=True)

    alphabet: Tuple[State, ...]
    g: int = Field(ge=1)
    q: int = Field(ge=1)
    weight: int = Field(description="common weight of the codewords before inversion")
    base_codewords: Tuple[StateString, ...]
    codewords: Tuple[StateString, ...]
    table: Dict[int, StateString]

    def encode(self, bits: Sequence[bool]) -> StateString:
        if len(bits) != self.q:
            raise ValidationError(f"expected {self.q} bits, got {len(bits)}")
        return self.table[sum(1 << k for k, bit in enumerate(bits) if bit)]

    def decode(self, x: Sequence[State]) -> Optional[int]:
        """Assignment index encoded by x, or None for a non-codeword"""
        x = tuple(x)
        for index, word in self.table.items():
            if word == x:
                return index
        return None


def max_count(alphabet: Sequence[State]) -> int:
    return max((s.count for s in alphabet), default=0)


def formula_q(alphabet: Sequence[State], g: int) -> int:
    """floor(g log|A| - log(g max A + 1)), the group size that always fits"""
    if not alphabet:
        return 0
    value = g * math.log2(len(alphabet)) - math.log2(g * max_count(alphabet) + 1)
    return max(0, math.floor(value + 1e-12))


def weight_classes(alphabet: Sequence[State], g: int) -> Dict[int, List[StateString]]:
    ordered = Language.of(1, [(s,) for s in alphabet]).sorted()
    letters = [x[0] for x in ordered]
    classes: Dict[int, List[StateString]] = {}
    for x in product(letters, repeat=g):
        classes.setdefault(weight_vector(x)[1], []).append(tuple(x))
    return classes


def invert_codeword(x: Sequence[State], pair: Optional[Pair]) -> StateString:
    """inv^sigma / inv^rho on the flavours whose set is simple cofinite"""
    if pair is None:
        return tuple(x)
    out = tuple(x)
    if pair.sigma.is_simple_cofinite:
        out = tuple(invert_sigma_only(s, pair) for s in out)
    if pair.rho.is_simple_cofinite:
        out = tuple(invert_rho_only(s, pair) for s in out)
    return out


def _capacity(size: int) -> int:
    return size.bit_length() - 1 if size > 0 else 0


def choose_parameters(
    alphabet: Sequence[State],
    g: Optional[int] = None,
    pair: Optional[Pair] = None,
    q: Optional[int] = None,
) -> EncodingMap:
    """
    Pick the largest weight class of A^g, invert it where the sets are
    simple cofinite and map the assignments of a q-variable group into it.

    Args:
        alphabet: manager alphabet A
        g: group width; defaults to suggest_group_width
        pair: pair deciding the inversions (none when omitted)
        q: group size; defaults to the largest q with 2^q codewords

    Raises:
        PreconditionError: no room for even one variable (raise g)
        ValidationError: bad g, or 2^q exceeds the number of codewords
    """
    if g is None:
        g = suggest_group_width(alphabet, q or 1, start=get_settings().default_group_width)
    if g < 1:
        raise ValidationError(f"group width must be positive, got {g}")
    if not alphabet:
        raise PreconditionError("Encoding", "the alphabet is empty")
    classes = weight_classes(alphabet, g)
    weight = max(sorted(classes), key=lambda w: len(classes[w]))
    base = classes[weight]
    codewords = Language.of(g, (invert_codeword(x, pair) for x in base)).sorted()
    capacity = _capacity(len(codewords))
    if q is None:
        q = capacity
    if q <= 0:
        raise PreconditionError("Encoding", f"{len(codewords)} codeword(s) leave no room for a variable at g={g}")
    if q > capacity:
        raise ValidationError(f"2^{q} assignments exceed the {len(codewords)} codewords")
    table = {index: codewords[index] for index in range(1 << q)}
    logger.debug(
        f"encoding g={g} q={q} (formula {formula_q(alphabet, g)}), weight {weight}, "
        f"{len(codewords)} codewords, first {string_code(codewords[0])}"
    )
    return EncodingMap(
        alphabet=tuple(alphabet),
        g=g,
        q=q,
        weight=weight,
        base_codewords=tuple(base),
        codewords=tuple(codewords),
        table=table,
    )


def suggest_group_width(alphabet: Sequence[State], q: int = 1, start: int = 1, limit: int = 8) -> int:
    """
    Smallest g >= start whose largest weight class holds 2^q codewords.

    Raises:
        PreconditionError: no such g up to limit (e.g. a one-letter alphabet)
    """
    if not alphabet:
        raise PreconditionError("Encoding", "the alphabet is empty")
    for g in range(max(1, start), limit + 1):
        classes = weight_classes(alphabet, g)
        if _capacity(max(len(c) for c in classes.values())) >= q:
            return g
    raise PreconditionError("Encoding", f"no group width up to {limit} fits {q} variable(s)")
