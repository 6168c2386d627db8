"""
CNF formulas in DIMACS form.
"""

from itertools import product
from typing import Iterator, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from ..exceptions import FormatError, ValidationError


Assignment = Tuple[bool, ...]


class SatInstance(BaseModel):
    """n variables x_1..x_n and clauses of non-zero literals"""

    model_config = ConfigDict(frozen=True)

    n: int
    clauses: Tuple[Tuple[int, ...], ...] = ()

    @model_validator(mode="after")
    def _check(self) -> "SatInstance":
        if self.n < 0:
            raise ValidationError(f"negative variable count {self.n}")
        for clause in self.clauses:
            for literal in clause:
                if literal == 0 or abs(literal) > self.n:
                    raise ValidationError(f"literal {literal} outside 1..{self.n}")
        return self

    @classmethod
    def of(cls, n: int, clauses: Sequence[Sequence[int]]) -> "SatInstance":
        return cls(n=n, clauses=tuple(tuple(c) for c in clauses))

    @property
    def m(self) -> int:
        return len(self.clauses)

    def satisfies(self, assignment: Sequence[bool]) -> bool:
        return all(clause_satisfied(c, assignment) for c in self.clauses)

    def assignments(self) -> Iterator[Assignment]:
        return (tuple(bits) for bits in product((False, True), repeat=self.n))

    def count_models(self) -> int:
        """Brute-force number of satisfying assignments"""
        return sum(1 for a in self.assignments() if self.satisfies(a))

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n} {self.m}"]
        lines.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in self.clauses)
        return "\n".join(lines) + "\n"


def clause_satisfied(clause: Sequence[int], assignment: Sequence[bool]) -> bool:
    """assignment[k] is the value of x_{k+1}"""
    return any(assignment[abs(lit) - 1] == (lit > 0) for lit in clause)


def parse_dimacs(text: str) -> SatInstance:
    """
    Parse a DIMACS CNF document. Clauses may span lines; each ends with 0.

    Raises:
        FormatError: missing or malformed header, bad literal, unterminated clause
    """
    n = None
    declared_m = None
    clauses: List[Tuple[int, ...]] = []
    current: List[int] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            tokens = line.split()
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise FormatError("expected 'p cnf <vars> <clauses>'", number)
            try:
                n, declared_m = int(tokens[2]), int(tokens[3])
            except ValueError:
                raise FormatError("non-integer header field", number) from None
            continue
        if n is None:
            raise FormatError("clause before the 'p cnf' header", number)
        for token in line.split():
            try:
                literal = int(token)
            except ValueError:
                raise FormatError(f"bad literal '{token}'", number) from None
            if literal == 0:
                clauses.append(tuple(current))
                current = []
            elif abs(literal) > n:
                raise FormatError(f"literal {literal} outside 1..{n}", number)
            else:
                current.append(literal)
    if n is None:
        raise FormatError("missing 'p cnf' header")
    if current:
        raise FormatError("last clause is not terminated by 0")
    if declared_m is not None and declared_m != len(clauses):
        raise FormatError(f"header announces {declared_m} clauses, found {len(clauses)}")
    return SatInstance(n=n, clauses=tuple(clauses))
