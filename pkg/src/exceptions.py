"""
Exception hierarchy shared by every package.
"""

from typing import Optional


class SigmaRhoError(Exception):
    """Base class of all toolkit errors"""
    pass


class SetParseError(SigmaRhoError):
    """Malformed set or pair description"""
    pass


class FormatError(SigmaRhoError):
    """Malformed srg v1 or DIMACS input"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(SigmaRhoError):
    """Instance violates a structural invariant"""
    pass


class UndefinedTopError(SigmaRhoError):
    """s_top / r_top requested for an empty set"""
    pass


class TrivialPairError(SigmaRhoError):
    """Operation needs a non-trivial pair"""
    pass


class OracleCapExceeded(SigmaRhoError):
    """Exhaustive search would exceed the configured cap"""

    def __init__(self, size: float, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"oracle cap exceeded: search size {size:.1f} > cap {cap}")


class DpStateLimitExceeded(SigmaRhoError):
    """The path-decomposition table outgrew its state limit"""

    def __init__(self, states: int, limit: int, bag: int):
        self.states = states
        self.limit = limit
        self.bag = bag
        super().__init__(f"dp state limit exceeded at bag {bag}: {states} states > limit {limit}")


class PreconditionError(SigmaRhoError):
    """A construction was asked for outside its hypotheses"""

    def __init__(self, construction: str, condition: str):
        self.construction = construction
        self.condition = condition
        super().__init__(f"{construction}: {condition}")


class ConstructionError(SigmaRhoError):
    """A construction failed internally"""
    pass


class DecompositionError(SigmaRhoError):
    """Path decomposition is invalid for the instance"""
    pass


class CertificationError(SigmaRhoError):
    """A required certification did not hold"""
    pass


class IsolationError(SigmaRhoError):
    """A floor/mod isolation inequality could not be certified"""
    pass
