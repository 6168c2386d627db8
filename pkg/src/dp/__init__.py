"""Path-decomposition dynamic programming"""

from .counter import count_dp, state_space_size

__all__ = [
    "count_dp",
    "state_space_size",
]
