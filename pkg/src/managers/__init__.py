"""Manager families for the four alphabet cases"""

from .manager import LBetaSpec, Manager, ManagerInstance, blocks_from_owner
from .simple import even_manager, mirrored, rho_manager, sigma_zero_manager, two_sided_rank, unary
from .blueprint import Blueprint, build_manager_from_provider, default_alphabet, tail_length
from .cases import build_manager, quad_provider

__all__ = [
    "LBetaSpec",
    "Manager",
    "ManagerInstance",
    "blocks_from_owner",
    "even_manager",
    "mirrored",
    "rho_manager",
    "sigma_zero_manager",
    "two_sided_rank",
    "unary",
    "Blueprint",
    "build_manager_from_provider",
    "default_alphabet",
    "tail_length",
    "build_manager",
    "quad_provider",
]
