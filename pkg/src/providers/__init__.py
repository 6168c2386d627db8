"""Provider gadgets with declared languages and recorded witnesses"""

from .builder import Attached, GadgetBuilder, uniform
from .degree import DegreeBipartite, build_degree_bipartite, smallest_padding
from .simple import circulant, circulant_edges, first_member, lr_block, rho_ladder, sigma_rho_provider
from .mixed import bezout, core_structure, delta_triple, rho_m_sigma0, triple_lsr
from .structured import even_all, even_single, mixed_pair, pair_ladder
from .parsimonious import Via, cofinite_rho_aux, cofinite_sigma_aux, parsimonious_sigma_rho
from .registry import ProviderKind, ProviderType, build_provider

__all__ = [
    "Attached",
    "GadgetBuilder",
    "uniform",
    "DegreeBipartite",
    "build_degree_bipartite",
    "smallest_padding",
    "circulant",
    "circulant_edges",
    "first_member",
    "lr_block",
    "rho_ladder",
    "sigma_rho_provider",
    "bezout",
    "core_structure",
    "delta_triple",
    "rho_m_sigma0",
    "triple_lsr",
    "even_all",
    "even_single",
    "mixed_pair",
    "pair_ladder",
    "Via",
    "cofinite_rho_aux",
    "cofinite_sigma_aux",
    "parsimonious_sigma_rho",
    "ProviderKind",
    "ProviderType",
    "build_provider",
]
