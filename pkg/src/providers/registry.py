"""
Dispatch from a provider description to its builder.
"""

from enum import Enum
from typing import Callable, Dict, Optional, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from ..core.pair import Pair
from ..exceptions import PreconditionError
from ..oracle.gadget import PortalGadget
from .builder import GadgetBuilder
from .degree import build_degree_bipartite
from .mixed import delta_triple, rho_m_sigma0, triple_lsr
from .parsimonious import Via, cofinite_rho_aux, cofinite_sigma_aux, parsimonious_sigma_rho
from .simple import circulant, lr_block, rho_ladder, sigma_rho_provider
from .structured import even_all, even_single, mixed_pair, pair_ladder


class ProviderType(str, Enum):
    SIGMA_RHO = "sigma_rho"
    RHO_LADDER = "rho_ladder"
    CIRCULANT = "circulant"
    LR_BLOCK = "lr_block"
    TRIPLE_LSR = "triple_lsr"
    DELTA_TRIPLE = "delta_triple"
    DEGREE_BIPARTITE = "degree_bipartite"
    RHO_M_SIGMA0 = "rho_m_sigma0"
    PAIR_LADDER = "pair_ladder"
    MIXED_PAIR = "mixed_pair"
    EVEN_SINGLE = "even_single"
    EVEN_ALL = "even_all"
    PARSIMONIOUS_SR = "parsimonious_sr"
    COF_SIGMA_AUX = "cof_sigma_aux"
    COF_RHO_AUX = "cof_rho_aux"


class ProviderKind(BaseModel):
    """A provider construction and its parameters; unused fields stay None."""

    model_config = ConfigDict(frozen=True)

    type: ProviderType
    s: Optional[int] = Field(default=None, ge=0)
    s_prime: Optional[int] = Field(default=None, ge=0)
    r: Optional[int] = Field(default=None, ge=0)
    k: Optional[int] = Field(default=None, ge=1)
    n: Optional[int] = Field(default=None, ge=0)
    d: Optional[int] = Field(default=None, ge=0)
    m: Optional[int] = Field(default=None, ge=1)
    a: Optional[int] = Field(default=None, ge=0)
    two_portal: bool = False
    via: Via = Via.RELATION
    left: Tuple[int, ...] = ()
    right: Tuple[int, ...] = ()

    @classmethod
    def parse(cls, name: str, params: Dict[str, str]) -> "ProviderKind":
        """From a CLI-style name and key=value parameters."""
        data: Dict[str, object] = {"type": ProviderType(name)}
        for key, value in params.items():
            if key in ("left", "right"):
                data[key] = tuple(int(v) for v in value.split(",") if v)
            elif key == "two_portal":
                data[key] = value.lower() in ("1", "true", "yes")
            elif key == "via":
                data[key] = Via(value)
            else:
                data[key] = int(value)
        return cls(**data)

    def describe(self) -> str:
        fields = self.model_dump(exclude_defaults=True, exclude={"type"})
        body = ",".join(f"{k}={v}" for k, v in fields.items())
        return f"{self.type.value}({body})"


def _need(kind: ProviderKind, *names: str) -> None:
    missing = [n for n in names if getattr(kind, n) is None]
    if missing:
        raise PreconditionError(kind.type.value, f"missing parameter(s) {', '.join(missing)}")


def _degree_gadget(kind: ProviderKind, pair: Pair) -> PortalGadget:
    graph = build_degree_bipartite(kind.left, kind.right, kind.a)
    b = GadgetBuilder(pair, f"degree_bipartite(a={kind.a},padding={graph.padding})")
    left = b.vertices(graph.left_size)
    right = b.vertices(graph.right_size)
    for i, j in graph.edges:
        b.edge(left[i], right[j])
    return PortalGadget(name=b.name, instance=b.graph.freeze())


_BUILDERS: Dict[ProviderType, Callable[[ProviderKind, Pair], PortalGadget]] = {
    ProviderType.SIGMA_RHO: lambda k, p: sigma_rho_provider(p, k.s, k.r),
    ProviderType.RHO_LADDER: lambda k, p: rho_ladder(p, k.s, k.r),
    ProviderType.CIRCULANT: lambda k, p: circulant(p, k.n, k.d),
    ProviderType.LR_BLOCK: lambda k, p: lr_block(p, k.r, k.s),
    ProviderType.TRIPLE_LSR: lambda k, p: triple_lsr(p, k.s, k.r),
    ProviderType.DELTA_TRIPLE: lambda k, p: delta_triple(p, k.s, k.s_prime, k.r, k.k),
    ProviderType.DEGREE_BIPARTITE: _degree_gadget,
    ProviderType.RHO_M_SIGMA0: lambda k, p: rho_m_sigma0(p, k.m, k.two_portal),
    ProviderType.PAIR_LADDER: lambda k, p: pair_ladder(p),
    ProviderType.MIXED_PAIR: lambda k, p: mixed_pair(p),
    ProviderType.EVEN_SINGLE: lambda k, p: even_single(p),
    ProviderType.EVEN_ALL: lambda k, p: even_all(p),
    ProviderType.PARSIMONIOUS_SR: lambda k, p: parsimonious_sigma_rho(p, k.s, k.r, k.via),
    ProviderType.COF_SIGMA_AUX: lambda k, p: cofinite_sigma_aux(p),
    ProviderType.COF_RHO_AUX: lambda k, p: cofinite_rho_aux(p),
}

_REQUIRED: Dict[ProviderType, Tuple[str, ...]] = {
    ProviderType.SIGMA_RHO: ("s", "r"),
    ProviderType.CIRCULANT: ("n", "d"),
    ProviderType.LR_BLOCK: ("r",),
    ProviderType.TRIPLE_LSR: ("s", "r"),
    ProviderType.DELTA_TRIPLE: ("s", "s_prime", "r", "k"),
    ProviderType.DEGREE_BIPARTITE: ("a",),
}


def build_provider(kind: ProviderKind, pair: Pair) -> PortalGadget:
    """
    Build the gadget described by kind for pair.

    Raises:
        PreconditionError: a parameter is missing or the construction's
            precondition fails for this pair
    """
    _need(kind, *_REQUIRED.get(kind.type, ()))
    gadget = _BUILDERS[kind.type](kind, pair)
    logger.info(f"provider {kind.describe()} for {pair}: {gadget.n} vertices, "
                f"{len(gadget.instance.constraints)} relations")
    return gadget
