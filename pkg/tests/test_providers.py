"""
Provider constructions, certified against the exhaustive oracle.
"""

import sys
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core import InstanceBuilder, Language, Pair, rho, sigma
from src.exceptions import PreconditionError
from src.oracle import (
    PortalGadget,
    Verdict,
    certify_gadget,
    certify_witnesses,
    closed_neighbourhoods_disjoint,
    is_bipartite,
    is_regular,
)
from src.providers import (
    ProviderKind,
    ProviderType,
    Via,
    bezout,
    build_degree_bipartite,
    build_provider,
    circulant,
    cofinite_rho_aux,
    cofinite_sigma_aux,
    delta_triple,
    even_all,
    even_single,
    lr_block,
    mixed_pair,
    pair_ladder,
    parsimonious_sigma_rho,
    rho_ladder,
    rho_m_sigma0,
    sigma_rho_provider,
    smallest_padding,
    triple_lsr,
)


def pair(text: str) -> Pair:
    return Pair.parse(text)


def assert_provider(gadget: PortalGadget, cap: int = 26):
    result = certify_gadget(gadget, cap=cap)
    assert result.is_provider, f"{gadget.name}: {result.reason} {result.offending}"
    return result


def test_sigma_rho_edge():
    """s=0, r=1 for ({0},{1}) is an edge with one portal"""
    g = sigma_rho_provider(pair("sigma=finite:0 rho=finite:1"), 0, 1)
    assert g.n == 2
    assert g.instance.edges == ((0, 1),)
    assert g.portals == (0,)
    result = assert_provider(g)
    assert result.report.language.strings == g.declared_language.strings


def test_sigma_rho_clique():
    """r = 0 gives a clique on s+1 vertices"""
    g = sigma_rho_provider(pair("sigma=finite:1 rho=cofinite:"), 1, 0)
    assert g.n == 2
    assert g.declared_language == Language.of(1, [(sigma(1),), (rho(0),)])
    assert_provider(g)


def test_sigma_rho_larger():
    g = sigma_rho_provider(pair("sigma=finite:2 rho=finite:2"), 2, 2)
    assert g.n == 12
    assert_provider(g)


def test_sigma_rho_precondition():
    with pytest.raises(PreconditionError):
        sigma_rho_provider(pair("sigma=finite:0 rho=finite:1"), 1, 1)


def test_deleted_edge_is_detected():
    """Removing the only edge loses rho_1"""
    g = sigma_rho_provider(pair("sigma=finite:0 rho=finite:1"), 0, 1)
    b = InstanceBuilder.from_instance(g.instance)
    b.remove_edge(0, 1)
    broken = g.model_copy(update={"instance": b.freeze()})
    result = certify_gadget(broken)
    assert result.verdict == Verdict.FAIL
    assert result.offending == (rho(1),)


def test_rho_ladder():
    g = rho_ladder(pair("sigma=finite:0 rho=finite:1"))
    assert g.declared_language == Language.of(1, [(rho(0),), (rho(1),)])
    assert_provider(g)

    wide = rho_ladder(pair("sigma=finite:0 rho=finite:0,1,2"))
    assert len(wide.declared_language) == 3
    assert_provider(wide)


def test_circulant():
    g = circulant(pair("sigma=finite:0 rho=finite:1"), 4, 2)
    assert is_bipartite(g)
    assert is_regular(g, 2)
    for i in range(4):
        assert (i, 4 + i) in g.instance.edges


def test_degree_bipartite_examples():
    one = build_degree_bipartite([1], [1], 1)
    assert one.padding == 1
    assert one.degree_left(0) == 1 and one.degree_right(0) == 1
    assert one.degree_left(1) == 1 and one.degree_right(1) == 1

    empty = build_degree_bipartite([], [], 0)
    assert empty.padding == 0
    assert empty.edges == ()

    g = build_degree_bipartite([2, 1], [3], 3)
    assert g.padding == 3
    assert [g.degree_left(i) for i in range(g.left_size)] == [2, 1, 3, 3, 3]
    assert [g.degree_right(j) for j in range(g.right_size)] == [3, 3, 3, 3]
    assert len(set(g.edges)) == len(g.edges)


def test_degree_bipartite_rejects_bad_input():
    with pytest.raises(PreconditionError):
        build_degree_bipartite([2], [1], 2)
    with pytest.raises(PreconditionError):
        build_degree_bipartite([3], [3], 2)


def test_smallest_padding():
    plain = smallest_padding([1], [1], 1)
    assert plain.padding == 0
    assert plain.edges == ((0, 0),)

    g = smallest_padding([2, 1], [3], 3)
    assert g.padding == 2
    assert [g.degree_left(i) for i in range(g.left_size)] == [2, 1, 3, 3]
    assert [g.degree_right(j) for j in range(g.right_size)] == [3, 3, 3]


@pytest.mark.parametrize("values,g", [([6, 10], 2), ([4, 6, 9], 1), ([5], 5), ([3, 3], 3)])
def test_bezout(values, g):
    coeffs, found = bezout(values)
    assert found == g
    assert sum(c * v for c, v in zip(coeffs, values)) == g
    assert all(isinstance(c, int) for c in coeffs)


def test_bezout_of_nothing():
    assert bezout([]) == ([], 0)


def test_triple_lsr():
    g = triple_lsr(pair("sigma=finite:1 rho=finite:1"), 1, 1)
    assert g.n == 6
    assert len(g.declared_language) == 3
    assert_provider(g)


def test_delta_triple_uniform_states():
    p = pair("sigma=finite:1,2 rho=finite:1")
    g = delta_triple(p, s=1, s_prime=2, r=1, k=2)
    assert len(g.portals) == 2
    for x in g.declared_language.sorted():
        assert len(set(x)) == 1
    assert_provider(g, cap=32)


def test_delta_triple_precondition():
    with pytest.raises(PreconditionError):
        delta_triple(pair("sigma=finite:1,2 rho=finite:1"), s=1, s_prime=1, r=1, k=1)


def test_rho_m_sigma0_structure_one():
    g = rho_m_sigma0(pair("sigma=finite:0 rho=finite:0,1"))
    assert g.n == 2
    assert g.declared_language == Language.of(1, [(rho(0),), (rho(1),), (sigma(0),)])
    assert_provider(g)


def test_rho_m_sigma0_with_sigma_generators():
    """rho is a singleton, so the balance goes through the triple providers"""
    g = rho_m_sigma0(pair("sigma=finite:1,2 rho=finite:1"))
    assert g.declared_language == Language.of(1, [(rho(0),), (rho(1),), (sigma(0),)])
    assert_provider(g)


def test_rho_m_sigma0_structure_two():
    p = pair("sigma=finite:0,2 rho=finite:0,2")
    single = rho_m_sigma0(p, m=2)
    assert single.n == 4
    assert single.declared_language == Language.of(1, [(rho(0),), (rho(2),), (sigma(0),)])
    assert_provider(single)

    twin = rho_m_sigma0(p, m=2, two_portal=True)
    assert twin.n == 3
    assert (rho(1), rho(1)) in twin.declared_language
    assert_provider(twin)


def test_rho_m_sigma0_preconditions():
    with pytest.raises(PreconditionError):
        rho_m_sigma0(pair("sigma=finite:0 rho=finite:1"))
    with pytest.raises(PreconditionError):
        rho_m_sigma0(pair("sigma=finite:0 rho=finite:0,1"), two_portal=True)


def test_pair_ladder_and_mixed_pair():
    p = pair("sigma=finite:1 rho=finite:0,1")
    ladder = pair_ladder(p)
    assert closed_neighbourhoods_disjoint(ladder)
    assert len(ladder.declared_language) == 4
    assert_provider(ladder)

    mixed = mixed_pair(p)
    assert closed_neighbourhoods_disjoint(mixed)
    assert (rho(1), sigma(0)) in mixed.declared_language
    assert_provider(mixed)


def test_mixed_pair_without_rho_top():
    p = pair("sigma=finite:1 rho=cofinite:")
    g = mixed_pair(p)
    assert len(g.declared_language) == 3
    assert (rho(1), sigma(0)) not in g.declared_language
    assert_provider(g)


def test_even_providers():
    p = pair("sigma=finite:0,2 rho=finite:0,2")
    single = even_single(p)
    assert single.declared_language == Language.of(
        1, [(rho(0),), (rho(2),), (sigma(0),), (sigma(2),)]
    )
    assert_provider(single)

    everything = even_all(p)
    assert everything.declared_language == single.declared_language
    assert_provider(everything)


def test_lr_block():
    g = lr_block(pair("sigma=finite:1 rho=finite:1"), 1)
    assert g.n == 40
    assert closed_neighbourhoods_disjoint(g)
    assert len(g.declared_language) == 7
    assert certify_witnesses(g).verdict == Verdict.PROVIDER


def test_witness_certification_catches_a_bad_witness():
    g = lr_block(pair("sigma=finite:1 rho=finite:1"), 1)
    x = g.declared_language.sorted()[0]
    broken = g.model_copy(update={"witnesses": {**g.witnesses, x: frozenset()}})
    result = certify_witnesses(broken)
    assert not result.ok
    assert result.offending == x


@pytest.mark.parametrize("via", [Via.RELATION, Via.HW1])
def test_parsimonious_sigma_rho(via):
    g = parsimonious_sigma_rho(pair("sigma=finite:0 rho=finite:1"), via=via)
    result = certify_gadget(g)
    assert result.verdict == Verdict.PARSIMONIOUS_REALIZER
    if via == Via.HW1:
        assert all(c.is_hw1() and c.arity == 2 for c in g.instance.constraints)


def test_parsimonious_hw1_needs_positive_rho():
    with pytest.raises(PreconditionError):
        parsimonious_sigma_rho(pair("sigma=finite:1 rho=finite:0"), via=Via.HW1)


def test_cofinite_auxiliaries():
    sig = cofinite_sigma_aux(pair("sigma=cofinite:0 rho=finite:0,1"))
    assert sig.declared_language == Language.of(1, [(sigma(0),), (sigma(1),), (rho(0),)])
    assert certify_gadget(sig).verdict == Verdict.PARSIMONIOUS_REALIZER

    rh = cofinite_rho_aux(pair("sigma=finite:1 rho=cofinite:0"))
    assert rh.declared_language == Language.of(1, [(sigma(0),), (rho(0),), (rho(1),)])
    assert certify_gadget(rh).verdict == Verdict.PARSIMONIOUS_REALIZER


def test_build_provider_dispatch():
    p = pair("sigma=finite:0 rho=finite:1")
    kind = ProviderKind.parse("sigma_rho", {"s": "0", "r": "1"})
    assert kind.type == ProviderType.SIGMA_RHO
    g = build_provider(kind, p)
    assert g.n == 2

    with pytest.raises(PreconditionError):
        build_provider(ProviderKind(type=ProviderType.SIGMA_RHO, s=0), p)

    grid = build_provider(ProviderKind(type=ProviderType.DEGREE_BIPARTITE, left=(2, 1), right=(3,), a=3), p)
    assert grid.n == 9
