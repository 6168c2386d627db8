"""
Manager families: block structure and unique managed solutions.
"""

import sys
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core import ManagerCase, Pair, rho, sigma
from src.exceptions import PreconditionError
from src.managers import (
    LBetaSpec,
    build_manager,
    build_manager_from_provider,
    quad_provider,
    tail_length,
)
from src.oracle import ManagerCertificate, check_manager_structure, certify_manager, evaluate_selection
from src.providers import lr_block, sigma_rho_provider


def pair(text: str) -> Pair:
    return Pair.parse(text)


def assert_certified(mi, cap=None):
    result = certify_manager(mi, cap=cap)
    assert isinstance(result, ManagerCertificate), result
    return result


def test_l_beta_language_sizes():
    assert len(LBetaSpec(d=1, beta=0).language()) == 3
    assert len(LBetaSpec(d=1, beta=1).language()) == 11
    assert len(LBetaSpec(d=2, beta=0).language()) == 7
    spec = LBetaSpec(d=2, beta=1)
    assert spec.contains((rho(1), sigma(1), sigma(1), sigma(0)))
    assert not spec.contains((rho(1), rho(0), sigma(1), sigma(1)))
    assert not spec.contains((sigma(1), sigma(0), sigma(0), sigma(0)))


def test_tail_length():
    assert tail_length(LBetaSpec(d=2, beta=0), 1) == 1
    assert tail_length(LBetaSpec(d=2, beta=0), 2) == 2
    assert tail_length(LBetaSpec(d=2, beta=1), 1) == 2


def test_rcase_edge_pair():
    p = pair("sigma=finite:0 rho=finite:1")
    manager = build_manager(ManagerCase.RCASE, p)
    assert set(manager.alphabet) == {rho(0), rho(1)}
    for rank in (1, 2):
        cert = assert_certified(manager.at_rank(rank))
        assert len(cert.solutions) == 2 ** rank


def test_rcase_solution_matches_certificate():
    manager = build_manager(ManagerCase.RCASE, pair("sigma=finite:0 rho=finite:1"))
    mi = manager.at_rank(2)
    cert = assert_certified(mi)
    for x, selection in cert.solutions.items():
        assert mi.solution(x) == selection


def test_scase_blueprint():
    p = pair("sigma=finite:1 rho=finite:1")
    manager = build_manager(ManagerCase.SCASE, p)
    assert set(manager.alphabet) == {sigma(0), sigma(1)}
    one = manager.at_rank(1)
    two = manager.at_rank(2)
    assert one.bound == two.bound
    assert_certified(one)
    cert = assert_certified(two)
    for x, selection in cert.solutions.items():
        assert two.solution(x) == selection


def test_scase_structure_at_higher_ranks():
    manager = build_manager(ManagerCase.SCASE, pair("sigma=finite:1 rho=finite:1"))
    bounds = set()
    for rank in range(1, 5):
        mi = manager.at_rank(rank)
        assert check_manager_structure(mi) is None
        assert len(mi.distinguished) == rank
        bounds.add(mi.bound)
    assert len(bounds) == 1


def test_acase_blueprint():
    p = pair("sigma=finite:1 rho=finite:0,1")
    manager = build_manager(ManagerCase.ACASE, p)
    assert len(manager.alphabet) == p.s_top + p.r_top + 2 == 4
    assert_certified(manager.at_rank(1))


def test_acase_sigma_zero():
    p = pair("sigma=finite:0 rho=finite:0,1")
    manager = build_manager(ManagerCase.ACASE, p)
    assert set(manager.alphabet) == {sigma(0), rho(0), rho(1)}
    for rank in (1, 2):
        assert_certified(manager.at_rank(rank))


def test_acase_empty_graph():
    p = pair("sigma=finite:0 rho=cofinite:")
    manager = build_manager(ManagerCase.ACASE, p)
    mi = manager.at_rank(2)
    assert mi.instance.n == 2
    assert mi.bound == 0
    assert_certified(mi)


def test_even_case():
    p = pair("sigma=finite:0,2 rho=finite:0,2")
    manager = build_manager(ManagerCase.EVEN, p)
    assert set(manager.alphabet) == {rho(0), rho(2), sigma(0), sigma(2)}
    assert_certified(manager.at_rank(1))


def test_case_preconditions():
    with pytest.raises(PreconditionError):
        build_manager(ManagerCase.SCASE, pair("sigma=finite:0 rho=finite:1"))
    with pytest.raises(PreconditionError):
        build_manager(ManagerCase.ACASE, pair("sigma=finite:1 rho=finite:0"))
    with pytest.raises(PreconditionError):
        build_manager(ManagerCase.EVEN, pair("sigma=finite:1 rho=finite:1"))


def test_quad_provider_witnesses():
    p = pair("sigma=finite:1 rho=finite:0,1")
    g = quad_provider(p)
    assert len(g.declared_language) == 15
    for x in g.declared_language.sorted():
        assert LBetaSpec(d=2, beta=1).contains(x)
        assert evaluate_selection(g.instance, g.witness(x), g.portals) == x


def test_blueprint_rejects_wrong_provider():
    p = pair("sigma=finite:1 rho=finite:1")
    with pytest.raises(PreconditionError):
        build_manager_from_provider(LBetaSpec(d=2, beta=0), sigma_rho_provider(p, 1, 1), 1)
    with pytest.raises(PreconditionError):
        build_manager_from_provider(LBetaSpec(d=1, beta=0), lr_block(p, 1), 1)


def test_manager_srg_has_blocks():
    manager = build_manager(ManagerCase.RCASE, pair("sigma=finite:0 rho=finite:1"))
    text = manager.at_rank(2).to_srg()
    assert "block 1 B" in text
    assert "block 2 Bbar" in text
