"""
Sets, pairs, states, instances and path decompositions.
"""

import random
import sys
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core import (
    UNBOUNDED,
    Constraint,
    GraphRelInstance,
    InstanceBuilder,
    IntSet,
    Language,
    ManagerCase,
    Pair,
    PathDecomposition,
    c_sigma_rho,
    compute_tops,
    invert_state,
    is_trivial,
    manager_eligibility,
    max_structured,
    parse_string,
    repair,
    rho,
    sigma,
    splice_after,
    string_code,
    trivial_count,
    validate_path_decomposition,
    weight_vector,
)
from src.config import get_settings
from src.exceptions import SetParseError, TrivialPairError, UndefinedTopError, ValidationError
from src.oracle import count_sets


def pair(text: str) -> Pair:
    return Pair.parse(text)


def test_intset_parse_and_membership():
    s = IntSet.parse("finite:4,2")
    assert s.support == (2, 4)
    assert 2 in s and 3 not in s
    c = IntSet.parse("cofinite:0,2")
    assert 0 not in c and 1 in c and 2 not in c and 100 in c
    assert IntSet.parse("cofinite:").is_everything
    assert IntSet.parse("empty").is_empty


def test_intset_parse_errors():
    with pytest.raises(SetParseError):
        IntSet.parse("finite:a")
    with pytest.raises(SetParseError):
        IntSet.parse("finite:-1")
    with pytest.raises(SetParseError):
        IntSet.parse("mostly:1")


def test_tops():
    assert IntSet.finite(2, 4).top == 4
    assert IntSet.cofinite(0, 2).top == 3
    assert IntSet.everything().top == 0
    assert compute_tops(pair("sigma=finite:2,4 rho=cofinite:0,2")) == (4, 3)
    with pytest.raises(UndefinedTopError):
        IntSet.empty().top


def test_finite_core():
    assert IntSet.finite(1, 3).finite_core() == IntSet.finite(1, 3)
    assert IntSet.cofinite(0, 2).finite_core() == IntSet.finite(3, 4)
    assert IntSet.everything().finite_core() == IntSet.finite(0, 1)


def test_max_structured():
    assert max_structured(pair("sigma=finite:0,3 rho=finite:3")) == 3
    assert max_structured(pair("sigma=finite:0,3 rho=finite:3,4")) == 1
    assert max_structured(pair("sigma=finite:0 rho=finite:1")) is UNBOUNDED
    assert max_structured(pair("sigma=finite:0,2 rho=cofinite:0")) == 1


def test_c_sigma_rho():
    assert c_sigma_rho(pair("sigma=cofinite: rho=cofinite:0")) == 3
    assert c_sigma_rho(pair("sigma=finite:0,3 rho=finite:3,4")) == 9
    assert c_sigma_rho(pair("sigma=finite:0 rho=finite:1")) == 2
    assert c_sigma_rho(pair("sigma=finite:0,2 rho=finite:0,2")) == 4
    with pytest.raises(TrivialPairError):
        c_sigma_rho(pair("sigma=finite:1 rho=finite:0"))


def test_invert_state():
    p = pair("sigma=finite:4 rho=finite:2")
    assert invert_state(sigma(1), p) == sigma(3)
    assert invert_state(rho(0), p) == rho(2)
    with pytest.raises(ValidationError):
        invert_state(rho(3), p)


def test_trivial_pairs():
    everything = pair("sigma=cofinite: rho=cofinite:")
    assert is_trivial(everything).trivial
    assert trivial_count(everything, 5, [(0, 1)]) == 32

    triangle = [(0, 1), (1, 2), (0, 2)]
    independent = pair("sigma=finite:2 rho=finite:0")
    assert is_trivial(independent).rule == "components"
    assert trivial_count(independent, 3, triangle) == 2

    assert not is_trivial(pair("sigma=cofinite:0 rho=cofinite:0")).trivial


TRIVIAL_PAIRS = [
    "sigma=cofinite: rho=cofinite:",
    "sigma=finite:2 rho=finite:0",
    "sigma=cofinite: rho=finite:0",
    "sigma=finite:0,1 rho=finite:0",
    "sigma=cofinite:0 rho=finite:0",
]


def test_trivial_closed_forms_on_random_graphs():
    rng = random.Random(get_settings().seed)
    for i in range(50):
        p = pair(TRIVIAL_PAIRS[i % len(TRIVIAL_PAIRS)])
        n = rng.randint(1, 10)
        density = rng.choice([0.1, 0.3, 0.6])
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < density]
        counted = count_sets(GraphRelInstance.plain(n, edges, p))
        assert trivial_count(p, n, edges) == counted, f"{p} on {n} vertices {edges}"
        if is_trivial(p).rule == "all_subsets":
            assert counted == 2 ** n
        else:
            assert counted & (counted - 1) == 0


def test_manager_eligibility():
    assert manager_eligibility(pair("sigma=finite:0 rho=finite:1")) == [ManagerCase.RCASE]
    cases = manager_eligibility(pair("sigma=finite:1 rho=finite:0,1"))
    assert ManagerCase.SCASE in cases and ManagerCase.ACASE in cases
    assert ManagerCase.EVEN in manager_eligibility(pair("sigma=finite:0,2 rho=finite:0,2"))
    assert manager_eligibility(pair("sigma=finite:1 rho=finite:0")) == []


def test_alphabet():
    p = pair("sigma=finite:1 rho=finite:0,2")
    assert p.alphabet() == [sigma(0), sigma(1), rho(0), rho(1), rho(2)]
    assert p.t_top == 2


def test_weight_vector():
    assert weight_vector((sigma(2), rho(0), rho(3))) == ((2, 0, 3), 5)
    assert weight_vector(()) == ((), 0)


def test_state_strings():
    x = parse_string("s0 r1")
    assert x == (sigma(0), rho(1))
    assert parse_string("σ0ρ1") == x
    assert string_code(x) == "s0 r1"
    assert sigma(3) is sigma(3)
    lang = Language.parse(2, ["s0 r1", "r1 s0"])
    assert x in lang and len(lang) == 2
    with pytest.raises(ValidationError):
        Language.of(2, [(sigma(0),)])


def test_constraint_masks():
    c = Constraint.from_sets([4, 7, 9], [{4}, {7, 9}, {9, 7}])
    assert c.accepted == (1, 6)
    assert c.mask_of({9}) == 4
    assert Constraint.hw_eq([0, 1, 2], 1).is_hw1()
    assert Constraint.equality([0, 1]).is_equality()
    with pytest.raises(ValidationError):
        Constraint(scope=(0, 0), accepted=(0,))


def test_builder_paste_identifies_portals():
    p = pair("sigma=finite:0 rho=finite:1")
    edge = GraphRelInstance.plain(2, [(0, 1)], p)
    b = InstanceBuilder.for_pair(p)
    hub = b.add_vertex()
    first = b.paste(edge, {0: hub})
    second = b.paste(edge, {0: hub})
    inst = b.freeze()
    assert inst.n == 3
    assert first[1] != second[1]
    assert len(inst.edges) == 2


def test_builder_paste_translates_base_and_bounds():
    p = pair("sigma=finite:0 rho=finite:1")
    other = pair("sigma=finite:1 rho=finite:1")
    extra = pair("sigma=finite:1 rho=finite:0")
    inner = InstanceBuilder.for_pair(other)
    inner.add_vertex()
    inner.add_vertex(inner.use_pair(extra, 1))
    inner.add_edge(0, 1)
    gadget = inner.freeze()

    b = InstanceBuilder.for_pair(p)
    hub = b.add_vertex()
    first = b.paste(gadget)
    second = b.paste(gadget, {0: hub})
    inst = b.freeze()
    assert inst.pair_of(hub) == p
    assert inst.pair_of(first[0]) == other
    assert inst.pair_of(first[1]) == extra and inst.pair_of(second[1]) == extra
    assert inst.family.bound(inst.label(first[1])) == 2
    assert inst.family.bound(0) is None


def test_path_decomposition_examples():
    p = pair("sigma=finite:0 rho=finite:1")
    path = GraphRelInstance.plain(3, [(0, 1), (1, 2)], p)
    assert validate_path_decomposition(path, PathDecomposition.single_bag(3)).width == 2
    report = validate_path_decomposition(path, PathDecomposition.of([[0, 1], [1, 2]]))
    assert report.valid and report.width == 1

    edge = GraphRelInstance.plain(2, [(0, 1)], p)
    report = validate_path_decomposition(edge, PathDecomposition.of([[0], [1]]))
    assert not report.valid and report.violation == "T.2"


def test_path_decomposition_violations():
    p = pair("sigma=finite:0 rho=finite:1")
    path = GraphRelInstance.plain(3, [(0, 1), (1, 2)], p)
    missing = validate_path_decomposition(path, PathDecomposition.of([[0, 1]]))
    assert missing.violation == "T.1" and missing.witness == (2,)
    broken = validate_path_decomposition(path, PathDecomposition.of([[0, 1], [1, 2], [0]]))
    assert broken.violation == "T.3"

    scoped = path.with_constraints([Constraint.hw_eq([0, 2], 1)])
    report = validate_path_decomposition(scoped, PathDecomposition.of([[0, 1], [1, 2]]))
    assert report.violation == "T.2-scope"


def test_repair_and_splice():
    p = pair("sigma=finite:0 rho=finite:1")
    path = GraphRelInstance.plain(4, [(0, 1), (1, 2), (2, 3)], p)
    fixed = repair(path, [[0, 1], [3]])
    assert validate_path_decomposition(path, fixed).valid

    pd = PathDecomposition.of([[0, 1], [1, 2], [2, 3]])
    spliced = splice_after(pd, 1, [[7], [8]])
    assert spliced.bags[2] == (1, 2, 7)
    assert spliced.bags[3] == (1, 2, 8)
    assert len(spliced) == 5
