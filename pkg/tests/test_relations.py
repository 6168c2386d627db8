"""
Relation realizers and the relation-removal pipelines.
"""

import random
import sys
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.config import get_settings
from src.core import Constraint, GraphRelInstance, Pair, PathDecomposition, rho, sigma, validate_path_decomposition
from src.exceptions import DecompositionError, PreconditionError, ValidationError
from src.oracle import all_witnesses, certify_gadget, count_sets, realized_language
from src.relations import (
    RealizationStage,
    build_forced_selected,
    forced_selected_core,
    infeasible_gadget,
    realize_arbitrary,
    realize_compact,
    realize_eq,
    realize_hw1_decision,
    reduce_to_hw1,
    relation_string,
    remove_relations_decision,
    splice,
)


PERFECT = Pair.parse("sigma=finite:0 rho=finite:1")
CAP = 40


def pair(text: str) -> Pair:
    return Pair.parse(text)


def one_hot(k: int):
    return {tuple(sigma(0) if j == i else rho(0) for j in range(k)) for i in range(k)}


def test_relation_strings():
    assert relation_string(0b101, 3) == (sigma(0), rho(0), sigma(0))


def test_realize_single_empty_selection():
    relation = Constraint(scope=(0,), accepted=(0,))
    gadget = realize_arbitrary(relation, PERFECT)
    report = realized_language(gadget)
    assert report.language.strings == {(rho(0),)}
    assert report.count((rho(0),)) == 1


def test_realize_three_selections_over_five_vertices():
    relation = Constraint.from_sets(range(5), [[0, 1], [0, 1, 2, 4], [3, 4]])
    gadget = realize_arbitrary(relation, PERFECT)
    assert max(c.arity for c in gadget.instance.constraints) <= 2 ** 5 + 1
    assert all(c.is_hw1() or c.is_equality() for c in gadget.instance.constraints)

    result = certify_gadget(gadget)
    assert result.verdict.value == "parsimonious_realizer"
    assert sum(result.report.multiplicity.values()) == 3


def test_realize_full_powerset():
    relation = Constraint(scope=(0, 1), accepted=(0, 1, 2, 3))
    report = realized_language(realize_arbitrary(relation, PERFECT))
    assert len(report.language.strings) == 4
    assert sum(report.multiplicity.values()) == 4


def test_realize_needs_rho_beyond_zero():
    relation = Constraint(scope=(0,), accepted=(1,))
    with pytest.raises(PreconditionError):
        realize_arbitrary(relation, pair("sigma=finite:0 rho=finite:0"))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_realize_eq(k):
    gadget = realize_eq(k, PERFECT)
    report = realized_language(gadget)
    assert report.language.strings == {tuple([sigma(0)] * k), tuple([rho(0)] * k)}
    assert sum(report.multiplicity.values()) == 2
    assert all(c.arity == 2 for c in gadget.instance.constraints)


def test_realize_eq_rejects_zero_arity():
    with pytest.raises(ValidationError):
        realize_eq(0, PERFECT)


@pytest.mark.parametrize("text", [
    "sigma=finite:1 rho=finite:2",
    "sigma=finite:1 rho=finite:1",
    "sigma=finite:0 rho=finite:1",
    "sigma=finite:0,2 rho=finite:1,3",
])
def test_forced_selected(text):
    p = pair(text)
    gadget = build_forced_selected(p)
    assert not gadget.instance.constraints
    result = certify_gadget(gadget, cap=64)
    assert result.is_realizer
    assert result.report.language.strings == {(sigma(p.s_top),)}


@pytest.mark.parametrize("text", [
    "sigma=finite:1 rho=finite:1",
    "sigma=finite:0 rho=finite:1",
    "sigma=finite:2 rho=finite:1",
    "sigma=finite:1,2 rho=finite:2",
])
def test_forced_selected_pins_portal_neighbours(text):
    p = pair(text)
    gadget = build_forced_selected(p)
    hood = gadget.instance.adjacency()[gadget.portals[0]]
    every = all_witnesses(gadget, cap=64)
    assert set(every) == {(sigma(p.s_top),)}
    seen = {frozenset(v for v in hood if v in sel) for sels in every.values() for sel in sels}
    assert len(seen) == 1


def test_forced_core_portal_is_not_pinned():
    p = pair("sigma=finite:0 rho=finite:1")
    report = realized_language(forced_selected_core(p))
    assert report.language.strings == {(sigma(0),), (rho(2),)}


@pytest.mark.parametrize("text", [
    "sigma=finite:0 rho=finite:0,1",
    "sigma=cofinite: rho=finite:1",
])
def test_forced_selected_preconditions(text):
    with pytest.raises(PreconditionError):
        build_forced_selected(pair(text))


@pytest.mark.parametrize("text,k", [
    ("sigma=finite:0 rho=finite:1", 2),
    ("sigma=finite:0 rho=finite:2", 3),
    ("sigma=finite:0 rho=finite:1,2", 2),
    ("sigma=finite:0 rho=finite:1", 1),
])
def test_hw1_decision(text, k):
    gadget = realize_hw1_decision(k, pair(text))
    assert not gadget.instance.constraints
    assert realized_language(gadget).language.strings == one_hot(k)


def test_infeasible_gadget():
    assert count_sets(infeasible_gadget(PERFECT).instance) == 0


def two_edges(constraints, p=PERFECT):
    return GraphRelInstance.plain(4, [(0, 1), (2, 3)], p, constraints=tuple(constraints))


def test_splice_eq_realizer_keeps_count():
    inst = two_edges([Constraint.equality([0, 2])])
    pd = PathDecomposition.of([[0, 1, 2, 3]])
    result = splice(inst, pd, 0, realize_eq(2, PERFECT))
    assert all(c.is_hw1() for c in result.instance.constraints)
    assert validate_path_decomposition(result.instance, result.decomposition).valid
    assert result.mapping[0] == 0 and result.mapping[1] == 2
    assert count_sets(result.instance) == count_sets(inst) == 2


def test_reduce_to_hw1_is_parsimonious():
    p = pair("sigma=finite:0,1 rho=finite:1,2")
    inst = GraphRelInstance.plain(
        4, [(0, 1), (1, 2), (2, 3)], p,
        constraints=(Constraint.from_sets([0, 1, 3], [[0], [1, 3], []]), Constraint.equality([0, 3])),
    )
    pd = PathDecomposition.of([[0, 1, 3], [1, 2, 3]])
    out, out_pd, report = reduce_to_hw1(inst, pd)

    assert all(c.is_hw1() for c in out.constraints)
    assert validate_path_decomposition(out, out_pd).valid
    assert report.width_out - report.width_in <= report.width_constant
    assert RealizationStage.TO_HW1_EQ in report.stage_sizes
    assert count_sets(out, cap=CAP) == count_sets(inst)


def test_decision_pipeline_keeps_solvability():
    solvable = two_edges([Constraint.hw_eq([0, 2], 1)])
    pd = PathDecomposition.of([[0, 1, 2], [0, 2, 3]])
    out, out_pd, report = remove_relations_decision(solvable, pd)
    assert not out.constraints
    assert validate_path_decomposition(out, out_pd).valid
    assert report.width_out - report.width_in <= report.width_constant
    assert count_sets(solvable) == 2
    assert count_sets(out, cap=CAP) > 0

    blocked = GraphRelInstance.plain(3, [(0, 2), (2, 1)], PERFECT, constraints=(Constraint.hw_eq([0, 1], 1),))
    out, out_pd, _ = remove_relations_decision(blocked, PathDecomposition.of([[0, 1, 2]]))
    assert count_sets(blocked) == 0
    assert count_sets(out, cap=CAP) == 0


DECISION_PAIRS = [
    "sigma=finite:0 rho=finite:1",
    "sigma=finite:1 rho=finite:1",
    "sigma=finite:0 rho=finite:1,2",
    "sigma=finite:1 rho=finite:1,2",
]


def random_decision_instance(rng: random.Random, p: Pair) -> GraphRelInstance:
    n = rng.randint(2, 4)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.4]
    constraints = tuple(
        Constraint.hw_eq(rng.sample(range(n), rng.randint(1, min(3, n))), 1)
        for _ in range(rng.randint(1, 2))
    )
    return GraphRelInstance.plain(n, edges, p, constraints=constraints)


def test_decision_pipeline_sweep():
    rng = random.Random(get_settings().seed)
    outcomes = set()
    for i in range(24):
        p = pair(DECISION_PAIRS[i % len(DECISION_PAIRS)])
        inst = random_decision_instance(rng, p)
        out, out_pd, report = remove_relations_decision(inst, PathDecomposition.single_bag(inst.n))
        assert not out.constraints
        assert validate_path_decomposition(out, out_pd).valid
        assert report.width_out - report.width_in <= report.width_constant
        solvable = count_sets(inst) > 0
        assert (count_sets(out, cap=48) > 0) == solvable, f"{p} {inst.edges} {inst.constraints}"
        outcomes.add(solvable)
    assert outcomes == {True, False}


def test_decision_pipeline_without_relations_is_identity():
    inst = two_edges([])
    pd = PathDecomposition.of([[0, 1], [2, 3]])
    out, out_pd, report = remove_relations_decision(inst, pd)
    assert out == inst
    assert out_pd == pd
    assert report.realizations == ()


def test_decision_pipeline_preconditions():
    pd = PathDecomposition.of([[0, 1, 2, 3]])
    with pytest.raises(PreconditionError):
        remove_relations_decision(two_edges([], pair("sigma=finite:0 rho=finite:0,1")), pd)
    with pytest.raises(PreconditionError):
        remove_relations_decision(two_edges([], pair("sigma=finite:0 rho=cofinite:0")), pd)
    with pytest.raises(DecompositionError):
        remove_relations_decision(two_edges([]), PathDecomposition.of([[0, 1], [2]]))


@pytest.mark.parametrize("sets", [
    [[0], [0, 1], []],
    [[0, 1], [0, 1, 2], [2]],
    [[1]],
])
def test_realize_compact(sets):
    arity = max(max((max(s) for s in sets if s), default=0) + 1, 2)
    relation = Constraint.from_sets(range(arity), sets)
    gadget = realize_compact(relation, PERFECT)
    assert all(c.is_hw1() for c in gadget.instance.constraints)
    assert len(gadget.instance.constraints) == 1 + arity

    result = certify_gadget(gadget)
    assert result.verdict.value == "parsimonious_realizer"
    assert sum(result.report.multiplicity.values()) == len(relation.accepted)


def test_reduce_to_hw1_compact_keeps_count():
    inst = GraphRelInstance.plain(
        3, [(0, 1), (1, 2)], PERFECT,
        constraints=(Constraint.from_sets([0, 2], [[0], [0, 2], []]), Constraint.equality([0, 1])),
    )
    out, out_pd, report = reduce_to_hw1(inst, PathDecomposition.single_bag(3), compact=True)
    assert all(c.is_hw1() for c in out.constraints)
    assert validate_path_decomposition(out, out_pd).valid
    assert list(report.stage_sizes) == [RealizationStage.TO_HW1_EQ]
    assert count_sets(out, cap=CAP) == count_sets(inst)
