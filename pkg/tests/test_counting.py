"""
Counting-side relation removal: interpolation, weighted kernels, gadget
profiles, the individual reduction steps and the case pipelines.
"""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core import (
    Constraint,
    GraphRelInstance,
    InstanceBuilder,
    IntSet,
    Pair,
    PathDecomposition,
    validate_path_decomposition,
)
from src.counting import (
    FORCED,
    LINK_MATRIX,
    SATURATED,
    ZERO_PAIR,
    GadgetClass,
    GadgetProfile,
    Isolation,
    Op,
    OpCode,
    ReductionPlan,
    StepKind,
    apply_counting_step,
    build_winner_or_strong_candidate,
    case_a_steps,
    case_c_steps,
    certified_mirror_link,
    certify_profile,
    classify,
    coefficient_weights,
    counting_case,
    downshift_matrix,
    evaluate_grid,
    evaluate_poly,
    exp_poly_weights,
    interpolate_grid,
    interpolate_poly,
    mirror_link_options,
    pendant_gadget,
    remove_relations_counting,
    run_program,
    selected,
    solve_downshift_weights,
    solve_link_weights,
    step,
    unselected,
)
from src.exceptions import ConstructionError, IsolationError, PreconditionError, ValidationError
from src.oracle import count_sets, ext_table


def pair(text: str) -> Pair:
    return Pair.parse(text)


PERFECT = pair("sigma=finite:1 rho=finite:1")
CODE = pair("sigma=finite:0 rho=finite:1")
LOOSE = pair("sigma=finite:0,1 rho=finite:1")
FREE_RHO = pair("sigma=finite:0,1 rho=cofinite:")
SAT = pair("sigma=cofinite:0 rho=cofinite:")


def single_bag(inst: GraphRelInstance) -> PathDecomposition:
    return PathDecomposition.single_bag(inst.n)


def labelled(base: Pair, n: int, edges, labels=None, constraints=(), weights=None, dagger=False):
    """Instance over base with some vertices carrying extra pairs: labels maps vertex -> (pair, bound)."""
    builder = InstanceBuilder.for_pair(base)
    builder.dagger_mode = dagger
    builder.add_vertices(n)
    for u, v in edges:
        builder.add_edge(u, v)
    for v, (extra, bound) in (labels or {}).items():
        builder.set_label(v, builder.use_pair(extra, bound))
    for c in constraints:
        builder.add_constraint(c)
    for v, w in (weights or {}).items():
        builder.set_weight(v, w)
    return builder.freeze()


def assert_sound(plan: ReductionPlan, source: GraphRelInstance, engine: str = "oracle", **kwargs):
    for query in plan.queries:
        report = validate_path_decomposition(query.instance, query.decomposition)
        assert report.valid, f"{report.violation} {report.detail}"
    expected = count_sets(source)
    assert plan.execute(engine=engine, **kwargs) == expected
    return expected


# interpolation

def test_interpolate_line():
    assert interpolate_poly([(0, 1), (1, 3), (2, 5)]) == [1, 2]
    assert interpolate_poly([(5, 7)]) == [7]


def test_interpolate_rejects_duplicate_nodes():
    with pytest.raises(ValidationError):
        interpolate_poly([(1, 2), (1, 3)])
    with pytest.raises(ValidationError):
        interpolate_poly([])


def test_interpolate_then_evaluate_at_negative_point():
    points = [(x, 3 * x ** 3 - x + Fraction(1, 2)) for x in (1, 2, 4, 8)]
    coefficients = interpolate_poly(points)
    assert evaluate_poly(coefficients, -1) == Fraction(-3) + 1 + Fraction(1, 2)


def test_coefficient_weights_read_constant_term():
    weights = coefficient_weights([1, 2], 0)
    assert weights == [2, -1]
    assert sum(w * (5 + 3 * x) for w, x in zip(weights, [1, 2])) == 5


def test_interpolate_grid_bilinear():
    values = [x * y for x in (0, 1) for y in (0, 1)]
    assert interpolate_grid([[0, 1], [0, 1]], values) == {(1, 1): 1}


def test_interpolate_grid_evaluates_everywhere():
    f = lambda x, y: 2 * x * x * y - 3 * y + 1
    axes = [[1, 2, 4], [1, 3]]
    coefficients = interpolate_grid(axes, [f(x, y) for x in axes[0] for y in axes[1]])
    assert evaluate_grid(coefficients, [Fraction(1, 2), -7]) == f(Fraction(1, 2), -7)


def test_exp_poly_weights():
    f = lambda x: 3 * 2 ** x + 5
    weights = exp_poly_weights([(2, 0), (1, 0)], [1, 2], {(2, 0): 1})
    assert weights == [Fraction(-1, 2), Fraction(1, 2)]
    assert sum(w * f(x) for w, x in zip(weights, [1, 2])) == 3


def test_exp_poly_weights_with_polynomial_part():
    f = lambda x: 7 * 3 ** x + 2 * x * x - x + 4
    terms = [(3, 0), (1, 2)]
    xs = [1, 2, 3, 4]
    constant = exp_poly_weights(terms, xs, {(1, 0): 1})
    assert sum(w * f(x) for w, x in zip(constant, xs)) == 4


def test_exp_poly_weights_errors():
    with pytest.raises(IsolationError):
        exp_poly_weights([(2, 0), (1, 0)], [1, 1], {(2, 0): 1})
    with pytest.raises(ValidationError):
        exp_poly_weights([(2, 0)], [1], {(3, 0): 1})
    with pytest.raises(ValidationError):
        exp_poly_weights([(2, 0), (1, 0)], [1], {(2, 0): 1})


# kernels

def test_downshift_for_z_at_least_one():
    assert solve_downshift_weights(IntSet.at_least(1)) == (1, 0)


def test_downshift_matrix_with_gaps():
    sigma_set = IntSet.cofinite(0, 2, 5)
    matrix = downshift_matrix(sigma_set)
    assert len(matrix) == 7 and all(len(row) == 7 for row in matrix)
    assert matrix[0] == [0, 1, 0, 1, 1, 0, 1]
    assert matrix[6] == [1] * 7

    weights = solve_downshift_weights(sigma_set)
    for alpha in range(12):
        value = sum(w for gamma, w in enumerate(weights) if alpha + gamma in sigma_set)
        assert value == (1 if alpha >= 6 else 0)


def test_downshift_preconditions():
    with pytest.raises(PreconditionError):
        solve_downshift_weights(IntSet.finite(1, 2))
    with pytest.raises(PreconditionError):
        solve_downshift_weights(IntSet.everything())


def test_link_weights():
    link = solve_link_weights()
    assert link.matrix == LINK_MATRIX
    assert link.determinant == -2
    expected = {
        ("none", "none"): Fraction(13, 4), ("none", "a"): Fraction(-7, 4), ("none", "b"): Fraction(-3, 4),
        ("a", "none"): Fraction(-7, 4), ("a", "a"): Fraction(5, 4), ("a", "b"): Fraction(1, 4),
        ("b", "none"): Fraction(-3, 4), ("b", "a"): Fraction(1, 4), ("b", "b"): Fraction(1, 4),
    }
    assert link.weights == expected


@pytest.mark.parametrize("sigma_set,count", [
    (IntSet.at_least(1), 4),
    (IntSet.at_least(2), 6),
    (IntSet.at_least(3), 6),
    (IntSet.cofinite(1, 3), 8),
])
def test_mirror_link_options(sigma_set, count):
    options = mirror_link_options(sigma_set)
    assert len(options) == count
    assert sum(1 for o in options if not o.mirror) == 2
    assert [o.weight for o in options if o.supports] == [1, Fraction(-1, 2)]
    assert max(o.extra for o in options) == sigma_set.top


def test_mirror_link_options_preconditions():
    with pytest.raises(PreconditionError):
        mirror_link_options(IntSet.finite(1))
    with pytest.raises(PreconditionError):
        mirror_link_options(IntSet.everything())


@pytest.mark.parametrize("text", [
    "sigma=cofinite:0 rho=cofinite:",
    "sigma=cofinite:0,1 rho=cofinite:",
    "sigma=cofinite:1 rho=cofinite:",
    "sigma=cofinite:0,2 rho=cofinite:",
    "sigma=cofinite:0,1,2 rho=cofinite:",
])
def test_mirror_link_is_certified(text):
    p = pair(text)
    gadget = certified_mirror_link(p)
    assert gadget.n == 3 + len(mirror_link_options(p.sigma)) + p.s_top - 1
    assert gadget.instance.dagger_mode


# profiles

def test_classify():
    assert classify(8, 0, 4, 0) == GadgetClass.WINNER
    assert classify(2, 1, 1, 0) == GadgetClass.STRONG_CANDIDATE
    assert classify(2, 1, 1, 1) == GadgetClass.CANDIDATE
    assert classify(2, 0, 2, 0) == GadgetClass.NONE
    assert classify(2, 0, 1, 0, higher_zero=False) == GadgetClass.NONE


def test_pendant_gadget_for_perfect_codes():
    table = ext_table(pendant_gadget(CODE))
    assert table.rho(0) == 1 and table.rho(1) == 1


def test_winner_for_perfect_codes():
    gadget, profile = build_winner_or_strong_candidate(CODE)
    assert profile.classification == GadgetClass.WINNER
    assert gadget.n == 6
    certify_profile(gadget, profile)


def test_winner_for_perfect_sets():
    gadget, profile = build_winner_or_strong_candidate(PERFECT)
    assert profile == GadgetProfile.of(8, 0, 4, 0)
    assert gadget.n == 10


def test_strong_candidate():
    gadget, profile = build_winner_or_strong_candidate(LOOSE)
    assert profile == GadgetProfile.of(2, 1, 1, 0)
    assert profile.classification == GadgetClass.STRONG_CANDIDATE
    assert gadget.n == 4


def test_winner_search_is_deterministic():
    first = build_winner_or_strong_candidate(PERFECT, certify=False)
    second = build_winner_or_strong_candidate(PERFECT, certify=False)
    assert first[1] == second[1]
    assert first[0].instance == second[0].instance


def test_winner_search_preconditions():
    with pytest.raises(PreconditionError):
        build_winner_or_strong_candidate(FREE_RHO)
    with pytest.raises(PreconditionError):
        build_winner_or_strong_candidate(pair("sigma=finite:1 rho=finite:0"))


# programs

def test_run_program():
    program = [Op.query(0), Op.query(1), Op.binary(OpCode.SUB), Op.push(3), Op.binary(OpCode.MUL)]
    assert run_program(program, [Fraction(7), Fraction(2)]) == 15
    program = [Op.query(0), Op.push(8), Op.binary(OpCode.MOD), Op.check(0, 5, "small")]
    assert run_program(program, [Fraction(19)]) == 3
    with pytest.raises(IsolationError):
        run_program(program, [Fraction(22)])
    with pytest.raises(ConstructionError):
        run_program([Op.query(0), Op.push(0), Op.binary(OpCode.DIV)], [Fraction(1)])


def test_program_interpolation_ops():
    values = [Fraction(1 + 2 * x) for x in (1, 2)]
    assert run_program([Op.query(0), Op.query(1), Op.coeff([1, 2], 0)], values) == 1
    grid = [Fraction(x * y + 1) for x in (1, 2) for y in (1, 2)]
    program = [Op.query(k) for k in range(4)] + [Op.evalgrid([[1, 2], [1, 2]], [3, -1])]
    assert run_program(program, grid) == -2


def test_transcript_lists_queries_and_program():
    inst = GraphRelInstance.plain(2, [(0, 1)], PERFECT)
    plan = ReductionPlan.identity(inst, single_bag(inst), note="plain").then(step(StepKind.FORCE_UNSELECTED))
    text = plan.transcript()
    assert "srg v1" in text and "force_unselected" in text and "plain" in text


# steps, case A

def c4_with_relation(p: Pair) -> GraphRelInstance:
    return GraphRelInstance.plain(4, [(0, 1), (1, 2), (2, 3), (3, 0)], p,
                                  constraints=(Constraint.hw_eq([0, 2], 1),))


def test_hw1_to_unselected_one():
    inst = c4_with_relation(PERFECT)
    plan = apply_counting_step(step(StepKind.HW1_TO_UNSEL_ONE), inst, single_bag(inst))
    query = plan.queries[0].instance
    assert not query.constraints and query.n == 5
    assert assert_sound(plan, inst) == 4


def test_hw1_to_hw_le1():
    inst = GraphRelInstance.plain(3, [(0, 1), (1, 2)], CODE, constraints=(Constraint.hw_eq([0, 2], 1),))
    plan = apply_counting_step(step(StepKind.HW1_TO_HW_LE1), inst, single_bag(inst))
    assert plan.query_count == 2
    assert all(c.is_hw_le1() for q in plan.queries for c in q.instance.constraints)
    assert_sound(plan, inst)


def test_hw_le1_to_vertex():
    inst = GraphRelInstance.plain(3, [(0, 1), (1, 2)], CODE, constraints=(Constraint.hw_at_most([0, 2], 1),))
    plan = apply_counting_step(step(StepKind.HW_LE1_TO_VERTEX), inst, single_bag(inst))
    assert plan.queries[0].instance.family.index_of(unselected(IntSet.finite(0, 1))) is not None
    assert_sound(plan, inst)


@pytest.mark.parametrize("p", [PERFECT, FREE_RHO, CODE])
def test_hw1_to_hw_ge1(p):
    inst = GraphRelInstance.plain(3, [(0, 1), (1, 2)], p, constraints=(Constraint.hw_eq([0, 1, 2], 1),))
    plan = apply_counting_step(step(StepKind.HW1_TO_HW_GE1), inst, single_bag(inst))
    assert all(c.is_hw_ge1() for q in plan.queries for c in q.instance.constraints)
    assert_sound(plan, inst, engine="dp")


def test_hw_ge1_to_vertex():
    inst = GraphRelInstance.plain(3, [(0, 1)], pair("sigma=finite:0,1 rho=cofinite:0"),
                                  constraints=(Constraint.hw_at_least([0, 2], 1),))
    plan = apply_counting_step(step(StepKind.HW_GE1_TO_VERTEX), inst, single_bag(inst))
    assert_sound(plan, inst)


def test_shift_rho_by_zero_is_identity():
    inst = c4_with_relation(PERFECT)
    pd = single_bag(inst)
    plan = apply_counting_step(step(StepKind.SHIFT_RHO_BY_I, amount=0), inst, pd)
    assert plan.query_count == 1
    assert plan.queries[0].instance == inst and plan.queries[0].decomposition == pd


def test_shift_rho_by_one():
    p = pair("sigma=finite:1 rho=finite:2")
    inst = labelled(p, 4, [(0, 1), (1, 2), (2, 3)], {3: (unselected(IntSet.finite(1)), None)})
    plan = apply_counting_step(step(StepKind.SHIFT_RHO_BY_I, amount=1), inst, single_bag(inst))
    query = plan.queries[0].instance
    assert query.pair_of(3) == unselected(p.rho)
    assert_sound(plan, inst)


def test_force_unselected_with_winner():
    inst = labelled(CODE, 5, [(0, 1), (1, 2), (2, 3), (3, 4)],
                    {0: (selected(CODE.sigma), None), 4: (unselected(CODE.rho), None)})
    plan = apply_counting_step(step(StepKind.FORCE_UNSELECTED), inst, single_bag(inst))
    assert plan.query_count == 4
    assert all(q.instance.is_plain for q in plan.queries)
    assert assert_sound(plan, inst, engine="dp") == 1


def test_force_unselected_with_strong_candidate():
    inst = labelled(LOOSE, 3, [(0, 1), (0, 2)], {2: (unselected(LOOSE.rho), None)})
    plan = apply_counting_step(step(StepKind.FORCE_UNSELECTED), inst, single_bag(inst))
    assert plan.query_count == 4
    assert max(q.instance.n for q in plan.queries) <= 16
    assert all(q.instance.is_plain for q in plan.queries)
    assert assert_sound(plan, inst) == 2


def test_force_unselected_preconditions():
    inst = labelled(FREE_RHO, 2, [(0, 1)], {1: (selected(FREE_RHO.sigma), None)})
    with pytest.raises(PreconditionError):
        apply_counting_step(step(StepKind.FORCE_UNSELECTED), inst, single_bag(inst))


def test_case_a_pipeline_end_to_end():
    inst = c4_with_relation(PERFECT)
    plan = remove_relations_counting(inst, single_bag(inst))
    assert [s.kind for s in plan.queries[0].pending] == [s.kind for s in case_a_steps(PERFECT)]
    expanded = plan.expand()
    assert expanded.is_expanded
    assert sorted(q.instance.n for q in expanded.queries) == [14, 23]
    assert all(q.instance.is_plain for q in expanded.queries)
    assert expanded.execute(engine="oracle") == 4


def test_case_a_pipeline_from_arbitrary_relation():
    inst = GraphRelInstance.plain(2, [(0, 1)], CODE, constraints=(Constraint(scope=(0, 1), accepted=(1, 3, 0)),))
    plan = remove_relations_counting(inst, single_bag(inst))
    first = plan.queries[0].instance
    assert all(c.is_hw1() for c in first.constraints)
    assert len(first.constraints) == 1 + inst.n
    assert plan.execute(engine="dp") == count_sets(inst) == 1


# steps, case B

def test_hw_ge1_to_zero_pair_threshold():
    inst = GraphRelInstance.plain(2, [(0, 1)], FREE_RHO, constraints=(Constraint.hw_at_least([0, 1], 1),))
    plan = apply_counting_step(step(StepKind.HW_GE1_TO_ZERO_PAIR), inst, single_bag(inst))
    assert plan.query_count == 1
    assert any(op.code == OpCode.CHECK for op in plan.program)
    assert assert_sound(plan, inst) == 3


def test_hw_ge1_to_zero_pair_solve():
    inst = GraphRelInstance.plain(3, [(0, 1), (1, 2)], FREE_RHO,
                                  constraints=(Constraint.hw_at_least([0, 2], 1), Constraint.hw_at_least([1], 1)))
    plan = apply_counting_step(step(StepKind.HW_GE1_TO_ZERO_PAIR, isolation=Isolation.SOLVE), inst, single_bag(inst))
    assert plan.query_count == 3
    assert_sound(plan, inst)


@pytest.mark.parametrize("p", [FREE_RHO, pair("sigma=finite:1 rho=cofinite:"), pair("sigma=finite:1,2 rho=cofinite:")])
def test_zero_pair_to_forced_selected(p):
    inst = labelled(p, 4, [(0, 1), (1, 2), (1, 3)], {1: (ZERO_PAIR, None)})
    plan = apply_counting_step(step(StepKind.ZERO_PAIR_TO_FORCED_SEL), inst, single_bag(inst))
    query = plan.queries[0].instance
    assert query.family.index_of(ZERO_PAIR) is None or all(query.pair_of(v) != ZERO_PAIR for v in range(query.n))
    assert_sound(plan, inst)


def test_remove_forced_selected_finite():
    inst = labelled(FREE_RHO, 3, [(0, 1), (1, 2)], {1: (selected(FREE_RHO.sigma), None)})
    plan = apply_counting_step(step(StepKind.REMOVE_FORCED_SEL_FINITE), inst, single_bag(inst))
    assert plan.query_count == 3
    assert all(q.instance.is_plain for q in plan.queries)
    assert_sound(plan, inst)


def test_case_b_pipeline_end_to_end():
    inst = GraphRelInstance.plain(2, [(0, 1)], FREE_RHO, constraints=(Constraint.hw_at_least([0, 1], 1),))
    plan = remove_relations_counting(inst, single_bag(inst))
    assert counting_case(FREE_RHO) == "B"
    assert plan.execute(engine="dp") == 3
    assert plan.execute(engine="oracle", depth=2) == 3


def test_case_b_pipeline_from_exactly_one():
    inst = GraphRelInstance.plain(2, [(0, 1)], FREE_RHO, constraints=(Constraint.hw_eq([0, 1], 1),))
    plan = remove_relations_counting(inst, single_bag(inst))
    assert plan.queries[0].pending[0].kind == StepKind.HW1_TO_HW_GE1
    assert plan.execute(engine="oracle", depth=1) == count_sets(inst) == 2


# steps, case C and the weighted steps

def path_with_relation(p: Pair) -> GraphRelInstance:
    return GraphRelInstance.plain(3, [(0, 1), (1, 2)], p, constraints=(Constraint.hw_eq([0, 2], 1),))


def test_dagger_link():
    inst = path_with_relation(SAT)
    plan = apply_counting_step(step(StepKind.DAGGER_LINK), inst, single_bag(inst))
    query = plan.queries[0].instance
    assert query.dagger_mode and query.is_weighted
    assert assert_sound(plan, inst) == 2


@pytest.mark.parametrize("text", [
    "sigma=cofinite:0,1 rho=cofinite:",
    "sigma=cofinite:1 rho=cofinite:",
    "sigma=cofinite:0,2 rho=cofinite:",
    "sigma=cofinite:0,1,2 rho=cofinite:",
])
def test_dagger_link_for_every_cofinite_sigma(text):
    inst = path_with_relation(pair(text))
    plan = apply_counting_step(step(StepKind.DAGGER_LINK), inst, single_bag(inst))
    assert plan.queries[0].instance.dagger_mode
    assert_sound(plan, inst, engine="dp")


def test_dagger_link_preconditions():
    inst = path_with_relation(pair("sigma=cofinite: rho=cofinite:"))
    with pytest.raises(PreconditionError):
        apply_counting_step(step(StepKind.DAGGER_LINK), inst, single_bag(inst))
    weighted = labelled(SAT, 3, [(0, 1), (1, 2)], constraints=[Constraint.hw_eq([0, 2], 1)], weights={1: 2})
    with pytest.raises(PreconditionError):
        apply_counting_step(step(StepKind.DAGGER_LINK), weighted, single_bag(weighted))


def test_case_c_pipeline_first_levels():
    inst = path_with_relation(SAT)
    plan = remove_relations_counting(inst, single_bag(inst))
    assert counting_case(SAT) == "C"
    assert [s.kind for s in plan.queries[0].pending] == [s.kind for s in case_c_steps(SAT, Isolation.THRESHOLD)]
    for depth in (0, 1, 2):
        assert plan.execute(engine="oracle", depth=depth) == 2


@pytest.mark.parametrize("relation,expected", [
    (Constraint.hw_eq([0, 1], 1), 0),
    (Constraint.equality([0, 1]), 2),
])
def test_case_c_pipeline_end_to_end(relation, expected):
    inst = GraphRelInstance.plain(2, [(0, 1)], SAT, constraints=(relation,))
    plan = remove_relations_counting(inst, single_bag(inst))
    expanded = plan.expand()
    assert expanded.is_expanded
    assert expanded.query_count == 1
    assert all(q.instance.is_plain for q in expanded.queries)
    assert expanded.execute(engine="dp") == count_sets(inst) == expected


def test_case_c_pipeline_for_a_shifted_sigma():
    p = pair("sigma=cofinite:0,1 rho=cofinite:")
    inst = GraphRelInstance.plain(2, [(0, 1)], p, constraints=(Constraint.equality([0, 1]),))
    plan = remove_relations_counting(inst, single_bag(inst))
    assert [s.amount for s in plan.queries[0].pending if s.kind == StepKind.SHIFT_PAIR] == [1]
    for depth in (1, 3):
        assert plan.execute(engine="dp", depth=depth) == count_sets(inst) == 1


LOOSE_BOTH = pair("sigma=finite:0,1 rho=finite:0,1")


def weighted_relation() -> Constraint:
    return Constraint.from_sets([0, 2], [[], [0], [0, 2]],
                                {frozenset(): 3, frozenset([0]): Fraction(-1, 2), frozenset([0, 2]): 3})


def test_relation_weights_to_vertex_weights():
    inst = labelled(LOOSE_BOTH, 3, [(0, 1), (1, 2)], constraints=[weighted_relation()])
    plan = apply_counting_step(step(StepKind.REL_WEIGHTS_TO_VERTEX_WEIGHTS), inst, single_bag(inst))
    query = plan.queries[0].instance
    assert all(c.weights is None for c in query.constraints)
    assert sorted(set(query.vertex_weights.values())) == [Fraction(-1, 2), 3]
    assert_sound(plan, inst)


def test_dagger_relation_weights_factor_over_scope():
    inst = labelled(LOOSE_BOTH, 3, [(0, 1), (1, 2)], constraints=[weighted_relation()], dagger=True)
    plan = apply_counting_step(step(StepKind.DAGGER_REL_WEIGHTS), inst, single_bag(inst))
    query = plan.queries[0].instance
    assert query.n == inst.n
    assert query.constraints[0].scope == (0, 2) and query.constraints[0].weights is None
    assert query.vertex_weights == {0: Fraction(-1, 6), 2: Fraction(-6)}
    assert [op.code for op in plan.program][-1] == OpCode.MUL
    assert_sound(plan, inst)


def test_dagger_relation_weights_without_product_form_use_hubs():
    relation = Constraint.from_sets([0, 2], [[], [0], [2], [0, 2]],
                                    {frozenset(): 1, frozenset([0]): 2, frozenset([2]): 3, frozenset([0, 2]): 5})
    inst = labelled(LOOSE_BOTH, 3, [(0, 1), (1, 2)], constraints=[relation], dagger=True)
    plan = apply_counting_step(step(StepKind.DAGGER_REL_WEIGHTS), inst, single_bag(inst))
    query = plan.queries[0].instance
    assert query.n == inst.n + 4
    assert plan.program == (Op.query(0),)
    assert_sound(plan, inst)


def test_remove_vertex_weight_two():
    p = pair("sigma=finite:0,1 rho=finite:0,1")
    inst = labelled(p, 3, [(0, 1), (1, 2)], weights={1: 2})
    plan = apply_counting_step(step(StepKind.REMOVE_VERTEX_WEIGHTS), inst, single_bag(inst))
    assert plan.query_count == 1
    assert not plan.queries[0].instance.is_weighted
    assert_sound(plan, inst)


def test_remove_vertex_weights_by_interpolation():
    p = pair("sigma=finite:0,1 rho=finite:0,1")
    inst = labelled(p, 3, [(0, 1), (1, 2)], weights={0: 3, 2: Fraction(-1, 2), 1: 4})
    plan = apply_counting_step(step(StepKind.REMOVE_VERTEX_WEIGHTS), inst, single_bag(inst))
    assert plan.query_count == 4
    assert plan.program[-1].code == OpCode.EVALGRID
    assert_sound(plan, inst)


def test_dagger_vertex_weights():
    inst = labelled(SAT, 2, [], constraints=[Constraint.hw_at_most([0, 1], 1)],
                    weights={0: 3, 1: Fraction(-1, 2)}, dagger=True)
    plan = apply_counting_step(step(StepKind.DAGGER_VERTEX_WEIGHTS), inst, single_bag(inst))
    assert plan.query_count == 4
    assert assert_sound(plan, inst) == Fraction(7, 2)


def test_dagger_vertex_weights_modulo():
    relation = Constraint.from_sets([0, 1], [[], [0], [0, 1]])
    inst = labelled(SAT, 2, [], constraints=[relation], weights={0: 2, 1: Fraction(-1, 2)}, dagger=True)
    plan = apply_counting_step(step(StepKind.DAGGER_VERTEX_WEIGHTS, amount=3, isolation=Isolation.THRESHOLD),
                               inst, single_bag(inst))
    assert plan.query_count == 1
    query = plan.queries[0].instance
    assert not query.is_weighted and query.n == 2 + 1 + 3
    assert count_sets(query) == 19
    assert assert_sound(plan, inst) == 2


def test_dagger_vertex_weights_modulo_needs_signed_powers():
    inst = labelled(SAT, 2, [], constraints=[Constraint.hw_at_most([0, 1], 1)],
                    weights={0: 3, 1: Fraction(-1, 2)}, dagger=True)
    plan = apply_counting_step(step(StepKind.DAGGER_VERTEX_WEIGHTS, amount=3, isolation=Isolation.THRESHOLD),
                               inst, single_bag(inst))
    assert plan.query_count == 4


def test_dagger_to_hw1():
    relation = Constraint.from_sets([0, 1, 2], [[0], [1, 2], [0, 1, 2]])
    inst = labelled(SAT, 4, [(0, 3), (2, 3)], constraints=[relation, Constraint.equality([1, 3])], dagger=True)
    plan = apply_counting_step(step(StepKind.DAGGER_TO_HW1), inst, single_bag(inst))
    assert all(c.is_hw1() for c in plan.queries[0].instance.constraints)
    assert_sound(plan, inst)


@pytest.mark.parametrize("isolation,queries", [(Isolation.THRESHOLD, 1), (Isolation.SOLVE, 2)])
def test_dagger_hw1_to_ge1(isolation, queries):
    inst = labelled(SAT, 3, [(0, 1), (1, 2)], constraints=[Constraint.hw_eq([0, 2], 1)], dagger=True)
    plan = apply_counting_step(step(StepKind.DAGGER_HW1_TO_GE1, isolation=isolation), inst, single_bag(inst))
    assert plan.query_count == queries
    assert all(c.is_hw_ge1() for q in plan.queries for c in q.instance.constraints)
    assert assert_sound(plan, inst, engine="dp") == 4


def test_dagger_hw1_to_ge1_threshold_needs_unweighted_input():
    inst = labelled(SAT, 3, [(0, 1), (1, 2)], constraints=[Constraint.hw_eq([0, 2], 1)], weights={0: 2},
                    dagger=True)
    with pytest.raises(PreconditionError):
        apply_counting_step(step(StepKind.DAGGER_HW1_TO_GE1, isolation=Isolation.THRESHOLD), inst, single_bag(inst))
    plan = apply_counting_step(step(StepKind.DAGGER_HW1_TO_GE1, isolation=Isolation.SOLVE), inst, single_bag(inst))
    assert_sound(plan, inst)


@pytest.mark.parametrize("isolation,queries", [(Isolation.THRESHOLD, 1), (Isolation.SOLVE, 2)])
def test_dagger_ge1_to_vertices(isolation, queries):
    inst = labelled(SAT, 3, [(0, 1), (1, 2)], constraints=[Constraint.hw_at_least([0, 1], 1)], dagger=True)
    plan = apply_counting_step(step(StepKind.DAGGER_GE1_TO_VERTICES, isolation=isolation), inst, single_bag(inst))
    assert plan.query_count == queries
    for query in plan.queries:
        assert not query.instance.dagger_mode and not query.instance.constraints
        assert sum(query.instance.pair_of(v) == FORCED for v in range(query.instance.n)) == 1
    assert_sound(plan, inst, engine="dp")


def test_shift_pair():
    p = pair("sigma=cofinite:0,1 rho=cofinite:")
    inst = labelled(p, 4, [(0, 1), (1, 2), (2, 3)], {1: (SATURATED, None), 2: (SATURATED, None)})
    plan = apply_counting_step(step(StepKind.SHIFT_PAIR, amount=1), inst, single_bag(inst))
    query = plan.queries[0].instance
    assert query.n == 5 and query.pair_of(4) == FORCED
    assert_sound(plan, inst)
    identity = apply_counting_step(step(StepKind.SHIFT_PAIR, amount=0), inst, single_bag(inst))
    assert identity.queries[0].instance == inst


@pytest.mark.parametrize("p", [SAT, pair("sigma=cofinite:1 rho=cofinite:"), pair("sigma=cofinite:2 rho=cofinite:")])
def test_remove_forced_selected_cofinite(p):
    inst = labelled(p, 3, [(0, 1), (0, 2)], {2: (FORCED, 1)})
    plan = apply_counting_step(step(StepKind.REMOVE_FORCED_SEL_COFINITE), inst, single_bag(inst))
    assert plan.query_count == 1
    assert plan.queries[0].instance.is_plain
    assert any(op.code == OpCode.FLOORDIV for op in plan.program)
    assert_sound(plan, inst)


def test_remove_forced_selected_cofinite_by_solving():
    inst = labelled(SAT, 4, [(0, 1), (0, 2), (1, 3)], {2: (FORCED, 2), 3: (FORCED, 2)})
    plan = apply_counting_step(step(StepKind.REMOVE_FORCED_SEL_COFINITE, isolation=Isolation.SOLVE),
                               inst, single_bag(inst))
    assert plan.query_count == 3
    assert all(q.pending for q in plan.queries)
    assert_sound(plan, inst, engine="dp")


# cofinite shifts

def test_cofinite_shift_sigma():
    target = pair("sigma=cofinite:1 rho=cofinite:")
    source = GraphRelInstance.plain(3, [(0, 1), (1, 2), (0, 2)], pair("sigma=cofinite:0,1 rho=cofinite:"))
    plan = apply_counting_step(step(StepKind.COF_SHIFT_SIGMA, target=target), source, single_bag(source))
    assert plan.queries[0].instance.pair == target
    assert assert_sound(plan, source) == 2


def test_cofinite_shift_rho():
    target = pair("sigma=finite:0 rho=cofinite:1")
    source = GraphRelInstance.plain(3, [(0, 1), (0, 2)], pair("sigma=finite:0 rho=cofinite:0,1"))
    plan = apply_counting_step(step(StepKind.COF_SHIFT_RHO, target=target), source, single_bag(source))
    assert plan.queries[0].instance.pair == target
    assert assert_sound(plan, source) == 1


def test_cofinite_shift_rejects_wrong_source():
    target = pair("sigma=cofinite:1 rho=cofinite:")
    inst = GraphRelInstance.plain(2, [(0, 1)], target)
    with pytest.raises(PreconditionError):
        apply_counting_step(step(StepKind.COF_SHIFT_SIGMA, target=target), inst, single_bag(inst))


def test_pipeline_preconditions():
    inst = path_with_relation(pair("sigma=cofinite: rho=cofinite:"))
    with pytest.raises(PreconditionError):
        remove_relations_counting(inst, single_bag(inst))
    weighted = labelled(PERFECT, 2, [(0, 1)], weights={0: 2})
    with pytest.raises(PreconditionError):
        remove_relations_counting(weighted, single_bag(weighted))


def test_relation_free_input_is_passed_through():
    inst = GraphRelInstance.plain(3, [(0, 1)], PERFECT)
    plan = remove_relations_counting(inst, single_bag(inst))
    assert plan.query_count == 1 and plan.is_expanded
    assert plan.execute() == count_sets(inst)
