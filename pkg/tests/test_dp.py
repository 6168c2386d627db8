"""
Path-decomposition counting agrees with the exhaustive oracle.
"""

import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.config import get_settings
from src.core import Constraint, GraphRelInstance, InstanceBuilder, Pair, PathDecomposition, repair
from src.dp import count_dp, state_space_size
from src.exceptions import DecompositionError, DpStateLimitExceeded, OracleCapExceeded
from src.oracle import count_sets


PAIRS = [
    "sigma=finite:0 rho=finite:1",
    "sigma=finite:0 rho=finite:0,1",
    "sigma=cofinite: rho=cofinite:0",
    "sigma=finite:1 rho=finite:1",
    "sigma=finite:0,2 rho=finite:0,2",
    "sigma=finite:1 rho=finite:0,1",
    "sigma=cofinite:0 rho=cofinite:0",
    "sigma=finite:0,3 rho=finite:3,4",
    "sigma=cofinite:1 rho=finite:1,2",
    "sigma=finite:2 rho=cofinite:0,2",
    "sigma=finite:1 rho=finite:0",
]


def random_instance(rng: random.Random, text: str) -> GraphRelInstance:
    n = rng.randint(1, 8)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.35]
    constraints = []
    if n >= 3 and rng.random() < 0.5:
        scope = rng.sample(range(n), 3)
        constraints.append(Constraint(scope=tuple(scope), accepted=rng.sample(range(8), 4)))
    return GraphRelInstance.plain(n, edges, Pair.parse(text), constraints=tuple(constraints))


def linear_bags(inst: GraphRelInstance, width: int):
    bags = [list(range(i, min(i + width + 1, inst.n))) for i in range(max(1, inst.n - width))]
    return repair(inst, bags)


def test_empty_graph():
    p = Pair.parse("sigma=finite:0 rho=finite:1")
    assert count_dp(GraphRelInstance.plain(0, [], p), PathDecomposition.of([[]])) == 1


def test_path_of_five_everything():
    p = Pair.parse("sigma=cofinite: rho=cofinite:")
    path = GraphRelInstance.plain(5, [(i, i + 1) for i in range(4)], p)
    pd = PathDecomposition.of([[i, i + 1] for i in range(4)])
    assert count_dp(path, pd) == 32


def test_invalid_decomposition_is_rejected():
    p = Pair.parse("sigma=finite:0 rho=finite:1")
    edge = GraphRelInstance.plain(2, [(0, 1)], p)
    with pytest.raises(DecompositionError):
        count_dp(edge, PathDecomposition.of([[0], [1]]))


def test_relation_forces_count():
    p = Pair.parse("sigma=cofinite: rho=cofinite:")
    inst = GraphRelInstance.plain(4, [], p, constraints=(Constraint.hw_eq([0, 3], 1),))
    pd = PathDecomposition.of([[0, 1], [1, 2], [2, 3]])
    assert count_dp(inst, repair(inst, pd.bags)) == 8


@pytest.mark.parametrize("text", PAIRS)
def test_matches_oracle(text):
    rng = random.Random(get_settings().seed + PAIRS.index(text))
    for _ in range(20):
        inst = random_instance(rng, text)
        pd = linear_bags(inst, rng.randint(1, 3))
        assert count_dp(inst, pd) == count_sets(inst), text


def test_state_space_size():
    assert state_space_size(Pair.parse("sigma=finite:0,3 rho=finite:3,4")) == 9
    assert state_space_size(Pair.parse("sigma=cofinite: rho=cofinite:0")) == 3


def test_state_limit_has_its_own_error():
    p = Pair.parse("sigma=cofinite: rho=cofinite:")
    inst = GraphRelInstance.plain(4, [], p)
    with pytest.raises(DpStateLimitExceeded) as caught:
        count_dp(inst, PathDecomposition.single_bag(4), max_states=3)
    assert not isinstance(caught.value, OracleCapExceeded)
    assert caught.value.limit == 3 and caught.value.bag == 0
    assert "dp state limit" in str(caught.value)


EXTRA_PAIRS = [
    "sigma=cofinite: rho=finite:",
    "sigma=finite: rho=cofinite:1",
    "sigma=finite:0 rho=cofinite:",
    "sigma=cofinite:1 rho=cofinite:",
    "sigma=finite:1,2 rho=finite:0",
]
WEIGHTS = [Fraction(2), Fraction(-1, 2), Fraction(3), Fraction(1, 3), Fraction(1)]


def rich_instance(rng: random.Random, text: str) -> GraphRelInstance:
    """Labelled, weighted and sometimes dagger instance over the base pair text."""
    n = rng.randint(1, 7)
    b = InstanceBuilder.for_pair(Pair.parse(text))
    b.dagger_mode = rng.random() < 0.4
    for _ in range(n):
        b.add_vertex(b.use_pair(Pair.parse(rng.choice(EXTRA_PAIRS))) if rng.random() < 0.3 else 0)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < 0.35:
                b.add_edge(u, v)
    for v in range(n):
        if rng.random() < 0.25:
            b.set_weight(v, rng.choice(WEIGHTS))
    for _ in range(rng.randint(0, 2)):
        k = rng.randint(1, min(3, n))
        scope = tuple(rng.sample(range(n), k))
        accepted = tuple(sorted(rng.sample(range(2 ** k), rng.randint(1, 2 ** k))))
        weights = {m: rng.choice(WEIGHTS) for m in accepted} if rng.random() < 0.5 else None
        b.add_constraint(Constraint(scope=scope, accepted=accepted, weights=weights))
    return b.freeze()


@pytest.mark.parametrize("text", PAIRS)
def test_matches_oracle_on_labelled_weighted_dagger(text):
    rng = random.Random(get_settings().seed + 100 + PAIRS.index(text))
    kinds = set()
    for _ in range(20):
        inst = rich_instance(rng, text)
        kinds.update(k for k, on in (("labelled", any(inst.labels)), ("weighted", inst.is_weighted),
                                      ("dagger", inst.dagger_mode)) if on)
        pd = linear_bags(inst, rng.randint(1, 3))
        assert count_dp(inst, pd) == count_sets(inst), text
    assert kinds == {"labelled", "weighted", "dagger"}
