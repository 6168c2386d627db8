"""
The srg v1 text format.
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
    Language,
    Pair,
    PairFamily,
    PathDecomposition,
    parse_srg,
    rho,
    serialize_srg,
    sigma,
)
from src.exceptions import FormatError


SMALL = """\
srg v1
# path with one relation
pair 0 sigma finite 0
pair 0 rho finite 1
vertices 3
edge 0 1
edge 1 2
rel 2 0 2 accepts 1 2
bag 0 1 2
"""


def test_parse_small_document():
    doc = parse_srg(SMALL)
    inst = doc.instance
    assert inst.n == 3
    assert inst.edges == ((0, 1), (1, 2))
    assert inst.pair == Pair.parse("sigma=finite:0 rho=finite:1")
    assert inst.constraints[0].scope == (0, 2)
    assert inst.constraints[0].accepted == (1, 2)
    assert doc.decomposition.bags == ((0, 1, 2),)
    assert doc.notes == ("path with one relation",)
    assert doc.portals is None


def test_serialize_is_parsed_back():
    base = Pair.parse("sigma=finite:1 rho=cofinite:0")
    extra = Pair.parse("sigma=finite:0 rho=finite:0,2")
    family = PairFamily(pairs=(base, extra), bounds=(None, 1))
    weighted = Constraint(scope=(1, 2), accepted=(0, 3), weights={0: Fraction(1, 2), 3: Fraction(-2)})
    inst = GraphRelInstance(
        n=4,
        edges=((0, 1), (2, 3)),
        constraints=(Constraint.hw_eq([0, 1, 3], 1), weighted),
        family=family,
        labels=(0, 0, 0, 1),
        vertex_weights={2: Fraction(3, 4)},
    )
    pd = PathDecomposition.of([[0, 1, 3], [1, 2, 3]])
    language = Language.of(2, [(sigma(0), rho(1)), (rho(0), rho(0))])
    text = serialize_srg(inst, pd, portals=(0, 3), language=language,
                         blocks=[(1, "B", [1]), (1, "Bbar", [2])], notes=["sample"])

    assert "family 1 bound 1" in text
    assert "label 3 1" in text
    assert "wrel 2 1 2 0=1/2 3=-2/1" in text

    doc = parse_srg(text)
    assert doc.instance == inst
    assert doc.decomposition == pd
    assert doc.portals == (0, 3)
    assert doc.language == language
    assert doc.blocks == ((1, "B", (1,)), (1, "Bbar", (2,)))
    assert doc.notes == ("sample",)


def test_dagger_flag():
    text = SMALL.replace("vertices 3", "vertices 3\ndagger on")
    assert parse_srg(text).instance.dagger_mode


@pytest.mark.parametrize("text,line", [
    ("srg v2\nvertices 1\n", 1),
    (SMALL.replace("accepts 1 2", "accepts zz"), 8),
    (SMALL.replace("rel 2 0 2 accepts 1 2", "rel 2 0 2 accepts 4"), 8),
    (SMALL.replace("edge 1 2", "frob 1 2"), 7),
    (SMALL.replace("pair 0 rho finite 1", "pair 0 rho sometimes 1"), 4),
    (SMALL.replace("edge 0 1", "edge 0"), 6),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(FormatError) as info:
        parse_srg(text)
    assert info.value.line == line


def test_document_level_errors():
    with pytest.raises(FormatError, match="vertices"):
        parse_srg("srg v1\npair 0 sigma finite 0\npair 0 rho finite 1\n")
    with pytest.raises(FormatError, match="base pair"):
        parse_srg("srg v1\nvertices 1\n")
    with pytest.raises(FormatError, match="out of range"):
        parse_srg(SMALL.replace("edge 1 2", "edge 1 5"))
