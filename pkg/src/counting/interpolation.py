"""
Exact interpolation over the rationals.

Univariate and grid polynomial interpolation, plus the linear functionals
used to read one coefficient off an exponential polynomial
sum_b b^x * P_b(x) from consecutive samples.
"""

from fractions import Fraction
from itertools import product
from typing import Dict, List, Mapping, Sequence, Tuple

import sympy

from ..core.instance import to_fraction
from ..exceptions import IsolationError, ValidationError


Term = Tuple[Fraction, int]


def _rational(value) -> sympy.Rational:
    value = to_fraction(value)
    return sympy.Rational(value.numerator, value.denominator)


def _fraction(value) -> Fraction:
    value = sympy.nsimplify(value)
    return Fraction(int(value.p), int(value.q))


def _vandermonde(nodes: Sequence[Fraction]) -> sympy.Matrix:
    k = len(nodes)
    return sympy.Matrix(k, k, lambda i, j: _rational(nodes[i]) ** j)


def _distinct(nodes: Sequence[Fraction], what: str) -> List[Fraction]:
    nodes = [to_fraction(x) for x in nodes]
    if not nodes:
        raise ValidationError(f"{what}: no interpolation nodes")
    if len(set(nodes)) != len(nodes):
        raise ValidationError(f"{what}: duplicate interpolation nodes {sorted(nodes)}")
    return nodes


def _strip(coefficients: List[Fraction]) -> List[Fraction]:
    while len(coefficients) > 1 and coefficients[-1] == 0:
        coefficients.pop()
    return coefficients


def interpolate_poly(points: Sequence[Tuple[object, object]]) -> List[Fraction]:
    """
    Coefficients (lowest degree first) of the polynomial of degree below
    len(points) through the points. Trailing zeros are dropped.

    Raises:
        ValidationError: no points, or two points share an x value
    """
    xs = _distinct([x for x, _ in points], "interpolate_poly")
    ys = sympy.Matrix([_rational(y) for _, y in points])
    solution = _vandermonde(xs).LUsolve(ys)
    return _strip([_fraction(c) for c in solution])


def evaluate_poly(coefficients: Sequence[Fraction], x) -> Fraction:
    x = to_fraction(x)
    value = Fraction(0)
    for c in reversed(coefficients):
        value = value * x + c
    return value


def coefficient_weights(nodes: Sequence[object], index: int) -> List[Fraction]:
    """
    Weights w with sum_j w_j * P(nodes[j]) = coefficient ``index`` of P, for
    every P of degree below len(nodes): row ``index`` of the inverse
    Vandermonde matrix.
    """
    nodes = _distinct(nodes, "coefficient_weights")
    if not 0 <= index < len(nodes):
        raise ValidationError(f"coefficient {index} is not determined by {len(nodes)} nodes")
    inverse = _vandermonde(nodes).inv()
    return [_fraction(inverse[index, j]) for j in range(len(nodes))]


def interpolate_grid(axes: Sequence[Sequence[object]], values: Sequence[object]) -> Dict[Tuple[int, ...], Fraction]:
    """
    Coefficients of the polynomial with degree below |axis_i| in variable i
    that takes values[k] at the k-th point of product(*axes). Keys are
    exponent tuples; zero coefficients are omitted.

    Raises:
        ValidationError: duplicate nodes on an axis or a value count mismatch
    """
    axes = [_distinct(axis, f"interpolate_grid axis {i}") for i, axis in enumerate(axes)]
    shape = [len(axis) for axis in axes]
    expected = 1
    for k in shape:
        expected *= k
    if len(values) != expected:
        raise ValidationError(f"grid of shape {shape} needs {expected} values, got {len(values)}")

    table: Dict[Tuple[int, ...], sympy.Rational] = {
        index: _rational(v) for index, v in zip(product(*(range(k) for k in shape)), values)
    }
    for a, axis in enumerate(axes):
        inverse = _vandermonde(axis).inv()
        solved: Dict[Tuple[int, ...], sympy.Rational] = {}
        for index in table:
            if index[a] != 0:
                continue
            column = [table[index[:a] + (k,) + index[a + 1:]] for k in range(shape[a])]
            for j in range(shape[a]):
                solved[index[:a] + (j,) + index[a + 1:]] = sum(
                    (inverse[j, k] * column[k] for k in range(shape[a])), sympy.Integer(0)
                )
        table = solved
    return {index: _fraction(c) for index, c in table.items() if c != 0}


def evaluate_grid(coefficients: Mapping[Tuple[int, ...], Fraction], point: Sequence[object]) -> Fraction:
    point = [to_fraction(x) for x in point]
    total = Fraction(0)
    for exponents, c in coefficients.items():
        term = to_fraction(c)
        for x, e in zip(point, exponents):
            term *= x ** e
        total += term
    return total


def merge_terms(terms: Sequence[Tuple[object, int]]) -> List[Term]:
    """Bases in order of first appearance, each with its largest degree."""
    degree: Dict[Fraction, int] = {}
    for base, d in terms:
        base = to_fraction(base)
        degree[base] = max(degree.get(base, -1), d)
    return [(b, d) for b, d in degree.items()]


def unknown_count(terms: Sequence[Term]) -> int:
    return sum(d + 1 for _, d in terms)


def exp_poly_weights(
    terms: Sequence[Term],
    xs: Sequence[int],
    target: Mapping[Term, object],
) -> List[Fraction]:
    """
    Weights w with sum_k w_k * f(xs[k]) = sum target[(b, d)] * c_{b,d} for
    every f(x) = sum over terms of c_{b,d} * b^x * x^d.

    Raises:
        ValidationError: target names a term outside the model
        IsolationError: the sample points do not determine the target
    """
    columns = [(to_fraction(b), d) for b, dmax in terms for d in range(dmax + 1)]
    for key in target:
        if (to_fraction(key[0]), key[1]) not in columns:
            raise ValidationError(f"target term {key} is not part of the model")
    if len(xs) != len(columns):
        raise ValidationError(f"{len(columns)} unknowns need as many samples, got {len(xs)}")
    system = sympy.Matrix(
        len(xs), len(columns),
        lambda k, j: _rational(columns[j][0]) ** xs[k] * sympy.Integer(xs[k]) ** columns[j][1],
    )
    if system.det() == 0:
        raise IsolationError(f"samples {list(xs)} do not separate the terms {list(terms)}")
    wanted = {(to_fraction(b), d): value for (b, d), value in target.items()}
    goal = sympy.Matrix([_rational(wanted.get(col, 0)) for col in columns])
    weights = system.T.LUsolve(goal)
    return [_fraction(w) for w in weights]
