import ast
import itertools
import operator

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiabatic_diophantine import ParseError, evaluate, parse, search_box


def reference_eval(source, point):
    """Independent evaluator: Python's own expression parser on the same text."""
    tree = ast.parse(source.replace("^", "**"), mode="eval")
    ops = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Pow: operator.pow}

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant):
            return node.value
        if isinstance(node, ast.Name):
            return point[int(node.id[1:]) - 1]
        if isinstance(node, ast.UnaryOp):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            return ops[type(node.op)](walk(node.left), walk(node.right))
        raise TypeError(node)

    return walk(tree)


def test_linear_terms():
    p = parse("x1 - 3")
    assert p.arity == 1
    assert p.terms == {(1,): 1, (0,): -3}


def test_expansion_matches_hand_derivation():
    p = parse("(x1+1)^2 - 2*(x2+1)^2")
    assert p.terms == {(2, 0): 1, (1, 0): 2, (0, 2): -2, (0, 1): -4, (0, 0): -1}
    assert p.arity == 2


@pytest.mark.parametrize(
    "source, position",
    [("x1 + ", 5), ("x1 +* 2", 4), ("2 x1", 2), ("x1^x2", 3), ("x1^2^2", 4), ("(x1 + 1", 7), ("x0 + 1", 0)],
)
def test_syntax_errors_carry_position(source, position):
    with pytest.raises(ParseError) as info:
        parse(source)
    assert info.value.position == position


def test_negative_exponent_rejected():
    with pytest.raises(ParseError):
        parse("x1^-1")


def test_arity_override_and_conflict():
    assert parse("x1 - 1", arity=3).arity == 3
    with pytest.raises(ValueError):
        parse("x2", arity=1)


def test_big_coefficients_stay_exact():
    p = parse("x1^40 - 3^80")
    assert evaluate(p, (9,)) == 0
    assert evaluate(p, (2,)) == 2**40 - 3**80


def test_evaluate_examples():
    assert evaluate(parse("x1 - 3"), (3,)) == 0
    assert evaluate(parse("(x1+1)^2 - 2*(x2+1)^2"), (0, 0)) == -1
    with pytest.raises(ValueError):
        evaluate(parse("x1 - 3"), (1, 2))


def test_search_box_examples():
    assert search_box(parse("x1 - 2"), 5) == (2,)
    assert search_box(parse("x1 + 1"), 50) is None
    assert search_box(parse("(x1+1)^2 - 2*(x2+1)^2"), 20) is None
    assert search_box(parse("x1 - x2"), 3) == (0, 0)
    with pytest.raises(ValueError):
        search_box(parse("x1"), -1)


# --- property tests ------------------------------------------------------

_atoms = st.one_of(
    st.integers(0, 9).map(str),
    st.integers(1, 3).map(lambda k: f"x{k}"),
)


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(children, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
        children.map(lambda c: f"-{c}"),
    )


expressions = st.recursive(_atoms, _combine, max_leaves=8)


@settings(max_examples=150, deadline=None)
@given(expressions, st.tuples(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6)))
def test_evaluate_agrees_with_reference(source, point):
    p = parse(source, arity=3)
    assert evaluate(p, point) == reference_eval(source, point)


@settings(max_examples=150, deadline=None)
@given(expressions)
def test_print_parse_round_trip(source):
    p = parse(source, arity=3)
    q = parse(str(p), arity=3)
    assert q.terms == p.terms
    assert q == p and hash(q) == hash(p)


@pytest.mark.parametrize(
    "source, bound",
    [("x1^2 - 2*x2^2 - 1", 20), ("x1*x2 - 6", 20), ("x1 + x2 + x3 - 4", 8), ("x1^2 + x2^2 - 3", 20),
     ("(x1+1)^2 - 2*(x2+1)^2", 20), ("x1*x2*x3 - 7", 8)],
)
def test_search_box_exhaustive(source, bound):
    p = parse(source)
    zeros = [t for t in itertools.product(range(bound + 1), repeat=p.arity) if reference_eval(source, t) == 0]
    found = search_box(p, bound)
    if zeros:
        assert found == min(zeros) and evaluate(p, found) == 0
    else:
        assert found is None
