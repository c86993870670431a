import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lblab.expr import (
    BinOp,
    Call,
    ExprSyntaxError,
    Neg,
    Num,
    Pi,
    Var,
    evaluate,
    parse_expr,
    render,
)

from _reference import REF_IOTA, REF_OMEGA

CATALOG_EXPRESSIONS = {
    "0": REF_OMEGA["static"],
    "sin(pi*t/180)": REF_OMEGA["irregular"],
    "0.1": REF_IOTA["constant"],
    "1/(0.4*t+1)": REF_IOTA["sublinear"],
    "0.02*t": REF_IOTA["linear"],
    "-(0.1*(t%17))+0.8": REF_IOTA["autocorrect"],
}


class TestEvaluate:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("2+3*4", 14.0),
            ("2*3+4", 10.0),
            ("(2+3)*4", 20.0),
            ("2-3-4", -5.0),
            ("12/4/3", 1.0),
            ("2*3%4", 2.0),
            ("-2*3", -6.0),
            ("--2", 2.0),
            ("2--3", 5.0),
            ("1e3", 1000.0),
            ("2.5e-2", 0.025),
            ("2e+1", 20.0),
            (".5", 0.5),
            ("1.", 1.0),
            ("floor(2.7)", 2.0),
            ("floor(-2.3)", -3.0),
            ("sin(pi/2)", 1.0),
            (" 1 + 2 * t ", 7.0),
        ],
    )
    def test_values(self, text, expected):
        assert evaluate(parse_expr(text), 3) == expected

    def test_variable(self):
        node = parse_expr("t*2")
        assert evaluate(node, 0) == 0.0
        assert evaluate(node, 21) == 42.0
        assert node(21) == 42.0

    def test_pi(self):
        assert evaluate(parse_expr("pi"), 0) == math.pi

    def test_modulo_carries_dividend_sign(self):
        node = parse_expr("-7%3")
        assert evaluate(node, 0) == math.fmod(-7.0, 3.0) == -1.0
        assert evaluate(node, 0) != -7 % 3  # not Python's floored modulo
        assert evaluate(parse_expr("7%-3"), 0) == math.fmod(7.0, -3.0) == 1.0

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            evaluate(parse_expr("1/t"), 0)
        with pytest.raises(ZeroDivisionError):
            evaluate(parse_expr("1/(t-5)"), 5)
        with pytest.raises(ZeroDivisionError):
            evaluate(parse_expr("t%(t-1)"), 1)

    @pytest.mark.parametrize("text,fn", sorted(CATALOG_EXPRESSIONS.items()))
    def test_catalog_expressions_match_reference(self, text, fn):
        node = parse_expr(text)
        for t in range(0, 200):
            assert evaluate(node, t) == fn(t)


class TestParseErrors:
    @pytest.mark.parametrize(
        "text,fragment,position",
        [
            ("", "empty expression", 0),
            ("   ", "empty expression", 3),
            ("(", "unexpected end", 1),
            ("2+", "unexpected end", 2),
            ("2+*3", "unexpected character '*'", 2),
            ("(2+3", "expected ')'", 4),
            ("sin 3", "requires parentheses", 0),
            ("foo(2)", "unknown identifier 'foo'", 0),
            ("2 ^ 3", "trailing input", 2),
            ("2..3", "trailing input", 2),
            ("1e", "trailing input", 1),
        ],
    )
    def test_position_and_message(self, text, fragment, position):
        with pytest.raises(ExprSyntaxError) as exc:
            parse_expr(text)
        assert fragment in str(exc.value)
        assert exc.value.position == position

    def test_error_is_value_error(self):
        assert issubclass(ExprSyntaxError, ValueError)


class TestRender:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("2*(3+4)", "2.0*(3.0+4.0)"),
            ("(2*3)+4", "2.0*3.0+4.0"),
            ("2-(3-4)", "2.0-(3.0-4.0)"),
            ("(2-3)-4", "2.0-3.0-4.0"),
            ("-(2+3)", "-(2.0+3.0)"),
            ("sin(pi*t/180)", "sin(pi*t/180.0)"),
            ("-(0.1*(t%17))+0.8", "-(0.1*(t%17.0))+0.8"),
        ],
    )
    def test_minimal_parentheses(self, text, expected):
        assert render(parse_expr(text)) == expected

    @pytest.mark.parametrize("text", sorted(CATALOG_EXPRESSIONS))
    def test_round_trip_is_fixed_point(self, text):
        node = parse_expr(text)
        printed = render(node)
        assert parse_expr(printed) == node
        assert render(parse_expr(printed)) == printed

    def test_str_matches_render(self):
        node = parse_expr("1+t*2")
        assert str(node) == render(node)


def _expr_trees():
    leaves = st.one_of(
        st.floats(min_value=0.0, allow_nan=False, allow_infinity=False).map(
            lambda v: Num(abs(v))
        ),
        st.just(Var()),
        st.just(Pi()),
    )

    def extend(children):
        return st.one_of(
            children.map(Neg),
            st.tuples(st.sampled_from("sin floor".split()), children).map(
                lambda fc: Call(fc[0], fc[1])
            ),
            st.tuples(
                st.sampled_from("+-*/%"), children, children
            ).map(lambda oc: BinOp(oc[0], oc[1], oc[2])),
        )

    return st.recursive(leaves, extend, max_leaves=12)


class TestProperties:
    @settings(max_examples=300, deadline=None)
    @given(_expr_trees())
    def test_parse_render_round_trip(self, tree):
        assert parse_expr(render(tree)) == tree

    @settings(max_examples=200, deadline=None)
    @given(_expr_trees(), st.integers(min_value=0, max_value=1000))
    def test_render_preserves_value(self, tree, t):
        # evaluation may reject the input (zero divisor, overflow inside
        # sin/floor); the reprinted expression must then fail identically
        try:
            want = evaluate(tree, t)
        except (ZeroDivisionError, OverflowError, ValueError) as e:
            with pytest.raises(type(e)):
                evaluate(parse_expr(render(tree)), t)
            return
        got = evaluate(parse_expr(render(tree)), t)
        if math.isnan(want):
            assert math.isnan(got)
        else:
            assert got == want
