"""Text formats: polynomial/formula expressions and problem files."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from invgen.coeffs import make_quad
from invgen.formula import TRUE, Atom, Or, Rel, eval_formula, f_and, f_or
from invgen.parser import (
    ParseError,
    parse_formula,
    parse_poly,
    parse_problem,
    print_problem,
)
from invgen.poly import Poly, monomials_up_to

NAMES = ["x", "y"]
X = Poly.var(2, 0)
Y = Poly.var(2, 1)


def small_polys(arity=2, degree=3):
    monos = monomials_up_to(arity, degree)
    coeffs = st.fractions(min_value=-20, max_value=20, max_denominator=12)
    return st.lists(
        st.tuples(st.sampled_from(monos), coeffs), max_size=5
    ).map(lambda items: Poly.from_terms(arity, items))


class TestPolyExpr:
    def test_rational_literals(self):
        p = parse_poly("3/8*x + 23/56*x^2", ["x"])
        assert p.coeff((1,)) == Fraction(3, 8)
        assert p.coeff((2,)) == Fraction(23, 56)
        assert len(p.terms) == 2

    def test_spaces_in_fraction(self):
        assert parse_poly("3 / 8", ["x"]) == Poly.const(1, Fraction(3, 8))

    def test_precedence(self):
        assert parse_poly("x + 2*y^2 - 3", NAMES) == X + 2 * Y ** 2 - 3
        assert parse_poly("-x^2", NAMES) == -(X ** 2)
        assert parse_poly("(-x)^2", NAMES) == X ** 2
        assert parse_poly("2*(x + y)", NAMES) == 2 * X + 2 * Y
        assert parse_poly("x - y - y", NAMES) == X - 2 * Y
        assert parse_poly("(x + 1)^2", NAMES) == X ** 2 + 2 * X + 1

    def test_unary_plus_and_chained_signs(self):
        assert parse_poly("+x", NAMES) == X
        assert parse_poly("--x", NAMES) == X
        assert parse_poly("x * -y", NAMES) == -(X * Y)

    def test_sqrt_constant(self):
        p = parse_poly("(1/2 + 1/2*sqrt(13))*x", ["x"])
        assert p.coeff((1,)) == make_quad(Fraction(1, 2), Fraction(1, 2), 13)

    @given(small_polys())
    @settings(max_examples=80)
    def test_round_trip(self, p):
        assert parse_poly(p.to_str(NAMES), NAMES) == p

    def test_round_trip_quad_coeffs(self):
        p = Poly.from_terms(
            2,
            [
                ((1, 0), make_quad(Fraction(3, 2), Fraction(-1, 2), 13)),
                ((0, 0), make_quad(0, 1, 2)),
            ],
        )
        assert parse_poly(p.to_str(NAMES), NAMES) == p

    def test_errors_have_positions(self):
        with pytest.raises(ParseError) as ei:
            parse_poly("x + ", ["x"])
        assert ei.value.line == 1
        with pytest.raises(ParseError) as ei:
            parse_poly("x + z", ["x", "y"])
        assert ei.value.col == 5
        with pytest.raises(ParseError):
            parse_poly("x^(2)", ["x"])  # exponent must be a literal
        with pytest.raises(ParseError):
            parse_poly("1/0", ["x"])
        with pytest.raises(ParseError):
            parse_poly("x x", ["x"])  # no implicit multiplication


class TestFormulaExpr:
    def test_relations(self):
        f = parse_formula("x^2 + y^2 <= 1", NAMES)
        assert f == Atom(X ** 2 + Y ** 2 - 1, Rel.LE)
        assert parse_formula("x > y", NAMES) == Atom(X - Y, Rel.GT)
        assert parse_formula("x = 0", NAMES) == Atom(X, Rel.EQ)

    def test_neq_expands(self):
        f = parse_formula("x != 1", NAMES)
        assert f == f_or(Atom(X - 1, Rel.LT), Atom(X - 1, Rel.GT))

    def test_precedence_not_and_or(self):
        f = parse_formula("x < 1 | y < 1 & x > 0", NAMES)
        assert f == f_or(
            Atom(X - 1, Rel.LT), f_and(Atom(Y - 1, Rel.LT), Atom(X, Rel.GT))
        )
        g = parse_formula("!x < 1 & y < 1", NAMES)
        assert g == f_and(Atom(X - 1, Rel.GE), Atom(Y - 1, Rel.LT))

    def test_grouping(self):
        f = parse_formula("(x < 1 | y < 1) & x > 0", NAMES)
        assert f == f_and(
            f_or(Atom(X - 1, Rel.LT), Atom(Y - 1, Rel.LT)), Atom(X, Rel.GT)
        )

    def test_paren_poly_vs_formula(self):
        assert parse_formula("(x) < 1", NAMES) == Atom(X - 1, Rel.LT)
        assert parse_formula("(x + y)^2 <= 4", NAMES) == Atom(
            (X + Y) ** 2 - 4, Rel.LE
        )
        assert parse_formula("((x < 1))", NAMES) == Atom(X - 1, Rel.LT)

    def test_constants(self):
        assert parse_formula("true", NAMES) == TRUE
        assert parse_formula("!true", NAMES) != TRUE
        assert parse_formula("true & x < 1", NAMES) == Atom(X - 1, Rel.LT)

    def test_not_distributes(self):
        f = parse_formula("!(x < 1 & y < 1)", NAMES)
        assert f == f_or(Atom(X - 1, Rel.GE), Atom(Y - 1, Rel.GE))
        g = parse_formula("!(x = 0)", NAMES)
        assert g == f_or(Atom(X, Rel.LT), Atom(X, Rel.GT))

    def test_errors(self):
        with pytest.raises(ParseError):
            parse_formula("x >=", NAMES)
        with pytest.raises(ParseError):
            parse_formula("x", NAMES)
        with pytest.raises(ParseError):
            parse_formula("x < 1 &", NAMES)
        with pytest.raises(ParseError):
            parse_formula("x < 1 extra", NAMES)


ROTATION = """\
# a rotation with an offset initial ball
name: rotation
class: linear
vars: x, y
ode:
  x' = -y
  y' = x
init: (x - 1)^2 + y^2 <= 1/4
unsafe: x^2 + y^2 >= 9
"""


class TestProblemFiles:
    def test_rotation(self):
        pf = parse_problem(ROTATION)
        assert pf.name == "rotation"
        assert pf.class_tag == "linear"
        assert pf.dim == 2
        prob = pf.problem
        assert prob.names == ["x", "y"]
        assert prob.system.rhs == [-Y, X]
        assert prob.domain == TRUE
        assert prob.init == Atom((X - 1) ** 2 + Y ** 2 - Fraction(1, 4), Rel.LE)
        assert prob.unsafe == Atom(X ** 2 + Y ** 2 - 9, Rel.GE)

    def test_defaults(self):
        text = "vars: x\node: x' = 1\ninit: x = 0\nunsafe: x >= 5"
        pf = parse_problem(text, default_name="fromfile")
        assert pf.name == "fromfile"
        assert pf.class_tag == "linear"  # derived when not declared
        assert pf.problem.domain == TRUE

    def test_domain_and_semicolons(self):
        text = (
            "vars: u, v\n"
            "ode: u' = v; v' = u*v - u^3\n"
            "domain: u >= 0\n"
            "init: u = 1 & v = 0\n"
            "unsafe: v >= 10\n"
        )
        pf = parse_problem(text)
        u, v = Poly.var(2, 0), Poly.var(2, 1)
        assert pf.problem.system.rhs == [v, u * v - u ** 3]
        assert pf.problem.domain == Atom(u, Rel.GE)
        assert pf.class_tag == "poly"

    def test_print_parse_round_trip(self):
        pf = parse_problem(ROTATION)
        text = print_problem(pf)
        pf2 = parse_problem(text)
        assert pf2.name == pf.name
        assert pf2.class_tag == pf.class_tag
        assert pf2.problem.system.rhs == pf.problem.system.rhs
        assert pf2.problem.init == pf.problem.init
        assert pf2.problem.unsafe == pf.problem.unsafe
        assert pf2.problem.domain == pf.problem.domain
        assert print_problem(pf2) == text

    def test_comments_anywhere(self):
        text = (
            "vars: x # state\n"
            "ode:\n"
            "  # the flow\n"
            "  x' = -x\n"
            "init: x = 1\n"
            "unsafe: x >= 2\n"
        )
        x1 = Poly.var(1, 0)
        assert parse_problem(text).problem.system.rhs == [-x1]

    def test_error_positions(self):
        with pytest.raises(ParseError) as ei:
            parse_problem("vars: x\node: x' = 1\ninit: x >=\nunsafe: x >= 5")
        assert ei.value.line in (3, 4)
        with pytest.raises(ParseError) as ei:
            parse_problem("vars: x\node: y' = 1\ninit: x = 0\nunsafe: x >= 5")
        assert ei.value.line == 2
        assert "y" in ei.value.msg

    def test_missing_sections(self):
        with pytest.raises(ParseError):
            parse_problem("vars: x\node: x' = 1\ninit: x = 0")
        with pytest.raises(ParseError):
            parse_problem("vars: x\node: x' = 1\nunsafe: x >= 5")
        with pytest.raises(ParseError):
            parse_problem("ode: x' = 1\ninit: x = 0\nunsafe: x >= 5")

    def test_missing_and_duplicate_equations(self):
        with pytest.raises(ParseError):
            parse_problem("vars: x, y\node: x' = y\ninit: x = 0\nunsafe: x >= 5")
        with pytest.raises(ParseError):
            parse_problem(
                "vars: x\node: x' = 1; x' = 2\ninit: x = 0\nunsafe: x >= 5"
            )

    def test_duplicate_section(self):
        with pytest.raises(ParseError):
            parse_problem(
                "vars: x\node: x' = 1\ninit: x = 0\ninit: x = 1\nunsafe: x >= 5"
            )

    def test_bad_variable_names(self):
        with pytest.raises(ParseError):
            parse_problem("vars: x, x\node: x' = 1\ninit: x = 0\nunsafe: x >= 1")
        with pytest.raises(ParseError):
            parse_problem("vars: true\node: true' = 1\ninit: true = 0\nunsafe: true >= 1")

    @given(small_polys(), small_polys())
    @settings(max_examples=40)
    def test_generated_problem_round_trip(self, p, q):
        pf = parse_problem(ROTATION)
        pf.problem.init = Atom(p, Rel.LE)
        pf.problem.unsafe = Atom(q, Rel.GE)
        text = print_problem(pf)
        pf2 = parse_problem(text)
        assert pf2.problem.init == pf.problem.init
        assert pf2.problem.unsafe == pf.problem.unsafe
