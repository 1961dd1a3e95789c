"""Formula algebra: constructors, negation, evaluation, DNF, printing."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from invgen.formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    DnfCapExceeded,
    Or,
    Rel,
    atoms_of,
    dnf_to_formula,
    eval_formula,
    f_and,
    f_or,
    formula_size,
    formula_str,
    map_polys,
    negate,
    to_dnf,
)
from invgen.poly import Poly, monomials_up_to

X2 = Poly.var(2, 0)
Y2 = Poly.var(2, 1)


def small_polys(arity=2, degree=2):
    monos = monomials_up_to(arity, degree)
    coeffs = st.fractions(min_value=-9, max_value=9, max_denominator=4)
    return st.lists(
        st.tuples(st.sampled_from(monos), coeffs), max_size=4
    ).map(lambda items: Poly.from_terms(arity, items))


def atoms(arity=2):
    return st.builds(Atom, small_polys(arity), st.sampled_from(list(Rel)))


def formulas(arity=2):
    base = atoms(arity) | st.just(TRUE) | st.just(FALSE)
    return st.recursive(
        base,
        lambda kids: st.builds(lambda xs: f_and(*xs), st.lists(kids, min_size=1, max_size=3))
        | st.builds(lambda xs: f_or(*xs), st.lists(kids, min_size=1, max_size=3)),
        max_leaves=8,
    )


def points(arity=2):
    return st.lists(
        st.fractions(min_value=-3, max_value=3, max_denominator=4),
        min_size=arity,
        max_size=arity,
    )


class TestConstructors:
    def test_constants_absorb(self):
        a = Atom(X2, Rel.LT)
        assert f_and(a, TRUE) == a
        assert f_and(a, FALSE) == FALSE
        assert f_or(a, FALSE) == a
        assert f_or(a, TRUE) == TRUE
        assert f_and() == TRUE
        assert f_or() == FALSE

    def test_flatten_and_dedup(self):
        a = Atom(X2, Rel.LT)
        b = Atom(Y2, Rel.GE)
        f = f_and(f_and(a, b), a)
        assert isinstance(f, And)
        assert len(f.children) == 2
        g = f_or(a, f_or(a, b))
        assert isinstance(g, Or)
        assert len(g.children) == 2

    def test_canonical_child_order(self):
        a = Atom(X2, Rel.LT)
        b = Atom(Y2, Rel.GE)
        assert f_and(a, b) == f_and(b, a)
        assert f_or(a, b) == f_or(b, a)

    def test_operators(self):
        a = Atom(X2, Rel.LT)
        b = Atom(Y2, Rel.GE)
        assert (a & b) == f_and(a, b)
        assert (a | b) == f_or(a, b)
        assert ~a == Atom(X2, Rel.GE)


class TestNegation:
    def test_atom_complements(self):
        assert negate(Atom(X2, Rel.LT)) == Atom(X2, Rel.GE)
        assert negate(Atom(X2, Rel.LE)) == Atom(X2, Rel.GT)
        assert negate(Atom(X2, Rel.GE)) == Atom(X2, Rel.LT)
        assert negate(Atom(X2, Rel.GT)) == Atom(X2, Rel.LE)

    def test_eq_splits(self):
        f = negate(Atom(X2, Rel.EQ))
        assert f == f_or(Atom(X2, Rel.LT), Atom(X2, Rel.GT))

    @given(formulas(), points())
    @settings(max_examples=80)
    def test_negation_semantics(self, f, pt):
        assert eval_formula(negate(f), pt) == (not eval_formula(f, pt))

    @given(formulas())
    @settings(max_examples=60)
    def test_double_negation_semantics(self, f):
        g = negate(negate(f))
        # not syntactically equal in general (EQ splits), but same atoms' polys
        for pt in ([Fraction(0), Fraction(0)], [Fraction(1), Fraction(-2)]):
            assert eval_formula(g, pt) == eval_formula(f, pt)


class TestEval:
    def test_rel_holds(self):
        p = X2 * X2 + Y2 * Y2 - 1  # unit circle
        inside = [Fraction(1, 2), Fraction(0)]
        on = [Fraction(1), Fraction(0)]
        out = [Fraction(2), Fraction(0)]
        assert Atom(p, Rel.LT).eval_at(inside)
        assert not Atom(p, Rel.LT).eval_at(on)
        assert Atom(p, Rel.LE).eval_at(on)
        assert Atom(p, Rel.EQ).eval_at(on)
        assert Atom(p, Rel.GT).eval_at(out)

    def test_connectives(self):
        a = Atom(X2, Rel.GE)
        b = Atom(Y2, Rel.GE)
        pt = [Fraction(1), Fraction(-1)]
        assert eval_formula(a | b, pt)
        assert not eval_formula(a & b, pt)


class TestDnf:
    def test_shapes(self):
        assert to_dnf(FALSE) == []
        assert to_dnf(TRUE) == [()]
        a = Atom(X2, Rel.LT)
        b = Atom(Y2, Rel.GE)
        c = Atom(X2 + Y2, Rel.GT)
        dnf = to_dnf((a | b) & c)
        assert len(dnf) == 2
        assert all(c in cl for cl in dnf)

    def test_cap(self):
        # (a1|b1) & ... & (a7|b7) has 128 clauses
        f = TRUE
        for i in range(7):
            p = X2 + i
            q = Y2 + i
            f = f_and(f, f_or(Atom(p, Rel.LT), Atom(q, Rel.GT)))
        with pytest.raises(DnfCapExceeded):
            to_dnf(f, cap=64)
        assert len(to_dnf(f, cap=128)) == 128

    @given(formulas(), points())
    @settings(max_examples=80)
    def test_dnf_equivalence(self, f, pt):
        try:
            clauses = to_dnf(f, cap=256)
        except DnfCapExceeded:
            return
        g = dnf_to_formula(clauses)
        assert eval_formula(g, pt) == eval_formula(f, pt)

    def test_clause_atoms_sorted_and_deduped(self):
        a = Atom(X2, Rel.LT)
        b = Atom(Y2, Rel.GE)
        dnf = to_dnf(f_and(b, a, b))
        assert dnf == [tuple(sorted((a, b), key=lambda at: at.key()))]


class TestUtilities:
    def test_atoms_of(self):
        a = Atom(X2, Rel.LT)
        b = Atom(Y2, Rel.GE)
        assert set(atoms_of((a & b) | a)) == {a, b}

    def test_formula_size(self):
        a = Atom(X2, Rel.LT)
        b = Atom(Y2, Rel.GE)
        assert formula_size(TRUE) == 0
        assert formula_size(a) == 1
        assert formula_size((a & b) | (a & b & Atom(X2 + Y2, Rel.EQ))) == 5

    def test_map_polys(self):
        a = Atom(X2, Rel.LT)
        f = map_polys(a | Atom(Y2, Rel.GE), lambda p: p * 2)
        assert f == f_or(Atom(2 * X2, Rel.LT), Atom(2 * Y2, Rel.GE))

    def test_normalized_atom(self):
        at = Atom(-X2 + 1, Rel.LE).normalized()
        assert at == Atom(X2 - 1, Rel.GE)


class TestPrinting:
    def test_golden(self):
        a = Atom(X2 * X2 + Y2 * Y2 - 1, Rel.LE)
        b = Atom(X2 - Y2, Rel.LT)
        c = Atom(Y2, Rel.EQ)
        names = ["x", "y"]
        assert formula_str(a, names) == "x^2 + y^2 - 1 <= 0"
        assert (
            formula_str(f_or(f_and(a, b), c), names)
            == "y = 0 | (x - y < 0 & x^2 + y^2 - 1 <= 0)"
        )
        assert formula_str(TRUE, names) == "true"
        assert formula_str(FALSE, names) == "false"

    def test_or_under_and_parenthesized(self):
        a = Atom(X2, Rel.LT)
        b = Atom(Y2, Rel.GT)
        c = Atom(X2 + Y2, Rel.GE)
        s = formula_str(f_and(f_or(a, b), c), ["x", "y"])
        assert "(" in s and ")" in s
