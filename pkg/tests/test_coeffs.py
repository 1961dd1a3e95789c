"""Quadratic-extension coefficient arithmetic."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from invgen.coeffs import (
    Quad,
    coeff_sign,
    coeff_str,
    make_quad,
    rational_bounds,
    split_square,
    sqrt_bounds,
    sqrt_coeff,
)

rats = st.fractions(min_value=-50, max_value=50, max_denominator=20)


class TestConstruction:
    def test_collapse_to_rational(self):
        assert make_quad(3, 0, 13) == Fraction(3)
        assert isinstance(make_quad(3, 0, 13), Fraction)
        # sqrt(4) = 2 is rational
        assert make_quad(1, 2, 4) == Fraction(5)
        # sqrt(12) = 2 sqrt(3)
        q = make_quad(0, 1, 12)
        assert isinstance(q, Quad)
        assert q.b == 2 and q.d == 3

    def test_split_square(self):
        assert split_square(1) == (1, 1)
        assert split_square(13) == (13, 1)
        assert split_square(52) == (13, 2)
        assert split_square(360) == (10, 6)

    def test_sqrt_coeff(self):
        assert sqrt_coeff(Fraction(1, 4)) == Fraction(1, 2)
        s = sqrt_coeff(Fraction(13))
        assert isinstance(s, Quad)
        assert s * s == Fraction(13)


class TestArithmetic:
    def test_field_ops(self):
        s13 = make_quad(0, 1, 13)
        x = make_quad(Fraction(3, 2), Fraction(1, 2), 13)  # (3+sqrt13)/2
        y = make_quad(Fraction(3, 2), Fraction(-1, 2), 13)
        # roots of l^2 - 3l - 1
        assert x + y == Fraction(3)
        assert x * y == Fraction(-1)
        assert x * x - 3 * x - 1 == Fraction(0)
        assert (s13 * s13) == Fraction(13)
        assert (x / x) == Fraction(1)
        assert (Fraction(1) / x) * x == Fraction(1)

    def test_mixing_rationals(self):
        q = make_quad(1, 1, 2)
        assert q + Fraction(1, 2) == make_quad(Fraction(3, 2), 1, 2)
        assert Fraction(2) * q == make_quad(2, 2, 2)
        assert 1 - q == make_quad(0, -1, 2)
        assert (Fraction(3) / q) * q == Fraction(3)

    def test_incompatible_fields_rejected(self):
        with pytest.raises(ValueError):
            make_quad(0, 1, 2) + make_quad(0, 1, 3)

    @given(rats, rats, rats, rats)
    def test_ring_axioms_in_q13(self, a, b, c, d):
        x = make_quad(a, b, 13)
        y = make_quad(c, d, 13)
        assert x + y == y + x
        assert x * y == y * x
        assert (x + y) * x == x * x + y * x

    @given(rats, rats)
    def test_division_inverts(self, a, b):
        x = make_quad(a, b, 13)
        if coeff_sign(x) == 0:
            return
        assert (x / x) == Fraction(1)
        y = make_quad(Fraction(1), Fraction(1), 13)
        assert (x * y) / y == x


class TestSign:
    def test_sign_cases(self):
        # sqrt(13) ~ 3.6056
        assert coeff_sign(make_quad(-3, 1, 13)) == 1
        assert coeff_sign(make_quad(-4, 1, 13)) == -1
        assert coeff_sign(make_quad(4, -1, 13)) == 1
        assert coeff_sign(make_quad(3, -1, 13)) == -1
        assert coeff_sign(make_quad(0, -1, 13)) == -1
        assert coeff_sign(Fraction(0)) == 0

    @given(rats, rats)
    def test_sign_matches_float(self, a, b):
        x = make_quad(a, b, 13)
        f = float(a) + float(b) * 13**0.5
        if abs(f) > 1e-9:
            assert coeff_sign(x) == (1 if f > 0 else -1)

    def test_comparisons(self):
        x = make_quad(0, 1, 2)
        assert x > 1
        assert x < Fraction(3, 2)
        assert x <= x


class TestBounds:
    def test_sqrt_bounds_tight(self):
        lo, hi = sqrt_bounds(Fraction(2))
        assert lo * lo <= 2 <= hi * hi
        assert hi - lo < Fraction(1, 2**60)
        lo, hi = sqrt_bounds(Fraction(9, 4))
        assert lo == hi == Fraction(3, 2)

    @given(st.fractions(min_value=0, max_value=1000, max_denominator=50))
    def test_sqrt_bounds_sound(self, x):
        lo, hi = sqrt_bounds(x)
        assert lo * lo <= x <= hi * hi

    def test_rational_bounds_quad(self):
        x = make_quad(Fraction(3, 2), Fraction(1, 2), 13)
        lo, hi = rational_bounds(x)
        assert lo <= hi
        fx = float(x)
        assert float(lo) <= fx <= float(hi)
        assert hi - lo < Fraction(1, 2**60)


class TestPrinting:
    def test_coeff_str(self):
        assert coeff_str(Fraction(3, 8)) == "3/8"
        assert coeff_str(Fraction(-2)) == "-2"
        assert coeff_str(make_quad(0, 1, 13)) == "sqrt(13)"
        assert coeff_str(make_quad(Fraction(3, 2), Fraction(1, 2), 13)) == "(3/2+1/2*sqrt(13))"
        assert coeff_str(make_quad(0, -1, 2)) == "-sqrt(2)"
