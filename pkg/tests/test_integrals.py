"""First integrals: discovery, level bands, independence, invariant curves."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invgen.formula import TRUE, Atom, Rel, formula_str
from invgen.hints import FirstIntegralHint
from invgen.integrals import (
    FirstIntegral,
    find_polynomial_fis,
    fi_certificates,
    functional_independence,
    invariant_curve,
    level_invariants,
)
from invgen.parser import parse_poly, parse_problem
from invgen.poly import Poly
from invgen.problem import enclose_in_box, sample_points
from invgen.simulate import compile_poly, rk4_trajectory
from invgen.templates import LinSystem

F = Fraction

KASNER_RHS = [
    parse_poly("x2*x3 - x1^2", ["x1", "x2", "x3"]),
    parse_poly("x3*x1 - x2^2", ["x1", "x2", "x3"]),
    parse_poly("x1*x2 - x3^2", ["x1", "x2", "x3"]),
]
TWIST_RHS = [
    parse_poly("-x2", ["x1", "x2", "x3"]),
    parse_poly("x1", ["x1", "x2", "x3"]),
    parse_poly("x1*x2", ["x1", "x2", "x3"]),
]


def in_span(target: Poly, basis: list[Poly]) -> bool:
    if not basis:
        return target.is_zero()
    monos = set(target.terms) | {m for b in basis for m in b.terms}
    rows = [[b.coeff(m) for b in basis] for m in sorted(monos)]
    rhs = [target.coeff(m) for m in sorted(monos)]
    return LinSystem(len(basis), rows, rhs).solve() is not None


class TestFindFis:
    def test_kasner(self):
        fis = find_polynomial_fis(KASNER_RHS, 2)
        assert len(fis) == 1
        want = parse_poly("x1*x2 + x1*x3 + x2*x3", ["x1", "x2", "x3"])
        assert fis[0].p == want
        assert fis[0].degree == 2

    def test_twist_pair(self):
        fis = find_polynomial_fis(TWIST_RHS, 2)
        basis = [fi.p for fi in fis]
        assert len(basis) == 2
        names = ["x1", "x2", "x3"]
        for s in ("x1^2 + x2^2", "x1^2 + 2*x3"):
            assert in_span(parse_poly(s, names), basis)
        for fi in fis:
            assert fi.p.lie_derivative(TWIST_RHS).is_zero()
            assert not fi.p.is_constant()

    def test_pure_growth_has_none(self):
        rhs = [parse_poly("x", ["x"])]
        assert find_polynomial_fis(rhs, 3) == []

    def test_degree_bound_enforced(self):
        with pytest.raises(ValueError):
            find_polynomial_fis(KASNER_RHS, 0)

    @settings(max_examples=25, deadline=None)
    @given(
        s01=st.integers(-3, 3).filter(lambda v: v != 0),
        p0=st.integers(1, 4),
        p1=st.integers(1, 4),
    )
    def test_recovers_quadratic_form_on_conservative_linear(self, s01, p0, p1):
        # A = P^-1 S with S skew and P diagonal positive: x^T P x is conserved
        a = [
            [F(0), F(s01, p0)],
            [F(-s01, p1), F(0)],
        ]
        rhs = [
            Poly.from_terms(2, [((1, 0), a[i][0]), ((0, 1), a[i][1])])
            for i in range(2)
        ]
        x, y = Poly.var(2, 0), Poly.var(2, 1)
        conserved = p0 * x ** 2 + p1 * y ** 2
        assert conserved.lie_derivative(rhs).is_zero()
        basis = [fi.p for fi in find_polynomial_fis(rhs, 2)]
        assert in_span(conserved, basis)


ROT = (
    "vars: x, y\n"
    "ode:\n  x' = -y\n  y' = x\n"
    "init: (x - 1)^2 + y^2 <= 1/4\n"
    "unsafe: x^2 + y^2 >= 9\n"
)


class TestLevelInvariants:
    def fi_rot(self):
        prob = parse_problem(ROT).problem
        fis = find_polynomial_fis(prob.system.rhs, 2)
        assert len(fis) == 1
        return fis[0], prob

    def test_band_bounds_are_sound(self):
        fi, prob = self.fi_rot()
        bands = level_invariants(fi, prob)
        assert len(bands) == 1
        band = bands[0]
        assert band.k_min <= F(1, 4)
        assert band.k_max >= F(9, 4)
        box = enclose_in_box(prob.init, 2)
        for pt in sample_points(prob.init, box, 1000, seed=3):
            v = fi.p.eval_at(pt)
            assert band.k_min <= v <= band.k_max

    def test_point_init_gives_level_set(self):
        text = (
            "vars: x, y\node:\n  x' = -y\n  y' = x\n"
            "init: x = 1 & y = 0\nunsafe: x >= 3\n"
        )
        prob = parse_problem(text).problem
        fi = find_polynomial_fis(prob.system.rhs, 2)[0]
        bands = level_invariants(fi, prob)
        assert len(bands) == 1
        assert bands[0].k_min == bands[0].k_max == F(1)
        f = bands[0].formula()
        assert isinstance(f, Atom) and f.rel is Rel.EQ

    def test_unbounded_init_declines(self):
        text = "vars: x, y\node:\n  x' = -y\n  y' = x\ninit: x > 0\nunsafe: x <= -3\n"
        prob = parse_problem(text).problem
        fi = find_polynomial_fis(prob.system.rhs, 2)[0]
        assert level_invariants(fi, prob) == []

    def test_one_band_per_component(self):
        text = (
            "vars: x, y\node:\n  x' = -y\n  y' = x\n"
            "init: (x - 1)^2 + y^2 <= 1/100 | (x + 2)^2 + y^2 <= 1/100\n"
            "unsafe: x^2 + y^2 >= 16\n"
        )
        prob = parse_problem(text).problem
        fi = find_polynomial_fis(prob.system.rhs, 2)[0]
        bands = level_invariants(fi, prob)
        assert len(bands) == 2
        # the two rings are disjoint in value: one near 1, one near 4
        spans = sorted((b.k_min, b.k_max) for b in bands)
        assert spans[0][1] < spans[1][0]

    def test_conservation_along_rk4(self):
        fis = find_polynomial_fis(TWIST_RHS, 2)
        evals = [compile_poly(fi.p) for fi in fis]
        start = (1.0, 0.5, 0.25)
        base = [e(start) for e in evals]
        for state in rk4_trajectory(TWIST_RHS, start, 1e-3, 10000):
            for e, b in zip(evals, base):
                assert abs(e(state) - b) < 1e-6


class TestCertificates:
    def test_rotation_certificate(self):
        prob = parse_problem(ROT).problem
        certs = fi_certificates(prob, 2)
        assert len(certs) == 1
        c = certs[0]
        assert isinstance(c.hint, FirstIntegralHint)
        assert c.hint.poly.lie_derivative(prob.system.rhs).is_zero()
        assert c.method == "first_integral"
        box = enclose_in_box(prob.init, 2)
        from invgen.formula import eval_formula

        for pt in sample_points(prob.init, box, 200, seed=7):
            assert eval_formula(c.invariant, pt)


class TestIndependence:
    def basis(self):
        return [fi for fi in find_polynomial_fis(TWIST_RHS, 2)]

    def test_independent_at_probe(self):
        fis = self.basis()
        assert functional_independence(fis, [F(0), F(1), F(0)])

    def test_duplicate_dependent(self):
        fis = self.basis()
        assert not functional_independence([fis[0], fis[0]], [F(0), F(1), F(0)])

    def test_vanishing_gradients(self):
        kas = find_polynomial_fis(KASNER_RHS, 2)
        assert not functional_independence(kas, [F(0), F(0), F(0)])

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            functional_independence(self.basis(), [F(0), F(1)])

    def test_too_many_integrals(self):
        fis = self.basis()
        x3 = FirstIntegral(Poly.var(3, 2))
        with pytest.raises(ValueError):
            functional_independence(fis + [x3], [F(0), F(1), F(0)])


class TestInvariantCurve:
    def test_twist_curve(self):
        fis = find_polynomial_fis(TWIST_RHS, 2)
        f = invariant_curve(fis, [F(0), F(1), F(0)])
        s = formula_str(f, ["x1", "x2", "x3"])
        assert "= 0" in s and len(s.split("&")) == 2

    def test_kasner_origin(self):
        kas = find_polynomial_fis(KASNER_RHS, 2)
        f = invariant_curve(kas, [F(0), F(0), F(1)])
        want = "x1*x2 + x1*x3 + x2*x3 = 0"
        assert formula_str(f, ["x1", "x2", "x3"]) == want

    def test_empty_is_true(self):
        assert invariant_curve([], [F(0)]) is TRUE

    def test_dependent_rejected(self):
        fis = find_polynomial_fis(TWIST_RHS, 2)
        with pytest.raises(ValueError):
            invariant_curve([fis[0], fis[0]], [F(0), F(1), F(0)])
