"""Sign-cell decomposition: split on a Darboux zero set, solve per cell.

All expected invariants here were derived by hand from the cell structure;
the checker re-verifies every emitted certificate, so these tests pin both
the generator's output shape and its soundness.
"""

from fractions import Fraction as F

import pytest

from invgen.barrier import barrier_certificate
from invgen.checker import PROVED, check_certificate, check_safety
from invgen.darboux import darboux_cells_combine
from invgen.formula import Atom, Rel, f_and
from invgen.hints import DdcSplit, emit_hints, parse_hints
from invgen.poly import Poly
from invgen.problem import ODESystem, Problem

X = Poly.var(2, 0)
Y = Poly.var(2, 1)


def c2(v) -> Poly:
    return Poly.const(2, F(v))


def box_init(x_lo, x_hi, y_lo, y_hi):
    return f_and(
        Atom(X - c2(x_lo), Rel.GE), Atom(X - c2(x_hi), Rel.LE),
        Atom(Y - c2(y_lo), Rel.GE), Atom(Y - c2(y_hi), Rel.LE),
    )


class TestCellsCombine:
    def test_one_cell_separates(self):
        # x is darboux for x' = x; Init sits in x < 0, Unsafe in x >= 1
        prob = Problem(
            ODESystem(["x", "y"], [X, -Y]),
            init=box_init(-2, -1, -1, 1),
            unsafe=Atom(X - c2(1), Rel.GE),
            name="separated",
        )
        cert = darboux_cells_combine(prob, 1)
        assert cert is not None
        assert isinstance(cert.hint, DdcSplit)
        kinds = {e.sign: e.kind for e in cert.hint.cells}
        assert kinds[-1] == "unsafe_empty"
        assert kinds[0] == "init_empty"
        assert kinds[1] == "init_empty"
        assert cert.invariant == Atom(cert.hint.poly, Rel.LT)
        assert check_safety(cert, prob).status == PROVED

    def test_conflict_cell_solved_by_barrier(self):
        # the x > 0 cell still meets Unsafe; a linear barrier finishes it
        prob = Problem(
            ODESystem(["x", "y"], [X, -Y]),
            init=box_init(1, 2, F(1, 2), 1),
            unsafe=Atom(Y - c2(3), Rel.GE),
            name="needs_subsolver",
        )
        cert = darboux_cells_combine(
            prob, 1, subsolver=lambda sp: barrier_certificate(sp, degrees=(1, 2))
        )
        assert cert is not None
        kinds = {e.sign: e.kind for e in cert.hint.cells}
        assert kinds[1] == "sub"
        assert check_safety(cert, prob).status == PROVED

    def test_conflict_cell_solved_by_rational_fi_band(self):
        # default subsolver: x/y is conserved, its band blocks x >= 5y
        prob = Problem(
            ODESystem(["x", "y"], [X, Y]),
            init=box_init(1, 2, 1, 2),
            unsafe=f_and(Atom(X - Y * 5, Rel.GE), Atom(Y - c2(1), Rel.GE)),
            name="ray_band",
        )
        cert = darboux_cells_combine(prob, 1)
        assert cert is not None
        assert check_safety(cert, prob).status == PROVED

    def test_roundtrip(self):
        prob = Problem(
            ODESystem(["x", "y"], [X, -Y]),
            init=box_init(-2, -1, -1, 1),
            unsafe=Atom(X - c2(1), Rel.GE),
        )
        cert = darboux_cells_combine(prob, 1)
        text = emit_hints(cert, prob.names)
        back, names = parse_hints(text)
        assert back == cert
        assert names == prob.names

    def test_no_darboux_gives_nothing(self):
        prob = Problem(
            ODESystem(["x", "y"], [c2(1), c2(1)]),
            init=box_init(0, 1, 0, 1),
            unsafe=Atom(X - c2(9), Rel.GE),
        )
        assert darboux_cells_combine(prob, 1) is None

    def test_exhausted_budget_gives_nothing(self):
        prob = Problem(
            ODESystem(["x", "y"], [X, -Y]),
            init=box_init(1, 2, 1, 2),
            unsafe=Atom(Y - c2(3), Rel.GE),
        )
        assert darboux_cells_combine(prob, 2, budget=0.0) is None

    def test_degree_validation(self):
        prob = Problem(ODESystem(["x", "y"], [X, -Y]))
        with pytest.raises(ValueError):
            darboux_cells_combine(prob, 0)
