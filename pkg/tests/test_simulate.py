"""RK4 integration accuracy and the margin-banded numeric refuter."""

import math
from fractions import Fraction

from invgen.formula import TRUE, Atom, Rel, eval_formula
from invgen.parser import parse_problem
from invgen.poly import Poly
from invgen.simulate import (
    SimConfig,
    compile_poly,
    refute_by_simulation,
    rk4_trajectory,
)

X = Poly.var(2, 0)
Y = Poly.var(2, 1)


class TestIntegrator:
    def test_compile_poly(self):
        p = 3 * X ** 2 * Y - Fraction(1, 2) * Y + 1
        g = compile_poly(p)
        assert g((2.0, 3.0)) == 35.5
        assert g((0.0, 0.0)) == 1.0

    def test_exponential_decay_accuracy(self):
        x1 = Poly.var(1, 0)
        pts = list(rk4_trajectory([-x1], [1.0], step=1e-3, n_steps=1000))
        assert len(pts) == 1001
        assert abs(pts[-1][0] - math.exp(-1.0)) < 1e-9

    def test_rotation_conserves_radius(self):
        pts = list(rk4_trajectory([-Y, X], [1.0, 0.0], step=1e-3, n_steps=10000))
        worst = max(abs(x * x + y * y - 1.0) for x, y in pts)
        assert worst < 1e-6

    def test_blowup_stops_iteration(self):
        x1 = Poly.var(1, 0)
        pts = list(rk4_trajectory([x1 ** 2], [1.0], step=1e-2, n_steps=2000))
        assert len(pts) < 2001
        assert all(math.isfinite(p[0]) for p in pts)


def problem_1d(init: str, unsafe: str, rhs: str = "x"):
    return parse_problem(
        f"vars: x\node: x' = {rhs}\ninit: {init}\nunsafe: {unsafe}\n"
    ).problem


class TestRefuter:
    def test_finds_unsafe_trajectory(self):
        prob = problem_1d("x = 1", "x >= 2")
        w = refute_by_simulation(TRUE, prob, SimConfig(max_starts=4))
        assert w is not None
        assert w.start == [Fraction(1)]
        assert eval_formula(prob.unsafe, w.state)
        # doubling time of x' = x is ln 2
        assert abs(float(w.time) - math.log(2.0)) < 0.01

    def test_finds_candidate_exit(self):
        prob = problem_1d("x = 1", "false")
        cand = Atom(Poly.var(1, 0) - Fraction(3, 2), Rel.LT)
        w = refute_by_simulation(cand, prob, SimConfig(max_starts=4))
        assert w is not None
        assert not eval_formula(cand, w.state)

    def test_no_witness_on_safe_problem(self):
        text = (
            "vars: x, y\n"
            "ode:\n  x' = -y\n  y' = x\n"
            "init: x^2 + y^2 <= 1\n"
            "unsafe: x^2 + y^2 >= 4\n"
        )
        prob = parse_problem(text).problem
        cfg = SimConfig(max_starts=3, horizon=Fraction(5))
        assert refute_by_simulation(TRUE, prob, cfg) is None
        cand = Atom(X ** 2 + Y ** 2 - 2, Rel.LE)
        assert refute_by_simulation(cand, prob, cfg) is None

    def test_margin_band_skips_boundary(self):
        # a fixed point exactly on the unsafe boundary stays inconclusive
        prob = problem_1d("x = 0", "x >= 0", rhs="0")
        cfg = SimConfig(max_starts=2, horizon=Fraction(1))
        assert refute_by_simulation(TRUE, prob, cfg) is None

    def test_unsampleable_init_declines(self):
        prob = problem_1d("x >= 1", "x >= 2")  # unbounded init: no box
        assert refute_by_simulation(TRUE, prob, SimConfig(max_starts=2)) is None

    def test_domain_exit_stops_trajectory(self):
        text = (
            "vars: x\n"
            "ode: x' = 1\n"
            "domain: x <= 2\n"
            "init: x = 0\n"
            "unsafe: x >= 5\n"
        )
        prob = parse_problem(text).problem
        assert refute_by_simulation(TRUE, prob, SimConfig(max_starts=2)) is None

    def test_deterministic(self):
        text = (
            "vars: x, y\n"
            "ode:\n  x' = x\n  y' = y\n"
            "init: x >= 1 & x <= 2 & y >= 1 & y <= 2\n"
            "unsafe: x + y >= 10\n"
        )
        prob = parse_problem(text).problem
        cfg = SimConfig(max_starts=5, seed=3)
        w1 = refute_by_simulation(TRUE, prob, cfg)
        w2 = refute_by_simulation(TRUE, prob, cfg)
        assert w1 is not None and w2 is not None
        assert (w1.start, w1.time, w1.state) == (w2.start, w2.time, w2.state)

    def test_witness_description(self):
        prob = problem_1d("x = 1", "x >= 2")
        w = refute_by_simulation(TRUE, prob, SimConfig(max_starts=2))
        s = w.describe(["x"])
        assert "x=" in s and "t=" in s
