"""Floating-point RK4 integration and the numeric refuter.

Nothing here is trusted by the checker: simulation produces candidate
witnesses only, and every witness is re-confirmed by exact rational
evaluation before it is reported.  Points within the margin band of a set
boundary are inconclusive and skipped, so floating-point noise near a
boundary cannot fabricate a refutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .formula import TRUE, And, Atom, Formula, Or, _Const, eval_formula, f_and
from .poly import Poly
from .problem import Problem, enclose_in_box, sample_points

FloatVec = tuple[float, ...]


def compile_poly(p: Poly) -> Callable[[Sequence[float]], float]:
    """Fast float evaluator built once per polynomial."""
    parts = []
    for m, c in p.sorted_terms():
        factors = [repr(float(c))]
        for i, e in enumerate(m):
            if e == 0:
                continue
            if e <= 3:
                factors.extend([f"s[{i}]"] * e)
            else:
                factors.append(f"s[{i}]**{e}")
        parts.append("*".join(factors))
    src = " + ".join(parts) if parts else "0.0"
    return eval(f"lambda s: {src}")  # noqa: S307 - source is generated above


def compile_rhs(rhs: Sequence[Poly]) -> Callable[[FloatVec], FloatVec]:
    fns = [compile_poly(f) for f in rhs]
    return lambda s: tuple(fn(s) for fn in fns)


def rk4_step(field: Callable[[FloatVec], FloatVec], x: FloatVec, h: float) -> FloatVec:
    k1 = field(x)
    k2 = field(tuple(a + 0.5 * h * b for a, b in zip(x, k1)))
    k3 = field(tuple(a + 0.5 * h * b for a, b in zip(x, k2)))
    k4 = field(tuple(a + h * b for a, b in zip(x, k3)))
    return tuple(
        a + h / 6.0 * (b + 2.0 * c + 2.0 * d + e)
        for a, b, c, d, e in zip(x, k1, k2, k3, k4)
    )


def rk4_trajectory(
    rhs: Sequence[Poly], x0: Sequence[float], step: float, n_steps: int
):
    """Yield the n_steps+1 fixed-step RK4 states starting at x0."""
    field = compile_rhs(rhs)
    x = tuple(float(v) for v in x0)
    yield x
    for _ in range(n_steps):
        x = rk4_step(field, x, step)
        if not all(math.isfinite(v) for v in x):
            return
        yield x


def _compile_margin(f: Formula, margin: float):
    """Three-valued float evaluator: True, False, or None (inconclusive)."""
    if isinstance(f, _Const):
        value = f.value
        return lambda s: value
    if isinstance(f, Atom):
        g = compile_poly(f.poly)
        rel = f.rel

        def ev_atom(s, g=g, rel=rel):
            v = g(s)
            if -margin < v < margin:
                return None
            return rel.holds(-1 if v < 0 else 1)

        return ev_atom
    kids = [_compile_margin(c, margin) for c in f.children]
    if isinstance(f, And):

        def ev_and(s):
            out = True
            for k in kids:
                r = k(s)
                if r is False:
                    return False
                if r is None:
                    out = None
            return out

        return ev_and
    if isinstance(f, Or):

        def ev_or(s):
            out = False
            for k in kids:
                r = k(s)
                if r is True:
                    return True
                if r is None:
                    out = None
            return out

        return ev_or
    raise TypeError(f"not a formula: {f!r}")


@dataclass
class SimConfig:
    step: Fraction = Fraction(1, 1024)
    horizon: Fraction = Fraction(20)
    max_starts: int = 64
    margin: float = 1e-6
    seed: int = 0
    snap_denom: int = 2 ** 20


@dataclass
class SimWitness:
    """A trajectory that left the candidate set or entered Unsafe.

    The state is snapped to rationals and the violation is confirmed by
    exact evaluation; the start point satisfies Init exactly.
    """

    start: list[Fraction]
    time: Fraction
    state: list[Fraction]
    float_state: list[float]

    def describe(self, names: Sequence[str]) -> str:
        pt = ", ".join(f"{n}={float(v):.6g}" for n, v in zip(names, self.state))
        return f"trajectory from init reaches ({pt}) at t={float(self.time):.4g}"


def refute_by_simulation(
    candidate: Formula, problem: Problem, config: SimConfig | None = None
) -> SimWitness | None:
    """Search for an Init trajectory exiting the candidate or hitting Unsafe."""
    cfg = config or SimConfig()
    dim = problem.dim
    init = f_and(problem.init, problem.domain)
    box = enclose_in_box(init, dim) or enclose_in_box(problem.init, dim)
    if box is None:
        return None
    starts = sample_points(init, box, cfg.max_starts, cfg.seed)
    if not starts:
        return None

    field = compile_rhs(problem.system.rhs)
    cand_ev = _compile_margin(candidate, cfg.margin)
    unsafe_ev = _compile_margin(problem.unsafe, cfg.margin)
    dom_ev = None if problem.domain == TRUE else _compile_margin(problem.domain, cfg.margin)
    n_steps = int(cfg.horizon / cfg.step)
    h = float(cfg.step)

    for start in starts:
        x: FloatVec = tuple(float(v) for v in start)
        for k in range(n_steps + 1):
            if not all(math.isfinite(v) for v in x):
                break
            if dom_ev is not None and dom_ev(x) is False:
                break  # evolution domain left: nothing beyond is reachable
            if cand_ev(x) is False or unsafe_ev(x) is True:
                snapped = [
                    Fraction(round(v * cfg.snap_denom), cfg.snap_denom) for v in x
                ]
                if not eval_formula(candidate, snapped) or eval_formula(
                    problem.unsafe, snapped
                ):
                    return SimWitness(
                        start=list(start),
                        time=Fraction(k) * cfg.step,
                        state=snapped,
                        float_state=list(x),
                    )
            if k < n_steps:
                x = rk4_step(field, x, h)
    return None
