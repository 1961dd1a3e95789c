"""Polynomial first integrals and the invariants they induce.

A first integral is a nonconstant polynomial whose Lie derivative along the
flow vanishes identically, so its value is conserved on every trajectory.
Conservation makes any condition expressed in the integral's value invariant:
bands k_min <= p <= k_max anchored on the initial states, exact level sets,
and joint level curves of several independent integrals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .coeffs import Coeff, CoeffLike
from .formula import TRUE, Atom, Formula, Rel, f_and, f_or, to_dnf
from .hints import Certificate, FirstIntegralHint
from .poly import Poly
from .problem import Problem, clause_box
from .templates import LinSystem, PolyTemplate


@dataclass(frozen=True)
class FirstIntegral:
    """Nonconstant polynomial conserved by the flow: lie(p) = 0 exactly."""

    p: Poly

    @property
    def degree(self) -> int:
        return self.p.total_degree()


@dataclass(frozen=True)
class LevelInvariant:
    """Band k_min <= p <= k_max of a first integral (degenerate: p = k)."""

    fi: FirstIntegral
    k_min: Coeff
    k_max: Coeff

    def formula(self) -> Formula:
        n = self.fi.p.arity
        if self.k_min == self.k_max:
            return Atom(self.fi.p - Poly.const(n, self.k_min), Rel.EQ)
        return f_and(
            Atom(self.fi.p - Poly.const(n, self.k_max), Rel.LE),
            Atom(self.fi.p - Poly.const(n, self.k_min), Rel.GE),
        )


def find_polynomial_fis(rhs: Sequence[Poly], max_degree: int) -> list[FirstIntegral]:
    """Basis of the nonconstant first integrals of degree <= max_degree.

    Forcing lie(template) = 0 is linear in the template coefficients, so the
    nullspace of that system enumerates every first integral up to the degree
    bound.  Constant solutions are dropped.
    """
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    arity = len(rhs)
    template, _ = PolyTemplate.full(arity, max_degree)
    system = template.lie_derivative(rhs).identity_to_linear()
    out = []
    for vec in system.nullspace():
        p = template.instantiate(vec).content_normalized()
        if p.is_constant():
            continue
        if not p.lie_derivative(rhs).is_zero():
            raise AssertionError("nullspace vector is not a first integral")
        out.append(FirstIntegral(p))
    return out


def level_invariants(fi: FirstIntegral, prob: Problem) -> list[LevelInvariant]:
    """One conserved band per initial-region component, or nothing.

    Each DNF component of init & domain is enclosed in a box and the
    integral's range over that box anchors a band; the true extrema lie
    inside the interval enclosure, so the component sits inside its band.
    If any component has no box enclosure the initial set cannot be covered
    and nothing is emitted.
    """
    arity = prob.system.dim
    region = f_and(prob.init, prob.domain)
    clauses = to_dnf(region)
    if not clauses:
        return []
    bands = []
    for clause in clauses:
        box = clause_box(clause, arity)
        if box is None:
            return []
        lo, hi = fi.p.interval_eval(box)
        bands.append(LevelInvariant(fi, lo, hi))
    return bands


def fi_certificates(prob: Problem, max_degree: int) -> list[Certificate]:
    """Level-band certificates for every first integral found."""
    out = []
    for fi in find_polynomial_fis(prob.system.rhs, max_degree):
        bands = level_invariants(fi, prob)
        if not bands:
            continue
        inv = f_or(*[b.formula() for b in bands])
        out.append(Certificate(inv, FirstIntegralHint(fi.p), "first_integral"))
    return out


def functional_independence(
    fis: Sequence[FirstIntegral], x0: Sequence[CoeffLike]
) -> bool:
    """True iff the gradients of the integrals are independent at x0."""
    if not fis:
        return True
    arity = fis[0].p.arity
    if any(fi.p.arity != arity for fi in fis) or len(x0) != arity:
        raise ValueError("arity mismatch")
    if len(fis) > arity - 1:
        raise ValueError("at most dim-1 integrals can be independent on a curve")
    rows = [
        [fi.p.partial(i).eval_at(x0) for fi in fis] for i in range(arity)
    ]
    # full column rank iff the only combination of columns summing to 0 is 0
    return not LinSystem(len(fis), rows, [Fraction(0)] * arity).nullspace()


def invariant_curve(
    fis: Sequence[FirstIntegral], x0: Sequence[CoeffLike]
) -> Formula:
    """Joint level set through x0: the trajectory is trapped on it."""
    if not fis:
        return TRUE
    if not functional_independence(fis, x0):
        raise ValueError("integrals are not independent at the anchor point")
    arity = fis[0].p.arity
    return f_and(
        *[
            Atom(fi.p - Poly.const(arity, fi.p.eval_at(x0)), Rel.EQ)
            for fi in fis
        ]
    )
