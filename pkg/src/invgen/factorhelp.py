"""Heuristic factorization bridge (untrusted side).

sympy is used here as a candidate generator only.  Callers must re-establish
everything they need about a returned factor by exact arithmetic (division,
Lie-derivative identities); nothing in the checking path depends on this
module being correct.
"""

from __future__ import annotations

from fractions import Fraction

import sympy

from .poly import Poly


def _symbols(arity: int):
    return sympy.symbols(f"v:{arity}") if arity else ()


def to_sympy(p: Poly, syms=None):
    syms = _symbols(p.arity) if syms is None else syms
    expr = sympy.Integer(0)
    for m, c in p.terms.items():
        if not isinstance(c, Fraction):
            raise ValueError("only rational coefficients convert")
        term = sympy.Rational(c.numerator, c.denominator)
        for s, e in zip(syms, m):
            if e:
                term *= s ** e
        expr += term
    return expr


def from_sympy(expr, arity: int, syms=None) -> Poly:
    syms = _symbols(arity) if syms is None else syms
    if not syms:
        val = sympy.Rational(expr)
        return Poly.const(arity, Fraction(val.p, val.q))
    sp = sympy.Poly(expr, *syms)
    terms = []
    for exps, coeff in sp.terms():
        if not coeff.is_Rational:
            raise ValueError(f"non-rational coefficient {coeff}")
        terms.append((tuple(int(e) for e in exps), Fraction(coeff.p, coeff.q)))
    return Poly.from_terms(arity, terms)


def factor_candidates(p: Poly) -> list[Poly]:
    """Nonconstant content-normalized irreducible factors of p, or [].

    Any failure (non-rational coefficients, sympy surprises) yields [] so
    callers can treat this as a best-effort hint source.
    """
    if p.is_zero() or p.is_constant():
        return []
    try:
        syms = _symbols(p.arity)
        expr = to_sympy(p, syms)
        if p.arity > 1:
            # factorization is much faster when the main (first) generator
            # is the variable of lowest degree
            sp = sympy.Poly(expr, *syms)
            order = sorted(range(p.arity), key=lambda i: (sp.degree(syms[i]), i))
            _, pairs = sympy.Poly(expr, *[syms[i] for i in order]).factor_list()
        else:
            _, pairs = sympy.factor_list(expr)
        out: list[Poly] = []
        for fac, _mult in pairs:
            q = from_sympy(fac.as_expr(), p.arity, syms).content_normalized()
            if not q.is_constant() and q not in out:
                out.append(q)
        return out
    except Exception:
        return []
