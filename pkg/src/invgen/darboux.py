"""Darboux polynomials and rational first integrals.

A Darboux polynomial satisfies lie(p) = cofactor * p, which makes its zero
set and both of its sign sets invariant under the flow.  When several
cofactors admit an integer linear dependence with a negative entry, the
corresponding power product of the polynomials is a rational first integral.

Discovery is best effort and layered: cheap syntactic candidates, an exact
determinant criterion (every invariant polynomial of degree <= d divides the
degree-d extactic determinant), and an alternating bilinear template solve.
Every candidate from every layer is confirmed by exact division before it is
returned, so an unlucky search can only miss polynomials, never emit bad ones.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Sequence

import sympy
from sympy.polys.matrices import DomainMatrix

from .barrier import ProductBudgetExceeded, certify_region_empty
from .factorhelp import factor_candidates, from_sympy, to_sympy
from .formula import Atom, DnfCapExceeded, Rel, clause_ge_polys, f_and, f_or, to_dnf
from .hints import (
    Certificate,
    ChainStep,
    ConjunctionChain,
    DarbouxHint,
    DdcCellEntry,
    DdcSplit,
    NonnegCert,
)
from .linear import invariant_halfplanes
from .poly import Poly, monomials_up_to
from .problem import Problem, clause_box
from .templates import LinSystem, PolyTemplate

log = logging.getLogger(__name__)

ALTERNATING_RESTARTS = 8
ALTERNATING_ITERS = 6
EXTACTIC_BASIS_CAP = 6
CELL_SPLIT_CAP = 6


@dataclass(frozen=True)
class DarbouxPoly:
    """Pair (p, cofactor) with lie(p) = cofactor * p exactly."""

    p: Poly
    cofactor: Poly


@dataclass(frozen=True)
class RationalFI:
    """Power product prod p_i^k_i that is constant along the flow.

    Positive exponents form the numerator, negative ones the denominator;
    at least one exponent is negative (otherwise the product would already
    be a polynomial first integral).
    """

    parts: tuple[DarbouxPoly, ...]
    exponents: tuple[int, ...]

    def numerator(self) -> Poly:
        return self._side(positive=True)

    def denominator(self) -> Poly:
        return self._side(positive=False)

    def _side(self, positive: bool) -> Poly:
        arity = self.parts[0].p.arity
        out = Poly.const(arity, 1)
        for d, k in zip(self.parts, self.exponents):
            if positive and k > 0:
                out = out * d.p ** k
            elif not positive and k < 0:
                out = out * d.p ** (-k)
        return out


def cofactor_of(p: Poly, rhs: Sequence[Poly]) -> Poly | None:
    """Exact quotient lie(p)/p when the division is exact, else None."""
    if p.is_zero() or p.is_constant():
        raise ValueError("need a nonconstant polynomial")
    return p.divides(p.lie_derivative(rhs))


def _linear_part(rhs: Sequence[Poly]) -> list[list[Fraction]] | None:
    n = len(rhs)
    a = [[Fraction(0)] * n for _ in range(n)]
    nonzero = False
    for i, f in enumerate(rhs):
        for j in range(n):
            unit = tuple(1 if k == j else 0 for k in range(n))
            c = f.coeff(unit)
            if not isinstance(c, Fraction):
                return None
            a[i][j] = c
            nonzero = nonzero or c != 0
    return a if nonzero else None


def _homogeneous_parts(p: Poly) -> list[Poly]:
    by_deg: dict[int, list] = {}
    for m, c in p.terms.items():
        by_deg.setdefault(sum(m), []).append((m, c))
    return [
        Poly.from_terms(p.arity, items)
        for d, items in sorted(by_deg.items())
        if d > 0
    ]


def _heuristic_candidates(
    rhs: Sequence[Poly], extra: Sequence[Poly]
) -> list[Poly]:
    n = len(rhs)
    out: list[Poly] = [Poly.var(n, i) for i in range(n)]
    for f in rhs:
        if not f.is_constant():
            out.append(f)
            out.extend(_homogeneous_parts(f))
            facs = factor_candidates(f)
            out.extend(facs)
            if len(facs) > 1:
                sqf = facs[0]
                for g in facs[1:]:
                    sqf = sqf * g
                out.append(sqf)
    a = _linear_part(rhs)
    if a is not None:
        try:
            out.extend(p for p, _ in invariant_halfplanes(a))
        except Exception:
            pass
    out.extend(extra)
    return out


def _extactic_candidates(
    rhs: Sequence[Poly], degree: int, deflators: Sequence[Poly]
) -> list[Poly]:
    """Factors of the degree-d extactic determinant (exact necessity filter).

    Rows are iterated Lie derivatives of the monomial basis; any invariant
    polynomial of degree <= d divides the determinant, so its irreducible
    factors enumerate every possible candidate.  A vanishing determinant
    (e.g. systems with a first integral of that degree) yields nothing.
    """
    n = len(rhs)
    monos = monomials_up_to(n, degree)
    if len(monos) > EXTACTIC_BASIS_CAP:
        return []
    row = [Poly.mono(n, m, Fraction(1)) for m in monos]
    rows = [row]
    for _ in range(len(monos) - 1):
        row = [p.lie_derivative(rhs) for p in row]
        rows.append(row)
    try:
        mat = sympy.Matrix([[to_sympy(p) for p in r] for r in rows])
        det = DomainMatrix.from_Matrix(mat).det()
        expr = sympy.expand(det.as_expr() if hasattr(det, "as_expr") else det)
        e = from_sympy(expr, n)
    except Exception:
        return []
    if e.is_zero():
        return []
    for q in deflators:
        while not e.is_constant():
            quo = q.divides(e)
            if quo is None:
                break
            e = quo
    if e.is_constant():
        return []
    return factor_candidates(e)


def _alternating_candidates(rhs, degree, consider, deadline):
    """Bilinear template search: lie(p) = alpha * p with both sides unknown.

    Fixing the cofactor makes the identity linear in p (nullspace hands back
    candidates); fixing p makes it linear in the cofactor (a solvable system
    confirms p and sharpens the next round).  Restarted from small random
    integer cofactors with deterministic seeds.
    """
    n = len(rhs)
    r = max((f.total_degree() for f in rhs), default=1)
    p_t, _ = PolyTemplate.full(n, degree)
    alpha_t, _ = PolyTemplate.full(n, max(r - 1, 0))
    lie_t = p_t.lie_derivative(rhs)
    n_alpha = alpha_t.nparams
    for seed in range(ALTERNATING_RESTARTS):
        rng = random.Random(seed)
        b = [Fraction(rng.randint(-2, 2)) for _ in range(n_alpha)]
        for _ in range(ALTERNATING_ITERS):
            if time.monotonic() > deadline:
                return
            alpha = alpha_t.instantiate(b)
            null = (lie_t - p_t.mul_poly(alpha)).identity_to_linear().nullspace()
            picked = None
            for vec in null:
                cand = p_t.instantiate(vec)
                if not cand.is_constant():
                    consider(cand)
                    if picked is None:
                        picked = cand
            if picked is None:
                b = [Fraction(rng.randint(-2, 2)) for _ in range(n_alpha)]
                continue
            eq = alpha_t.mul_poly(picked) - PolyTemplate.from_poly(
                picked.lie_derivative(rhs), n_alpha
            )
            sol = eq.identity_to_linear().solve()
            if sol is None:
                b = [Fraction(rng.randint(-2, 2)) for _ in range(n_alpha)]
            else:
                b = sol


def find_darboux(
    rhs: Sequence[Poly],
    max_degree: int,
    budget: float = 5.0,
    heuristics: bool = True,
    extra_candidates: Sequence[Poly] = (),
) -> list[DarbouxPoly]:
    """Best-effort list of verified Darboux polynomials, degree-staged.

    Partial results on budget exhaustion; every entry passed exact division.
    """
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    deadline = time.monotonic() + budget
    found: dict[Poly, DarbouxPoly] = {}

    def consider(cand: Poly):
        cand = cand.content_normalized()
        if cand.is_constant() or cand in found:
            return
        cof = cofactor_of(cand, rhs)
        if cof is not None:
            found[cand] = DarbouxPoly(cand, cof)

    if heuristics:
        for cand in _heuristic_candidates(rhs, extra_candidates):
            if not cand.is_constant():
                consider(cand)
    for d in range(1, max_degree + 1):
        if time.monotonic() > deadline:
            break
        for cand in _extactic_candidates(rhs, d, list(found)):
            consider(cand)
        if time.monotonic() > deadline:
            break
        _alternating_candidates(rhs, d, consider, deadline)
    return sorted(
        found.values(), key=lambda d: (d.p.total_degree(), str(d.p))
    )


def rational_fi_from_darboux(
    ds: Sequence[DarbouxPoly], rhs: Sequence[Poly] | None = None
) -> RationalFI | None:
    """Integer cofactor dependence with a negative weight, verified exactly.

    Solves sum(k_i * cofactor_i) = 0 over the cofactors' coefficients; a
    primitive integer nullspace vector with a negative entry gives exponents
    whose power product is constant along the flow.  With rhs provided, the
    claim is additionally confirmed by lie(N)*D - N*lie(D) = 0.
    """
    if len(ds) < 2:
        return None
    monos = sorted({m for d in ds for m in d.cofactor.terms})
    rows = [[d.cofactor.coeff(m) for d in ds] for m in monos]
    for vec in LinSystem(len(ds), rows).nullspace():
        if not any(v < 0 for v in vec):
            continue
        exps = tuple(int(v) for v in vec)
        fi = RationalFI(tuple(ds), exps)
        if rhs is not None and not verify_rational_fi(fi, rhs):
            raise AssertionError("cofactor dependence did not yield a constant ratio")
        return fi
    return None


def verify_rational_fi(fi: RationalFI, rhs: Sequence[Poly]) -> bool:
    """Exact check that the power product is constant: N'D - ND' = 0."""
    num, den = fi.numerator(), fi.denominator()
    lhs = num.lie_derivative(rhs) * den - num * den.lie_derivative(rhs)
    return lhs.is_zero()


# -- sign-cell decomposition --------------------------------------------------------


def _empty_cell_certs(
    clauses, p: Poly, sign: int, deadline: float
) -> tuple[NonnegCert, ...] | None:
    """One contradiction witness per clause over clause & {sign(p) = sign}.

    The certificate layout (clause constraints first, then the sign-cell
    constraints) is part of the hint format and re-derived by the checker.
    """
    n = p.arity
    certs = []
    for clause in clauses:
        pairs = clause_ge_polys(clause)
        if sign == 0:
            pairs = pairs + [(p, False), (-p, False)]
        else:
            pairs = pairs + [(p * sign, True)]
        base = [q for q, _ in pairs]
        strict = [s for _, s in pairs]
        degree = max(2, max((q.total_degree() for q in base), default=0))
        cert = None
        for d in (degree, degree + 1):
            if time.monotonic() > deadline:
                return None
            try:
                cert = certify_region_empty(base, strict, d)
            except ProductBudgetExceeded:
                return None
            if cert is not None:
                break
        if cert is None:
            return None
        certs.append(cert)
    return tuple(certs)


def _band_chain(prob: Problem, steps: list[tuple[Poly, Poly, Atom]]):
    """Conjunction-chain certificate from (poly, cofactor, sign atom) steps."""
    chain_steps = []
    domain = prob.domain
    invs = []
    for p, cof, atom in steps:
        cert = Certificate(invariant=atom, hint=DarbouxHint(p, cof), method="darboux")
        chain_steps.append(ChainStep(cert, domain))
        domain = f_and(domain, atom)
        invs.append(atom)
    return Certificate(
        invariant=f_and(*invs),
        hint=ConjunctionChain(tuple(chain_steps)),
        method="rational_fi_band",
    )


def _rational_fi_refine(
    prob: Problem, max_degree: int, deadline: float
) -> Certificate | None:
    """Conserved band of a rational first integral around the initial set.

    The pencil num - c*den shares one cofactor for every c (the cofactor sums
    of both sides agree when the exponent dependence holds), so each band edge
    is itself a Darboux polynomial and its sign set is invariant.  Band edges
    come from exact interval division of the integral over the initial boxes;
    the denominator must keep one sign there.
    """
    rhs = prob.system.rhs
    slack = deadline - time.monotonic()
    if slack <= 0:
        return None
    ds = find_darboux(rhs, max_degree, budget=slack / 2)
    if len(ds) < 2:
        return None
    fi = rational_fi_from_darboux(ds, rhs)
    if fi is None:
        return None
    num, den = fi.numerator(), fi.denominator()
    n = num.arity
    try:
        clauses = to_dnf(f_and(prob.init, prob.domain))
    except DnfCapExceeded:
        return None
    if not clauses:
        return None
    lo = hi = None
    den_sign = 0
    for clause in clauses:
        box = clause_box(clause, n)
        if box is None:
            return None
        nlo, nhi = num.interval_eval(box)
        dlo, dhi = den.interval_eval(box)
        if dlo <= 0 <= dhi:
            return None
        s = 1 if dlo > 0 else -1
        if den_sign and s != den_sign:
            return None
        den_sign = s
        quots = [a / b for a in (nlo, nhi) for b in (dlo, dhi)]
        lo = min(quots) if lo is None else min(lo, *quots)
        hi = max(quots) if hi is None else max(hi, *quots)

    den_cof = cofactor_of(den, rhs)
    if den_cof is None:
        raise AssertionError("denominator of a rational FI must be Darboux")
    steps = [(den, den_cof, Atom(den, Rel.GT if den_sign > 0 else Rel.LT))]
    # lo <= num/den <= hi, multiplied through by den with its fixed sign
    edges = [(lo, Rel.GE), (hi, Rel.LE)] if lo != hi else [(lo, Rel.EQ)]
    for c, rel in edges:
        q = num - den * c
        if q.is_constant():
            continue
        q_cof = cofactor_of(q, rhs)
        if q_cof is None:
            raise AssertionError("band edge of a rational FI must be Darboux")
        if den_sign < 0 and rel is not Rel.EQ:
            rel = Rel.LE if rel is Rel.GE else Rel.GE
        steps.append((q, q_cof, Atom(q, rel)))
    return _band_chain(prob, steps)


Subsolver = Callable[[Problem], "Certificate | None"]


def darboux_cells_combine(
    prob: Problem,
    max_degree: int,
    budget: float = 10.0,
    subsolver: Subsolver | None = None,
) -> Certificate | None:
    """Split the state space along a Darboux zero set and solve per cell.

    Both sign sets and the zero set of a Darboux polynomial are invariant in
    forward and backward time, so the three cells exchange no trajectories
    and can be handled independently: a cell whose intersection with Init is
    certified empty contributes nothing, a cell certified disjoint from
    Unsafe is safe as a whole, and each remaining conflict cell becomes a
    subproblem (domain and initial set restricted to the cell) for the
    subsolver.  Pruning uses contradiction certificates only; sampling never
    prunes.  Default subsolver: rational-first-integral band refinement.
    """
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    deadline = time.monotonic() + budget
    try:
        init_clauses = to_dnf(prob.init)
        unsafe_clauses = to_dnf(prob.unsafe)
    except DnfCapExceeded:
        return None
    ds = find_darboux(prob.system.rhs, max_degree, budget=min(budget / 2, 5.0))
    if not ds:
        log.debug("ddc: no darboux polynomials for %s", prob.name)
        return None
    rel_of = {-1: Rel.LT, 0: Rel.EQ, 1: Rel.GT}
    solve = subsolver or (lambda sp: _rational_fi_refine(sp, max_degree, deadline))
    for d in ds[:CELL_SPLIT_CAP]:
        p = d.p
        entries: list[DdcCellEntry] = []
        parts = []
        failed = None
        for sign in (-1, 0, 1):
            sign_atom = Atom(p, rel_of[sign])
            iec = _empty_cell_certs(init_clauses, p, sign, deadline)
            if iec is not None:
                entries.append(
                    DdcCellEntry(sign=sign, kind="init_empty", empty_certs=iec)
                )
                continue
            uec = _empty_cell_certs(unsafe_clauses, p, sign, deadline)
            if uec is not None:
                entries.append(
                    DdcCellEntry(sign=sign, kind="unsafe_empty", empty_certs=uec)
                )
                parts.append(sign_atom)
                continue
            if time.monotonic() > deadline:
                log.info("ddc: budget exhausted splitting %s on %s", prob.name, p)
                return None
            sub = replace(
                prob,
                domain=f_and(prob.domain, sign_atom),
                init=f_and(prob.init, sign_atom),
            )
            solved = solve(sub)
            if solved is None:
                failed = sign
                break
            entries.append(DdcCellEntry(sign=sign, kind="sub", certificate=solved))
            parts.append(f_and(sign_atom, solved.invariant))
        if failed is not None:
            log.debug(
                "ddc: conflict cell sign %d of %s unsolved for %s", failed, p, prob.name
            )
            continue
        return Certificate(
            invariant=f_or(*parts),
            hint=DdcSplit(p, d.cofactor, tuple(entries)),
            method="ddc",
        )
    return None
