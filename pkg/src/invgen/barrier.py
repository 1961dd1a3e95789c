"""Exact barrier certificates via linear programming.

The generator searches for a polynomial p with p <= 0 on the initial set,
p >= eps > 0 on the unsafe set, and lie(p) <= lam * p on the domain.  Sublevel
zero of p is then an invariant separating the reachable states from the unsafe
ones.  All three premises are established by Handelman-style nonnegativity
certificates: the target polynomial is written as a nonnegative combination of
products of the constraint polynomials of one clause, an identity that is
checked exactly, so an LP solution can never smuggle in an unsound barrier.

Incompleteness is inherent: a true nonnegative polynomial may have no
certificate at the chosen product degree (x^2 - 2x + 1 over no constraints
already fails at degree 2), and the rate grid is finite.  Failure returns
None; it never returns an unchecked candidate.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .formula import Atom, DnfCapExceeded, Rel, clause_ge_polys, to_dnf
from .hints import BarrierHint, Certificate, NonnegCert
from .lp import LinearProgram
from .poly import Mono, Poly, grlex_key, monomials_up_to
from .problem import Problem

PRODUCT_CAP = 2000
DEFAULT_LAMBDAS = (Fraction(-2), Fraction(-1), Fraction(0), Fraction(1))
DEFAULT_EPS = Fraction(1, 100)
DEFAULT_DEGREES = (1, 2, 3)
ROUND_DENOMS = tuple(2**k for k in range(11))  # 1, 2, 4, ..., 1024


class ProductBudgetExceeded(Exception):
    """More Handelman products than the hard cap allows."""

    def __init__(self, count: int):
        super().__init__(f"would enumerate more than {PRODUCT_CAP} products ({count}+)")


def _is_rational(p: Poly) -> bool:
    return all(isinstance(c, Fraction) for _, c in p)


def handelman_products(
    constraints: Sequence[Poly], total_degree: int, arity: int | None = None
) -> list[tuple[tuple[int, ...], Poly]]:
    """All products of constraint powers up to the degree bound.

    Returns (exponents, product) pairs in a fixed graded order, starting from
    the empty product 1.  The count is capped at PRODUCT_CAP; beyond that a
    ProductBudgetExceeded is raised rather than silently truncating, since a
    truncated basis would make certification results order-dependent.
    ``arity`` is only needed when there are no constraints at all.
    """
    if total_degree < 0:
        raise ValueError("total_degree must be nonnegative")
    if arity is None:
        if not constraints:
            raise ValueError("arity required for an empty constraint list")
        arity = constraints[0].arity
    degs = [max(q.total_degree(), 0) for q in constraints]
    out: list[tuple[tuple[int, ...], Poly]] = []

    def rec(i: int, powers: list[int], acc: Poly, used: int):
        if len(out) > PRODUCT_CAP:
            raise ProductBudgetExceeded(len(out))
        if i == len(constraints):
            out.append((tuple(powers), acc))
            return
        # exponent 0 first, then climbing while the degree budget lasts
        e = 0
        term = acc
        while True:
            powers.append(e)
            rec(i + 1, powers, term, used + e * degs[i])
            powers.pop()
            e += 1
            extra = used + e * degs[i]
            if extra > total_degree or (degs[i] == 0 and e > total_degree):
                break
            term = term * constraints[i]

    rec(0, [], Poly.const(arity, 1), 0)
    out.sort(key=lambda pe: (sum(e * d for e, d in zip(pe[0], degs)), pe[0]))
    if len(out) > PRODUCT_CAP:
        raise ProductBudgetExceeded(len(out))
    return out


def certify_nonneg(
    target: Poly,
    constraints: Sequence[Poly],
    degree: int,
    strict: Sequence[bool] | None = None,
    strict_target: bool = False,
) -> NonnegCert | None:
    """Certificate that target >= 0 wherever every constraint is >= 0.

    Searches for target == constant + sum multipliers * products over the
    Handelman products of the constraints up to ``degree``.  With
    ``strict_target`` the conclusion is target > 0, which needs positive mass
    on the all-strict products (``strict`` marks which hypotheses are strict;
    the empty product always counts).  Returns None when the LP is infeasible
    at this degree; that is incompleteness, not a refutation.
    """
    if strict is None:
        strict = tuple(False for _ in constraints)
    if len(strict) != len(constraints):
        raise ValueError("strict flags must match constraints")
    if not _is_rational(target) or not all(_is_rational(q) for q in constraints):
        return None
    arity = target.arity
    if any(q.arity != arity for q in constraints):
        raise ValueError("constraint arity mismatch")

    products = handelman_products(constraints, degree, arity)
    rows: dict[Mono, dict[str, Fraction]] = {}

    def add(mono: Mono, var: str, c: Fraction):
        rows.setdefault(mono, {}).setdefault(var, Fraction(0))
        rows[mono][var] += c

    names = [f"m{j}" for j in range(len(products))]
    for name, (_, prod) in zip(names, products):
        for mono, c in prod:
            add(mono, name, c)

    lp = LinearProgram()
    for name in names:
        lp.var(name, nonneg=True)
    for mono in sorted(rows.keys() | {m for m, _ in target}, key=grlex_key):
        lp.add_eq(rows.get(mono, {}), target.coeff(mono))
    lp.minimize({name: Fraction(1) for name in names})
    res = lp.solve()
    if not res.ok:
        return None

    def strict_mass(values) -> Fraction:
        mass = Fraction(0)
        for name, (pw, _) in zip(names, products):
            if all(e == 0 or strict[i] for i, e in enumerate(pw)):
                mass += values.get(name, Fraction(0))
        return mass

    values = res.values
    if strict_target and strict_mass(values) <= 0:
        # retry favoring strict mass inside a bounded total budget
        lp2 = LinearProgram()
        for name in names:
            lp2.var(name, nonneg=True)
        for mono in sorted(rows.keys() | {m for m, _ in target}, key=grlex_key):
            lp2.add_eq(rows.get(mono, {}), target.coeff(mono))
        lp2.add_le(
            {name: Fraction(1) for name in names},
            (res.objective or Fraction(0)) + 1,
        )
        mass_vec = {
            name: Fraction(1)
            for name, (pw, _) in zip(names, products)
            if all(e == 0 or strict[i] for i, e in enumerate(pw))
        }
        lp2.maximize(mass_vec)
        res2 = lp2.solve()
        if not res2.ok or strict_mass(res2.values) <= 0:
            return None
        values = res2.values

    powers: list[tuple[int, ...]] = []
    mults: list[Fraction] = []
    constant = Fraction(0)
    for name, (pw, _) in zip(names, products):
        v = values.get(name, Fraction(0))
        if v == 0:
            continue
        if all(e == 0 for e in pw):
            constant += v
        else:
            powers.append(pw)
            mults.append(v)
    cert = NonnegCert(
        target=target,
        base=tuple(constraints),
        strict=tuple(strict),
        powers=tuple(powers),
        multipliers=tuple(mults),
        constant=constant,
        strict_target=strict_target,
    )
    bad = cert.verify()
    assert bad is None, f"LP produced an unsound certificate: {bad}"
    return cert


def certify_clause_empty(constraints: Sequence[Poly], degree: int = 2) -> NonnegCert | None:
    """Certificate that the conjunction of constraints >= 0 has no solutions.

    Proving -1 >= 0 on the region is a contradiction witness, so a returned
    certificate means the region is empty.  None only means no certificate
    at this degree.
    """
    if not constraints:
        return None
    arity = constraints[0].arity
    return certify_nonneg(Poly.const(arity, -1), constraints, degree)


def certify_region_empty(
    constraints: Sequence[Poly], strict: Sequence[bool], degree: int = 2
) -> NonnegCert | None:
    """Emptiness witness for {q_i >= 0, strictly where flagged}.

    The certificate proves 0 > 0 on the region: a nonnegative combination of
    constraint products that is identically zero as a polynomial yet carries
    positive mass on the all-strict products.  No point can satisfy that, so
    the region is empty.  Unlike the -1 form this also detects regions that
    are empty only because of strict inequalities (x <= 0 and x > 0).
    """
    if not constraints:
        return None
    arity = constraints[0].arity
    return certify_nonneg(
        Poly.zero(arity), constraints, degree, strict, strict_target=True
    )


# -- barrier search ---------------------------------------------------------------


def _clause_bases(
    formula, prod_degree: int, arity: int
) -> list[tuple[list[Poly], list[bool], list[tuple[tuple[int, ...], Poly]]]] | None:
    """DNF the formula and enumerate products per clause; None when unworkable."""
    try:
        clauses = to_dnf(formula)
    except DnfCapExceeded:
        return None
    out = []
    for clause in clauses:
        pairs = clause_ge_polys(clause)
        base = [q for q, _ in pairs]
        strict = [s for _, s in pairs]
        if not all(_is_rational(q) for q in base):
            return None
        try:
            prods = handelman_products(base, prod_degree, arity)
        except ProductBudgetExceeded:
            return None
        out.append((base, strict, prods))
    return out


def _make_cert(target, base, strict, products, values, prefix) -> NonnegCert:
    powers: list[tuple[int, ...]] = []
    mults: list[Fraction] = []
    constant = Fraction(0)
    for j, (pw, _) in enumerate(products):
        v = values.get(f"{prefix}_{j}", Fraction(0))
        if v == 0:
            continue
        if all(e == 0 for e in pw):
            constant += v
        else:
            powers.append(pw)
            mults.append(v)
    cert = NonnegCert(
        target=target,
        base=tuple(base),
        strict=tuple(strict),
        powers=tuple(powers),
        multipliers=tuple(mults),
        constant=constant,
    )
    bad = cert.verify()
    assert bad is None, f"barrier LP produced an unsound certificate: {bad}"
    return cert


def find_exp_barrier(
    prob: Problem,
    degree: int,
    lam_grid: Sequence[Fraction] = DEFAULT_LAMBDAS,
    eps: Fraction = DEFAULT_EPS,
) -> BarrierHint | None:
    """One LP per candidate rate lam, template coefficients and multipliers joint.

    The template ranges over all monomials up to ``degree``; each premise
    contributes one polynomial identity per DNF clause of the corresponding
    set, with multiplier variables over that clause's Handelman products.
    Returns the first rate in grid order that yields a nonzero barrier.
    """
    if degree < 1:
        raise ValueError("barrier template degree must be at least 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    sysm = prob.system
    n = sysm.dim
    if not all(_is_rational(f) for f in sysm.rhs):
        return None
    prod_degree = max(degree, degree + max(sysm.max_rhs_degree(), 1) - 1)

    init_parts = _clause_bases(prob.init, prod_degree, n)
    unsafe_parts = _clause_bases(prob.unsafe, prod_degree, n)
    domain_parts = _clause_bases(prob.domain, prod_degree, n)
    if init_parts is None or unsafe_parts is None or domain_parts is None:
        return None

    monos = monomials_up_to(n, degree)
    lie_mono = {m: Poly.mono(n, m).lie_derivative(sysm.rhs) for m in monos}
    avar = {m: f"a{k}" for k, m in enumerate(monos)}

    for lam in lam_grid:
        lam = Fraction(lam)
        lp = LinearProgram()
        for m in monos:
            lp.var(avar[m])
        mult_names: list[str] = []

        def identity_rows(template_of, products, prefix):
            """Rows asserting template == sum multipliers * products."""
            rows: dict[Mono, dict[str, Fraction]] = {}

            def add(mono: Mono, var: str, c: Fraction):
                if c == 0:
                    return
                rows.setdefault(mono, {}).setdefault(var, Fraction(0))
                rows[mono][var] += c

            for j, (_, prod) in enumerate(products):
                name = f"{prefix}_{j}"
                lp.var(name, nonneg=True)
                mult_names.append(name)
                for mono, c in prod:
                    add(mono, name, -c)
            for m in monos:
                for mono, c in template_of(m):
                    add(mono, avar[m], c)
            return rows

        rhs_const: dict[int, dict[Mono, Fraction]] = {}
        blocks: list[dict[Mono, dict[str, Fraction]]] = []
        for ci, (base, strict, prods) in enumerate(init_parts):
            blocks.append(identity_rows(lambda m: [(m, Fraction(-1))], prods, f"i{ci}"))
            rhs_const[len(blocks) - 1] = {}
        for ci, (base, strict, prods) in enumerate(unsafe_parts):
            blocks.append(identity_rows(lambda m: [(m, Fraction(1))], prods, f"u{ci}"))
            # target is p - eps, so the constant row picks up eps on the rhs
            rhs_const[len(blocks) - 1] = {tuple([0] * n): eps}
        for ci, (base, strict, prods) in enumerate(domain_parts):

            def flow_template(m, lam=lam):
                terms = [(mono, -c) for mono, c in lie_mono[m]]
                terms.append((m, lam))
                return terms

            blocks.append(identity_rows(flow_template, prods, f"d{ci}"))
            rhs_const[len(blocks) - 1] = {}

        for bi, rows in enumerate(blocks):
            extra = rhs_const[bi]
            for mono in sorted(rows.keys() | extra.keys(), key=grlex_key):
                lp.add_eq(rows.get(mono, {}), extra.get(mono, Fraction(0)))
        lp.minimize({name: Fraction(1) for name in mult_names})
        res = lp.solve()
        if not res.ok:
            continue

        p = Poly.from_terms(
            n, [(m, res.values.get(avar[m], Fraction(0))) for m in monos]
        )
        if p.is_zero():
            continue
        lie_p = p.lie_derivative(sysm.rhs)
        init_certs = tuple(
            _make_cert(-p, base, strict, prods, res.values, f"i{ci}")
            for ci, (base, strict, prods) in enumerate(init_parts)
        )
        unsafe_certs = tuple(
            _make_cert(p - Poly.const(n, eps), base, strict, prods, res.values, f"u{ci}")
            for ci, (base, strict, prods) in enumerate(unsafe_parts)
        )
        flow_certs = tuple(
            _make_cert(p * lam - lie_p, base, strict, prods, res.values, f"d{ci}")
            for ci, (base, strict, prods) in enumerate(domain_parts)
        )
        return BarrierHint(
            poly=p,
            lam=lam,
            eps=eps,
            init_certs=init_certs,
            unsafe_certs=unsafe_certs,
            flow_certs=flow_certs,
        )
    return None


def certify_barrier(
    prob: Problem, p: Poly, lam: Fraction, eps: Fraction = DEFAULT_EPS
) -> BarrierHint | None:
    """Certify a concrete barrier candidate; the search is only over multipliers."""
    sysm = prob.system
    n = sysm.dim
    if p.arity != n or p.is_zero() or not _is_rational(p):
        return None
    if not all(_is_rational(f) for f in sysm.rhs):
        return None
    degree = max(p.total_degree(), 1)
    prod_degree = max(degree, degree + max(sysm.max_rhs_degree(), 1) - 1)
    lam = Fraction(lam)
    lie_p = p.lie_derivative(sysm.rhs)
    targets = (
        (prob.init, -p),
        (prob.unsafe, p - Poly.const(n, eps)),
        (prob.domain, p * lam - lie_p),
    )
    groups: list[tuple[NonnegCert, ...]] = []
    for formula, target in targets:
        try:
            clauses = to_dnf(formula)
        except DnfCapExceeded:
            return None
        certs = []
        for clause in clauses:
            pairs = clause_ge_polys(clause)
            cert = certify_nonneg(
                target, [q for q, _ in pairs], prod_degree, [s for _, s in pairs]
            )
            if cert is None:
                return None
            certs.append(cert)
        groups.append(tuple(certs))
    return BarrierHint(
        poly=p,
        lam=lam,
        eps=eps,
        init_certs=groups[0],
        unsafe_certs=groups[1],
        flow_certs=groups[2],
    )


def round_and_recheck(
    candidate: Sequence[float],
    prob: Problem,
    lam: Fraction,
    eps: Fraction = DEFAULT_EPS,
) -> BarrierHint | None:
    """Snap an approximate coefficient vector to small rationals and certify it.

    The vector lists coefficients over all monomials up to some degree in
    graded order; the degree is recovered from the length.  Denominators are
    tried coarse to fine so the simplest certified barrier wins.
    """
    n = prob.system.dim
    degree = None
    for d in range(0, 13):
        if len(monomials_up_to(n, d)) == len(candidate):
            degree = d
            break
    if degree is None:
        raise ValueError("candidate length matches no monomial basis")
    monos = monomials_up_to(n, degree)
    seen: set[Poly] = set()
    for denom in ROUND_DENOMS:
        coeffs = [Fraction(round(float(c) * denom), denom) for c in candidate]
        p = Poly.from_terms(n, list(zip(monos, coeffs)))
        if p.is_zero() or p in seen:
            continue
        seen.add(p)
        hint = certify_barrier(prob, p, lam, eps)
        if hint is not None:
            return hint
    return None


def barrier_certificate(
    prob: Problem,
    degrees: Sequence[int] = DEFAULT_DEGREES,
    lam_grid: Sequence[Fraction] = DEFAULT_LAMBDAS,
    eps: Fraction = DEFAULT_EPS,
) -> Certificate | None:
    """First barrier over the degree ladder, packaged with its invariant p <= 0."""
    for degree in degrees:
        hint = find_exp_barrier(prob, degree, lam_grid, eps)
        if hint is not None:
            return Certificate(
                invariant=Atom(hint.poly, Rel.LE), hint=hint, method="barrier"
            )
    return None
