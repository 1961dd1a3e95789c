"""Coefficient templates and exact linear algebra.

The undetermined-coefficients workhorse: a :class:`PolyTemplate` is a
polynomial whose coefficients are affine expressions over a parameter vector.
Forcing such a template to equal zero as a polynomial yields one linear
equation per monomial; :class:`LinSystem` solves those systems exactly and
enumerates nullspace bases scaled to primitive integer vectors so results are
reproducible run to run.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Callable, Sequence

from .coeffs import Coeff, CoeffLike, Quad, coeff_sign
from .poly import Mono, Poly, mono_mul, monomials_up_to


class AffExpr:
    """Affine expression c0 + sum(coeffs[j] * param_j)."""

    __slots__ = ("const", "lin")

    def __init__(self, const: Coeff = Fraction(0), lin: dict[int, Coeff] | None = None):
        self.const = const
        self.lin: dict[int, Coeff] = lin or {}

    @staticmethod
    def param(j: int) -> "AffExpr":
        return AffExpr(Fraction(0), {j: Fraction(1)})

    @staticmethod
    def of(c: CoeffLike) -> "AffExpr":
        c = c if isinstance(c, Quad) else Fraction(c)
        return AffExpr(c, {})

    def is_zero(self) -> bool:
        return coeff_sign(self.const) == 0 and not self.lin

    def __add__(self, other: "AffExpr") -> "AffExpr":
        lin = dict(self.lin)
        for j, c in other.lin.items():
            nc = lin.get(j, Fraction(0)) + c
            if coeff_sign(nc) == 0:
                lin.pop(j, None)
            else:
                lin[j] = nc
        return AffExpr(self.const + other.const, lin)

    def __neg__(self) -> "AffExpr":
        return AffExpr(-self.const, {j: -c for j, c in self.lin.items()})

    def __sub__(self, other: "AffExpr") -> "AffExpr":
        return self + (-other)

    def scale(self, c: CoeffLike) -> "AffExpr":
        if coeff_sign(c if isinstance(c, Quad) else Fraction(c)) == 0:
            return AffExpr()
        return AffExpr(self.const * c, {j: v * c for j, v in self.lin.items()})

    def eval(self, params: Sequence[CoeffLike]) -> Coeff:
        total = self.const
        for j, c in self.lin.items():
            total = total + c * params[j]
        return total

    def __repr__(self):
        return f"AffExpr({self.const!r}, {self.lin!r})"


class PolyTemplate:
    """Polynomial with affine-parameter coefficients."""

    __slots__ = ("arity", "nparams", "terms")

    def __init__(self, arity: int, nparams: int, terms: dict[Mono, AffExpr] | None = None):
        self.arity = arity
        self.nparams = nparams
        self.terms: dict[Mono, AffExpr] = terms or {}

    @staticmethod
    def full(arity: int, degree: int, homogeneous: bool = False) -> tuple["PolyTemplate", list[Mono]]:
        """Template with one fresh parameter per monomial up to the degree.

        Returns the template and the monomial list; parameter j corresponds to
        monomial j in the list (graded-lex descending).
        """
        monos = [
            m
            for m in monomials_up_to(arity, degree)
            if not homogeneous or sum(m) == degree
        ]
        terms = {m: AffExpr.param(j) for j, m in enumerate(monos)}
        return PolyTemplate(arity, len(monos), terms), monos

    @staticmethod
    def from_monomials(arity: int, monos: Sequence[Mono]) -> "PolyTemplate":
        terms = {tuple(m): AffExpr.param(j) for j, m in enumerate(monos)}
        return PolyTemplate(arity, len(monos), terms)

    @staticmethod
    def from_poly(p: Poly, nparams: int = 0) -> "PolyTemplate":
        return PolyTemplate(p.arity, nparams, {m: AffExpr.of(c) for m, c in p.terms.items()})

    def _set(self, m: Mono, e: AffExpr, acc: dict[Mono, AffExpr]):
        cur = acc.get(m)
        ne = e if cur is None else cur + e
        if ne.is_zero():
            acc.pop(m, None)
        else:
            acc[m] = ne

    def __add__(self, other: "PolyTemplate") -> "PolyTemplate":
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        acc = dict(self.terms)
        for m, e in other.terms.items():
            self._set(m, e, acc)
        return PolyTemplate(self.arity, max(self.nparams, other.nparams), acc)

    def __neg__(self) -> "PolyTemplate":
        return PolyTemplate(self.arity, self.nparams, {m: -e for m, e in self.terms.items()})

    def __sub__(self, other: "PolyTemplate") -> "PolyTemplate":
        return self + (-other)

    def mul_poly(self, p: Poly) -> "PolyTemplate":
        """Multiply by a concrete polynomial; coefficients stay affine."""
        acc: dict[Mono, AffExpr] = {}
        for m1, e in self.terms.items():
            for m2, c in p.terms.items():
                self._set(mono_mul(m1, m2), e.scale(c), acc)
        return PolyTemplate(self.arity, self.nparams, acc)

    def scale(self, c: CoeffLike) -> "PolyTemplate":
        return PolyTemplate(self.arity, self.nparams, {m: e.scale(c) for m, e in self.terms.items()})

    def partial(self, i: int) -> "PolyTemplate":
        acc: dict[Mono, AffExpr] = {}
        for m, e in self.terms.items():
            k = m[i]
            if k == 0:
                continue
            dm = m[:i] + (k - 1,) + m[i + 1 :]
            self._set(dm, e.scale(k), acc)
        return PolyTemplate(self.arity, self.nparams, acc)

    def lie_derivative(self, rhs: Sequence[Poly]) -> "PolyTemplate":
        out = PolyTemplate(self.arity, self.nparams, {})
        for i, f in enumerate(rhs):
            if f.is_zero():
                continue
            out = out + self.partial(i).mul_poly(f)
        return out

    def instantiate(self, params: Sequence[CoeffLike]) -> Poly:
        return Poly.from_terms(
            self.arity, ((m, e.eval(params)) for m, e in self.terms.items())
        )

    def identity_to_linear(self) -> "LinSystem":
        """Linear system equivalent to 'this template is the zero polynomial'.

        One row per monomial, monomials in graded-lex descending order for
        deterministic elimination.
        """
        rows: list[list[Coeff]] = []
        rhs: list[Coeff] = []
        for m in sorted(self.terms, key=lambda mm: (sum(mm), mm), reverse=True):
            e = self.terms[m]
            row: list[Coeff] = [Fraction(0)] * self.nparams
            for j, c in e.lin.items():
                row[j] = c
            rows.append(row)
            rhs.append(-e.const)
        return LinSystem(self.nparams, rows, rhs)


class LinSystem:
    """Exact linear system A x = b over Q or Q(sqrt(d))."""

    def __init__(self, nvars: int, rows: list[list[Coeff]], rhs: list[Coeff] | None = None):
        self.nvars = nvars
        self.rows = rows
        self.rhs = rhs if rhs is not None else [Fraction(0)] * len(rows)

    def _rref(self) -> tuple[list[list[Coeff]], list[Coeff], list[int]]:
        """Reduced row echelon form; returns (rows, rhs, pivot columns)."""
        rows = [list(r) for r in self.rows]
        rhs = list(self.rhs)
        m, n = len(rows), self.nvars
        pivots: list[int] = []
        r = 0
        for c in range(n):
            pr = None
            for i in range(r, m):
                if coeff_sign(rows[i][c]) != 0:
                    pr = i
                    break
            if pr is None:
                continue
            rows[r], rows[pr] = rows[pr], rows[r]
            rhs[r], rhs[pr] = rhs[pr], rhs[r]
            pc = rows[r][c]
            rows[r] = [v / pc for v in rows[r]]
            rhs[r] = rhs[r] / pc
            for i in range(m):
                if i != r and coeff_sign(rows[i][c]) != 0:
                    f = rows[i][c]
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
                    rhs[i] = rhs[i] - f * rhs[r]
            pivots.append(c)
            r += 1
            if r == m:
                break
        return rows, rhs, pivots

    def solve(self) -> list[Coeff] | None:
        """One particular solution, or None when inconsistent."""
        rows, rhs, pivots = self._rref()
        for i in range(len(pivots), len(rows)):
            if all(coeff_sign(v) == 0 for v in rows[i]) and coeff_sign(rhs[i]) != 0:
                return None
        x: list[Coeff] = [Fraction(0)] * self.nvars
        for i, c in enumerate(pivots):
            x[c] = rhs[i]
        return x

    def nullspace(self) -> list[list[Coeff]]:
        """Basis of the homogeneous nullspace, deterministic order.

        Over Q, vectors are scaled to primitive integer form with positive
        first nonzero entry.  Over a quadratic extension they are normalized
        to first nonzero entry 1.
        """
        rows, _, pivots = self._rref()
        free = [c for c in range(self.nvars) if c not in pivots]
        basis: list[list[Coeff]] = []
        for fc in free:
            v: list[Coeff] = [Fraction(0)] * self.nvars
            v[fc] = Fraction(1)
            for i, pc in enumerate(pivots):
                v[pc] = -rows[i][fc]
            basis.append(_normalize_vector(v))
        return basis

    def __repr__(self):
        return f"LinSystem({len(self.rows)} rows, {self.nvars} vars)"


def _normalize_vector(v: list[Coeff]) -> list[Coeff]:
    if any(isinstance(c, Quad) for c in v):
        lead = next((c for c in v if coeff_sign(c) != 0), None)
        if lead is None:
            return v
        return [c / lead for c in v]
    den = 1
    for c in v:
        den = lcm(den, Fraction(c).denominator)
    ints = [Fraction(c) * den for c in v]
    g = 0
    for c in ints:
        g = gcd(g, abs(int(c)))
    if g > 1:
        ints = [c / g for c in ints]
    lead = next((c for c in ints if c != 0), None)
    if lead is not None and lead < 0:
        ints = [-c for c in ints]
    return [Fraction(c) for c in ints]


def solve_linear(
    nvars: int, rows: list[list[Coeff]], rhs: list[Coeff]
) -> list[Coeff] | None:
    return LinSystem(nvars, rows, rhs).solve()
