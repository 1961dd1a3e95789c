"""Invariant generation for linear systems x' = Ax (+ b via equilibrium shift).

Everything is exact: the characteristic polynomial comes from the
Faddeev-LeVerrier recurrence, rational eigenvalues from divisor candidates,
and quadratic irrationals from the remaining degree <= 2 factor, so emitted
half-plane forms satisfy the Darboux identity lie(p) = lambda * p on the
nose, including over Q(sqrt(d)).  Higher-degree irrational spectra are
skipped and reported as coverage gaps rather than approximated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .coeffs import Coeff, Quad, coeff_sign, make_quad, split_square
from .factorhelp import factor_candidates
from .formula import Atom, Rel
from .hints import Certificate, DarbouxHint, LyapunovHint
from .poly import Poly
from .problem import Problem, enclose_in_box
from .roots import _deg, _eval, _quo, _rational_roots, _rem, _trim
from .templates import LinSystem

Matrix = list[list[Fraction]]


def identity_matrix(n: int) -> Matrix:
    return [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]


def neg_identity(n: int) -> Matrix:
    return [[Fraction(-1 if i == j else 0) for j in range(n)] for i in range(n)]


def transpose(a: Matrix) -> Matrix:
    n = len(a)
    return [[a[j][i] for j in range(n)] for i in range(n)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return [
        [sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n)]
        for i in range(n)
    ]


def mat_vec(a: Matrix, v: list[Coeff]) -> list[Coeff]:
    return [sum((a[i][j] * v[j] for j in range(len(v))), Fraction(0)) for i in range(len(a))]


def charpoly(a: Matrix) -> Poly:
    """det(tI - A) as a univariate polynomial (arity 1), exactly."""
    n = len(a)
    coeffs = [Fraction(1)]  # leading first
    m = identity_matrix(n)
    for k in range(1, n + 1):
        am = mat_mul(a, m)
        ck = -sum(am[i][i] for i in range(n)) / k
        coeffs.append(ck)
        for i in range(n):
            am[i][i] += ck
        m = am
    t = Poly.var(1, 0)
    out = Poly.zero(1)
    for i, c in enumerate(coeffs):
        out = out + Poly.const(1, c) * t ** (n - i)
    return out


@dataclass
class EigenPair:
    value: Coeff
    vector: tuple[Coeff, ...]
    source: str = "A"


@dataclass
class EigenReport:
    pairs: list[EigenPair] = field(default_factory=list)
    gaps: list[str] = field(default_factory=list)
    eigenvalues: list[Coeff] = field(default_factory=list)  # with multiplicity

    @property
    def complete(self) -> bool:
        return not self.gaps


def _dense(p: Poly) -> list[Fraction]:
    d = p.total_degree()
    return [Fraction(p.coeff((k,))) for k in range(d + 1)]


def _real_spectrum(cp: Poly) -> tuple[list[tuple[Coeff, int]], list[str]]:
    """(eigenvalue, multiplicity) pairs plus coverage-gap notes."""
    c = _trim(_dense(cp))
    out: list[tuple[Coeff, int]] = []
    gaps: list[str] = []
    for r in _rational_roots(c):
        mult = 0
        while _deg(c) > 0 and _eval(c, r) == 0:
            c = _quo(c, [-r, Fraction(1)])
            mult += 1
        if mult:
            out.append((r, mult))
    if _deg(c) >= 1:
        # try verified irreducible factors of what remains
        rem_poly = Poly.from_terms(1, (((i,), v) for i, v in enumerate(c)))
        factors = factor_candidates(rem_poly)
        work = c
        for f in factors:
            fd = _dense(f)
            if _deg(fd) != 2:
                continue
            while True:
                if _deg(work) < 2 or _trim(_rem(work, fd)) != [Fraction(0)]:
                    break
                a2, a1, a0 = fd[2], fd[1], fd[0]
                disc = a1 * a1 - 4 * a2 * a0
                if disc > 0:
                    core, s = split_square(disc.numerator * disc.denominator)
                    scale = Fraction(s, disc.denominator)
                    r1 = make_quad(-a1 / (2 * a2), scale / (2 * a2), core)
                    r2 = make_quad(-a1 / (2 * a2), -scale / (2 * a2), core)
                    for r in (r1, r2):
                        for i, (v, m) in enumerate(out):
                            if v == r:
                                out[i] = (v, m + 1)
                                break
                        else:
                            out.append((r, 1))
                elif disc == 0:
                    pass  # rational double root: already peeled above
                else:
                    gaps.append("complex pair")
                work = _quo(work, fd)
        if _deg(work) >= 1:
            gaps.append(f"irreducible factor of degree {_deg(work)} not handled")
    return out, gaps


def exact_eigenpairs(a: Matrix, source: str = "A") -> EigenReport:
    n = len(a)
    report = EigenReport()
    for row in a:
        for v in row:
            if not isinstance(v, (Fraction, int)):
                report.gaps.append("non-rational matrix entries")
                return report
    spectrum, gaps = _real_spectrum(charpoly(a))
    if not spectrum and gaps and all(g == "complex pair" for g in gaps):
        gaps = ["complex only"]
    report.gaps.extend(gaps)
    for value, mult in spectrum:
        report.eigenvalues.extend([value] * mult)
        rows = [[a[i][j] - (value if i == j else 0) for j in range(n)] for i in range(n)]
        basis = LinSystem(n, rows, [Fraction(0)] * n).nullspace()
        for vec in basis:
            report.pairs.append(EigenPair(value=value, vector=tuple(vec), source=source))
    if not spectrum and not report.gaps:
        report.gaps.append("complex only")
    return report


def invariant_halfplanes(a: Matrix) -> list[tuple[Poly, Coeff]]:
    """Linear forms p with lie(p) = lambda p, from left eigenvectors of A."""
    n = len(a)
    rhs = [
        Poly.from_terms(
            n, ((tuple(1 if j == k else 0 for k in range(n)), a[i][j]) for j in range(n))
        )
        for i in range(n)
    ]
    out: list[tuple[Poly, Coeff]] = []
    for pair in exact_eigenpairs(transpose(a), source="A^T").pairs:
        p = Poly.zero(n)
        for i, vi in enumerate(pair.vector):
            p = p + Poly.const(n, vi) * Poly.var(n, i)
        lam = pair.value
        if (p.lie_derivative(rhs) - Poly.const(n, lam) * p).is_zero():
            out.append((p, lam))
    return out


def _leading_minors(m: Matrix) -> list[Fraction]:
    n = len(m)
    return [_det([row[: k + 1] for row in m[: k + 1]]) for k in range(n)]


def _det(m: Matrix) -> Fraction:
    n = len(m)
    mat = [list(map(Fraction, row)) for row in m]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if mat[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            mat[col], mat[piv] = mat[piv], mat[col]
            det = -det
        det *= mat[col][col]
        inv = 1 / mat[col][col]
        for r in range(col + 1, n):
            f = mat[r][col] * inv
            if f:
                for cc in range(col, n):
                    mat[r][cc] -= f * mat[col][cc]
    return det


def is_negative_definite(q: Matrix) -> bool:
    if any(q[i][j] != q[j][i] for i in range(len(q)) for j in range(len(q))):
        return False
    return all(
        coeff_sign(m) == (1 if k % 2 else -1)
        for k, m in enumerate(_leading_minors(q))
    )


def is_positive_definite(p: Matrix) -> bool:
    if any(p[i][j] != p[j][i] for i in range(len(p)) for j in range(len(p))):
        return False
    return all(m > 0 for m in _leading_minors(p))


def lyapunov_sublevel(a: Matrix, q: Matrix | None = None) -> tuple[Poly, Matrix] | None:
    """Solve A^T P + PA = Q for symmetric positive-definite P; V = x^T P x."""
    n = len(a)
    if q is None:
        q = neg_identity(n)
    if not is_negative_definite(q):
        raise ValueError("q must be symmetric negative-definite")
    unknowns = [(i, j) for i in range(n) for j in range(i, n)]
    idx = {u: k for k, u in enumerate(unknowns)}

    def p_entry(i: int, j: int) -> int:
        return idx[(i, j) if i <= j else (j, i)]

    rows = []
    rhs = []
    for i in range(n):
        for j in range(i, n):
            # (A^T P + P A)[i][j] = sum_k a[k][i] p[k][j] + p[i][k] a[k][j]
            row = [Fraction(0)] * len(unknowns)
            for k in range(n):
                row[p_entry(k, j)] += a[k][i]
                row[p_entry(i, k)] += a[k][j]
            rows.append(row)
            rhs.append(Fraction(q[i][j]))
    sol = LinSystem(len(unknowns), rows, rhs).solve()
    if sol is None:
        return None
    p = [[Fraction(0)] * n for _ in range(n)]
    for (i, j), k in idx.items():
        p[i][j] = p[j][i] = Fraction(sol[k])
    # re-verify the matrix identity exactly
    lhs = mat_mul(transpose(a), p)
    pa = mat_mul(p, a)
    for i in range(n):
        for j in range(n):
            if lhs[i][j] + pa[i][j] != q[i][j]:
                return None
    if not is_positive_definite(p):
        return None
    v = Poly.zero(n)
    for i in range(n):
        for j in range(n):
            if p[i][j]:
                v = v + Poly.const(n, p[i][j]) * Poly.var(n, i) * Poly.var(n, j)
    return v, p


class FiFilter(Enum):
    RULED_OUT = "RuledOut"
    POSSIBLE = "Possible"
    UNKNOWN = "Unknown"


def rational_fi_nonexistence(a: Matrix) -> FiFilter:
    """Integer-relation filter on the spectrum: k . lambda = 0 solvable?"""
    report = exact_eigenpairs(a)
    n = len(a)
    if report.gaps or len(report.eigenvalues) != n:
        return FiFilter.UNKNOWN
    values = report.eigenvalues
    if n == 0:
        return FiFilter.RULED_OUT
    # each eigenvalue contributes (rational part, sqrt-part per radicand)
    radicands = sorted({v.d for v in values if isinstance(v, Quad)})
    rows = [[v.a if isinstance(v, Quad) else Fraction(v) for v in values]]
    for d in radicands:
        rows.append(
            [v.b if isinstance(v, Quad) and v.d == d else Fraction(0) for v in values]
        )
    basis = LinSystem(n, rows, [Fraction(0)] * len(rows)).nullspace()
    return FiFilter.POSSIBLE if basis else FiFilter.RULED_OUT


def system_matrix(prob: Problem) -> tuple[Matrix, list[Fraction]] | None:
    """Extract (A, b) from x' = Ax + b when every RHS is affine with
    rational coefficients; None otherwise."""
    n = prob.dim
    a = [[Fraction(0)] * n for _ in range(n)]
    b = [Fraction(0)] * n
    for i, f in enumerate(prob.system.rhs):
        if f.total_degree() > 1:
            return None
        for m, c in f.terms.items():
            if not isinstance(c, Fraction):
                return None
            deg = sum(m)
            if deg == 0:
                b[i] = c
            else:
                a[i][m.index(1)] = c
    return a, b


def linear_strategy(problem: Problem) -> list[Certificate]:
    """Half-plane and Lyapunov sublevel candidates for (affine) linear systems.

    Offsets are anchored on an interval bound of the form over the Init box
    and shifted toward 0 as the cofactor sign requires, so every candidate's
    level condition is certifiable.  Returns [] when not applicable.
    """
    ab = system_matrix(problem)
    if ab is None:
        return []
    a, b = ab
    n = problem.dim
    shift = [Fraction(0)] * n
    if any(b):
        # move the equilibrium to the origin: solve A s = -b
        sol = LinSystem(n, [list(row) for row in a], [-v for v in b]).solve()
        if sol is None:
            return []
        shift = [Fraction(v) for v in sol]

    box = enclose_in_box(problem.init, n)
    out: list[Certificate] = []

    def shifted(p: Poly) -> Poly:
        return p.shift([-s for s in shift]) if any(shift) else p

    if box is not None:
        for p0, lam in invariant_halfplanes(a):
            p = shifted(p0)  # p(x) = p0(x - s); lie(p) = lam * p exactly
            lo, hi = p.interval_eval(box)
            sgn = coeff_sign(lam)
            # p <= k needs lam * k <= 0
            k_up = None
            if sgn < 0:
                k_up = max(hi, Fraction(0))
            elif sgn > 0:
                if hi <= 0:
                    k_up = hi
            else:
                k_up = hi
            if k_up is not None:
                out.append(
                    Certificate(
                        invariant=Atom(p - Poly.const(n, k_up), Rel.LE),
                        hint=DarbouxHint(p, Poly.const(n, lam)),
                        method="linear",
                    )
                )
            # p >= k needs lam * k >= 0
            k_lo = None
            if sgn < 0:
                k_lo = min(lo, Fraction(0))
            elif sgn > 0:
                if lo >= 0:
                    k_lo = lo
            else:
                k_lo = lo
            if k_lo is not None:
                out.append(
                    Certificate(
                        invariant=Atom(p - Poly.const(n, k_lo), Rel.GE),
                        hint=DarbouxHint(p, Poly.const(n, lam)),
                        method="linear",
                    )
                )

    lyap = lyapunov_sublevel(a)
    if lyap is not None and box is not None:
        v0, pmat = lyap
        v = shifted(v0)
        _, k_max = v.interval_eval(box)
        out.append(
            Certificate(
                invariant=Atom(v - Poly.const(n, k_max), Rel.LE),
                hint=LyapunovHint(
                    v=v,
                    p_matrix=tuple(tuple(row) for row in pmat),
                    q_matrix=tuple(tuple(row) for row in neg_identity(n)),
                ),
                method="linear",
            )
        )
    return out
