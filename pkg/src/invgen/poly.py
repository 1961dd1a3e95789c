"""Exact multivariate polynomials over Q (optionally Q(sqrt(d))).

A :class:`Poly` is a mapping from exponent vectors (tuples of ints, one slot
per variable) to nonzero exact coefficients.  The canonical term order is
graded lexicographic: compare total degree first, then the exponent tuple
itself, with the first variable strongest.  Everything downstream (printing,
division, template assembly) leans on that order being deterministic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .coeffs import Coeff, CoeffLike, Quad, coeff_sign, rational_bounds

Mono = tuple[int, ...]


def grlex_key(m: Mono) -> tuple[int, Mono]:
    return (sum(m), m)


def mono_mul(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


def mono_divides(a: Mono, b: Mono) -> bool:
    """True when monomial a divides monomial b."""
    return all(x <= y for x, y in zip(a, b))


def mono_div(b: Mono, a: Mono) -> Mono:
    return tuple(y - x for x, y in zip(a, b))


def monomials_up_to(arity: int, degree: int) -> list[Mono]:
    """All exponent vectors of total degree <= degree, graded-lex descending.

    The order is the same one Poly.sorted_terms uses, so templates built from
    this list line up with printed polynomials.
    """
    out: list[Mono] = []

    def rec_exact(prefix: list[int], rest: int, budget: int):
        if rest == 1:
            out.append(tuple(prefix) + (budget,))
            return
        for e in range(budget, -1, -1):
            prefix.append(e)
            rec_exact(prefix, rest - 1, budget - e)
            prefix.pop()

    for d in range(degree, -1, -1):
        if arity == 0:
            if d == 0:
                out.append(())
            continue
        rec_exact([], arity, d)
    return out


class Poly:
    """Immutable-by-convention exact polynomial."""

    __slots__ = ("arity", "terms", "_hash")

    def __init__(self, arity: int, terms: dict[Mono, Coeff] | None = None):
        self.arity = arity
        self.terms: dict[Mono, Coeff] = terms if terms is not None else {}
        self._hash: int | None = None

    # -- constructors ----------------------------------------------------

    @staticmethod
    def zero(arity: int) -> "Poly":
        return Poly(arity, {})

    @staticmethod
    def const(arity: int, c: CoeffLike) -> "Poly":
        c = _coeff(c)
        if coeff_sign(c) == 0:
            return Poly(arity, {})
        return Poly(arity, {(0,) * arity: c})

    @staticmethod
    def var(arity: int, i: int) -> "Poly":
        if not 0 <= i < arity:
            raise IndexError(f"variable index {i} out of range for arity {arity}")
        m = tuple(1 if j == i else 0 for j in range(arity))
        return Poly(arity, {m: Fraction(1)})

    @staticmethod
    def mono(arity: int, m: Mono, c: CoeffLike = 1) -> "Poly":
        c = _coeff(c)
        if coeff_sign(c) == 0:
            return Poly(arity, {})
        return Poly(arity, {tuple(m): c})

    @staticmethod
    def from_terms(arity: int, items: Iterable[tuple[Mono, CoeffLike]]) -> "Poly":
        acc: dict[Mono, Coeff] = {}
        for m, c in items:
            m = tuple(m)
            if len(m) != arity:
                raise ValueError("exponent vector arity mismatch")
            c = _coeff(c)
            cur = acc.get(m)
            nc = c if cur is None else cur + c
            if coeff_sign(nc) == 0:
                acc.pop(m, None)
            else:
                acc[m] = nc
        return Poly(arity, acc)

    # -- basic queries ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self.terms)

    def constant_value(self) -> Coeff:
        return self.terms.get((0,) * self.arity, Fraction(0))

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def degree_in(self, i: int) -> int:
        if not self.terms:
            return -1
        return max(m[i] for m in self.terms)

    def variables(self) -> set[int]:
        used: set[int] = set()
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    used.add(i)
        return used

    def coeff(self, m: Mono) -> Coeff:
        return self.terms.get(tuple(m), Fraction(0))

    def sorted_terms(self) -> list[tuple[Mono, Coeff]]:
        """Terms in graded-lex descending order (the canonical order)."""
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def leading_term(self) -> tuple[Mono, Coeff]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        m = max(self.terms, key=grlex_key)
        return m, self.terms[m]

    def __iter__(self) -> Iterator[tuple[Mono, Coeff]]:
        return iter(self.sorted_terms())

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        acc = dict(self.terms)
        for m, c in other.terms.items():
            cur = acc.get(m)
            nc = c if cur is None else cur + c
            if coeff_sign(nc) == 0:
                acc.pop(m, None)
            else:
                acc[m] = nc
        return Poly(self.arity, acc)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.arity, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Quad)):
            c = _coeff(other)
            if coeff_sign(c) == 0:
                return Poly.zero(self.arity)
            return Poly(self.arity, {m: v * c for m, v in self.terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        acc: dict[Mono, Coeff] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                c = c1 * c2
                cur = acc.get(m)
                nc = c if cur is None else cur + c
                if coeff_sign(nc) == 0:
                    acc.pop(m, None)
                else:
                    acc[m] = nc
        return Poly(self.arity, acc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, Quad)):
            c = _coeff(other)
            return Poly(self.arity, {m: v / c for m, v in self.terms.items()})
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Poly.const(self.arity, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def _coerce(self, other) -> "Poly | None":
        if isinstance(other, Poly):
            if other.arity != self.arity:
                raise ValueError("arity mismatch")
            return other
        if isinstance(other, (int, Fraction, Quad)):
            return Poly.const(self.arity, other)
        return None

    # -- comparisons ------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Quad)):
            other = Poly.const(self.arity, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.arity, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- calculus ---------------------------------------------------------

    def partial(self, i: int) -> "Poly":
        acc: dict[Mono, Coeff] = {}
        for m, c in self.terms.items():
            e = m[i]
            if e == 0:
                continue
            dm = m[:i] + (e - 1,) + m[i + 1 :]
            nc = c * e
            cur = acc.get(dm)
            nc = nc if cur is None else cur + nc
            if coeff_sign(nc) == 0:
                acc.pop(dm, None)
            else:
                acc[dm] = nc
        return Poly(self.arity, acc)

    def lie_derivative(self, rhs: Sequence["Poly"]) -> "Poly":
        """Derivative along the vector field ``x_i' = rhs[i]``."""
        if len(rhs) != self.arity:
            raise ValueError("vector field arity mismatch")
        out = Poly.zero(self.arity)
        for i, f in enumerate(rhs):
            pi = self.partial(i)
            if not pi.is_zero() and not f.is_zero():
                out = out + pi * f
        return out

    # -- evaluation / substitution ----------------------------------------

    def eval_at(self, point: Sequence[CoeffLike]) -> Coeff:
        if len(point) != self.arity:
            raise ValueError("point arity mismatch")
        pt = [_coeff(x) for x in point]
        # cache powers per variable
        maxdeg = [0] * self.arity
        for m in self.terms:
            for i, e in enumerate(m):
                if e > maxdeg[i]:
                    maxdeg[i] = e
        powers: list[list[Coeff]] = []
        for i in range(self.arity):
            row: list[Coeff] = [Fraction(1)]
            for _ in range(maxdeg[i]):
                row.append(row[-1] * pt[i])
            powers.append(row)
        total: Coeff = Fraction(0)
        for m, c in self.terms.items():
            v: Coeff = c
            for i, e in enumerate(m):
                if e:
                    v = v * powers[i][e]
            total = total + v
        return total

    def subst(self, values: Sequence["Poly | None"]) -> "Poly":
        """Substitute values[i] for variable i (None keeps the variable).

        All substituted polynomials must share this polynomial's arity.
        """
        out = Poly.zero(self.arity)
        for m, c in self.terms.items():
            term = Poly.const(self.arity, c)
            for i, e in enumerate(m):
                if e == 0:
                    continue
                base = values[i] if values[i] is not None else Poly.var(self.arity, i)
                term = term * base**e
            out = out + term
        return out

    def shift(self, offset: Sequence[CoeffLike]) -> "Poly":
        """p(x + offset): recentre the polynomial at -offset."""
        vals: list[Poly | None] = []
        for i, c in enumerate(offset):
            c = _coeff(c)
            if coeff_sign(c) == 0:
                vals.append(None)
            else:
                vals.append(Poly.var(self.arity, i) + Poly.const(self.arity, c))
        return self.subst(vals)

    # -- division ---------------------------------------------------------

    def reduce_by(self, divisor: "Poly") -> tuple["Poly", "Poly"]:
        """Single-divisor division: self = q * divisor + r.

        No monomial of r is divisible by the leading monomial of the divisor
        (graded-lex).  Exact over the coefficient field.
        """
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if divisor.arity != self.arity:
            raise ValueError("arity mismatch")
        dlm, dlc = divisor.leading_term()
        q = Poly.zero(self.arity)
        r = Poly.zero(self.arity)
        h = self
        while not h.is_zero():
            hm, hc = h.leading_term()
            if mono_divides(dlm, hm):
                t = Poly.mono(self.arity, mono_div(hm, dlm), hc / dlc)
                q = q + t
                h = h - t * divisor
            else:
                t = Poly.mono(self.arity, hm, hc)
                r = r + t
                h = h - t
        return q, r

    def divides(self, other: "Poly") -> "Poly | None":
        """Return other/self when the division is exact, else None."""
        q, r = other.reduce_by(self)
        return q if r.is_zero() else None

    # -- interval arithmetic ----------------------------------------------

    def interval_eval(self, box: Sequence[tuple[Fraction, Fraction]]) -> tuple[Fraction, Fraction]:
        """Sound rational bounds of the polynomial over a closed box."""
        if len(box) != self.arity:
            raise ValueError("box arity mismatch")
        lo_acc = Fraction(0)
        hi_acc = Fraction(0)
        for m, c in self.terms.items():
            lo, hi = Fraction(1), Fraction(1)
            for i, e in enumerate(m):
                if e == 0:
                    continue
                lo, hi = _ival_mul((lo, hi), _ival_pow(box[i], e))
            clo, chi = rational_bounds(c)
            lo, hi = _ival_mul_const((lo, hi), clo, chi)
            lo_acc += lo
            hi_acc += hi
        return lo_acc, hi_acc

    # -- misc ---------------------------------------------------------------

    def content_normalized(self) -> "Poly":
        """Scale so coefficients are coprime integers, leading coeff positive.

        Only meaningful over Q; a Quad-coefficient polynomial is normalized to
        leading coefficient 1 instead.
        """
        if self.is_zero():
            return self
        _, lc = self.leading_term()
        if isinstance(lc, Quad) or any(isinstance(c, Quad) for c in self.terms.values()):
            return self / lc
        from math import gcd, lcm

        den = 1
        for c in self.terms.values():
            den = lcm(den, Fraction(c).denominator)
        num = 0
        for c in self.terms.values():
            num = gcd(num, abs(Fraction(c).numerator * den // Fraction(c).denominator))
        scale = Fraction(den, num if num else 1)
        out = self * scale
        _, lc2 = out.leading_term()
        if coeff_sign(lc2) < 0:
            out = -out
        return out

    def lift(self, index_map: Sequence[int], new_arity: int) -> "Poly":
        """Re-embed into a larger variable space; index_map[i] is the new slot."""
        acc: dict[Mono, Coeff] = {}
        for m, c in self.terms.items():
            nm = [0] * new_arity
            for i, e in enumerate(m):
                if e:
                    nm[index_map[i]] = e
            acc[tuple(nm)] = c
        return Poly(new_arity, acc)

    def project(self, keep: Sequence[int]) -> "Poly":
        """Restrict to the given variables; others must not occur."""
        pos = {old: new for new, old in enumerate(keep)}
        acc: dict[Mono, Coeff] = {}
        for m, c in self.terms.items():
            nm = [0] * len(keep)
            for i, e in enumerate(m):
                if e == 0:
                    continue
                if i not in pos:
                    raise ValueError("polynomial mentions a projected-out variable")
                nm[pos[i]] = e
            acc[tuple(nm)] = c
        return Poly(len(keep), acc)

    def to_str(self, names: Sequence[str] | None = None) -> str:
        from .coeffs import coeff_str

        if self.is_zero():
            return "0"
        if names is None:
            names = [f"x{i+1}" for i in range(self.arity)]
        parts: list[str] = []
        for m, c in self.sorted_terms():
            factors: list[str] = []
            for i, e in enumerate(m):
                if e == 1:
                    factors.append(names[i])
                elif e > 1:
                    factors.append(f"{names[i]}^{e}")
            neg = coeff_sign(c) < 0 and not isinstance(c, Quad)
            cc = -c if neg else c
            cstr = coeff_str(cc)
            if factors and cstr == "1":
                body = "*".join(factors)
            elif factors:
                body = cstr + "*" + "*".join(factors)
            else:
                body = cstr
            if not parts:
                parts.append(("-" if neg else "") + body)
            else:
                parts.append(("- " if neg else "+ ") + body)
        return " ".join(parts)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"Poly({self.to_str()!r})"


def _coeff(c: CoeffLike) -> Coeff:
    if isinstance(c, Quad):
        return c
    return Fraction(c)


# -- interval helpers ------------------------------------------------------


def _ival_mul(a: tuple[Fraction, Fraction], b: tuple[Fraction, Fraction]) -> tuple[Fraction, Fraction]:
    vals = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(vals), max(vals)


def _ival_pow(iv: tuple[Fraction, Fraction], e: int) -> tuple[Fraction, Fraction]:
    lo, hi = iv
    if e == 1:
        return lo, hi
    if e % 2 == 1:
        return lo**e, hi**e
    # even powers: range depends on whether the interval straddles zero
    alo, ahi = abs(lo), abs(hi)
    top = max(alo, ahi) ** e
    if lo <= 0 <= hi:
        return Fraction(0), top
    bot = min(alo, ahi) ** e
    return bot, top


def _ival_mul_const(iv: tuple[Fraction, Fraction], clo: Fraction, chi: Fraction) -> tuple[Fraction, Fraction]:
    vals = (iv[0] * clo, iv[0] * chi, iv[1] * clo, iv[1] * chi)
    return min(vals), max(vals)


def lie_derivative(p: Poly, rhs: Sequence[Poly]) -> Poly:
    return p.lie_derivative(rhs)
