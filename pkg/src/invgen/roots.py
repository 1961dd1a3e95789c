"""Exact real-root isolation for univariate rational polynomials.

Rational roots are found exactly (divisor candidates on the integer-cleared
polynomial) and divided out; the remaining irrational roots are isolated with
Sturm-sequence bisection into disjoint rational intervals, each containing
exactly one root of the square-free part, refined below a width threshold.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .poly import Poly

DEFAULT_WIDTH = Fraction(1, 2**20)


def _coeffs(p: Poly) -> list[Fraction]:
    """Dense coefficient list c[0] + c[1] x + ... for a univariate Poly."""
    if p.arity != 1:
        used = p.variables()
        if len(used) > 1:
            raise ValueError("polynomial is not univariate")
        i = used.pop() if used else 0
        out = [Fraction(0)] * (p.degree_in(i) + 1 if not p.is_zero() else 1)
        for m, c in p.terms.items():
            out[m[i]] = Fraction(c)
        return out
    out = [Fraction(0)] * (p.total_degree() + 1 if not p.is_zero() else 1)
    for m, c in p.terms.items():
        out[m[0]] = Fraction(c)
    return out


def _trim(c: list[Fraction]) -> list[Fraction]:
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _deg(c: Sequence[Fraction]) -> int:
    return len(c) - 1 if any(v != 0 for v in c) else -1


def _eval(c: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for v in reversed(c):
        acc = acc * x + v
    return acc


def _deriv(c: Sequence[Fraction]) -> list[Fraction]:
    if len(c) <= 1:
        return [Fraction(0)]
    return [c[i] * i for i in range(1, len(c))]


def _rem(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    a = list(a)
    db, lb = _deg(b), b[_deg(b)]
    while _deg(a) >= db and _deg(a) >= 0:
        da, la = _deg(a), a[_deg(a)]
        f = la / lb
        shift = da - db
        for i in range(db + 1):
            a[i + shift] -= f * b[i]
        a = _trim(a)
        if _deg(a) < 0:
            break
    return _trim(list(a))


def _gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    a, b = _trim(list(a)), _trim(list(b))
    while _deg(b) >= 0:
        a, b = b, _rem(a, b)
    if _deg(a) >= 0:
        lead = a[_deg(a)]
        a = [v / lead for v in a]
    return a


def _quo(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    a = list(a)
    db, lb = _deg(b), b[_deg(b)]
    q = [Fraction(0)] * max(_deg(a) - db + 1, 1)
    while _deg(a) >= db and _deg(a) >= 0:
        da, la = _deg(a), a[_deg(a)]
        f = la / lb
        shift = da - db
        q[shift] = f
        for i in range(db + 1):
            a[i + shift] -= f * b[i]
        a = _trim(a)
    return _trim(q)


def squarefree_part(p: Poly) -> Poly:
    """Exact square-free part of a univariate polynomial (monic-normalized)."""
    used = p.variables()
    if len(used) > 1:
        raise ValueError("squarefree_part needs a univariate polynomial")
    var = used.pop() if used else 0
    c = _trim(_coeffs(p))
    if _deg(c) <= 0:
        return p
    g = _gcd(c, _deriv(c))
    sf = _quo(c, g) if _deg(g) > 0 else c

    def mono(e: int):
        m = [0] * p.arity
        if p.arity:
            m[var] = e
        return tuple(m)

    return Poly.from_terms(p.arity, ((mono(i), v) for i, v in enumerate(sf) if v != 0))


def _sturm_chain(c: list[Fraction]) -> list[list[Fraction]]:
    chain = [c, _trim(_deriv(c))]
    while _deg(chain[-1]) > 0:
        r = _rem(chain[-2], chain[-1])
        if _deg(r) < 0:
            break
        chain.append([-v for v in r])
    return chain


def _sign_changes(chain: list[list[Fraction]], x: Fraction) -> int:
    signs = []
    for c in chain:
        v = _eval(c, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _root_bound(c: list[Fraction]) -> Fraction:
    # Cauchy bound: 1 + max |c_i| / |lead|
    d = _deg(c)
    lead = abs(c[d])
    mx = max((abs(v) for v in c[:d]), default=Fraction(0))
    return 1 + mx / lead


def _rational_roots(c: list[Fraction]) -> list[Fraction]:
    """All rational roots of c (exact), each reported once."""
    roots: list[Fraction] = []
    c = _trim(list(c))
    while c[0] == 0 and _deg(c) > 0:
        if 0 not in roots:
            roots.append(Fraction(0))
        c = c[1:]
    if _deg(c) <= 0:
        return sorted(roots)
    den = 1
    for v in c:
        den = den * v.denominator // _gcd_int(den, v.denominator)
    ic = [int(v * den) for v in c]
    a0, an = abs(ic[0]), abs(ic[-1])
    for p in _divisors(a0):
        for q in _divisors(an):
            for cand in (Fraction(p, q), Fraction(-p, q)):
                if cand not in roots and _eval(c, cand) == 0:
                    roots.append(cand)
    return sorted(roots)


def _gcd_int(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _divisors(n: int) -> list[int]:
    if n == 0:
        return [1]
    out = set()
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.add(d)
            out.add(n // d)
        d += 1
    return sorted(out)


def isolate_real_roots(
    p: Poly, width: Fraction = DEFAULT_WIDTH
) -> tuple[list[Fraction], list[tuple[Fraction, Fraction]]]:
    """Isolate all real roots of a nonzero univariate polynomial.

    Returns (rational_roots, intervals): rational roots exactly and sorted;
    each interval (lo, hi) contains exactly one irrational root of the
    square-free part, intervals are disjoint, sorted, and no wider than
    ``width``.  Together they cover every real root.
    """
    c = _trim(_coeffs(p))
    if _deg(c) < 0:
        raise ValueError("cannot isolate roots of the zero polynomial")
    if _deg(c) == 0:
        return [], []
    g = _gcd(c, _deriv(c))
    sf = _quo(c, g) if _deg(g) > 0 else c

    rr = _rational_roots(sf)
    rem = sf
    for r in rr:
        rem = _quo(rem, [-r, Fraction(1)])
    rem = _trim(rem)
    if _deg(rem) <= 0:
        return rr, []

    chain = _sturm_chain(rem)
    bound = _root_bound(rem)
    lo, hi = -bound - 1, bound + 1
    total = _sign_changes(chain, lo) - _sign_changes(chain, hi)
    intervals: list[tuple[Fraction, Fraction]] = []

    def refine(a: Fraction, b: Fraction, count: int):
        if count == 0:
            return
        if count == 1 and b - a <= width:
            intervals.append((a, b))
            return
        mid = (a + b) / 2
        # rem has no rational roots, so mid is never a root
        left = _sign_changes(chain, a) - _sign_changes(chain, mid)
        refine(a, mid, left)
        refine(mid, b, count - left)

    refine(lo, hi, total)
    intervals.sort()
    return rr, intervals
