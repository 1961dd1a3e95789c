"""Exact coefficient arithmetic.

Coefficients are plain ``fractions.Fraction`` values by default.  Where a
computation leaves the rationals through a square root (eigenvalues of 2x2
blocks, mostly), values live in a real quadratic extension Q(sqrt(d)) and are
represented by :class:`Quad`.  The two kinds mix freely through the usual
operator protocol; a :class:`Quad` whose irrational part cancels collapses
back to a ``Fraction`` so equality and zero tests stay canonical.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Union

Rat = Fraction

#: Anything accepted where an exact coefficient is expected.
Coeff = Union[Fraction, "Quad"]
CoeffLike = Union[int, Fraction, "Quad"]


def split_square(n: int) -> tuple[int, int]:
    """Write ``n = core * s**2`` with square-free ``core``; return ``(core, s)``.

    Only needs to be fast for the small radicands produced by quadratic
    formulas, so trial division is fine.
    """
    if n < 0:
        raise ValueError("negative radicand has no real square root")
    if n == 0:
        return 0, 1
    core, s = n, 1
    d = 2
    while d * d <= core:
        dd = d * d
        while core % dd == 0:
            core //= dd
            s *= d
        d += 1
    return core, s


def _sqrt_exact(n: int) -> int | None:
    r = isqrt(n)
    return r if r * r == n else None


def make_quad(a: CoeffLike, b: CoeffLike, d: int) -> Coeff:
    """Canonical ``a + b*sqrt(d)``: collapses to ``Fraction`` when possible."""
    a = Fraction(a)
    b = Fraction(b)
    if b == 0 or d == 0:
        return a
    core, s = split_square(d)
    if core == 1:
        return a + b * s
    return Quad(a, b * s, core)


def sqrt_coeff(x: CoeffLike) -> Coeff:
    """Exact square root of a nonnegative rational, as Fraction or Quad."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative radicand")
    if x == 0:
        return Fraction(0)
    # sqrt(p/q) = sqrt(p*q)/q
    n = x.numerator * x.denominator
    core, s = split_square(n)
    return make_quad(0, Fraction(s, x.denominator), core)


class Quad:
    """Element ``a + b*sqrt(d)`` of Q(sqrt(d)).

    Invariants: ``a``, ``b`` are Fractions, ``b != 0``, and ``d`` is a
    square-free integer >= 2.  Use :func:`make_quad` to construct values that
    may degenerate to rationals.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a: Fraction, b: Fraction, d: int):
        self.a = a
        self.b = b
        self.d = d

    # -- helpers ---------------------------------------------------------

    def _coerce(self, other) -> "Quad | None":
        if isinstance(other, Quad):
            if other.d != self.d:
                raise ValueError(
                    f"mixing sqrt({self.d}) and sqrt({other.d}) values"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return Quad(Fraction(other), Fraction(0), self.d)
        return None

    def conjugate(self) -> "Quad":
        return Quad(self.a, -self.b, self.d)

    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return -1 if a < 0 else (1 if a > 0 else 0)
        if a == 0:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare a^2 against b^2 d; equality is impossible
        # because sqrt(d) is irrational
        t = a * a - b * b * self.d
        if a > 0:
            return 1 if t > 0 else -1
        return -1 if t > 0 else 1

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return make_quad(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return Quad(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return make_quad(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return make_quad(o.a - self.a, o.b - self.b, self.d)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return make_quad(
            self.a * o.a + self.b * o.b * self.d,
            self.a * o.b + self.b * o.a,
            self.d,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        # multiply by conjugate of divisor
        norm = o.a * o.a - o.b * o.b * self.d
        if norm == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        inv_a = o.a / norm
        inv_b = -o.b / norm
        return make_quad(
            self.a * inv_a + self.b * inv_b * self.d,
            self.a * inv_b + self.b * inv_a,
            self.d,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out: Coeff = Fraction(1)
        base: Coeff = self
        while k:
            if k & 1:
                out = base * out
            base = base * base
            k >>= 1
        return out

    # -- comparisons -----------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Quad):
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return False  # canonical Quad always has b != 0
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare Quad with {type(other)!r}")
        diff = self - o
        return coeff_sign(diff)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return True  # canonical Quad is never zero

    # -- conversions -----------------------------------------------------

    def __float__(self):
        return float(self.a) + float(self.b) * self.d ** 0.5

    def __repr__(self):
        return f"Quad({self.a!r}, {self.b!r}, {self.d})"

    def __str__(self):
        return coeff_str(self)


def coeff_sign(x: CoeffLike) -> int:
    """Exact sign in {-1, 0, 1}."""
    if isinstance(x, Quad):
        return x.sign()
    if x < 0:
        return -1
    return 1 if x > 0 else 0


def coeff_float(x: CoeffLike) -> float:
    return float(x)


def rational_bounds(x: CoeffLike, scale_bits: int = 64) -> tuple[Fraction, Fraction]:
    """Rational lower/upper bounds enclosing an exact coefficient.

    For a plain Fraction the bounds are tight; for a Quad the irrational part
    is bracketed by integer square-root bounds at 2**scale_bits resolution.
    """
    if not isinstance(x, Quad):
        f = Fraction(x)
        return f, f
    lo_s, hi_s = sqrt_bounds(Fraction(x.d), scale_bits)
    if x.b > 0:
        return x.a + x.b * lo_s, x.a + x.b * hi_s
    return x.a + x.b * hi_s, x.a + x.b * lo_s


def sqrt_bounds(x: Fraction, scale_bits: int = 64) -> tuple[Fraction, Fraction]:
    """Rational bounds ``lo <= sqrt(x) <= hi`` with ``hi - lo`` tiny.

    Uses integer isqrt on a scaled radicand; exact when x is a perfect
    square of a rational.
    """
    if x < 0:
        raise ValueError("negative radicand")
    if x == 0:
        return Fraction(0), Fraction(0)
    p, q = x.numerator, x.denominator
    # sqrt(p/q) = sqrt(p*q)/q
    n = p * q
    shift = 1 << scale_bits
    s = isqrt(n * shift * shift)
    lo = Fraction(s, q * shift)
    if s * s == n * shift * shift:
        return lo, lo
    return lo, Fraction(s + 1, q * shift)


def coeff_str(x: CoeffLike) -> str:
    """Canonical text form used by printers and the hint format."""
    if isinstance(x, Quad):
        parts = []
        if x.a != 0:
            parts.append(coeff_str(x.a))
        b = x.b
        rad = f"sqrt({x.d})"
        if b == 1:
            bp = rad
        elif b == -1:
            bp = f"-{rad}"
        else:
            bp = f"{coeff_str(b)}*{rad}"
        if parts and not bp.startswith("-"):
            return f"({parts[0]}+{bp})"
        if parts:
            return f"({parts[0]}{bp})"
        return bp
    f = Fraction(x)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"
