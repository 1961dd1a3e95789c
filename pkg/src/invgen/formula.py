"""Quantifier-free formulas over polynomial sign atoms.

Atoms are ``p rel 0`` with rel in {<, <=, =, >=, >}; negation is eliminated
at construction (`!=` turns into a disjunction at parse time), so the tree
only ever contains atoms, conjunctions, and disjunctions plus the two
constants.  Everything is deterministic: children are kept in a canonical
sorted order so printed output and DNF clause order are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .coeffs import CoeffLike, coeff_sign
from .poly import Poly


class Rel(Enum):
    LT = "<"
    LE = "<="
    EQ = "="
    GE = ">="
    GT = ">"

    def holds(self, sign: int) -> bool:
        if self is Rel.LT:
            return sign < 0
        if self is Rel.LE:
            return sign <= 0
        if self is Rel.EQ:
            return sign == 0
        if self is Rel.GE:
            return sign >= 0
        return sign > 0

    def negated(self) -> "Rel | None":
        """Complement relation, or None for EQ (splits into a disjunction)."""
        return {
            Rel.LT: Rel.GE,
            Rel.LE: Rel.GT,
            Rel.GE: Rel.LT,
            Rel.GT: Rel.LE,
            Rel.EQ: None,
        }[self]

    def flipped(self) -> "Rel":
        """Relation after negating the polynomial side."""
        return {
            Rel.LT: Rel.GT,
            Rel.LE: Rel.GE,
            Rel.EQ: Rel.EQ,
            Rel.GE: Rel.LE,
            Rel.GT: Rel.LT,
        }[self]

    @property
    def is_strict(self) -> bool:
        return self in (Rel.LT, Rel.GT)


class Formula:
    """Base class; instances are TRUE, FALSE, Atom, And, Or."""

    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return f_and(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return f_or(self, other)

    def __invert__(self) -> "Formula":
        return negate(self)


class _Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value

    def __eq__(self, other):
        return isinstance(other, _Const) and other.value is self.value

    def __hash__(self):
        return hash(("const", self.value))

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = _Const(True)
FALSE = _Const(False)


@dataclass(frozen=True)
class Atom(Formula):
    poly: Poly
    rel: Rel

    def eval_at(self, point: Sequence[CoeffLike]) -> bool:
        return self.rel.holds(coeff_sign(self.poly.eval_at(point)))

    def negate(self) -> Formula:
        nr = self.rel.negated()
        if nr is None:
            return f_or(Atom(self.poly, Rel.LT), Atom(self.poly, Rel.GT))
        return Atom(self.poly, nr)

    def normalized(self) -> "Atom":
        """Sign-canonical form: leading coefficient positive when rational."""
        if self.poly.is_zero():
            return self
        _, lc = self.poly.leading_term()
        if coeff_sign(lc) < 0:
            return Atom(-self.poly, self.rel.flipped())
        return self

    def key(self):
        return (
            tuple((m, str(c)) for m, c in self.poly.sorted_terms()),
            self.rel.value,
        )


class And(Formula):
    __slots__ = ("children",)

    def __init__(self, children: tuple[Formula, ...]):
        self.children = children

    def __eq__(self, other):
        return isinstance(other, And) and other.children == self.children

    def __hash__(self):
        return hash(("and", self.children))


class Or(Formula):
    __slots__ = ("children",)

    def __init__(self, children: tuple[Formula, ...]):
        self.children = children

    def __eq__(self, other):
        return isinstance(other, Or) and other.children == self.children

    def __hash__(self):
        return hash(("or", self.children))


def _formula_key(f: Formula):
    if isinstance(f, _Const):
        return (0, f.value)
    if isinstance(f, Atom):
        return (1, f.key())
    if isinstance(f, And):
        return (2, tuple(_formula_key(c) for c in f.children))
    return (3, tuple(_formula_key(c) for c in f.children))


def f_and(*fs: Formula) -> Formula:
    flat: list[Formula] = []
    for f in fs:
        if f is TRUE or f == TRUE:
            continue
        if f is FALSE or f == FALSE:
            return FALSE
        if isinstance(f, And):
            flat.extend(f.children)
        else:
            flat.append(f)
    seen = []
    for f in flat:
        if f not in seen:
            seen.append(f)
    if not seen:
        return TRUE
    if len(seen) == 1:
        return seen[0]
    return And(tuple(sorted(seen, key=_formula_key)))


def f_or(*fs: Formula) -> Formula:
    flat: list[Formula] = []
    for f in fs:
        if f is FALSE or f == FALSE:
            continue
        if f is TRUE or f == TRUE:
            return TRUE
        if isinstance(f, Or):
            flat.extend(f.children)
        else:
            flat.append(f)
    seen = []
    for f in flat:
        if f not in seen:
            seen.append(f)
    if not seen:
        return FALSE
    if len(seen) == 1:
        return seen[0]
    return Or(tuple(sorted(seen, key=_formula_key)))


def negate(f: Formula) -> Formula:
    if isinstance(f, _Const):
        return FALSE if f.value else TRUE
    if isinstance(f, Atom):
        return f.negate()
    if isinstance(f, And):
        return f_or(*(negate(c) for c in f.children))
    if isinstance(f, Or):
        return f_and(*(negate(c) for c in f.children))
    raise TypeError(f"not a formula: {f!r}")


def eval_formula(f: Formula, point: Sequence[CoeffLike]) -> bool:
    if isinstance(f, _Const):
        return f.value
    if isinstance(f, Atom):
        return f.eval_at(point)
    if isinstance(f, And):
        return all(eval_formula(c, point) for c in f.children)
    if isinstance(f, Or):
        return any(eval_formula(c, point) for c in f.children)
    raise TypeError(f"not a formula: {f!r}")


def atoms_of(f: Formula) -> list[Atom]:
    out: list[Atom] = []

    def walk(g: Formula):
        if isinstance(g, Atom):
            if g not in out:
                out.append(g)
        elif isinstance(g, (And, Or)):
            for c in g.children:
                walk(c)

    walk(f)
    return out


class DnfCapExceeded(Exception):
    """Disjunctive normal form would exceed the clause cap."""

    def __init__(self, cap: int):
        super().__init__(f"DNF clause cap of {cap} exceeded")
        self.cap = cap


Clause = tuple[Atom, ...]

DNF_CAP = 64


def to_dnf(f: Formula, cap: int = DNF_CAP) -> list[Clause]:
    """Clauses of the disjunctive normal form (conjunctions of atoms).

    The empty clause list means FALSE; a single empty clause means TRUE.
    Raises :class:`DnfCapExceeded` when more than ``cap`` clauses appear at
    any point of the expansion.
    """

    def rec(g: Formula) -> list[Clause]:
        if isinstance(g, _Const):
            return [()] if g.value else []
        if isinstance(g, Atom):
            return [(g,)]
        if isinstance(g, Or):
            out: list[Clause] = []
            for c in g.children:
                out.extend(rec(c))
                if len(out) > cap:
                    raise DnfCapExceeded(cap)
            return _dedup(out)
        if isinstance(g, And):
            acc: list[Clause] = [()]
            for c in g.children:
                cl = rec(c)
                nxt: list[Clause] = []
                for a in acc:
                    for b in cl:
                        merged = _merge_clause(a, b)
                        if merged is not None:
                            nxt.append(merged)
                    if len(nxt) > cap:
                        raise DnfCapExceeded(cap)
                acc = _dedup(nxt)
            return acc
        raise TypeError(f"not a formula: {g!r}")

    return rec(f)


def _merge_clause(a: Clause, b: Clause) -> Clause | None:
    out = list(a)
    for atom in b:
        if atom not in out:
            out.append(atom)
    return tuple(sorted(out, key=lambda at: at.key()))


def _dedup(cls: list[Clause]) -> list[Clause]:
    seen: list[Clause] = []
    for c in cls:
        if c not in seen:
            seen.append(c)
    return seen


def dnf_to_formula(clauses: Iterable[Clause]) -> Formula:
    return f_or(*(f_and(*c) for c in clauses))


def clause_ge_polys(clause: Clause) -> list[tuple[Poly, bool]]:
    """Clause as a conjunction of ``q >= 0`` constraints, ``(q, was_strict)``.

    Equalities contribute both signs; strict atoms keep a flag but are
    weakened to their closure (sound for any containment proved over the
    result).  Order follows the clause, so callers on both sides of a
    certificate see the same base list.
    """
    out: list[tuple[Poly, bool]] = []
    for atom in clause:
        if atom.rel is Rel.GE:
            out.append((atom.poly, False))
        elif atom.rel is Rel.GT:
            out.append((atom.poly, True))
        elif atom.rel is Rel.LE:
            out.append((-atom.poly, False))
        elif atom.rel is Rel.LT:
            out.append((-atom.poly, True))
        else:
            out.append((atom.poly, False))
            out.append((-atom.poly, False))
    return out


def formula_size(f: Formula) -> int:
    """Number of atom occurrences (invariant size metric)."""
    if isinstance(f, _Const):
        return 0
    if isinstance(f, Atom):
        return 1
    if isinstance(f, (And, Or)):
        return sum(formula_size(c) for c in f.children)
    raise TypeError(f"not a formula: {f!r}")


def map_polys(f: Formula, fn) -> Formula:
    """Rebuild the formula with fn applied to every atom polynomial."""
    if isinstance(f, _Const):
        return f
    if isinstance(f, Atom):
        return Atom(fn(f.poly), f.rel)
    if isinstance(f, And):
        return f_and(*(map_polys(c, fn) for c in f.children))
    if isinstance(f, Or):
        return f_or(*(map_polys(c, fn) for c in f.children))
    raise TypeError(f"not a formula: {f!r}")


def formula_str(f: Formula, names: Sequence[str] | None = None) -> str:
    def rec(g: Formula, parent: str) -> str:
        if isinstance(g, _Const):
            return "true" if g.value else "false"
        if isinstance(g, Atom):
            return f"{g.poly.to_str(names)} {g.rel.value} 0"
        if isinstance(g, And):
            body = " & ".join(rec(c, "and") for c in g.children)
            return f"({body})" if parent == "or" else body
        body = " | ".join(rec(c, "or") for c in g.children)
        return f"({body})" if parent in ("and", "or") else body

    return rec(f, "top")
