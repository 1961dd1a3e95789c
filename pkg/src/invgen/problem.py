"""Safety problems over polynomial ODE systems.

A problem bundles the vector field, an evolution domain constraint, an
initial set, and an unsafe set.  Helpers here derive structure the methods
need: syntactic bounding boxes, dependency clusters for subsystem splitting,
and seeded rational sampling.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .coeffs import sqrt_bounds
from .formula import (
    FALSE,
    TRUE,
    Atom,
    Clause,
    DnfCapExceeded,
    Formula,
    Rel,
    eval_formula,
    f_and,
    map_polys,
    to_dnf,
)
from .poly import Poly

Box = list[tuple[Fraction, Fraction]]


@dataclass
class ODESystem:
    names: list[str]
    rhs: list[Poly]

    @property
    def dim(self) -> int:
        return len(self.names)

    def is_linear(self) -> bool:
        return all(f.total_degree() <= 1 for f in self.rhs)

    def max_rhs_degree(self) -> int:
        return max((f.total_degree() for f in self.rhs), default=0)


@dataclass
class Problem:
    system: ODESystem
    domain: Formula = TRUE
    init: Formula = TRUE
    unsafe: Formula = FALSE
    name: str = "problem"

    @property
    def dim(self) -> int:
        return self.system.dim

    @property
    def names(self) -> list[str]:
        return self.system.names

    def classify(self) -> str:
        if self.system.is_linear():
            return "linear"
        if len(dependency_clusters(self.system.rhs)) > 1:
            return "product"
        return "poly"


# -- boxes -------------------------------------------------------------------


def clause_box(clause: Clause, arity: int) -> Box | None:
    """Syntactic bounding box of a conjunction of atoms, or None.

    Understands single-variable linear atoms and sums of squares of shifted
    variables (balls/ellipsoids with positive diagonal and no cross terms).
    Strict bounds are soundly relaxed to their closure.  Returns None unless
    every variable is bounded on both sides; an evidently empty clause
    (crossed bounds) also returns None.
    """
    lo: list[Fraction | None] = [None] * arity
    hi: list[Fraction | None] = [None] * arity

    def tighten_low(i: int, v: Fraction):
        if lo[i] is None or v > lo[i]:
            lo[i] = v

    def tighten_high(i: int, v: Fraction):
        if hi[i] is None or v < hi[i]:
            hi[i] = v

    for atom in clause:
        for p, _ in _le_forms(atom):
            # p <= 0 viewpoint
            _absorb_le(p, tighten_low, tighten_high, arity)

    out: Box = []
    for i in range(arity):
        if lo[i] is None or hi[i] is None:
            return None
        if lo[i] > hi[i]:
            return None
        out.append((lo[i], hi[i]))
    return out


def _le_forms(atom: Atom) -> list[tuple[Poly, Rel]]:
    """Rewrite an atom as one or two 'p <= 0' facts (closure of strict)."""
    if atom.rel in (Rel.LE, Rel.LT):
        return [(atom.poly, Rel.LE)]
    if atom.rel in (Rel.GE, Rel.GT):
        return [(-atom.poly, Rel.LE)]
    return [(atom.poly, Rel.LE), (-atom.poly, Rel.LE)]


def _absorb_le(p: Poly, tighten_low, tighten_high, arity: int):
    """Derive variable bounds from p <= 0 when p has recognizable shape."""
    used = sorted(p.variables())
    if not used:
        return
    if len(used) == 1 and p.total_degree() == 1:
        i = used[0]
        a = p.coeff(tuple(1 if j == i else 0 for j in range(arity)))
        b = p.constant_value()
        bound = Fraction(-b) / Fraction(a)
        if a > 0:
            tighten_high(i, bound)  # a x + b <= 0 -> x <= -b/a
        else:
            tighten_low(i, bound)
        return
    # sum-of-squares shape: sum_i (c_i x_i^2 + b_i x_i) + k <= 0, all c_i > 0
    quad: dict[int, Fraction] = {}
    lin: dict[int, Fraction] = {}
    const = Fraction(0)
    for m, c in p.terms.items():
        deg = sum(m)
        nz = [i for i, e in enumerate(m) if e]
        if deg == 0:
            const = Fraction(c)
        elif deg == 1 and len(nz) == 1:
            lin[nz[0]] = Fraction(c)
        elif deg == 2 and len(nz) == 1 and m[nz[0]] == 2:
            quad[nz[0]] = Fraction(c)
        else:
            return  # cross term or higher degree: not a recognized shape
    if not quad or any(c <= 0 for c in quad.values()):
        return
    if any(i not in quad for i in lin):
        return
    centers = {i: -lin.get(i, Fraction(0)) / (2 * c) for i, c in quad.items()}
    radius2 = sum(c * centers[i] ** 2 for i, c in quad.items()) - const
    if radius2 < 0:
        # empty ball: bound every quadratic variable to a crossed range
        for i in quad:
            tighten_low(i, Fraction(1))
            tighten_high(i, Fraction(0))
        return
    for i, c in quad.items():
        _, r = sqrt_bounds(radius2 / c)
        tighten_low(i, centers[i] - r)
        tighten_high(i, centers[i] + r)


def enclose_in_box(f: Formula, arity: int, cap: int = 64) -> Box | None:
    """Box containing every satisfying point, from syntax alone, or None."""
    try:
        clauses = to_dnf(f, cap)
    except DnfCapExceeded:
        return None
    if not clauses:
        return None
    boxes = []
    for c in clauses:
        b = clause_box(c, arity)
        if b is None:
            # an evidently-empty clause contributes nothing
            if clause_evidently_empty(c, arity):
                continue
            return None
        boxes.append(b)
    if not boxes:
        return None
    hull: Box = []
    for i in range(arity):
        hull.append((min(b[i][0] for b in boxes), max(b[i][1] for b in boxes)))
    return hull


def clause_evidently_empty(clause: Clause, arity: int) -> bool:
    lo: list[Fraction | None] = [None] * arity
    hi: list[Fraction | None] = [None] * arity

    def tl(i, v):
        if lo[i] is None or v > lo[i]:
            lo[i] = v

    def th(i, v):
        if hi[i] is None or v < hi[i]:
            hi[i] = v

    for atom in clause:
        for p, _ in _le_forms(atom):
            _absorb_le(p, tl, th, arity)
    return any(
        lo[i] is not None and hi[i] is not None and lo[i] > hi[i] for i in range(arity)
    )


# -- dependency clusters -------------------------------------------------------


def dependency_clusters(rhs: Sequence[Poly]) -> list[list[int]]:
    """Connected components of the variable-dependency graph.

    Variable i is linked to every variable its derivative reads.  Components
    are returned as sorted index lists, ordered by smallest member; a product
    system yields one component per factor.
    """
    n = len(rhs)
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for i, f in enumerate(rhs):
        for j in f.variables():
            union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def project_problem(prob: Problem, cluster: Sequence[int]) -> Problem | None:
    """Project onto a variable cluster; None when the formulas do not factor.

    Init and the domain are projected clause-wise by keeping the atoms that
    mention only cluster variables (a sound overapproximation).  Unsafe
    clauses must mention cluster variables exclusively or not at all; clauses
    touching other clusters are dropped (they are someone else's obligation),
    and a clause mixing clusters makes the split unsound, so we decline.
    """
    cl = set(cluster)
    names = [prob.names[i] for i in cluster]
    rhs = []
    for i in cluster:
        f = prob.system.rhs[i]
        if not f.variables() <= cl:
            return None
        rhs.append(f.project(cluster))

    def keep_atoms(f: Formula, require_pure: bool) -> Formula | None:
        try:
            clauses = to_dnf(f)
        except DnfCapExceeded:
            return None
        out_clauses = []
        for c in clauses:
            kept = []
            for atom in c:
                vs = atom.poly.variables()
                if vs <= cl:
                    kept.append(Atom(atom.poly.project(cluster), atom.rel))
                elif vs & cl:
                    return None  # atom spans clusters
                elif require_pure:
                    kept = None  # clause belongs to another cluster
                    break
            if kept is None:
                continue
            out_clauses.append(kept)
        from .formula import dnf_to_formula

        return dnf_to_formula([tuple(c) for c in out_clauses])

    init = keep_atoms(prob.init, require_pure=False)
    domain = keep_atoms(prob.domain, require_pure=False)
    unsafe = keep_atoms(prob.unsafe, require_pure=True)
    if init is None or domain is None or unsafe is None:
        return None
    return Problem(
        system=ODESystem(names, rhs),
        domain=domain,
        init=init,
        unsafe=unsafe,
        name=f"{prob.name}[{','.join(names)}]",
    )


def lift_formula(f: Formula, cluster: Sequence[int], arity: int) -> Formula:
    return map_polys(f, lambda p: p.lift(list(cluster), arity))


# -- sampling ------------------------------------------------------------------


def sample_points(
    f: Formula,
    box: Box,
    n: int,
    seed: int,
    max_tries: int | None = None,
    denom: int = 1024,
) -> list[list[Fraction]]:
    """Deterministic rejection sampler: up to n exact points satisfying f.

    Points lie on a rational grid of the given denominator inside the box.
    """
    rng = random.Random(seed)
    tries = max_tries if max_tries is not None else 400 * max(n, 1)
    out: list[list[Fraction]] = []
    for _ in range(tries):
        if len(out) >= n:
            break
        pt = []
        for lo, hi in box:
            k = rng.randrange(denom + 1)
            pt.append(lo + (hi - lo) * Fraction(k, denom))
        if eval_formula(f, pt):
            out.append(pt)
    return out
