"""Exact rational linear programming.

A small dense two-phase simplex over Fraction.  Pivoting uses Dantzig's rule
for speed but switches to Bland's rule after a stretch of degenerate pivots,
so cycling cannot occur and termination is guaranteed.  Free variables are
split into differences of nonnegatives; inequality rows get slack columns.

Everything downstream that claims soundness (nonnegativity certificates,
barrier conditions) re-checks the multipliers this module returns by exact
polynomial identity, but the solver itself is already exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

_STALL_LIMIT = 12


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    values: dict[str, Fraction] = field(default_factory=dict)
    objective: Fraction | None = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class LinearProgram:
    """Constraint builder; variables are referenced by name.

    Variables default to free (can be negative).  Declare nonnegative ones
    with nonneg=True; redeclaration must agree.
    """

    def __init__(self):
        self._vars: dict[str, bool] = {}  # name -> nonneg
        self._rows: list[tuple[dict[str, Fraction], str, Fraction]] = []
        self._objective: dict[str, Fraction] | None = None
        self._sense = 1  # +1 minimize, -1 maximize

    def var(self, name: str, nonneg: bool = False) -> str:
        if name in self._vars:
            if self._vars[name] != nonneg:
                raise ValueError(f"variable {name!r} redeclared differently")
        else:
            self._vars[name] = nonneg
        return name

    def _touch(self, coeffs: Mapping[str, Fraction]):
        for nm in coeffs:
            if nm not in self._vars:
                self._vars[nm] = False

    def add_eq(self, coeffs: Mapping[str, Fraction], rhs) -> None:
        self._touch(coeffs)
        self._rows.append((dict(coeffs), "=", Fraction(rhs)))

    def add_le(self, coeffs: Mapping[str, Fraction], rhs) -> None:
        self._touch(coeffs)
        self._rows.append((dict(coeffs), "<=", Fraction(rhs)))

    def add_ge(self, coeffs: Mapping[str, Fraction], rhs) -> None:
        self._touch(coeffs)
        self._rows.append((dict(coeffs), ">=", Fraction(rhs)))

    def minimize(self, coeffs: Mapping[str, Fraction]) -> None:
        self._touch(coeffs)
        self._objective = dict(coeffs)
        self._sense = 1

    def maximize(self, coeffs: Mapping[str, Fraction]) -> None:
        self._touch(coeffs)
        self._objective = dict(coeffs)
        self._sense = -1

    # -- standard form compilation -----------------------------------------

    def solve(self) -> LPResult:
        names = list(self._vars)
        # column layout: one col per nonneg var, two per free var, then slacks
        col_of: dict[str, tuple[int, int | None]] = {}
        ncols = 0
        for nm in names:
            if self._vars[nm]:
                col_of[nm] = (ncols, None)
                ncols += 1
            else:
                col_of[nm] = (ncols, ncols + 1)  # plus, minus
                ncols += 2
        nslack = sum(1 for _, op, _ in self._rows if op != "=")
        nstruct = ncols
        ncols += nslack

        m = len(self._rows)
        A = [[Fraction(0)] * ncols for _ in range(m)]
        b = [Fraction(0)] * m
        slack_col = nstruct
        for i, (coeffs, op, rhs) in enumerate(self._rows):
            for nm, c in coeffs.items():
                c = Fraction(c)
                pos, neg = col_of[nm]
                A[i][pos] += c
                if neg is not None:
                    A[i][neg] -= c
            b[i] = rhs
            if op != "=":
                A[i][slack_col] = Fraction(1 if op == "<=" else -1)
                slack_col += 1
        for i in range(m):
            if b[i] < 0:
                A[i] = [-a for a in A[i]]
                b[i] = -b[i]

        cost = [Fraction(0)] * ncols
        if self._objective is not None:
            for nm, c in self._objective.items():
                c = Fraction(c) * self._sense
                pos, neg = col_of[nm]
                cost[pos] += c
                if neg is not None:
                    cost[neg] -= c

        tab = _Tableau(A, b, cost)
        status = tab.run_two_phase()
        if status != "optimal":
            return LPResult(status=status)
        x = tab.solution()
        values: dict[str, Fraction] = {}
        for nm in names:
            pos, neg = col_of[nm]
            values[nm] = x[pos] - (x[neg] if neg is not None else 0)
        obj = None
        if self._objective is not None:
            obj = sum(
                (Fraction(c) * values[nm] for nm, c in self._objective.items()),
                Fraction(0),
            )
        return LPResult(status="optimal", values=values, objective=obj)


class _Tableau:
    """Dense simplex tableau with explicit artificial columns."""

    def __init__(self, A: list[list[Fraction]], b: list[Fraction], cost: list[Fraction]):
        self.m = len(A)
        self.n = len(A[0]) if A else 0
        self.cost = cost
        # artificial columns n .. n+m-1
        self.rows = [list(A[i]) + [Fraction(1) if j == i else Fraction(0) for j in range(self.m)] + [b[i]] for i in range(self.m)]
        self.basis = [self.n + i for i in range(self.m)]
        self.total = self.n + self.m

    def run_two_phase(self) -> str:
        # phase 1: minimize sum of artificials
        phase_cost = [Fraction(0)] * self.total
        for j in range(self.n, self.total):
            phase_cost[j] = Fraction(1)
        z = self._optimize(phase_cost, allowed=self.total)
        if z is None:
            return "unbounded"  # cannot happen: phase-1 objective bounded below
        if z != 0:
            return "infeasible"
        self._purge_artificials()
        # pad to the artificial columns, which stay in the tableau even when
        # redundant rows were dropped (m shrank but the column count did not)
        z = self._optimize(self.cost + [Fraction(0)] * (self.total - self.n), allowed=self.n)
        if z is None:
            return "unbounded"
        return "optimal"

    def _reduced_costs(self, cost: list[Fraction]) -> list[Fraction]:
        # y = c_B B^-1 comes out of the tableau rows directly
        red = list(cost)
        for i, bi in enumerate(self.basis):
            cb = cost[bi]
            if cb == 0:
                continue
            row = self.rows[i]
            for j in range(self.total):
                if row[j] != 0:
                    red[j] -= cb * row[j]
        return red

    def _optimize(self, cost: list[Fraction], allowed: int) -> Fraction | None:
        """Minimize cost over the current basis; returns objective or None."""
        stall = 0
        guard = 0
        while True:
            guard += 1
            if guard > 20000:
                raise RuntimeError("simplex iteration guard tripped")
            red = self._reduced_costs(cost)
            bland = stall >= _STALL_LIMIT
            enter = -1
            if bland:
                for j in range(allowed):
                    if red[j] < 0:
                        enter = j
                        break
            else:
                best = Fraction(0)
                for j in range(allowed):
                    if red[j] < best:
                        best = red[j]
                        enter = j
            if enter < 0:
                obj = Fraction(0)
                for i, bi in enumerate(self.basis):
                    obj += cost[bi] * self.rows[i][-1]
                return obj
            # ratio test
            leave = -1
            best_ratio: Fraction | None = None
            for i in range(self.m):
                a = self.rows[i][enter]
                if a > 0:
                    ratio = self.rows[i][-1] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < self.basis[leave])
                    ):
                        best_ratio = ratio
                        leave = i
            if leave < 0:
                return None  # unbounded direction
            if best_ratio == 0:
                stall += 1
            else:
                stall = 0
            self._pivot(leave, enter)

    def _pivot(self, i: int, j: int):
        row = self.rows[i]
        piv = row[j]
        inv = 1 / piv
        self.rows[i] = [a * inv for a in row]
        for k in range(self.m):
            if k == i:
                continue
            factor = self.rows[k][j]
            if factor == 0:
                continue
            rk = self.rows[k]
            ri = self.rows[i]
            self.rows[k] = [a - factor * c for a, c in zip(rk, ri)]
        self.basis[i] = j

    def _purge_artificials(self):
        """Drive artificial variables out of the basis or drop their rows."""
        i = 0
        while i < self.m:
            if self.basis[i] < self.n:
                i += 1
                continue
            pivot_col = -1
            for j in range(self.n):
                if self.rows[i][j] != 0:
                    pivot_col = j
                    break
            if pivot_col >= 0:
                self._pivot(i, pivot_col)
                i += 1
            else:
                # redundant constraint: remove the row
                del self.rows[i]
                del self.basis[i]
                self.m -= 1

    def solution(self) -> list[Fraction]:
        x = [Fraction(0)] * self.n
        for i, bi in enumerate(self.basis):
            if bi < self.n:
                x[bi] = self.rows[i][-1]
        return x
