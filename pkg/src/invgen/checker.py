"""Trusted re-checking of invariance certificates and safety premises.

Generators are free to use any search they like; nothing they produce is
believed until this module re-derives the argument from the hint payload.
Each hint class reduces to exact polynomial identities plus small side
conditions, so a Proved verdict never rests on floating point or on the
internals of the search that found the certificate.

Status meanings: Proved means every condition carries an exact certificate;
CandidateNumeric means some condition was only sampled or lies outside the
hint's reach; Refuted means an identity or side condition is actually wrong,
with the offending residue polynomial or witness point attached.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .barrier import certify_nonneg, certify_region_empty
from .coeffs import coeff_sign
from .formula import (
    TRUE,
    Atom,
    Clause,
    DnfCapExceeded,
    Formula,
    Rel,
    atoms_of,
    clause_ge_polys,
    eval_formula,
    f_and,
    f_or,
    to_dnf,
)
from .hints import (
    AbstractionHint,
    BarrierHint,
    Certificate,
    ConjunctionChain,
    DarbouxHint,
    DdcSplit,
    FirstIntegralHint,
    LyapunovHint,
    NonnegCert,
    cells_to_formula,
    face_closure_base,
    cell_sign_base,
)
from .lp import LinearProgram
from .poly import Poly
from .problem import (
    Problem,
    clause_box,
    clause_evidently_empty,
    sample_points,
)
from .simulate import SimConfig, SimWitness, refute_by_simulation

PREMISE_SAMPLES = 32

PROVED = "Proved"
CANDIDATE = "CandidateNumeric"
REFUTED = "Refuted"


@dataclass(frozen=True)
class CheckResult:
    status: str  # Proved | CandidateNumeric | Refuted
    unverified: tuple[str, ...] = ()
    reason: str = ""
    residue: Poly | None = None
    point: tuple[Fraction, ...] | None = None
    witness: SimWitness | None = None
    evidence: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status == PROVED


def _refuted(reason: str, residue: Poly | None = None) -> CheckResult:
    return CheckResult(status=REFUTED, reason=reason, residue=residue)


def _merge(results: Sequence[CheckResult]) -> CheckResult:
    unverified: list[str] = []
    evidence: list[str] = []
    for r in results:
        if r.status == REFUTED:
            return r
        unverified.extend(r.unverified)
        evidence.extend(r.evidence)
    status = CANDIDATE if unverified else PROVED
    return CheckResult(
        status=status, unverified=tuple(unverified), evidence=tuple(evidence)
    )


class MalformedHint(ValueError):
    pass


def _emptiness_conclusion_ok(cert: NonnegCert, n: int) -> bool:
    """Accepted contradiction forms: -1 >= 0 on the region, or 0 > 0 on it.

    The second form (zero target with a strict conclusion) is what captures
    regions that are empty only because of strict inequalities.
    """
    if cert.strict_target:
        return cert.target == Poly.zero(n)
    return cert.target == Poly.const(n, -1)


# -- level-atom decomposition ----------------------------------------------------


def _affine_in(q: Poly, p: Poly):
    """Write q as a*p + b with constants a != 0, b; None when impossible."""
    if p.is_constant():
        return None
    m0, c0 = p.leading_term()
    a = q.coeff(m0) / c0
    if coeff_sign(a) == 0:
        return None
    diff = q - p * a
    if not diff.is_constant():
        return None
    return a, diff.constant_value()


# -- per-hint invariance rules ----------------------------------------------------


def _check_first_integral(h: FirstIntegralHint, inv: Formula, prob: Problem):
    if h.poly.arity != prob.dim or h.poly.is_constant():
        raise MalformedHint("first-integral hint needs a nonconstant system poly")
    residue = h.poly.lie_derivative(prob.system.rhs)
    if not residue.is_zero():
        return _refuted("lie derivative of the claimed first integral", residue)
    results = [CheckResult(PROVED, evidence=("lie(p) = 0",))]
    for atom in _formula_atoms(inv):
        if atom.poly.is_constant():
            continue
        if _affine_in(atom.poly, h.poly) is None:
            results.append(
                CheckResult(
                    CANDIDATE,
                    unverified=(f"atom {atom.poly} not a level of the first integral",),
                )
            )
    return _merge(results)


def _check_darboux(h: DarbouxHint, inv: Formula, prob: Problem):
    if h.poly.arity != prob.dim or h.poly.is_constant():
        raise MalformedHint("darboux hint needs a nonconstant system poly")
    residue = h.poly.lie_derivative(prob.system.rhs) - h.cofactor * h.poly
    if not residue.is_zero():
        return _refuted("darboux identity lie(p) - cofactor*p", residue)
    lam = h.cofactor.constant_value() if h.cofactor.is_constant() else None
    results = [CheckResult(PROVED, evidence=("lie(p) = cofactor*p",))]
    for atom in _formula_atoms(inv):
        if atom.poly.is_constant():
            continue
        ab = _affine_in(atom.poly, h.poly)
        if ab is None:
            results.append(
                CheckResult(
                    CANDIDATE,
                    unverified=(f"atom {atom.poly} not a level of the darboux poly",),
                )
            )
            continue
        _, b = ab
        if coeff_sign(b) == 0:
            continue  # sign set: invariant for any cofactor
        if lam is None:
            results.append(
                CheckResult(
                    CANDIDATE,
                    unverified=(
                        f"offset level {atom.poly} needs a constant cofactor",
                    ),
                )
            )
            continue
        # q = a*p + b obeys q' = lam*(q - b); on the boundary q' = -lam*b
        lam_b = coeff_sign(lam) * coeff_sign(b)
        if atom.rel in (Rel.LE, Rel.LT):
            sound = lam_b >= 0
        elif atom.rel in (Rel.GE, Rel.GT):
            sound = lam_b <= 0
        else:
            sound = lam_b == 0
        if not sound:
            return _refuted(
                f"level set {atom.poly} {atom.rel.value} 0 moves against the flow",
                atom.poly,
            )
    return _merge(results)


def _quadratic_form(p_matrix, arity: int) -> Poly:
    acc = Poly.zero(arity)
    for i, row in enumerate(p_matrix):
        for j, c in enumerate(row):
            if c:
                acc = acc + Poly.mono(arity, _unit(arity, i, j), c)
    return acc


def _unit(arity: int, i: int, j: int):
    m = [0] * arity
    m[i] += 1
    m[j] += 1
    return tuple(m)


def _det(rows: list[list[Fraction]]) -> Fraction:
    n = len(rows)
    m = [list(map(Fraction, r)) for r in rows]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return det


def _leading_minors(mat) -> list[Fraction]:
    n = len(mat)
    return [_det([row[: k + 1] for row in mat[: k + 1]]) for k in range(n)]


def _system_matrix(rhs: Sequence[Poly]):
    """Coefficient matrix when the system is exactly x' = A x, else None."""
    n = len(rhs)
    A = []
    for f in rhs:
        row = []
        rest = f
        for j in range(n):
            m = tuple(1 if t == j else 0 for t in range(n))
            c = f.coeff(m)
            row.append(c)
            if c:
                rest = rest - Poly.mono(n, m, c)
        if not rest.is_zero():
            return None
        A.append(row)
    return A


def _check_lyapunov(h: LyapunovHint, inv: Formula, prob: Problem):
    n = prob.dim
    if len(h.p_matrix) != n or any(len(r) != n for r in h.p_matrix):
        raise MalformedHint("lyapunov P matrix shape")
    if len(h.q_matrix) != n or any(len(r) != n for r in h.q_matrix):
        raise MalformedHint("lyapunov Q matrix shape")
    if any(
        h.p_matrix[i][j] != h.p_matrix[j][i] or h.q_matrix[i][j] != h.q_matrix[j][i]
        for i in range(n)
        for j in range(n)
    ):
        raise MalformedHint("lyapunov matrices must be symmetric")
    A = _system_matrix(prob.system.rhs)
    if A is None or any(not isinstance(c, Fraction) for row in A for c in row):
        return CheckResult(
            CANDIDATE, unverified=("lyapunov hint on a system that is not x' = Ax",)
        )
    form = _quadratic_form(h.p_matrix, n)
    if form != h.v:
        return _refuted("lyapunov function disagrees with its matrix", form - h.v)
    # A^T P + P A = Q
    lhs = [
        [
            sum(
                (A[k][i] * Fraction(h.p_matrix[k][j]) + Fraction(h.p_matrix[i][k]) * A[k][j])
                for k in range(n)
            )
            for j in range(n)
        ]
        for i in range(n)
    ]
    diff = [
        [lhs[i][j] - h.q_matrix[i][j] for j in range(n)] for i in range(n)
    ]
    if any(diff[i][j] != 0 for i in range(n) for j in range(n)):
        return _refuted(
            "lyapunov equation A^T P + P A = Q fails", _quadratic_form(diff, n)
        )
    if any(mk <= 0 for mk in _leading_minors(h.p_matrix)):
        return _refuted("P is not positive definite (leading minors)")
    if any(
        mk * (1 if k % 2 else -1) <= 0
        for k, mk in enumerate(_leading_minors(h.q_matrix))
    ):
        return _refuted("Q is not negative definite (leading minors)")
    results = [CheckResult(PROVED, evidence=("A^T P + P A = Q with definite P, Q",))]
    for atom in _formula_atoms(inv):
        if atom.poly.is_constant():
            continue
        ab = _affine_in(atom.poly, h.v)
        sublevel = ab is not None and (
            (coeff_sign(ab[0]) > 0 and atom.rel in (Rel.LE, Rel.LT))
            or (coeff_sign(ab[0]) < 0 and atom.rel in (Rel.GE, Rel.GT))
        )
        if not sublevel:
            results.append(
                CheckResult(
                    CANDIDATE,
                    unverified=(f"atom {atom.poly} is not a sublevel of V",),
                )
            )
    return _merge(results)


def _expected_clause_parts(formula: Formula):
    clauses = to_dnf(formula)
    return [clause_ge_polys(c) for c in clauses]


def _check_nonneg_group(
    certs: Sequence[NonnegCert],
    parts,
    target: Poly,
    label: str,
):
    if len(certs) != len(parts):
        raise MalformedHint(f"{label}: expected {len(parts)} certificates, got {len(certs)}")
    for i, (cert, pairs) in enumerate(zip(certs, parts)):
        if cert.target != target:
            return _refuted(f"{label} clause {i}: wrong target", cert.target - target)
        if cert.base != tuple(q for q, _ in pairs) or cert.strict != tuple(
            s for _, s in pairs
        ):
            return _refuted(f"{label} clause {i}: certificate region mismatch")
        bad = cert.verify()
        if bad is not None:
            return _refuted(f"{label} clause {i}: {bad}", cert.residue())
    return None


def _check_barrier(h: BarrierHint, inv: Formula, prob: Problem):
    n = prob.dim
    if h.poly.arity != n or h.poly.is_zero():
        raise MalformedHint("barrier poly must be a nonzero system poly")
    if h.eps <= 0:
        return _refuted("barrier margin eps must be positive")
    try:
        init_parts = _expected_clause_parts(prob.init)
        unsafe_parts = _expected_clause_parts(prob.unsafe)
        domain_parts = _expected_clause_parts(prob.domain)
    except DnfCapExceeded:
        return CheckResult(CANDIDATE, unverified=("problem sets too disjunctive",))
    lie_p = h.poly.lie_derivative(prob.system.rhs)
    for certs, parts, target, label in (
        (h.init_certs, init_parts, -h.poly, "init premise"),
        (h.unsafe_certs, unsafe_parts, h.poly - Poly.const(n, h.eps), "unsafe premise"),
        (h.flow_certs, domain_parts, h.poly * h.lam - lie_p, "flow premise"),
    ):
        bad = _check_nonneg_group(certs, parts, target, label)
        if bad is not None:
            return bad
    if inv != Atom(h.poly, Rel.LE):
        return CheckResult(
            CANDIDATE, unverified=("invariant is not the barrier sublevel p <= 0",)
        )
    return CheckResult(
        PROVED,
        evidence=(
            "init: p <= 0 certified per clause",
            "unsafe: p >= eps certified per clause",
            "flow: lie(p) <= lam*p certified per clause",
        ),
    )


def _step_cell(cell, k, delta):
    out = list(cell)
    out[k] += delta
    return tuple(out)


def _check_abstraction(h: AbstractionHint, inv: Formula, prob: Problem):
    preds = h.predicates
    k = len(preds)
    if k == 0:
        raise MalformedHint("abstraction needs at least one predicate")
    if any(p.arity != prob.dim or p.is_constant() for p in preds):
        raise MalformedHint("abstraction predicates must be nonconstant system polys")

    def wellformed(cell) -> bool:
        return len(cell) == k and all(s in (-1, 0, 1) for s in cell)

    if any(not wellformed(c) for c in h.retained):
        raise MalformedHint("malformed retained cell")

    lie_cache = {i: preds[i].lie_derivative(prob.system.rhs) for i in range(k)}

    darboux_preds: set[int] = set()
    flow_removed: set[tuple] = set()
    for rt in h.removed:
        if not wellformed(rt.source) or not wellformed(rt.target):
            raise MalformedHint("malformed removal cells")
        if not (0 <= rt.pred < k):
            raise MalformedHint("removal predicate index out of range")
        diffs = [j for j in range(k) if rt.source[j] != rt.target[j]]
        if diffs != [rt.pred]:
            raise MalformedHint("removal must change exactly its own predicate")
        delta = rt.target[rt.pred] - rt.source[rt.pred]
        if delta not in (-1, 1):
            raise MalformedHint("removal must move one sign step")
        p = preds[rt.pred]
        if rt.reason == "darboux":
            if rt.cofactor is None:
                raise MalformedHint("darboux removal needs a cofactor")
            residue = lie_cache[rt.pred] - rt.cofactor * p
            if not residue.is_zero():
                return _refuted("removal darboux identity fails", residue)
            darboux_preds.add(rt.pred)
        elif rt.reason == "flow_sign":
            if not rt.certs or rt.direction not in (-1, 1):
                raise MalformedHint("flow_sign removal needs certs and a direction")
            if rt.direction != -delta:
                return _refuted("flow_sign direction does not block this crossing")
            face = face_closure_base(preds, rt.source, rt.pred)
            # certs[i] covers lie^{i+1}(p) over the face with the earlier
            # derivatives pinned to zero; the last one must be strict, so at
            # every face point some derivative up to the chain depth pushes
            # strictly toward `direction` and the crossing cannot happen
            lie_iter = p
            pinned: list[Poly] = []
            for i, cert in enumerate(rt.certs):
                lie_iter = lie_iter.lie_derivative(prob.system.rhs)
                expected_base = face + tuple(
                    q for lp in pinned for q in (lp, -lp)
                )
                if cert.base != expected_base or any(cert.strict):
                    return _refuted("flow_sign certificate region mismatch")
                if cert.target != lie_iter * rt.direction:
                    return _refuted(
                        "flow_sign certificate target mismatch",
                        cert.target - lie_iter * rt.direction,
                    )
                last = i == len(rt.certs) - 1
                if cert.strict_target != last:
                    return _refuted(
                        "flow_sign chain must be nonstrict until the final step"
                    )
                bad = cert.verify()
                if bad is not None:
                    return _refuted(f"flow_sign certificate: {bad}", cert.residue())
                pinned.append(lie_iter)
            flow_removed.add((rt.source, rt.pred, delta))
        else:
            raise MalformedHint(f"unknown removal reason {rt.reason!r}")

    empty_ok: set[tuple] = set()
    for ec in h.empty:
        if not wellformed(ec.cell):
            raise MalformedHint("malformed empty cell")
        polys, strict = cell_sign_base(preds, ec.cell)
        if not _emptiness_conclusion_ok(ec.cert, prob.dim):
            return _refuted("empty-cell certificate lacks a contradiction target")
        if ec.cert.base != polys or ec.cert.strict != strict:
            return _refuted("empty-cell certificate region mismatch")
        bad = ec.cert.verify()
        if bad is not None:
            return _refuted(f"empty-cell certificate: {bad}", ec.cert.residue())
        empty_ok.add(ec.cell)

    # closure of the retained set under sign steps, including simultaneous
    # crossings through corners: a crossing is blocked when any one changed
    # predicate carries a certificate (its face region contains the corner)
    retained = set(h.retained)

    def blocked(cell, moves) -> bool:
        return any(
            kk in darboux_preds or (cell, kk, dd) in flow_removed for kk, dd in moves
        )

    for cell in retained:
        options = []
        for j in range(k):
            s = cell[j]
            opts = [(None, s)]
            if s == 0:
                opts.extend([((j, -1), -1), ((j, 1), 1)])
            else:
                opts.append(((j, -s), 0))
            options.append(opts)

        def explore(j, moves, signs):
            if j == k:
                if not moves:
                    return None
                succ = tuple(signs)
                if succ in retained or succ in empty_ok:
                    return None
                if blocked(cell, moves):
                    return None
                return succ
            for mv, s in options[j]:
                bad = explore(
                    j + 1, moves + ([mv] if mv else []), signs + [s]
                )
                if bad is not None:
                    return bad
            return None

        leak = explore(0, [], [])
        if leak is not None:
            return _refuted(
                f"retained cells are not flow-closed: {cell} can reach {leak}"
            )

    if inv != cells_to_formula(preds, h.retained):
        return _refuted("invariant does not match the retained cells")
    return CheckResult(
        PROVED,
        evidence=(
            f"{len(h.removed)} removals re-verified, "
            f"{len(h.empty)} cells certified empty, retained set flow-closed",
        ),
    )


def _check_chain(h: ConjunctionChain, inv: Formula, prob: Problem):
    if not h.steps:
        raise MalformedHint("empty conjunction chain")
    results = []
    domain = prob.domain
    parts = []
    for i, step in enumerate(h.steps):
        if step.domain != domain:
            return _refuted(
                f"chain step {i} recorded a domain out of order"
            )
        sub = replace(prob, domain=domain)
        results.append(check_certificate(step.certificate, sub))
        parts.append(step.certificate.invariant)
        domain = f_and(domain, step.certificate.invariant)
    if inv != f_and(*parts):
        return _refuted("chain invariant is not the conjunction of its steps")
    return _merge(results)


def _check_ddc(h: DdcSplit, inv: Formula, prob: Problem):
    n = prob.dim
    if h.poly.arity != n or h.poly.is_constant():
        raise MalformedHint("ddc split poly must be a nonconstant system poly")
    residue = h.poly.lie_derivative(prob.system.rhs) - h.cofactor * h.poly
    if not residue.is_zero():
        return _refuted("ddc darboux identity fails", residue)
    if sorted(e.sign for e in h.cells) != [-1, 0, 1]:
        raise MalformedHint("ddc needs exactly the three sign regions")
    try:
        init_clauses = to_dnf(prob.init)
        unsafe_clauses = to_dnf(prob.unsafe)
    except DnfCapExceeded:
        return CheckResult(CANDIDATE, unverified=("problem sets too disjunctive",))

    rel_of = {-1: Rel.LT, 0: Rel.EQ, 1: Rel.GT}
    results = []
    parts = []
    for entry in h.cells:
        sign_atom = Atom(h.poly, rel_of[entry.sign])
        if entry.kind == "sub":
            if entry.certificate is None:
                raise MalformedHint("ddc sub cell without a certificate")
            sub = replace(
                prob,
                domain=f_and(prob.domain, sign_atom),
                init=f_and(prob.init, sign_atom),
            )
            results.append(check_certificate(entry.certificate, sub))
            parts.append(f_and(sign_atom, entry.certificate.invariant))
        elif entry.kind in ("init_empty", "unsafe_empty"):
            clauses = init_clauses if entry.kind == "init_empty" else unsafe_clauses
            if len(entry.empty_certs) != len(clauses):
                raise MalformedHint(
                    f"ddc {entry.kind} cell needs one certificate per clause"
                )
            if entry.sign == 0:
                sign_pairs = [(h.poly, False), (-h.poly, False)]
            else:
                sign_pairs = [(h.poly * entry.sign, True)]
            for i, (cert, clause) in enumerate(zip(entry.empty_certs, clauses)):
                pairs = clause_ge_polys(clause) + sign_pairs
                if not _emptiness_conclusion_ok(cert, n):
                    return _refuted(f"ddc emptiness cert {i} lacks a contradiction target")
                if cert.base != tuple(q for q, _ in pairs) or cert.strict != tuple(
                    s for _, s in pairs
                ):
                    return _refuted(f"ddc emptiness cert {i} region mismatch")
                bad = cert.verify()
                if bad is not None:
                    return _refuted(f"ddc emptiness cert {i}: {bad}", cert.residue())
            if entry.kind == "unsafe_empty":
                parts.append(sign_atom)
            results.append(CheckResult(PROVED))
        else:
            raise MalformedHint(f"unknown ddc cell kind {entry.kind!r}")
    if inv != f_or(*parts):
        return _refuted("ddc invariant does not match its cell contributions")
    results.append(
        CheckResult(PROVED, evidence=("ddc split on an exact darboux zero set",))
    )
    return _merge(results)


def _formula_atoms(f: Formula) -> list[Atom]:
    return atoms_of(f)


def check_certificate(cert: Certificate, prob: Problem) -> CheckResult:
    """Re-derive the invariance argument of a certificate, exactly."""
    h = cert.hint
    if isinstance(h, FirstIntegralHint):
        return _check_first_integral(h, cert.invariant, prob)
    if isinstance(h, DarbouxHint):
        return _check_darboux(h, cert.invariant, prob)
    if isinstance(h, LyapunovHint):
        return _check_lyapunov(h, cert.invariant, prob)
    if isinstance(h, BarrierHint):
        return _check_barrier(h, cert.invariant, prob)
    if isinstance(h, AbstractionHint):
        return _check_abstraction(h, cert.invariant, prob)
    if isinstance(h, ConjunctionChain):
        return _check_chain(h, cert.invariant, prob)
    if isinstance(h, DdcSplit):
        return _check_ddc(h, cert.invariant, prob)
    raise MalformedHint(f"unknown hint kind: {h!r}")


# -- safety premises ---------------------------------------------------------------


def _affine_parts(p: Poly, n: int):
    lin = {}
    for j in range(n):
        m = tuple(1 if t == j else 0 for t in range(n))
        c = p.coeff(m)
        if c:
            lin[f"x{j}"] = Fraction(c)
    const = p.coeff(tuple([0] * n))
    return lin, Fraction(const)


def _all_affine(polys, n) -> bool:
    return all(
        p.total_degree() <= 1 and all(isinstance(c, Fraction) for _, c in p)
        for p in polys
    )


def _lp_extreme(base: Sequence[Poly], obj: Poly, n: int, sense: str):
    """Exact max/min of an affine objective over affine constraints.

    Returns ("value", v), ("unbounded", None) or ("infeasible", None).
    """
    lp = LinearProgram()
    for q in base:
        lin, const = _affine_parts(q, n)
        lp.add_ge(lin, -const)
    lin, const = _affine_parts(obj, n)
    if sense == "max":
        lp.maximize(lin)
    else:
        lp.minimize(lin)
    r = lp.solve()
    if r.status == "infeasible":
        return "infeasible", None
    if r.status == "unbounded":
        return "unbounded", None
    return "value", (r.objective or Fraction(0)) + const


def _atom_holds_on_clause(pairs, atom: Atom, n: int) -> bool:
    """Exactly certify that the clause (as >= pairs) implies the atom."""
    base = [q for q, _ in pairs]
    strict = [s for _, s in pairs]
    r = atom.poly

    if _all_affine(base + [r], n):
        checks = {
            Rel.LE: [("max", False)],
            Rel.LT: [("max", True)],
            Rel.GE: [("min", False)],
            Rel.GT: [("min", True)],
            Rel.EQ: [("max", False), ("min", False)],
        }[atom.rel]
        verdicts = []
        for sense, want_strict in checks:
            status, v = _lp_extreme(base, r, n, sense)
            if status == "infeasible":
                return True  # vacuous clause
            if status != "value":
                verdicts.append(False)
            elif sense == "max":
                verdicts.append(v < 0 if want_strict else v <= 0)
            else:
                verdicts.append(v > 0 if want_strict else v >= 0)
        if verdicts and all(verdicts):
            return True
        # strict atoms over strict regions can survive; fall through

    degree = max(2, r.total_degree(), max((q.total_degree() for q in base), default=0))
    targets = {
        Rel.LE: [(-r, False)],
        Rel.LT: [(-r, True)],
        Rel.GE: [(r, False)],
        Rel.GT: [(r, True)],
        Rel.EQ: [(r, False), (-r, False)],
    }[atom.rel]
    if all(
        certify_nonneg(t, base, degree, strict, strict_target=st) is not None
        for t, st in targets
    ):
        return True

    box = clause_box(_pairs_as_clause(pairs), n)
    if box is not None:
        try:
            lo, hi = r.interval_eval(box)
        except (TypeError, ValueError):
            return False
        return {
            Rel.LE: hi <= 0,
            Rel.LT: hi < 0,
            Rel.GE: lo >= 0,
            Rel.GT: lo > 0,
            Rel.EQ: lo == 0 and hi == 0,
        }[atom.rel]
    return False


def _pairs_as_clause(pairs) -> Clause:
    return tuple(
        Atom(q, Rel.GT if s else Rel.GE) for q, s in pairs
    )


def _clause_formula(clause: Clause) -> Formula:
    return f_and(*clause)


def _clause_implies(clause: Clause, consequent: Formula, n: int) -> bool:
    """The clause lands inside some DNF clause of the consequent, certified."""
    if consequent == TRUE:
        return True
    if clause_evidently_empty(clause, n):
        return True
    pairs = clause_ge_polys(clause)
    try:
        target_clauses = to_dnf(consequent)
    except DnfCapExceeded:
        return False
    for target in target_clauses:
        if all(_atom_holds_on_clause(pairs, atom, n) for atom in target):
            return True
    return False


def _clauses_disjoint(a: Clause, b: Clause, n: int) -> bool:
    merged = a + b
    if clause_evidently_empty(merged, n):
        return True
    pairs = clause_ge_polys(merged)
    base = [q for q, _ in pairs]
    strict = [s for _, s in pairs]
    if _all_affine(base, n):
        lp = LinearProgram()
        for q in base:
            lin, const = _affine_parts(q, n)
            lp.add_ge(lin, -const)
        if lp.solve().status == "infeasible":
            return True
    degree = max(2, max((q.total_degree() for q in base), default=0))
    cert = certify_region_empty(base, strict, degree)
    return cert is not None


def _sample_clause(clause: Clause, n: int, seed: int = 0):
    box = clause_box(clause, n)
    if box is None:
        return []
    return sample_points(_clause_formula(clause), box, PREMISE_SAMPLES, seed)


def _cell_clause(preds, cell) -> Clause:
    rel_of = {-1: Rel.LT, 0: Rel.EQ, 1: Rel.GT}
    return tuple(Atom(p, rel_of[s]) for p, s in zip(preds, cell))


def _abstraction_init_inclusion(
    h: AbstractionHint, init_clauses: list[Clause], prob: Problem
) -> CheckResult:
    n = prob.dim
    k = len(h.predicates)
    covered = set(h.retained) | {e.cell for e in h.empty}
    verified_disjoint: set[tuple] = set()
    for idc in h.init_disjoint:
        if len(idc.cell) != k or any(s not in (-1, 0, 1) for s in idc.cell):
            raise MalformedHint("malformed init_disjoint cell")
        if len(idc.certs) != len(init_clauses):
            raise MalformedHint("init_disjoint needs one certificate per Init clause")
        for c, clause in zip(idc.certs, init_clauses):
            pairs = clause_ge_polys(clause)
            cpolys, cstrict = cell_sign_base(h.predicates, idc.cell)
            base = tuple(q for q, _ in pairs) + cpolys
            strict = tuple(s for _, s in pairs) + cstrict
            if (
                not _emptiness_conclusion_ok(c, n)
                or c.base != base
                or c.strict != strict
            ):
                return _refuted("init_disjoint certificate region mismatch")
            bad = c.verify()
            if bad is not None:
                return _refuted(f"init_disjoint certificate: {bad}", c.residue())
        verified_disjoint.add(idc.cell)
    unverified = []
    for cell in itertools.product((-1, 0, 1), repeat=k):
        if cell in covered or cell in verified_disjoint:
            continue
        for clause in init_clauses:
            merged = clause + _cell_clause(h.predicates, cell)
            for pt in _sample_clause(merged, n):
                return CheckResult(
                    REFUTED,
                    reason=f"initial state in dropped sign cell {cell}",
                    point=tuple(pt),
                )
        unverified.append(f"init avoids sign cell {cell}")
    if unverified:
        return CheckResult(CANDIDATE, unverified=tuple(unverified))
    return CheckResult(PROVED, evidence=("init covered by the retained cells",))


def check_safety(cert: Certificate, prob: Problem) -> CheckResult:
    """Invariance plus the two safety premises: Init inside, Unsafe outside."""
    inv_res = check_certificate(cert, prob)
    if inv_res.status == REFUTED:
        return inv_res
    results = [inv_res]
    n = prob.dim
    inv = cert.invariant

    if isinstance(cert.hint, BarrierHint) and inv == Atom(cert.hint.poly, Rel.LE):
        # both premises are part of the hint itself: p <= 0 on Init and
        # p >= eps > 0 on Unsafe were certified per clause above
        results.append(
            CheckResult(PROVED, evidence=("safety premises carried by the barrier",))
        )
        return _merge(results)

    try:
        init_clauses = to_dnf(prob.init)
        unsafe_clauses = to_dnf(prob.unsafe)
        inv_clauses = to_dnf(inv)
    except DnfCapExceeded:
        results.append(
            CheckResult(CANDIDATE, unverified=("problem sets too disjunctive",))
        )
        return _merge(results)

    if isinstance(cert.hint, AbstractionHint):
        # sign cells partition the space, so Init lies inside the retained
        # union exactly when every other cell is empty or Init-disjoint
        ab_res = _abstraction_init_inclusion(cert.hint, init_clauses, prob)
        if ab_res.status == REFUTED:
            return ab_res
        results.append(ab_res)
        init_clauses = []

    for i, clause in enumerate(init_clauses):
        if _clause_implies(clause, inv, n):
            results.append(
                CheckResult(PROVED, evidence=(f"init clause {i} inside the invariant",))
            )
            continue
        bad_point = None
        for pt in _sample_clause(clause, n):
            if not eval_formula(inv, pt):
                bad_point = pt
                break
        if bad_point is not None:
            return CheckResult(
                REFUTED,
                reason=f"init clause {i} has a point outside the invariant",
                point=tuple(bad_point),
            )
        results.append(
            CheckResult(
                CANDIDATE, unverified=(f"init clause {i} inside the invariant",)
            )
        )

    for i, ic in enumerate(inv_clauses):
        for j, uc in enumerate(unsafe_clauses):
            if _clauses_disjoint(ic, uc, n):
                results.append(
                    CheckResult(
                        PROVED,
                        evidence=(f"invariant clause {i} avoids unsafe clause {j}",),
                    )
                )
                continue
            bad_point = None
            for pt in _sample_clause(ic + uc, n):
                bad_point = pt
                break
            if bad_point is not None:
                return CheckResult(
                    REFUTED,
                    reason=f"invariant clause {i} meets unsafe clause {j}",
                    point=tuple(bad_point),
                )
            results.append(
                CheckResult(
                    CANDIDATE,
                    unverified=(f"invariant clause {i} vs unsafe clause {j}",),
                )
            )

    return _merge(results)


__all__ = [
    "CANDIDATE",
    "CheckResult",
    "MalformedHint",
    "PROVED",
    "REFUTED",
    "check_certificate",
    "check_safety",
    "refute_by_simulation",
    "SimConfig",
    "SimWitness",
]
