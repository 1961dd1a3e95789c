"""Certificate and proof-hint data model, with the hint document format.

A Certificate pairs an invariant formula with a hint that makes the
invariance argument re-checkable without search.  Hint kinds:

  FirstIntegralHint(p)        lie(p) = 0; level predicates of p are invariant
  DarbouxHint(p, cofactor)    lie(p) = cofactor * p; sign sets invariant, and
                              for a constant cofactor, offset levels too
  LyapunovHint(V, P, Q)       V = x^T P x decreasing; sublevels invariant
  BarrierHint(p, lam, eps, .) exponential-condition barrier with exact
                              nonnegativity certificates for each premise
  AbstractionHint(...)        sign-cell graph with certified transition
                              removals and certified-empty cells
  ConjunctionChain(steps)     ordered sub-certificates, each checked under
                              the domain in force at its step
  DdcSplit(p, cofactor, ...)  divide and conquer on an invariant zero set

The document format is line oriented: one hint per line as
``kind | key = value; key = value``, nesting expressed by two-space
indentation.  Polynomials and formulas print in canonical form, so emitting
and re-parsing a certificate yields an equal value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .formula import Atom, Formula, Rel, f_and, f_or, formula_str
from .poly import Poly

# -- nonnegativity certificates ------------------------------------------------


@dataclass(frozen=True)
class NonnegCert:
    """Exact witness that target >= 0 (or > 0) where all base polys hold.

    The region is the conjunction of base[i] >= 0 (strict where strict[i]).
    Identity: target == constant + sum_j multipliers[j] * prod_i base[i]^powers[j][i],
    with all multipliers and the constant nonnegative.  When ``strict_target``
    is set, the conclusion is target > 0, which additionally needs positive
    mass on products built purely from strict hypotheses (the empty product
    counts: a positive constant term suffices).
    """

    target: Poly
    base: tuple[Poly, ...]
    strict: tuple[bool, ...]
    powers: tuple[tuple[int, ...], ...]
    multipliers: tuple[Fraction, ...]
    constant: Fraction = Fraction(0)
    strict_target: bool = False

    def residue(self) -> Poly:
        """target minus the certified combination; zero iff the identity holds."""
        arity = self.target.arity
        acc = Poly.const(arity, self.constant)
        for mult, pw in zip(self.multipliers, self.powers):
            if mult == 0:
                continue
            term = Poly.const(arity, mult)
            for b, e in zip(self.base, pw):
                for _ in range(e):
                    term = term * b
            acc = acc + term
        return self.target - acc

    def verify(self) -> str | None:
        """None when sound; otherwise a short reason."""
        if len(self.base) != len(self.strict):
            return "base/strict length mismatch"
        if len(self.powers) != len(self.multipliers):
            return "powers/multipliers length mismatch"
        if any(len(pw) != len(self.base) for pw in self.powers):
            return "power tuple arity mismatch"
        if any(m < 0 for m in self.multipliers):
            return "negative multiplier"
        if self.constant < 0:
            return "negative constant term"
        if not self.residue().is_zero():
            return "identity residue is nonzero"
        if self.strict_target:
            mass = self.constant
            for mult, pw in zip(self.multipliers, self.powers):
                if all(e == 0 or self.strict[i] for i, e in enumerate(pw)):
                    mass += mult
            if mass <= 0:
                return "no strict mass for a strict conclusion"
        return None


# -- hint kinds -----------------------------------------------------------------


@dataclass(frozen=True)
class FirstIntegralHint:
    poly: Poly


@dataclass(frozen=True)
class DarbouxHint:
    poly: Poly
    cofactor: Poly


@dataclass(frozen=True)
class LyapunovHint:
    v: Poly
    p_matrix: tuple[tuple[Fraction, ...], ...]
    q_matrix: tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class BarrierHint:
    """Barrier p with rate lam and margin eps > 0.

    One nonnegativity certificate per disjunct of the corresponding premise:
    init_certs[i] proves -p >= 0 on the i-th initial-set clause, unsafe_certs[j]
    proves p - eps >= 0 on the j-th unsafe clause, flow_certs[k] proves
    lam * p - lie(p) >= 0 on the k-th domain clause.
    """

    poly: Poly
    lam: Fraction
    eps: Fraction
    init_certs: tuple[NonnegCert, ...]
    unsafe_certs: tuple[NonnegCert, ...]
    flow_certs: tuple[NonnegCert, ...]


Cell = tuple[int, ...]  # one sign in {-1, 0, 1} per predicate


def cell_formula(predicates: Sequence[Poly], cell: Cell) -> Formula:
    """The sign cell as a conjunction of sign atoms, in predicate order."""
    rel_of = {-1: Rel.LT, 0: Rel.EQ, 1: Rel.GT}
    return f_and(*(Atom(p, rel_of[s]) for p, s in zip(predicates, cell)))


def cells_to_formula(predicates: Sequence[Poly], cells: Sequence[Cell]) -> Formula:
    return f_or(*(cell_formula(predicates, c) for c in cells))


def cell_sign_base(
    predicates: Sequence[Poly], cell: Cell
) -> tuple[tuple[Poly, ...], tuple[bool, ...]]:
    """The open cell as q >= 0 constraints with strictness flags.

    Sign 0 contributes both p >= 0 and -p >= 0; nonzero signs contribute one
    strict constraint.  Generators and the checker both derive certificate
    bases through here, so base lists compare equal structurally.
    """
    polys: list[Poly] = []
    strict: list[bool] = []
    for p, s in zip(predicates, cell):
        if s == 0:
            polys.extend((p, -p))
            strict.extend((False, False))
        elif s > 0:
            polys.append(p)
            strict.append(True)
        else:
            polys.append(-p)
            strict.append(True)
    return tuple(polys), tuple(strict)


def face_closure_base(
    predicates: Sequence[Poly], cell: Cell, pred: int
) -> tuple[Poly, ...]:
    """Closure of the cell intersected with the zero set of one predicate.

    All constraints are weakened to closures (nonstrict), and ``pred`` is
    pinned to zero by a pair of opposite constraints.
    """
    out: list[Poly] = []
    for j, (p, s) in enumerate(zip(predicates, cell)):
        if j == pred or s == 0:
            out.extend((p, -p))
        elif s > 0:
            out.append(p)
        else:
            out.append(-p)
    return tuple(out)


@dataclass(frozen=True)
class RemovedTransition:
    """Certified impossibility of crossing predicate ``pred`` from source to target.

    reason "darboux": the predicate is a Darboux polynomial (zero set
    invariant), so its sign cannot change at all; cofactor attached.
    reason "flow_sign": successive Lie derivatives of the predicate are
    certified over the crossing face (the closure of the source cell with
    the predicate pinned to zero).  certs[i] proves direction * lie^{i+1}(p)
    >= 0 on the face intersected with {lie^1(p) = ... = lie^i(p) = 0}; the
    last certificate is strict.  At every face point the first nonvanishing
    derivative of p along the flow then has the blocking sign, so the
    crossing opposite to it cannot occur.
    """

    source: Cell
    target: Cell
    pred: int
    reason: str  # "darboux" | "flow_sign"
    cofactor: Poly | None = None
    certs: tuple[NonnegCert, ...] = ()
    direction: int = 0


@dataclass(frozen=True)
class EmptyCellCert:
    cell: Cell
    cert: NonnegCert


@dataclass(frozen=True)
class InitDisjointCert:
    """Per-Init-clause contradiction witnesses: the cell meets no initial state."""

    cell: Cell
    certs: tuple[NonnegCert, ...]  # one per Init clause, clause pairs first


@dataclass(frozen=True)
class AbstractionHint:
    """Sign-partition abstraction: the retained cells form a flow-closed union.

    Sign cells of the predicate list partition the state space, so initial
    states lie inside the retained union exactly when every other cell is
    either empty or free of initial states; init_disjoint carries those
    witnesses for the non-retained, non-empty cells.
    """

    predicates: tuple[Poly, ...]
    retained: tuple[Cell, ...]
    removed: tuple[RemovedTransition, ...]
    empty: tuple[EmptyCellCert, ...]
    init_disjoint: tuple[InitDisjointCert, ...] = ()


@dataclass(frozen=True)
class ChainStep:
    certificate: "Certificate"
    domain: Formula  # domain in force when this step was proved


@dataclass(frozen=True)
class ConjunctionChain:
    steps: tuple[ChainStep, ...]


@dataclass(frozen=True)
class DdcCellEntry:
    """One sign region of the splitting polynomial.

    kind "sub": a sub-certificate proves an invariant inside the region.
    kind "init_empty": no initial states in the region (one emptiness
    certificate per Init clause).  kind "unsafe_empty": the region never
    meets the unsafe set (one certificate per Unsafe clause), so the region
    itself is a safe invariant.
    """

    sign: int  # -1, 0, 1
    kind: str  # "sub" | "init_empty" | "unsafe_empty"
    certificate: "Certificate | None" = None
    empty_certs: tuple[NonnegCert, ...] = ()


@dataclass(frozen=True)
class DdcSplit:
    poly: Poly
    cofactor: Poly
    cells: tuple[DdcCellEntry, ...]


Hint = (
    FirstIntegralHint
    | DarbouxHint
    | LyapunovHint
    | BarrierHint
    | AbstractionHint
    | ConjunctionChain
    | DdcSplit
)


@dataclass(frozen=True)
class Certificate:
    invariant: Formula
    hint: Hint
    method: str = ""


# -- document emission -----------------------------------------------------------


def _frac(x: Fraction) -> str:
    return str(Fraction(x))


def _fracs(xs: Sequence[Fraction]) -> str:
    return ", ".join(_frac(x) for x in xs)


def _matrix(m: Sequence[Sequence[Fraction]]) -> str:
    return "[" + ", ".join("[" + ",".join(_frac(v) for v in row) + "]" for row in m) + "]"


def _cellstr(c: Cell) -> str:
    return "(" + ",".join(str(s) for s in c) + ")"


def _cells(cs: Sequence[Cell]) -> str:
    return " ".join(_cellstr(c) for c in cs)


def _emit_nonneg(c: NonnegCert, names, role: str, out: list[str], depth: int):
    pad = "  " * depth
    fields = [
        f"role = {role}",
        f"target = {c.target.to_str(names)}",
        f"base = {' , '.join(p.to_str(names) for p in c.base) if c.base else '-'}",
        f"strict = {','.join('1' if s else '0' for s in c.strict) if c.strict else '-'}",
        f"powers = {' '.join(_cellstr(p) for p in c.powers) if c.powers else '-'}",
        f"mults = {_fracs(c.multipliers) if c.multipliers else '-'}",
        f"const = {_frac(c.constant)}",
        f"strict_target = {1 if c.strict_target else 0}",
    ]
    out.append(pad + "nonneg | " + "; ".join(fields))


def _emit_hint(h: Hint, names, out: list[str], depth: int):
    pad = "  " * depth
    if isinstance(h, FirstIntegralHint):
        out.append(pad + f"first_integral | p = {h.poly.to_str(names)}")
    elif isinstance(h, DarbouxHint):
        out.append(
            pad
            + f"darboux | p = {h.poly.to_str(names)}; cofactor = {h.cofactor.to_str(names)}"
        )
    elif isinstance(h, LyapunovHint):
        out.append(
            pad
            + f"lyapunov | v = {h.v.to_str(names)}; p_matrix = {_matrix(h.p_matrix)}; "
            + f"q_matrix = {_matrix(h.q_matrix)}"
        )
    elif isinstance(h, BarrierHint):
        out.append(
            pad
            + f"barrier | p = {h.poly.to_str(names)}; lambda = {_frac(h.lam)}; eps = {_frac(h.eps)}"
        )
        for role, certs in (
            ("init", h.init_certs),
            ("unsafe", h.unsafe_certs),
            ("flow", h.flow_certs),
        ):
            for cert in certs:
                _emit_nonneg(cert, names, role, out, depth + 1)
    elif isinstance(h, AbstractionHint):
        preds = " , ".join(p.to_str(names) for p in h.predicates)
        out.append(
            pad
            + f"abstraction | predicates = {preds}; retained = {_cells(h.retained)}"
        )
        for rt in h.removed:
            fields = [
                f"source = {_cellstr(rt.source)}",
                f"target = {_cellstr(rt.target)}",
                f"pred = {rt.pred}",
                f"reason = {rt.reason}",
            ]
            if rt.cofactor is not None:
                fields.append(f"cofactor = {rt.cofactor.to_str(names)}")
            if rt.direction:
                fields.append(f"direction = {rt.direction}")
            out.append(pad + "  removed | " + "; ".join(fields))
            for cert in rt.certs:
                _emit_nonneg(cert, names, "face", out, depth + 2)
        for ec in h.empty:
            out.append(pad + f"  empty_cell | cell = {_cellstr(ec.cell)}")
            _emit_nonneg(ec.cert, names, "empty", out, depth + 2)
        for idc in h.init_disjoint:
            out.append(pad + f"  init_disjoint | cell = {_cellstr(idc.cell)}")
            for cert in idc.certs:
                _emit_nonneg(cert, names, "init", out, depth + 2)
    elif isinstance(h, ConjunctionChain):
        out.append(pad + f"chain | steps = {len(h.steps)}")
        for step in h.steps:
            out.append(
                pad + f"  step | domain = {formula_str(step.domain, names)}"
            )
            _emit_cert(step.certificate, names, out, depth + 2)
    elif isinstance(h, DdcSplit):
        out.append(
            pad
            + f"ddc | p = {h.poly.to_str(names)}; cofactor = {h.cofactor.to_str(names)}"
        )
        for entry in h.cells:
            out.append(pad + f"  cell | sign = {entry.sign}; kind = {entry.kind}")
            if entry.certificate is not None:
                _emit_cert(entry.certificate, names, out, depth + 2)
            for ec in entry.empty_certs:
                _emit_nonneg(ec, names, "empty", out, depth + 2)
    else:
        raise TypeError(f"unknown hint kind: {h!r}")


def _emit_cert(c: Certificate, names, out: list[str], depth: int):
    pad = "  " * depth
    out.append(
        pad
        + f"certificate | method = {c.method or '-'}; invariant = {formula_str(c.invariant, names)}"
    )
    _emit_hint(c.hint, names, out, depth + 1)


def emit_hints(c: Certificate, names: Sequence[str]) -> str:
    """Serialize a certificate as the documented hint text."""
    out: list[str] = [f"vars | {', '.join(names)}"]
    _emit_cert(c, names, out, 0)
    return "\n".join(out) + "\n"


# -- document parsing -------------------------------------------------------------


class HintParseError(Exception):
    pass


@dataclass
class _Line:
    depth: int
    kind: str
    fields: dict[str, str]
    children: list["_Line"] = field(default_factory=list)


def _split_lines(text: str) -> list[_Line]:
    flat: list[_Line] = []
    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip(" "))
        if indent % 2:
            raise HintParseError(f"odd indentation: {raw!r}")
        body = raw.strip()
        if "|" not in body:
            raise HintParseError(f"missing '|': {raw!r}")
        kind, _, payload = body.partition("|")
        fields: dict[str, str] = {}
        if kind.strip() == "vars":
            fields["names"] = payload.strip()
        else:
            for part in payload.split(";"):
                part = part.strip()
                if not part:
                    continue
                key, eq, value = part.partition("=")
                if not eq:
                    raise HintParseError(f"field without '=': {part!r}")
                fields[key.strip()] = value.strip()
        flat.append(_Line(indent // 2, kind.strip(), fields))
    # build the tree by indentation
    root: list[_Line] = []
    stack: list[_Line] = []
    for ln in flat:
        while stack and stack[-1].depth >= ln.depth:
            stack.pop()
        if stack:
            stack[-1].children.append(ln)
        else:
            root.append(ln)
        stack.append(ln)
    return root


def _need(ln: _Line, key: str) -> str:
    if key not in ln.fields:
        raise HintParseError(f"{ln.kind}: missing field {key!r}")
    return ln.fields[key]


def _parse_cell(s: str) -> Cell:
    s = s.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise HintParseError(f"bad cell: {s!r}")
    inner = s[1:-1].strip()
    if not inner:
        return ()
    return tuple(int(v) for v in inner.split(","))


def _parse_cells(s: str) -> tuple[Cell, ...]:
    s = s.strip()
    if not s or s == "-":
        return ()
    return tuple(_parse_cell(tok) for tok in s.split())


def _parse_matrix(s: str) -> tuple[tuple[Fraction, ...], ...]:
    s = s.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise HintParseError(f"bad matrix: {s!r}")
    inner = s[1:-1].strip()
    rows: list[tuple[Fraction, ...]] = []
    while inner:
        if not inner.startswith("["):
            raise HintParseError(f"bad matrix row: {inner!r}")
        end = inner.index("]")
        row = inner[1:end]
        rows.append(tuple(Fraction(v.strip()) for v in row.split(",") if v.strip()))
        inner = inner[end + 1 :].lstrip(" ,")
    return tuple(rows)


def _parse_nonneg(ln: _Line, names) -> tuple[str, NonnegCert]:
    from .parser import parse_poly

    role = _need(ln, "role")
    target = parse_poly(_need(ln, "target"), names)
    base_s = _need(ln, "base")
    base = (
        ()
        if base_s == "-"
        else tuple(parse_poly(tok.strip(), names) for tok in base_s.split(" , "))
    )
    strict_s = _need(ln, "strict")
    strict = (
        ()
        if strict_s == "-"
        else tuple(tok.strip() == "1" for tok in strict_s.split(","))
    )
    powers_s = _need(ln, "powers")
    powers = (
        ()
        if powers_s == "-"
        else tuple(_parse_cell(tok) for tok in powers_s.split())
    )
    mults_s = _need(ln, "mults")
    mults = (
        ()
        if mults_s == "-"
        else tuple(Fraction(tok.strip()) for tok in mults_s.split(","))
    )
    return role, NonnegCert(
        target=target,
        base=base,
        strict=strict,
        powers=powers,
        multipliers=mults,
        constant=Fraction(_need(ln, "const")),
        strict_target=_need(ln, "strict_target") == "1",
    )


def _parse_hint(ln: _Line, names) -> Hint:
    from .parser import parse_formula, parse_poly

    if ln.kind == "first_integral":
        return FirstIntegralHint(parse_poly(_need(ln, "p"), names))
    if ln.kind == "darboux":
        return DarbouxHint(
            parse_poly(_need(ln, "p"), names),
            parse_poly(_need(ln, "cofactor"), names),
        )
    if ln.kind == "lyapunov":
        return LyapunovHint(
            v=parse_poly(_need(ln, "v"), names),
            p_matrix=_parse_matrix(_need(ln, "p_matrix")),
            q_matrix=_parse_matrix(_need(ln, "q_matrix")),
        )
    if ln.kind == "barrier":
        certs: dict[str, list[NonnegCert]] = {"init": [], "unsafe": [], "flow": []}
        for ch in ln.children:
            if ch.kind != "nonneg":
                raise HintParseError(f"barrier child must be nonneg, got {ch.kind}")
            role, cert = _parse_nonneg(ch, names)
            if role not in certs:
                raise HintParseError(f"unknown barrier cert role {role!r}")
            certs[role].append(cert)
        return BarrierHint(
            poly=parse_poly(_need(ln, "p"), names),
            lam=Fraction(_need(ln, "lambda")),
            eps=Fraction(_need(ln, "eps")),
            init_certs=tuple(certs["init"]),
            unsafe_certs=tuple(certs["unsafe"]),
            flow_certs=tuple(certs["flow"]),
        )
    if ln.kind == "abstraction":
        preds = tuple(
            parse_poly(tok.strip(), names)
            for tok in _need(ln, "predicates").split(" , ")
        )
        retained = _parse_cells(_need(ln, "retained"))
        removed: list[RemovedTransition] = []
        empty: list[EmptyCellCert] = []
        init_disjoint: list[InitDisjointCert] = []
        for ch in ln.children:
            if ch.kind == "removed":
                cof = (
                    parse_poly(ch.fields["cofactor"], names)
                    if "cofactor" in ch.fields
                    else None
                )
                rcerts = []
                for sub in ch.children:
                    if sub.kind == "nonneg":
                        _, cert = _parse_nonneg(sub, names)
                        rcerts.append(cert)
                removed.append(
                    RemovedTransition(
                        source=_parse_cell(_need(ch, "source")),
                        target=_parse_cell(_need(ch, "target")),
                        pred=int(_need(ch, "pred")),
                        reason=_need(ch, "reason"),
                        cofactor=cof,
                        certs=tuple(rcerts),
                        direction=int(ch.fields.get("direction", "0")),
                    )
                )
            elif ch.kind == "empty_cell":
                sub = next(c for c in ch.children if c.kind == "nonneg")
                _, cert = _parse_nonneg(sub, names)
                empty.append(EmptyCellCert(cell=_parse_cell(_need(ch, "cell")), cert=cert))
            elif ch.kind == "init_disjoint":
                icerts = []
                for sub in ch.children:
                    if sub.kind == "nonneg":
                        _, cert = _parse_nonneg(sub, names)
                        icerts.append(cert)
                init_disjoint.append(
                    InitDisjointCert(
                        cell=_parse_cell(_need(ch, "cell")), certs=tuple(icerts)
                    )
                )
            else:
                raise HintParseError(f"unexpected abstraction child {ch.kind}")
        return AbstractionHint(
            predicates=preds,
            retained=retained,
            removed=tuple(removed),
            empty=tuple(empty),
            init_disjoint=tuple(init_disjoint),
        )
    if ln.kind == "chain":
        steps = []
        for ch in ln.children:
            if ch.kind != "step":
                raise HintParseError(f"chain child must be step, got {ch.kind}")
            dom = parse_formula(_need(ch, "domain"), names)
            sub = next(c for c in ch.children if c.kind == "certificate")
            steps.append(ChainStep(certificate=_parse_cert(sub, names), domain=dom))
        return ConjunctionChain(steps=tuple(steps))
    if ln.kind == "ddc":
        cells = []
        for ch in ln.children:
            if ch.kind != "cell":
                raise HintParseError(f"ddc child must be cell, got {ch.kind}")
            cert = None
            ecerts = []
            for sub in ch.children:
                if sub.kind == "certificate":
                    cert = _parse_cert(sub, names)
                elif sub.kind == "nonneg":
                    _, ec = _parse_nonneg(sub, names)
                    ecerts.append(ec)
            cells.append(
                DdcCellEntry(
                    sign=int(_need(ch, "sign")),
                    kind=_need(ch, "kind"),
                    certificate=cert,
                    empty_certs=tuple(ecerts),
                )
            )
        return DdcSplit(
            poly=parse_poly(_need(ln, "p"), names),
            cofactor=parse_poly(_need(ln, "cofactor"), names),
            cells=tuple(cells),
        )
    raise HintParseError(f"unknown hint kind {ln.kind!r}")


def _parse_cert(ln: _Line, names) -> Certificate:
    from .parser import parse_formula

    if ln.kind != "certificate":
        raise HintParseError(f"expected certificate line, got {ln.kind!r}")
    method = _need(ln, "method")
    inv = parse_formula(_need(ln, "invariant"), names)
    hint_lines = [c for c in ln.children if c.kind != "nonneg"]
    if len(hint_lines) != 1:
        raise HintParseError("certificate needs exactly one hint child")
    return Certificate(
        invariant=inv,
        hint=_parse_hint(hint_lines[0], names),
        method="" if method == "-" else method,
    )


def parse_hints(text: str) -> tuple[Certificate, list[str]]:
    """Parse a hint document; returns the certificate and the variable names."""
    roots = _split_lines(text)
    if not roots or roots[0].kind != "vars":
        raise HintParseError("document must start with a vars line")
    names = [nm.strip() for nm in roots[0].fields["names"].split(",") if nm.strip()]
    certs = [ln for ln in roots[1:] if ln.kind == "certificate"]
    if len(certs) != 1:
        raise HintParseError("document must contain exactly one top-level certificate")
    return _parse_cert(certs[0], names), names
