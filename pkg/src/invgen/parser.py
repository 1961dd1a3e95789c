"""Problem file and expression parsing.

The problem format is line-oriented text:

    name: rotation          # optional, defaults to the file stem
    class: linear           # optional declared class tag
    vars: x, y
    ode:
      x' = -y
      y' = x
    domain: true            # optional, defaults to true
    init: (x - 1)^2 + y^2 <= 1/4
    unsafe: x^2 + y^2 >= 9

Polynomial expressions use rational literals (`a/b` or integers), variables,
`+ - * ^` and parentheses; `sqrt(13)`-style constants are accepted so printed
certificates over quadratic extensions round-trip.  Formulas use comparisons
`< <= = >= > !=` and connectives `! & |` (that precedence order) plus
`true`/`false`.  `#` starts a comment.  Errors carry line and column.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .coeffs import make_quad
from .formula import TRUE, FALSE, Atom, Formula, Rel, f_and, f_or, negate
from .poly import Poly
from .problem import ODESystem, Problem


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.msg = msg
        self.line = line
        self.col = col


@dataclass
class Tok:
    kind: str  # ident, int, op, eol?
    text: str
    line: int
    col: int


_OPS = ("<=", ">=", "!=", "'", "<", ">", "=", "+", "-", "*", "^", "/", "(", ")", ",", ":", ";", "&", "|", "!")

SECTIONS = ("name", "class", "vars", "ode", "domain", "init", "unsafe")


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Tok("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Tok("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        matched = None
        for op in _OPS:
            if text.startswith(op, i):
                matched = op
                break
        if matched is None:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        toks.append(Tok("op", matched, line, col))
        col += len(matched)
        i += len(matched)
    return toks


class _Stream:
    def __init__(self, toks: list[Tok], names: Sequence[str]):
        self.toks = toks
        self.pos = 0
        self.names = list(names)
        self.index = {nm: i for i, nm in enumerate(names)}

    def peek(self, ahead: int = 0) -> Tok | None:
        p = self.pos + ahead
        return self.toks[p] if p < len(self.toks) else None

    def next(self) -> Tok:
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else Tok("eof", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col + len(last.text))
        self.pos += 1
        return t

    def expect_op(self, op: str) -> Tok:
        t = self.next()
        if t.kind != "op" or t.text != op:
            raise ParseError(f"expected {op!r}, found {t.text!r}", t.line, t.col)
        return t

    def at_op(self, *ops: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == "op" and t.text in ops

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else Tok("eof", "", 1, 1)
            return ParseError(msg, last.line, last.col + len(last.text))
        return ParseError(msg, t.line, t.col)

    def at_section(self) -> bool:
        t, t2 = self.peek(), self.peek(1)
        return (
            t is not None
            and t.kind == "ident"
            and t.text in SECTIONS
            and t2 is not None
            and t2.kind == "op"
            and t2.text == ":"
        )


# -- polynomial expressions ---------------------------------------------------


def _parse_number(s: _Stream) -> Fraction:
    t = s.next()
    num = int(t.text)
    if s.at_op("/"):
        s.expect_op("/")
        t2 = s.next()
        if t2.kind != "int":
            raise ParseError("expected integer denominator", t2.line, t2.col)
        den = int(t2.text)
        if den == 0:
            raise ParseError("zero denominator", t2.line, t2.col)
        return Fraction(num, den)
    return Fraction(num)


def _parse_base(s: _Stream) -> Poly:
    arity = len(s.names)
    t = s.peek()
    if t is None:
        raise s.error("expected polynomial")
    if t.kind == "int":
        return Poly.const(arity, _parse_number(s))
    if t.kind == "ident" and t.text == "sqrt":
        s.next()
        s.expect_op("(")
        t2 = s.next()
        if t2.kind != "int":
            raise ParseError("expected integer radicand", t2.line, t2.col)
        s.expect_op(")")
        return Poly.const(arity, make_quad(0, 1, int(t2.text)))
    if t.kind == "ident":
        s.next()
        if t.text not in s.index:
            raise ParseError(f"unknown variable {t.text!r}", t.line, t.col)
        return Poly.var(arity, s.index[t.text])
    if t.kind == "op" and t.text == "(":
        s.next()
        p = _parse_polyexpr(s)
        s.expect_op(")")
        return p
    raise s.error(f"expected polynomial, found {t.text!r}")


def _parse_power(s: _Stream) -> Poly:
    base = _parse_base(s)
    if s.at_op("^"):
        s.expect_op("^")
        t = s.next()
        if t.kind != "int":
            raise ParseError("exponent must be a nonnegative integer", t.line, t.col)
        return base ** int(t.text)
    return base


def _parse_factor(s: _Stream) -> Poly:
    if s.at_op("-"):
        s.next()
        return -_parse_factor(s)
    if s.at_op("+"):
        s.next()
        return _parse_factor(s)
    return _parse_power(s)


def _parse_term(s: _Stream) -> Poly:
    p = _parse_factor(s)
    while s.at_op("*"):
        s.next()
        p = p * _parse_factor(s)
    return p


def _parse_polyexpr(s: _Stream) -> Poly:
    p = _parse_term(s)
    while s.at_op("+", "-"):
        op = s.next().text
        q = _parse_term(s)
        p = p + q if op == "+" else p - q
    return p


# -- formulas -------------------------------------------------------------------

_RELS = {"<": Rel.LT, "<=": Rel.LE, "=": Rel.EQ, ">=": Rel.GE, ">": Rel.GT}


def _parse_atom(s: _Stream) -> Formula:
    t = s.peek()
    if t is not None and t.kind == "ident" and t.text == "true":
        s.next()
        return TRUE
    if t is not None and t.kind == "ident" and t.text == "false":
        s.next()
        return FALSE
    if s.at_op("("):
        mark = s.pos
        s.next()
        try:
            f = _parse_disj(s)
            s.expect_op(")")
            return f
        except ParseError:
            s.pos = mark  # reparse as polynomial grouping
    lhs = _parse_polyexpr(s)
    t = s.peek()
    if t is None or t.kind != "op" or (t.text not in _RELS and t.text != "!="):
        raise s.error("expected a relation")
    s.next()
    rhs = _parse_polyexpr(s)
    p = lhs - rhs
    if t.text == "!=":
        return f_or(Atom(p, Rel.LT), Atom(p, Rel.GT))
    return Atom(p, _RELS[t.text])


def _parse_unary(s: _Stream) -> Formula:
    if s.at_op("!"):
        s.next()
        return negate(_parse_unary(s))
    return _parse_atom(s)


def _parse_conj(s: _Stream) -> Formula:
    f = _parse_unary(s)
    while s.at_op("&"):
        s.next()
        f = f_and(f, _parse_unary(s))
    return f


def _parse_disj(s: _Stream) -> Formula:
    f = _parse_conj(s)
    while s.at_op("|"):
        s.next()
        f = f_or(f, _parse_conj(s))
    return f


def parse_poly(text: str, names: Sequence[str]) -> Poly:
    s = _Stream(tokenize(text), names)
    p = _parse_polyexpr(s)
    if s.peek() is not None:
        raise s.error("trailing input after polynomial")
    return p


def parse_formula(text: str, names: Sequence[str]) -> Formula:
    s = _Stream(tokenize(text), names)
    f = _parse_disj(s)
    if s.peek() is not None:
        raise s.error("trailing input after formula")
    return f


# -- problem files ----------------------------------------------------------------


@dataclass
class ProblemFile:
    problem: Problem
    name: str
    class_tag: str
    dim: int


def parse_problem(text: str, default_name: str = "problem") -> ProblemFile:
    toks = tokenize(text)
    s = _Stream(toks, [])
    name = default_name
    class_tag = ""
    names: list[str] | None = None
    rhs_map: dict[str, Poly] = {}
    domain: Formula = TRUE
    init: Formula | None = None
    unsafe: Formula | None = None
    seen: set[str] = set()

    while s.peek() is not None:
        if not s.at_section():
            raise s.error("expected a section header (vars/ode/init/unsafe/domain/name/class)")
        head = s.next()
        s.expect_op(":")
        if head.text in seen:
            raise ParseError(f"duplicate section {head.text!r}", head.line, head.col)
        seen.add(head.text)
        if head.text == "name":
            t = s.next()
            if t.kind != "ident":
                raise ParseError("expected a name", t.line, t.col)
            name = t.text
        elif head.text == "class":
            t = s.next()
            if t.kind != "ident":
                raise ParseError("expected a class tag", t.line, t.col)
            class_tag = t.text
        elif head.text == "vars":
            names = []
            while True:
                t = s.next()
                if t.kind != "ident":
                    raise ParseError("expected a variable name", t.line, t.col)
                if t.text in names or t.text in ("true", "false", "sqrt"):
                    raise ParseError(f"bad variable name {t.text!r}", t.line, t.col)
                names.append(t.text)
                if s.at_op(","):
                    s.next()
                    continue
                break
            s.names = names
            s.index = {nm: i for i, nm in enumerate(names)}
        elif head.text == "ode":
            if names is None:
                raise ParseError("ode section before vars", head.line, head.col)
            while True:
                t = s.peek()
                if t is None or s.at_section():
                    break
                t = s.next()
                if t.kind != "ident" or t.text not in s.index:
                    raise ParseError(f"unknown variable {t.text!r}", t.line, t.col)
                s.expect_op("'")
                s.expect_op("=")
                if t.text in rhs_map:
                    raise ParseError(f"duplicate equation for {t.text!r}", t.line, t.col)
                rhs_map[t.text] = _parse_polyexpr(s)
                if s.at_op(";"):
                    s.next()
        elif head.text == "domain":
            domain = _parse_disj(s)
        elif head.text == "init":
            init = _parse_disj(s)
        elif head.text == "unsafe":
            unsafe = _parse_disj(s)

    if names is None:
        raise ParseError("missing vars section", 1, 1)
    if init is None:
        raise ParseError("missing init section", 1, 1)
    if unsafe is None:
        raise ParseError("missing unsafe section", 1, 1)
    missing = [nm for nm in names if nm not in rhs_map]
    if missing:
        raise ParseError(f"missing ODE for {missing[0]!r}", 1, 1)
    system = ODESystem(names, [rhs_map[nm] for nm in names])
    prob = Problem(system=system, domain=domain, init=init, unsafe=unsafe, name=name)
    return ProblemFile(problem=prob, name=name, class_tag=class_tag or prob.classify(), dim=len(names))


def print_problem(pf: ProblemFile) -> str:
    """Canonical text form; parse(print(parse(t))) is structurally stable."""
    from .formula import formula_str

    prob = pf.problem
    names = prob.names
    lines = [f"name: {pf.name}", f"class: {pf.class_tag}", f"vars: {', '.join(names)}", "ode:"]
    for nm, f in zip(names, prob.system.rhs):
        lines.append(f"  {nm}' = {f.to_str(names)}")
    if prob.domain != TRUE:
        lines.append(f"domain: {formula_str(prob.domain, names)}")
    lines.append(f"init: {formula_str(prob.init, names)}")
    lines.append(f"unsafe: {formula_str(prob.unsafe, names)}")
    return "\n".join(lines) + "\n"
