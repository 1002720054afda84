"""Plain-text polynomial systems and Hamiltonians.

Grammar (statements end at a newline or ``;``, ``#`` starts a comment)::

    stmt    := "dim" INT
             | "vars" NAME { [","] NAME }
             | "d" NAME "=" poly          # one equation per state variable
             | "H" "=" poly
    poly    := [sign] term { sign term }
    term    := factor { "*" factor }
    factor  := NUMBER [ "/" NUMBER ] | NAME [ "^" INT ]

Without a ``vars`` line the variables are ``x1..xn``; ``n`` comes from
``dim`` or, failing that, from the equation count (systems) or the largest
index used (Hamiltonians).  Coefficients are combined exactly as fractions
before being converted to floats.

Example::

    vars x, p
    dx = p
    dp = -x - x^3       # anharmonic oscillator
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import (
    ConstantTermNotAllowed,
    DegreeTooLow,
    DegreeZeroRHS,
    DimMismatch,
    ParseError,
    PolySyntaxError,
    UnknownVariable,
)
from .hamiltonian import PolyHamiltonian, PolySystem, default_names
from .tensor import CubicalTensor, check_cap

MAX_SOURCE_BYTES = 10 * 1024 * 1024


@dataclass(frozen=True)
class SourceSpan:
    line: int
    start: int
    end: int

    def __str__(self) -> str:
        return f"line {self.line}, col {self.start}-{self.end}"


@dataclass
class Monomial:
    coefficient: Fraction
    exponents: dict[int, int] = field(default_factory=dict)
    span: SourceSpan | None = None

    @property
    def degree(self) -> int:
        return sum(self.exponents.values())

    def key(self) -> tuple[int, ...]:
        return tuple(sorted((v, e) for v, e in self.exponents.items()))

    def indices(self) -> tuple[int, ...]:
        """Sorted 0-based variable multiset, one entry per power."""
        return tuple(sorted(itertools.chain.from_iterable([v] * e for v, e in self.exponents.items())))


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[=+\-*/^;,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, col0, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            col = pos - col0 + 1
            raise PolySyntaxError(f"unexpected character {text[pos]!r}", SourceSpan(line, col, col))
        kind = m.lastgroup
        span = SourceSpan(line, pos - col0 + 1, m.end() - col0)
        if kind == "nl":
            toks.append(_Tok("end", "\n", span))
            line, col0 = line + 1, m.end()
        elif kind == "op" and m.group() == ";":
            toks.append(_Tok("end", ";", span))
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), span))
        pos = m.end()
    toks.append(_Tok("end", "", SourceSpan(line, pos - col0 + 1, pos - col0 + 1)))
    return toks


@dataclass
class _Statement:
    lhs: str
    span: SourceSpan
    terms: list  # [(Fraction, [(name, power, span)], span)]


class _Parser:
    """Recursive descent over the token list."""

    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise PolySyntaxError(f"expected {want!r}, found {tok.text or 'end of input'!r}", tok.span)
        return tok

    def statements(self):
        dim, names, eqs = None, None, []
        while self.i < len(self.toks):
            tok = self.peek()
            if tok.kind == "end":
                self.next()
                continue
            if tok.kind != "name":
                raise PolySyntaxError(f"statement cannot start with {tok.text!r}", tok.span)
            if tok.text == "dim":
                self.next()
                num = self.expect("num")
                if not num.text.isdigit() or int(num.text) < 1:
                    raise PolySyntaxError("dim must be a positive integer", num.span)
                if dim is not None:
                    raise PolySyntaxError("dim declared twice", tok.span)
                dim = (int(num.text), num.span)
            elif tok.text == "vars":
                self.next()
                if names is not None:
                    raise PolySyntaxError("vars declared twice", tok.span)
                names = [self.expect("name")]
                while self.peek().kind != "end":
                    if self.peek().text == ",":
                        self.next()
                    names.append(self.expect("name"))
            else:
                self.next()
                self.expect("op", "=")
                eqs.append(_Statement(tok.text, tok.span, self.poly()))
            self.expect("end")
        return dim, names, eqs

    def _sign(self) -> int:
        if self.peek().kind == "op" and self.peek().text in ("+", "-"):
            return -1 if self.next().text == "-" else 1
        return 1

    def poly(self):
        # each monomial may carry its own sign, so "a + -b" is accepted
        terms = [self.term(self._sign())]
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            sign = -1 if self.next().text == "-" else 1
            terms.append(self.term(sign * self._sign()))
        return terms

    def term(self, sign):
        coef = Fraction(sign)
        factors = []
        first = self.peek().span
        last = self.factor(factors)
        while self.peek().kind == "op" and self.peek().text == "*":
            self.next()
            last = self.factor(factors)
        for f in factors:
            if isinstance(f, Fraction):
                coef *= f
        powers = [f for f in factors if not isinstance(f, Fraction)]
        return coef, powers, SourceSpan(first.line, first.start, last.end)

    def factor(self, out) -> SourceSpan:
        tok = self.next()
        if tok.kind == "num":
            value = Fraction(tok.text)
            end = tok.span
            if self.peek().kind == "op" and self.peek().text == "/":
                self.next()
                den = self.expect("num")
                if Fraction(den.text) == 0:
                    raise PolySyntaxError("division by zero", den.span)
                value /= Fraction(den.text)
                end = den.span
            out.append(value)
            return end
        if tok.kind == "name":
            power = 1
            end = tok.span
            if self.peek().kind == "op" and self.peek().text == "^":
                self.next()
                num = self.expect("num")
                if not num.text.isdigit() or int(num.text) < 1:
                    raise PolySyntaxError("exponents must be positive integers", num.span)
                power = int(num.text)
                end = num.span
            out.append((tok.text, power, tok.span))
            return end
        raise PolySyntaxError(f"expected a number or variable, found {tok.text or 'end of input'!r}", tok.span)


def _resolve_names(dim, names, fallback_n):
    if names is not None:
        out = [t.text for t in names]
        if len(set(out)) != len(out):
            raise PolySyntaxError("duplicate variable name", names[0].span)
        if dim is not None and dim[0] != len(out):
            raise DimMismatch(f"dim {dim[0]} but {len(out)} vars", dim[1])
        return tuple(out)
    n = dim[0] if dim is not None else fallback_n
    return default_names(n)


def _monomials(stmt: _Statement, index: dict[str, int]) -> list[Monomial]:
    """Collect like terms exactly and drop those that cancel."""
    acc: dict[tuple, Monomial] = {}
    for coef, powers, span in stmt.terms:
        exps: dict[int, int] = {}
        for name, power, nspan in powers:
            if name not in index:
                raise UnknownVariable(f"unknown variable {name!r}", nspan)
            exps[index[name]] = exps.get(index[name], 0) + power
        mono = Monomial(coef, exps, span)
        if mono.key() in acc:
            acc[mono.key()].coefficient += coef
        else:
            acc[mono.key()] = mono
    return [m for m in acc.values() if m.coefficient != 0]


def _arrangements(idx: tuple[int, ...]) -> list[tuple[int, ...]]:
    return sorted(set(itertools.permutations(idx)))


def _check_size(text: str) -> None:
    if len(text.encode("utf-8")) > MAX_SOURCE_BYTES:
        raise ParseError(f"source exceeds {MAX_SOURCE_BYTES} bytes")


def parse_system(text: str) -> PolySystem:
    """Parse ``dx<i> = ...`` equations into a canonical :class:`PolySystem`.

    A degree-``d`` monomial of equation ``i`` feeds ``A_{d+1}``; its
    coefficient is split evenly across the distinct orderings of its
    variable indices in positions ``2..d+1``.
    """
    _check_size(text)
    dim, names, eqs = _Parser(text).statements()
    for st in eqs:
        if st.lhs == "H":
            raise PolySyntaxError("a system file cannot define H", st.span)
    names = _resolve_names(dim, names, len(eqs))
    n = len(names)
    index = {name: i for i, name in enumerate(names)}
    rows: dict[int, _Statement] = {}
    for st in eqs:
        if not st.lhs.startswith("d") or st.lhs[1:] not in index:
            raise UnknownVariable(f"left-hand side {st.lhs!r} is not d<variable>", st.span)
        i = index[st.lhs[1:]]
        if i in rows:
            raise DimMismatch(f"second equation for {names[i]!r}", st.span)
        rows[i] = st
    if len(rows) != n:
        missing = [names[i] for i in range(n) if i not in rows]
        raise DimMismatch(f"no equation for {missing}")

    arrays: dict[int, np.ndarray] = {}
    for i, st in rows.items():
        monos = _monomials(st, index)
        consts = [m for m in monos if m.degree == 0]
        if consts and len(consts) == len(monos):
            raise DegreeZeroRHS(f"right-hand side of {st.lhs} is constant", st.span)
        if consts:
            raise ConstantTermNotAllowed("constant terms are not allowed", consts[0].span)
        for mono in monos:
            order = mono.degree + 1
            if order not in arrays:
                check_cap(order, n)
                arrays[order] = np.zeros((n,) * order)
            places = _arrangements(mono.indices())
            share = float(mono.coefficient) / len(places)
            for p in places:
                arrays[order][(i, *p)] = share
    tensors = {j: CubicalTensor(a) for j, a in arrays.items()}
    return PolySystem(n, tensors, names=names)


def parse_hamiltonian(text: str, names=None) -> PolyHamiltonian:
    """Parse ``H = ...`` into a :class:`PolyHamiltonian` with supersymmetric ``B_j``.

    ``names`` plays the role of a ``vars`` line when the text has none.
    """
    _check_size(text)
    dim, var_toks, eqs = _Parser(text).statements()
    hs = [st for st in eqs if st.lhs == "H"]
    if len(eqs) != 1 or len(hs) != 1:
        span = eqs[0].span if eqs else None
        raise PolySyntaxError("expected exactly one 'H = ...' statement", span)
    st = hs[0]
    if var_toks is None and names is not None:
        names = tuple(names)
        if dim is not None and dim[0] != len(names):
            raise DimMismatch(f"dim {dim[0]} but {len(names)} vars", dim[1])
    else:
        fallback = 0
        if var_toks is None and dim is None:
            for _, powers, _ in st.terms:
                for name, _, nspan in powers:
                    m = re.fullmatch(r"x([1-9][0-9]*)", name)
                    if m is None:
                        raise UnknownVariable(f"unknown variable {name!r} (declare vars)", nspan)
                    fallback = max(fallback, int(m.group(1)))
        names = _resolve_names(dim, var_toks, fallback)
    n = len(names)
    index = {name: i for i, name in enumerate(names)}
    monos = _monomials(st, index)
    low = [m for m in monos if m.degree < 2]
    if low:
        raise DegreeTooLow("Hamiltonian terms must have degree >= 2", low[0].span)
    arrays: dict[int, np.ndarray] = {}
    for mono in monos:
        d = mono.degree
        if d not in arrays:
            check_cap(d, n)
            arrays[d] = np.zeros((n,) * d)
        places = _arrangements(mono.indices())
        share = float(mono.coefficient) / len(places)
        for p in places:
            arrays[d][p] = share
    tensors = {j: CubicalTensor(a) for j, a in arrays.items()}
    return PolyHamiltonian(n, tensors, names=names)


def parse_file(path) -> PolySystem | PolyHamiltonian:
    """Read a system or Hamiltonian from text or JSON, deciding by content."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_any(text)


def parse_any(text: str) -> PolySystem | PolyHamiltonian:
    _check_size(text)
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        if obj.get("kind") == "hamiltonian":
            return PolyHamiltonian.from_json(obj)
        return PolySystem.from_json(obj)
    _, _, eqs = _Parser(text).statements()
    if any(st.lhs == "H" for st in eqs):
        return parse_hamiltonian(text)
    return parse_system(text)


# -- emission ---------------------------------------------------------------


def _natural_key(name: str):
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name) if p)


def format_coefficient(c: float) -> str:
    """Shortest exact-looking form: integer, ``p/q`` or ``repr``."""
    fr = Fraction(c).limit_denominator(10**6)
    if abs(float(fr) - c) <= 1e-15 * max(1.0, abs(c)):
        return str(fr.numerator) if fr.denominator == 1 else f"{fr.numerator}/{fr.denominator}"
    return repr(float(c))


def _format_poly(terms: list[tuple[float, dict[int, int]]], names) -> str:
    def key(term):
        exps = term[1]
        return tuple(sorted((_natural_key(names[v]), e) for v, e in exps.items()))

    parts = []
    for coef, exps in sorted(terms, key=key):
        factors = [names[v] if e == 1 else f"{names[v]}^{e}" for v, e in sorted(exps.items())]
        mag = format_coefficient(abs(coef))
        body = "*".join(factors if mag == "1" else [mag, *factors])
        sign = "-" if coef < 0 else "+"
        if not parts:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts) if parts else "0"


def _exponents(idx) -> dict[int, int]:
    out: dict[int, int] = {}
    for v in idx:
        out[int(v)] = out.get(int(v), 0) + 1
    return out


def _multinomial(idx) -> int:
    counts = _exponents(idx).values()
    return math.factorial(len(idx)) // math.prod(math.factorial(c) for c in counts)


def _header(names, n, used_max: int) -> list[str]:
    if tuple(names) != default_names(n):
        return ["vars " + ", ".join(names)]
    if used_max < n:
        return [f"dim {n}"]
    return []


def emit_system(sys: PolySystem) -> str:
    """Text form of a system; ``parse_system`` reads it back to the same tensors."""
    rows: list[list[tuple[float, dict[int, int]]]] = [[] for _ in range(sys.dim)]
    for j, A in sys.tensors.items():
        for pos in np.argwhere(A.data != 0):
            i, trail = int(pos[0]), tuple(int(p) for p in pos[1:])
            if list(trail) != sorted(trail):
                continue
            rows[i].append((float(A.data[tuple(pos)]) * _multinomial(trail), _exponents(trail)))
    lines = _header(sys.names, sys.dim, sys.dim)
    for i, terms in enumerate(rows):
        lines.append(f"d{sys.names[i]} = {_format_poly(terms, sys.names)}")
    return "\n".join(lines) + "\n"


def emit_hamiltonian(H: PolyHamiltonian) -> str:
    """Text form ``H = ...`` of a Hamiltonian."""
    terms = []
    used = 0
    for j, B in H.tensors.items():
        for pos in np.argwhere(B.data != 0):
            idx = tuple(int(p) for p in pos)
            if list(idx) != sorted(idx):
                continue
            terms.append((float(B.data[tuple(pos)]) * _multinomial(idx), _exponents(idx)))
            used = max(used, idx[-1] + 1)
    lines = _header(H.names, H.dim, used)
    lines.append(f"H = {_format_poly(terms, H.names)}")
    return "\n".join(lines) + "\n"
