"""Quantifier-free linear integer arithmetic formulas.

Terms are affine: an integer constant plus integer-coefficient variables.
Formulas are built from comparison atoms with the usual boolean
connectives.  Everything is immutable and compares structurally, and the
canonical text rendering round-trips exactly through ``parse_formula``.

Variable names are plain identifiers, possibly dotted (``P1.count``) for
process-local variables, possibly carrying a ``#`` suffix for historical
versions introduced by symbolic execution.  The parser only accepts the
first two forms; versioned names never appear in source text.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Union

Model = dict  # var name -> int; witnesses produced by the solver


class ParseError(ValueError):
    """Raised on malformed formula or program text."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# Linear terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinTerm:
    """Affine integer term: ``sum(coeff * var) + constant``.

    ``coeffs`` is a sorted tuple of (variable, coefficient) pairs with no
    zero coefficients, so equal terms are structurally equal.
    """

    coeffs: tuple = ()
    constant: int = 0

    def __post_init__(self):
        for v, c in self.coeffs:
            if c == 0:
                raise ValueError(f"zero coefficient for {v!r}")

    @staticmethod
    def make(coeffs: Mapping[str, int], constant: int = 0) -> "LinTerm":
        items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
        return LinTerm(items, constant)

    @staticmethod
    def var(name: str, coeff: int = 1) -> "LinTerm":
        return LinTerm.make({name: coeff})

    @staticmethod
    def const(k: int) -> "LinTerm":
        return LinTerm((), k)

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def coeff(self, var: str) -> int:
        for v, c in self.coeffs:
            if v == var:
                return c
        return 0

    def vars(self) -> set:
        return {v for v, _ in self.coeffs}

    def is_const(self) -> bool:
        return not self.coeffs

    def plus(self, other: "LinTerm") -> "LinTerm":
        d = self.as_dict()
        for v, c in other.coeffs:
            d[v] = d.get(v, 0) + c
        return LinTerm.make(d, self.constant + other.constant)

    def minus(self, other: "LinTerm") -> "LinTerm":
        return self.plus(other.scaled(-1))

    def scaled(self, k: int) -> "LinTerm":
        if k == 0:
            return LinTerm.const(0)
        return LinTerm(tuple((v, c * k) for v, c in self.coeffs), self.constant * k)

    def substitute(self, var: str, replacement: "LinTerm") -> "LinTerm":
        c = self.coeff(var)
        if c == 0:
            return self
        d = self.as_dict()
        del d[var]
        base = LinTerm.make(d, self.constant)
        return base.plus(replacement.scaled(c))

    def eval(self, model: Mapping[str, int]) -> int:
        total = self.constant
        for v, c in self.coeffs:
            total += c * model[v]
        return total

    def render(self) -> str:
        parts = []
        for v, c in self.coeffs:
            if c == 1:
                parts.append(v)
            elif c == -1:
                parts.append(f"-{v}")
            else:
                parts.append(f"{c}*{v}")
        if self.constant != 0 or not parts:
            parts.append(str(self.constant))
        return " + ".join(parts)


ZERO = LinTerm.const(0)


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


class Rel(enum.Enum):
    EQ = "="
    NEQ = "!="
    LE = "<="
    LT = "<"
    GE = ">="
    GT = ">"


_REL_NEGATION = {
    Rel.EQ: Rel.NEQ,
    Rel.NEQ: Rel.EQ,
    Rel.LE: Rel.GT,
    Rel.GT: Rel.LE,
    Rel.LT: Rel.GE,
    Rel.GE: Rel.LT,
}

_REL_EVAL = {
    Rel.EQ: lambda a, b: a == b,
    Rel.NEQ: lambda a, b: a != b,
    Rel.LE: lambda a, b: a <= b,
    Rel.LT: lambda a, b: a < b,
    Rel.GE: lambda a, b: a >= b,
    Rel.GT: lambda a, b: a > b,
}


@dataclass(frozen=True)
class Atom:
    lhs: LinTerm
    rel: Rel
    rhs: LinTerm

    def normalized(self) -> "Atom":
        """Move everything to the left: ``lhs - rhs  rel  0``.  Idempotent."""
        if self.rhs == ZERO:
            return self
        return Atom(self.lhs.minus(self.rhs), self.rel, ZERO)

    def negated(self) -> "Atom":
        return Atom(self.lhs, _REL_NEGATION[self.rel], self.rhs)


@dataclass(frozen=True)
class BoolConst:
    value: bool


TRUE = BoolConst(True)
FALSE = BoolConst(False)


@dataclass(frozen=True)
class Not:
    operand: "Formula"


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        if not self.children:
            raise ValueError("And requires at least one child")


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        if not self.children:
            raise ValueError("Or requires at least one child")


@dataclass(frozen=True)
class Implies:
    antecedent: "Formula"
    consequent: "Formula"


Formula = Union[BoolConst, Atom, Not, And, Or, Implies]


# -- constructors -----------------------------------------------------------


def atom_le(lhs: LinTerm, rhs: LinTerm) -> Atom:
    return Atom(lhs, Rel.LE, rhs)


def atom_eq(lhs: LinTerm, rhs: LinTerm) -> Atom:
    return Atom(lhs, Rel.EQ, rhs)


def conj(parts: Iterable[Formula]) -> Formula:
    """N-ary conjunction.  TRUE conjuncts are absorbed, FALSE dominates."""
    kept = []
    for f in parts:
        if f == TRUE:
            continue
        if f == FALSE:
            return FALSE
        if isinstance(f, And):
            kept.extend(f.children)
        else:
            kept.append(f)
    if not kept:
        return TRUE
    if len(kept) == 1:
        return kept[0]
    return And(tuple(kept))


def disj(parts: Iterable[Formula]) -> Formula:
    kept = []
    for f in parts:
        if f == FALSE:
            continue
        if f == TRUE:
            return TRUE
        if isinstance(f, Or):
            kept.extend(f.children)
        else:
            kept.append(f)
    if not kept:
        return FALSE
    if len(kept) == 1:
        return kept[0]
    return Or(tuple(kept))


def neg(f: Formula) -> Formula:
    if f == TRUE:
        return FALSE
    if f == FALSE:
        return TRUE
    if isinstance(f, Atom):
        return f.negated()
    if isinstance(f, Not):
        return f.operand
    return Not(f)


def implies(f: Formula, g: Formula) -> Formula:
    return Implies(f, g)


# -- structural traversal ---------------------------------------------------


def conjuncts(f: Formula) -> Iterator[Formula]:
    """Yield top-level conjuncts, flattening nested And nodes."""
    if isinstance(f, And):
        for c in f.children:
            yield from conjuncts(c)
    else:
        yield f


def atoms(f: Formula) -> Iterator[Atom]:
    """Yield every atom in the formula, left to right."""
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, Not):
        yield from atoms(f.operand)
    elif isinstance(f, (And, Or)):
        for c in f.children:
            yield from atoms(c)
    elif isinstance(f, Implies):
        yield from atoms(f.antecedent)
        yield from atoms(f.consequent)


def free_vars(f: Formula) -> set:
    out: set = set()
    _collect_vars(f, out)
    return out


def _collect_vars(f: Formula, out: set) -> None:
    if isinstance(f, Atom):
        out.update(f.lhs.vars())
        out.update(f.rhs.vars())
    elif isinstance(f, Not):
        _collect_vars(f.operand, out)
    elif isinstance(f, (And, Or)):
        for c in f.children:
            _collect_vars(c, out)
    elif isinstance(f, Implies):
        _collect_vars(f.antecedent, out)
        _collect_vars(f.consequent, out)


def map_atoms(f: Formula, fn) -> Formula:
    if isinstance(f, Atom):
        return fn(f)
    if isinstance(f, BoolConst):
        return f
    if isinstance(f, Not):
        return Not(map_atoms(f.operand, fn))
    if isinstance(f, And):
        return And(tuple(map_atoms(c, fn) for c in f.children))
    if isinstance(f, Or):
        return Or(tuple(map_atoms(c, fn) for c in f.children))
    if isinstance(f, Implies):
        return Implies(map_atoms(f.antecedent, fn), map_atoms(f.consequent, fn))
    raise TypeError(f"not a formula: {f!r}")


def substitute(f: Formula, var: str, term: LinTerm) -> Formula:
    """Capture-free substitution of ``term`` for every occurrence of ``var``."""
    return map_atoms(
        f, lambda a: Atom(a.lhs.substitute(var, term), a.rel, a.rhs.substitute(var, term))
    )


def rename_var(f: Formula, old: str, new: str) -> Formula:
    return substitute(f, old, LinTerm.var(new))


def eval_formula(f: Formula, model: Mapping[str, int]) -> bool:
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Atom):
        return _REL_EVAL[f.rel](f.lhs.eval(model), f.rhs.eval(model))
    if isinstance(f, Not):
        return not eval_formula(f.operand, model)
    if isinstance(f, And):
        return all(eval_formula(c, model) for c in f.children)
    if isinstance(f, Or):
        return any(eval_formula(c, model) for c in f.children)
    if isinstance(f, Implies):
        return (not eval_formula(f.antecedent, model)) or eval_formula(f.consequent, model)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Simplification
# ---------------------------------------------------------------------------


def simplify(f: Formula) -> Formula:
    """Equivalence-preserving cleanup.

    Folds ground atoms to constants, absorbs TRUE/FALSE, flattens and
    deduplicates And/Or children, pushes negation into atoms, and unwraps
    trivial implications.  Result is logically equivalent to the input.
    """
    if isinstance(f, BoolConst):
        return f
    if isinstance(f, Atom):
        n = f.normalized()
        if n.lhs.is_const():
            return TRUE if _REL_EVAL[n.rel](n.lhs.constant, 0) else FALSE
        return f
    if isinstance(f, Not):
        inner = simplify(f.operand)
        return simplify_neg(inner)
    if isinstance(f, And):
        kept = []
        seen = set()
        for c in f.children:
            s = simplify(c)
            if s == FALSE:
                return FALSE
            if s == TRUE:
                continue
            for part in conjuncts(s):
                if part not in seen:
                    seen.add(part)
                    kept.append(part)
        if not kept:
            return TRUE
        if len(kept) == 1:
            return kept[0]
        return And(tuple(kept))
    if isinstance(f, Or):
        kept = []
        seen = set()
        for c in f.children:
            s = simplify(c)
            if s == TRUE:
                return TRUE
            if s == FALSE:
                continue
            if isinstance(s, Or):
                parts = s.children
            else:
                parts = (s,)
            for part in parts:
                if part not in seen:
                    seen.add(part)
                    kept.append(part)
        if not kept:
            return FALSE
        if len(kept) == 1:
            return kept[0]
        return Or(tuple(kept))
    if isinstance(f, Implies):
        a = simplify(f.antecedent)
        b = simplify(f.consequent)
        if a == TRUE:
            return b
        if a == FALSE or b == TRUE:
            return TRUE
        if b == FALSE:
            return simplify_neg(a)
        return Implies(a, b)
    raise TypeError(f"not a formula: {f!r}")


def simplify_neg(f: Formula) -> Formula:
    if isinstance(f, BoolConst):
        return FALSE if f.value else TRUE
    if isinstance(f, Atom):
        return simplify(f.negated())
    if isinstance(f, Not):
        return f.operand
    return Not(f)


# ---------------------------------------------------------------------------
# Canonical rendering
# ---------------------------------------------------------------------------


def render(f: Formula) -> str:
    """Fully parenthesized infix rendering; ``parse_formula`` inverts it."""
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f"({f.lhs.render()} {f.rel.value} {f.rhs.render()})"
    if isinstance(f, Not):
        return f"(!{render(f.operand)})"
    if isinstance(f, And):
        return "(" + " && ".join(render(c) for c in f.children) + ")"
    if isinstance(f, Or):
        return "(" + " || ".join(render(c) for c in f.children) + ")"
    if isinstance(f, Implies):
        return f"({render(f.antecedent)} -> {render(f.consequent)})"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Tokenizer and parser
# ---------------------------------------------------------------------------

_SYMBOLS = (
    "&&", "||", "->", ":=", "<=", ">=", "!=",
    "!", "<", ">", "=", "+", "-", "*", "(", ")", "[", "]", "{", "}", ";", ":", ",",
)


@dataclass
class Token:
    kind: str  # 'ident', 'int', 'sym', 'eof'
    text: str
    line: int
    column: int


def tokenize(text: str, start_line: int = 1) -> list:
    """Split text into tokens; shared by the formula and program parsers."""
    toks = []
    line = start_line
    col = 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_."):
                j += 1
            toks.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class TokenStream:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect_sym(self, sym: str) -> Token:
        t = self.peek()
        if t.kind == "sym" and t.text == sym:
            return self.next()
        raise ParseError(f"expected {sym!r}, got {t.text or 'end of input'!r}", t.line, t.column)

    def try_sym(self, sym: str) -> bool:
        t = self.peek()
        if t.kind == "sym" and t.text == sym:
            self.next()
            return True
        return False

    def error(self, message: str):
        t = self.peek()
        raise ParseError(message, t.line, t.column)


_REL_TOKENS = {r.value: r for r in Rel}


def parse_term_stream(ts: TokenStream) -> LinTerm:
    term = _parse_signed_part(ts)
    while True:
        t = ts.peek()
        if t.kind == "sym" and t.text == "+":
            ts.next()
            term = term.plus(_parse_signed_part(ts))
        elif t.kind == "sym" and t.text == "-":
            ts.next()
            term = term.minus(_parse_signed_part(ts))
        else:
            return term


def _parse_signed_part(ts: TokenStream) -> LinTerm:
    sign = 1
    while ts.try_sym("-"):
        sign = -sign
    t = ts.peek()
    if t.kind == "int":
        ts.next()
        value = int(t.text)
        if ts.try_sym("*"):
            name = ts.peek()
            if name.kind != "ident":
                ts.error("expected variable after '*'")
            ts.next()
            return LinTerm.make({name.text: sign * value})
        return LinTerm.const(sign * value)
    if t.kind == "ident":
        ts.next()
        return LinTerm.make({t.text: sign})
    ts.error(f"expected term, got {t.text or 'end of input'!r}")


def parse_formula_stream(ts: TokenStream) -> Formula:
    return _parse_implies(ts)


def _parse_implies(ts: TokenStream) -> Formula:
    lhs = _parse_or(ts)
    if ts.try_sym("->"):
        return Implies(lhs, _parse_implies(ts))
    return lhs


def _parse_or(ts: TokenStream) -> Formula:
    parts = [_parse_and(ts)]
    while ts.try_sym("||"):
        parts.append(_parse_and(ts))
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def _parse_and(ts: TokenStream) -> Formula:
    parts = [_parse_unary(ts)]
    while ts.try_sym("&&"):
        parts.append(_parse_unary(ts))
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _parse_unary(ts: TokenStream) -> Formula:
    t = ts.peek()
    if t.kind == "sym" and t.text == "!":
        ts.next()
        return Not(_parse_unary(ts))
    if t.kind == "sym" and t.text == "(":
        ts.next()
        inner = _parse_implies(ts)
        ts.expect_sym(")")
        return inner
    if t.kind == "ident" and t.text == "true":
        ts.next()
        return TRUE
    if t.kind == "ident" and t.text == "false":
        ts.next()
        return FALSE
    return _parse_atom(ts)


def _parse_atom(ts: TokenStream) -> Atom:
    lhs = parse_term_stream(ts)
    t = ts.peek()
    if t.kind == "sym" and t.text in _REL_TOKENS:
        ts.next()
        rhs = parse_term_stream(ts)
        return Atom(lhs, _REL_TOKENS[t.text], rhs)
    ts.error(f"expected comparison operator, got {t.text or 'end of input'!r}")


def parse_formula(text: str) -> Formula:
    ts = TokenStream(tokenize(text))
    f = parse_formula_stream(ts)
    t = ts.peek()
    if t.kind != "eof":
        raise ParseError(f"trailing input {t.text!r}", t.line, t.column)
    return f


def parse_term(text: str) -> LinTerm:
    ts = TokenStream(tokenize(text))
    term = parse_term_stream(ts)
    t = ts.peek()
    if t.kind != "eof":
        raise ParseError(f"trailing input {t.text!r}", t.line, t.column)
    return term
