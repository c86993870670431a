"""Arithmetic expressions over the iteration variable ``t``.

Benchmark definitions and config files describe workload and imbalance
increments as small formulas.  This module parses and evaluates them.

Grammar (recursive descent, left associative)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/' | '%') factor)*
    factor := number | 't' | 'pi' | func '(' expr ')' | '(' expr ')' | '-' factor
    func   := 'sin' | 'floor'

``%`` is floating-point modulo carrying the sign of the dividend (C
``fmod``), not Python's floored modulo.  Numbers are decimal literals,
optionally with a fraction and exponent part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Pi",
    "Neg",
    "BinOp",
    "Call",
    "ExprSyntaxError",
    "parse_expr",
    "evaluate",
    "render",
]

_FUNCTIONS = ("sin", "floor")

# precedence levels used both by the parser tests and the printer
_PREC_ADD = 1
_PREC_MUL = 2
_PREC_UNARY = 3


class ExprSyntaxError(ValueError):
    """Malformed expression text; ``position`` is the 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Expr:
    """Base class of parsed expression nodes."""

    def __call__(self, t: float) -> float:
        return evaluate(self, t)

    def __str__(self) -> str:
        return _render(self, 0)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    """The iteration variable ``t``."""


@dataclass(frozen=True)
class Pi(Expr):
    """The constant ``pi``."""


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / %
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str  # one of _FUNCTIONS
    arg: Expr


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: int | None = None) -> ExprSyntaxError:
        return ExprSyntaxError(message, self.pos if pos is None else pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected '{ch}'")
        self.pos += 1

    def parse(self) -> Expr:
        self.skip_ws()
        if self.pos >= len(self.text):
            raise self.error("empty expression")
        node = self.expr()
        self.skip_ws()
        if self.pos < len(self.text):
            raise self.error(f"unexpected trailing input {self.text[self.pos:]!r}")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek() in ("*", "/", "%"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        ch = self.peek()
        if ch == "-":
            self.pos += 1
            return Neg(self.factor())
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha() or ch == "_":
            return self.identifier()
        if ch == "":
            raise self.error("unexpected end of expression")
        raise self.error(f"unexpected character {ch!r}")

    def number(self) -> Expr:
        start = self.pos
        text = self.text
        n = len(text)
        while self.pos < n and text[self.pos].isdigit():
            self.pos += 1
        if self.pos < n and text[self.pos] == ".":
            self.pos += 1
            while self.pos < n and text[self.pos].isdigit():
                self.pos += 1
        if self.pos < n and text[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < n and text[self.pos] in "+-":
                self.pos += 1
            if self.pos < n and text[self.pos].isdigit():
                while self.pos < n and text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark  # bare 'e' belongs to the next token, not this number
        lit = text[start:self.pos]
        try:
            return Num(float(lit))
        except ValueError:
            raise self.error(f"bad number literal {lit!r}", start) from None

    def identifier(self) -> Expr:
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
            self.pos += 1
        name = text[start:self.pos]
        if name == "t":
            return Var()
        if name == "pi":
            return Pi()
        if name in _FUNCTIONS:
            if self.peek() != "(":
                raise self.error(f"function {name!r} requires parentheses", start)
            self.pos += 1
            arg = self.expr()
            self.expect(")")
            return Call(name, arg)
        raise self.error(f"unknown identifier {name!r}", start)


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises :class:`ExprSyntaxError` (with a character offset) on malformed
    input or unknown identifiers.
    """
    return _Parser(text).parse()


def evaluate(node: Expr, t: float) -> float:
    """Evaluate ``node`` at iteration ``t``.

    Division or modulo by zero raise :class:`ZeroDivisionError`; ``sin`` or
    ``floor`` of an overflowed intermediate propagate the :class:`ValueError`
    or :class:`OverflowError` from :mod:`math`.
    """
    match node:
        case Num(value=v):
            return v
        case Var():
            return float(t)
        case Pi():
            return math.pi
        case Neg(operand=x):
            return -evaluate(x, t)
        case Call(func=name, arg=arg):
            v = evaluate(arg, t)
            if name == "sin":
                return math.sin(v)
            return float(math.floor(v))
        case BinOp(op=op, left=left, right=right):
            a = evaluate(left, t)
            b = evaluate(right, t)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                return a / b
            # '%': floating modulo, result carries the sign of the dividend
            if b == 0.0:
                raise ZeroDivisionError("float modulo by zero")
            return math.fmod(a, b)
    raise TypeError(f"not an expression node: {node!r}")


def render(node: Expr) -> str:
    """Print ``node`` with minimal parentheses.

    Parsing the result reproduces the tree: ``parse_expr(render(x)) == x``.
    """
    return _render(node, 0)


def _prec(node: Expr) -> int:
    match node:
        case BinOp(op=op):
            return _PREC_ADD if op in "+-" else _PREC_MUL
        case Neg():
            return _PREC_UNARY
        case _:
            return 4


def _render(node: Expr, parent_prec: int) -> str:
    match node:
        case Num(value=v):
            return repr(v)
        case Var():
            return "t"
        case Pi():
            return "pi"
        case Neg(operand=x):
            body = "-" + _render(x, _PREC_UNARY)
            return f"({body})" if parent_prec > _PREC_UNARY else body
        case Call(func=name, arg=arg):
            return f"{name}({_render(arg, 0)})"
        case BinOp(op=op, left=left, right=right):
            prec = _prec(node)
            # left associativity: the right operand needs one level more
            body = _render(left, prec) + op + _render(right, prec + 1)
            return f"({body})" if prec < parent_prec else body
    raise TypeError(f"not an expression node: {node!r}")
