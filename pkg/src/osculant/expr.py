"""Expression language for immersion components.

Grammar (whitespace is insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-'? power
    power  := atom ('^' integer)?
    atom   := number | 'u' integer | func '(' expr ')' | '(' expr ')'
    func   := 'sin' | 'cos' | 'exp'

Variables are 1-based (``u1 .. un``).  Exponents must be non-negative
integer literals.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

from .jet import Jet, jet_constant, jet_div, jet_elementary, jet_pow, jet_scale

__all__ = [
    "BinOp",
    "Call",
    "Expr",
    "ExprSyntaxError",
    "Neg",
    "Num",
    "Pow",
    "Seeds",
    "Var",
    "parse_expression",
    "substitute",
]

FUNCTIONS = ("sin", "cos", "exp")


class Seeds(list):
    """Variable jets for one evaluation, with a cache of their powers."""

    def __init__(self, jets):
        super().__init__(jets)
        self.powers: dict[tuple[int, int], Jet] = {}


class ExprSyntaxError(ValueError):
    """Malformed expression text; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class Expr:
    """Base class of expression nodes."""

    precedence = 4

    def jet(self, seeds: Sequence[Jet]) -> Jet:
        raise NotImplementedError

    def evaluate(self, point: Sequence[float]) -> float:
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError

    def variables(self) -> set[int]:
        return set()

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def jet(self, seeds):
        s = seeds[0]
        return jet_constant(self.value, s.num_vars, s.order)

    def evaluate(self, point):
        return self.value

    def to_text(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based

    def jet(self, seeds):
        return seeds[self.index - 1]

    def evaluate(self, point):
        return float(point[self.index - 1])

    def to_text(self):
        return f"u{self.index}"

    def variables(self):
        return {self.index}


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr
    precedence = 3

    def jet(self, seeds):
        return -self.arg.jet(seeds)

    def evaluate(self, point):
        return -self.arg.evaluate(point)

    def to_text(self):
        inner = self.arg.to_text()
        if isinstance(self.arg, (BinOp, Neg)):
            inner = f"({inner})"
        return f"-{inner}"

    def variables(self):
        return self.arg.variables()


_BIN_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    @property
    def precedence(self):
        return _BIN_PREC[self.op]

    def jet(self, seeds):
        # literal factors scale instead of running a full truncated product
        if self.op == "*" and isinstance(self.left, Num):
            return jet_scale(self.right.jet(seeds), self.left.value)
        if self.op in "*/" and isinstance(self.right, Num):
            factor = self.right.value if self.op == "*" else 1.0 / self.right.value
            return jet_scale(self.left.jet(seeds), factor)
        a = self.left.jet(seeds)
        b = self.right.jet(seeds)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return jet_div(a, b)

    def evaluate(self, point):
        a = self.left.evaluate(point)
        b = self.right.evaluate(point)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def to_text(self):
        left = self.left.to_text()
        right = self.right.to_text()
        if isinstance(self.left, BinOp) and self.left.precedence < self.precedence:
            left = f"({left})"
        if isinstance(self.right, BinOp) and self.right.precedence <= self.precedence:
            right = f"({right})"
        return f"{left} {self.op} {right}"

    def variables(self):
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def jet(self, seeds):
        cache = getattr(seeds, "powers", None)
        if cache is None or not isinstance(self.base, Var):
            return jet_pow(self.base.jet(seeds), self.exponent)
        # variable powers repeat across polynomial components
        key = (self.base.index, self.exponent)
        if key not in cache:
            cache[key] = jet_pow(self.base.jet(seeds), self.exponent)
        return cache[key]

    def evaluate(self, point):
        return self.base.evaluate(point) ** self.exponent

    def to_text(self):
        base = self.base.to_text()
        if not isinstance(self.base, (Num, Var, Call)):
            base = f"({base})"
        return f"{base}^{self.exponent}"

    def variables(self):
        return self.base.variables()


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def jet(self, seeds):
        return jet_elementary(self.arg.jet(seeds), self.func)

    def evaluate(self, point):
        return getattr(math, self.func)(self.arg.evaluate(point))

    def to_text(self):
        return f"{self.func}({self.arg.to_text()})"

    def variables(self):
        return self.arg.variables()


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<var>u(?P<vidx>\d+))
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = "var" if m.group("var") else m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(0), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, num_vars: int):
        self.text = text
        self.num_vars = num_vars
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ExprSyntaxError(message, tok[2], self.text)

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            found = tok[1] or "end of input"
            raise self.error(f"expected {value!r}, found {found!r}", tok)
        return tok

    def parse(self) -> Expr:
        node = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return Neg(self.power())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[1] == "-":
                raise self.error("negative exponent", tok)
            if tok[0] != "number":
                raise self.error("exponent must be an integer literal", tok)
            if not tok[1].isdigit():
                raise self.error(f"exponent must be a non-negative integer, got {tok[1]}", tok)
            node = Pow(node, int(tok[1]))
        return node

    def atom(self):
        tok = self.take()
        kind, value, pos = tok
        if kind == "number":
            return Num(float(value))
        if kind == "var":
            index = int(value[1:])
            if not 1 <= index <= self.num_vars:
                raise ExprSyntaxError(
                    f"variable index out of range: {value} (n = {self.num_vars})", pos, self.text
                )
            return Var(index)
        if kind == "name":
            if value not in FUNCTIONS:
                raise ExprSyntaxError(f"unknown function {value!r}", pos, self.text)
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Call(value, arg)
        if value == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = value or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", pos, self.text)


def parse_expression(text: str, num_vars: int) -> Expr:
    """Parse ``text`` into an expression tree over ``u1 .. u<num_vars>``.

    >>> parse_expression("u1^2 + 2*u1*u2", 2).evaluate([1.0, 1.0])
    3.0
    """
    return _Parser(text, num_vars).parse()


def substitute(node: Expr, replacements: Sequence[Expr]) -> Expr:
    """Replace every ``Var(i)`` by ``replacements[i - 1]``."""
    if isinstance(node, Var):
        return replacements[node.index - 1]
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.arg, replacements))
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.left, replacements), substitute(node.right, replacements))
    if isinstance(node, Pow):
        return Pow(substitute(node.base, replacements), node.exponent)
    if isinstance(node, Call):
        return Call(node.func, substitute(node.arg, replacements))
    raise TypeError(f"unknown node {node!r}")
