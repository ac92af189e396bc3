"""Impedance profile expressions.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := number | 't' | ('sin' | 'cos') '(' expr ')' | '(' expr ')' | '-' factor
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "ExpressionSyntaxError",
    "NonPositiveProfileError",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "parse_expression",
    "parse_profile",
    "ImpedanceProfile",
]

POSITIVITY_SAMPLES = 4096


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class NonPositiveProfileError(ValueError):
    def __init__(self, t: float, value: float):
        super().__init__(f"impedance profile is not positive: lambda({t:.6g}) = {value:.6g}")
        self.t = t
        self.value = value


@dataclass(frozen=True)
class Num:
    value: float

    def eval(self, t):
        return np.full_like(t, self.value, dtype=float)

    def __str__(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Var:
    def eval(self, t):
        return np.asarray(t, dtype=float)

    def __str__(self):
        return "t"


@dataclass(frozen=True)
class Neg:
    arg: "Node"

    def eval(self, t):
        return -self.arg.eval(t)

    def __str__(self):
        return f"-({self.arg})"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"

    def eval(self, t):
        a, b = self.left.eval(t), self.right.eval(t)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        return a * b

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"

    def eval(self, t):
        return (np.sin if self.func == "sin" else np.cos)(self.arg.eval(t))

    def __str__(self):
        return f"{self.func}({self.arg})"


Node = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]+)|(.))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else pos
        if m.group(1):
            tokens.append(("num", m.group(1), start))
        elif m.group(2):
            tokens.append(("name", m.group(2), start))
        elif m.group(3):
            tokens.append(("op", m.group(3), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value:
            raise ExpressionSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", off)

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            node = BinOp("*", node, self.factor())
        return node

    def factor(self) -> Node:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "t":
                return Var()
            if val in ("sin", "cos"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            raise ExpressionSyntaxError(f"unknown name {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "op" and val == "-":
            return Neg(self.factor())
        raise ExpressionSyntaxError(f"unexpected {val or 'end of input'!r}", off)


def parse_expression(text: str) -> Node:
    """Parse ``text`` into an AST without any positivity check."""
    parser = _Parser(text)
    node = parser.expr()
    kind, val, off = parser.peek()
    if kind != "end":
        raise ExpressionSyntaxError(f"trailing input {val!r}", off)
    return node


def parse_profile(text: str) -> Node:
    """Parse and check that the expression is positive on [-pi, pi)."""
    node = parse_expression(text)
    t = -np.pi + 2 * np.pi * np.arange(POSITIVITY_SAMPLES) / POSITIVITY_SAMPLES
    vals = node.eval(t)
    bad = np.flatnonzero(~(np.isfinite(vals) & (vals > 0)))
    if bad.size:
        j = bad[np.argmin(vals[bad])] if np.all(np.isfinite(vals[bad])) else bad[0]
        raise NonPositiveProfileError(float(t[j]), float(vals[j]))
    return node


class ImpedanceProfile:
    """Positive impedance coefficient lambda(t) over the curve parameter."""

    def __init__(self, source: Union[str, float, int]):
        if isinstance(source, (int, float)):
            if not source > 0:
                raise NonPositiveProfileError(0.0, float(source))
            self.text = repr(float(source))
            self.node: Node = Num(float(source))
        else:
            self.text = str(source).strip()
            self.node = parse_profile(self.text)

    @property
    def is_constant(self) -> bool:
        return isinstance(self.node, Num)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.node.eval(t)
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        return f"ImpedanceProfile({self.text!r})"

    def __eq__(self, other):
        return isinstance(other, ImpedanceProfile) and self.text == other.text

    def __hash__(self):
        return hash(self.text)
