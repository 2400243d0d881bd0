"""Parsing and evaluation of univariate real expressions.

Source functions, exact solutions and their derivatives enter the solver as
text, e.g. ``"(e - 1/5)*exp(x^2/10)"``.  The accepted grammar is
whitespace-insensitive, identifiers are lowercase and case-sensitive::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          right-associative
    atom    := NUMBER | 'x' | 'e' | 'pi'
             | NAME '(' sum ')' | '(' sum ')'

Known functions: sin, cos, exp, sqrt, log, abs.  There is no implicit
multiplication.  ``^`` with a non-integer exponent is computed as
exp(b*log(a)) and requires a positive base.

Parsed expressions are immutable, so they can be shared and evaluated from
any number of threads.  Evaluation accepts floats or numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = ["EvalDomainError", "Expression", "ParseError", "parse"]

_CONSTANTS = {"e": math.e, "pi": math.pi}
_FUNCTIONS = ("sin", "cos", "exp", "sqrt", "log", "abs")


class ParseError(ValueError):
    """Malformed source text; ``offset`` is the byte position of the fault."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class EvalDomainError(ArithmeticError):
    """Evaluation left the real domain (x/0, log(<=0), sqrt(<0), ...)."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class _Node:
    offset: int


@dataclass(frozen=True)
class _Number(_Node):
    value: float


@dataclass(frozen=True)
class _Variable(_Node):
    pass


@dataclass(frozen=True)
class _Constant(_Node):
    name: str


@dataclass(frozen=True)
class _Negate(_Node):
    operand: _Node


@dataclass(frozen=True)
class _Binary(_Node):
    op: str
    left: _Node
    right: _Node


@dataclass(frozen=True)
class _Call(_Node):
    func: str
    arg: _Node


def _pow(a, b, offset):
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    integral = b_arr == np.floor(b_arr)
    if np.any(~integral & (a_arr <= 0.0)):
        raise EvalDomainError("non-integer power of non-positive base", offset)
    if np.any(integral & (b_arr < 0.0) & (a_arr == 0.0)):
        raise EvalDomainError("zero base with negative exponent", offset)
    shape = np.broadcast_shapes(a_arr.shape, b_arr.shape)
    base = np.broadcast_to(a_arr, shape).ravel()
    expo = np.broadcast_to(b_arr, shape).ravel()
    whole = expo == np.floor(expo)
    out = np.empty(base.shape)
    out[whole] = np.power(base[whole], expo[whole])
    out[~whole] = np.exp(expo[~whole] * np.log(base[~whole]))
    return out.reshape(shape)


def _eval(node, x):
    if isinstance(node, _Number):
        return node.value
    if isinstance(node, _Variable):
        return x
    if isinstance(node, _Constant):
        return _CONSTANTS[node.name]
    if isinstance(node, _Negate):
        return -_eval(node.operand, x)
    if isinstance(node, _Binary):
        a = _eval(node.left, x)
        b = _eval(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if np.any(np.asarray(b) == 0.0):
                raise EvalDomainError("division by zero", node.offset)
            return a / b
        return _pow(a, b, node.offset)
    a = _eval(node.arg, x)
    if node.func == "sqrt":
        if np.any(np.asarray(a) < 0.0):
            raise EvalDomainError("sqrt of negative value", node.offset)
        return np.sqrt(a)
    if node.func == "log":
        if np.any(np.asarray(a) <= 0.0):
            raise EvalDomainError("log of non-positive value", node.offset)
        return np.log(a)
    if node.func == "sin":
        return np.sin(a)
    if node.func == "cos":
        return np.cos(a)
    if node.func == "exp":
        return np.exp(a)
    return np.abs(a)


def _render(node):
    if isinstance(node, _Number):
        return repr(node.value)
    if isinstance(node, _Variable):
        return "x"
    if isinstance(node, _Constant):
        return node.name
    if isinstance(node, _Negate):
        return f"(-{_render(node.operand)})"
    if isinstance(node, _Binary):
        return f"({_render(node.left)} {node.op} {_render(node.right)})"
    return f"{node.func}({_render(node.arg)})"


@dataclass(frozen=True)
class Expression:
    """A parsed expression; call it with a float or a numpy array."""

    root: _Node

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            out = _eval(self.root, arr)
        if np.ndim(x) == 0:
            return float(out)
        out = np.asarray(out, dtype=float)
        if out.shape != arr.shape:
            out = np.broadcast_to(out, arr.shape).copy()
        return out

    def evaluate(self, x):
        return self(x)

    def to_source(self) -> str:
        """Fully parenthesised text whose re-parse evaluates identically."""
        return _render(self.root)

    def __str__(self):
        return self.to_source()


_TOKEN = re.compile(
    r"(?P<space>\s+)"
    r"|(?P<number>(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[+\-*/^()])"
)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        if m.lastgroup != "space":
            tokens.append((m.lastgroup, m.group(), m.start()))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        if tok[0] != "end":
            self.i += 1
        return tok

    def parse_sum(self):
        node = self.parse_product()
        while self.peek()[1] in ("+", "-"):
            _, op, offset = self.advance()
            node = _Binary(offset, op, node, self.parse_product())
        return node

    def parse_product(self):
        node = self.parse_unary()
        while self.peek()[1] in ("*", "/"):
            _, op, offset = self.advance()
            node = _Binary(offset, op, node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.peek()[1] == "-":
            _, _, offset = self.advance()
            return _Negate(offset, self.parse_unary())
        return self.parse_power()

    def parse_power(self):
        node = self.parse_atom()
        if self.peek()[1] == "^":
            _, _, offset = self.advance()
            node = _Binary(offset, "^", node, self.parse_unary())
        return node

    def parse_atom(self):
        kind, text, offset = self.advance()
        if kind == "number":
            return _Number(offset, float(text))
        if kind == "name":
            if text == "x":
                return _Variable(offset)
            if text in _CONSTANTS:
                return _Constant(offset, text)
            if text in _FUNCTIONS:
                _, open_text, open_offset = self.advance()
                if open_text != "(":
                    raise ParseError(f"expected '(' after {text!r}", open_offset)
                arg = self.parse_sum()
                _, close_text, close_offset = self.advance()
                if close_text != ")":
                    raise ParseError("unbalanced '('", close_offset)
                return _Call(offset, text, arg)
            raise ParseError(f"unknown identifier {text!r}", offset)
        if text == "(":
            inner = self.parse_sum()
            _, close_text, close_offset = self.advance()
            if close_text != ")":
                raise ParseError("unbalanced '('", close_offset)
            return inner
        if kind == "end":
            raise ParseError("unexpected end of input", offset)
        raise ParseError(f"unexpected {text!r}", offset)


def parse(source: str) -> Expression:
    """Parse ``source`` into an :class:`Expression`.

    Raises :class:`ParseError` with the byte offset of the first fault.
    """
    if not source or not source.strip():
        raise ParseError("empty expression", 0)
    parser = _Parser(_tokenize(source))
    root = parser.parse_sum()
    kind, text, offset = parser.peek()
    if kind != "end":
        if text == ")":
            raise ParseError("unbalanced ')'", offset)
        raise ParseError(f"unexpected {text!r}", offset)
    return Expression(root)
