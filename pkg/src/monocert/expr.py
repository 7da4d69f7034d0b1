"""Small expression DSL for user-defined vector fields.

Grammar (standard precedence, ^ right-associative and tighter than unary
minus):

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ["^" exponent]
    exponent := "-" exponent | power
    atom   := NUMBER | VAR | FUNC "(" expr ("," expr)* ")" | "(" expr ")"

Variables are x1..xn.  Functions: neg/exp/log/abs/sqrt/sin/cos (unary) and
min/max (binary).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExprEvalError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # zero-based


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "ExprAst"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "ExprAst"
    right: "ExprAst"


ExprAst = Union[Const, Var, Unary, Binary]

UNARY_FUNCS = ("neg", "exp", "log", "abs", "sqrt", "sin", "cos")
BINARY_FUNCS = ("min", "max")

_TOKEN = re.compile(r"""
    (?P<num>\d+(\.\d*)?([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
  | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, tokens, dim: int):
        self.tokens = tokens
        self.i = 0
        self.dim = dim

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, pos = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}, found {text or 'end of input'!r}", pos)
        return self.advance()

    def parse(self) -> ExprAst:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing token {text!r}", pos)
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = Binary(text, node, self.term())
            else:
                return node

    def term(self) -> ExprAst:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = Binary(text, node, self.unary())
            else:
                return node

    def unary(self) -> ExprAst:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> ExprAst:
        node = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            node = Binary("^", node, self.exponent())
        return node

    def exponent(self) -> ExprAst:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Unary("neg", self.exponent())
        return self.power()

    def atom(self) -> ExprAst:
        kind, text, pos = self.advance()
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            if re.fullmatch(r"x\d+", text):
                idx = int(text[1:])
                if not 1 <= idx <= self.dim:
                    raise ExprSyntaxError(
                        f"variable {text!r} out of range for dimension {self.dim}", pos)
                return Var(idx - 1)
            if text in UNARY_FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Unary(text, arg)
            if text in BINARY_FUNCS:
                self.expect_op("(")
                left = self.expr()
                self.expect_op(",")
                right = self.expr()
                self.expect_op(")")
                return Binary(text, left, right)
            raise ExprSyntaxError(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"expected value, found {text or 'end of input'!r}", pos)


def parse_expr(source: str, dim: int) -> ExprAst:
    if not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    if dim < 1:
        raise ValueError("dimension must be positive")
    return _Parser(_tokenize(source), dim).parse()


def eval_expr(ast: ExprAst, point) -> np.ndarray:
    """Evaluate on a point (n,) or a batch (..., n); returns shape (...)."""
    pts = np.asarray(point, float)
    out = _eval(ast, pts)
    return np.broadcast_to(np.asarray(out, float), pts.shape[:-1]).copy()


def _eval(ast, pts):
    if isinstance(ast, Const):
        return ast.value
    if isinstance(ast, Var):
        return pts[..., ast.index]
    if isinstance(ast, Unary):
        a = _eval(ast.arg, pts)
        if ast.op == "neg":
            return -np.asarray(a, float)
        if ast.op == "exp":
            return np.exp(a)
        if ast.op == "log":
            if np.any(np.asarray(a) <= 0):
                raise ExprEvalError("log of non-positive value")
            return np.log(a)
        if ast.op == "abs":
            return np.abs(a)
        if ast.op == "sqrt":
            if np.any(np.asarray(a) < 0):
                raise ExprEvalError("sqrt of negative value")
            return np.sqrt(a)
        if ast.op == "sin":
            return np.sin(a)
        if ast.op == "cos":
            return np.cos(a)
        raise ValueError(f"unknown unary op {ast.op!r}")
    if isinstance(ast, Binary):
        a = _eval(ast.left, pts)
        b = _eval(ast.right, pts)
        if ast.op == "+":
            return np.add(a, b)
        if ast.op == "-":
            return np.subtract(a, b)
        if ast.op == "*":
            return np.multiply(a, b)
        if ast.op == "/":
            if np.any(np.asarray(b) == 0):
                raise ExprEvalError("division by zero")
            return np.divide(a, b)
        if ast.op == "min":
            return np.minimum(a, b)
        if ast.op == "max":
            return np.maximum(a, b)
        if ast.op == "^":
            a_arr = np.asarray(a, float)
            b_arr = np.asarray(b, float)
            neg_base, frac_exp = np.broadcast_arrays(
                a_arr < 0, b_arr != np.round(b_arr))
            if np.any(neg_base & frac_exp):
                raise ExprEvalError("negative base with non-integer exponent")
            if np.any((a_arr == 0) & (b_arr < 0)):
                raise ExprEvalError("zero base with negative exponent")
            return np.power(a_arr, b_arr)
        raise ValueError(f"unknown binary op {ast.op!r}")
    raise TypeError(f"not an expression node: {ast!r}")


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def print_expr(ast: ExprAst) -> str:
    """Render source that reparses to a structurally identical tree."""
    return _print(ast, 0)


def _print(ast, parent_prec: int) -> str:
    if isinstance(ast, Const):
        return repr(ast.value)
    if isinstance(ast, Var):
        return f"x{ast.index + 1}"
    if isinstance(ast, Unary):
        if ast.op == "neg":
            text = "-" + _print(ast.arg, _PREC["neg"])
            return f"({text})" if parent_prec > _PREC["neg"] else text
        return f"{ast.op}({_print(ast.arg, 0)})"
    if isinstance(ast, Binary):
        if ast.op in ("min", "max"):
            return f"{ast.op}({_print(ast.left, 0)}, {_print(ast.right, 0)})"
        prec = _PREC[ast.op]
        if ast.op == "^":
            # right-associative; exponent may be a unary chain
            text = _print(ast.left, prec + 1) + "^" + _print(ast.right, prec)
        else:
            text = _print(ast.left, prec) + ast.op + _print(ast.right, prec + 1)
        return f"({text})" if parent_prec > prec else text
    raise TypeError(f"not an expression node: {ast!r}")
