"""
Parser and evaluator for the mass and potential expressions.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' integer)*
    integer := ['-'] INT | '(' ['-'] INT ')'
    atom    := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

``x`` is the coordinate, any other name is a parameter that must be bound
when the expression is expanded or evaluated.  Functions: exp, sqrt, sin,
cos.  Exponents are integers; use ``sqrt`` for half powers.
"""

import math
import re
from dataclasses import dataclass

import mpmath
import numpy as np

from . import series as ts
from .exceptions import (ExprEvalError, ExprSyntaxError, SingularAtOriginError,
                         UnboundParameterError)

FUNCTIONS = ("exp", "sqrt", "sin", "cos")
VARIABLE = "x"


class Expr:
    """Base node of the expression tree."""

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float
    text: str = ""

    def __eq__(self, other):
        return isinstance(other, Num) and self.value == other.value

    def __hash__(self):
        return hash(self.value)


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Param(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


def Add(a, b):
    return BinOp("+", a, b)


def Sub(a, b):
    return BinOp("-", a, b)


def Mul(a, b):
    return BinOp("*", a, b)


def Div(a, b):
    return BinOp("/", a, b)


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^()])
""", re.VERBOSE)


def _tokenize(text):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if value == "**":
                value = "^"
            tokens.append((kind, value, pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value):
        kind, v, pos = self.tok
        if v != value or kind == "end":
            what = "end of input" if kind == "end" else repr(v)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", pos)
        self.i += 1

    def parse(self):
        node = self.expr()
        kind, v, pos = self.tok
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {v!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok == ("op", "-", self.tok[2]):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        while self.tok[0] == "op" and self.tok[1] == "^":
            self.take()
            node = Pow(node, self.integer())
        return node

    def integer(self):
        paren = self.tok[:2] == ("op", "(")
        if paren:
            self.take()
        sign = 1
        if self.tok[:2] == ("op", "-"):
            self.take()
            sign = -1
        kind, v, pos = self.tok
        if kind != "num":
            raise ExprSyntaxError("exponent must be an integer literal", pos)
        if not re.fullmatch(r"\d+", v):
            raise ExprSyntaxError(f"non-integer exponent {v!r}", pos)
        self.take()
        if paren:
            self.expect(")")
        return sign * int(v)

    def atom(self):
        kind, v, pos = self.tok
        if kind == "num":
            self.take()
            return Num(float(v), v)
        if kind == "name":
            self.take()
            if self.tok[:2] == ("op", "("):
                if v not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {v!r}", pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(v, arg)
            if v in FUNCTIONS:
                raise ExprSyntaxError(f"function {v!r} needs an argument", pos)
            return Var() if v == VARIABLE else Param(v)
        if (kind, v) == ("op", "("):
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(v)
        raise ExprSyntaxError(f"expected an operand, found {what}", pos)


def parse(text):
    """Parse ``text`` into an :class:`Expr` tree.

    >>> parse("1 + gamma*x^2")
    BinOp(op='+', left=Num(value=1.0, text='1'), right=BinOp(op='*', left=Param(name='gamma'), right=Pow(base=Var(), exponent=2)))
    """
    if isinstance(text, Expr):
        return text
    return _Parser(str(text)).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_text(e):
    """Canonical text form; ``parse(to_text(e)) == e``."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return VARIABLE
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        if isinstance(e.operand, BinOp):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = to_text(e.base)
        if isinstance(e.base, (BinOp, Neg, Pow)):
            base = f"({base})"
        exp_ = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return f"{base}^{exp_}"
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, BinOp):
        left = to_text(e.left)
        right = to_text(e.right)
        p = _PREC[e.op]
        if isinstance(e.left, BinOp) and _PREC[e.left.op] < p:
            left = f"({left})"
        # left associativity: a right operand of equal precedence needs parens
        if isinstance(e.right, BinOp) and _PREC[e.right.op] <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression node: {e!r}")


def parameters(e):
    """Names of all parameters in ``e``."""
    if isinstance(e, Param):
        return {e.name}
    if isinstance(e, (Neg,)):
        return parameters(e.operand)
    if isinstance(e, Pow):
        return parameters(e.base)
    if isinstance(e, Call):
        return parameters(e.arg)
    if isinstance(e, BinOp):
        return parameters(e.left) | parameters(e.right)
    return set()


def _lookup(name, bindings):
    try:
        return bindings[name]
    except (KeyError, TypeError):
        raise UnboundParameterError(f"parameter {name!r} is not bound") from None


def to_series(e, bindings, capacity, extended=False):
    """Taylor expansion of ``e`` about ``x = 0`` with ``capacity + 1`` terms.

    With ``extended=True`` the coefficients are :class:`mpmath.mpf` values
    and decimal literals are read from their source text.
    """
    e = parse(e)
    bindings = bindings or {}

    def scalar(v, text=""):
        if extended:
            # floats are read as the decimal the user typed
            return mpmath.mpf(text or repr(float(v)))
        return float(v)

    def go(node):
        if isinstance(node, Num):
            return ts.constant(scalar(node.value, node.text), capacity, extended)
        if isinstance(node, Var):
            return ts.variable(capacity, extended)
        if isinstance(node, Param):
            v = _lookup(node.name, bindings)
            return ts.constant(scalar(v, v if isinstance(v, str) else ""), capacity, extended)
        if isinstance(node, Neg):
            return ts.neg(go(node.operand))
        if isinstance(node, Pow):
            return ts.power(go(node.base), node.exponent)
        if isinstance(node, Call):
            arg = go(node.arg)
            return getattr(ts, node.func)(arg)
        if isinstance(node, BinOp):
            a, b = go(node.left), go(node.right)
            if node.op == "+":
                return ts.add(a, b)
            if node.op == "-":
                return ts.add(a, ts.neg(b))
            if node.op == "*":
                return ts.mul(a, b)
            if ts.eval_at_origin(b) == 0:
                raise SingularAtOriginError(f"division by {to_text(node.right)} which vanishes at x=0")
            return ts.mul(a, ts.reciprocal(b))
        raise TypeError(f"not an expression node: {node!r}")

    return go(e)


def evaluate(e, x, bindings=None):
    """Pointwise value of ``e`` at ``x`` (float or numpy array)."""
    e = parse(e)
    bindings = bindings or {}
    scalar_input = np.ndim(x) == 0
    x = np.asarray(x, dtype=np.float64)

    def go(node):
        if isinstance(node, Num):
            return np.full_like(x, node.value)
        if isinstance(node, Var):
            return x
        if isinstance(node, Param):
            return np.full_like(x, float(_lookup(node.name, bindings)))
        if isinstance(node, Neg):
            return -go(node.operand)
        if isinstance(node, Pow):
            base = go(node.base)
            if node.exponent < 0 and np.any(base == 0):
                raise ExprEvalError("division by zero in negative power")
            return base ** float(node.exponent)
        if isinstance(node, Call):
            arg = go(node.arg)
            if node.func == "sqrt":
                if np.any(arg < 0):
                    raise ExprEvalError("sqrt of a negative number")
                return np.sqrt(arg)
            return getattr(np, node.func)(arg)
        if isinstance(node, BinOp):
            a, b = go(node.left), go(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if np.any(b == 0):
                raise ExprEvalError("division by zero")
            return a / b
        raise TypeError(f"not an expression node: {node!r}")

    with np.errstate(over="ignore"):
        out = go(e)
    if scalar_input:
        return float(out)
    return out


def is_finite_number(v):
    try:
        return math.isfinite(float(v))
    except (TypeError, ValueError):
        return False
