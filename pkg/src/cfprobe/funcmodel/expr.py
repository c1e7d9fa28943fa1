"""A tiny expression language in one variable ``t``.

Grammar (EBNF)::

    expr        = signed_term , { ("+" | "-") , term } ;
    signed_term = ("-" | "+") , signed_term | term ;
    term        = factor , { ("*" | "/") , factor } ;
    factor      = "-" , factor | power ;
    power       = atom , [ "^" , integer ] ;
    integer     = [ "-" | "+" ] , digits | "(" , [ "-" | "+" ] , digits , ")" ;
    atom        = number | "t" | "pi" | func , "(" , expr , ")" | "(" , expr , ")" ;
    func        = "exp" | "cos" | "sin" | "abs" ;

A leading minus binds looser than ``*`` and ``/`` so that ``-t^2/2``
reads as ``-(t^2/2)``.  Exponents must be integers; that keeps
:func:`differentiate` total.
"""

from __future__ import annotations

import math
import re
from typing import Iterator

import numpy as np

UNARY_FUNCS = ("exp", "cos", "sin", "abs")
_ARITY = {
    "const": 0, "var": 0,
    "add": 2, "sub": 2, "mul": 2, "div": 2,
    "pow": 1, "neg": 1, "exp": 1, "cos": 1, "sin": 1, "abs": 1,
}


class ExprError(ValueError):
    """Malformed expression text or an unsupported operation on a tree."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class NotDifferentiable(ExprError):
    pass


class Node:
    """Immutable expression tree node.

    ``op`` is one of ``const, var, add, sub, mul, div, pow, neg, exp, cos,
    sin, abs``.  ``value`` holds the float of a ``const`` and the integer
    exponent of a ``pow``.  Hashes are computed once, so trees can key
    evaluation caches cheaply.
    """

    __slots__ = ("op", "args", "value", "_hash")

    def __init__(self, op: str, args: tuple["Node", ...] = (), value=None):
        if op not in _ARITY:
            raise ExprError(f"unknown node tag {op!r}")
        if len(args) != _ARITY[op]:
            raise ExprError(f"{op} takes {_ARITY[op]} children, got {len(args)}")
        if op == "const":
            value = float(value)
        elif op == "pow":
            if isinstance(value, bool) or int(value) != value:
                raise ExprError("exponent must be an integer")
            value = int(value)
        else:
            value = None
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "_hash", hash((op, self.args, value)))

    def __setattr__(self, name, value):
        raise AttributeError("Node is immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Node) or self._hash != other._hash:
            return False
        return self.op == other.op and self.value == other.value and self.args == other.args

    def __repr__(self):
        if self.op == "const":
            return f"Const({self.value!r})"
        if self.op == "var":
            return "Var"
        if self.op == "pow":
            return f"Pow({self.args[0]!r}, {self.value})"
        inner = ", ".join(repr(a) for a in self.args)
        return f"{self.op.capitalize()}({inner})"

    def __str__(self):
        return to_text(self)

    def walk(self) -> Iterator["Node"]:
        """Distinct subtrees, each once (derivative trees share structure)."""
        seen = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            yield node
            stack.extend(node.args)

    def size(self) -> int:
        return sum(1 for _ in self.walk())


# constructors ---------------------------------------------------------------

VAR = Node("var")


def Const(c: float) -> Node:
    return Node("const", value=c)


def Pow(base: Node, n: int) -> Node:
    return Node("pow", (base,), n)


def _bin(op):
    return lambda a, b: Node(op, (a, b))


def _un(op):
    return lambda a: Node(op, (a,))


Add, Sub, Mul, Div = _bin("add"), _bin("sub"), _bin("mul"), _bin("div")
Neg, Exp, Cos, Sin, Abs = _un("neg"), _un("exp"), _un("cos"), _un("sin"), _un("abs")


# printing -------------------------------------------------------------------

_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def to_text(node: Node) -> str:
    """Fully parenthesised text that parses back to an equal tree."""
    op = node.op
    if op == "const":
        if not math.isfinite(node.value):
            raise ExprError("cannot print a non-finite constant")
        text = repr(node.value)
        return f"(0 - {text[1:]})" if node.value < 0 or text.startswith("-") else text
    if op == "var":
        return "t"
    if op in _SYMBOL:
        a, b = node.args
        return f"({to_text(a)} {_SYMBOL[op]} {to_text(b)})"
    if op == "neg":
        return f"(-{to_text(node.args[0])})"
    if op == "pow":
        return f"({to_text(node.args[0])})^{node.value}"
    return f"{op}({to_text(node.args[0])})"


# parsing --------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
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
        kind, val, pos = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprError(f"expected {value!r}, found {found}", pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected token {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.signed_term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def signed_term(self) -> Node:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.signed_term())
        if kind == "op" and val == "+":
            self.take()
            return self.signed_term()
        return self.term()

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self) -> Node:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return Pow(base, self.integer())
        return base

    def integer(self) -> int:
        paren = False
        if self.peek()[1] == "(" and self.peek()[0] == "op":
            self.take()
            paren = True
        sign = 1
        if self.peek()[0] == "op" and self.peek()[1] in ("-", "+"):
            sign = -1 if self.take()[1] == "-" else 1
        kind, val, pos = self.take()
        if kind != "num":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprError(f"exponent must be an integer literal, found {found}", pos)
        number = float(val)
        if not number.is_integer() or not re.fullmatch(r"\d+", val):
            raise ExprError(f"non-integer exponent {val!r}", pos)
        if paren:
            self.expect(")")
        return sign * int(val)

    def atom(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "name":
            if val == "t":
                return VAR
            if val == "pi":
                return Const(math.pi)
            if val in UNARY_FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Node(val, (arg,))
            raise ExprError(f"unknown name {val!r}", pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExprError(f"unexpected {found}", pos)


def parse_expression(text: str) -> Node:
    """Parse DSL text into a :class:`Node` tree.

    >>> parse_expression("cos(2*t)")
    Cos(Mul(Const(2.0), Var))
    """
    return _Parser(text).parse()


# evaluation -----------------------------------------------------------------

_NUMPY = {"exp": np.exp, "cos": np.cos, "sin": np.sin, "abs": np.abs, "neg": np.negative}


def evaluate_tree(node: Node, t, cache: dict | None = None):
    """Evaluate ``node`` at ``t`` (scalar or ndarray), sharing equal subtrees."""
    t = np.asarray(t, dtype=float)
    if cache is None:
        cache = {}
    return _eval(node, t, cache)


def _eval(node: Node, t, cache):
    hit = cache.get(node)
    if hit is not None:
        return hit
    op = node.op
    if op == "const":
        out = np.full(t.shape, node.value)
    elif op == "var":
        out = t
    elif op in _NUMPY:
        out = _NUMPY[op](_eval(node.args[0], t, cache))
    elif op == "pow":
        base = _eval(node.args[0], t, cache)
        n = node.value
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = base**n if n >= 0 else 1.0 / base ** (-n)
    else:
        a = _eval(node.args[0], t, cache)
        b = _eval(node.args[1], t, cache)
        if op == "add":
            out = a + b
        elif op == "sub":
            out = a - b
        elif op == "mul":
            out = a * b
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = a / b
    cache[node] = out
    return out


# differentiation ------------------------------------------------------------

ZERO, ONE = Const(0.0), Const(1.0)


def _is_const(n: Node, c: float | None = None) -> bool:
    return n.op == "const" and (c is None or n.value == c)


def s_add(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if b.op == "neg":
        return s_sub(a, b.args[0])
    return Add(a, b)


def s_sub(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return s_neg(b)
    if b.op == "neg":
        return s_add(a, b.args[0])
    return Sub(a, b)


def s_neg(a: Node) -> Node:
    if _is_const(a):
        return Const(-a.value)
    if a.op == "neg":
        return a.args[0]
    return Neg(a)


def s_mul(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(b):
        a, b = b, a
    if _is_const(a):
        if a.value == 0.0:
            return ZERO
        if a.value == 1.0:
            return b
        if a.value == -1.0:
            return s_neg(b)
        if b.op == "mul" and _is_const(b.args[0]):
            return s_mul(Const(a.value * b.args[0].value), b.args[1])
        if b.op == "neg":
            return s_mul(Const(-a.value), b.args[0])
    if a.op == "neg":
        return s_neg(s_mul(a.args[0], b))
    if b.op == "neg":
        return s_neg(s_mul(a, b.args[0]))
    return Mul(a, b)


def s_div(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b):
        if b.value == 1.0:
            return a
        return s_mul(Const(1.0 / b.value), a)
    return Div(a, b)


def s_pow(a: Node, n: int) -> Node:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_const(a):
        return Const(a.value**n)
    if a.op == "pow":
        return s_pow(a.args[0], a.value * n)
    return Pow(a, n)


def _d(node: Node, memo: dict) -> Node:
    hit = memo.get(node)
    if hit is not None:
        return hit
    op = node.op
    if op == "const":
        out = ZERO
    elif op == "var":
        out = ONE
    elif op == "add":
        out = s_add(_d(node.args[0], memo), _d(node.args[1], memo))
    elif op == "sub":
        out = s_sub(_d(node.args[0], memo), _d(node.args[1], memo))
    elif op == "neg":
        out = s_neg(_d(node.args[0], memo))
    elif op == "mul":
        a, b = node.args
        out = s_add(s_mul(_d(a, memo), b), s_mul(a, _d(b, memo)))
    elif op == "div":
        a, b = node.args
        da, db = _d(a, memo), _d(b, memo)
        if _is_const(db, 0.0):
            out = s_div(da, b)
        else:
            out = s_sub(s_div(da, b), s_div(s_mul(a, db), s_pow(b, 2)))
    elif op == "pow":
        (a,) = node.args
        n = node.value
        out = s_mul(s_mul(Const(n), s_pow(a, n - 1)), _d(a, memo))
    elif op == "exp":
        out = s_mul(node, _d(node.args[0], memo))
    elif op == "cos":
        out = s_neg(s_mul(Sin(node.args[0]), _d(node.args[0], memo)))
    elif op == "sin":
        out = s_mul(Cos(node.args[0]), _d(node.args[0], memo))
    else:
        raise NotDifferentiable("abs() is not differentiable at 0")
    memo[node] = out
    return out


def differentiate(node: Node, order: int = 1) -> Node:
    """Exact symbolic derivative of the given order.

    Raises :class:`NotDifferentiable` if the tree contains ``abs`` anywhere
    (checked up front, even where the derivative would not touch it).
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if order > 0 and any(n.op == "abs" for n in node.walk()):
        raise NotDifferentiable("abs() is not differentiable at 0")
    memo: dict = {}
    for _ in range(order):
        node = _d(node, memo)
    return node


# Taylor-mode derivatives ----------------------------------------------------
#
# High-order symbolic derivatives swell combinatorially (the 11th derivative
# of exp(-t^2/2) is a DAG of ~3.6e5 nodes), so numerical derivative values
# are propagated as truncated Taylor coefficient arrays instead.  Shape of a
# jet: (order + 1,) + t.shape, with jet[k] = f^(k)(t) / k!.


def _jmul(a, b):
    n = a.shape[0]
    out = np.zeros_like(a)
    for k in range(n):
        out[k] = np.einsum("i...,i...->...", a[: k + 1], b[k::-1])
    return out


def _jdiv(a, b):
    n = a.shape[0]
    out = np.zeros_like(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(n):
            acc = a[k] - np.einsum("i...,i...->...", b[1 : k + 1], out[k - 1 :: -1][:k]) if k else a[0]
            out[k] = acc / b[0]
    return out


def _jexp(a):
    n = a.shape[0]
    out = np.zeros_like(a)
    with np.errstate(over="ignore"):
        out[0] = np.exp(a[0])
    for k in range(1, n):
        i = np.arange(1, k + 1).reshape((-1,) + (1,) * (a.ndim - 1))
        out[k] = np.sum(i * a[1 : k + 1] * out[k - 1 :: -1][:k], axis=0) / k
    return out


def _jsincos(a):
    n = a.shape[0]
    s = np.zeros_like(a)
    c = np.zeros_like(a)
    s[0], c[0] = np.sin(a[0]), np.cos(a[0])
    for k in range(1, n):
        i = np.arange(1, k + 1).reshape((-1,) + (1,) * (a.ndim - 1))
        s[k] = np.sum(i * a[1 : k + 1] * c[k - 1 :: -1][:k], axis=0) / k
        c[k] = -np.sum(i * a[1 : k + 1] * s[k - 1 :: -1][:k], axis=0) / k
    return s, c


def _jpow(a, n: int):
    if n < 0:
        one = np.zeros_like(a)
        one[0] = 1.0
        return _jdiv(one, _jpow(a, -n))
    result = np.zeros_like(a)
    result[0] = 1.0
    base = a
    while n:
        if n & 1:
            result = _jmul(result, base)
        n >>= 1
        if n:
            base = _jmul(base, base)
    return result


def _jet(node: Node, t, order: int, cache):
    hit = cache.get(node)
    if hit is not None:
        return hit
    op = node.op
    if op == "const":
        out = np.zeros((order + 1,) + t.shape)
        out[0] = node.value
    elif op == "var":
        out = np.zeros((order + 1,) + t.shape)
        out[0] = t
        if order:
            out[1] = 1.0
    elif op == "add":
        out = _jet(node.args[0], t, order, cache) + _jet(node.args[1], t, order, cache)
    elif op == "sub":
        out = _jet(node.args[0], t, order, cache) - _jet(node.args[1], t, order, cache)
    elif op == "neg":
        out = -_jet(node.args[0], t, order, cache)
    elif op == "mul":
        out = _jmul(_jet(node.args[0], t, order, cache), _jet(node.args[1], t, order, cache))
    elif op == "div":
        out = _jdiv(_jet(node.args[0], t, order, cache), _jet(node.args[1], t, order, cache))
    elif op == "pow":
        out = _jpow(_jet(node.args[0], t, order, cache), node.value)
    elif op == "exp":
        out = _jexp(_jet(node.args[0], t, order, cache))
    elif op in ("sin", "cos"):
        s, c = _jsincos(_jet(node.args[0], t, order, cache))
        out = s if op == "sin" else c
    else:
        if order:
            raise NotDifferentiable("abs() is not differentiable at 0")
        out = np.abs(_jet(node.args[0], t, order, cache))
    cache[node] = out
    return out


def derivatives(node: Node, t, order: int) -> np.ndarray:
    """``f^(k)(t)`` for ``k = 0..order``, shape ``(order + 1,) + shape(t)``."""
    if order > 0 and any(n.op == "abs" for n in node.walk()):
        raise NotDifferentiable("abs() is not differentiable at 0")
    t = np.asarray(t, dtype=float)
    jet = _jet(node, t, order, {})
    fact = np.array([math.factorial(k) for k in range(order + 1)], dtype=float)
    return jet * fact.reshape((-1,) + (1,) * t.ndim)
