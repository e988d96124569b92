"""Tiny expression language for defining elements on the command line.

Grammar (Pratt parser):

    expr    := term (('+', '-') term)*
    term    := factor (('*', '/') factor)*
    factor  := '-' factor | power              # ^ binds tighter than unary -
    power   := atom ('^' integer)?             # integer exponent only
    atom    := number | 'i' | 'pi' | 'e' | variable
             | func '(' expr ')' | '(' expr ')' | '|' expr '|'

Variables: z (chart), x, y (real/imaginary part of the chart), theta
(circle angle / planar argument). Functions: abs, conj, exp, log, re, im,
cos, sin. Numbers are decimal literals. Syntax errors carry the byte
offset of the offending token.
"""

import re as _re

import numpy as np

from .errors import ExprSyntaxError

_TOKEN = _re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[()+\-*/^|,]))")

_FUNCS = {
    "abs": np.abs,
    "conj": np.conj,
    "exp": np.exp,
    "log": np.log,
    "re": np.real,
    "im": np.imag,
    "cos": np.cos,
    "sin": np.sin,
}

_CONSTS = {"i": 1j, "pi": np.pi, "e": np.e}


class _Tok:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos


def _lex(src):
    out = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            at = len(src) - len(stripped)
            raise ExprSyntaxError(at, "a token")
        num, name, op = m.groups()
        start = m.start(1) if num else m.start(2) if name else m.start(3)
        if num:
            out.append(_Tok("num", num, start))
        elif name:
            out.append(_Tok("name", name, start))
        else:
            out.append(_Tok("op", "^" if op == "**" else op, start))
        pos = m.end()
    out.append(_Tok("end", "", len(src)))
    return out


# ------------------------------------------------------------------- AST

class Node:
    pass


class Num(Node):
    def __init__(self, value):
        self.value = value


class Const(Node):
    def __init__(self, name):
        self.name = name


class Var(Node):
    def __init__(self, name):
        self.name = name


class Call(Node):
    def __init__(self, func, arg):
        self.func = func
        self.arg = arg


class Neg(Node):
    def __init__(self, arg):
        self.arg = arg


class BinOp(Node):
    def __init__(self, op, left, right):
        self.op = op
        self.left = left
        self.right = right


class Pow(Node):
    def __init__(self, base, exponent):
        self.base = base
        self.exponent = exponent


class _Parser:
    def __init__(self, src):
        self.src = src
        self.toks = _lex(src)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect_op(self, text):
        t = self.take()
        if t.kind != "op" or t.text != text:
            raise ExprSyntaxError(t.pos, repr(text))
        return t

    def parse(self):
        node = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ExprSyntaxError(t.pos, "end of input")
        return node

    def expr(self):
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        # unary minus binds looser than ^: -2^2 == -(2^2)
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            neg = False
            if self.peek().kind == "op" and self.peek().text == "-":
                self.take()
                neg = True
            t = self.take()
            if t.kind != "num" or "." in t.text:
                raise ExprSyntaxError(t.pos, "an integer exponent")
            node = Pow(node, -int(t.text) if neg else int(t.text))
        return node

    def atom(self):
        t = self.take()
        if t.kind == "num":
            return Num(float(t.text))
        if t.kind == "name":
            if t.text in _CONSTS:
                return Const(t.text)
            if t.text in _FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(t.text, arg)
            if t.text in ("z", "x", "y", "theta"):
                return Var(t.text)
            raise ExprSyntaxError(t.pos, "a variable, constant, or function")
        if t.kind == "op" and t.text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if t.kind == "op" and t.text == "|":
            node = self.expr()
            self.expect_op("|")
            return Call("abs", node)
        raise ExprSyntaxError(t.pos, "an expression")


def parse(src):
    return _Parser(src).parse()


# -------------------------------------------------------------- evaluate

def _chart(owner):
    from .algebra import CIRCLE, GRID

    pts = owner.points()
    if owner.kind == CIRCLE:
        theta = pts
        z = np.exp(1j * theta)
    elif owner.kind == GRID:
        z = pts.astype(complex)
        theta = np.angle(z)
    else:
        z = pts.astype(complex)
        theta = np.angle(z)
    return {"z": z, "x": z.real, "y": z.imag, "theta": theta}


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return _CONSTS[node.name]
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.arg, env)
    if isinstance(node, Call):
        return _FUNCS[node.func](_eval(node.arg, env))
    if isinstance(node, Pow):
        return _eval(node.base, env) ** node.exponent
    a = _eval(node.left, env)
    b = _eval(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    return a / b


def evaluate(src_or_node, owner):
    """Evaluate an expression to an element of ``owner``."""
    node = parse(src_or_node) if isinstance(src_or_node, str) else src_or_node
    env = _chart(owner)
    vals = np.asarray(_eval(node, env))
    if vals.shape == ():
        vals = np.full(owner.npoints, vals)
    if owner.field == "R":
        if np.max(np.abs(vals.imag)) > 1e-12 * (1.0 + np.max(np.abs(vals))):
            raise ValueError("expression is not real-valued on this instance")
        vals = vals.real
    return owner.element(vals)


# --------------------------------------------------------------- printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_num(v):
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def pretty(node, parent_prec=0):
    """Render an AST back to source; parse(pretty(t)) is structurally t."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({pretty(node.arg)})"
    if isinstance(node, Neg):
        inner = pretty(node.arg, 3)
        return f"-{inner}"
    if isinstance(node, Pow):
        base = pretty(node.base, 4)
        if not isinstance(node.base, (Num, Const, Var, Call)):
            base = f"({pretty(node.base)})"
        e = node.exponent
        return f"{base}^{e}" if e >= 0 else f"{base}^-{-e}"
    p = _PREC[node.op]
    left = pretty(node.left, p)
    right = pretty(node.right, p + 1)
    s = f"{left} {node.op} {right}"
    if p < parent_prec:
        return f"({s})"
    return s


def structurally_equal(a, b):
    if type(a) is not type(b):
        return False
    if isinstance(a, Num):
        return a.value == b.value
    if isinstance(a, (Const, Var)):
        return a.name == b.name
    if isinstance(a, Call):
        return a.func == b.func and structurally_equal(a.arg, b.arg)
    if isinstance(a, Neg):
        return structurally_equal(a.arg, b.arg)
    if isinstance(a, Pow):
        return a.exponent == b.exponent and structurally_equal(a.base, b.base)
    return (a.op == b.op and structurally_equal(a.left, b.left)
            and structurally_equal(a.right, b.right))
