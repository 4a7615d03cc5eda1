"""
Scalar expressions over variables ``x1 .. xn``.

Grammar, loosest binding first::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          # right associative
    primary := NUMBER | 'x' DIGITS | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := exp | log | sin | cos | sqrt | abs

``-x1^2`` therefore parses as ``-(x1^2)`` and ``2^-x1`` is accepted.
Evaluation uses float64 arithmetic; division by zero, ``log`` of a
nonpositive number and overflow produce ``inf``/``nan`` instead of raising.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Const", "Var", "BinOp", "Func", "Expr", "ParseFailure",
    "parse", "evaluate", "gradient", "to_string", "variables", "compile_expr",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt", "abs")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Func:
    name: str  # one of FUNCTIONS or "neg"
    arg: "Expr"


Expr = Union[Const, Var, BinOp, Func]


class ParseFailure(ValueError):
    """Raised when text is not a valid expression.

    ``position`` is the 1-based character position at which parsing failed;
    it equals ``len(text) + 1`` when the input ended too early.
    """

    def __init__(self, offset: int, message: str):
        self.position = offset + 1
        self.message = message
        super().__init__(f"{message} (at position {self.position})")


_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)
_VAR_RE = re.compile(r"x(\d+)")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseFailure(pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value):
        kind, text, pos = self.tok
        if text != value or kind == "end":
            if kind == "end":
                raise ParseFailure(pos, f"expected {value!r} but input ended")
            raise ParseFailure(pos, f"expected {value!r}, found {text!r}")
        self.advance()

    def parse(self):
        tree = self.expr()
        kind, text, pos = self.tok
        if kind != "end":
            raise ParseFailure(pos, f"unexpected trailing token {text!r}")
        return tree

    def expr(self):
        left = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Func("neg", self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        kind, text, pos = self.tok
        if kind == "num":
            self.advance()
            return Const(float(text))
        if kind == "name":
            self.advance()
            m = _VAR_RE.fullmatch(text)
            if m:
                index = int(m.group(1))
                if index < 1:
                    raise ParseFailure(pos, f"variable index must be >= 1 in {text!r}")
                return Var(index)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(text, arg)
            raise ParseFailure(pos, f"unknown identifier {text!r}")
        if kind == "op" and text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "end":
            raise ParseFailure(pos, "unexpected end of input")
        raise ParseFailure(pos, f"unexpected token {text!r}")


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises
    ------
    ParseFailure
        On unbalanced parentheses, unknown identifiers or trailing tokens.
    """
    return _Parser(text).parse()


def to_string(tree: Expr) -> str:
    """Canonical, fully parenthesized text form; ``parse`` inverts it."""
    if isinstance(tree, Const):
        return repr(float(tree.value))
    if isinstance(tree, Var):
        return f"x{tree.index}"
    if isinstance(tree, BinOp):
        return f"({to_string(tree.left)} {tree.op} {to_string(tree.right)})"
    if tree.name == "neg":
        return f"(-{to_string(tree.arg)})"
    return f"{tree.name}({to_string(tree.arg)})"


def variables(tree: Expr) -> set:
    """Set of 1-based variable indices referenced by ``tree``."""
    if isinstance(tree, Var):
        return {tree.index}
    if isinstance(tree, Const):
        return set()
    if isinstance(tree, BinOp):
        return variables(tree.left) | variables(tree.right)
    return variables(tree.arg)


_UNARY = {
    "neg": np.negative,
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


def _check_range(tree, n):
    top = max(variables(tree), default=0)
    if top > n:
        raise IndexError(f"expression references x{top} but the point has {n} entries")


def _eval(tree, x):
    if isinstance(tree, Const):
        return np.float64(tree.value)
    if isinstance(tree, Var):
        return x[tree.index - 1]
    if isinstance(tree, Func):
        return _UNARY[tree.name](_eval(tree.arg, x))
    a = _eval(tree.left, x)
    b = _eval(tree.right, x)
    if tree.op == "+":
        return a + b
    if tree.op == "-":
        return a - b
    if tree.op == "*":
        return a * b
    if tree.op == "/":
        return a / b
    return np.power(a, b)


def evaluate(tree: Expr, x) -> float:
    """Evaluate ``tree`` at the point ``x`` (``x[0]`` is ``x1``).

    Non-finite results are returned, not raised.
    """
    x = np.asarray(x, dtype=float)
    _check_range(tree, x.shape[0])
    with np.errstate(all="ignore"):
        return float(_eval(tree, x))


def _grad(tree, x, seed, out):
    """Reverse-mode sweep: returns the value, accumulates seed * d(value)/dx."""
    if isinstance(tree, Const):
        return np.float64(tree.value)
    if isinstance(tree, Var):
        out[tree.index - 1] += seed
        return x[tree.index - 1]
    if isinstance(tree, Func):
        # value first, then push the local derivative through the argument
        a = _eval(tree.arg, x)
        name = tree.name
        if name == "neg":
            d = -1.0
        elif name == "exp":
            d = np.exp(a)
        elif name == "log":
            d = 1.0 / a
        elif name == "sin":
            d = np.cos(a)
        elif name == "cos":
            d = -np.sin(a)
        elif name == "sqrt":
            d = 0.5 / np.sqrt(a)
        else:
            d = np.sign(a)
        _grad(tree.arg, x, seed * d, out)
        return _UNARY[name](a)
    a = _eval(tree.left, x)
    b = _eval(tree.right, x)
    op = tree.op
    if op == "+":
        _grad(tree.left, x, seed, out)
        _grad(tree.right, x, seed, out)
        return a + b
    if op == "-":
        _grad(tree.left, x, seed, out)
        _grad(tree.right, x, -seed, out)
        return a - b
    if op == "*":
        _grad(tree.left, x, seed * b, out)
        _grad(tree.right, x, seed * a, out)
        return a * b
    if op == "/":
        _grad(tree.left, x, seed / b, out)
        _grad(tree.right, x, -seed * a / (b * b), out)
        return a / b
    value = np.power(a, b)
    _grad(tree.left, x, seed * b * np.power(a, b - 1.0), out)
    if variables(tree.right):
        _grad(tree.right, x, seed * value * np.log(a), out)
    return value


def gradient(tree: Expr, x) -> np.ndarray:
    """Exact gradient of ``tree`` at ``x`` by reverse accumulation.

    Derivatives are computed numerically along the tree, not symbolically.
    For ``a^b`` with a constant exponent the ``log(a)`` term is skipped, so
    ``x1^2`` differentiates cleanly at negative ``x1``.
    """
    x = np.asarray(x, dtype=float)
    _check_range(tree, x.shape[0])
    out = np.zeros(x.shape[0])
    with np.errstate(all="ignore"):
        _grad(tree, x, 1.0, out)
    return out


def _source(tree, consts):
    if isinstance(tree, Const):
        consts.append(np.float64(tree.value))
        return f"_c{len(consts) - 1}"
    if isinstance(tree, Var):
        return f"x[{tree.index - 1}]"
    if isinstance(tree, Func):
        return f"_{tree.name}({_source(tree.arg, consts)})"
    left = _source(tree.left, consts)
    right = _source(tree.right, consts)
    if tree.op == "^":
        return f"_power({left}, {right})"
    return f"({left} {tree.op} {right})"


def compile_expr(tree: Expr):
    """Compile ``tree`` into a fast callable ``f(x) -> float``.

    The callable does not range-check ``x`` and must be used inside
    ``np.errstate(all="ignore")`` if warnings are unwanted.
    """
    consts = []
    body = _source(tree, consts)
    namespace = {f"_{k}": v for k, v in _UNARY.items()}
    namespace["_power"] = np.power
    namespace.update({f"_c{i}": c for i, c in enumerate(consts)})
    exec(f"def _f(x):\n    return {body}\n", namespace)
    return namespace["_f"]
