"""Recursive-descent parser from expression strings to :class:`AnalyticFn` trees.

Grammar (usual precedence, ``^`` and ``**`` right-associative)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary | implicit)*
    unary   := ('+' | '-') unary | power
    power   := atom (('^' | '**') unary)?
    atom    := NUMBER | NAME | NAME '(' expr (',' expr)? ')' | '(' expr ')'

Names: the variable (``z``, or ``x`` as an alias), constants ``i``, ``pi``,
``e``, and the functions ``exp log sqrt sin cos tan sinh cosh tanh atanh``
plus ``int(f, base)`` for the antiderivative with basepoint (default 0).
Implicit multiplication is accepted after a number, e.g. ``2pi`` or ``3z``.
Exponents must be constant; ``a^b`` with a variable exponent becomes
``exp(b*log(a))``.
"""
from __future__ import annotations

import cmath
import re

from . import jets
from .errors import ParseError

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)

_FUNCS = {
    "exp": jets.exp, "log": jets.log, "sqrt": jets.sqrt, "sin": jets.sin,
    "cos": jets.cos, "tan": jets.tan, "sinh": jets.sinh, "cosh": jets.cosh,
    "tanh": jets.tanh, "atanh": jets.atanh,
}
_CONSTS = {"i": 1j, "pi": cmath.pi, "e": cmath.e}
_VARS = ("z", "x")


def _tokenize(text):
    tokens = []
    pos = 0
    text_len = len(text)
    while pos < text_len:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(text, start, f"unexpected character {text[start]!r}")
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

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.advance()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(self.text, pos, f"expected {value!r}, found {found}")

    def error(self, message, tok=None):
        kind, val, pos = tok or self.peek()
        raise ParseError(self.text, pos, message)

    # Each parse method returns (node, is_constant).
    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            self.error(f"unexpected {val!r}")
        return node[0]

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.advance()[1]
            right = self.term()
            left = _fold(left[0] + right[0] if op == "+" else left[0] - right[0],
                         left[1] and right[1])
        return left

    def term(self):
        left = self.unary()
        while True:
            kind, val, _ = self.peek()
            if val in ("*", "/"):
                self.advance()
                right = self.unary()
                node = left[0] * right[0] if val == "*" else left[0] / right[0]
            elif left_is_number(self, left) and (kind == "name" or val == "("):
                right = self.power()
                node = left[0] * right[0]
            else:
                return left
            left = _fold(node, left[1] and right[1])

    def unary(self):
        val = self.peek()[1]
        if val in ("+", "-"):
            self.advance()
            operand = self.unary()
            return operand if val == "+" else _fold(-operand[0], operand[1])
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.advance()
            exponent = self.unary()
            if exponent[1]:
                return _fold(jets.power(base[0], exponent[0](0)), base[1])
            return self._var_power(base, exponent)
        return base

    @staticmethod
    def _var_power(base, exponent):
        return jets.exp(exponent[0] * jets.log(base[0])), False

    def atom(self):
        tok = self.advance()
        kind, val, pos = tok
        if kind == "num":
            self._last_number = self.i
            return jets.Const(float(val)), True
        if kind == "name":
            if val in _VARS:
                return jets.Z, False
            if val in _CONSTS:
                return jets.Const(_CONSTS[val]), True
            if val in _FUNCS or val == "int":
                if self.peek()[1] != "(":
                    self.error(f"function {val!r} needs an argument list")
                self.advance()
                arg = self.expr()
                extra = None
                if self.peek()[1] == ",":
                    if val != "int":
                        self.error(f"{val!r} takes one argument")
                    self.advance()
                    extra = self.expr()
                    if not extra[1]:
                        self.error("basepoint must be constant", tok)
                self.expect(")")
                if val == "int":
                    base = extra[0](0) if extra else 0.0
                    return jets.integral(arg[0], base), False
                return _fold(_FUNCS[val](arg[0]), arg[1])
            raise ParseError(self.text, pos, f"unknown name {val!r}")
        if val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(self.text, pos, f"unexpected {found}")


def left_is_number(parser, left):
    # implicit product only directly after a numeric literal
    return getattr(parser, "_last_number", None) == parser.i and left[1]


def _fold(node, constant):
    if constant:
        return jets.Const(node(0)), True
    return node, False


def parse_expression(text: str) -> jets.AnalyticFn:
    """Parse ``text`` into an analytic expression in the variable ``z``."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError(str(text), 0, "empty expression")
    return _Parser(text).parse()
