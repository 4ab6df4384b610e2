"""Expression language for guards, updates, time advances and output values.

Three scalar kinds exist: ``int`` (64-bit signed), ``real`` (binary64) and
``bool``.  Values are plain Python ``int``/``float``/``bool`` objects; the
static type of an expression comes from :func:`typecheck`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .errors import DslSyntaxError, EvaluationError, ExprTypeError

INF = math.inf
INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

TYPES = ("int", "real", "bool")
KEYWORDS = frozenset({"and", "or", "not", "if", "then", "else", "true", "false", "INF"})

Value = Union[int, float, bool]


# -- lexing -----------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # INT, REAL, IDENT, OP, EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<REAL>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<INT>\d+)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<OP>->|==|!=|<=|>=|[-+*/<>(){},;:=.])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError("unexpected character", line, pos - line_start + 1, text[pos])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


# -- syntax tree ------------------------------------------------------------

Loc = tuple  # (line, col)


@dataclass(frozen=True)
class Lit:
    value: Value
    kind: str  # "int" | "real" | "bool"
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "not"
    operand: "Expr"
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Cond:
    test: "Expr"
    then: "Expr"
    orelse: "Expr"
    loc: Loc | None = field(default=None, compare=False, repr=False)


Expr = Union[Lit, Var, Unary, Binary, Cond]

ARITH = ("+", "-", "*", "/")
COMPARE = ("==", "!=", "<", "<=", ">", ">=")
LOGIC = ("and", "or")

TRUE = Lit(True, "bool")
FALSE = Lit(False, "bool")


def lit(value: Value) -> Lit:
    """Literal node for a Python scalar."""
    if isinstance(value, bool):
        return Lit(value, "bool")
    if isinstance(value, int):
        return Lit(value, "int")
    return Lit(float(value), "real")


def walk(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, Unary):
        yield from walk(e.operand)
    elif isinstance(e, Binary):
        yield from walk(e.left)
        yield from walk(e.right)
    elif isinstance(e, Cond):
        yield from walk(e.test)
        yield from walk(e.then)
        yield from walk(e.orelse)


def variables(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Var)}


def contains_inf(e: Expr) -> bool:
    return any(isinstance(n, Lit) and n.kind == "real" and n.value == INF for n in walk(e))


def is_inf_literal(e: Expr) -> bool:
    return isinstance(e, Lit) and e.kind == "real" and e.value == INF


# -- parsing ----------------------------------------------------------------


class TokenStream:
    """Cursor over a token list; shared by the expression and model parsers."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def lookahead(self, n: int = 1) -> Token:
        return self.tokens[min(self.pos + n, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek
        return tok.kind in ("OP", "IDENT") and tok.text == text

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek
        if tok.kind != "IDENT" or tok.text in KEYWORDS:
            self.error(f"expected {what}")
        return self.next()

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek
        shown = tok.text if tok.kind != "EOF" else "end of input"
        raise DslSyntaxError(message, tok.line, tok.col, shown)


def _loc(tok: Token) -> Loc:
    return (tok.line, tok.col)


def parse_expression(ts: TokenStream) -> Expr:
    """Parse one expression from ``ts``, stopping at the first token that
    cannot continue it."""
    return _parse_or(ts)


def _parse_or(ts):
    left = _parse_and(ts)
    while ts.at("or"):
        tok = ts.next()
        left = Binary("or", left, _parse_and(ts), _loc(tok))
    return left


def _parse_and(ts):
    left = _parse_not(ts)
    while ts.at("and"):
        tok = ts.next()
        left = Binary("and", left, _parse_not(ts), _loc(tok))
    return left


def _parse_not(ts):
    if ts.at("not"):
        tok = ts.next()
        return Unary("not", _parse_not(ts), _loc(tok))
    return _parse_compare(ts)


def _parse_compare(ts):
    left = _parse_additive(ts)
    if ts.peek.kind == "OP" and ts.peek.text in COMPARE:
        tok = ts.next()
        left = Binary(tok.text, left, _parse_additive(ts), _loc(tok))
        if ts.peek.kind == "OP" and ts.peek.text in COMPARE:
            ts.error("comparisons do not chain")
    return left


def _parse_additive(ts):
    left = _parse_multiplicative(ts)
    while ts.peek.kind == "OP" and ts.peek.text in ("+", "-"):
        tok = ts.next()
        left = Binary(tok.text, left, _parse_multiplicative(ts), _loc(tok))
    return left


def _parse_multiplicative(ts):
    left = _parse_unary(ts)
    while ts.peek.kind == "OP" and ts.peek.text in ("*", "/"):
        tok = ts.next()
        left = Binary(tok.text, left, _parse_unary(ts), _loc(tok))
    return left


def _parse_unary(ts):
    if ts.peek.kind == "OP" and ts.peek.text == "-":
        tok = ts.next()
        nxt = ts.peek
        if nxt.kind in ("INT", "REAL"):
            ts.next()
            return _number(ts, nxt, negate=True, start=tok)
        return Unary("-", _parse_unary(ts), _loc(tok))
    return _parse_primary(ts)


def _number(ts, tok, negate=False, start=None):
    loc = _loc(start or tok)
    if tok.kind == "INT":
        value = int(tok.text)
        if negate:
            value = -value
        if not INT_MIN <= value <= INT_MAX:
            ts.error("integer literal out of range", tok)
        return Lit(value, "int", loc)
    value = float(tok.text)
    return Lit(-value if negate else value, "real", loc)


def _parse_primary(ts):
    tok = ts.peek
    if tok.kind in ("INT", "REAL"):
        ts.next()
        return _number(ts, tok)
    if tok.kind == "IDENT":
        if tok.text == "true":
            ts.next()
            return Lit(True, "bool", _loc(tok))
        if tok.text == "false":
            ts.next()
            return Lit(False, "bool", _loc(tok))
        if tok.text == "INF":
            ts.next()
            return Lit(INF, "real", _loc(tok))
        if tok.text == "if":
            ts.next()
            test = parse_expression(ts)
            ts.expect("then")
            then = parse_expression(ts)
            ts.expect("else")
            orelse = parse_expression(ts)
            return Cond(test, then, orelse, _loc(tok))
        if tok.text in KEYWORDS:
            ts.error("unexpected keyword")
        ts.next()
        return Var(tok.text, _loc(tok))
    if tok.kind == "OP" and tok.text == "(":
        ts.next()
        inner = parse_expression(ts)
        ts.expect(")")
        return inner
    ts.error("expected expression")


def parse_expr(text: str) -> Expr:
    """Parse a complete expression; trailing tokens are a syntax error."""
    ts = TokenStream(tokenize(text))
    e = parse_expression(ts)
    if ts.peek.kind != "EOF":
        ts.error("unexpected token after expression")
    return e


# -- printing ---------------------------------------------------------------


def format_real(x: float) -> str:
    if x == INF:
        return "INF"
    text = repr(float(x))
    if text in ("nan", "-inf"):
        raise ValueError(f"unprintable real {text}")
    return text


def format_expr(e: Expr) -> str:
    """Canonical, fully parenthesised rendering; ``parse_expr`` inverts it."""
    if isinstance(e, Lit):
        if e.kind == "bool":
            return "true" if e.value else "false"
        if e.kind == "int":
            return str(e.value)
        return format_real(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "not":
            return f"(not {format_expr(e.operand)})"
        return f"(-{format_expr(e.operand)})"
    if isinstance(e, Binary):
        return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"
    if isinstance(e, Cond):
        return f"(if {format_expr(e.test)} then {format_expr(e.then)} else {format_expr(e.orelse)})"
    raise TypeError(f"not an expression: {e!r}")


def format_value(v: Value) -> str:
    """Trace rendering of a scalar: ints bare, reals shortest round-trip
    (integral reals without a fractional part), bools ``true``/``false``."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    text = format_real(v)
    if text.endswith(".0"):
        text = text[:-2]
    return text


# -- type checking ----------------------------------------------------------


def type_of(v: Value) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    return "real"


def assignable(src: str, dst: str) -> bool:
    return src == dst or (src == "int" and dst == "real")


def coerce(v: Value, ty: str) -> Value:
    """Convert ``v`` to a value of type ``ty`` (only int -> real widens)."""
    if ty == "real" and type(v) is int:
        return float(v)
    return v


def _numeric(t):
    return t in ("int", "real")


def typecheck(e: Expr, env: Mapping[str, str]) -> str:
    """Return the static type of ``e`` under ``env`` or raise ExprTypeError."""
    if isinstance(e, Lit):
        return e.kind
    if isinstance(e, Var):
        if e.name not in env:
            raise ExprTypeError(f'unknown variable "{e.name}"', e)
        return env[e.name]
    if isinstance(e, Unary):
        t = typecheck(e.operand, env)
        if e.op == "not":
            if t != "bool":
                raise ExprTypeError(f"operand of not must be bool, got {t} in {format_expr(e.operand)}", e.operand)
            return "bool"
        if not _numeric(t):
            raise ExprTypeError(f"operand of unary minus must be numeric, got {t} in {format_expr(e.operand)}", e.operand)
        return t
    if isinstance(e, Binary):
        lt = typecheck(e.left, env)
        rt = typecheck(e.right, env)
        if e.op in LOGIC:
            for side, t in ((e.left, lt), (e.right, rt)):
                if t != "bool":
                    raise ExprTypeError(f"operand of {e.op} must be bool, got {t} in {format_expr(side)}", side)
            return "bool"
        if e.op in ("==", "!="):
            if lt == rt or (_numeric(lt) and _numeric(rt)):
                return "bool"
            raise ExprTypeError(f"cannot compare {lt} with {rt} in {format_expr(e)}", e)
        for side, t in ((e.left, lt), (e.right, rt)):
            if not _numeric(t):
                raise ExprTypeError(f"operand of {e.op} must be numeric, got {t} in {format_expr(side)}", side)
        if e.op in COMPARE:
            return "bool"
        return "int" if lt == rt == "int" else "real"
    if isinstance(e, Cond):
        ct = typecheck(e.test, env)
        if ct != "bool":
            raise ExprTypeError(f"condition must be bool, got {ct} in {format_expr(e.test)}", e.test)
        a = typecheck(e.then, env)
        b = typecheck(e.orelse, env)
        if a == b:
            return a
        if _numeric(a) and _numeric(b):
            return "real"
        raise ExprTypeError(f"branches have types {a} and {b} in {format_expr(e)}", e)
    raise TypeError(f"not an expression: {e!r}")


# -- evaluation -------------------------------------------------------------


def _check_int(v, e):
    if not INT_MIN <= v <= INT_MAX:
        raise EvaluationError(f"integer overflow in {format_expr(e)}", e.loc)
    return v


def evaluate(e: Expr, bindings: Mapping[str, Value]) -> Value:
    """Evaluate a well-typed expression.

    ``and``/``or`` short-circuit; integer division truncates toward zero;
    division by zero raises :class:`EvaluationError`.
    """
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        try:
            return bindings[e.name]
        except KeyError:
            raise EvaluationError(f'unbound variable "{e.name}"', e.loc) from None
    if isinstance(e, Unary):
        v = evaluate(e.operand, bindings)
        if e.op == "not":
            return not v
        if type(v) is int:
            return _check_int(-v, e)
        return -v
    if isinstance(e, Cond):
        return evaluate(e.then if evaluate(e.test, bindings) else e.orelse, bindings)
    if not isinstance(e, Binary):
        raise TypeError(f"not an expression: {e!r}")
    op = e.op
    if op == "and":
        return bool(evaluate(e.left, bindings)) and bool(evaluate(e.right, bindings))
    if op == "or":
        return bool(evaluate(e.left, bindings)) or bool(evaluate(e.right, bindings))
    a = evaluate(e.left, bindings)
    b = evaluate(e.right, bindings)
    if op in COMPARE:
        if type(a) is not type(b) and not isinstance(a, bool) and not isinstance(b, bool):
            a, b = float(a), float(b)
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b
    both_int = type(a) is int and type(b) is int
    if not both_int:
        a, b = float(a), float(b)
    if op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    elif op == "*":
        r = a * b
    else:
        if b == 0:
            raise EvaluationError(f"division by zero in {format_expr(e)}", e.loc)
        if both_int:
            q = abs(a) // abs(b)
            r = q if (a >= 0) == (b > 0) else -q
        else:
            r = a / b
    return _check_int(r, e) if both_int else r
