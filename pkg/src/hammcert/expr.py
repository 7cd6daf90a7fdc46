"""Expression language for nonlinearities, coefficients, kernels and functionals.

Grammar (see docs/problem-format.md for the full EBNF):

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right-associative, binds above unary -
    atom   := NUMBER | "e" | "pi" | VARIABLE
            | FUNC "(" expr ")" | ("min" | "max") "(" expr "," expr ")"
            | "U" "(" expr ")" | "DU" "(" expr ")" | "INT" "(" expr ")"
            | "(" expr ")"

Which variables and atoms are legal depends on the role an expression is
parsed for:

    nonlinearity   f(t, u, v)            variables t, u, v
    coefficient    gamma(t)              variable t
    kernel         k(t, s)               variables t, s
    dominator      Phi(s), Psi(s)        variable s
    bound          entry(rho)            variable rho
    constant       plain number          no variables
    functional     h[u]                  atoms U(a), DU(a), INT(body);
                                         s only inside INT; free t forbidden

U(a) is the point value u(a), DU(a) is u'(a), and INT(body) integrates the
body over s in [0,1] with U(s), DU(s) available inside.  INT does not nest.
Evaluation is numpy-vectorised; non-finite results raise EvaluationError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, ExprError
from .grid import GridFunction, eval_at, eval_deriv_at, integrate

ROLE_VARS = {
    "nonlinearity": frozenset({"t", "u", "v"}),
    "coefficient": frozenset({"t"}),
    "kernel": frozenset({"t", "s"}),
    "dominator": frozenset({"s"}),
    "bound": frozenset({"rho"}),
    "constant": frozenset(),
    "functional": frozenset(),  # only s, and only inside INT
}

FUNCTIONS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "sqrt": np.sqrt, "abs": np.abs}
FUNCTIONS2 = {"min": np.minimum, "max": np.maximum}
CONSTANTS = {"e": math.e, "pi": math.pi}


class Expr:
    """Base class for AST nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Const(Expr):
    name: str


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple


@dataclass(frozen=True)
class PointValue(Expr):
    """U(arg) or, with deriv=True, DU(arg)."""

    deriv: bool
    arg: Expr


@dataclass(frozen=True)
class Integral(Expr):
    """INT(body): integral of the body over s in [0,1]."""

    body: Expr


# ---------------------------------------------------------------------------
# lexer

@dataclass(frozen=True)
class _Token:
    kind: str  # 'num' | 'name' | one of "+-*/^(),", or 'end'
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            # exponent part, but only when unambiguously numeric
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            tokens.append(_Token("num", text[start:i], start))
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(_Token("name", text[start:i], start))
            continue
        if c in "+-*/^(),":
            tokens.append(_Token(c, c, i))
            i += 1
            continue
        raise ExprError(f"unexpected character {c!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, tokens: list[_Token], role: str):
        self.tokens = tokens
        self.role = role
        self.i = 0
        self.inside_int = False

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str) -> _Token:
        if self.tok.kind != kind:
            raise ExprError(f"expected {kind!r}, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ExprError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            e = Binary(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.kind in ("*", "/"):
            op = self.advance().kind
            e = Binary(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.tok.kind == "-":
            self.advance()
            return Unary(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "name":
            self.advance()
            name = t.text
            if self.tok.kind == "(":
                return self.call(name, t.pos)
            if name in CONSTANTS:
                return Const(name)
            return self.variable(name, t.pos)
        raise ExprError(f"expected a value, found {t.text or 'end of input'!r}", t.pos)

    def call(self, name: str, pos: int) -> Expr:
        self.expect("(")
        if name in FUNCTIONS:
            arg = self.expr()
            self.expect(")")
            return Call(name, (arg,))
        if name in FUNCTIONS2:
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return Call(name, (a, b))
        if name in ("U", "DU", "INT"):
            if self.role != "functional":
                raise ExprError(f"{name}(...) is only allowed in functional expressions", pos)
            if name == "INT":
                if self.inside_int:
                    raise ExprError("INT(...) does not nest", pos)
                self.inside_int = True
                body = self.expr()
                self.inside_int = False
                self.expect(")")
                return Integral(body)
            arg = self.expr()
            self.expect(")")
            return PointValue(name == "DU", arg)
        raise ExprError(f"unknown function {name!r}", pos)

    def variable(self, name: str, pos: int) -> Expr:
        if self.role == "functional":
            if name == "s" and self.inside_int:
                return Var("s")
            if name == "s":
                raise ExprError("variable 's' is only allowed inside INT(...)", pos)
            raise ExprError(f"variable {name!r} not allowed in a functional expression", pos)
        allowed = ROLE_VARS[self.role]
        if name in allowed:
            return Var(name)
        if allowed:
            raise ExprError(
                f"variable {name!r} not allowed in a {self.role} expression "
                f"(allowed: {', '.join(sorted(allowed))})",
                pos,
            )
        raise ExprError(f"variable {name!r} not allowed in a {self.role} expression", pos)


def parse(text: str, role: str) -> Expr:
    """Parse an expression string for the given role; see module docstring."""
    if role not in ROLE_VARS:
        raise ValueError(f"unknown role {role!r}")
    if not text or not text.strip():
        raise ExprError("empty expression")
    return _Parser(_tokenize(text), role).parse()


# ---------------------------------------------------------------------------
# printing

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _fmt(e: Expr, ctx: int) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, (Const, Var)):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({', '.join(_fmt(a, 0) for a in e.args)})"
    if isinstance(e, PointValue):
        return f"{'DU' if e.deriv else 'U'}({_fmt(e.arg, 0)})"
    if isinstance(e, Integral):
        return f"INT({_fmt(e.body, 0)})"
    if isinstance(e, Unary):
        s = f"-{_fmt(e.operand, _PREC_UNARY)}"
        return f"({s})" if _PREC_UNARY < ctx else s
    if isinstance(e, Binary):
        if e.op == "^":
            s = f"{_fmt(e.left, _PREC_ATOM)}^{_fmt(e.right, _PREC_UNARY)}"
            return f"({s})" if _PREC_POW < ctx else s
        prec = _PREC_ADD if e.op in "+-" else _PREC_MUL
        sep = f" {e.op} " if e.op in "+-" else e.op
        s = f"{_fmt(e.left, prec)}{sep}{_fmt(e.right, prec + 1)}"
        return f"({s})" if prec < ctx else s
    raise TypeError(f"not an Expr node: {e!r}")


def to_source(e: Expr) -> str:
    """Render an AST back to a string that re-parses to an equal AST."""
    return _fmt(e, 0)


# ---------------------------------------------------------------------------
# evaluation

def _eval(e: Expr, env: dict, u: GridFunction | None):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Unary):
        return -_eval(e.operand, env, u)
    if isinstance(e, Binary):
        a = _eval(e.left, env, u)
        b = _eval(e.right, env, u)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return np.divide(a, b)
        return np.power(a, b)
    if isinstance(e, Call):
        fns = FUNCTIONS if len(e.args) == 1 else FUNCTIONS2
        return fns[e.func](*(_eval(a, env, u) for a in e.args))
    if isinstance(e, PointValue):
        a = _eval(e.arg, env, u)
        return eval_deriv_at(u, a) if e.deriv else eval_at(u, a)
    if isinstance(e, Integral):
        grid = u.grid
        body = _eval(e.body, {**env, "s": grid.nodes}, u)
        samples = np.broadcast_to(np.asarray(body, dtype=float), grid.nodes.shape)
        return integrate(samples, grid)
    raise TypeError(f"not an Expr node: {e!r}")


def _describe_point(env: dict, shape, idx) -> str:
    parts = []
    for name, val in env.items():
        arr = np.asarray(val)
        v = np.broadcast_to(arr, shape)[idx] if arr.size > 1 else arr.reshape(-1)[0]
        parts.append(f"{name}={float(v):.6g}")
    return ", ".join(parts) if parts else "(no variables)"


def _run(e: Expr, env: dict, u: GridFunction | None = None):
    env = {k: np.asarray(v, dtype=float) for k, v in env.items()}
    with np.errstate(all="ignore"):
        out = _eval(e, env, u)
    out = np.asarray(out, dtype=float)
    finite = np.isfinite(out)
    if not finite.all():
        idx = np.unravel_index(int(np.argmin(finite)), out.shape) if out.ndim else ()
        raise EvaluationError(
            f"expression '{to_source(e)}' is non-finite at {_describe_point(env, out.shape, idx)}"
        )
    return float(out) if out.ndim == 0 else out


def eval_nonlinearity(e: Expr, t, u, v):
    """f(t,u,v); arguments may be scalars or broadcastable numpy arrays."""
    return _run(e, {"t": t, "u": u, "v": v})


def eval_coefficient(e: Expr, t):
    return _run(e, {"t": t})


def eval_kernel_expr(e: Expr, t, s):
    return _run(e, {"t": t, "s": s})


def eval_dominator(e: Expr, s):
    return _run(e, {"s": s})


def eval_bound(e: Expr, rho: float) -> float:
    return _run(e, {"rho": rho})


def eval_constant(e: Expr) -> float:
    return _run(e, {})


def eval_functional(e: Expr, u: GridFunction) -> float:
    """h[u] for a functional-role AST: point atoms interpolate, INT integrates."""
    return _run(e, {}, u)
