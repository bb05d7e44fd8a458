"""Closed-form scalar expressions over chart coordinates.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?          # right associative, constant exponent
    atom    := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

``NAME`` is a coordinate, a function (sin cos tan sinh cosh tanh exp ln sqrt
abs) or the constant ``pi``.  Expressions are evaluated exactly as written;
there is no simplifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import jet as _jet
from .errors import ArityError, DomainError, ExprSyntaxError, UnknownIdentifier
from .jet import Jet2

FUNCTIONS = tuple(_jet.DERIVATIVES)
CONSTANTS = {"pi": math.pi}

# render precedence
_P_ADD, _P_MUL, _P_UNARY, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


class Expr:
    """Base class of the immutable expression tree."""

    __slots__ = ()

    # -- composition helpers (no simplification) --------------------------
    def __add__(self, other: "Expr") -> "Expr":
        return BinOp("+", self, as_expr(other))

    def __radd__(self, other) -> "Expr":
        return BinOp("+", as_expr(other), self)

    def __sub__(self, other) -> "Expr":
        return BinOp("-", self, as_expr(other))

    def __rsub__(self, other) -> "Expr":
        return BinOp("-", as_expr(other), self)

    def __mul__(self, other) -> "Expr":
        return BinOp("*", self, as_expr(other))

    def __rmul__(self, other) -> "Expr":
        return BinOp("*", as_expr(other), self)

    def __truediv__(self, other) -> "Expr":
        return BinOp("/", self, as_expr(other))

    def __rtruediv__(self, other) -> "Expr":
        return BinOp("/", as_expr(other), self)

    def __neg__(self) -> "Expr":
        return Neg(self)

    def __pow__(self, p: float) -> "Expr":
        return Pow(self, float(p))

    def __str__(self) -> str:
        return render(self)

    # -- evaluation ------------------------------------------------------
    def children(self) -> tuple["Expr", ...]:
        return ()

    def max_coord_index(self) -> int:
        """Largest coordinate index referenced, or -1."""
        return max((c.max_coord_index() for c in self.children()), default=-1)

    def evaluate(self, point) -> float | np.ndarray:
        """Value at ``point`` (shape ``(n,)`` or batched ``(..., n)``)."""
        x = np.asarray(point, dtype=float)
        return evaluate_many([self], x)[0]

    def jet(self, point, order: int = 2) -> Jet2:
        x = np.asarray(point, dtype=float)
        return eval_jets([self], x, order)[0]


@dataclass(frozen=True, eq=True, slots=True)
class Const(Expr):
    value: float

    def _val(self, x, memo):
        return np.full(x.shape[:-1], self.value)

    def _jet(self, x, order, memo):
        return Jet2.constant(self.value, x.shape[-1], x.shape[:-1], order)


@dataclass(frozen=True, eq=True, slots=True)
class Coord(Expr):
    index: int
    name: str

    def max_coord_index(self) -> int:
        return self.index

    def _val(self, x, memo):
        return x[..., self.index]

    def _jet(self, x, order, memo):
        return Jet2.seed(x, self.index, order)


@dataclass(frozen=True, eq=True, slots=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)

    def _val(self, x, memo):
        return -_val(self.arg, x, memo)

    def _jet(self, x, order, memo):
        return -_jet_of(self.arg, x, order, memo)


@dataclass(frozen=True, eq=True, slots=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)

    def _val(self, x, memo):
        a = _val(self.left, x, memo)
        b = _val(self.right, x, memo)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if np.any(b == 0.0):
            raise DomainError("division by zero")
        return a / b

    def _jet(self, x, order, memo):
        a = _jet_of(self.left, x, order, memo)
        b = _jet_of(self.right, x, order, memo)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b


@dataclass(frozen=True, eq=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: float

    def children(self):
        return (self.base,)

    @property
    def integer_exponent(self) -> bool:
        return float(self.exponent).is_integer() and abs(self.exponent) <= 2**31

    def _val(self, x, memo):
        b = _val(self.base, x, memo)
        p = self.exponent
        if self.integer_exponent:
            k = int(p)
            if k < 0 and np.any(b == 0.0):
                raise DomainError("division by zero")
            return _ipow_values(b, k)
        _jet._check_positive(b, "real power")
        return np.exp(p * np.log(b))

    def _jet(self, x, order, memo):
        b = _jet_of(self.base, x, order, memo)
        if self.integer_exponent:
            return b.ipow(int(self.exponent))
        _jet._check_positive(b.value, "real power")
        return _jet.apply("exp", _jet.apply("ln", b) * self.exponent)


@dataclass(frozen=True, eq=True, slots=True)
class Call(Expr):
    func: str
    arg: Expr

    def children(self):
        return (self.arg,)

    def _val(self, x, memo):
        u = _val(self.arg, x, memo)
        f = self.func
        if f == "ln":
            _jet._check_positive(u, "ln")
            return np.log(u)
        if f == "sqrt":
            if np.any(u < 0.0):
                raise DomainError("sqrt of a negative number")
            return np.sqrt(u)
        if f == "tan" and np.any(np.cos(u) == 0.0):
            raise DomainError("tan at an odd multiple of pi/2")
        return _NUMPY_FUNCS[f](u)

    def _jet(self, x, order, memo):
        return _jet.apply(self.func, _jet_of(self.arg, x, order, memo))


_NUMPY_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "abs": np.abs,
}


def _ipow_values(b, k: int):
    if k == 0:
        return np.ones_like(b)
    if k < 0:
        return 1.0 / _ipow_values(b, -k)
    result = None
    base = b
    while k:
        if k & 1:
            result = base if result is None else result * base
        k >>= 1
        if k:
            base = base * base
    return result


def as_expr(obj) -> Expr:
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, (int, float)):
        return Const(float(obj))
    raise TypeError(f"cannot use {type(obj).__name__} as an expression")


# ---------------------------------------------------------------------------
# evaluation with shared-subtree memoisation

def _val(e: Expr, x, memo):
    key = id(e)
    hit = memo.get(key)
    if hit is None:
        hit = e._val(x, memo)
        memo[key] = hit
    return hit


def _jet_of(e: Expr, x, order, memo) -> Jet2:
    key = id(e)
    hit = memo.get(key)
    if hit is None:
        hit = e._jet(x, order, memo)
        memo[key] = hit
    return hit


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise DomainError(f"non-finite {what} during evaluation")


def evaluate_many(exprs: Sequence[Expr], points) -> list[np.ndarray]:
    """Values of several expressions at ``points``, sharing common subtrees."""
    x = np.asarray(points, dtype=float)
    memo: dict = {}
    with np.errstate(all="ignore"):
        out = [np.asarray(_val(e, x, memo), dtype=float) for e in exprs]
    for v in out:
        _check_finite(v, "value")
    return out


def eval_jets(exprs: Sequence[Expr], points, order: int = 2) -> list[Jet2]:
    """Jets of several expressions at ``points``, sharing common subtrees.

    ``points`` has shape ``(n,)`` or ``(..., n)``; every jet carries the same
    leading batch shape.
    """
    x = np.asarray(points, dtype=float)
    memo: dict = {}
    with np.errstate(all="ignore"):
        out = [_jet_of(e, x, order, memo) for e in exprs]
    for j in out:
        _check_finite(j.value, "value")
        _check_finite(j.grad, "gradient")
        if j.hess is not None:
            _check_finite(j.hess, "hessian")
    return out


def eval_jet(e: Expr, point, order: int = 2) -> Jet2:
    return eval_jets([e], point, order)[0]


# ---------------------------------------------------------------------------
# rendering

def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _P_ADD if e.op in "+-" else _P_MUL
    if isinstance(e, Neg):
        return _P_UNARY
    if isinstance(e, Pow):
        return _P_POW
    return _P_ATOM


def _num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        s = str(int(v))
    else:
        s = repr(v)
    return f"(-{s[1:]})" if s.startswith("-") else s


def render(e: Expr) -> str:
    """Text form of ``e`` that parses back to an identically evaluating tree."""
    if isinstance(e, Const):
        if not math.isfinite(e.value):
            raise ValueError("cannot render a non-finite constant")
        # keep -0.0 distinguishable from 0.0
        if e.value == 0.0 and math.copysign(1.0, e.value) < 0:
            return "(-0)"
        return _num(e.value)
    if isinstance(e, Coord):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({render(e.arg)})"
    if isinstance(e, Neg):
        inner = render(e.arg)
        if _prec(e.arg) < _P_UNARY:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(e, Pow):
        base = render(e.base)
        if _prec(e.base) < _P_ATOM:
            base = f"({base})"
        p = float(e.exponent)
        return f"{base}^{_num(p)}"
    if isinstance(e, BinOp):
        p = _prec(e)
        left = render(e.left)
        right = render(e.right)
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}" if p == _P_ADD else f"{left}{e.op}{right}"
    raise TypeError(f"unknown node {e!r}")


# ---------------------------------------------------------------------------
# parsing

@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "name", "op", "end"
    text: str
    pos: int  # character index


def _digit(ch: str) -> bool:
    # ASCII only; str.isdigit also accepts superscripts that float() rejects
    return "0" <= ch <= "9"


def _tokenize(src: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if _digit(ch) or (ch == "." and i + 1 < n and _digit(src[i + 1])):
            j = i
            while j < n and _digit(src[j]):
                j += 1
            if j < n and src[j] == ".":
                j += 1
                while j < n and _digit(src[j]):
                    j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and _digit(src[k]):
                    while k < n and _digit(src[k]):
                        k += 1
                    j = k
            toks.append(_Tok("num", src[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(_Tok("name", src[i:j], i))
            i = j
            continue
        if ch in "+-*/^(),":
            toks.append(_Tok("op", ch, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", _byte_offset(src, i), src)
    toks.append(_Tok("end", "", n))
    return toks


def _byte_offset(src: str, char_index: int) -> int:
    return len(src[:char_index].encode("utf-8"))


class _Parser:
    def __init__(self, src: str, coords: Sequence[str]):
        self.src = src
        self.coords = {name: i for i, name in enumerate(coords)}
        self.toks = _tokenize(src)
        self.i = 0

    def error(self, cls, msg: str, tok: _Tok):
        return cls(msg, _byte_offset(self.src, tok.pos), self.src)

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.tok
        if t.kind != "op" or t.text != text:
            found = "end of input" if t.kind == "end" else repr(t.text)
            raise self.error(ExprSyntaxError, f"expected {text!r}, found {found}", t)
        return self.take()

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise self.error(ExprSyntaxError, "empty expression", self.tok)
        e = self.expr()
        if self.tok.kind != "end":
            raise self.error(ExprSyntaxError, f"unexpected {self.tok.text!r}", self.tok)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take().text
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        t = self.tok
        if t.kind == "op" and t.text == "-":
            self.take()
            return Neg(self.unary())
        if t.kind == "op" and t.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            caret = self.take()
            start = self.tok
            exponent = self.unary()
            if exponent.max_coord_index() >= 0:
                raise self.error(ExprSyntaxError, "exponent must be a constant", start)
            try:
                p = float(exponent.evaluate(np.zeros(0)))
            except DomainError:
                raise self.error(ExprSyntaxError, "exponent is not a finite real", start) from None
            del caret
            return Pow(base, p)
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.take()
            v = float(t.text)
            if not math.isfinite(v):
                raise self.error(ExprSyntaxError, "number out of range", t)
            return Const(v)
        if t.kind == "name":
            self.take()
            name = t.text
            is_call = self.tok.kind == "op" and self.tok.text == "("
            if name in self.coords:
                if is_call:
                    raise self.error(ExprSyntaxError, f"coordinate {name!r} is not a function", self.tok)
                return Coord(self.coords[name], name)
            if name in FUNCTIONS:
                if not is_call:
                    raise self.error(ExprSyntaxError, f"expected '(' after function {name!r}", self.tok)
                self.take()
                args = []
                if not (self.tok.kind == "op" and self.tok.text == ")"):
                    args.append(self.expr())
                    while self.tok.kind == "op" and self.tok.text == ",":
                        self.take()
                        args.append(self.expr())
                self.expect(")")
                if len(args) != 1:
                    raise self.error(ArityError, f"{name} takes 1 argument, got {len(args)}", t)
                return Call(name, args[0])
            if name in CONSTANTS:
                return Const(CONSTANTS[name])
            raise self.error(UnknownIdentifier, f"unknown identifier {name!r}", t)
        if t.kind == "op" and t.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise self.error(ExprSyntaxError, f"unexpected {found}", t)


def parse(source: str, coords: Iterable[str]) -> Expr:
    """Parse ``source`` with names resolved against ``coords`` (in chart order)."""
    if not isinstance(source, str):
        raise TypeError("expression source must be text")
    return _Parser(source, list(coords)).parse()


def coordinate(index: int, name: str) -> Coord:
    return Coord(index, name)


def const(value: float) -> Const:
    return Const(float(value))


# ---------------------------------------------------------------------------
# light-weight builders used when composing trees programmatically.  They
# only drop literal zeros and ones; they never rewrite what is evaluated.

def _is_const(e: Expr, v: float) -> bool:
    return isinstance(e, Const) and e.value == v


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return Neg(b)
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return BinOp("*", a, b)


def total(terms: Iterable[Expr]) -> Expr:
    out: Expr = Const(0.0)
    for t in terms:
        out = add(out, t)
    return out
