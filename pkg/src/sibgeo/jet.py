"""Second-order truncated Taylor jets.

A :class:`Jet2` carries the value, gradient and Hessian of a scalar function
at a point.  Arrays may carry leading batch axes, so a single jet can hold the
derivatives at many points at once: ``value`` has shape ``B``, ``grad`` has
shape ``B + (n,)`` and ``hess`` has shape ``B + (n, n)``.  ``hess`` is ``None``
for first-order jets.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DomainError


def _sym_outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a_i b_j + b_i a_j: exactly symmetric in floating point
    ab = a[..., :, None] * b[..., None, :]
    return ab + np.swapaxes(ab, -1, -2)


class Jet2:
    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess=None):
        self.value = value
        self.grad = grad
        self.hess = hess

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, c: float, n: int, batch: tuple = (), order: int = 2) -> "Jet2":
        value = np.full(batch, float(c))
        grad = np.zeros(batch + (n,))
        hess = np.zeros(batch + (n, n)) if order >= 2 else None
        return cls(value, grad, hess)

    @classmethod
    def seed(cls, x: np.ndarray, i: int, order: int = 2) -> "Jet2":
        """Jet of the i-th coordinate function at points ``x`` (shape ``B + (n,)``)."""
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        batch = x.shape[:-1]
        grad = np.zeros(batch + (n,))
        grad[..., i] = 1.0
        hess = np.zeros(batch + (n, n)) if order >= 2 else None
        return cls(x[..., i].copy(), grad, hess)

    @property
    def order(self) -> int:
        return 1 if self.hess is None else 2

    @property
    def dim(self) -> int:
        return self.grad.shape[-1]

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad!r}, hess={self.hess!r})"

    # arithmetic ---------------------------------------------------------

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, None if self.hess is None else -self.hess)

    def __add__(self, other) -> "Jet2":
        if not isinstance(other, Jet2):
            return Jet2(self.value + other, self.grad, self.hess)
        hess = None
        if self.hess is not None and other.hess is not None:
            hess = self.hess + other.hess
        return Jet2(self.value + other.value, self.grad + other.grad, hess)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        if not isinstance(other, Jet2):
            return Jet2(self.value - other, self.grad, self.hess)
        hess = None
        if self.hess is not None and other.hess is not None:
            hess = self.hess - other.hess
        return Jet2(self.value - other.value, self.grad - other.grad, hess)

    def __rsub__(self, other) -> "Jet2":
        return (-self) + other

    def __mul__(self, other) -> "Jet2":
        if not isinstance(other, Jet2):
            c = other
            return Jet2(self.value * c, self.grad * c, None if self.hess is None else self.hess * c)
        a, b = self, other
        av = np.asarray(a.value)[..., None]
        bv = np.asarray(b.value)[..., None]
        grad = av * b.grad + bv * a.grad
        hess = None
        if a.hess is not None and b.hess is not None:
            hess = (
                av[..., None] * b.hess
                + bv[..., None] * a.hess
                + _sym_outer(a.grad, b.grad)
            )
        return Jet2(a.value * b.value, grad, hess)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet2":
        if not isinstance(other, Jet2):
            if other == 0:
                raise DomainError("division by zero")
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet2":
        return self.reciprocal() * other

    def reciprocal(self) -> "Jet2":
        x = np.asarray(self.value)
        if np.any(x == 0.0):
            raise DomainError("division by zero")
        inv = 1.0 / x
        return self.compose(inv, -inv * inv, 2.0 * inv * inv * inv)

    def compose(self, f0, f1, f2) -> "Jet2":
        """Jet of ``F(u)`` given ``F``, ``F'`` and ``F''`` evaluated at ``u = self.value``."""
        f1a = np.asarray(f1)[..., None]
        grad = f1a * self.grad
        hess = None
        if self.hess is not None:
            f2a = np.asarray(f2)[..., None, None]
            g = self.grad
            hess = f2a * (g[..., :, None] * g[..., None, :]) + f1a[..., None] * self.hess
        return Jet2(f0, grad, hess)

    def ipow(self, k: int) -> "Jet2":
        """Integer power by square-and-multiply on jets."""
        if k == 0:
            return Jet2.constant(1.0, self.dim, np.shape(self.value), self.order)
        if k < 0:
            return self.ipow(-k).reciprocal()
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result


def _check_positive(x, what: str) -> None:
    if np.any(np.asarray(x) <= 0.0):
        raise DomainError(f"{what} of a non-positive number")


def _sin(u):
    s, c = np.sin(u), np.cos(u)
    return s, c, -s


def _cos(u):
    s, c = np.sin(u), np.cos(u)
    return c, -s, -c


def _tan(u):
    c = np.cos(u)
    if np.any(c == 0.0):
        raise DomainError("tan at an odd multiple of pi/2")
    t = np.tan(u)
    sec2 = 1.0 + t * t
    return t, sec2, 2.0 * t * sec2


def _sinh(u):
    s, c = np.sinh(u), np.cosh(u)
    return s, c, s


def _cosh(u):
    s, c = np.sinh(u), np.cosh(u)
    return c, s, c


def _tanh(u):
    t = np.tanh(u)
    d = 1.0 - t * t
    return t, d, -2.0 * t * d


def _exp(u):
    e = np.exp(u)
    return e, e, e


def _ln(u):
    _check_positive(u, "ln")
    inv = 1.0 / u
    return np.log(u), inv, -inv * inv


def _sqrt(u):
    _check_positive(u, "sqrt")
    s = np.sqrt(u)
    return s, 0.5 / s, -0.25 / (s * u)


def _abs(u):
    if np.any(np.asarray(u) == 0.0):
        raise DomainError("abs is not differentiable at 0")
    return np.abs(u), np.sign(u), np.zeros_like(np.asarray(u, dtype=float))


# name -> u -> (F(u), F'(u), F''(u))
DERIVATIVES: dict[str, Callable] = {
    "sin": _sin,
    "cos": _cos,
    "tan": _tan,
    "sinh": _sinh,
    "cosh": _cosh,
    "tanh": _tanh,
    "exp": _exp,
    "ln": _ln,
    "sqrt": _sqrt,
    "abs": _abs,
}


def apply(name: str, u: Jet2) -> Jet2:
    """Apply the named elementary function to a jet."""
    f0, f1, f2 = DERIVATIVES[name](np.asarray(u.value))
    return u.compose(f0, f1, f2)
