"""Truncated second-order forward-mode differentiation (hyper-dual numbers).

A ``Jet2`` carries a value and three derivative slots::

    u = f + d1*e1 + d2*e2 + d12*e1*e2,    e1**2 = e2**2 = 0

Seeding ``d1`` on one variable and ``d2`` on another and reading ``d12``
off the result gives the exact mixed second partial in a single function
evaluation, with no truncation error.  All four slots may be floats or
numpy arrays of mutually broadcastable shapes, so a whole batch of
derivative directions (and a batch of evaluation points) is propagated
through one pass of ordinary arithmetic.

The generic functions (``sqrt``, ``sin`` ...) dispatch on type, so code
written against them runs unchanged on floats, numpy arrays and jets.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Jet2",
    "variable",
    "constant",
    "sqrt",
    "sin",
    "cos",
    "absolute",
    "arccos",
    "arctan2",
    "value_of",
]


class Jet2:
    __slots__ = ("f", "d1", "d2", "d12")

    def __init__(self, f, d1=0.0, d2=0.0, d12=0.0):
        self.f = f
        self.d1 = d1
        self.d2 = d2
        self.d12 = d12

    # -- arithmetic -------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.f + other.f, self.d1 + other.d1,
                        self.d2 + other.d2, self.d12 + other.d12)
        return Jet2(self.f + other, self.d1, self.d2, self.d12)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.f, -self.d1, -self.d2, -self.d12)

    def __sub__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.f - other.f, self.d1 - other.d1,
                        self.d2 - other.d2, self.d12 - other.d12)
        return Jet2(self.f - other, self.d1, self.d2, self.d12)

    def __rsub__(self, other):
        return Jet2(other - self.f, -self.d1, -self.d2, -self.d12)

    def __mul__(self, other):
        if isinstance(other, Jet2):
            return Jet2(
                self.f * other.f,
                self.d1 * other.f + self.f * other.d1,
                self.d2 * other.f + self.f * other.d2,
                self.d12 * other.f + self.d1 * other.d2
                + self.d2 * other.d1 + self.f * other.d12,
            )
        return Jet2(self.f * other, self.d1 * other,
                    self.d2 * other, self.d12 * other)

    __rmul__ = __mul__

    def _reciprocal(self):
        inv = 1.0 / self.f
        inv2 = inv * inv
        return Jet2(inv, -self.d1 * inv2, -self.d2 * inv2,
                    -self.d12 * inv2 + 2.0 * self.d1 * self.d2 * inv2 * inv)

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other._reciprocal()
        return Jet2(self.f / other, self.d1 / other,
                    self.d2 / other, self.d12 / other)

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def __pow__(self, n):
        if n == 2:
            return self * self
        if n == 3:
            return self * self * self
        return _unary(self, self.f ** n, n * self.f ** (n - 1),
                      n * (n - 1) * self.f ** (n - 2))

    def __repr__(self):
        return f"Jet2({self.f!r}, d1={self.d1!r}, d2={self.d2!r}, d12={self.d12!r})"


def _unary(u: Jet2, v, dv, ddv) -> Jet2:
    """Chain rule for g(u) with g(f)=v, g'(f)=dv, g''(f)=ddv."""
    return Jet2(v, dv * u.d1, dv * u.d2, dv * u.d12 + ddv * u.d1 * u.d2)


def variable(x, d1=0.0, d2=0.0) -> Jet2:
    return Jet2(x, d1, d2, 0.0)


def constant(x) -> Jet2:
    return Jet2(x, 0.0, 0.0, 0.0)


def value_of(u):
    return u.f if isinstance(u, Jet2) else u


def sqrt(u):
    if isinstance(u, Jet2):
        r = np.sqrt(u.f)
        return _unary(u, r, 0.5 / r, -0.25 / (r * u.f))
    return np.sqrt(u)


def sin(u):
    if isinstance(u, Jet2):
        s, c = np.sin(u.f), np.cos(u.f)
        return _unary(u, s, c, -s)
    return np.sin(u)


def cos(u):
    if isinstance(u, Jet2):
        s, c = np.sin(u.f), np.cos(u.f)
        return _unary(u, c, -s, -c)
    return np.cos(u)


def absolute(u):
    """|u| away from u = 0; the kink itself is out of scope for jets."""
    if isinstance(u, Jet2):
        s = np.sign(u.f)
        return Jet2(u.f * s, u.d1 * s, u.d2 * s, u.d12 * s)
    return np.abs(u)


def arccos(u):
    if isinstance(u, Jet2):
        w = 1.0 - u.f * u.f
        d = -1.0 / np.sqrt(w)
        return _unary(u, np.arccos(u.f), d, d * u.f / w)
    return np.arccos(u)


def arctan2(y, x):
    """Two-argument arctangent; exact first and mixed second derivatives."""
    if not isinstance(y, Jet2) and not isinstance(x, Jet2):
        return np.arctan2(y, x)
    if not isinstance(y, Jet2):
        y = constant(y)
    if not isinstance(x, Jet2):
        x = constant(x)
    r2 = x.f * x.f + y.f * y.f
    g1 = (x.f * y.d1 - y.f * x.d1) / r2
    g2 = (x.f * y.d2 - y.f * x.d2) / r2
    num12 = (x.d2 * y.d1 + x.f * y.d12 - y.d2 * x.d1 - y.f * x.d12)
    g12 = (num12 - g1 * (2.0 * x.f * x.d2 + 2.0 * y.f * y.d2)) / r2
    return Jet2(np.arctan2(y.f, x.f), g1, g2, g12)
