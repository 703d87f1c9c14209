"""Shape functions f(Q) selecting a member of the rotator family.

The reduced Lagrangian of every model in the family is
``L = -m sqrt(1 - xdot.xdot) f(Q)`` with the rotation invariant
``Q = ell^2 |ndot|^2 / (1 - n.xdot)^2  >= 0``.  A shape must satisfy
f(Q) > 0 and f'(Q) != 0 on its declared Q domain.

Built-in shapes
---------------
``fundamental+``     f = sqrt(1 + sqrt(Q)),        Q > 0
``fundamental-``     f = sqrt(1 - sqrt(Q)),        0 < Q < 1
``sqrt_poly:a=<r>``  f = sqrt(1 + a^2 sqrt(Q)),    Q > 0
``rational_sqrt``    f = 1 + sqrt(Q),              Q > 0
``smooth``           f = sqrt(1 + Q),              Q >= 0

The first three all have an identically singular velocity Hessian (a
sqrt_poly shape is the '+' shape with the length parameter rescaled to
a^2 ell); the last two are regular and serve as the phenomenological
reference models.  Custom shapes take a coefficient list c_k for
f = sqrt(sum_k c_k Q^{k/2}) with a user-declared Q domain; twice
continuous differentiability on that domain is the caller's contract.

Derivatives f', f'' are produced by one second-order jet evaluation of
the defining expression, exact to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import DomainError, NonSmoothPointError

__all__ = ["ShapeFunction", "parse_shape_tag", "BUILTIN_TAGS"]

BUILTIN_TAGS = ("fundamental+", "fundamental-", "rational_sqrt", "smooth")


@dataclass(frozen=True)
class ShapeFunction:
    """A shape f(Q) plus the model's dimensional parameters m and ell."""

    tag: str
    m: float
    ell: float
    a: float = 1.0                      # sqrt_poly parameter
    coeffs: tuple = ()                  # custom: f = sqrt(polyval(c, sqrt(Q)))
    q_domain: tuple = (0.0, np.inf)     # open interval unless smooth at zero

    def __post_init__(self):
        if self.m <= 0 or self.ell <= 0:
            raise DomainError("mass and length parameters must be positive")
        if self.tag == "sqrt_poly" and self.a <= 0:
            raise DomainError("sqrt_poly needs a > 0")
        if self.tag == "custom" and not self.coeffs:
            raise DomainError("custom shape needs a coefficient list")

    # -- classification ---------------------------------------------

    @property
    def contains_sqrt_q(self) -> bool:
        if self.tag in ("fundamental+", "fundamental-", "sqrt_poly", "rational_sqrt"):
            return True
        if self.tag == "custom":
            return any(c != 0.0 for c in self.coeffs[1::2])
        return False

    @property
    def smooth_at_zero(self) -> bool:
        return not self.contains_sqrt_q

    @property
    def hessian_singular(self) -> bool:
        """True when det H = 0 identically (degenerate family members)."""
        return self.tag in ("fundamental+", "fundamental-", "sqrt_poly")

    @property
    def c2(self) -> float:
        """Sign of the sqrt(Q) term in the degenerate family sqrt(1 + c2 sqrt(Q))."""
        return -1.0 if self.tag == "fundamental-" else 1.0

    @property
    def ell_effective(self) -> float:
        """Length scale entering the kernel-vector closed form."""
        if self.tag == "sqrt_poly":
            return self.a ** 2 * self.ell
        return self.ell

    @property
    def label(self) -> str:
        if self.tag == "sqrt_poly":
            return f"sqrt_poly:a={self.a:g}"
        if self.tag == "custom":
            return "custom:" + ",".join(f"{c:g}" for c in self.coeffs)
        return self.tag

    # -- evaluation --------------------------------------------------

    def check_domain(self, Q) -> None:
        q = np.asarray(Q, dtype=float)
        if np.any(q < 0.0):
            raise DomainError("Q must be nonnegative")
        if self.contains_sqrt_q and np.any(q == 0.0):
            raise NonSmoothPointError(
                f"shape {self.label} is non-smooth at Q = 0 (sqrt(Q) term)")
        if self.tag == "fundamental-" and np.any(np.sqrt(q) >= 1.0):
            raise DomainError("fundamental- requires sqrt(Q) < 1")
        lo, hi = self.q_domain
        if np.any(q < lo) or np.any(q > hi):
            raise DomainError(f"Q outside declared domain [{lo}, {hi}]")

    def raw(self, Q):
        """f(Q) in generic math; Q may be float, array or Jet2."""
        if self.tag == "smooth":
            return jets.sqrt(1.0 + Q)
        if self.tag == "custom" and self.smooth_at_zero:
            # even powers of sqrt(Q) only: evaluate as a polynomial in Q
            acc, p = self.coeffs[0] + 0.0 * Q, None
            for c in self.coeffs[2::2]:
                p = Q if p is None else p * Q
                acc = acc + c * p
            return jets.sqrt(acc)
        u = jets.sqrt(Q)
        if self.tag == "fundamental+":
            return jets.sqrt(1.0 + u)
        if self.tag == "fundamental-":
            return jets.sqrt(1.0 - u)
        if self.tag == "sqrt_poly":
            return jets.sqrt(1.0 + self.a ** 2 * u)
        if self.tag == "rational_sqrt":
            return 1.0 + u
        if self.tag == "custom":
            acc, p = self.coeffs[0] + 0.0 * u, None
            for c in self.coeffs[1:]:
                p = u if p is None else p * u
                if c != 0.0:
                    acc = acc + c * p
            return jets.sqrt(acc)
        raise DomainError(f"unknown shape tag {self.tag!r}")

    def eval(self, Q):
        """Return (f, f', f'') at Q (scalar or array), domain-checked."""
        self.check_domain(Q)
        j = self.raw(jets.Jet2(np.asarray(Q, dtype=float), 1.0, 1.0, 0.0))
        f, fp, fpp = j.f, j.d1, j.d12
        if np.any(f <= 0.0):
            raise DomainError(f"shape {self.label}: f(Q) <= 0 in requested range")
        if np.any(fp == 0.0):
            raise DomainError(f"shape {self.label}: f'(Q) = 0 in requested range")
        if np.isscalar(Q) or np.asarray(Q).ndim == 0:
            return float(f), float(fp), float(fpp)
        return f, fp, fpp


def _fundamental(tag: str, m: float, ell: float) -> ShapeFunction:
    hi = 1.0 if tag == "fundamental-" else np.inf
    return ShapeFunction(tag, m, ell, q_domain=(0.0, hi))


def parse_shape_tag(tag: str, m: float, ell: float) -> ShapeFunction:
    """Build a ShapeFunction from its scenario-config string tag."""
    tag = tag.strip()
    if tag in ("fundamental+", "fundamental-"):
        return _fundamental(tag, m, ell)
    if tag in ("rational_sqrt", "smooth"):
        return ShapeFunction(tag, m, ell)
    if tag.startswith("sqrt_poly:"):
        kv = tag.split(":", 1)[1]
        key, _, val = kv.partition("=")
        if key != "a":
            raise DomainError(f"sqrt_poly takes a=<real>, got {kv!r}")
        return ShapeFunction("sqrt_poly", m, ell, a=float(val))
    raise DomainError(f"unknown shape tag {tag!r}")
