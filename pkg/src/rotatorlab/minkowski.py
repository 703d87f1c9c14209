"""Minkowski four-vector algebra.

Conventions used throughout the package:

* metric signature (+, -, -, -), index 0 is the time component;
* completely antisymmetric pseudotensor with eps^{0123} = +1;
* c = 1, all components carry the caller's units.

Only flat-space, index-free operations live here: the scalar product,
the triple contraction of the pseudotensor, the spin pseudovector built
from an antisymmetric rank-2 tensor and a momentum, boosts, and the
hyperbolic angle between timelike vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "FourVector",
    "AntisymmetricTensor2",
    "METRIC",
    "dot",
    "epsilon_contract3",
    "pauli_lubanski",
    "rapidity",
    "boost_matrix",
    "apply_lorentz",
]

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


def _levi_civita4() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm, sign in _permutations_with_parity((0, 1, 2, 3)):
        eps[perm] = sign
    return eps


def _permutations_with_parity(items):
    from itertools import permutations

    base = list(items)
    for perm in permutations(base):
        inversions = sum(
            1
            for i in range(len(perm))
            for j in range(i + 1, len(perm))
            if perm[i] > perm[j]
        )
        yield perm, (-1.0) ** inversions


EPSILON = _levi_civita4()


@dataclass(frozen=True)
class FourVector:
    """Contravariant components a^mu, index 0 = time."""

    c: np.ndarray

    def __init__(self, components):
        arr = np.asarray(components, dtype=float)
        if arr.shape != (4,):
            raise ValueError(f"FourVector needs 4 components, got shape {arr.shape}")
        object.__setattr__(self, "c", arr)

    @staticmethod
    def of(t, x, y, z) -> "FourVector":
        return FourVector(np.array([t, x, y, z], dtype=float))

    @staticmethod
    def from_spatial(t, vec3) -> "FourVector":
        vec3 = np.asarray(vec3, dtype=float)
        return FourVector(np.array([t, vec3[0], vec3[1], vec3[2]]))

    @property
    def t(self) -> float:
        return float(self.c[0])

    @property
    def spatial(self) -> np.ndarray:
        return self.c[1:]

    def lowered(self) -> np.ndarray:
        """Covariant components a_mu."""
        return METRIC @ self.c

    def dot(self, other: "FourVector") -> float:
        return dot(self, other)

    def norm2(self) -> float:
        return dot(self, self)

    def is_timelike(self, tol: float = 0.0) -> bool:
        return self.norm2() > tol

    def is_spacelike(self, tol: float = 0.0) -> bool:
        return self.norm2() < -tol

    def is_null(self, tol: float = 1e-12) -> bool:
        aa = self.norm2()
        scale = float(np.dot(self.c, self.c))
        return abs(aa) <= tol * max(scale, 1.0)

    def __add__(self, other: "FourVector") -> "FourVector":
        return FourVector(self.c + other.c)

    def __sub__(self, other: "FourVector") -> "FourVector":
        return FourVector(self.c - other.c)

    def __mul__(self, s: float) -> "FourVector":
        return FourVector(self.c * s)

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> "FourVector":
        return FourVector(self.c / s)

    def __neg__(self) -> "FourVector":
        return FourVector(-self.c)


# Index order of the six stored components of an antisymmetric M_{mu nu}.
_AS_INDEX = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class AntisymmetricTensor2:
    """Rank-2 antisymmetric tensor, covariant components M_{mu nu}.

    Only the six independent components are stored, in the order
    (01, 02, 03, 12, 13, 23); antisymmetry holds by construction.
    """

    six: np.ndarray

    def __init__(self, six):
        arr = np.asarray(six, dtype=float)
        if arr.shape != (6,):
            raise ValueError("AntisymmetricTensor2 stores exactly 6 components")
        object.__setattr__(self, "six", arr)

    @staticmethod
    def zero() -> "AntisymmetricTensor2":
        return AntisymmetricTensor2(np.zeros(6))

    @staticmethod
    def from_matrix(mat, tol: float = 1e-10) -> "AntisymmetricTensor2":
        mat = np.asarray(mat, dtype=float)
        scale = max(float(np.max(np.abs(mat))), 1.0)
        if np.max(np.abs(mat + mat.T)) > tol * scale:
            raise ValueError("matrix is not antisymmetric")
        return AntisymmetricTensor2(np.array([mat[i, j] for i, j in _AS_INDEX]))

    @staticmethod
    def wedge(a: FourVector, b: FourVector) -> "AntisymmetricTensor2":
        """a_mu b_nu - a_nu b_mu from two four-vectors (indices lowered)."""
        al, bl = a.lowered(), b.lowered()
        return AntisymmetricTensor2(
            np.array([al[i] * bl[j] - al[j] * bl[i] for i, j in _AS_INDEX])
        )

    def matrix(self) -> np.ndarray:
        mat = np.zeros((4, 4))
        for k, (i, j) in enumerate(_AS_INDEX):
            mat[i, j] = self.six[k]
            mat[j, i] = -self.six[k]
        return mat

    def __add__(self, other: "AntisymmetricTensor2") -> "AntisymmetricTensor2":
        return AntisymmetricTensor2(self.six + other.six)

    def __sub__(self, other: "AntisymmetricTensor2") -> "AntisymmetricTensor2":
        return AntisymmetricTensor2(self.six - other.six)

    def __mul__(self, s: float) -> "AntisymmetricTensor2":
        return AntisymmetricTensor2(self.six * s)

    __rmul__ = __mul__


def dot(a: FourVector, b: FourVector) -> float:
    ca, cb = a.c, b.c
    return float(ca[0] * cb[0] - ca[1] * cb[1] - ca[2] * cb[2] - ca[3] * cb[3])


def epsilon_contract3(a: FourVector, b: FourVector, c: FourVector) -> FourVector:
    """v^mu = eps^{mu nu alpha beta} a_nu b_alpha c_beta (arguments lowered)."""
    v = np.einsum("mnab,n,a,b->m", EPSILON, a.lowered(), b.lowered(), c.lowered())
    return FourVector(v)


def pauli_lubanski(M: AntisymmetricTensor2, P: FourVector) -> FourVector:
    """W^mu = -1/2 eps^{mu alpha beta gamma} M_{alpha beta} P_gamma.

    Antisymmetry of eps guarantees dot(W, P) = 0 up to rounding.
    """
    w = -0.5 * np.einsum("mabg,ab,g->m", EPSILON, M.matrix(), P.lowered())
    return FourVector(w)


def rapidity(u: FourVector, P: FourVector) -> float:
    """Hyperbolic angle Psi >= 0 between timelike u and P.

    cosh Psi = dot(u, P) / sqrt(uu * PP); the argument is clamped to
    [1, inf) because for timelike pairs it is analytically >= 1 and may
    dip below only through rounding.
    """
    uu, pp = u.norm2(), P.norm2()
    if uu <= 0.0 or pp <= 0.0:
        raise DomainError("rapidity needs two timelike four-vectors")
    arg = dot(u, P) / np.sqrt(uu * pp)
    if arg < 1.0:
        arg = 1.0
    return float(np.arccosh(arg))


def boost_matrix(beta) -> np.ndarray:
    """Lorentz boost with velocity beta (3-vector, |beta| < 1)."""
    beta = np.asarray(beta, dtype=float)
    b2 = float(np.dot(beta, beta))
    if b2 >= 1.0:
        raise DomainError("boost velocity must satisfy |beta| < 1")
    if b2 == 0.0:
        return np.eye(4)
    g = 1.0 / np.sqrt(1.0 - b2)
    L = np.eye(4)
    L[0, 0] = g
    L[0, 1:] = g * beta
    L[1:, 0] = g * beta
    L[1:, 1:] += (g - 1.0) / b2 * np.outer(beta, beta)
    return L


def apply_lorentz(L: np.ndarray, v: FourVector) -> FourVector:
    return FourVector(np.asarray(L) @ v.c)
