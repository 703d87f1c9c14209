"""Rotator family on the physical chart: invariant Q, reduced Lagrangian,
covariant lift, canonical momenta and the Poincare charges.

Momentum sign convention matching the (+,-,-,-) signature:
P_mu = -dL/d(xdot^mu), Pi_mu = -dL/d(kdot^mu).  Closed forms for the
free action -m Integral sqrt(xdot.xdot) f(Q) dtau:

    P  = m f(Q)/sqrt(xdot.xdot) xdot - 2 m Q f'(Q) sqrt(xdot.xdot)/(k.xdot) k
    Pi = 2 m Q f'(Q) sqrt(xdot.xdot)/(kdot.kdot) kdot

with the angular-momentum tensor M = x ^ P + k ^ Pi and the spin
pseudovector W from ``minkowski.pauli_lubanski``.  The two Casimir
scalars admit the closed forms

    PP = m^2 (f^2 - 4 Q f f'),      WW = -4 m^4 ell^2 Q f^2 f'^2,

which reduce to the fixed pair (m^2, -m^4 ell^2 / 4) exactly on the
degenerate branches f = sqrt(1 +/- sqrt(Q)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .chart import ChartState, needs_pole_rotation, rotate_state, POLE_ROTATION
from .errors import ChartSingularityError, DomainError, RotationlessError, SuperluminalError
from .minkowski import AntisymmetricTensor2, FourVector, dot, pauli_lubanski
from .shapes import ShapeFunction

__all__ = [
    "CovariantKinematics",
    "ChargeSet",
    "q_invariant",
    "q_invariant_covariant",
    "lagrangian",
    "free_lagrangian_fn",
    "lift_state",
    "momenta",
    "charges",
    "casimirs_closed_form",
    "rotation_speed",
]

_COLLINEAR_TOL = 1e-12


@dataclass(frozen=True)
class CovariantKinematics:
    """Lifted state in the gauge tau = x^0, k^0 = 1."""

    x: FourVector
    xdot: FourVector
    k: FourVector
    kdot: FourVector

    def validate(self, tol: float = 1e-12) -> "CovariantKinematics":
        kk = self.k.norm2()
        if abs(kk) > tol * max(1.0, float(np.dot(self.k.c, self.k.c))):
            raise DomainError(f"k is not null (kk = {kk})")
        return self


@dataclass(frozen=True)
class ChargeSet:
    """Noether momenta and the derived Poincare invariants."""

    P: FourVector
    Pi: FourVector
    M: AntisymmetricTensor2
    W: FourVector
    PP: float
    WW: float


def q_invariant(s: ChartState, ell: float) -> float:
    """Q = ell^2 (theta_dot^2 + phi_dot^2 sin^2 theta) / (1 - n.xdot)^2."""
    one_minus = 1.0 - s.n_dot_xdot
    if one_minus <= _COLLINEAR_TOL:
        raise ChartSingularityError(
            "null-direction collinear with velocity (1 - n.xdot <= tol)")
    return float(ell ** 2 * s.ndot_norm2 / one_minus ** 2)


def q_invariant_covariant(kin: CovariantKinematics, ell: float) -> float:
    """Q = -ell^2 (kdot.kdot) / (k.xdot)^2 on lifted kinematics (frame free)."""
    kx = dot(kin.k, kin.xdot)
    if kx == 0.0:
        raise ChartSingularityError("k.xdot = 0: degenerate lift")
    return float(-(ell ** 2) * dot(kin.kdot, kin.kdot) / kx ** 2)


def lagrangian(shape: ShapeFunction, s: ChartState) -> float:
    """Reduced Lagrangian L = -m sqrt(1 - xdot.xdot) f(Q)."""
    s.validate()
    Q = q_invariant(s, shape.ell)
    f, _, _ = shape.eval(Q)
    return float(-shape.m * np.sqrt(1.0 - s.speed2) * f)


def free_lagrangian_fn(shape: ShapeFunction):
    """Free Lagrangian as a generic-math callable L(q, v, t).

    q = (theta, phi, x1, x2, x3) and v are float or Jet2 entries, so the
    same code path serves plain evaluation, forward-mode derivatives and
    batched sweeps.  No domain checks here: callers guard admissibility.
    """
    m, ell2 = shape.m, shape.ell ** 2

    def L(q, v, t):
        theta, phi = q[0], q[1]
        thd, phd = v[0], v[1]
        v1, v2, v3 = v[2], v[3], v[4]
        st, ct = jets.sin(theta), jets.cos(theta)
        sp, cp = jets.sin(phi), jets.cos(phi)
        vv = v1 * v1 + v2 * v2 + v3 * v3
        nv = st * cp * v1 + st * sp * v2 + ct * v3
        one_minus = 1.0 - nv
        ndot2 = thd * thd + (phd * st) * (phd * st)
        Q = ell2 * ndot2 / (one_minus * one_minus)
        return -m * jets.sqrt(1.0 - vv) * shape.raw(Q)

    return L


def lift_state(s: ChartState) -> CovariantKinematics:
    """Covariant lift x = (t, x), xdot = (1, xdot), k = (1, n), kdot = (0, ndot)."""
    return CovariantKinematics(
        x=FourVector.from_spatial(s.t, s.x),
        xdot=FourVector.from_spatial(1.0, s.xdot),
        k=FourVector.from_spatial(1.0, s.n),
        kdot=FourVector.from_spatial(0.0, s.ndot),
    )


def momenta(shape: ShapeFunction, kin: CovariantKinematics) -> ChargeSet:
    """Canonical momenta P, Pi and the assembled Noether charges M, W."""
    xx = dot(kin.xdot, kin.xdot)
    if xx <= 0.0:
        raise ChartSingularityError("xdot must be timelike")
    kx = dot(kin.k, kin.xdot)
    if kx == 0.0:
        raise ChartSingularityError("k.xdot = 0")
    root = np.sqrt(xx)
    kdkd = dot(kin.kdot, kin.kdot)

    if kdkd == 0.0:
        # rotationless branch: Pi -> 0 only when sqrt(Q) f'(Q) -> 0 there
        if not shape.smooth_at_zero:
            raise RotationlessError(
                "rotationless singular: Pi has no limit for shapes with a "
                "sqrt(Q) term")
        f0, _, _ = shape.eval(0.0)
        P = (shape.m * f0 / root) * kin.xdot
        Pi = FourVector(np.zeros(4))
    else:
        Q = q_invariant_covariant(kin, shape.ell)
        f, fp, _ = shape.eval(Q)
        qfp = Q * fp
        P = (shape.m * f / root) * kin.xdot - (2.0 * shape.m * qfp * root / kx) * kin.k
        Pi = (2.0 * shape.m * qfp * root / kdkd) * kin.kdot

    M = AntisymmetricTensor2.wedge(kin.x, P) + AntisymmetricTensor2.wedge(kin.k, Pi)
    W = pauli_lubanski(M, P)
    return ChargeSet(P=P, Pi=Pi, M=M, W=W, PP=dot(P, P), WW=dot(W, W))


def charges(shape: ShapeFunction, s: ChartState) -> ChargeSet:
    """Noether charges of a chart state, pole-safe.

    Near sin(theta) = 0 the state is evaluated in a rotated frame and the
    resulting vectors/tensors are rotated back, so the returned charges
    always refer to the caller's frame.
    """
    if needs_pole_rotation(s.theta):
        R = POLE_ROTATION
        cs = momenta(shape, lift_state(rotate_state(s, R)))
        return _rotate_charges_back(cs, R)
    return momenta(shape, lift_state(s))


def _rotate_charges_back(cs: ChargeSet, R: np.ndarray) -> ChargeSet:
    Lam = np.eye(4)
    Lam[1:, 1:] = R.T  # inverse spatial rotation
    P = FourVector(Lam @ cs.P.c)
    Pi = FourVector(Lam @ cs.Pi.c)
    # lowered antisymmetric tensor transforms with the same block rotation
    M = AntisymmetricTensor2.from_matrix(Lam @ cs.M.matrix() @ Lam.T)
    W = FourVector(Lam @ cs.W.c)
    return ChargeSet(P=P, Pi=Pi, M=M, W=W, PP=cs.PP, WW=cs.WW)


def casimirs_closed_form(shape: ShapeFunction, Q: float) -> tuple[float, float]:
    """(PP, WW) = (m^2 (f^2 - 4 Q f f'), -4 m^4 ell^2 Q f^2 f'^2)."""
    f, fp, _ = shape.eval(Q)
    m2 = shape.m ** 2
    PP = m2 * (f * f - 4.0 * Q * f * fp)
    WW = -4.0 * m2 * m2 * shape.ell ** 2 * Q * (f * fp) ** 2
    return float(PP), float(WW)


def rotation_speed(shape: ShapeFunction, Q: float) -> float:
    """tanh(Psi) = 2 Q f' / (f - 2 Q f'), the rotation speed in the CM frame."""
    f, fp, _ = shape.eval(Q)
    denom = f - 2.0 * Q * fp
    if denom == 0.0:
        raise SuperluminalError("rotation speed diverges (f - 2 Q f' = 0)")
    speed = 2.0 * Q * fp / denom
    if abs(speed) >= 1.0:
        raise SuperluminalError(
            f"superluminal shape/Q combination (tanh Psi = {speed})")
    return float(speed)
