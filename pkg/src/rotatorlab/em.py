"""Minimal electromagnetic coupling and the uniform-field solution set.

The interaction term is L_I = e (xdot.A - Phi) in the lab chart, with the
uniform-field gauge fixed to Phi = -E.x, A = (1/2) H x r (an optional
gauge shift chi adds the total derivative e dchi/dt; the equations of
motion are gauge independent and tested to be).

Being linear in the velocities, L_I leaves the velocity Hessian
untouched, so the degenerate family keeps its kernel vector w in any
field, and contracting the Euler-Lagrange expressions with w yields the
velocity-level constraint

    (n - xdot).(E + xdot x H) = 0   <=>   F_mu_nu k^mu xdot^nu = 0.

Scalar evolution along a trajectory (s = proper length):

    (1/2) d(PP/m^2)/dt = (e/m^2) F_mu_nu P^mu xdot^nu,
    [1 + 2Q(f'/f + f''/f')] dQ/ds = (2Q/f)(e/m) F_mu_nu k^mu xdot^nu/(k.xdot),

the bracket being the universal Hessian factor: for the degenerate
family the left side vanishes identically and dQ/ds is indeterminate.

Co-rotating circular orbits in a uniform magnetic field H = H zhat
(canonical signs epsilon = +1, e > 0, H > 0; other signs follow by the
mirror maps z -> -z and t -> -t) exist with the fixed frequencies

    phidot_pm = +/- (2/ell) / mu_pm,
    mu_pm = sqrt(1 + (m/(e H R))^2) |1 -/+ 2R/ell| - 1,

admissible when mu_pm > 0 and R |phidot| < 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chart import ChartState
from .errors import (BranchInadmissibleError, DomainError,
                     IndeterminateEvolutionError, RotationlessError,
                     SuperluminalError)
from .minkowski import dot
from .model import CovariantKinematics, free_lagrangian_fn, lift_state, q_invariant
from .shapes import ShapeFunction

__all__ = [
    "GaugeShift",
    "UniformField",
    "CircularSolutionSpec",
    "interaction_lagrangian",
    "interaction_lagrangian_fn",
    "total_lagrangian_fn",
    "constraint_F",
    "constraint_chart",
    "q_evolution_rhs",
    "magnetic_mu",
    "magnetic_circular_frequency",
    "magnetic_circle_state",
    "CorotationProbeReport",
    "corotation_uniqueness_probe",
]


@dataclass(frozen=True)
class GaugeShift:
    """Gauge function chi supplied through its gradient and time derivative,
    both written in generic math so they can flow through jets."""

    grad: Callable
    dt: Callable
    label: str = "custom"

    @staticmethod
    def quadratic_x1x2() -> "GaugeShift":
        return GaugeShift(grad=lambda x1, x2, x3, t: (x2, x1, 0.0),
                          dt=lambda x1, x2, x3, t: 0.0,
                          label="chi = x1*x2")


@dataclass(frozen=True)
class UniformField:
    """Uniform electric/magnetic field pair with a fixed potential gauge."""

    E: np.ndarray
    H: np.ndarray
    gauge: GaugeShift | None = None

    def __init__(self, E=(0.0, 0.0, 0.0), H=(0.0, 0.0, 0.0), gauge=None):
        object.__setattr__(self, "E", np.asarray(E, dtype=float))
        object.__setattr__(self, "H", np.asarray(H, dtype=float))
        object.__setattr__(self, "gauge", gauge)

    def potentials(self, x1, x2, x3, t):
        """(Phi, A1, A2, A3) in generic math: Phi = -E.x, A = H x r / 2."""
        E, H = self.E, self.H
        phi = -(E[0] * x1 + E[1] * x2 + E[2] * x3)
        a1 = 0.5 * (H[1] * x3 - H[2] * x2)
        a2 = 0.5 * (H[2] * x1 - H[0] * x3)
        a3 = 0.5 * (H[0] * x2 - H[1] * x1)
        if self.gauge is not None:
            g1, g2, g3 = self.gauge.grad(x1, x2, x3, t)
            a1, a2, a3 = a1 + g1, a2 + g2, a3 + g3
            phi = phi - self.gauge.dt(x1, x2, x3, t)
        return phi, a1, a2, a3

    def F_lowered(self) -> np.ndarray:
        """Field tensor F_{mu nu}: F_{0i} = E_i, F_{ij} = -eps_{ijk} H_k."""
        F = np.zeros((4, 4))
        F[0, 1:] = self.E
        F[1:, 0] = -self.E
        F[1, 2], F[1, 3], F[2, 3] = -self.H[2], self.H[1], -self.H[0]
        F[2, 1], F[3, 1], F[3, 2] = self.H[2], -self.H[1], self.H[0]
        return F

    def rotated(self, R: np.ndarray) -> "UniformField":
        """Field as seen in a frame rotated by R (x' = R x)."""
        gauge = self.gauge
        if gauge is not None:
            Rt = np.asarray(R).T

            def grad_rot(x1, x2, x3, t, _g=gauge.grad, _R=np.asarray(R), _Rt=Rt):
                xl = (_Rt[0, 0] * x1 + _Rt[0, 1] * x2 + _Rt[0, 2] * x3,
                      _Rt[1, 0] * x1 + _Rt[1, 1] * x2 + _Rt[1, 2] * x3,
                      _Rt[2, 0] * x1 + _Rt[2, 1] * x2 + _Rt[2, 2] * x3)
                g = _g(*xl, t)
                return (_R[0, 0] * g[0] + _R[0, 1] * g[1] + _R[0, 2] * g[2],
                        _R[1, 0] * g[0] + _R[1, 1] * g[1] + _R[1, 2] * g[2],
                        _R[2, 0] * g[0] + _R[2, 1] * g[1] + _R[2, 2] * g[2])

            def dt_rot(x1, x2, x3, t, _d=gauge.dt, _Rt=Rt):
                xl = (_Rt[0, 0] * x1 + _Rt[0, 1] * x2 + _Rt[0, 2] * x3,
                      _Rt[1, 0] * x1 + _Rt[1, 1] * x2 + _Rt[1, 2] * x3,
                      _Rt[2, 0] * x1 + _Rt[2, 1] * x2 + _Rt[2, 2] * x3)
                return _d(*xl, t)

            gauge = GaugeShift(grad=grad_rot, dt=dt_rot, label=gauge.label)
        return UniformField(E=R @ self.E, H=R @ self.H, gauge=gauge)


def interaction_lagrangian_fn(charge: float, field: UniformField):
    """L_I = e (xdot.A(x,t) - Phi(x,t)) as a generic-math callable."""

    def L_I(q, v, t):
        phi, a1, a2, a3 = field.potentials(q[2], q[3], q[4], t)
        return charge * (v[2] * a1 + v[3] * a2 + v[4] * a3 - phi)

    return L_I


def interaction_lagrangian(charge: float, field: UniformField,
                           s: ChartState) -> float:
    q, v = list(s.q5()), list(s.v5())
    return float(interaction_lagrangian_fn(charge, field)(q, v, s.t))


def total_lagrangian_fn(shape: ShapeFunction, field: UniformField | None,
                        charge: float):
    L_free = free_lagrangian_fn(shape)
    if field is None or charge == 0.0:
        return L_free
    L_int = interaction_lagrangian_fn(charge, field)

    def L(q, v, t):
        return L_free(q, v, t) + L_int(q, v, t)

    return L


def constraint_F(kin: CovariantKinematics, field: UniformField) -> float:
    """F_{mu nu} k^mu xdot^nu; equals -(n - xdot).(E + xdot x H) on a lift."""
    return float(kin.k.c @ field.F_lowered() @ kin.xdot.c)


def constraint_chart(s: ChartState, field: UniformField) -> float:
    """(n - xdot).(E + xdot x H), the chart form of the constraint."""
    n, v = s.n, s.xdot
    return float((n - v) @ (field.E + np.cross(v, field.H)))


def q_evolution_rhs(shape: ShapeFunction, s: ChartState, field: UniformField,
                    charge: float, *, factor_tol: float = 1e-12) -> float:
    """dQ/ds from the scalar evolution law, s the proper length.

    Raises for the degenerate family, where the equation degenerates to
    0 = 0 and carries no information about dQ/ds.
    """
    from .hessian import universal_factor

    Q = q_invariant(s, shape.ell)
    factor = universal_factor(shape, Q)
    if shape.hessian_singular or abs(factor) <= factor_tol:
        raise IndeterminateEvolutionError(
            "indeterminate: universal factor is identically zero for this shape")
    f, _, _ = shape.eval(Q)
    kin = lift_state(s)
    kx = dot(kin.k, kin.xdot)
    Fkx = constraint_F(kin, field)
    return float((2.0 * Q / f) * (charge / shape.m) * Fkx / (kx * factor))


# -- co-rotating circles in a uniform magnetic field -----------------------


@dataclass(frozen=True)
class CircularSolutionSpec:
    """Parameters of a co-rotating circular orbit, field along +z."""

    R: float
    branch: str            # "plus" | "minus"
    m: float
    ell: float
    e: float
    H: float
    epsilon: int = 1

    def __post_init__(self):
        if self.R <= 0:
            raise DomainError("circle radius must be positive")
        if self.branch not in ("plus", "minus"):
            raise DomainError("branch must be 'plus' or 'minus'")
        if self.e <= 0 or self.H <= 0 or self.epsilon != 1:
            raise BranchInadmissibleError(
                "frequencies are tabulated for the canonical signs "
                "epsilon = +1, e > 0, H > 0; map other signs by the "
                "mirror symmetries z -> -z, t -> -t")


def magnetic_mu(spec: CircularSolutionSpec) -> float:
    root = np.sqrt(1.0 + (spec.m / (spec.e * spec.H * spec.R)) ** 2)
    sign = -1.0 if spec.branch == "plus" else 1.0
    return float(root * abs(1.0 + sign * 2.0 * spec.R / spec.ell) - 1.0)


def magnetic_circular_frequency(spec: CircularSolutionSpec) -> float:
    """The fixed orbital frequency phidot of the admissible branch."""
    mu = magnetic_mu(spec)
    if mu <= 0.0:
        raise BranchInadmissibleError(
            f"branch {spec.branch} inadmissible at R={spec.R}: mu={mu} <= 0")
    phidot = (2.0 / spec.ell) / mu
    if spec.branch == "minus":
        phidot = -phidot
    if spec.R * abs(phidot) >= 1.0:
        raise SuperluminalError(
            f"branch {spec.branch} at R={spec.R}: speed R|phidot| = "
            f"{spec.R * abs(phidot)} >= 1")
    return float(phidot)


def magnetic_circle_state(spec: CircularSolutionSpec, t: float = 0.0,
                          phase0: float = 0.0,
                          phidot: float | None = None) -> ChartState:
    """Chart state on the circle at time t (z axis along the field).

    The direction is co-rotational, n parallel to xdot: the position
    azimuth is phase = phidot t + phase0 and the direction azimuth leads
    it by epsilon pi/2.
    """
    if phidot is None:
        phidot = magnetic_circular_frequency(spec)
    eps = float(spec.epsilon)
    ph = phidot * t + phase0
    x = spec.R * np.array([np.cos(ph), np.sin(ph), 0.0])
    xdot = spec.R * phidot * np.array([-np.sin(ph), np.cos(ph), 0.0])
    return ChartState(x=x, theta=np.pi / 2.0, phi=(ph + eps * np.pi / 2.0),
                      xdot=xdot, theta_dot=0.0, phi_dot=phidot, t=t)


@dataclass(frozen=True)
class CorotationProbeReport:
    """Angle between the Hessian kernel line and the frequency-variation
    line allowed by the constrained co-rotating circle ansatz."""

    kernel_empty: bool
    angle_rad: float | None
    kernel: np.ndarray | None
    variation: np.ndarray | None
    w_dot_grad_q: float | None   # kernel against the position gradient of
    w_dot_grad_v: float | None   # the constraint and its velocity gradient
    note: str


def corotation_uniqueness_probe(shape: ShapeFunction, *, R: float,
                                phidot: float, H: float,
                                epsilon: int = 1) -> CorotationProbeReport:
    """Probe whether velocity variations along the kernel vector are
    compatible with constrained evolution on a co-rotating circle.

    The only velocity variation preserving the co-rotating circular
    ansatz is a frequency change, direction a = (0, 1, eps R n); the
    probe reports the angle between span{w} and span{a}.  Angle zero
    reproduces the free-motion indeterminacy (R = ell/2, co-rotation
    with eps phidot = |phidot|); a nonzero angle means the constrained
    motion cannot absorb a kernel-direction variation, so the frequency
    is fixed.
    """
    if not shape.hessian_singular:
        return CorotationProbeReport(kernel_empty=True, angle_rad=None,
                                     kernel=None, variation=None,
                                     w_dot_grad_q=None, w_dot_grad_v=None,
                                     note="kernel empty, trivially unique")
    from .hessian import analytic_kernel

    eps = float(epsilon)
    s = ChartState(x=np.array([R, 0.0, 0.0]), theta=np.pi / 2.0,
                   phi=eps * np.pi / 2.0,
                   xdot=R * phidot * np.array([0.0, 1.0, 0.0]),
                   theta_dot=0.0, phi_dot=phidot)
    w = analytic_kernel(shape, s)
    n = s.n
    a = np.array([0.0, 1.0, eps * R * n[0], eps * R * n[1], eps * R * n[2]])
    cosang = abs(w @ a) / (np.linalg.norm(w) * np.linalg.norm(a))
    angle = float(np.arccos(min(1.0, cosang)))

    # linearized constraint g = H.(n x xdot) contracted with w
    Hvec = np.array([0.0, 0.0, H])
    grad_v = np.cross(Hvec, n)                      # dg/dxdot
    st = np.sin(s.theta)
    e_theta = np.array([np.cos(s.theta) * np.cos(s.phi),
                        np.cos(s.theta) * np.sin(s.phi), -st])
    e_phi_sin = np.array([-st * np.sin(s.phi), st * np.cos(s.phi), 0.0])
    dg_dtheta = float(Hvec @ np.cross(e_theta, s.xdot))
    dg_dphi = float(Hvec @ np.cross(e_phi_sin, s.xdot))
    w_gq = w[0] * dg_dtheta + w[1] * dg_dphi
    w_gv = float(w[2:] @ grad_v)
    return CorotationProbeReport(kernel_empty=False, angle_rad=angle,
                                 kernel=w, variation=a,
                                 w_dot_grad_q=float(w_gq),
                                 w_dot_grad_v=w_gv,
                                 note="angle 0 reproduces free-motion "
                                      "indeterminacy")
