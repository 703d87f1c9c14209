"""The five-coordinate physical chart: R^3 positions plus a direction on S^2.

State is carried in lab time t with the gauge tau = x^0, k^0 = 1, so the
configuration variables are q = (theta, phi, x1, x2, x3) and the
velocities are plain time derivatives.  All 5-vectors in this package
(Hessian rows, kernel vectors, Euler-Lagrange right-hand sides,
accelerations) use the angular-first ordering (theta, phi, x1, x2, x3).

Admissibility: |xdot| < 1 and 1 - n.xdot > 0 where n(theta, phi) is the
unit direction.  The spherical chart degenerates at sin(theta) = 0; code
that is chart-sensitive near the poles re-expresses the state in a
globally rotated frame (see ``pole_rotation``) and works there.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ChartSingularityError

__all__ = [
    "ChartState",
    "n_vec",
    "ndot_vec",
    "angles_from_n",
    "angle_rates_from_ndot",
    "POLE_SIN_THRESHOLD",
    "POLE_ROTATION",
    "needs_pole_rotation",
    "rotate_state",
    "random_admissible_state",
]

POLE_SIN_THRESHOLD = 0.1

# Fixed rotation (about the y axis by pi/2) taking both poles to the equator.
POLE_ROTATION = np.array([[0.0, 0.0, 1.0],
                          [0.0, 1.0, 0.0],
                          [-1.0, 0.0, 0.0]])


def n_vec(theta: float, phi: float) -> np.ndarray:
    st, ct = np.sin(theta), np.cos(theta)
    return np.array([st * np.cos(phi), st * np.sin(phi), ct])


def ndot_vec(theta, phi, theta_dot, phi_dot) -> np.ndarray:
    """d/dt of n(theta(t), phi(t))."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    e_theta = np.array([ct * cp, ct * sp, -st])
    e_phi_sin = np.array([-st * sp, st * cp, 0.0])
    return theta_dot * e_theta + phi_dot * e_phi_sin


def angles_from_n(n: np.ndarray) -> tuple[float, float]:
    nz = min(1.0, max(-1.0, float(n[2])))
    return float(np.arccos(nz)), float(np.arctan2(n[1], n[0])) % (2.0 * np.pi)


def angle_rates_from_ndot(theta, phi, ndot) -> tuple[float, float]:
    """Invert ndot = theta_dot e_theta + phi_dot sin(theta) e_phi."""
    st = np.sin(theta)
    if st == 0.0:
        raise ChartSingularityError("angle rates undefined exactly at a pole")
    theta_dot = -float(ndot[2]) / st
    cp, sp = np.cos(phi), np.sin(phi)
    phi_dot = float(-sp * ndot[0] + cp * ndot[1]) / st
    return theta_dot, phi_dot


@dataclass(frozen=True)
class ChartState:
    """Position, direction angles, their time derivatives and lab time."""

    x: np.ndarray
    theta: float
    phi: float
    xdot: np.ndarray
    theta_dot: float
    phi_dot: float
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "xdot", np.asarray(self.xdot, dtype=float))

    # -- derived geometry ---------------------------------------------

    @property
    def n(self) -> np.ndarray:
        return n_vec(self.theta, self.phi)

    @property
    def ndot(self) -> np.ndarray:
        return ndot_vec(self.theta, self.phi, self.theta_dot, self.phi_dot)

    @property
    def ndot_norm2(self) -> float:
        return self.theta_dot ** 2 + (self.phi_dot * np.sin(self.theta)) ** 2

    @property
    def speed2(self) -> float:
        return float(np.dot(self.xdot, self.xdot))

    @property
    def n_dot_xdot(self) -> float:
        return float(np.dot(self.n, self.xdot))

    def validate(self, tol: float = 1e-12) -> "ChartState":
        if self.speed2 >= 1.0:
            raise ChartSingularityError(f"|xdot| >= 1 (speed^2 = {self.speed2})")
        if 1.0 - self.n_dot_xdot <= tol:
            raise ChartSingularityError(
                "null-direction collinear with velocity (1 - n.xdot <= tol)")
        return self

    # -- 5-vector packing (angular-first ordering) ----------------------

    def q5(self) -> np.ndarray:
        return np.array([self.theta, self.phi, *self.x])

    def v5(self) -> np.ndarray:
        return np.array([self.theta_dot, self.phi_dot, *self.xdot])

    @staticmethod
    def from_q5v5(q: np.ndarray, v: np.ndarray, t: float = 0.0) -> "ChartState":
        return ChartState(x=np.array(q[2:5]), theta=float(q[0]), phi=float(q[1]),
                          xdot=np.array(v[2:5]), theta_dot=float(v[0]),
                          phi_dot=float(v[1]), t=t)

    def with_time(self, t: float) -> "ChartState":
        return replace(self, t=t)


def needs_pole_rotation(theta: float, threshold: float = POLE_SIN_THRESHOLD) -> bool:
    return np.sin(theta) < threshold


def rotate_state(s: ChartState, R: np.ndarray) -> ChartState:
    """Re-express the same physical state in a globally rotated frame.

    Positions, velocities and the S^2 direction all rotate; this is an
    exact change of chart, no approximation involved.
    """
    n_new = R @ s.n
    ndot_new = R @ s.ndot
    theta, phi = angles_from_n(n_new)
    theta_dot, phi_dot = angle_rates_from_ndot(theta, phi, ndot_new)
    return ChartState(x=R @ s.x, theta=theta, phi=phi, xdot=R @ s.xdot,
                      theta_dot=theta_dot, phi_dot=phi_dot, t=s.t)


def random_admissible_state(rng: np.random.Generator, *,
                            speed_max: float = 0.7,
                            sqrt_q_max: float = 0.9,
                            ell: float = 1.0,
                            pole_margin: float = 0.3,
                            t: float = 0.0) -> ChartState:
    """Draw a generic admissible state with Q bounded away from 0.

    sqrt(Q) lands in [0.1, sqrt_q_max] * (a 1 - n.xdot factor), keeping
    the state inside every built-in shape domain, including the
    fundamental minus branch when sqrt_q_max < 1.
    """
    theta = float(rng.uniform(pole_margin, np.pi - pole_margin))
    phi = float(rng.uniform(0.0, 2.0 * np.pi))
    x = rng.uniform(-2.0, 2.0, size=3)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    xdot = direction * rng.uniform(0.0, speed_max)

    # pick |ndot| to hit the requested sqrt(Q) = ell |ndot| / (1 - n.xdot)
    n = n_vec(theta, phi)
    one_minus = 1.0 - float(np.dot(n, xdot))
    target = rng.uniform(0.1, sqrt_q_max) * one_minus / ell
    alpha = rng.uniform(0.0, 2.0 * np.pi)
    theta_dot = target * np.cos(alpha)
    phi_dot = target * np.sin(alpha) / np.sin(theta)
    return ChartState(x=x, theta=theta, phi=phi, xdot=xdot,
                      theta_dot=float(theta_dot), phi_dot=float(phi_dot),
                      t=t).validate()
