"""Velocity Hessian of the reduced Lagrangian: closed-form blocks,
determinant, rank/kernel diagnostics and the kernel-contracted
constraint functional.

Closed forms are stated in the dimensionless chart (positions in units
of ell, time u = t/ell), where the Lagrangian is proportional to
``Lhat(V, W) = sqrt(1 - V.V) f(Q)``, ``Q = W.W/(1 - N.V)^2`` with

    V = xdot,    W = ell * (theta_dot, phi_dot sin(theta)),    N = n.

Derivatives are taken with respect to (W1, W2, V1, V2, V3), angular
block first.  Writing c = 2 Q f' sqrt(1-V.V)/W.W and r = Q f''/f', the
symmetric 5x5 Hessian of Lhat has blocks

    A = c [I + 2r W W^T / W.W]                                   (2x2)
    B = c [2(1+r) W N^T/(1-N.V) - W V^T/(1-V.V)]                 (2x3)
    C = -f/sqrt(1-V.V) [I + V V^T/(1-V.V) + (2Qf'/f)
        ((N V^T + V N^T)/(1-N.V) - (3+2r)(1-V.V)/(1-N.V)^2 N N^T)] (3x3)

obtained by blockwise Schur reduction; the Sylvester determinant
identity collapses the rank-one updates and yields the closed-form
determinant

    det H = -4 f^3 f'^2 (1 + 2Q(f'/f + f''/f'))
            / ((1-N.V)^4 (1-V.V)^(3/2)).

The f-dependent scalar factor(Q) = 1 + 2Q(f'/f + f''/f') is the
universal part: it vanishes identically exactly for the degenerate
family f = sqrt(1 + c2 sqrt(Q)), whose null space is spanned by a single
kernel vector with closed chart form

    w = rho (theta_dot, phi_dot)  (+)  (ell/2)|ndot| (n - xdot),
    rho = [(1 - n.xdot)^2 + (n - xdot)^2 (ell/2)|ndot|] / (1 - xdot.xdot).

The lab-time chart Hessian (canonical here) is H = -m J Hhat J with the
constant diagonal velocity scaling J = diag(ell, ell sin(theta), 1, 1, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lagrange
from .chart import ChartState, POLE_ROTATION, needs_pole_rotation, rotate_state
from .errors import RotationlessError
from .model import free_lagrangian_fn, q_invariant
from .shapes import ShapeFunction

__all__ = [
    "HessianBlocks",
    "HessianReport",
    "hessian_blocks",
    "hessian_lab",
    "hessian_fd",
    "universal_factor",
    "det_closed_form",
    "kernel",
    "analytic_kernel",
    "analytic_kernel_dimensionless",
    "constraint_functional",
    "degeneracy_report",
    "RANK_TOL",
]

RANK_TOL = 1e-8


@dataclass(frozen=True)
class HessianBlocks:
    """Assembled Hessian in both charts plus the evaluation frame."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    H_dimensionless: np.ndarray
    H: np.ndarray                      # lab chart, canonical
    Q: float
    universal_factor: float
    det_closed_dimensionless: float
    det_closed_lab: float
    det_prefactor: float               # det_closed_dimensionless / universal_factor
    state: ChartState                  # state in the evaluation frame
    frame_rotation: np.ndarray | None  # lab -> evaluation frame, if any


@dataclass(frozen=True)
class HessianReport:
    """Degeneracy diagnostics of the lab-chart velocity Hessian."""

    H: np.ndarray
    det: float
    universal_factor: float
    singular_values: np.ndarray
    rank: int
    kernel: list
    constraint_residual: float | None
    Q: float
    state: ChartState
    frame_rotation: np.ndarray | None


def _blocks_dimensionless(shape: ShapeFunction, s: ChartState):
    ell = shape.ell
    N = s.n
    V = np.asarray(s.xdot, dtype=float)
    W = ell * np.array([s.theta_dot, s.phi_dot * np.sin(s.theta)])
    WtW = float(W @ W)
    if WtW == 0.0:
        raise RotationlessError("rotationless Hessian branch: W = 0")
    NV = float(N @ V)
    VV = float(V @ V)
    one_nv = 1.0 - NV
    one_vv = 1.0 - VV
    Q = WtW / one_nv ** 2
    f, fp, fpp = shape.eval(Q)
    r = Q * fpp / fp
    c = 2.0 * Q * fp * np.sqrt(one_vv) / WtW

    A = c * (np.eye(2) + 2.0 * r * np.outer(W, W) / WtW)
    B = c * (2.0 * (1.0 + r) * np.outer(W, N) / one_nv - np.outer(W, V) / one_vv)
    C = -(f / np.sqrt(one_vv)) * (
        np.eye(3)
        + np.outer(V, V) / one_vv
        + (2.0 * Q * fp / f) * (
            (np.outer(N, V) + np.outer(V, N)) / one_nv
            - (3.0 + 2.0 * r) * (one_vv / one_nv ** 2) * np.outer(N, N)
        )
    )
    factor = 1.0 + 2.0 * Q * (fp / f + fpp / fp)
    prefactor = -4.0 * f ** 3 * fp ** 2 / (one_nv ** 4 * one_vv ** 1.5)
    det_dim = prefactor * factor
    return A, B, C, Q, factor, det_dim, prefactor, f, fp, fpp


def hessian_blocks(shape: ShapeFunction, s: ChartState, *,
                   pole_policy: str = "rotate") -> HessianBlocks:
    """Closed-form Hessian blocks at an admissible state with Q > 0.

    Near the chart poles (sin(theta) < 0.1) the state is re-expressed in
    a fixed rotated frame first; the returned blocks then refer to that
    frame, recorded in ``frame_rotation``.
    """
    s.validate()
    rot = None
    if pole_policy == "rotate" and needs_pole_rotation(s.theta):
        rot = POLE_ROTATION
        s = rotate_state(s, rot)
    A, B, C, Q, factor, det_dim, pref, f, fp, fpp = _blocks_dimensionless(shape, s)
    Hdim = np.block([[A, B], [B.T, C]])
    J = np.diag([shape.ell, shape.ell * np.sin(s.theta), 1.0, 1.0, 1.0])
    Hlab = -shape.m * J @ Hdim @ J
    det_lab = (-shape.m) ** 5 * np.linalg.det(J) ** 2 * det_dim
    return HessianBlocks(A=A, B=B, C=C, H_dimensionless=Hdim, H=Hlab, Q=Q,
                         universal_factor=factor,
                         det_closed_dimensionless=det_dim,
                         det_closed_lab=det_lab, det_prefactor=pref,
                         state=s, frame_rotation=rot)


def hessian_lab(shape: ShapeFunction, s: ChartState) -> np.ndarray:
    """Lab-chart velocity Hessian (angular-first ordering)."""
    return hessian_blocks(shape, s).H


def hessian_fd(L, s: ChartState, t: float | None = None,
               step_scale: float | None = None) -> np.ndarray:
    """Finite-difference oracle for the lab-chart Hessian of a Lagrangian
    callable; independent of the closed-form block route."""
    tt = s.t if t is None else t
    return lagrange.hessian_fd(L, list(s.q5()), list(s.v5()), tt,
                               step_scale=step_scale)


def universal_factor(shape: ShapeFunction, Q: float) -> float:
    """1 + 2Q(f'/f + f''/f'); zero exactly on the degenerate family."""
    f, fp, fpp = shape.eval(Q)
    return float(1.0 + 2.0 * Q * (fp / f + fpp / fp))


def det_closed_form(shape: ShapeFunction, s: ChartState,
                    chart: str = "dimensionless") -> float:
    """Closed-form Hessian determinant at a state."""
    blocks = hessian_blocks(shape, s)
    if chart == "dimensionless":
        return blocks.det_closed_dimensionless
    if chart == "lab":
        return blocks.det_closed_lab
    raise ValueError(f"unknown chart {chart!r}")


def kernel(H: np.ndarray, tol: float = RANK_TOL) -> list[np.ndarray]:
    """Orthonormal null-space basis of a symmetric matrix by SVD.

    A direction counts as null when its singular value is <= tol * sigma_max.
    Deterministic sign: the component of largest magnitude is made positive.
    """
    H = np.asarray(H, dtype=float)
    _, sigma, vt = np.linalg.svd(H)
    smax = sigma[0] if sigma.size else 0.0
    vecs = []
    for k in range(sigma.size):
        if sigma[k] <= tol * smax:
            v = vt[k]
            lead = np.argmax(np.abs(v))
            if v[lead] < 0.0:
                v = -v
            vecs.append(v)
    return vecs


def _kernel_scale(shape: ShapeFunction) -> float:
    # signed half-length entering the closed-form kernel: c2 a^2 ell / 2
    return shape.c2 * shape.ell_effective / 2.0


def analytic_kernel(shape: ShapeFunction, s: ChartState) -> np.ndarray:
    """Closed-form kernel vector of the singular lab-chart Hessian.

    Angular-first 5-vector (rho*theta_dot, rho*phi_dot, lam*(n - xdot))
    with lam = (c2 ell_eff / 2)|ndot| and
    rho = [(1-n.xdot)^2 + |n-xdot|^2 lam] / (1 - xdot.xdot).
    Only defined for shapes of the degenerate family and Q > 0.
    """
    if not shape.hessian_singular:
        raise RotationlessError(
            f"shape {shape.label} is regular: no kernel vector")
    ndot_norm = np.sqrt(s.ndot_norm2)
    if ndot_norm == 0.0:
        raise RotationlessError("kernel formula needs |ndot| > 0")
    n = s.n
    V = np.asarray(s.xdot, dtype=float)
    lam = _kernel_scale(shape) * ndot_norm
    diff = n - V
    rho = ((1.0 - float(n @ V)) ** 2 + float(diff @ diff) * lam) / (1.0 - float(V @ V))
    return np.array([rho * s.theta_dot, rho * s.phi_dot,
                     lam * diff[0], lam * diff[1], lam * diff[2]])


def analytic_kernel_dimensionless(shape: ShapeFunction, s: ChartState) -> np.ndarray:
    """Kernel of the dimensionless-chart Hessian.

    For the basic '+' branch this is [alpha W/|W|] (+) (N - V) with
    alpha = [2(1-N.V)^2 + (1-2N.V+V.V)|W|]/(1-V.V); the other family
    members replace |W| by s2 |W| and divide the angular block by
    s2 = c2 a^2 (the family parameter of f = sqrt(1 + s2 sqrt(Q)))."""
    if not shape.hessian_singular:
        raise RotationlessError(
            f"shape {shape.label} is regular: no kernel vector")
    s2 = shape.c2 * shape.ell_effective / shape.ell
    N = s.n
    V = np.asarray(s.xdot, dtype=float)
    W = shape.ell * np.array([s.theta_dot, s.phi_dot * np.sin(s.theta)])
    Wn = float(np.sqrt(W @ W))
    if Wn == 0.0:
        raise RotationlessError("kernel formula needs |W| > 0")
    NV = float(N @ V)
    VV = float(V @ V)
    alpha = (2.0 * (1.0 - NV) ** 2 + (1.0 - 2.0 * NV + VV) * s2 * Wn) / (1.0 - VV)
    return np.concatenate([(alpha / s2) * W / Wn, N - V])


def constraint_functional(shape: ShapeFunction, s: ChartState, *,
                          ext_Z: np.ndarray | None = None,
                          field=None, charge: float = 0.0,
                          engine: str = "ad", t: float | None = None):
    """Kernel-contracted constraint w . (acceleration-free Euler-Lagrange part).

    Sign convention: with delta L/delta q = H qdd + Y, this returns w . Y,
    i.e. minus the contraction of w with the Z of ``lagrange.el_rhs``
    (H qdd = Z).  Free motion gives an identical zero; minimal coupling
    to a uniform field gives -e (ell/2)|ndot| (n - xdot).(E + xdot x H).

    Returns None for regular shapes (empty kernel: nothing to contract).
    """
    if not shape.hessian_singular:
        return None
    rot = None
    if needs_pole_rotation(s.theta):
        rot = POLE_ROTATION
        s = rotate_state(s, rot)
        if field is not None:
            field = field.rotated(rot)
    tt = s.t if t is None else t
    w = analytic_kernel(shape, s)
    L = free_lagrangian_fn(shape)
    if field is not None and charge != 0.0:
        from .em import total_lagrangian_fn
        L = total_lagrangian_fn(shape, field, charge)
    Z = lagrange.el_rhs(L, list(s.q5()), list(s.v5()), tt, engine=engine)
    if ext_Z is not None:
        Z = Z + np.asarray(ext_Z, dtype=float)
    return float(-w @ Z)


def degeneracy_report(shape: ShapeFunction, s: ChartState, *,
                      rank_tol: float = RANK_TOL,
                      field=None, charge: float = 0.0) -> HessianReport:
    """Full rank/kernel diagnostics of the lab-chart Hessian at a state."""
    blocks = hessian_blocks(shape, s)
    H = blocks.H
    sigma = np.linalg.svd(H, compute_uv=False)
    rank = int(np.sum(sigma > rank_tol * sigma[0]))
    vecs = kernel(H, rank_tol)
    residual = None
    if rank < 5 and shape.hessian_singular:
        # contraction is evaluated in the same frame as the blocks
        residual = constraint_functional(shape, blocks.state, field=field,
                                         charge=charge)
    return HessianReport(H=H, det=float(np.linalg.det(H)),
                         universal_factor=blocks.universal_factor,
                         singular_values=sigma, rank=rank, kernel=vecs,
                         constraint_residual=residual, Q=blocks.Q,
                         state=blocks.state,
                         frame_rotation=blocks.frame_rotation)
