"""Euler-Lagrange dynamics on the five physical degrees of freedom.

The equations of motion are solved in the form H(q, v) qdd = Z(q, v, t)
with the closed-form lab-chart Hessian and the jet-computed right-hand
side (finite differences behind engine="fd").  A degenerate Hessian is a
refusal, not a numerical accident: ``accelerations`` raises
``DegenerateHessianError`` carrying the kernel and the contracted
constraint value.

Integration is adaptive explicit Runge-Kutta (scipy DOP853 by default,
RK45 available), with conserved-quantity monitors sampled at accepted
steps and terminal events for the physical singularities of the chart:
1 - n.xdot -> 0, |xdot| -> 1, Q leaving the shape domain, and pole-frame
rotations (the state is re-expressed in a rotated frame and integration
restarts; exported samples are always in the caller's lab frame).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp

from . import lagrange
from .chart import (ChartState, POLE_ROTATION, POLE_SIN_THRESHOLD,
                    needs_pole_rotation, rotate_state)
from .errors import DegenerateHessianError, IllConditionedWarning, RotatorError
from .hessian import RANK_TOL, analytic_kernel, hessian_blocks, kernel
from .jets import Jet2, arctan2 as jatan2, arccos as jarccos, sin as jsin, cos as jcos
from .model import charges, q_invariant, rotation_speed
from .shapes import ShapeFunction

__all__ = [
    "ELSystem",
    "AccelerationResult",
    "CandidateTrajectory",
    "MonitorSeries",
    "Trajectory",
    "el_rhs",
    "accelerations",
    "integrate",
    "residual",
]

_COND_WARN = 1e12
_SING_TOL = 1e-9

CSV_COLUMNS = ("t", "x1", "x2", "x3", "theta", "phi",
               "dx1", "dx2", "dx3", "dtheta", "dphi",
               "P0", "P1", "P2", "P3", "PP", "WW", "Q", "tanhPsi",
               "residual_norm")


@dataclass(eq=False)
class ELSystem:
    """Total Lagrangian (free + optional minimal coupling) ready to solve."""

    shape: ShapeFunction
    charge: float = 0.0
    field: object | None = None
    engine: str = "ad"

    @cached_property
    def lagrangian_fn(self):
        from .em import total_lagrangian_fn
        return total_lagrangian_fn(self.shape, self.field, self.charge)

    def in_frame(self, R: np.ndarray) -> "ELSystem":
        fld = self.field.rotated(R) if self.field is not None else None
        return ELSystem(shape=self.shape, charge=self.charge, field=fld,
                        engine=self.engine)


@dataclass(frozen=True)
class AccelerationResult:
    qdd: np.ndarray
    condition: float
    residual_norm: float
    hessian: np.ndarray
    rhs: np.ndarray


def el_rhs(sys: ELSystem, s: ChartState, t: float | None = None) -> np.ndarray:
    """Z with H qdd = Z: Z_i = dL/dq_i - d2L/dv_i dq_j v_j - d2L/dv_i dt."""
    tt = s.t if t is None else t
    return lagrange.el_rhs(sys.lagrangian_fn, list(s.q5()), list(s.v5()), tt,
                           engine=sys.engine)


def _solve_accelerations(sys: ELSystem, s: ChartState, t: float,
                         rank_tol: float = RANK_TOL) -> AccelerationResult:
    """H qdd = Z in the state's own frame (no pole handling here)."""
    if sys.engine == "fd":
        H = lagrange.hessian_fd(sys.lagrangian_fn, list(s.q5()), list(s.v5()), t)
    else:
        H = hessian_blocks(sys.shape, s, pole_policy="none").H
    Z = lagrange.el_rhs(sys.lagrangian_fn, list(s.q5()), list(s.v5()), t,
                        engine=sys.engine)
    sigma = np.linalg.svd(H, compute_uv=False)
    if sigma[-1] <= rank_tol * sigma[0]:
        vecs = kernel(H, rank_tol)
        wz = None
        if sys.shape.hessian_singular:
            w = analytic_kernel(sys.shape, s)
            wz = float(-w @ Z)
        raise DegenerateHessianError(
            "velocity Hessian is rank deficient: accelerations are not "
            "determined by the state",
            hessian=H, kernel=vecs, constraint=wz, singular_values=sigma,
            rank=int(np.sum(sigma > rank_tol * sigma[0])))
    cond = float(sigma[0] / sigma[-1])
    if cond > _COND_WARN:
        warnings.warn(f"Hessian condition estimate {cond:.3e} > {_COND_WARN:.0e}",
                      IllConditionedWarning, stacklevel=2)
    qdd = np.linalg.solve(H, Z)
    res = float(np.linalg.norm(H @ qdd - Z))
    return AccelerationResult(qdd=qdd, condition=cond, residual_norm=res,
                              hessian=H, rhs=Z)


def _angular_qdd_back(s_rot: ChartState, qdd_rot: np.ndarray,
                      R: np.ndarray) -> tuple[float, float]:
    """Map (theta_dd, phi_dd) from the rotated chart back to the lab chart
    by pushing second-order time jets through the chart transition."""
    th = Jet2(s_rot.theta, s_rot.theta_dot, s_rot.theta_dot, qdd_rot[0])
    ph = Jet2(s_rot.phi, s_rot.phi_dot, s_rot.phi_dot, qdd_rot[1])
    st, ct = jsin(th), jcos(th)
    sp, cp = jsin(ph), jcos(ph)
    n_rot = (st * cp, st * sp, ct)
    Rt = R.T
    n_lab = [Rt[i, 0] * n_rot[0] + Rt[i, 1] * n_rot[1] + Rt[i, 2] * n_rot[2]
             for i in range(3)]
    theta_lab = jarccos(n_lab[2])
    phi_lab = jatan2(n_lab[1], n_lab[0])
    return float(theta_lab.d12), float(phi_lab.d12)


def accelerations(sys: ELSystem, s: ChartState,
                  t: float | None = None) -> AccelerationResult:
    """Unique accelerations of an admissible state, in the caller's chart.

    Near a chart pole the solve happens in a rotated frame and the
    accelerations are mapped back exactly (positions by the inverse
    rotation, angles through second-order jets of the transition map).
    """
    s.validate()
    tt = s.t if t is None else t
    if not needs_pole_rotation(s.theta):
        return _solve_accelerations(sys, s, tt)
    R = POLE_ROTATION
    s_rot = rotate_state(s, R)
    res = _solve_accelerations(sys.in_frame(R), s_rot, tt)
    qdd = np.empty(5)
    qdd[2:] = R.T @ res.qdd[2:]
    qdd[0], qdd[1] = _angular_qdd_back(s_rot, res.qdd, R)
    return AccelerationResult(qdd=qdd, condition=res.condition,
                              residual_norm=res.residual_norm,
                              hessian=res.hessian, rhs=res.rhs)


# -- trajectories -----------------------------------------------------------


@dataclass
class CandidateTrajectory:
    """Externally supplied (t, q, v, qdd) samples, angular-first ordering."""

    t: np.ndarray
    q: np.ndarray
    v: np.ndarray
    a: np.ndarray
    extras: dict = dc_field(default_factory=dict)

    def state(self, i: int) -> ChartState:
        return ChartState.from_q5v5(self.q[i], self.v[i], t=float(self.t[i]))


@dataclass
class MonitorSeries:
    """Per-sample conserved-quantity records along a trajectory."""

    P: np.ndarray
    Pi: np.ndarray
    M: np.ndarray
    W: np.ndarray
    PP: np.ndarray
    WW: np.ndarray
    Q: np.ndarray
    tanh_psi: np.ndarray
    residual_norm: np.ndarray

    def drift(self) -> dict:
        """Max drift of each monitored quantity, relative to its own
        t = 0 scale (vector components scale to the max-norm at t = 0)."""
        out = {}
        for name in ("P", "Pi", "M", "W"):
            arr = getattr(self, name)
            scale = max(float(np.max(np.abs(arr[0]))), 1e-300)
            out[name] = float(np.max(np.abs(arr - arr[0])) / scale)
        for name in ("PP", "WW", "Q"):
            arr = getattr(self, name)
            scale = max(abs(float(arr[0])), 1e-300)
            out[name] = float(np.max(np.abs(arr - arr[0])) / scale)
        return out


@dataclass
class Trajectory:
    """Integrated trajectory: lab-frame samples plus monitors and metadata."""

    t: np.ndarray
    states: list
    qdd: np.ndarray
    monitors: MonitorSeries
    metadata: dict

    def q_array(self) -> np.ndarray:
        return np.array([s.q5() for s in self.states])

    def v_array(self) -> np.ndarray:
        return np.array([s.v5() for s in self.states])

    def to_csv(self, path) -> None:
        """Fixed column order, full double precision (17 significant digits)."""
        mon = self.monitors
        with open(path, "w") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for i, s in enumerate(self.states):
                row = [self.t[i], *s.x, s.theta, s.phi, *s.xdot,
                       s.theta_dot, s.phi_dot, *mon.P[i], mon.PP[i],
                       mon.WW[i], mon.Q[i], mon.tanh_psi[i],
                       mon.residual_norm[i]]
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


_STAGES = {"RK45": 6, "DOP853": 12}


def _monitor_sample(sys: ELSystem, s_lab: ChartState):
    cs = charges(sys.shape, s_lab)
    Q = q_invariant(s_lab, sys.shape.ell)
    try:
        tpsi = rotation_speed(sys.shape, Q)
    except RotatorError:
        tpsi = np.nan
    return cs, Q, tpsi


def integrate(sys: ELSystem, s0: ChartState, t_end: float,
              rel_tol: float = 1e-10, abs_tol: float | None = None,
              method: str = "DOP853", max_step: float = np.inf) -> Trajectory:
    """Integrate from s0.t to t_end with monitors at accepted steps.

    Singularity events halt integration and are recorded in
    ``metadata["halt"]``; pole transits re-express the state in a rotated
    frame and continue (logged in ``metadata["events"]``).
    """
    s0.validate()
    if abs_tol is None:
        abs_tol = rel_tol * 1e-2
    shape = sys.shape

    R_cur = np.eye(3)
    events_log: list = []
    halt = None
    if needs_pole_rotation(s0.theta):
        R_cur = POLE_ROTATION @ R_cur
        events_log.append({"t": float(s0.t), "kind": "pole_frame_rotation"})
    s_cur = rotate_state(s0, R_cur)
    sys_cur = sys.in_frame(R_cur)

    t_all: list = []
    states_lab: list = []
    qdd_lab: list = []
    res_norms: list = []
    nfev_total = 0
    naccept_total = 0

    t_cur = float(s0.t)
    while True:
        def rhs(t, y, _sys=sys_cur):
            s = ChartState.from_q5v5(y[:5], y[5:], t=t)
            acc = _solve_accelerations(_sys, s, t)
            return np.concatenate([y[5:], acc.qdd])

        def ev_pole(t, y):
            return np.sin(y[0]) - POLE_SIN_THRESHOLD
        ev_pole.terminal = True
        ev_pole.direction = -1.0

        def ev_collinear(t, y):
            s = ChartState.from_q5v5(y[:5], y[5:], t=t)
            return (1.0 - s.n_dot_xdot) - _SING_TOL
        ev_collinear.terminal = True
        ev_collinear.direction = -1.0

        def ev_speed(t, y):
            return (1.0 - _SING_TOL) - float(y[5:8] @ y[5:8] + y[8] * 0.0
                                             + np.dot(y[7:10], y[7:10]) * 0.0) \
                if False else (1.0 - _SING_TOL) - float(np.dot(y[7:10], y[7:10]))
        ev_speed.terminal = True
        ev_speed.direction = -1.0

        evs = [ev_pole, ev_collinear, ev_speed]
        ev_names = ["pole_frame_rotation", "collinear_singularity",
                    "speed_of_light"]

        if shape.contains_sqrt_q:
            def ev_qzero(t, y):
                s = ChartState.from_q5v5(y[:5], y[5:], t=t)
                return q_invariant(s, shape.ell) - 1e-10
            ev_qzero.terminal = True
            ev_qzero.direction = -1.0
            evs.append(ev_qzero)
            ev_names.append("q_reaches_zero")
        if np.isfinite(shape.q_domain[1]):
            def ev_qhigh(t, y):
                s = ChartState.from_q5v5(y[:5], y[5:], t=t)
                return (shape.q_domain[1] - 1e-9) - q_invariant(s, shape.ell)
            ev_qhigh.terminal = True
            ev_qhigh.direction = -1.0
            evs.append(ev_qhigh)
            ev_names.append("q_leaves_domain")

        y0 = np.concatenate([s_cur.q5(), s_cur.v5()])
        sol = solve_ivp(rhs, (t_cur, t_end), y0, method=method,
                        rtol=rel_tol, atol=abs_tol, events=evs,
                        max_step=max_step, dense_output=False)
        if sol.status == -1:
            raise RotatorError(f"integration failed: {sol.message}")
        nfev_total += sol.nfev
        naccept_total += len(sol.t) - 1

        Rt = R_cur.T
        start = 1 if t_all else 0  # skip duplicated segment-start sample
        for i in range(start, len(sol.t)):
            t_i = float(sol.t[i])
            s_frame = ChartState.from_q5v5(sol.y[:5, i], sol.y[5:, i], t=t_i)
            acc = _solve_accelerations(sys_cur, s_frame, t_i)
            s_lab = rotate_state(s_frame, Rt)
            qdd = np.empty(5)
            qdd[2:] = Rt @ acc.qdd[2:]
            if np.allclose(R_cur, np.eye(3)):
                qdd[0], qdd[1] = acc.qdd[0], acc.qdd[1]
            else:
                qdd[0], qdd[1] = _angular_qdd_back(s_frame, acc.qdd, Rt.T)
            t_all.append(t_i)
            states_lab.append(s_lab)
            qdd_lab.append(qdd)
            res_norms.append(acc.residual_norm)

        if sol.status == 0:
            break
        # terminal event: find which one fired
        fired = [k for k, te in enumerate(sol.t_events) if te.size > 0]
        kind = ev_names[fired[0]]
        t_ev = float(sol.t_events[fired[0]][0])
        y_ev = sol.y_events[fired[0]][0]
        if kind == "pole_frame_rotation":
            s_frame = ChartState.from_q5v5(y_ev[:5], y_ev[5:], t=t_ev)
            s_lab = rotate_state(s_frame, R_cur.T)
            R_cur = POLE_ROTATION @ R_cur
            s_cur = rotate_state(s_lab, R_cur)
            sys_cur = sys.in_frame(R_cur)
            t_cur = t_ev
            events_log.append({"t": t_ev, "kind": kind})
            if t_cur >= t_end:
                break
            continue
        halt = {"t": t_ev, "kind": kind}
        events_log.append(halt)
        break

    # monitors along the lab-frame samples
    n = len(t_all)
    P = np.empty((n, 4)); Pi = np.empty((n, 4)); M6 = np.empty((n, 6))
    W = np.empty((n, 4)); PPs = np.empty(n); WWs = np.empty(n)
    Qs = np.empty(n); tps = np.empty(n)
    for i, s_lab in enumerate(states_lab):
        cs, Q, tpsi = _monitor_sample(sys, s_lab)
        P[i] = cs.P.c; Pi[i] = cs.Pi.c; M6[i] = cs.M.six; W[i] = cs.W.c
        PPs[i] = cs.PP; WWs[i] = cs.WW; Qs[i] = Q; tps[i] = tpsi

    stages = _STAGES.get(method, 12)
    rejected = max(0, round(nfev_total / stages) - naccept_total)
    mon = MonitorSeries(P=P, Pi=Pi, M=M6, W=W, PP=PPs, WW=WWs, Q=Qs,
                        tanh_psi=tps,
                        residual_norm=np.asarray(res_norms))
    ymax = max(float(np.max(np.abs(np.concatenate([s.q5() for s in states_lab])))),
               1.0)
    meta = {
        "method": method,
        "rel_tol": rel_tol,
        "abs_tol": abs_tol,
        "accepted_steps": naccept_total,
        "rejected_steps_estimate": int(rejected),
        "nfev": int(nfev_total),
        "events": events_log,
        "halt": halt,
        "error_estimate": rel_tol * naccept_total * ymax,
    }
    return Trajectory(t=np.asarray(t_all), states=states_lab,
                      qdd=np.asarray(qdd_lab), monitors=mon, metadata=meta)


def residual(sys: ELSystem, candidate: CandidateTrajectory) -> np.ndarray:
    """Per-sample H(q,v) qdd - Z(q,v,t) for an externally supplied motion."""
    n = candidate.t.size
    out = np.empty((n, 5))
    for i in range(n):
        s = candidate.state(i)
        t = float(candidate.t[i])
        if sys.engine == "fd":
            H = lagrange.hessian_fd(sys.lagrangian_fn, list(s.q5()),
                                    list(s.v5()), t)
        else:
            H = hessian_blocks(sys.shape, s, pole_policy="none").H
        Z = lagrange.el_rhs(sys.lagrangian_fn, list(s.q5()), list(s.v5()), t,
                            engine=sys.engine)
        out[i] = H @ candidate.a[i] - Z
    return out
