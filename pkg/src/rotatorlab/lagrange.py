"""Generic Euler-Lagrange machinery for any Lagrangian L(q, v, t).

The Lagrange equations are used throughout in the solved-for-accelerations
form

    H(q, v) qdd = Z(q, v, t),
    H_ij = d2L/dv_i dv_j,
    Z_i  = dL/dq_i - sum_j d2L/dv_i dq_j v_j - d2L/dv_i dt.

Both H and Z are produced by one vectorized second-order jet evaluation
of L (exact to rounding); an independent central finite-difference
engine is available behind ``engine="fd"`` as the validation oracle.

L must be written against :mod:`rotatorlab.jets` generic math and accept
sequences of scalars-or-jets for q and v.
"""

from __future__ import annotations

import numpy as np

from .jets import Jet2

__all__ = [
    "el_rhs",
    "hessian_ad",
    "hessian_fd",
    "el_and_hessian",
    "residual_series",
]

_EPS = np.finfo(float).eps


def _zeros(ndir):
    return np.zeros(ndir)


def el_rhs(L, q, v, t=0.0, engine="ad") -> np.ndarray:
    """Right-hand side Z of H qdd = Z at a single state."""
    if engine == "fd":
        return _el_rhs_fd(L, q, v, t)
    n = len(q)
    ndir = n * n + n
    vj = []
    for k in range(n):
        d1 = _zeros(ndir)
        d1[k * n:(k + 1) * n] = 1.0
        d1[n * n + k] = 1.0
        vj.append(Jet2(v[k], d1, 0.0, 0.0))
    qj = []
    for k in range(n):
        d2 = _zeros(ndir)
        d2[k:n * n:n] = 1.0
        qj.append(Jet2(q[k], 0.0, d2, 0.0))
    d2t = _zeros(ndir)
    d2t[n * n:] = 1.0
    tj = Jet2(t, 0.0, d2t, 0.0)

    out = L(qj, vj, tj)
    d2 = np.broadcast_to(np.asarray(out.d2, dtype=float), (ndir,))
    d12 = np.broadcast_to(np.asarray(out.d12, dtype=float), (ndir,))
    dLdq = d2[:n]
    mixed = d12[:n * n].reshape(n, n)
    mixed_t = d12[n * n:]
    return dLdq - mixed @ np.asarray(v, dtype=float) - mixed_t


def hessian_ad(L, q, v, t=0.0) -> np.ndarray:
    """Velocity Hessian d2L/dv dv by forward-mode jets."""
    n = len(v)
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    ndir = len(pairs)
    d1 = np.zeros((n, ndir))
    d2 = np.zeros((n, ndir))
    for m, (i, j) in enumerate(pairs):
        d1[i, m] = 1.0
        d2[j, m] = 1.0
    vj = [Jet2(v[k], d1[k], d2[k], 0.0) for k in range(n)]
    out = L(q, vj, t)
    d12 = np.broadcast_to(np.asarray(out.d12, dtype=float), (ndir,))
    H = np.empty((n, n))
    for m, (i, j) in enumerate(pairs):
        H[i, j] = H[j, i] = d12[m]
    return H


def el_and_hessian(L, q, v, t=0.0, engine="ad"):
    if engine == "fd":
        return _el_rhs_fd(L, q, v, t), hessian_fd(L, q, v, t)
    return el_rhs(L, q, v, t), hessian_ad(L, q, v, t)


# -- finite differences ----------------------------------------------------


def _exact_steps(x, scale):
    h = scale * np.maximum(1.0, np.abs(x))
    return (np.asarray(x, dtype=float) + h) - x


def _eval_shifted(L, q, v, t, dv=None, dq=None, dt=0.0):
    vv = list(v) if dv is None else [v[k] + dv[k] for k in range(len(v))]
    qq = list(q) if dq is None else [q[k] + dq[k] for k in range(len(q))]
    return L(qq, vv, t + dt)


def _cross_second(L, q, v, t, i_kind, i, hi, j_kind, j, hj):
    """4-point cross stencil for one mixed second derivative.

    i_kind/j_kind select the differentiation slot: "v", "q" or "t".
    Retries with shrunk steps when an evaluation point is inadmissible.
    """
    n = len(q)
    for attempt in range(4):
        try:
            acc = 0.0
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    dv = [0.0] * n
                    dq = [0.0] * n
                    dt = 0.0
                    for kind, idx, s, h in ((i_kind, i, si, hi), (j_kind, j, sj, hj)):
                        if kind == "v":
                            dv[idx] += s * h
                        elif kind == "q":
                            dq[idx] += s * h
                        else:
                            dt += s * h
                    acc += si * sj * _eval_shifted(L, q, v, t, dv, dq, dt)
            return acc / (4.0 * hi * hj)
        except Exception:
            if attempt == 3:
                raise
            hi, hj = hi / 4.0, hj / 4.0
    raise AssertionError("unreachable")


def hessian_fd(L, q, v, t=0.0, step_scale=None) -> np.ndarray:
    """Velocity Hessian by symmetric central second differences.

    Default step h_i = eps**(1/4) * max(1, |v_i|): for second derivatives
    the eps/h^2 rounding floor of the 4-point stencil and the h^2
    truncation error balance at the quarter power, keeping entrywise
    errors near 1e-8 on O(1) Lagrangians.
    """
    n = len(v)
    scale = _EPS ** 0.25 if step_scale is None else step_scale
    h = _exact_steps(np.asarray(v, dtype=float), scale)
    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            val = _cross_second(L, q, v, t, "v", i, h[i], "v", j, h[j])
            H[i, j] = H[j, i] = val
    return H


def _el_rhs_fd(L, q, v, t, step_scale=None) -> np.ndarray:
    n = len(q)
    scale = _EPS ** 0.25 if step_scale is None else step_scale
    hq = _exact_steps(np.asarray(q, dtype=float), scale)
    hv = _exact_steps(np.asarray(v, dtype=float), scale)
    ht = float(_exact_steps(np.array([t]), scale)[0])
    sfirst = _EPS ** (1.0 / 3.0)
    hq1 = _exact_steps(np.asarray(q, dtype=float), sfirst)

    dLdq = np.empty(n)
    for j in range(n):
        dq = [0.0] * n
        dq[j] = hq1[j]
        up = _eval_shifted(L, q, v, t, dq=dq)
        dq[j] = -hq1[j]
        dn = _eval_shifted(L, q, v, t, dq=dq)
        dLdq[j] = (up - dn) / (2.0 * hq1[j])

    Z = np.array(dLdq)
    varr = np.asarray(v, dtype=float)
    for i in range(n):
        for j in range(n):
            Z[i] -= _cross_second(L, q, v, t, "v", i, hv[i], "q", j, hq[j]) * varr[j]
        Z[i] -= _cross_second(L, q, v, t, "v", i, hv[i], "t", 0, ht)
    return Z


def residual_series(L, t_arr, q_arr, v_arr, a_arr, engine="ad") -> np.ndarray:
    """Per-sample H(q,v) a - Z(q,v,t) for a candidate trajectory."""
    t_arr = np.asarray(t_arr, dtype=float)
    q_arr = np.asarray(q_arr, dtype=float)
    v_arr = np.asarray(v_arr, dtype=float)
    a_arr = np.asarray(a_arr, dtype=float)
    out = np.empty_like(a_arr)
    for s in range(t_arr.size):
        Z, H = el_and_hessian(L, list(q_arr[s]), list(v_arr[s]), float(t_arr[s]),
                              engine=engine)
        out[s] = H @ a_arr[s] - Z
    return out
