"""Compiled coordinate-descent sweeps on the Gram form of the Lasso objective.

The objective is ``(1/n)||y - Xb||^2 + lam * ||b||_1``. With ``G = X'X/n`` and
``c = X'y/n`` the kernels keep ``g = c - G b`` up to date, so one coordinate
update costs O(p) only when the coordinate actually moves.
"""
import numpy as np
from numba import njit

CONVERGED = 0
PATTERN = 1
EXHAUSTED = 2


@njit(cache=True)
def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True)
def _update(G, b, g, j, half_lam):
    gjj = G[j, j]
    new = _soft(g[j] + gjj * b[j], half_lam) / gjj
    d = new - b[j]
    if d != 0.0:
        b[j] = new
        for k in range(g.shape[0]):
            g[k] -= d * G[k, j]
    return abs(d)


@njit(cache=True)
def objective(yy, c, g, b, lam):
    # (1/n)||y - Xb||^2 = yy - 2 c'b + b'Gb and b'Gb = c'b - g'b
    val = yy
    l1 = 0.0
    for j in range(b.shape[0]):
        val -= (c[j] + g[j]) * b[j]
        l1 += abs(b[j])
    return val + lam * l1


@njit(cache=True)
def cd_sweeps(G, c, yy, b, g, lam, tol, max_sweeps, watch, skip_signs, history):
    """Run sweeps in place on ``b``/``g``.

    Alternates a full sweep with inner sweeps over the current nonzero set
    until those settle. Stops with CONVERGED when a full sweep moves no
    coordinate by ``tol`` or more, or with EXHAUSTED after ``max_sweeps``
    sweeps. With ``watch`` set it also stops with PATTERN right after any full
    sweep that leaves a sign pattern different from ``skip_signs``.
    ``history`` (length 0 to skip) receives the objective after every sweep.
    Returns ``(status, sweeps)``.
    """
    p = b.shape[0]
    half_lam = 0.5 * lam
    sweeps = 0
    active = np.empty(p, dtype=np.int64)
    while sweeps < max_sweeps:
        delta = 0.0
        for j in range(p):
            d = _update(G, b, g, j, half_lam)
            if d > delta:
                delta = d
        if sweeps < history.shape[0]:
            history[sweeps] = objective(yy, c, g, b, lam)
        sweeps += 1
        if delta < tol:
            return CONVERGED, sweeps
        m = 0
        new = False
        for j in range(p):
            s = np.int8(np.sign(b[j]))
            if s != skip_signs[j]:
                new = True
            if s != 0:
                active[m] = j
                m += 1
        if watch and new:
            return PATTERN, sweeps
        while sweeps < max_sweeps:
            delta = 0.0
            for i in range(m):
                d = _update(G, b, g, active[i], half_lam)
                if d > delta:
                    delta = d
            if sweeps < history.shape[0]:
                history[sweeps] = objective(yy, c, g, b, lam)
            sweeps += 1
            if delta < tol:
                break
    return EXHAUSTED, sweeps
