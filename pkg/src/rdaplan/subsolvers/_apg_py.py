"""Pure-python accelerated projected gradient kernel.

Reference implementation of the hot inner loop; the compiled extension in
``_apg.pyx`` follows the same algorithm.  Kept dependency-light so it can be
selected at import time when the extension is unavailable.
"""

from __future__ import annotations

import numpy as np

KIND_ORTHANT = 0
KIND_SOC = 1

DYKSTRA_TOL = 1e-9
DYKSTRA_MAX = 200


def cone_project(kind: int, v: np.ndarray) -> np.ndarray:
    if kind == KIND_ORTHANT:
        return np.maximum(v, 0.0)
    x, t = v[:-1], v[-1]
    nx = np.linalg.norm(x)
    if nx <= t:
        return v.copy()
    if nx <= -t:
        return np.zeros_like(v)
    alpha = 0.5 * (nx + t)
    out = np.empty_like(v)
    out[:-1] = alpha * x / nx
    out[-1] = alpha
    return out


def ball_project(V: np.ndarray, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Projection onto {x : x' (V diag(w) V') x <= 1} = {||D' x|| <= 1}."""
    vt = V.T @ v
    if float(np.sum(w * vt * vt)) <= 1.0:
        return v.copy()
    # solve sum w vt^2 / (1 + nu w)^2 = 1 for nu > 0
    nu_hi = 1.0
    while _phi(w, vt, nu_hi) > 1.0:
        nu_hi *= 2.0
        if nu_hi > 1e16:
            break
    nu_lo = 0.0
    for _ in range(200):
        nu = 0.5 * (nu_lo + nu_hi)
        if _phi(w, vt, nu) > 1.0:
            nu_lo = nu
        else:
            nu_hi = nu
        if nu_hi - nu_lo <= 1e-15 * (1.0 + nu_hi):
            break
    nu = 0.5 * (nu_lo + nu_hi)
    return V @ (vt / (1.0 + nu * w))


def _phi(w, vt, nu):
    return float(np.sum(w * vt * vt / (1.0 + nu * w) ** 2))


def lambda_project(kind: int, V: np.ndarray, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Dykstra alternation between the dual cone and the norm ball."""
    x = v.copy()
    p = np.zeros_like(v)
    q = np.zeros_like(v)
    for _ in range(DYKSTRA_MAX):
        y = cone_project(kind, x + p)
        p = x + p - y
        x_new = ball_project(V, w, y + q)
        q = y + q - x_new
        delta = float(np.max(np.abs(x_new - x)))
        x = x_new
        if delta <= DYKSTRA_TOL:
            break
    return x


def project(x, lam_kind, mu_kind, n_lam, n_mu, V, w):
    out = np.empty_like(x)
    out[:n_lam] = lambda_project(lam_kind, V, w, x[:n_lam])
    out[n_lam:n_lam + n_mu] = cone_project(mu_kind, x[n_lam:n_lam + n_mu])
    out[n_lam + n_mu:] = np.maximum(x[n_lam + n_mu:], 0.0)
    return out


def apg_solve(MtM, Mtr, x0, lam_kind, mu_kind, n_lam, n_mu, V, w,
              step, tol, max_iter):
    """FISTA with function-value restart; iterates stay feasible.

    Returns (x, iterations, fixed_point_residual).
    """
    x = project(x0.copy(), lam_kind, mu_kind, n_lam, n_mu, V, w)
    y = x.copy()
    t = 1.0
    f_prev = _objective(MtM, Mtr, x)
    res = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        grad = MtM @ y - Mtr
        x_new = project(y - step * grad, lam_kind, mu_kind, n_lam, n_mu, V, w)
        f_new = _objective(MtM, Mtr, x_new)
        if f_new > f_prev:
            # restart from the last good point
            y = x.copy()
            t = 1.0
            grad = MtM @ y - Mtr
            x_new = project(y - step * grad, lam_kind, mu_kind, n_lam, n_mu, V, w)
            f_new = _objective(MtM, Mtr, x_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        res = float(np.max(np.abs(x_new - x))) / step
        x = x_new
        t = t_new
        f_prev = f_new
        if res <= tol:
            grad = MtM @ x - Mtr
            fp = project(x - step * grad, lam_kind, mu_kind, n_lam, n_mu, V, w)
            res = float(np.max(np.abs(fp - x))) / step
            if res <= tol:
                break
    return x, it, res


def _objective(MtM, Mtr, x):
    return float(0.5 * x @ (MtM @ x) - Mtr @ x)
