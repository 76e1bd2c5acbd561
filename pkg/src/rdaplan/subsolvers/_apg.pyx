# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled accelerated projected gradient kernel.

Same algorithm as ``_apg_py``; the problems are small (about ten unknowns)
and solved thousands of times per planning step, so the win here is loop
overhead, not vectorization.
"""

from libc.math cimport sqrt, fabs

import numpy as np
cimport numpy as cnp

cnp.import_array()

KIND_ORTHANT = 0
KIND_SOC = 1

cdef double DYKSTRA_TOL = 1e-9
cdef int DYKSTRA_MAX = 200


cdef void _cone_project(int kind, double[::1] v, double[::1] out) nogil:
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef double nx, t, alpha
    if kind == 0:
        for i in range(n):
            out[i] = v[i] if v[i] > 0.0 else 0.0
        return
    nx = 0.0
    for i in range(n - 1):
        nx += v[i] * v[i]
    nx = sqrt(nx)
    t = v[n - 1]
    if nx <= t:
        for i in range(n):
            out[i] = v[i]
    elif nx <= -t:
        for i in range(n):
            out[i] = 0.0
    else:
        alpha = 0.5 * (nx + t)
        for i in range(n - 1):
            out[i] = alpha * v[i] / nx
        out[n - 1] = alpha


cdef double _phi(double[::1] w, double[::1] vt, double nu) nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0, denom
    for i in range(w.shape[0]):
        denom = 1.0 + nu * w[i]
        s += w[i] * vt[i] * vt[i] / (denom * denom)
    return s


cdef void _ball_project(double[:, ::1] V, double[::1] w, double[::1] v,
                        double[::1] vt, double[::1] out) nogil:
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double s, nu, nu_lo, nu_hi
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += V[j, i] * v[j]
        vt[i] = s
    s = 0.0
    for i in range(n):
        s += w[i] * vt[i] * vt[i]
    if s <= 1.0:
        for i in range(n):
            out[i] = v[i]
        return
    nu_hi = 1.0
    while _phi(w, vt, nu_hi) > 1.0:
        nu_hi *= 2.0
        if nu_hi > 1e16:
            break
    nu_lo = 0.0
    for k in range(200):
        nu = 0.5 * (nu_lo + nu_hi)
        if _phi(w, vt, nu) > 1.0:
            nu_lo = nu
        else:
            nu_hi = nu
        if nu_hi - nu_lo <= 1e-15 * (1.0 + nu_hi):
            break
    nu = 0.5 * (nu_lo + nu_hi)
    for i in range(n):
        vt[i] = vt[i] / (1.0 + nu * w[i])
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += V[i, j] * vt[j]
        out[i] = s


cdef void _lambda_project(int kind, double[:, ::1] V, double[::1] w,
                          double[::1] v, double[::1] x, double[::1] p,
                          double[::1] q, double[::1] y, double[::1] tmp,
                          double[::1] vt) nogil:
    """Dykstra between the dual cone and the norm ball; result in x."""
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i, it
    cdef double delta, diff, x_prev
    for i in range(n):
        x[i] = v[i]
        p[i] = 0.0
        q[i] = 0.0
    for it in range(DYKSTRA_MAX):
        for i in range(n):
            tmp[i] = x[i] + p[i]
        _cone_project(kind, tmp, y)
        delta = 0.0
        for i in range(n):
            p[i] = tmp[i] - y[i]
            tmp[i] = y[i] + q[i]
            q[i] = x[i]  # stash previous iterate; q is rebuilt below
        _ball_project(V, w, tmp, vt, x)
        for i in range(n):
            diff = fabs(x[i] - q[i])
            if diff > delta:
                delta = diff
            q[i] = tmp[i] - x[i]
        if delta <= DYKSTRA_TOL:
            break


def project(cnp.ndarray[double, ndim=1] x, int lam_kind, int mu_kind,
            int n_lam, int n_mu, cnp.ndarray[double, ndim=2] V,
            cnp.ndarray[double, ndim=1] w):
    """Projection onto the block-feasible set (matches _apg_py.project)."""
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(x)
    cdef double[::1] xv = np.ascontiguousarray(x)
    cdef double[::1] outv = out
    cdef double[:, ::1] Vv = np.ascontiguousarray(V)
    cdef double[::1] wv = np.ascontiguousarray(w)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    scratch = np.empty((6, n_lam))
    cdef double[:, ::1] sc = scratch
    _lambda_project(lam_kind, Vv, wv, xv[:n_lam], outv[:n_lam], sc[0], sc[1],
                    sc[2], sc[3], sc[4])
    _cone_project(mu_kind, xv[n_lam:n_lam + n_mu], outv[n_lam:n_lam + n_mu])
    for i in range(n_lam + n_mu, n):
        outv[i] = xv[i] if xv[i] > 0.0 else 0.0
    return out


cdef void _project_inplace(double[::1] x, int lam_kind, int mu_kind,
                           int n_lam, int n_mu, double[:, ::1] V,
                           double[::1] w, double[:, ::1] sc) nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    _lambda_project(lam_kind, V, w, x[:n_lam], sc[5, :n_lam], sc[0, :n_lam],
                    sc[1, :n_lam], sc[2, :n_lam], sc[3, :n_lam], sc[4, :n_lam])
    for i in range(n_lam):
        x[i] = sc[5, i]
    _cone_project(mu_kind, x[n_lam:n_lam + n_mu], x[n_lam:n_lam + n_mu])
    for i in range(n_lam + n_mu, n):
        if x[i] < 0.0:
            x[i] = 0.0


cdef double _objective(double[:, ::1] MtM, double[::1] Mtr,
                       double[::1] x) nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j
    cdef double s, obj = 0.0
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += MtM[i, j] * x[j]
        obj += 0.5 * x[i] * s - Mtr[i] * x[i]
    return obj


cdef void _grad(double[:, ::1] MtM, double[::1] Mtr, double[::1] x,
                double[::1] g) nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += MtM[i, j] * x[j]
        g[i] = s - Mtr[i]


def apg_solve(cnp.ndarray[double, ndim=2] MtM_in,
              cnp.ndarray[double, ndim=1] Mtr_in,
              cnp.ndarray[double, ndim=1] x0,
              int lam_kind, int mu_kind, int n_lam, int n_mu,
              cnp.ndarray[double, ndim=2] V_in,
              cnp.ndarray[double, ndim=1] w_in,
              double step, double tol, int max_iter):
    """FISTA with function-value restart (matches _apg_py.apg_solve)."""
    cdef double[:, ::1] MtM = np.ascontiguousarray(MtM_in)
    cdef double[::1] Mtr = np.ascontiguousarray(Mtr_in)
    cdef double[:, ::1] V = np.ascontiguousarray(V_in)
    cdef double[::1] w = np.ascontiguousarray(w_in)
    cdef Py_ssize_t n = x0.shape[0]
    cdef cnp.ndarray[double, ndim=1] x_arr = np.array(x0, dtype=float)
    cdef double[::1] x = x_arr
    work = np.zeros((4, n))
    cdef double[:, ::1] wk = work  # y, grad, x_new, fp
    scratch = np.zeros((6, max(n_lam, 1)))
    cdef double[:, ::1] sc = scratch
    cdef double t = 1.0, t_new, f_prev, f_new, res = 1e300
    cdef Py_ssize_t i, it = 0
    cdef double diff

    with nogil:
        _project_inplace(x, lam_kind, mu_kind, n_lam, n_mu, V, w, sc)
        for i in range(n):
            wk[0, i] = x[i]
        f_prev = _objective(MtM, Mtr, x)
        for it in range(1, max_iter + 1):
            _grad(MtM, Mtr, wk[0], wk[1])
            for i in range(n):
                wk[2, i] = wk[0, i] - step * wk[1, i]
            _project_inplace(wk[2], lam_kind, mu_kind, n_lam, n_mu, V, w, sc)
            f_new = _objective(MtM, Mtr, wk[2])
            if f_new > f_prev:
                for i in range(n):
                    wk[0, i] = x[i]
                t = 1.0
                _grad(MtM, Mtr, wk[0], wk[1])
                for i in range(n):
                    wk[2, i] = wk[0, i] - step * wk[1, i]
                _project_inplace(wk[2], lam_kind, mu_kind, n_lam, n_mu, V,
                                 w, sc)
                f_new = _objective(MtM, Mtr, wk[2])
            t_new = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
            res = 0.0
            for i in range(n):
                diff = fabs(wk[2, i] - x[i])
                if diff > res:
                    res = diff
            res = res / step
            for i in range(n):
                wk[0, i] = wk[2, i] + ((t - 1.0) / t_new) * (wk[2, i] - x[i])
                x[i] = wk[2, i]
            t = t_new
            f_prev = f_new
            if res <= tol:
                _grad(MtM, Mtr, x, wk[1])
                for i in range(n):
                    wk[3, i] = x[i] - step * wk[1, i]
                _project_inplace(wk[3], lam_kind, mu_kind, n_lam, n_mu, V,
                                 w, sc)
                res = 0.0
                for i in range(n):
                    diff = fabs(wk[3, i] - x[i])
                    if diff > res:
                        res = diff
                res = res / step
                if res <= tol:
                    break
    return x_arr, int(it), float(res)
