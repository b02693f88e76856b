# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: fused ADMM passes and the reference-solver loop.

Each helper fuses what would otherwise be several full passes over the
(n, 2P) iterate arrays.  Masks arrive as one (n, P) uint8 matrix; block i
and block i+P share the mask, the cone sign is 2 m - 1, and the orientation
is +1 for the first P blocks and -1 for the rest.  A numpy twin of every
function lives in _kernels_py, selected at import when this extension is
unavailable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def rowsum_orient(double[:, ::1] xu, unsigned char[:, ::1] mask, double[::1] out):
    """out_j = sum_i m_ji (xu_ji - xu_j,i+P): oriented masked row sums."""
    cdef Py_ssize_t n = xu.shape[0], p = mask.shape[1]
    cdef Py_ssize_t j, i
    cdef double acc
    for j in range(n):
        acc = 0.0
        for i in range(p):
            if mask[j, i]:
                acc += xu[j, i] - xu[j, i + p]
        out[j] = acc


def broadcast_orient(double[::1] v, unsigned char[:, ::1] mask, double[:, ::1] out):
    """out_ji = orient_i m_ji v_j."""
    cdef Py_ssize_t n = out.shape[0], p = mask.shape[1]
    cdef Py_ssize_t j, i
    cdef double vj
    for j in range(n):
        vj = v[j]
        for i in range(p):
            if mask[j, i]:
                out[j, i] = vj
                out[j, i + p] = -vj
            else:
                out[j, i] = 0.0
                out[j, i + p] = 0.0


def cone_prox(double[:, ::1] xu, unsigned char[:, ::1] mask,
              double[:, ::1] zs, double[:, ::1] ws,
              double[:, ::1] dzw, double[:, ::1] dzbuf, double[:, ::1] swbuf,
              int extras):
    """Cone slack prox plus dual update, fused with residual accumulators.

    In:  xu = X u.  In/out: zs, ws.  Out: dzw = sg (zs - ws) for the next
    least-squares right-hand side; when ``extras`` also dzbuf = sg (zs_new -
    zs_old) and swbuf = sg ws_new for the dual-residual and eps-dual
    matmuls.  Returns (rs_sq, au_sq, zs_sq) partial norms.
    """
    cdef Py_ssize_t n = xu.shape[0], p = mask.shape[1]
    cdef Py_ssize_t j, i, half, col
    cdef double sg, au, yz, zn, wn, rs
    cdef double rs_sq = 0.0, au_sq = 0.0, zs_sq = 0.0
    for j in range(n):
        for i in range(p):
            sg = 1.0 if mask[j, i] else -1.0
            for half in range(2):
                col = i + half * p
                au = sg * xu[j, col]
                yz = au + ws[j, col]
                zn = yz if yz > 0.0 else 0.0
                wn = yz - zn
                rs = au - zn
                rs_sq += rs * rs
                au_sq += au * au
                zs_sq += zn * zn
                if extras:
                    dzbuf[j, col] = sg * (zn - zs[j, col])
                    swbuf[j, col] = sg * wn
                dzw[j, col] = sg * (zn - wn)
                zs[j, col] = zn
                ws[j, col] = wn
    return rs_sq, au_sq, zs_sq


def cone_violation(double[:, ::1] xu, unsigned char[:, ::1] mask):
    """max over entries of max(0, -sg xu); 0 for a cone-feasible point."""
    cdef Py_ssize_t n = xu.shape[0], p = mask.shape[1]
    cdef Py_ssize_t j, i
    cdef double sg, v, worst = 0.0
    for j in range(n):
        for i in range(p):
            sg = 1.0 if mask[j, i] else -1.0
            v = -sg * xu[j, i]
            if v > worst:
                worst = v
            v = -sg * xu[j, i + p]
            if v > worst:
                worst = v
    return worst


def soft_threshold(double[:, ::1] v, double thresh, double[:, ::1] out):
    """out = sign(v) max(|v| - thresh, 0)."""
    cdef Py_ssize_t a = v.shape[0], b = v.shape[1]
    cdef Py_ssize_t i, j
    cdef double x
    for i in range(a):
        for j in range(b):
            x = v[i, j]
            if x > thresh:
                out[i, j] = x - thresh
            elif x < -thresh:
                out[i, j] = x + thresh
            else:
                out[i, j] = 0.0


def oracle_loop(double[:, ::1] X, double[::1] y, unsigned char[:, ::1] mask,
                double lam, double lt, double lip, int iters, double t0,
                int proj_cycles):
    """Projected-gradient reference loop on the lifted split u = up - um.

    Dykstra's alternating projections handle the orthant and each cone row;
    steps diminish as 1/sqrt(1 + t/t0); the best exactly-evaluated feasible
    iterate is returned as (best_u, best_obj).
    """
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], p = mask.shape[1]
    cdef Py_ssize_t b2 = 2 * p
    cdef Py_ssize_t t, i, j, c, cyc
    cdef double sg, osr, acc, dot, eta, g, yp, yq, pp, qq, tpv, alpha, corr, a
    cdef double shift, viol, v, fit, obj, u

    row_sq_np = np.zeros(n)
    cdef double[::1] row_sq = row_sq_np
    for j in range(n):
        for c in range(d):
            row_sq[j] += X[j, c] * X[j, c]

    up_np = np.zeros((d, b2)); um_np = np.zeros((d, b2))
    inc_np = np.zeros((n + 1, 2, d, b2))
    best_np = np.zeros((b2, d))
    r_np = np.zeros(n)
    cdef double[:, ::1] up = up_np, um = um_np
    cdef double[:, :, :, ::1] inc = inc_np
    cdef double[:, ::1] best_u = best_np
    cdef double[::1] r = r_np

    cdef double best_obj = 0.0
    for j in range(n):
        best_obj += y[j] * y[j]
    best_obj /= n

    for t in range(iters):
        # gradient of the smooth lifted objective at u = up - um
        for j in range(n):
            acc = 0.0
            for i in range(b2):
                if mask[j, i % p]:
                    dot = 0.0
                    for c in range(d):
                        dot += X[j, c] * (up[c, i] - um[c, i])
                    acc += dot if i < p else -dot
            r[j] = acc - y[j]
        eta = 1.0 / (lip * sqrt(1.0 + t / t0))
        for i in range(b2):
            osr = 1.0 if i < p else -1.0
            for c in range(d):
                g = 2.0 * lt * (up[c, i] - um[c, i])
                for j in range(n):
                    if mask[j, i % p]:
                        g += (2.0 / n) * X[j, c] * osr * r[j]
                up[c, i] -= eta * (g + lam)
                um[c, i] -= eta * (-g + lam)

        # Dykstra cycles over the orthant and each cone row
        inc_np.fill(0.0)
        for cyc in range(proj_cycles):
            shift = 0.0
            for i in range(b2):
                for c in range(d):
                    yp = up[c, i] + inc[0, 0, c, i]
                    yq = um[c, i] + inc[0, 1, c, i]
                    pp = yp if yp > 0.0 else 0.0
                    qq = yq if yq > 0.0 else 0.0
                    inc[0, 0, c, i] = yp - pp
                    inc[0, 1, c, i] = yq - qq
                    up[c, i] = pp
                    um[c, i] = qq
            for j in range(n):
                for i in range(b2):
                    sg = 1.0 if mask[j, i % p] else -1.0
                    tpv = 0.0
                    for c in range(d):
                        yp = up[c, i] + inc[j + 1, 0, c, i]
                        yq = um[c, i] + inc[j + 1, 1, c, i]
                        up[c, i] = yp
                        um[c, i] = yq
                        tpv += X[j, c] * (yp - yq)
                    tpv *= sg
                    alpha = tpv / (2.0 * row_sq[j])
                    if alpha > 0.0:
                        alpha = 0.0
                    for c in range(d):
                        corr = X[j, c] * alpha * sg
                        up[c, i] -= corr
                        um[c, i] += corr
                        inc[j + 1, 0, c, i] = corr
                        inc[j + 1, 1, c, i] = -corr
                        a = corr if corr >= 0 else -corr
                        if a > shift:
                            shift = a
            if shift <= 1e-15:
                break

        # keep the best exactly-evaluated feasible iterate
        viol = 0.0
        for j in range(n):
            for i in range(b2):
                sg = 1.0 if mask[j, i % p] else -1.0
                dot = 0.0
                for c in range(d):
                    dot += X[j, c] * (up[c, i] - um[c, i])
                v = -sg * dot
                if v > viol:
                    viol = v
        if viol <= 1e-9:
            fit = 0.0
            for j in range(n):
                acc = 0.0
                for i in range(b2):
                    if mask[j, i % p]:
                        dot = 0.0
                        for c in range(d):
                            dot += X[j, c] * (up[c, i] - um[c, i])
                        acc += dot if i < p else -dot
                fit += (acc - y[j]) * (acc - y[j])
            obj = fit / n
            for i in range(b2):
                for c in range(d):
                    u = up[c, i] - um[c, i]
                    obj += lam * fabs(u) + lt * u * u
            if obj < best_obj:
                best_obj = obj
                for i in range(b2):
                    for c in range(d):
                        best_u[i, c] = up[c, i] - um[c, i]
    return best_np, best_obj
