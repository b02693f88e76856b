"""Pure-numpy twins of the compiled kernels.

Selected at import when the Cython extension is missing (or when
PATHCVX_PURE_PYTHON=1).  Semantics match _kernels exactly; floating-point
results may differ at rounding level because summation orders differ.
"""

import numpy as np


def _signs(mask):
    s = 2.0 * mask.astype(float) - 1.0
    return np.hstack([s, s])


def rowsum_orient(xu, mask, out):
    p = mask.shape[1]
    m = mask.astype(float)
    np.einsum("ji,ji->j", m, xu[:, :p] - xu[:, p:], out=out)


def broadcast_orient(v, mask, out):
    p = mask.shape[1]
    m = mask.astype(float)
    out[:, :p] = m * v[:, None]
    out[:, p:] = -out[:, :p]


def cone_prox(xu, mask, zs, ws, dzw, dzbuf, swbuf, extras):
    sg = _signs(mask)
    au = sg * xu
    yz = au + ws
    zn = np.maximum(yz, 0.0)
    wn = yz - zn
    rs = au - zn
    rs_sq = float(np.dot(rs.ravel(), rs.ravel()))
    au_sq = float(np.dot(au.ravel(), au.ravel()))
    zs_sq = float(np.dot(zn.ravel(), zn.ravel()))
    if extras:
        np.multiply(sg, zn - zs, out=dzbuf)
        np.multiply(sg, wn, out=swbuf)
    np.multiply(sg, zn - wn, out=dzw)
    zs[...] = zn
    ws[...] = wn
    return rs_sq, au_sq, zs_sq


def cone_violation(xu, mask):
    sg = _signs(mask)
    return float(np.maximum(0.0, -(sg * xu)).max(initial=0.0))


def soft_threshold(v, thresh, out):
    np.multiply(np.sign(v), np.maximum(np.abs(v) - thresh, 0.0), out=out)


def oracle_loop(X, y, mask, lam, lt, lip, iters, t0, proj_cycles):
    n, d = X.shape
    p = mask.shape[1]
    b2 = 2 * p
    m = mask.astype(float)
    os_ = np.hstack([m, -m])
    sg = _signs(mask)
    row_sq = (X * X).sum(axis=1)

    def g_apply(delta):
        return (os_ * (X @ delta)).sum(axis=1)

    def gt_apply(v):
        return X.T @ (os_ * v[:, None])

    def project(pp, qq):
        inc = np.zeros((n + 1, 2, d, b2))
        for _ in range(proj_cycles):
            shift = 0.0
            yp = pp + inc[0, 0]
            yq = qq + inc[0, 1]
            pp = np.maximum(yp, 0.0)
            qq = np.maximum(yq, 0.0)
            inc[0, 0] = yp - pp
            inc[0, 1] = yq - qq
            for j in range(n):
                yp = pp + inc[j + 1, 0]
                yq = qq + inc[j + 1, 1]
                t = (X[j] @ (yp - yq)) * sg[j]
                alpha = np.minimum(0.0, t / (2.0 * row_sq[j]))
                corr = np.outer(X[j], alpha * sg[j])
                pp = yp - corr
                qq = yq + corr
                inc[j + 1, 0] = yp - pp
                inc[j + 1, 1] = yq - qq
                shift = max(shift, float(np.abs(corr).max(initial=0.0)))
            if shift <= 1e-15:
                break
        return pp, qq

    up = np.zeros((d, b2))
    um = np.zeros((d, b2))
    best_u = np.zeros((b2, d))
    best_obj = float(y @ y) / n
    for t in range(iters):
        delta = up - um
        r = g_apply(delta) - y
        gbase = (2.0 / n) * gt_apply(r) + 2.0 * lt * delta
        eta = 1.0 / (lip * np.sqrt(1.0 + t / t0))
        up = up - eta * (gbase + lam)
        um = um - eta * (-gbase + lam)
        up, um = project(up, um)
        u = up - um
        viol = float(np.maximum(0.0, -(sg * (X @ u))).max(initial=0.0))
        if viol <= 1e-9:
            resid = g_apply(u) - y
            obj = float(resid @ resid) / n + lam * float(np.abs(u).sum()) \
                + lt * float((u * u).sum())
            if obj < best_obj:
                best_obj = obj
                best_u = np.ascontiguousarray(u.T)
    return best_u, best_obj
