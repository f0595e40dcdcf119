"""Pure-numpy kernel backend.

Operates on the flattened spec descriptor produced by
boundary.kernel_descriptor, mirroring the compiled extension exactly:
shift_batch evaluates the extended normal-shift C(y,q) on point batches and
ca_batch evaluates its anisotropic mollification by tensor quadrature.
"""

import numpy as np

# variant codes
NEUMANN, OBLIQUE, CAPILLARY, REFLECTION = 0, 1, 2, 3
# domain codes
INTERVAL, STRIP, DISC = 0, 1, 2


def _coef(c7, x0, x1):
    return (
        c7[0]
        + c7[1] * x0
        + c7[2] * x1
        + c7[3] * np.sin(c7[4] * x0 + c7[5] * x1 + c7[6])
    )


def _phi_prime(s, r0):
    half = 0.5 * r0
    t = np.clip((s - half) / half, 0.0, 1.0)
    ramp = 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
    return np.where(s <= half, 1.0, ramp)


def _blend(t):
    t = np.clip(t, 0.0, 1.0)
    return t**4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t**3)


def _normal_ext(ints, floats, X):
    """Extended normal n(x) = -Dd(x); shape (..., dim)."""
    dcode = ints[1]
    r0 = floats[2]
    if dcode == INTERVAL:
        a, b = floats[0], floats[1]
        s_left = X[..., 0] - a
        s_right = b - X[..., 0]
        left = s_left <= s_right
        s = np.where(left, s_left, s_right)
        return (-_phi_prime(s, r0) * np.where(left, 1.0, -1.0))[..., None]
    if dcode == STRIP:
        h = floats[1]
        s_bot = X[..., 1]
        s_top = h - X[..., 1]
        bot = s_bot <= s_top
        s = np.where(bot, s_bot, s_top)
        out = np.zeros(X.shape)
        out[..., 1] = -_phi_prime(s, r0) * np.where(bot, 1.0, -1.0)
        return out
    radius = floats[0]
    r = np.hypot(X[..., 0], X[..., 1])
    safe = np.maximum(r, 1e-300)
    s = radius - r
    return _phi_prime(s, r0)[..., None] * X / safe[..., None]


def _root_one_side(ints, rows, px0, px1, n, Q):
    """Shift root for one boundary side; n is (...,dim), Q is (...,dim)."""
    variant, nc1, nc2 = ints[2], ints[3], ints[4]
    d = ints[0]
    qn = np.einsum("...i,...i->...", Q, n)
    if variant == NEUMANN:
        return _coef(rows[0, :7], px0, px1) - qn
    if variant == OBLIQUE:
        g = _coef(rows[0, :7], px0, px1)
        gam = np.stack(
            [_coef(rows[0, 7 + 7 * k : 14 + 7 * k], px0, px1) for k in range(d)], axis=-1
        )
        return (g - np.einsum("...i,...i->...", gam, Q)) / np.einsum(
            "...i,...i->...", gam, n
        )
    if variant == CAPILLARY:
        th = _coef(rows[0, :7], px0, px1)
        ptan2 = np.maximum(np.einsum("...i,...i->...", Q, Q) - qn * qn, 0.0)
        tau = th * np.sqrt((1.0 + ptan2) / (1.0 - th * th))
        return tau - qn
    # controlled reflection: root = max over outer controls of min over inner
    out = None
    for i in range(nc1):
        inner = None
        for j in range(nc2):
            row = rows[i * nc2 + j]
            g = _coef(row[:7], px0, px1)
            gam = np.stack(
                [_coef(row[7 + 7 * k : 14 + 7 * k], px0, px1) for k in range(d)], axis=-1
            )
            t = (g - np.einsum("...i,...i->...", gam, Q)) / np.einsum(
                "...i,...i->...", gam, n
            )
            inner = t if inner is None else np.minimum(inner, t)
        out = inner if out is None else np.maximum(out, inner)
    return out


def _sides(ints, floats, Y):
    """(px0, px1, normal, weight) per blended boundary side."""
    dcode = ints[1]
    r0 = floats[2]
    base = Y.shape[:-1]
    if dcode == INTERVAL:
        a, b = floats[0], floats[1]
        lo, hi = a + 0.5 * r0, b - 0.5 * r0
        w = _blend((hi - Y[..., 0]) / (hi - lo))
        nl = np.full(base + (1,), -1.0)
        nr = np.full(base + (1,), 1.0)
        zeros = np.zeros(base)
        return [
            (np.full(base, a), zeros, nl, w),
            (np.full(base, b), zeros, nr, 1.0 - w),
        ]
    if dcode == STRIP:
        period, height = floats[0], floats[1]
        lo, hi = 0.5 * r0, height - 0.5 * r0
        w = _blend((hi - Y[..., 1]) / (hi - lo))
        x1 = Y[..., 0] % period
        nb = np.zeros(base + (2,))
        nb[..., 1] = -1.0
        nt = np.zeros(base + (2,))
        nt[..., 1] = 1.0
        return [
            (x1, np.zeros(base), nb, w),
            (x1, np.full(base, height), nt, 1.0 - w),
        ]
    radius = floats[0]
    r = np.hypot(Y[..., 0], Y[..., 1])
    safe = np.maximum(r, 1e-300)
    xhat = Y / safe[..., None]
    fallback = np.zeros(base + (2,))
    fallback[..., 0] = 1.0
    xhat = np.where(r[..., None] >= 1e-300, xhat, fallback)
    return [(radius * xhat[..., 0], radius * xhat[..., 1], xhat, np.ones(base))]


def shift_batch(desc, Y, Q):
    """Extended shift C(y,q) for batches Y, Q of shape (..., dim)."""
    ints, floats, rows = desc
    Y = np.asarray(Y, dtype=float)
    Q = np.asarray(Q, dtype=float)
    out = np.zeros(np.broadcast_shapes(Y.shape[:-1], Q.shape[:-1]))
    for px0, px1, n, w in _sides(ints, floats, Y):
        out = out + w * _root_one_side(ints, rows, px0, px1, n, Q)
    return out


def ca_batch(desc, X, P, A, nodes, W):
    """Mollified shift C_a at samples (X, P, A).

    nodes are the per-axis Gauss-Legendre points; W is the normalized weight
    tensor (q,) in 1D or (q, q) in 2D.  Both integrals run over the unit ball
    after the anisotropic substitution, so the integrand is
    C(x - (lam/gam) s, p - lam t) with lam = sqrt(a^2 + (p.n(x))^2) and
    gam = sqrt(1 + |p|^2).
    """
    ints, floats, rows = desc
    d = int(ints[0])
    X = np.asarray(X, dtype=float).reshape(-1, d)
    P = np.asarray(P, dtype=float).reshape(-1, d)
    A = np.broadcast_to(np.asarray(A, dtype=float), (X.shape[0],))
    n_x = _normal_ext(ints, floats, X)
    pn = np.einsum("mi,mi->m", P, n_x)
    lam = np.sqrt(A * A + pn * pn)
    gam = np.sqrt(1.0 + np.einsum("mi,mi->m", P, P))
    if d == 1:
        s = np.asarray(nodes, dtype=float)
        w1 = np.asarray(W, dtype=float)
        ys = X[:, 0, None] - (lam / gam)[:, None] * s[None, :]
        qs = P[:, 0, None] - lam[:, None] * s[None, :]
        # interval sides separate: C(y,q) = wL(y) rootL(q) + wR(y) rootR(q)
        (pa0, pa1, nl, wl), (pb0, pb1, nr, wr) = _sides(ints, floats, ys[..., None])
        root_l = _root_one_side(ints, rows, pa0[:, :1], pa1[:, :1], nl[:, :1, :], qs[..., None])
        root_r = _root_one_side(ints, rows, pb0[:, :1], pb1[:, :1], nr[:, :1, :], qs[..., None])
        return (wl * w1).sum(axis=1) * (root_l * w1).sum(axis=1) + (wr * w1).sum(
            axis=1
        ) * (root_r * w1).sum(axis=1)
    # 2D: tensor nodes over the box, loop y-nodes to bound memory
    s = np.asarray(nodes, dtype=float)
    W2 = np.asarray(W, dtype=float)
    q = s.size
    S2 = np.stack(np.meshgrid(s, s, indexing="ij"), axis=-1).reshape(q * q, 2)
    Wf = W2.reshape(q * q)
    live = Wf > 0.0
    S2, Wf = S2[live], Wf[live]
    qpts = P[:, None, :] - lam[:, None, None] * S2[None, :, :]
    out = np.zeros(X.shape[0])
    for i in range(S2.shape[0]):
        yi = X - (lam / gam)[:, None] * S2[i]
        ci = shift_batch(desc, yi[:, None, :], qpts)
        out += Wf[i] * (ci * Wf[None, :]).sum(axis=1)
    return out
