"""Mollified shift and doubled-variable test function machinery.

The anisotropic mollification of the boundary shift C uses kernel scales
Lambda = sqrt(a^2 + (p.n(x))^2) and Gamma = sqrt(1 + |p|^2); after the unit
ball substitution the value is a tensor Gauss-Legendre sum of
C(x - (Lambda/Gamma) s, p - Lambda t).  The test function

  phi_a(x,y) = |x-y|^2/eps^2 + A/eps^2 (d(x)-d(y))^2 - B(d(x)+d(y))
               - C_a((x+y)/2, 2(x-y)/eps^2) (d(x)-d(y))

is evaluated together with its analytic gradient and Hessian via the
(X, Y, Z, T) change of variables, with the mollified-shift derivatives
supplied by central finite differences.

Scale coupling is frozen to eta = eps^(abar/(2-abar)), a = eps*eta.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from . import kernels
from .boundary import eval_G, kernel_descriptor, shift_values
from .errors import CalibrationError, ConfigError
from .geometry import as_points, wrap_difference

_BUMP_NORM_CACHE = {}


def _bump_radial(r2):
    out = np.zeros_like(r2)
    m = r2 < 1.0
    out[m] = np.exp(-1.0 / (1.0 - r2[m]))
    return out


class Mollifier:
    """Smooth even bump c*exp(-1/(1-|x|^2)) on the unit ball with a tensor
    Gauss-Legendre rule; the mass constant is normalized against the rule
    itself, so the shipped quadrature integrates the density to 1 exactly."""

    def __init__(self, dim, order=48):
        if order < 4:
            raise ConfigError("quadrature order must be at least 4")
        self.dim = int(dim)
        self.order = int(order)
        nodes, gl_weights = np.polynomial.legendre.leggauss(self.order)
        self.nodes = nodes
        if self.dim == 1:
            raw = gl_weights * _bump_radial(nodes**2)
        elif self.dim == 2:
            r2 = nodes[:, None] ** 2 + nodes[None, :] ** 2
            raw = np.outer(gl_weights, gl_weights) * _bump_radial(r2)
        else:
            raise ConfigError("mollifier supports dim 1 and 2")
        self.norm = float(raw.sum())
        self.weights = raw / self.norm

    def density(self, x):
        """The realized kernel rho (normalized bump)."""
        x = np.asarray(x, dtype=float)
        r2 = x**2 if self.dim == 1 else np.einsum("...i,...i->...", x, x)
        return _bump_radial(np.atleast_1d(r2)) / self.norm

    def mass_quadrature(self):
        return float(self.weights.sum())


@dataclass
class RegularizedShift:
    """Mollified boundary shift C_a at a fixed smoothing parameter a."""

    spec: object
    dfield: object
    a: float
    mollifier: Mollifier

    def __post_init__(self):
        if not 0.0 < self.a <= 1.0:
            raise ValueError("a must lie in (0,1]")
        if self.mollifier.dim != self.dfield.dim:
            raise ConfigError("mollifier dimension mismatch")


def lambda_gamma(dfield, X, P, A):
    """Anisotropic scales at (x, p): Lambda and Gamma."""
    X = as_points(X, dfield.dim)
    P = as_points(P, dfield.dim)
    n_x = -dfield._eval_unchecked(X)[1]
    pn = np.einsum("...i,...i->...", P, n_x)
    lam = np.sqrt(np.asarray(A, dtype=float) ** 2 + pn**2)
    gam = np.sqrt(1.0 + np.einsum("...i,...i->...", P, P))
    return lam, gam, pn


def mollified_shift(spec, dfield, moll, X, P, A):
    """Batched C_a; A may vary per sample.  Uses the compiled kernel when the
    spec is preset-codable, the generic numpy quadrature otherwise.  A bare
    callable C(y, q) is mollified as-is (test hook for synthetic shifts)."""
    X = as_points(X, dfield.dim).reshape(-1, dfield.dim)
    P = as_points(P, dfield.dim).reshape(-1, dfield.dim)
    A = np.broadcast_to(np.asarray(A, dtype=float), (X.shape[0],))
    if not callable(spec) or hasattr(spec, "nu"):
        desc = kernel_descriptor(spec, dfield)
        if desc is not None:
            return kernels.ca_batch(desc, X, P, A, moll.nodes, moll.weights)
    return _ca_generic(spec, dfield, moll, X, P, A)


def _ca_generic(spec, dfield, moll, X, P, A, chunk=256):
    """Reference quadrature; spec may be a boundary spec or a raw C(y,q)."""
    if callable(spec) and not hasattr(spec, "nu"):
        cfun = spec
    else:
        def cfun(Y, Q):
            return shift_values(spec, dfield, Y, Q)

    lam, gam, _ = lambda_gamma(dfield, X, P, A)
    out = np.empty(X.shape[0])
    s = moll.nodes
    d = dfield.dim
    if d == 1:
        W = moll.weights
        for lo in range(0, X.shape[0], chunk):
            sl = slice(lo, min(lo + chunk, X.shape[0]))
            ys = X[sl, 0, None] - (lam[sl] / gam[sl])[:, None] * s[None, :]
            qs = P[sl, 0, None] - lam[sl][:, None] * s[None, :]
            cvals = cfun(ys[:, :, None, None], qs[:, None, :, None])
            out[sl] = np.einsum("i,j,mij->m", W, W, cvals)
        return out
    W2 = moll.weights
    q = s.size
    S2 = np.stack(np.meshgrid(s, s, indexing="ij"), axis=-1).reshape(q * q, 2)
    Wf = W2.reshape(q * q)
    live = Wf > 0
    S2, Wf = S2[live], Wf[live]
    qpts = P[:, None, :] - lam[:, None, None] * S2[None, :, :]
    out[:] = 0.0
    for i in range(S2.shape[0]):
        yi = X - (lam / gam)[:, None] * S2[i]
        ci = cfun(yi[:, None, :], qpts)
        out += Wf[i] * (ci * Wf[None, :]).sum(axis=1)
    return out


def eval_C_a(shift: RegularizedShift, x, p):
    """Scalar C_a(x,p)."""
    val = mollified_shift(
        shift.spec, shift.dfield, shift.mollifier, x, p, shift.a
    )
    return float(val[0]) if val.size == 1 else val


def fd_step(a):
    step = max(1e-5, float(np.min(a)) * 1e-3)
    if step <= 0.0 or not np.isfinite(step):
        raise ConfigError("finite-difference step underflow")
    return step


def ca_derivatives(spec, dfield, moll, X, P, A):
    """C_a and its first/second derivative tensors by central differences.

    One batched quadrature call covers the whole stencil; second derivatives
    are symmetrized.  Returns a dict with keys value, dx, dp, dxx, dxp, dpp.
    """
    d = dfield.dim
    X = as_points(X, d).reshape(-1, d)
    P = as_points(P, d).reshape(-1, d)
    M = X.shape[0]
    A = np.broadcast_to(np.asarray(A, dtype=float), (M,))
    h = fd_step(A)

    offsets = [(np.zeros(d), np.zeros(d))]

    def off(i, s, which):
        e = np.zeros(d)
        e[i] = s * h
        return (e, np.zeros(d)) if which == "x" else (np.zeros(d), e)

    for i in range(d):
        for s in (+1, -1):
            offsets.append(off(i, s, "x"))
            offsets.append(off(i, s, "p"))
    for i in range(d):
        for j in range(i + 1, d):
            for si in (+1, -1):
                for sj in (+1, -1):
                    ex = np.zeros(d)
                    ex[i] = si * h
                    ey = np.zeros(d)
                    ey[j] = sj * h
                    offsets.append((ex + ey, np.zeros(d)))
                    offsets.append((np.zeros(d), ex + ey))
    for i in range(d):
        for j in range(d):
            for si in (+1, -1):
                for sj in (+1, -1):
                    ex = np.zeros(d)
                    ex[i] = si * h
                    ep = np.zeros(d)
                    ep[j] = sj * h
                    offsets.append((ex, ep))

    key = {}
    Xs, Ps = [], []
    for k, (ox, op_) in enumerate(offsets):
        key[(tuple(np.round(ox / h).astype(int)), tuple(np.round(op_ / h).astype(int)))] = k
        Xs.append(X + ox)
        Ps.append(P + op_)
    vals = mollified_shift(
        spec, dfield, moll,
        np.concatenate(Xs), np.concatenate(Ps), np.tile(A, len(offsets)),
    ).reshape(len(offsets), M)

    def v(ox, op_):
        return vals[key[(tuple(ox), tuple(op_))]]

    zero = (0,) * d

    def unit(i, s):
        u = [0] * d
        u[i] = s
        return tuple(u)

    value = v(zero, zero)
    dx = np.stack([(v(unit(i, 1), zero) - v(unit(i, -1), zero)) / (2 * h) for i in range(d)], axis=-1)
    dp = np.stack([(v(zero, unit(i, 1)) - v(zero, unit(i, -1))) / (2 * h) for i in range(d)], axis=-1)

    def second(block):
        out = np.empty((M, d, d))
        for i in range(d):
            if block == "xx":
                out[:, i, i] = (v(unit(i, 1), zero) - 2 * value + v(unit(i, -1), zero)) / h**2
            else:
                out[:, i, i] = (v(zero, unit(i, 1)) - 2 * value + v(zero, unit(i, -1))) / h**2
        for i in range(d):
            for j in range(i + 1, d):
                def pair(si, sj):
                    u = [0] * d
                    u[i] = si
                    u[j] = sj
                    return tuple(u)
                if block == "xx":
                    mixed = (v(pair(1, 1), zero) - v(pair(1, -1), zero)
                             - v(pair(-1, 1), zero) + v(pair(-1, -1), zero)) / (4 * h**2)
                else:
                    mixed = (v(zero, pair(1, 1)) - v(zero, pair(1, -1))
                             - v(zero, pair(-1, 1)) + v(zero, pair(-1, -1))) / (4 * h**2)
                out[:, i, j] = mixed
                out[:, j, i] = mixed
        return out

    dxx = second("xx")
    dpp = second("pp")
    dxp = np.empty((M, d, d))
    for i in range(d):
        for j in range(d):
            dxp[:, i, j] = (
                v(unit(i, 1), unit(j, 1)) - v(unit(i, 1), unit(j, -1))
                - v(unit(i, -1), unit(j, 1)) + v(unit(i, -1), unit(j, -1))
            ) / (4 * h**2)
    return {"value": value, "dx": dx, "dp": dp, "dxx": dxx, "dxp": dxp, "dpp": dpp}


def deriv_C_a(shift: RegularizedShift, x, p, which):
    """Single derivative tensor of C_a; which in {Dx, Dp, Dxx, Dxp, Dpp}."""
    table = {"Dx": "dx", "Dp": "dp", "Dxx": "dxx", "Dxp": "dxp", "Dpp": "dpp"}
    if which not in table:
        raise ValueError(f"unknown derivative selector {which!r}")
    out = ca_derivatives(
        shift.spec, shift.dfield, shift.mollifier, x, p, shift.a
    )[table[which]]
    return out[0] if out.shape[0] == 1 else out


def coupling(eps, alpha_bar):
    """Frozen scale coupling: eta = eps^(abar/(2-abar)), a = eps*eta."""
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0,1]")
    if not 0.0 < alpha_bar <= 1.0:
        raise ValueError("alpha_bar must lie in (0,1]")
    eta = eps ** (alpha_bar / (2.0 - alpha_bar))
    return eta, eps * eta


def choose_AB(eps, alpha_bar, nu1, nu2, mu1, mu2, K):
    """(A, B) from the boundary-avoidance recipe:
    A = K, B = K(eta^2+eps^2+a) + K/(nu1 v nu2) (mu1 + mu2 eta/eps)."""
    if min(nu1, nu2) <= 0:
        raise ValueError("nonpositive nu")
    eta, a = coupling(eps, alpha_bar)
    B = K * (eta**2 + eps**2 + a) + K / max(nu1, nu2) * (mu1 + mu2 * eta / eps)
    return float(K), float(B)


@dataclass
class TestFunction:
    """phi_a bundle at one eps; the shift is mollified from the second spec."""

    __test__ = False  # not a pytest class

    eps: float
    eta: float
    a: float
    A: float
    B: float
    alpha_bar: float
    shift: RegularizedShift
    dfield: object

    @classmethod
    def make(cls, eps, alpha_bar, A, B, spec2, dfield, moll):
        eta, a = coupling(eps, alpha_bar)
        if not eps <= eta <= 1.0:
            raise ValueError("scale coupling violated")
        if A < 0 or B < 0:
            raise ValueError("A and B must be nonnegative")
        shift = RegularizedShift(spec2, dfield, a, moll)
        return cls(eps, eta, a, A, B, alpha_bar, shift, dfield)

    def _ca_args(self, X, Y):
        diff = wrap_difference(self.dfield.domain, X, Y)
        mid = Y + 0.5 * diff
        return mid, 2.0 * diff / self.eps**2, diff


def eval_phi(tf: TestFunction, x, y):
    """phi_a(x,y); accepts batches."""
    d = tf.dfield.dim
    X = as_points(x, d)
    Y = as_points(y, d)
    mid, parg, diff = tf._ca_args(X, Y)
    dx_v = tf.dfield.value(X)
    dy_v = tf.dfield.value(Y)
    z = dx_v - dy_v
    ca = mollified_shift(
        tf.shift.spec, tf.dfield, tf.shift.mollifier, mid, parg, tf.a
    ).reshape(z.shape)
    quad = np.einsum("...i,...i->...", diff, diff) / tf.eps**2
    val = quad + tf.A / tf.eps**2 * z**2 - tf.B * (dx_v + dy_v) - ca * z
    return float(val) if val.shape == () else val


def grad_hess_phi(tf: TestFunction, x, y):
    """(D_x phi, D_y phi, D^2 phi) with the 2Nx2N Hessian; batched."""
    d = tf.dfield.dim
    X = as_points(x, d).reshape(-1, d)
    Y = as_points(y, d).reshape(-1, d)
    M = X.shape[0]
    mid, parg, diff = tf._ca_args(X, Y)
    dx_v, gx, hx = tf.dfield._eval_unchecked(X)
    dy_v, gy, hy = tf.dfield._eval_unchecked(Y)
    z = dx_v - dy_v
    eps2 = tf.eps**2
    der = ca_derivatives(tf.shift.spec, tf.dfield, tf.shift.mollifier, mid, parg, tf.a)
    ca = der["value"]

    # first derivatives of Phi(X,Y,Z,T)
    dPhi_X = -der["dx"] * z[:, None]
    dPhi_Y = 2.0 * diff / eps2 - (2.0 / eps2) * der["dp"] * z[:, None]
    dPhi_Z = -ca + 2.0 * tf.A * z / eps2
    dPhi_T = np.full(M, -tf.B)

    grad_x = 0.5 * dPhi_X + dPhi_Y + (dPhi_Z + dPhi_T)[:, None] * gx
    grad_y = 0.5 * dPhi_X - dPhi_Y + (-dPhi_Z + dPhi_T)[:, None] * gy

    # Hessian blocks of Phi in (X, Y, Z, T)
    nv = 2 * d + 2
    d2Phi = np.zeros((M, nv, nv))
    sx = slice(0, d)
    sy = slice(d, 2 * d)
    iz = 2 * d
    it = 2 * d + 1
    d2Phi[:, sx, sx] = -der["dxx"] * z[:, None, None]
    d2Phi[:, sx, sy] = -(2.0 / eps2) * der["dxp"] * z[:, None, None]
    d2Phi[:, sy, sx] = np.swapaxes(d2Phi[:, sx, sy], 1, 2)
    d2Phi[:, sy, sy] = (2.0 / eps2) * np.eye(d) - (4.0 / eps2**2) * der["dpp"] * z[:, None, None]
    d2Phi[:, sx, iz] = -der["dx"]
    d2Phi[:, iz, sx] = -der["dx"]
    d2Phi[:, sy, iz] = -(2.0 / eps2) * der["dp"]
    d2Phi[:, iz, sy] = -(2.0 / eps2) * der["dp"]
    d2Phi[:, iz, iz] = 2.0 * tf.A / eps2

    # Jacobian of (X,Y,Z,T) w.r.t. (x,y)
    J = np.zeros((M, nv, 2 * d))
    eye = np.eye(d)
    J[:, sx, :d] = 0.5 * eye
    J[:, sx, d:] = 0.5 * eye
    J[:, sy, :d] = eye
    J[:, sy, d:] = -eye
    J[:, iz, :d] = gx
    J[:, iz, d:] = -gy
    J[:, it, :d] = gx
    J[:, it, d:] = gy

    hess = np.einsum("mvi,mvw,mwj->mij", J, d2Phi, J)
    hess[:, :d, :d] += (dPhi_Z + dPhi_T)[:, None, None] * hx
    hess[:, d:, d:] += (-dPhi_Z + dPhi_T)[:, None, None] * hy
    if M == 1:
        return grad_x[0], grad_y[0], hess[0]
    return grad_x, grad_y, hess


# ---------------------------------------------------------------------------
# lemma checkers
# ---------------------------------------------------------------------------

_LEMGUY_BOUNDS = ("ca", "ca_minus_c", "dx", "dp", "dxx", "dxp", "dpp")


def _specnorm(T):
    return np.linalg.norm(T, ord=2, axis=(-2, -1))


def check_lemguy(spec, dfield, moll, samples, constants=None, margin=0.10):
    """Fit the seven mollified-shift bounds on an (x,p,a) grid.

    Envelopes: |C_a| <= K Gamma, |C_a - C| <= K(a + |p.n|), |DxC_a| <= K Gamma,
    |DpC_a| <= K, |DxxC_a| <= K Gamma^2/Lambda, |DxpC_a| <= K Gamma/Lambda,
    |DppC_a| <= K/Lambda.  Returns per-bound fitted constants and violation
    counts at the supplied (or fitted) constants plus a 10% margin.
    """
    X, P, A = samples
    X = as_points(X, dfield.dim).reshape(-1, dfield.dim)
    P = as_points(P, dfield.dim).reshape(-1, dfield.dim)
    A = np.broadcast_to(np.asarray(A, dtype=float), (X.shape[0],))
    lam, gam, pn = lambda_gamma(dfield, X, P, A)
    der = ca_derivatives(spec, dfield, moll, X, P, A)
    if callable(spec) and not hasattr(spec, "nu"):
        c_exact = spec(X, P)
    else:
        c_exact = shift_values(spec, dfield, X, P)
    quantities = {
        "ca": np.abs(der["value"]),
        "ca_minus_c": np.abs(der["value"] - c_exact),
        "dx": np.linalg.norm(der["dx"], axis=-1),
        "dp": np.linalg.norm(der["dp"], axis=-1),
        "dxx": _specnorm(der["dxx"]),
        "dxp": _specnorm(der["dxp"]),
        "dpp": _specnorm(der["dpp"]),
    }
    envelopes = {
        "ca": gam,
        "ca_minus_c": A + np.abs(pn),
        "dx": gam,
        "dp": np.ones_like(gam),
        "dxx": gam**2 / lam,
        "dxp": gam / lam,
        "dpp": 1.0 / lam,
    }
    report = {}
    for name in _LEMGUY_BOUNDS:
        ratio = quantities[name] / envelopes[name]
        k_hat = float(np.max(ratio, initial=0.0))
        k_ref = k_hat if constants is None else constants[name]
        viol = int(np.count_nonzero(
            quantities[name] > (1.0 + margin) * k_ref * envelopes[name] + 1e-12
        ))
        report[name] = {"k_hat": k_hat, "violations": viol}
    report["samples"] = int(X.shape[0])
    return report


def check_lem_pos(spec2, dfield, moll, samples, alpha_bar, A, k0=None, margin=0.10):
    """(violations, K0_hat) for
    phi_a(x,y) >= |x-y|^2/(2 eps^2) - K0 eps^2 - B(d(x)+d(y)).
    The B-terms cancel, so the check is B-independent."""
    X, Y, epss = samples
    epss = np.asarray(epss, dtype=float)
    deficits = np.empty(epss.shape[0])
    for eps in np.unique(epss):
        m = epss == eps
        tf = TestFunction.make(eps, alpha_bar, A, 0.0, spec2, dfield, moll)
        phi = eval_phi(tf, X[m], Y[m])
        diff = wrap_difference(dfield.domain, as_points(X[m], dfield.dim),
                               as_points(Y[m], dfield.dim))
        quad_half = 0.5 * np.einsum("...i,...i->...", diff, diff) / eps**2
        deficits[m] = (quad_half - phi) / eps**2
    k0_hat = float(np.max(deficits, initial=0.0))
    k0_ref = k0_hat if k0 is None else k0
    viol = int(np.count_nonzero(deficits > (1.0 + margin) * k0_ref + 1e-12))
    return viol, k0_hat


def calibrate_A_lem_pos(spec2, dfield, moll, cal_samples, val_samples, alpha_bar,
                        max_exp=20, margin=0.10):
    """Doubling search for A: smallest power of two whose calibration-fitted
    K0 transfers to fresh samples with zero violations."""
    for e in range(max_exp + 1):
        A = float(2**e)
        _, k0 = check_lem_pos(spec2, dfield, moll, cal_samples, alpha_bar, A)
        viol, _ = check_lem_pos(
            spec2, dfield, moll, val_samples, alpha_bar, A, k0=k0, margin=margin
        )
        if viol == 0:
            return A, k0
    raise CalibrationError(f"A sweep exhausted at 2^{max_exp}")


def check_lem_BC(spec1, spec2, dfield, moll, samples, alpha_bar, K,
                 mu1, mu2, k1_scale=1.0, b_override=None):
    """(violations_x, violations_y) for the boundary-avoidance signs:
    G1(x, D_x phi) > 0 at x on the wall and G2(y, -D_y phi) < 0 at y on it.

    Samples are (x, y, eps) with |x-y| <= K1 eta eps; A and B come from
    choose_AB unless b_override pins B (negative controls pass 0)."""
    X, Y, epss = samples
    X = as_points(X, dfield.dim).reshape(-1, dfield.dim)
    Y = as_points(Y, dfield.dim).reshape(-1, dfield.dim)
    epss = np.asarray(epss, dtype=float)
    nu1, nu2 = spec1.nu, spec2.nu
    viol_x = viol_y = 0
    for eps in np.unique(epss):
        m = epss == eps
        eta, _ = coupling(eps, alpha_bar)
        dist = np.linalg.norm(
            wrap_difference(dfield.domain, X[m], Y[m]), axis=-1
        )
        if np.any(dist > k1_scale * eta * eps * (1 + 1e-12)):
            raise ValueError("samples must satisfy |x-y| <= K1 eta eps")
        A, B = choose_AB(eps, alpha_bar, nu1, nu2, mu1, mu2, K)
        if b_override is not None:
            B = b_override
        tf = TestFunction.make(eps, alpha_bar, A, B, spec2, dfield, moll)
        gx, gy, _ = grad_hess_phi(tf, X[m], Y[m])
        gx = np.atleast_2d(gx)
        gy = np.atleast_2d(gy)
        on_x = np.isclose(dfield.value(X[m]), 0.0, atol=1e-12)
        on_y = np.isclose(dfield.value(Y[m]), 0.0, atol=1e-12)
        if np.any(on_x):
            g1 = eval_G(spec1, dfield, X[m][on_x], gx[on_x])
            viol_x += int(np.count_nonzero(g1 <= 0.0))
        if np.any(on_y):
            g2 = eval_G(spec2, dfield, Y[m][on_y], -gy[on_y])
            viol_y += int(np.count_nonzero(g2 >= 0.0))
    return viol_x, viol_y


def calibrate_K_lem_BC(spec1, spec2, dfield, moll, samples, alpha_bar,
                       mu1, mu2, max_exp=10):
    """Smallest K in 2^0..2^max_exp with zero boundary-sign violations."""
    for e in range(max_exp + 1):
        K = float(2**e)
        vx, vy = check_lem_BC(
            spec1, spec2, dfield, moll, samples, alpha_bar, K, mu1, mu2
        )
        if vx == 0 and vy == 0:
            return K
    raise CalibrationError(f"K sweep exhausted at 2^{max_exp}")


_LEM_DERIV_BOUNDS = ("pmqest", "pmqest2", "lwrbd", "scnd")


def check_lem_deriv(spec2, dfield, moll, samples, alpha_bar, A, B,
                    constants=None, margin=0.10):
    """Fit the four derivative displays of the test function.

    pmqest : |Dx+Dy| <= K(|x-y|^2/eps^2 + eps^2) + 2B
    pmqest2: |Dx|+|Dy| <= K(eps^2 + |x-y|^2/eps^2 + |x-y|/eps^2) + 2B
    lwrbd  : min(|Dx|,|Dy|) >= |x-y|/(2eps^2) (1 - eps^2[B+K(1+A)]) - K(eps^2+B)
    scnd   : D^2 phi <= K [ c1/eps^2 J + (c1(eta^2+eps^2)+B) I ],
             c1 = 1 + (eps/a) eta^3 = 1 + eta^2 under the frozen coupling,
             checked as a generalized eigenvalue problem.
    """
    X, Y, epss = samples
    X = as_points(X, dfield.dim).reshape(-1, dfield.dim)
    Y = as_points(Y, dfield.dim).reshape(-1, dfield.dim)
    epss = np.asarray(epss, dtype=float)
    d = dfield.dim
    fits = {name: np.zeros(epss.shape[0]) for name in _LEM_DERIV_BOUNDS}
    for eps in np.unique(epss):
        m = np.nonzero(epss == eps)[0]
        eta, a = coupling(eps, alpha_bar)
        tf = TestFunction.make(eps, alpha_bar, A, B, spec2, dfield, moll)
        gx, gy, hess = grad_hess_phi(tf, X[m], Y[m])
        gx = np.atleast_2d(gx)
        gy = np.atleast_2d(gy)
        hess = hess.reshape(-1, 2 * d, 2 * d)
        dist = np.linalg.norm(wrap_difference(dfield.domain, X[m], Y[m]), axis=-1)
        nx = np.linalg.norm(gx, axis=-1)
        ny = np.linalg.norm(gy, axis=-1)
        nsum = np.linalg.norm(gx + gy, axis=-1)
        fits["pmqest"][m] = np.maximum(nsum - 2 * B, 0.0) / (dist**2 / eps**2 + eps**2)
        fits["pmqest2"][m] = np.maximum(nx + ny - 2 * B, 0.0) / (
            eps**2 + dist**2 / eps**2 + dist / eps**2
        )
        fits["lwrbd"][m] = np.maximum(
            dist / (2 * eps**2) * (1.0 - eps**2 * B) - np.minimum(nx, ny), 0.0
        ) / ((1.0 + A) * dist / 2.0 + eps**2 + B)
        c1 = 1.0 + (eps / a) * eta**3
        block = np.block(
            [[np.eye(d), -np.eye(d)], [-np.eye(d), np.eye(d)]]
        )
        m1 = c1 / eps**2 * block + (c1 * (eta**2 + eps**2) + B) * np.eye(2 * d)
        for row, idx in enumerate(m):
            w = eigh(hess[row], m1, eigvals_only=True)
            fits["scnd"][idx] = max(0.0, float(w[-1]))
    report = {}
    for name in _LEM_DERIV_BOUNDS:
        k_hat = float(np.max(fits[name], initial=0.0))
        k_ref = k_hat if constants is None else constants[name]
        viol = int(np.count_nonzero(fits[name] > (1.0 + margin) * k_ref + 1e-12))
        report[name] = {"k_hat": k_hat, "violations": viol}
    report["samples"] = int(epss.shape[0])
    return report
