"""Boundary nonlinearities G(x,p), assumption probes, and the normal shift.

The shift C(x,p) is the unique root of t -> G(x, p + t n(x)); strict
monotonicity in the normal direction makes bracketed bisection safe, and all
four shipped variants also admit closed forms (piecewise-linear root algebra
for the controlled reflection, a quadratic for the capillary condition) used
by the vectorized evaluator behind the mollification kernels.

Off the wall, coefficients ride along the closest-point projection; between
the two boundary zones of an interval or strip the per-side shifts are
blended linearly so the Lipschitz shift bounds survive on all of R^N.
"""

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .errors import AssumptionViolation, DomainError
from .fields import as_scalar_field, as_vector_field
from .geometry import as_points, boundary_sides, contains

DEFAULT_SHIFT_TOL = 1e-12


@dataclass(frozen=True)
class Neumann:
    """G(x,p) = p.n(x) - g(x)."""

    g: object
    nu: float = 1.0
    lip: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "g", as_scalar_field(self.g))


@dataclass(frozen=True)
class Oblique:
    """G(x,p) = gamma(x).p - g(x), gamma.n >= nu > 0."""

    gamma: object
    g: object
    nu: float
    lip: float = 1.0
    dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_vector_field(self.gamma, self.dim))
        object.__setattr__(self, "g", as_scalar_field(self.g))


@dataclass(frozen=True)
class Capillary:
    """G(x,p) = p.n(x) - theta(x) sqrt(1+|p|^2), sup|theta| <= omega < 1."""

    theta: object
    omega: float
    lip: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "theta", as_scalar_field(self.theta))
        if not 0.0 <= self.omega < 1.0:
            raise ValueError("capillary needs omega in [0,1)")

    @property
    def nu(self):
        return 1.0 - self.omega


@dataclass(frozen=True)
class ControlledReflection:
    """G(x,p) = inf_t1 sup_t2 { gamma_{t1,t2}(x).p - g_{t1,t2}(x) }."""

    gamma: object  # nested (nc1, nc2) lists of vector fields
    g: object  # nested (nc1, nc2) lists of scalar fields
    nu: float
    lip: float = 1.0
    dim: int = 1

    def __post_init__(self):
        gam = [[as_vector_field(v, self.dim) for v in row] for row in self.gamma]
        gs = [[as_scalar_field(v) for v in row] for row in self.g]
        if len(gam) != len(gs) or any(len(a) != len(b) for a, b in zip(gam, gs)):
            raise ValueError("gamma and g control grids must match")
        if len(gam) == 0 or len(gam[0]) == 0:
            raise ValueError("control grids must be nonempty")
        object.__setattr__(self, "gamma", gam)
        object.__setattr__(self, "g", gs)

    @property
    def n_controls(self):
        return len(self.gamma), len(self.gamma[0])


def _side_roots(spec, proj, normal, Q):
    """Shift roots for one boundary side: solves G(proj, q + t*normal) = 0."""
    if isinstance(spec, Neumann):
        return spec.g(proj) - np.einsum("...i,...i->...", Q, normal)
    if isinstance(spec, Oblique):
        gam = spec.gamma(proj)
        denom = np.einsum("...i,...i->...", gam, normal)
        return (spec.g(proj) - np.einsum("...i,...i->...", gam, Q)) / denom
    if isinstance(spec, Capillary):
        th = spec.theta(proj)
        w = np.einsum("...i,...i->...", Q, normal)
        ptan2 = np.maximum(np.einsum("...i,...i->...", Q, Q) - w * w, 0.0)
        tau = th * np.sqrt((1.0 + ptan2) / (1.0 - th * th))
        return tau - w
    if isinstance(spec, ControlledReflection):
        nc1, nc2 = spec.n_controls
        roots = np.empty((nc1, nc2) + Q.shape[:-1])
        for i in range(nc1):
            for j in range(nc2):
                gam = spec.gamma[i][j](proj)
                denom = np.einsum("...i,...i->...", gam, normal)
                roots[i, j] = (
                    spec.g[i][j](proj) - np.einsum("...i,...i->...", gam, Q)
                ) / denom
        # root of min-max of increasing linear branches
        return roots.min(axis=1).max(axis=0)
    raise TypeError(f"unknown boundary spec {spec!r}")


def shift_values(spec, dfield, X, P):
    """Vectorized extended shift C(x,p) on arbitrary points (closed forms)."""
    X = as_points(X, dfield.dim)
    P = as_points(P, dfield.dim)
    out = np.zeros(np.broadcast_shapes(X.shape[:-1], P.shape[:-1]))
    for proj, normal, w in boundary_sides(dfield, X):
        Q = np.broadcast_to(P, np.broadcast_shapes(X.shape, P.shape))
        out = out + w * _side_roots(spec, proj, normal, Q)
    return out


def _g_value(spec, dfield, x, p):
    """Extended G at a point inside the neighborhood V (single active side)."""
    x = as_points(x, dfield.dim)
    p = as_points(p, dfield.dim)
    n = -dfield._eval_unchecked(x)[1]
    from .geometry import closest_boundary_point

    proj = closest_boundary_point(dfield.domain, x)
    if isinstance(spec, Neumann):
        return np.einsum("...i,...i->...", p, n) - spec.g(proj)
    if isinstance(spec, Oblique):
        return np.einsum("...i,...i->...", spec.gamma(proj), p) - spec.g(proj)
    if isinstance(spec, Capillary):
        norm2 = np.einsum("...i,...i->...", p, p)
        return np.einsum("...i,...i->...", p, n) - spec.theta(proj) * np.sqrt(1.0 + norm2)
    if isinstance(spec, ControlledReflection):
        nc1, nc2 = spec.n_controls
        vals = np.empty((nc1, nc2) + p.shape[:-1])
        for i in range(nc1):
            for j in range(nc2):
                vals[i, j] = (
                    np.einsum("...i,...i->...", spec.gamma[i][j](proj), p)
                    - spec.g[i][j](proj)
                )
        return vals.max(axis=1).min(axis=0)
    raise TypeError(f"unknown boundary spec {spec!r}")


def eval_G(spec, dfield, x, p):
    """Boundary nonlinearity at x (on the wall or in the extension zone)."""
    x = as_points(x, dfield.dim)
    if not np.all(contains(dfield.domain, x)):
        raise DomainError("point outside the closed domain")
    if not np.all(dfield.in_extension_zone(x)):
        raise DomainError("point outside the boundary extension neighborhood")
    return _g_value(spec, dfield, x, p)


@dataclass
class NormalShift:
    """Root-finder wrapper around G with residual guarantee |G| <= tol."""

    spec: object
    dfield: object
    tol: float = DEFAULT_SHIFT_TOL
    growth: float = 2.0
    bracket_k: Optional[float] = None
    last_residual: float = dc_field(default=0.0, init=False)

    def bound_constant(self):
        """Growth constant for the initial bracket, nu|C| <= K(1+|p|)."""
        if self.bracket_k is not None:
            return self.bracket_k
        return max(4.0 * self.spec.lip, 4.0)


def _blend_sides(dfield, x):
    return boundary_sides(dfield, as_points(x, dfield.dim))


def compute_normal_shift(shift: NormalShift, x, p):
    """Scalar shift by bracketed bisection with a secant polish.

    Inside a boundary zone this is the root of t -> G(x, p + t n(x)); in the
    blend gap the per-side roots are combined with the same linear weights as
    the vectorized evaluator, so the two routes agree everywhere.
    """
    spec, dfield = shift.spec, shift.dfield
    x = as_points(x, dfield.dim).reshape(-1)
    p = as_points(p, dfield.dim).reshape(-1)
    tol = shift.tol * (1.0 + np.linalg.norm(p))
    total = 0.0
    worst = 0.0
    for proj, normal, w in _blend_sides(dfield, x[None, :]):
        wgt = float(w[0])
        if wgt == 0.0:
            continue
        nvec = normal[0]
        pj = proj[0]

        def h(t):
            return float(_side_g(spec, pj, nvec, p + t * nvec))

        nu = spec.nu
        width = shift.bound_constant() * (1.0 + np.linalg.norm(p)) / max(nu, 1e-12)
        lo, hi = -width, width
        flo, fhi = h(lo), h(hi)
        expansions = 0
        while flo > 0.0 or fhi < 0.0:
            expansions += 1
            if expansions > 60:
                raise AssumptionViolation(
                    "no sign change for the normal shift; boundary monotonicity "
                    "(nu > 0) looks violated"
                )
            lo *= shift.growth
            hi *= shift.growth
            flo, fhi = h(lo), h(hi)
        for _ in range(200):
            if hi - lo <= 1e-17 * (1.0 + abs(lo)):
                break
            # secant candidate, safeguarded by the bracket
            if fhi != flo:
                mid = lo - flo * (hi - lo) / (fhi - flo)
                if not lo < mid < hi:
                    mid = 0.5 * (lo + hi)
            else:
                mid = 0.5 * (lo + hi)
            fm = h(mid)
            if abs(fm) <= 0.25 * tol and (hi - lo) * nu <= tol:
                lo = hi = mid
                flo = fhi = fm
                break
            if fm < 0.0:
                lo, flo = mid, fm
            else:
                hi, fhi = mid, fm
        root = 0.5 * (lo + hi)
        res = abs(h(root))
        if res > tol:
            raise AssumptionViolation(f"shift residual {res:.3e} exceeds tol {tol:.3e}")
        worst = max(worst, res)
        total += wgt * root
    shift.last_residual = worst
    return total


def _side_g(spec, proj, normal, q):
    """G for a single boundary side at fixed projection/normal (scalar point)."""
    q = np.asarray(q, dtype=float)
    pj = proj[None, :]
    if isinstance(spec, Neumann):
        return q @ normal - spec.g(pj)[0]
    if isinstance(spec, Oblique):
        gam = spec.gamma(pj)[0]
        return gam @ q - spec.g(pj)[0]
    if isinstance(spec, Capillary):
        return q @ normal - spec.theta(pj)[0] * np.sqrt(1.0 + q @ q)
    if isinstance(spec, ControlledReflection):
        nc1, nc2 = spec.n_controls
        vals = np.array(
            [
                [spec.gamma[i][j](pj)[0] @ q - spec.g[i][j](pj)[0] for j in range(nc2)]
                for i in range(nc1)
            ]
        )
        return vals.max(axis=1).min(axis=0)
    raise TypeError(f"unknown boundary spec {spec!r}")


def probe_HB1(spec, dfield, samples, mus):
    """nu_hat = min over boundary samples (x,p) and mu>0 of the normal increment ratio."""
    mus = np.asarray(mus, dtype=float)
    if mus.size == 0 or np.any(mus <= 0):
        raise ValueError("mu schedule must be nonempty and positive")
    xs, ps = samples
    xs = as_points(xs, dfield.dim)
    ps = as_points(ps, dfield.dim)
    n = -dfield._eval_unchecked(xs)[1]
    base = _g_value(spec, dfield, xs, ps)
    nu_hat = np.inf
    for mu in mus:
        shifted = _g_value(spec, dfield, xs, ps + mu * n)
        nu_hat = min(nu_hat, float(np.min((shifted - base) / mu)))
    return nu_hat


def probe_HB2(spec, dfield, sample_pairs):
    """Smallest K with |G(x,p)-G(y,q)| <= K[(1+|p|+|q|)|x-y| + |p-q|] on samples."""
    (xs, ps), (ys, qs) = sample_pairs
    xs = as_points(xs, dfield.dim)
    ys = as_points(ys, dfield.dim)
    ps = as_points(ps, dfield.dim)
    qs = as_points(qs, dfield.dim)
    if xs.size == 0:
        raise ValueError("empty samples")
    gx = _g_value(spec, dfield, xs, ps)
    gy = _g_value(spec, dfield, ys, qs)
    from .geometry import wrap_difference

    dxy = np.linalg.norm(wrap_difference(dfield.domain, xs, ys), axis=-1)
    dpq = np.linalg.norm(ps - qs, axis=-1)
    env = (1.0 + np.linalg.norm(ps, axis=-1) + np.linalg.norm(qs, axis=-1)) * dxy + dpq
    num = np.abs(gx - gy)
    mask = env > 0
    ratios = num[mask] / env[mask]
    bad = (~mask) & (num > 1e-14)
    if np.any(bad):
        return np.inf
    return float(np.max(ratios, initial=0.0))


def _structural_distance(spec1, spec2, proj):
    """(mu1, mu2) for same-variant pairs via coefficient sup-norms."""
    if isinstance(spec1, Neumann) and isinstance(spec2, Neumann):
        return float(np.max(np.abs(spec1.g(proj) - spec2.g(proj)))), 0.0
    if isinstance(spec1, Oblique) and isinstance(spec2, Oblique):
        mu1 = float(np.max(np.abs(spec1.g(proj) - spec2.g(proj))))
        mu2 = float(np.max(np.linalg.norm(spec1.gamma(proj) - spec2.gamma(proj), axis=-1)))
        return mu1, mu2
    if isinstance(spec1, Capillary) and isinstance(spec2, Capillary):
        dth = float(np.max(np.abs(spec1.theta(proj) - spec2.theta(proj))))
        return dth, dth
    if isinstance(spec1, ControlledReflection) and isinstance(spec2, ControlledReflection):
        if spec1.n_controls != spec2.n_controls:
            raise ValueError("mismatched control grids")
        nc1, nc2 = spec1.n_controls
        mu1 = mu2 = 0.0
        for i in range(nc1):
            for j in range(nc2):
                mu1 = max(mu1, float(np.max(np.abs(spec1.g[i][j](proj) - spec2.g[i][j](proj)))))
                mu2 = max(
                    mu2,
                    float(
                        np.max(
                            np.linalg.norm(
                                spec1.gamma[i][j](proj) - spec2.gamma[i][j](proj), axis=-1
                            )
                        )
                    ),
                )
        return mu1, mu2
    return None


def boundary_distance(spec1, spec2, dfield, samples, p_max=4.0, n_p=33):
    """(mu1, mu2, K_G_hat) for the envelope G2 - G1 <= K_G (mu1 + mu2 |p|).

    Same-variant pairs use coefficient sup-norms on the boundary samples; for
    mixed variants the smallest envelope is fitted least-max over a |p| grid.
    """
    xs = as_points(samples, dfield.dim)
    structural = _structural_distance(spec1, spec2, xs)
    rng = np.random.default_rng(0)
    mags = np.linspace(0.0, p_max, n_p)
    dirs = rng.normal(size=(n_p, dfield.dim))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=-1, keepdims=True), 1e-300)
    ps = mags[:, None] * dirs
    diff = np.empty((n_p, xs.shape[0]))
    for k in range(n_p):
        pk = np.broadcast_to(ps[k], xs.shape)
        diff[k] = np.abs(
            _g_value(spec2, dfield, xs, pk) - _g_value(spec1, dfield, xs, pk)
        )
    if structural is not None:
        mu1, mu2 = structural
    else:
        # least-max linear envelope d <= mu1 + mu2 |p| via an LP
        dvals = diff.ravel()
        pnorm = np.repeat(mags, xs.shape[0])
        res = linprog(
            c=[1.0, float(np.mean(pnorm))],
            A_ub=np.column_stack([-np.ones_like(pnorm), -pnorm]),
            b_ub=-dvals,
            bounds=[(0, None), (0, None)],
            method="highs",
        )
        if not res.success:
            return np.inf, np.inf, np.inf
        mu1, mu2 = float(res.x[0]), float(res.x[1])
    env = np.broadcast_to(mu1 + mu2 * mags[:, None], diff.shape)
    mask = env > 0
    if np.any(diff[~mask] > 1e-14):
        return mu1, mu2, np.inf
    kg = float(np.max(diff[mask] / env[mask], initial=0.0)) if mask.any() else 0.0
    return mu1, mu2, kg


def check_shift_difference(spec1, spec2, dfield, samples, margin=0.10):
    """Fit K_C in |C1-C2| <= K_C/(nu1 v nu2) (mu1 + mu2(1+|p|)); count violations
    at the fitted constant plus a 10% margin."""
    xs, ps = samples
    xs = as_points(xs, dfield.dim)
    ps = as_points(ps, dfield.dim)
    mu1, mu2, _ = boundary_distance(spec1, spec2, dfield, xs)
    numax = max(spec1.nu, spec2.nu)
    c1 = shift_values(spec1, dfield, xs, ps)
    c2 = shift_values(spec2, dfield, xs, ps)
    diff = np.abs(c1 - c2)
    env = (mu1 + mu2 * (1.0 + np.linalg.norm(ps, axis=-1))) / numax
    mask = env > 0
    if np.any(diff[~mask] > 1e-12):
        return int(np.count_nonzero(diff[~mask] > 1e-12)), np.inf
    k_hat = float(np.max(diff[mask] / env[mask], initial=0.0)) if mask.any() else 0.0
    viol = int(np.count_nonzero(diff[mask] > (1.0 + margin) * k_hat * env[mask] + 1e-15))
    return viol, k_hat


def kernel_descriptor(spec, dfield):
    """Flatten a preset-coded spec into plain arrays for the compiled kernel.

    Returns (ints, floats, coef) or None when a coefficient is not encodable.
    ints  = [dim, domain_code, variant, nc1, nc2]
    floats= [dom0, dom1, r0]
    coef  = per-control rows [g(7) | gamma(dim*7) | theta(7)] as appropriate.
    """
    from .geometry import Disc, Interval, PeriodicStrip

    dom = dfield.domain
    if isinstance(dom, Interval):
        dcode, d0, d1 = 0, dom.a, dom.b
    elif isinstance(dom, PeriodicStrip):
        dcode, d0, d1 = 1, dom.period, dom.height
    elif isinstance(dom, Disc):
        dcode, d0, d1 = 2, dom.radius, 0.0
    else:
        return None
    d = dfield.dim

    def enc_scalar(f):
        return f.kernel_params()

    def enc_vector(v):
        return v.kernel_params()

    if isinstance(spec, Neumann):
        g = enc_scalar(spec.g)
        if g is None:
            return None
        variant, nc1, nc2 = 0, 1, 1
        rows = g[None, :]
    elif isinstance(spec, Oblique):
        g = enc_scalar(spec.g)
        gam = enc_vector(spec.gamma)
        if g is None or gam is None:
            return None
        variant, nc1, nc2 = 1, 1, 1
        rows = np.concatenate([g, gam.ravel()])[None, :]
    elif isinstance(spec, Capillary):
        th = enc_scalar(spec.theta)
        if th is None:
            return None
        variant, nc1, nc2 = 2, 1, 1
        rows = th[None, :]
    elif isinstance(spec, ControlledReflection):
        nc1, nc2 = spec.n_controls
        variant = 3
        rows = []
        for i in range(nc1):
            for j in range(nc2):
                g = enc_scalar(spec.g[i][j])
                gam = enc_vector(spec.gamma[i][j])
                if g is None or gam is None:
                    return None
                rows.append(np.concatenate([g, gam.ravel()]))
        rows = np.asarray(rows)
    else:
        return None
    ints = np.array([d, dcode, variant, nc1, nc2], dtype=np.int64)
    floats = np.array([d0, d1, dfield.r0], dtype=float)
    return ints, floats, np.ascontiguousarray(rows, dtype=float)
