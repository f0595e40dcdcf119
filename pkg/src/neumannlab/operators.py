"""Equation families F(x,r,p,X) and numeric probes of their structure.

Sign convention: the zeroth-order term enters with a PLUS sign,

    F = inf sup { -tr[(sigma sigma^T)(x) X] - b(x).p + c(x) r - f(x) },

so that strict monotonicity in r holds with constant min c >= lambda > 0.
The displayed operator in the source problem carries "-c u" next to the
requirement that F be increasing in u with c >= lambda; the increasing
convention is the consistent one and is adopted throughout.
"""

from dataclasses import dataclass

import numpy as np

from .fields import as_matrix_field, as_scalar_field, as_vector_field
from .geometry import as_points, wrap_difference


class ControlledCoefficients:
    """Per-control coefficient tables sigma, b, c, f on a finite control grid."""

    def __init__(self, sigma, b, c, f, dim, alpha=1.0, lam=None,
                 lip_sigma=None, lip_b=None, hoelder_c=None, hoelder_f=None):
        def grid(entries, conv):
            return [[conv(e) for e in row] for row in entries]

        self.dim = dim
        self.sigma = grid(sigma, lambda e: as_matrix_field(e, dim))
        self.b = grid(b, lambda e: as_vector_field(e, dim))
        self.c = grid(c, as_scalar_field)
        self.f = grid(f, as_scalar_field)
        shapes = {(len(t), len(t[0])) for t in (self.sigma, self.b, self.c, self.f)}
        if len(shapes) != 1:
            raise ValueError("coefficient tables must share the control grid shape")
        self.nc1, self.nc2 = shapes.pop()
        if self.nc1 == 0 or self.nc2 == 0:
            raise ValueError("control grids must be nonempty")
        self.alpha = float(alpha)
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0,1]")
        self.lam = lam
        self.lip_sigma = lip_sigma
        self.lip_b = lip_b
        self.hoelder_c = hoelder_c
        self.hoelder_f = hoelder_f

    @classmethod
    def single(cls, sigma, b, c, f, dim, **kw):
        return cls([[sigma]], [[b]], [[c]], [[f]], dim, **kw)


@dataclass(frozen=True)
class OperatorSpec:
    """variant in {'linear','bellman','isaacs'}; bellman has |Theta_2| = 1."""

    variant: str
    coefficients: ControlledCoefficients

    def __post_init__(self):
        cc = self.coefficients
        if self.variant == "linear" and (cc.nc1, cc.nc2) != (1, 1):
            raise ValueError("linear variant needs a single control pair")
        if self.variant == "bellman" and cc.nc2 != 1:
            raise ValueError("bellman variant needs |Theta_2| = 1")
        if self.variant not in ("linear", "bellman", "isaacs"):
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def dim(self):
        return self.coefficients.dim

    def declared_lambda(self, sample_xs=None):
        """Declared (or sampled) lower bound for c."""
        cc = self.coefficients
        if cc.lam is not None:
            return cc.lam
        if sample_xs is None:
            raise ValueError("no declared lambda; pass sample points")
        return min(
            float(np.min(cc.c[i][j](sample_xs)))
            for i in range(cc.nc1)
            for j in range(cc.nc2)
        )


def _control_values(spec, x, r, p, X):
    """Per-control row values, shape (nc1, nc2) + batch."""
    cc = spec.coefficients
    x = as_points(x, cc.dim)
    p = as_points(p, cc.dim)
    r = np.asarray(r, dtype=float)
    X = np.asarray(X, dtype=float)
    vals = np.empty((cc.nc1, cc.nc2) + x.shape[:-1])
    for i in range(cc.nc1):
        for j in range(cc.nc2):
            sig = cc.sigma[i][j](x)
            a = np.einsum("...ik,...jk->...ij", sig, sig)
            trace = np.einsum("...ij,...ij->...", a, X)
            drift = np.einsum("...i,...i->...", cc.b[i][j](x), p)
            vals[i, j] = -trace - drift + cc.c[i][j](x) * r - cc.f[i][j](x)
    return vals


def _check_symmetric(X, dim):
    X = np.asarray(X, dtype=float)
    if X.shape[-2:] != (dim, dim):
        raise ValueError(f"Hessian argument must be {dim}x{dim}")
    if not np.allclose(X, np.swapaxes(X, -1, -2), atol=1e-12):
        raise ValueError("Hessian argument must be symmetric")
    return X


def eval_F(spec, x, r, p, X):
    """inf over Theta_1, sup over Theta_2 of the controlled linear rows."""
    X = _check_symmetric(X, spec.dim)
    vals = _control_values(spec, x, r, p, X)
    return vals.max(axis=1).min(axis=0)


def eval_argcontrols(spec, x, r, p, X):
    """Control pair attaining eval_F; ties break at the lowest list index."""
    X = _check_symmetric(X, spec.dim)
    vals = _control_values(spec, x, r, p, X)
    if vals.ndim != 2:
        raise ValueError("eval_argcontrols expects a single evaluation point")
    inner = vals.argmax(axis=1)
    outer = int(vals[np.arange(vals.shape[0]), inner].argmin())
    return outer, int(inner[outer])


def probe_H3(spec, samples):
    """min over samples of (F(x,r,p,X) - F(x,s,p,X)) / (r - s) with r > s."""
    lam = np.inf
    for x, p, X, r, s in samples:
        if not r > s:
            raise ValueError("probe_H3 samples need r > s")
        num = eval_F(spec, x, r, p, X) - eval_F(spec, x, s, p, X)
        lam = min(lam, float(num) / (r - s))
    if lam is np.inf:
        raise ValueError("empty samples")
    return lam


def coefficient_distance(spec1, spec2, sample_xs):
    """(delta1, delta2): sup-norm distances of (c,f) and (sigma,b) over controls.

    delta1 = sup |c1-c2| + |f1-f2|; delta2^2 = sup (|sigma1-sigma2|^2 + |b1-b2|^2),
    sups over the control grid evaluated on the given sampling points.
    """
    c1, c2 = spec1.coefficients, spec2.coefficients
    if (c1.nc1, c1.nc2) != (c2.nc1, c2.nc2):
        raise ValueError("mismatched control grids")
    xs = as_points(sample_xs, c1.dim)
    delta1 = 0.0
    delta2_sq = 0.0
    for i in range(c1.nc1):
        for j in range(c1.nc2):
            dc = float(np.max(np.abs(c1.c[i][j](xs) - c2.c[i][j](xs))))
            df = float(np.max(np.abs(c1.f[i][j](xs) - c2.f[i][j](xs))))
            delta1 = max(delta1, dc + df)
            dsig = np.linalg.norm(c1.sigma[i][j](xs) - c2.sigma[i][j](xs), axis=(-2, -1))
            db = np.linalg.norm(c1.b[i][j](xs) - c2.b[i][j](xs), axis=-1)
            delta2_sq = max(delta2_sq, float(np.max(dsig**2)) + float(np.max(db**2)))
    return delta1, float(np.sqrt(delta2_sq))


def _sample_points(domain, rng, n):
    from .geometry import Disc, Interval, PeriodicStrip

    if isinstance(domain, Interval):
        return rng.uniform(domain.a, domain.b, size=(n, 1))
    if isinstance(domain, PeriodicStrip):
        return np.column_stack(
            [rng.uniform(0, domain.period, n), rng.uniform(0, domain.height, n)]
        )
    if isinstance(domain, Disc):
        r = domain.radius * np.sqrt(rng.uniform(0, 1, n))
        th = rng.uniform(0, 2 * np.pi, n)
        return np.column_stack([r * np.cos(th), r * np.sin(th)])
    raise TypeError(f"unknown domain {domain!r}")


def generate_h2bar_samples(domain, schedule, n_per_entry, rng):
    """Random tuples obeying the side conditions of the locality assumption.

    Per (eps, eta): |x-y| <= eta*eps, |p-q| <= eta^2+eps^2+B,
    |p|+|q| <= eta/eps + ..., and block matrices X = S - tI, Y = S + tI with
    0 <= t <= g := eta^2+eps^2+B and |S| <= sqrt(2(t+g))/eps.  Any such pair
    satisfies the doubled-variable matrix inequality with K = 1: for vectors
    (u,v), (u-v).S(u+v) <= |S|^2/(2(t+g)) |u-v|^2 + (t+g)/2 |u+v|^2 and
    |u+v|^2 <= 2(|u|^2+|v|^2).
    """
    from .geometry import dim as gdim

    d = gdim(domain)
    samples = []
    for eps, eta in schedule:
        for B in (0.0, 0.5):
            for _ in range(n_per_entry):
                x = _sample_points(domain, rng, 1)[0]
                step = rng.uniform(0, eta * eps)
                direction = rng.normal(size=d)
                direction /= max(np.linalg.norm(direction), 1e-300)
                y = x + step * direction
                y = _clip_to_domain(domain, y)
                slack = eta**2 + eps**2 + B
                p = rng.normal(size=d)
                p *= rng.uniform(0, 0.5 * eta / eps) / max(np.linalg.norm(p), 1e-300)
                dq = rng.normal(size=d)
                dq *= rng.uniform(0, 0.5 * slack) / max(np.linalg.norm(dq), 1e-300)
                q = p + dq
                r = rng.uniform(-1.0, 1.0)
                t = rng.uniform(0.0, slack)
                S = rng.normal(size=(d, d))
                S = 0.5 * (S + S.T)
                norm = np.linalg.norm(S, 2)
                if norm > 0:
                    S *= rng.uniform(0, np.sqrt(2.0 * (t + slack)) / eps) / norm
                X = S - t * np.eye(d)
                Y = S + t * np.eye(d)
                samples.append((x, y, r, p, q, X, Y, eps, eta, B))
    return samples


def _clip_to_domain(domain, x):
    from .geometry import Disc, Interval, PeriodicStrip

    x = np.array(x, dtype=float)
    if isinstance(domain, Interval):
        x[0] = np.clip(x[0], domain.a, domain.b)
    elif isinstance(domain, PeriodicStrip):
        x[1] = np.clip(x[1], 0.0, domain.height)
    else:
        r = np.linalg.norm(x)
        if r > domain.radius:
            x *= domain.radius / r
    return x


def probe_H2bar(spec, domain, schedule, n_per_entry=200, rng=None, alpha=None):
    """(K_hat, pass): smallest constant bounding F(y,r,q,Y)-F(x,r,p,X) by the
    quantitative locality envelope over self-generated admissible samples."""
    if len(schedule) == 0:
        raise ValueError("empty schedule")
    rng = np.random.default_rng(0) if rng is None else rng
    alpha = spec.coefficients.alpha if alpha is None else alpha
    k_hat = 0.0
    for x, y, r, p, q, X, Y, eps, eta, B in generate_h2bar_samples(
        domain, schedule, n_per_entry, rng
    ):
        lhs = float(eval_F(spec, y, r, q, Y) - eval_F(spec, x, r, p, X))
        dxy = float(np.linalg.norm(wrap_difference(domain, x, y)))
        env = dxy**alpha + dxy**2 / eps**2 + eta**2 + eps**2 + B
        k_hat = max(k_hat, lhs / env)
    return k_hat, bool(np.isfinite(k_hat))
