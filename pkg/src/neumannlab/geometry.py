"""Domains, grids, and smooth signed-distance extensions.

The distance extension d is built as a profile of the raw boundary distance
s(x): it equals s exactly for s <= r0/2, ramps through a degree-6 polynomial
blend on [r0/2, r0], and saturates at the plateau 0.75*r0 beyond.  The blend
derivative is the complement of the quintic smoothstep, so d is C^2 with a
bounded (piecewise continuous) third derivative, 0 <= d <= 0.75*r0 <= 1 and
|Dd| <= 1 everywhere.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_CONTAIN_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("interval needs a < b")


@dataclass(frozen=True)
class PeriodicStrip:
    period: float
    height: float

    def __post_init__(self):
        if self.period <= 0 or self.height <= 0:
            raise ValueError("strip needs positive period and height")


@dataclass(frozen=True)
class Disc:
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("disc needs positive radius")


def dim(domain):
    return 1 if isinstance(domain, Interval) else 2


def inradius(domain):
    if isinstance(domain, Interval):
        return 0.5 * (domain.b - domain.a)
    if isinstance(domain, PeriodicStrip):
        return 0.5 * domain.height
    return domain.radius


def diameter(domain):
    if isinstance(domain, Interval):
        return domain.b - domain.a
    if isinstance(domain, PeriodicStrip):
        return np.hypot(0.5 * domain.period, domain.height)
    return 2.0 * domain.radius


def as_points(x, d):
    """Normalize point input to an array of shape (..., d)."""
    x = np.asarray(x, dtype=float)
    if d == 1:
        if x.ndim == 0 or x.shape[-1] != 1:
            x = x[..., None]
    elif x.shape[-1] != d:
        raise ValueError(f"points must have trailing dimension {d}")
    return x


def contains(domain, x, tol=_CONTAIN_TOL):
    x = as_points(x, dim(domain))
    if isinstance(domain, Interval):
        v = x[..., 0]
        return (v >= domain.a - tol) & (v <= domain.b + tol)
    if isinstance(domain, PeriodicStrip):
        v = x[..., 1]
        return (v >= -tol) & (v <= domain.height + tol)
    return np.hypot(x[..., 0], x[..., 1]) <= domain.radius + tol


def wrap_difference(domain, x, y):
    """x - y with the strip's periodic first coordinate reduced to +-period/2."""
    x = as_points(x, dim(domain))
    y = as_points(y, dim(domain))
    diff = x - y
    if isinstance(domain, PeriodicStrip):
        p = domain.period
        diff = diff.copy()
        diff[..., 0] = (diff[..., 0] + 0.5 * p) % p - 0.5 * p
    return diff


def _raw_distance(domain, x):
    """Exact distance to the boundary, its gradient, and its Hessian."""
    d = dim(domain)
    x = as_points(x, d)
    base = x.shape[:-1]
    if isinstance(domain, Interval):
        s_left = x[..., 0] - domain.a
        s_right = domain.b - x[..., 0]
        left = s_left <= s_right
        s = np.where(left, s_left, s_right)
        grad = np.where(left, 1.0, -1.0)[..., None]
        hess = np.zeros(base + (1, 1))
        return s, grad, hess
    if isinstance(domain, PeriodicStrip):
        s_bot = x[..., 1]
        s_top = domain.height - x[..., 1]
        bot = s_bot <= s_top
        s = np.where(bot, s_bot, s_top)
        grad = np.zeros(base + (2,))
        grad[..., 1] = np.where(bot, 1.0, -1.0)
        hess = np.zeros(base + (2, 2))
        return s, grad, hess
    r = np.hypot(x[..., 0], x[..., 1])
    safe_r = np.maximum(r, 1e-300)
    xhat = x / safe_r[..., None]
    s = domain.radius - r
    grad = -xhat
    eye = np.eye(2)
    proj = eye - xhat[..., :, None] * xhat[..., None, :]
    hess = -proj / safe_r[..., None, None]
    # at the center the distance has a removable kink; the plateau hides it
    center = r < 1e-300
    if np.any(center):
        grad[center] = 0.0
        hess[center] = 0.0
    return s, grad, hess


def closest_boundary_point(domain, x):
    d = dim(domain)
    x = as_points(x, d)
    if isinstance(domain, Interval):
        left = (x[..., 0] - domain.a) <= (domain.b - x[..., 0])
        return np.where(left, domain.a, domain.b)[..., None]
    if isinstance(domain, PeriodicStrip):
        out = x.copy()
        out[..., 0] = out[..., 0] % domain.period
        bot = x[..., 1] <= 0.5 * domain.height
        out[..., 1] = np.where(bot, 0.0, domain.height)
        return out
    r = np.hypot(x[..., 0], x[..., 1])
    safe = np.maximum(r, 1e-300)
    out = x * (domain.radius / safe)[..., None]
    center = r < 1e-300
    if np.any(center):
        out[center] = np.array([domain.radius, 0.0])
    return out


class DistanceField:
    """Smooth saturated extension of the boundary distance.

    Attributes
    ----------
    r0 : saturation radius; d is the exact distance for dist <= r0/2.
    plateau : saturated value 0.75*r0.
    d3_bound : exposed finite bound on the third directional derivative.
    """

    def __init__(self, domain, r0=None):
        self.domain = domain
        rin = inradius(domain)
        self.r0 = 0.2 * rin if r0 is None else float(r0)
        if not 0 < self.r0 <= rin:
            raise ValueError("need 0 < r0 <= inradius so the plateau hides distance kinks")
        if 0.75 * self.r0 > 1.0:
            raise ValueError("plateau 0.75*r0 must stay <= 1")
        self.plateau = 0.75 * self.r0
        self.dim = dim(domain)
        self.d3_bound = self._third_derivative_bound()

    # blend profile -------------------------------------------------------
    def _profile(self, s):
        """phi(s), phi'(s), phi''(s) vectorized; phi' = 1 - smoothstep5."""
        half = 0.5 * self.r0
        t = np.clip((s - half) / half, 0.0, 1.0)
        smooth = t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
        dsmooth = 30.0 * t * t * (1.0 - t) ** 2
        integral = t - (2.5 * t**4 - 3.0 * t**5 + t**6)
        phi = np.where(s <= half, s, half * (1.0 + integral))
        dphi = np.where(s <= half, 1.0, 1.0 - smooth)
        ddphi = np.where((s > half) & (s < self.r0), -dsmooth / half, 0.0)
        return phi, dphi, ddphi

    def _profile_d3(self, s):
        half = 0.5 * self.r0
        t = np.clip((s - half) / half, 0.0, 1.0)
        dds = 60.0 * t * (2.0 * t - 1.0) * (t - 1.0)
        return np.where((s > half) & (s < self.r0), -dds / half**2, 0.0)

    def _third_derivative_bound(self):
        # max |S''| of the quintic smoothstep is 10/sqrt(3)
        flat = (10.0 / np.sqrt(3.0)) / (0.5 * self.r0) ** 2
        if not isinstance(self.domain, Disc):
            return flat
        # radial profile g(r) = phi(R - r): directional third derivative is
        # g''' c^3 + 3 (g''/r - g'/r^2) c (1 - c^2), c = cos(angle to radius)
        R = self.domain.radius
        r = np.linspace(max(R - self.r0, 1e-9), R, 2001)
        s = R - r
        _, dphi, ddphi = self._profile(s)
        d3phi = self._profile_d3(s)
        c = np.linspace(-1.0, 1.0, 401)[:, None]
        val = -d3phi * c**3 + 3.0 * (ddphi / r - (-dphi) / r**2) * c * (1.0 - c**2)
        return 1.05 * max(flat, float(np.max(np.abs(val))))

    # evaluation ----------------------------------------------------------
    def _require_inside(self, x):
        ok = contains(self.domain, x)
        if not np.all(ok):
            raise DomainError("point outside the closed domain")

    def eval_distance(self, x):
        """d(x), Dd(x), D^2 d(x); derivatives are analytic, not differenced."""
        self._require_inside(x)
        return self._eval_unchecked(x)

    def _eval_unchecked(self, x):
        x = as_points(x, self.dim)
        s, gs, hs = _raw_distance(self.domain, x)
        phi, dphi, ddphi = self._profile(s)
        grad = dphi[..., None] * gs
        hess = ddphi[..., None, None] * gs[..., :, None] * gs[..., None, :] \
            + dphi[..., None, None] * hs
        return phi, grad, hess

    def value(self, x):
        return self._eval_unchecked(x)[0]

    def gradient(self, x):
        return self._eval_unchecked(x)[1]

    def outward_normal(self, x):
        """Extended outward normal n(x) = -Dd(x); unit at the boundary."""
        self._require_inside(x)
        return -self._eval_unchecked(x)[1]

    def in_extension_zone(self, x, tol=_CONTAIN_TOL):
        """True where the exact-distance zone (dist <= r0/2) holds."""
        s, _, _ = _raw_distance(self.domain, as_points(x, self.dim))
        return s <= 0.5 * self.r0 + tol


def eval_distance(field, x):
    return field.eval_distance(x)


def outward_normal(field, x):
    return field.outward_normal(x)


def blend_ramp(t):
    """Seventh-order smoothstep of the clipped ramp variable; C^3 joins keep
    the mollified-shift integrand smooth enough for fast quadrature."""
    t = np.clip(t, 0.0, 1.0)
    return t**4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t**3)


def boundary_sides(field, x):
    """Blended boundary decomposition used to extend boundary data off the wall.

    Returns a list of (projection, unit_normal, weight) triples with weights
    summing to one; inside the exact-distance zone a single weight is 1, and
    between zones the weights follow a smooth ramp so Lipschitz bounds survive.
    """
    domain = field.domain
    d = field.dim
    x = as_points(x, d)
    base = x.shape[:-1]
    half = 0.5 * field.r0
    if isinstance(domain, Interval):
        lo, hi = domain.a + half, domain.b - half
        w_left = blend_ramp((hi - x[..., 0]) / (hi - lo))
        proj_l = np.broadcast_to(np.array([domain.a]), base + (1,))
        proj_r = np.broadcast_to(np.array([domain.b]), base + (1,))
        n_l = np.broadcast_to(np.array([-1.0]), base + (1,))
        n_r = np.broadcast_to(np.array([1.0]), base + (1,))
        return [(proj_l, n_l, w_left), (proj_r, n_r, 1.0 - w_left)]
    if isinstance(domain, PeriodicStrip):
        lo, hi = half, domain.height - half
        w_bot = blend_ramp((hi - x[..., 1]) / (hi - lo))
        pb = x.copy()
        pb[..., 0] = pb[..., 0] % domain.period
        pt = pb.copy()
        pb[..., 1] = 0.0
        pt[..., 1] = domain.height
        n_b = np.zeros(base + (2,))
        n_b[..., 1] = -1.0
        n_t = np.zeros(base + (2,))
        n_t[..., 1] = 1.0
        return [(pb, n_b, w_bot), (pt, n_t, 1.0 - w_bot)]
    R = domain.radius
    r = np.hypot(x[..., 0], x[..., 1])
    floor = max(R - field.r0, 0.25 * R)
    safe = np.maximum(r, floor)
    xhat = np.where(r[..., None] >= 1e-300, x / np.maximum(r, 1e-300)[..., None], 0.0)
    fallback = np.zeros(base + (2,))
    fallback[..., 0] = 1.0
    xhat = np.where(r[..., None] >= 1e-300, xhat, fallback)
    del safe
    proj = xhat * R
    return [(proj, xhat, np.ones(base))]


class Grid:
    """Uniform tensor grid; the strip's first axis is periodic."""

    def __init__(self, domain, n):
        self.domain = domain
        self.dim = dim(domain)
        if isinstance(domain, Interval):
            self.n = int(n)
            self.h = (domain.b - domain.a) / self.n
            xs = np.linspace(domain.a, domain.b, self.n + 1)
            self.nodes = xs[:, None]
            self.shape = (self.n + 1,)
            self.boundary_index_set = frozenset((0, self.n))
        elif isinstance(domain, PeriodicStrip):
            n1, n2 = (int(n[0]), int(n[1])) if np.iterable(n) else (int(n), int(n))
            self.n = (n1, n2)
            self.h = (domain.period / n1, domain.height / n2)
            x1 = domain.period * np.arange(n1) / n1
            x2 = np.linspace(0.0, domain.height, n2 + 1)
            X1, X2 = np.meshgrid(x1, x2, indexing="ij")
            self.nodes = np.column_stack([X1.ravel(), X2.ravel()])
            self.shape = (n1, n2 + 1)
            idx = np.arange(self.nodes.shape[0]).reshape(self.shape)
            self.boundary_index_set = frozenset(idx[:, 0]) | frozenset(idx[:, -1])
        else:
            raise ValueError("grids are supported on Interval and PeriodicStrip only")

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    def is_boundary(self):
        mask = np.zeros(self.n_nodes, dtype=bool)
        mask[list(self.boundary_index_set)] = True
        return mask


def check_w3_inequality(field, xs, ys):
    """Verify +-[d(x)-d(y)] <= +-(y-x).n((x+y)/2) + |D3d|/24 |x-y|^3 on samples.

    Returns (violations, fitted_bound) where fitted_bound is the smallest
    constant replacing |D3d|/24 that makes every sample pass.
    """
    xs = as_points(xs, field.dim)
    ys = as_points(ys, field.dim)
    if xs.size == 0:
        raise ValueError("empty sample list")
    field._require_inside(xs)
    field._require_inside(ys)
    dx = field.value(xs)
    dy = field.value(ys)
    diff = wrap_difference(field.domain, xs, ys)
    mid = ys + 0.5 * diff
    if isinstance(field.domain, PeriodicStrip):
        mid = mid.copy()
        mid[..., 0] = mid[..., 0] % field.domain.period
    n_mid = -field.gradient(mid)
    lhs = dx - dy
    lin = np.einsum("...i,...i->...", -diff, n_mid)
    dist3 = np.linalg.norm(diff, axis=-1) ** 3
    coef = field.d3_bound / 24.0
    slack = 1e-13 * (1.0 + np.abs(lin))
    viol = (lhs > lin + coef * dist3 + slack) | (-lhs > -lin + coef * dist3 + slack)
    nz = dist3 > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        need = np.maximum(lhs - lin, -(lhs - lin)) / dist3
    fitted = float(np.max(need[nz], initial=0.0))
    return int(np.count_nonzero(viol)), fitted
