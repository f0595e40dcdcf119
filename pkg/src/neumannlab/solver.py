"""Monotone finite-difference solver: upwind first-order drift plus central
second-order diffusion, strong (or optionally weak min-form) boundary rows,
Howard policy iteration with a damped Picard loop for the capillary slope.

Interior rows keep nonnegative off-diagonal stencil weights by construction;
2D cross-diffusion uses the slanted seven-point stencil and raises a scheme
error at any node where diagonal dominance fails.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .boundary import Capillary, ControlledReflection, Neumann, Oblique
from .errors import NonconvergenceError, SchemeError
from .geometry import Grid, Interval, PeriodicStrip


@dataclass
class SolveParams:
    tol: float = 1e-10
    max_policy_iters: int = 200
    inner_tol: float = 1e-12
    damping: float = 0.5


@dataclass
class SolutionField:
    grid: Grid
    values: np.ndarray
    residual_norm: float
    iterations: int


class Discretization:
    def __init__(self, grid, operator, boundary, mu=0.0, weak_boundary=False):
        self.grid = grid
        self.operator = operator
        self.boundary = boundary
        self.mu = float(mu)
        self.weak_boundary = bool(weak_boundary)
        cc = operator.coefficients
        if cc.dim != grid.dim:
            raise ValueError("operator dimension does not match the grid")
        self.nc1, self.nc2 = cc.nc1, cc.nc2
        nodes = grid.nodes
        nn = nodes.shape[0]
        d = grid.dim
        self.a_tab = np.empty((self.nc1, self.nc2, nn, d, d))
        self.b_tab = np.empty((self.nc1, self.nc2, nn, d))
        self.c_tab = np.empty((self.nc1, self.nc2, nn))
        self.f_tab = np.empty((self.nc1, self.nc2, nn))
        for i in range(self.nc1):
            for j in range(self.nc2):
                sig = cc.sigma[i][j](nodes)
                self.a_tab[i, j] = np.einsum("...ik,...jk->...ij", sig, sig)
                self.a_tab[i, j] += self.mu * np.eye(d)
                self.b_tab[i, j] = cc.b[i][j](nodes)
                self.c_tab[i, j] = cc.c[i][j](nodes)
                self.f_tab[i, j] = cc.f[i][j](nodes)
        self._check_monotone()
        self._init_boundary_tables()

    # ------------------------------------------------------------------
    def _check_monotone(self):
        """Nonnegative off-diagonal weights at every node and control pair."""
        if self.grid.dim == 1:
            if np.any(self.a_tab[..., 0, 0] < -1e-14):
                raise SchemeError("negative diffusion coefficient")
            return
        h1, h2 = self.grid.h
        a11 = self.a_tab[..., 0, 0]
        a22 = self.a_tab[..., 1, 1]
        a12 = np.abs(self.a_tab[..., 0, 1])
        bad = (a11 / h1**2 - a12 / (h1 * h2) < -1e-14) | (
            a22 / h2**2 - a12 / (h1 * h2) < -1e-14
        )
        if np.any(bad):
            node = int(np.nonzero(bad.any(axis=(0, 1)))[0][0])
            raise SchemeError(
                f"cross-diffusion breaks monotonicity at node {node}", node=node
            )

    def _init_boundary_tables(self):
        grid, spec = self.grid, self.boundary
        bidx = np.asarray(sorted(grid.boundary_index_set))
        self.bidx = bidx
        bpts = grid.nodes[bidx]
        if isinstance(grid.domain, Interval):
            self.b_normal = np.where(bpts[:, 0] < 0.5 * (grid.domain.a + grid.domain.b),
                                     -1.0, 1.0)[:, None]
        else:
            self.b_normal = np.where(bpts[:, 1] < 0.5 * grid.domain.height, -1.0, 1.0)[
                :, None
            ] * np.array([[0.0, 1.0]])
        if isinstance(spec, Neumann):
            self.g_btab = spec.g(bpts)[None, None, :]
            self.gam_btab = np.broadcast_to(self.b_normal, bpts.shape)[None, None]
        elif isinstance(spec, Oblique):
            self.g_btab = spec.g(bpts)[None, None, :]
            self.gam_btab = spec.gamma(bpts)[None, None]
        elif isinstance(spec, Capillary):
            self.theta_btab = spec.theta(bpts)
            self.g_btab = None
            self.gam_btab = np.broadcast_to(self.b_normal, bpts.shape)[None, None]
        elif isinstance(spec, ControlledReflection):
            m1, m2 = spec.n_controls
            self.g_btab = np.stack(
                [[spec.g[i][j](bpts) for j in range(m2)] for i in range(m1)]
            )
            self.gam_btab = np.stack(
                [[spec.gamma[i][j](bpts) for j in range(m2)] for i in range(m1)]
            )
        else:
            raise TypeError(f"unsupported boundary spec {spec!r}")


def _interior_rows_1d(disc, u):
    """Per-control interior row residuals, shape (nc1, nc2, n-1)."""
    h = disc.grid.h
    a = disc.a_tab[..., 1:-1, 0, 0]
    b = disc.b_tab[..., 1:-1, 0]
    c = disc.c_tab[..., 1:-1]
    f = disc.f_tab[..., 1:-1]
    d2 = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
    fwd = (u[2:] - u[1:-1]) / h
    bwd = (u[1:-1] - u[:-2]) / h
    dup = np.where(b >= 0, fwd, bwd)
    return -a * d2 - b * dup + c * u[1:-1] - f


def _onesided_gradient_1d(disc, u):
    """Second-order one-sided du/dx at the two endpoints, shape (2,)."""
    h = disc.grid.h
    left = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h)
    right = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h)
    return np.array([left, right])


def _boundary_residual_1d(disc, u):
    """Nonlinear boundary residual G(x_b, Du_onesided) at both endpoints."""
    spec = disc.boundary
    grads = _onesided_gradient_1d(disc, u)[:, None]
    nvec = disc.b_normal
    if isinstance(spec, Capillary):
        pn = (grads * nvec)[:, 0]
        return pn - disc.theta_btab * np.sqrt(1.0 + grads[:, 0] ** 2)
    vals = np.einsum("ijbk,bk->ijb", disc.gam_btab, grads) - (
        disc.g_btab if disc.g_btab is not None else 0.0
    )
    return vals.max(axis=1).min(axis=0)


def _boundary_equation_residual_1d(disc, u):
    """One-sided equation residual at the endpoints (weak min-form branch)."""
    h = disc.grid.h
    out = np.empty(2)
    for side, k, s in ((0, 0, +1), (1, len(u) - 1, -1)):
        a = disc.a_tab[..., k, 0, 0]
        b = disc.b_tab[..., k, 0]
        c = disc.c_tab[..., k]
        f = disc.f_tab[..., k]
        d2 = (u[k] - 2 * u[k + s] + u[k + 2 * s]) / h**2
        inward = s * (u[k + s] - u[k]) / h
        onesided = _onesided_gradient_1d(disc, u)[side]
        # upwind: use the inward difference when it is the monotone choice
        dup = np.where(s * b >= 0, inward, onesided)
        rows = -a * d2 - b * dup + c * u[k] - f
        out[side] = rows.max(axis=1).min(axis=0)
    return out


def _interior_scale(disc):
    """Row magnitude per node (max over controls); normalizes the residual so
    the solve tolerance is meaningful independent of 1/h^2 stiffness."""
    if disc.grid.dim == 1:
        h = disc.grid.h
        a = disc.a_tab[..., 0, 0]
        b = np.abs(disc.b_tab[..., 0])
        scale = 2 * a / h**2 + b / h + np.abs(disc.c_tab)
    else:
        h1, h2 = disc.grid.h
        a11 = disc.a_tab[..., 0, 0]
        a22 = disc.a_tab[..., 1, 1]
        b = np.abs(disc.b_tab).sum(axis=-1)
        scale = 2 * a11 / h1**2 + 2 * a22 / h2**2 + b / min(h1, h2) + np.abs(disc.c_tab)
    return 1.0 + scale.max(axis=(0, 1))


def _boundary_scale(disc):
    hmin = disc.grid.h if disc.grid.dim == 1 else min(disc.grid.h)
    if isinstance(disc.boundary, Capillary):
        gmax = 1.0
    else:
        gmax = float(np.max(np.linalg.norm(disc.gam_btab, axis=-1)))
    return 1.0 + 4.0 * gmax / hmin


def residual_norm(disc, u):
    """Scaled sup-norm of the nonlinear discrete residual (row-relative)."""
    if disc.grid.dim == 1:
        interior = _interior_rows_1d(disc, u).max(axis=1).min(axis=0)
        scale_int = _interior_scale(disc)[1:-1]
        gb = _boundary_residual_1d(disc, u)
    else:
        interior = _interior_rows_2d_minmax(disc, u)
        st = _interior_stencil_2d(disc.grid)
        scale_int = _interior_scale(disc)[st["c"]]
        gb = _boundary_residual_2d(disc, u)
    rb = np.abs(gb) / _boundary_scale(disc)
    if disc.weak_boundary:
        # min-form row: S = min(F_b, G_b) = 0, scaled by the active branch
        fb = _boundary_equation_residual_1d(disc, u) if disc.grid.dim == 1 \
            else _boundary_equation_residual_2d(disc, u)
        raw = np.minimum(fb, gb)
        scale = np.where(fb < gb, _interior_scale(disc)[[0, -1]],
                         _boundary_scale(disc))
        rb = np.abs(raw) / scale
    return float(max(np.max(np.abs(interior) / scale_int), np.max(rb)))


def _select_controls(rows):
    """(i*, j*) per node from stacked row residuals (nc1, nc2, m)."""
    nc1, nc2, m = rows.shape
    jsel = rows.argmax(axis=1)
    ii = np.arange(nc1)[:, None]
    inner = rows[ii, jsel, np.arange(m)[None, :]]
    isel = inner.argmin(axis=0)
    return isel, jsel[isel, np.arange(m)]


def assemble(disc, u_current):
    """Linear system for frozen controls and frozen boundary linearization.

    Returns (matrix, rhs, meta) where meta records the selections used; the
    capillary slope is linearized at the current iterate (Picard).
    """
    if disc.grid.dim == 1:
        return _assemble_1d(disc, u_current)
    return _assemble_2d(disc, u_current)


def _assemble_1d(disc, u):
    grid = disc.grid
    n = grid.n
    h = grid.h
    rows = _interior_rows_1d(disc, u)
    isel, jsel = _select_controls(rows)
    ar = np.arange(1, n)
    a = disc.a_tab[isel, jsel, ar, 0, 0]
    b = disc.b_tab[isel, jsel, ar, 0]
    c = disc.c_tab[isel, jsel, ar]
    f = disc.f_tab[isel, jsel, ar]
    w_e = a / h**2 + np.maximum(b, 0.0) / h
    w_w = a / h**2 + np.maximum(-b, 0.0) / h
    if np.any(w_e < -1e-14) or np.any(w_w < -1e-14):
        node = int(ar[np.nonzero((w_e < -1e-14) | (w_w < -1e-14))[0][0]])
        raise SchemeError(f"negative stencil weight at node {node}", node=node)
    data, ri, ci = [], [], []
    ri.extend(ar); ci.extend(ar); data.extend(w_e + w_w + c)
    ri.extend(ar); ci.extend(ar + 1); data.extend(-w_e)
    ri.extend(ar); ci.extend(ar - 1); data.extend(-w_w)
    rhs = np.zeros(n + 1)
    rhs[1:n] = f

    grads = _onesided_gradient_1d(disc, u)
    meta = {"controls": (isel, jsel), "boundary": []}
    for side, k, s in ((0, 0, +1), (1, n, -1)):
        use_equation = False
        if disc.weak_boundary:
            fb = _boundary_equation_residual_1d(disc, u)[side]
            gb = _boundary_residual_1d(disc, u)[side]
            use_equation = fb < gb
        if use_equation:
            rowvals = _boundary_equation_rows(disc, u, side, k, s)
            ri.extend([k, k, k]); ci.extend([k, k + s, k + 2 * s])
            data.extend(rowvals[0])
            rhs[k] = rowvals[1]
            meta["boundary"].append(("equation", side))
            continue
        spec = disc.boundary
        if isinstance(spec, Capillary):
            gamma = disc.b_normal[side, 0]
            slope = disc.theta_btab[side] * np.sqrt(1.0 + grads[side] ** 2)
        else:
            if isinstance(spec, ControlledReflection):
                vals = (
                    np.einsum("ijk,k->ij", disc.gam_btab[:, :, side], [grads[side]])
                    - disc.g_btab[:, :, side]
                )
                jb = vals.argmax(axis=1)
                ib = int(vals[np.arange(vals.shape[0]), jb].argmin())
                gamma = disc.gam_btab[ib, jb[ib], side, 0]
                slope = disc.g_btab[ib, jb[ib], side]
                meta["boundary"].append(("reflection", side, ib, int(jb[ib])))
            else:
                gamma = disc.gam_btab[0, 0, side, 0]
                slope = disc.g_btab[0, 0, side]
        # gamma * (one-sided du/dx) = slope
        sign = 1.0 if side == 0 else -1.0
        coeffs = sign * gamma * np.array([-3.0, 4.0, -1.0]) / (2 * h)
        # orient the row so the diagonal entry is positive
        orient = 1.0 if coeffs[0] > 0 else -1.0
        ri.extend([k, k, k]); ci.extend([k, k + s, k + 2 * s])
        data.extend(orient * coeffs)
        rhs[k] = orient * slope
    mat = sp.csr_matrix((data, (ri, ci)), shape=(n + 1, n + 1))
    return mat, rhs, meta


def _boundary_equation_rows(disc, u, side, k, s):
    """Weak-branch equation row at an endpoint: coefficients and rhs."""
    h = disc.grid.h
    rows = np.empty((disc.nc1, disc.nc2))
    a = disc.a_tab[..., k, 0, 0]
    b = disc.b_tab[..., k, 0]
    c = disc.c_tab[..., k]
    f = disc.f_tab[..., k]
    d2 = (u[k] - 2 * u[k + s] + u[k + 2 * s]) / h**2
    inward = s * (u[k + s] - u[k]) / h
    onesided = _onesided_gradient_1d(disc, u)[side]
    dup = np.where(s * b >= 0, inward, onesided)
    rows = -a * d2 - b * dup + c * u[k] - f
    jb = rows.argmax(axis=1)
    ib = int(rows[np.arange(rows.shape[0]), jb].argmin())
    a0, b0 = a[ib, jb[ib]], b[ib, jb[ib]]
    c0, f0 = c[ib, jb[ib]], f[ib, jb[ib]]
    if s * b0 >= 0:
        grad_coeff = np.array([-1.0, 1.0, 0.0]) * (s / h)
    else:
        sign = 1.0 if side == 0 else -1.0
        grad_coeff = sign * np.array([-3.0, 4.0, -1.0]) / (2 * h)
    coeffs = -a0 * np.array([1.0, -2.0, 1.0]) / h**2 - b0 * grad_coeff
    coeffs[0] += c0
    return coeffs, f0


def solve(disc, params=None):
    """Howard iteration: alternate control improvement with exact linear
    solves until the nonlinear residual drops below tol."""
    params = params or SolveParams()
    n_nodes = disc.grid.n_nodes
    u = np.zeros(n_nodes)
    history = []
    for it in range(1, params.max_policy_iters + 1):
        mat, rhs, _ = assemble(disc, u)
        u_new = spsolve(mat.tocsc(), rhs)
        res = residual_norm(disc, u_new)
        history.append(res)
        u = u_new
        if res <= params.tol:
            return SolutionField(disc.grid, u, res, it)
    raise NonconvergenceError(
        f"no convergence in {params.max_policy_iters} policy iterations "
        f"(residual {history[-1]:.3e})",
        residual_history=history,
    )


# ---------------------------------------------------------------------------
# 2D strip
# ---------------------------------------------------------------------------

def _strip_neighbors(grid):
    n1, n2 = grid.n
    idx = np.arange(grid.n_nodes).reshape(n1, n2 + 1)
    east = np.roll(idx, -1, axis=0)
    west = np.roll(idx, 1, axis=0)
    return idx, east, west


def _weights_2d(disc, i, j, nodes):
    """Seven-point monotone weights for control (i,j) at the given nodes.

    Returns (w_e, w_w, w_n, w_s, w_d, slant_pos, c, f); the slanted pair is
    (NE, SW) when a12 >= 0 and (NW, SE) otherwise.  The trace term carries
    the factor 2 on the mixed derivative.
    """
    h1, h2 = disc.grid.h
    a11 = disc.a_tab[i, j, nodes, 0, 0]
    a22 = disc.a_tab[i, j, nodes, 1, 1]
    a12 = disc.a_tab[i, j, nodes, 0, 1]
    b1 = disc.b_tab[i, j, nodes, 0]
    b2 = disc.b_tab[i, j, nodes, 1]
    w_d = np.abs(a12) / (h1 * h2)
    w_x = a11 / h1**2 - w_d
    w_y = a22 / h2**2 - w_d
    bad = (w_x < -1e-14) | (w_y < -1e-14)
    if np.any(bad):
        node = int(nodes[np.nonzero(bad)[0][0]])
        raise SchemeError(
            f"cross-diffusion breaks monotonicity at node {node}", node=node
        )
    w_e = w_x + np.maximum(b1, 0.0) / h1
    w_w = w_x + np.maximum(-b1, 0.0) / h1
    w_n = w_y + np.maximum(b2, 0.0) / h2
    w_s = w_y + np.maximum(-b2, 0.0) / h2
    return (w_e, w_w, w_n, w_s, w_d, a12 >= 0,
            disc.c_tab[i, j, nodes], disc.f_tab[i, j, nodes])


def _interior_stencil_2d(grid):
    n1, n2 = grid.n
    idx, east, west = _strip_neighbors(grid)
    inner = slice(1, n2)
    return {
        "c": idx[:, inner].ravel(),
        "e": east[:, inner].ravel(),
        "w": west[:, inner].ravel(),
        "n": idx[:, 2:].ravel(),
        "s": idx[:, :-2].ravel(),
        "ne": east[:, 2:].ravel(),
        "sw": west[:, :-2].ravel(),
        "nw": west[:, 2:].ravel(),
        "se": east[:, :-2].ravel(),
    }


def _row_values_2d(disc, u, st, i, j):
    w_e, w_w, w_n, w_s, w_d, pos, c, f = _weights_2d(disc, i, j, st["c"])
    slant = np.where(pos, u[st["ne"]] + u[st["sw"]], u[st["nw"]] + u[st["se"]])
    diag = w_e + w_w + w_n + w_s + 2.0 * w_d + c
    return (diag * u[st["c"]] - w_e * u[st["e"]] - w_w * u[st["w"]]
            - w_n * u[st["n"]] - w_s * u[st["s"]] - w_d * slant - f)


def _interior_rows_2d_minmax(disc, u):
    st = _interior_stencil_2d(disc.grid)
    rows = np.stack([
        np.stack([_row_values_2d(disc, u, st, i, j) for j in range(disc.nc2)])
        for i in range(disc.nc1)
    ])
    return rows.max(axis=1).min(axis=0)


def _boundary_gradient_2d(disc, u):
    """Second-order gradient at wall nodes: central in x1, one-sided in x2."""
    grid = disc.grid
    n1, n2 = grid.n
    h1, h2 = grid.h
    idx, east, west = _strip_neighbors(grid)
    grads = []
    for wall, s in ((0, +1), (n2, -1)):
        g1 = (u[east[:, wall]] - u[west[:, wall]]) / (2 * h1)
        g2 = s * (-3 * u[idx[:, wall]] + 4 * u[idx[:, wall + s]]
                  - u[idx[:, wall + 2 * s]]) / (2 * h2)
        grads.append(np.column_stack([g1, g2]))
    return grads


def _wall_mask(disc, wall_i):
    """Selector into the sorted boundary tables for wall 0 (bottom) or 1 (top)."""
    height = disc.grid.domain.height
    x2 = disc.grid.nodes[disc.bidx][:, 1]
    return np.isclose(x2, 0.0 if wall_i == 0 else height)


def _boundary_residual_2d(disc, u):
    spec = disc.boundary
    grads = _boundary_gradient_2d(disc, u)
    out = []
    for wall_i in (0, 1):
        p = grads[wall_i]
        mask = _wall_mask(disc, wall_i)
        if isinstance(spec, Capillary):
            nvec = disc.b_normal[mask]
            pn = np.einsum("bk,bk->b", p, nvec)
            out.append(pn - disc.theta_btab[mask]
                       * np.sqrt(1.0 + np.einsum("bk,bk->b", p, p)))
        else:
            vals = np.einsum("ijbk,bk->ijb", disc.gam_btab[:, :, mask], p)
            if disc.g_btab is not None:
                vals = vals - disc.g_btab[:, :, mask]
            out.append(vals.max(axis=1).min(axis=0))
    return np.concatenate(out)


def _boundary_equation_residual_2d(disc, u):
    raise NotImplementedError("weak boundary rows are 1D-only")


def _assemble_2d(disc, u):
    grid = disc.grid
    n1, n2 = grid.n
    h1, h2 = grid.h
    nn = grid.n_nodes
    idx, east, west = _strip_neighbors(grid)
    st = _interior_stencil_2d(grid)
    rows = np.stack([
        np.stack([_row_values_2d(disc, u, st, i, j) for j in range(disc.nc2)])
        for i in range(disc.nc1)
    ])
    isel, jsel = _select_controls(rows)
    m = st["c"].size
    w_e = np.empty(m); w_w = np.empty(m); w_n = np.empty(m); w_s = np.empty(m)
    w_d = np.empty(m); pos = np.empty(m, dtype=bool)
    c = np.empty(m); f = np.empty(m)
    for i in range(disc.nc1):
        for j in range(disc.nc2):
            sel = (isel == i) & (jsel == j)
            if not np.any(sel):
                continue
            vals = _weights_2d(disc, i, j, st["c"][sel])
            w_e[sel], w_w[sel], w_n[sel], w_s[sel], w_d[sel] = vals[:5]
            pos[sel], c[sel], f[sel] = vals[5], vals[6], vals[7]
    data, ri, ci = [], [], []

    def add(rows_, cols_, vals_):
        ri.append(rows_); ci.append(cols_); data.append(vals_)

    add(st["c"], st["c"], w_e + w_w + w_n + w_s + 2.0 * w_d + c)
    add(st["c"], st["e"], -w_e)
    add(st["c"], st["w"], -w_w)
    add(st["c"], st["n"], -w_n)
    add(st["c"], st["s"], -w_s)
    add(st["c"], np.where(pos, st["ne"], st["nw"]), -w_d)
    add(st["c"], np.where(pos, st["sw"], st["se"]), -w_d)
    rhs = np.zeros(nn)
    rhs[st["c"]] = f

    grads = _boundary_gradient_2d(disc, u)
    spec = disc.boundary
    for wall_i, (wall, s) in enumerate(((0, +1), (n2, -1))):
        mask = _wall_mask(disc, wall_i)
        nodes_w = idx[:, wall]
        p = grads[wall_i]
        nb = nodes_w.size
        if isinstance(spec, Capillary):
            gam = disc.b_normal[mask]
            slope = disc.theta_btab[mask] * np.sqrt(
                1.0 + np.einsum("bk,bk->b", p, p))
        elif isinstance(spec, ControlledReflection):
            vals_b = np.einsum("ijbk,bk->ijb", disc.gam_btab[:, :, mask], p)                 - disc.g_btab[:, :, mask]
            jb = vals_b.argmax(axis=1)
            i_ar = np.arange(vals_b.shape[0])[:, None]
            inner_vals = vals_b[i_ar, jb, np.arange(nb)[None, :]]
            ib = inner_vals.argmin(axis=0)
            kk = np.arange(nb)
            gsel = disc.gam_btab[:, :, mask]
            ssel = disc.g_btab[:, :, mask]
            gam = gsel[ib, jb[ib, kk], kk]
            slope = ssel[ib, jb[ib, kk], kk]
        else:
            gam = disc.gam_btab[0, 0, mask]
            slope = disc.g_btab[0, 0, mask]
        g2coef = s * np.array([-3.0, 4.0, -1.0]) / (2 * h2)
        orient = np.where(gam[:, 1] * g2coef[0] > 0, 1.0, -1.0)
        add(nodes_w, nodes_w, orient * gam[:, 1] * g2coef[0])
        add(nodes_w, idx[:, wall + s], orient * gam[:, 1] * g2coef[1])
        add(nodes_w, idx[:, wall + 2 * s], orient * gam[:, 1] * g2coef[2])
        add(nodes_w, east[:, wall], orient * gam[:, 0] / (2 * h1))
        add(nodes_w, west[:, wall], -orient * gam[:, 0] / (2 * h1))
        rhs[nodes_w] = orient * slope
    mat = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(ri), np.concatenate(ci))),
        shape=(nn, nn),
    )
    return mat, rhs, {"controls": (isel, jsel)}


# ---------------------------------------------------------------------------
# checks and estimates
# ---------------------------------------------------------------------------

def discrete_comparison_check(make_pair, params, trials, rng=None, tol=1e-10):
    """Solve ordered sub/super data pairs and count ordering violations.

    make_pair(rng) must return (disc_sub, disc_super) with pointwise-ordered
    data (f_sub <= f_super, boundary data ordered consistently).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    violations = 0
    for _ in range(trials):
        disc_sub, disc_super = make_pair(rng)
        u_sub = solve(disc_sub, params).values
        u_super = solve(disc_super, params).values
        violations += int(np.count_nonzero(u_sub > u_super + tol))
    return violations


def holder_estimate(field: SolutionField, max_nodes=1025):
    """(beta_hat, seminorm) from the discrete modulus of continuity.

    omega(r) = max |u(x)-u(y)| over node pairs with |x-y| <= r, fitted by
    least squares on logs over r in [4h, diam/4]; beta clamped to (0,1].
    Constant fields return (1.0, 0.0) by convention.
    """
    grid = field.grid
    u = field.values
    if np.max(np.abs(u - u[0])) <= 1e-14 * (1.0 + np.abs(u[0])):
        return 1.0, 0.0
    nodes = grid.nodes
    if nodes.shape[0] > max_nodes:
        stride = int(np.ceil(nodes.shape[0] / max_nodes))
        nodes = nodes[::stride]
        u = u[::stride]
    from .geometry import diameter, wrap_difference

    diff = wrap_difference(grid.domain, nodes[:, None, :], nodes[None, :, :])
    dist = np.linalg.norm(diff, axis=-1)
    du = np.abs(u[:, None] - u[None, :])
    h_eff = float(np.min(dist[dist > 0]))
    r_lo, r_hi = 4 * h_eff, diameter(grid.domain) / 4
    if r_lo >= r_hi:
        r_lo = h_eff
    rs = np.geomspace(r_lo, r_hi, 24)
    omega = np.array([np.max(du[dist <= r], initial=0.0) for r in rs])
    good = omega > 0
    if np.count_nonzero(good) < 3:
        return 1.0, 0.0
    slope, _ = np.polyfit(np.log(rs[good]), np.log(omega[good]), 1)
    beta = float(np.clip(slope, 1e-6, 1.0))
    mask = dist > 0
    seminorm = float(np.max(du[mask] / dist[mask] ** beta))
    return beta, seminorm
