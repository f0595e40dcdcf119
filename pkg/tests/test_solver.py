import numpy as np
import pytest
from scipy.integrate import quad

from neumannlab.boundary import Capillary, ControlledReflection, Neumann, Oblique
from neumannlab.errors import NonconvergenceError, SchemeError
from neumannlab.fields import Affine, Const, FuncField, MatrixField
from neumannlab.geometry import Grid, Interval, PeriodicStrip
from neumannlab.operators import ControlledCoefficients, OperatorSpec
from neumannlab.solver import (
    Discretization,
    SolveParams,
    discrete_comparison_check,
    holder_estimate,
    residual_norm,
    solve,
)

DOM = Interval(0.0, 1.0)


def linear_op(sigma=1.0, b=0.0, c=1.0, f=0.0):
    return OperatorSpec("linear", ControlledCoefficients.single(sigma, b, c, f, dim=1))


def manufactured_op():
    f = FuncField(lambda x: (np.pi**2 + 1) * np.cos(np.pi * x[..., 0]))
    return linear_op(sigma=1.0, b=0.0, c=1.0, f=f)


class TestAssembleAndSolve:
    def test_constant_solution_immediate(self):
        op = linear_op(c=2.0, f=6.0)
        disc = Discretization(Grid(DOM, 32), op, Neumann(g=Const(0.0)))
        sol = solve(disc)
        assert sol.iterations == 1
        assert np.max(np.abs(sol.values - 3.0)) <= 1e-12

    def test_manufactured_second_order(self):
        errs = []
        for n in (64, 128, 256, 512):
            g = Grid(DOM, n)
            disc = Discretization(g, manufactured_op(), Neumann(g=Const(0.0)))
            sol = solve(disc)
            errs.append(np.max(np.abs(sol.values - np.cos(np.pi * g.nodes[:, 0]))))
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all(ratios >= 3.5) and np.all(ratios <= 4.5)

    def test_oblique_manufactured(self):
        # u = cos(pi x) + x, gamma = g = 2x - 1 at the endpoints
        f = FuncField(lambda x: (np.pi**2 + 1) * np.cos(np.pi * x[..., 0]) + x[..., 0])
        op = linear_op(f=f)
        bc = Oblique(gamma=Affine(-1.0, [2.0]), g=Affine(-1.0, [2.0]), nu=1.0)
        g = Grid(DOM, 256)
        sol = solve(Discretization(g, op, bc))
        exact = np.cos(np.pi * g.nodes[:, 0]) + g.nodes[:, 0]
        assert np.max(np.abs(sol.values - exact)) <= 5e-4

    def test_capillary_manufactured(self):
        # u = x^2(1-x)^2 + x has u'(0) = u'(1) = 1
        def uex(x):
            return x**2 * (1 - x) ** 2 + x

        def fex(x):
            return -(2 - 12 * x + 12 * x**2) + uex(x)

        op = linear_op(f=FuncField(lambda p: fex(p[..., 0])))
        theta = Affine(-1.0 / np.sqrt(2.0), [2.0 / np.sqrt(2.0)])
        bc = Capillary(theta=theta, omega=1.0 / np.sqrt(2.0) + 1e-9)
        errs = []
        for n in (128, 256, 512):
            g = Grid(DOM, n)
            sol = solve(Discretization(g, op, bc))
            errs.append(np.max(np.abs(sol.values - uex(g.nodes[:, 0]))))
        assert errs[-1] <= 5e-5
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all(ratios >= 3.5) and np.all(ratios <= 4.5)

    def test_reflection_inactive_control(self):
        # second control has smaller g, hence larger G; the min never picks it
        f = FuncField(lambda x: (np.pi**2 + 1) * np.cos(np.pi * x[..., 0]) + x[..., 0])
        op = linear_op(f=f)
        gam = Affine(-1.0, [2.0])
        bc_ref = ControlledReflection(
            gamma=[[gam], [gam]],
            g=[[Affine(-1.0, [2.0])], [Affine(-2.0, [2.0])]],
            nu=1.0,
        )
        bc_obl = Oblique(gamma=gam, g=Affine(-1.0, [2.0]), nu=1.0)
        g = Grid(DOM, 128)
        u_ref = solve(Discretization(g, op, bc_ref)).values
        u_obl = solve(Discretization(g, op, bc_obl)).values
        assert np.max(np.abs(u_ref - u_obl)) <= 1e-11

    def test_bellman_matches_value_iteration(self):
        f1 = FuncField(lambda x: np.sin(np.pi * x[..., 0]))
        cc = ControlledCoefficients(
            sigma=[[0.6], [0.6]], b=[[0.0], [0.0]], c=[[1.0], [1.0]],
            f=[[f1], [0.5]], dim=1,
        )
        op = OperatorSpec("bellman", cc)
        g = Grid(DOM, 32)
        disc = Discretization(g, op, Neumann(g=Const(0.0)))
        sol = solve(disc)

        # brute-force value iteration on the same discrete system
        h = g.h
        x = g.nodes[:, 0]
        a = 0.36
        fs = np.stack([np.sin(np.pi * x), np.full_like(x, 0.5)])
        u = np.zeros_like(x)
        w = a / h**2
        diag = 2 * w + 1.0
        for _ in range(200000):
            cand = (w * (u[2:] + u[:-2])[None, :] + fs[:, 1:-1]) / diag
            new_int = cand.max(axis=0)
            u_new = u.copy()
            u_new[1:-1] = new_int
            u_new[0] = (4 * u_new[1] - u_new[2]) / 3.0
            u_new[-1] = (4 * u_new[-2] - u_new[-3]) / 3.0
            delta = np.max(np.abs(u_new - u))
            u = u_new
            if delta <= 1e-13:
                break
        assert np.max(np.abs(sol.values - u)) <= 1e-8

    def test_degenerate_weak_boundary_matches_analytic(self):
        f = FuncField(lambda x: np.cos(np.pi * x[..., 0]))
        op = linear_op(sigma=0.0, b=1.0, c=1.0, f=f)
        g = Grid(DOM, 4096)
        disc = Discretization(g, op, Neumann(g=Const(0.0)), weak_boundary=True)
        sol = solve(disc)

        def exact(xv):
            val, _ = quad(lambda t: np.exp(-t) * np.cos(np.pi * (xv + t)),
                          0, 1 - xv, limit=200)
            return val + np.exp(-(1 - xv)) * np.cos(np.pi)

        probe = g.nodes[:: 256, 0]
        ex = np.array([exact(xv) for xv in probe])
        assert np.max(np.abs(sol.values[::256] - ex)) <= 5e-3

    def test_degenerate_upwind_monotone(self):
        op = linear_op(sigma=0.0, b=1.0, c=1.0, f=Const(0.5))
        disc = Discretization(Grid(DOM, 64), op, Neumann(g=Const(0.0)),
                              weak_boundary=True)
        sol = solve(disc)  # no scheme error, converges
        assert sol.residual_norm <= 1e-10

    def test_viscosity_keeps_monotonicity(self):
        op = linear_op(sigma=0.0, b=1.0, c=1.0, f=Const(0.5))
        for mu in (0.5, 1e-3):
            disc = Discretization(Grid(DOM, 64), op, Neumann(g=Const(0.0)), mu=mu)
            sol = solve(disc)
            assert sol.residual_norm <= 1e-10

    def test_nonconvergence_raises_with_history(self):
        op = manufactured_op()
        disc = Discretization(Grid(DOM, 64), op, Neumann(g=Const(0.0)))
        with pytest.raises(NonconvergenceError) as ei:
            solve(disc, SolveParams(tol=1e-30, max_policy_iters=3))
        assert len(ei.value.residual_history) == 3

    def test_residual_invariant_on_return(self):
        params = SolveParams(tol=1e-10)
        disc = Discretization(Grid(DOM, 512), manufactured_op(), Neumann(g=Const(0.0)))
        sol = solve(disc, params)
        assert sol.residual_norm <= params.tol
        assert residual_norm(disc, sol.values) <= params.tol


class TestStrip2D:
    def test_manufactured_strip(self):
        P, H = 2.0, 1.0
        k1, k2 = 2 * np.pi / P, np.pi / H

        def uex(pts):
            return np.cos(k1 * pts[..., 0]) * np.cos(k2 * pts[..., 1])

        f = FuncField(lambda p: (k1**2 + k2**2 + 1.0) * uex(p))
        cc = ControlledCoefficients.single(1.0, [0.0, 0.0], 1.0, f, dim=2)
        op = OperatorSpec("linear", cc)
        bc = Neumann(g=Const(0.0))
        errs = []
        for n in ((16, 16), (32, 32)):
            g = Grid(PeriodicStrip(P, H), n)
            sol = solve(Discretization(g, op, bc))
            errs.append(np.max(np.abs(sol.values - uex(g.nodes))))
        assert errs[0] / errs[1] >= 3.0

    def test_cross_diffusion_monotone_or_error(self):
        # strongly dominant cross term must raise a scheme error
        sigma = MatrixField(entries=[[1.0, 0.99], [0.0, 0.2]])
        cc = ControlledCoefficients.single(sigma, [0.0, 0.0], 1.0, 0.0, dim=2)
        op = OperatorSpec("linear", cc)
        g = Grid(PeriodicStrip(2.0, 1.0), (8, 8))
        with pytest.raises(SchemeError):
            solve(Discretization(g, op, Neumann(g=Const(0.0))))

    def test_mild_cross_diffusion_solves(self):
        sigma = MatrixField(entries=[[1.0, 0.2], [0.0, 0.9]])
        cc = ControlledCoefficients.single(sigma, [0.1, -0.1], 1.0,
                                           Const(1.0), dim=2)
        op = OperatorSpec("linear", cc)
        g = Grid(PeriodicStrip(2.0, 1.0), (12, 12))
        sol = solve(Discretization(g, op, Neumann(g=Const(0.0))))
        assert sol.residual_norm <= 1e-10


class TestComparison:
    def make_pair_factory(self, bump_scale=1.0):
        def make_pair(rng):
            amp = rng.uniform(0.1, bump_scale)
            freq = rng.integers(1, 4)
            base = FuncField(lambda x: np.sin(np.pi * freq * x[..., 0]))
            fsup = FuncField(
                lambda x: np.sin(np.pi * freq * x[..., 0])
                + amp * (1 + np.cos(np.pi * x[..., 0])) / 2
            )
            gs = rng.uniform(-0.3, 0.3)
            gb = gs + rng.uniform(0.0, 0.5)
            op_sub = linear_op(sigma=0.8, b=0.4, c=1.0, f=base)
            op_sup = linear_op(sigma=0.8, b=0.4, c=1.0, f=fsup)
            grid = Grid(DOM, 64)
            d_sub = Discretization(grid, op_sub, Neumann(g=Const(gs)))
            d_sup = Discretization(grid, op_sup, Neumann(g=Const(gb)))
            return d_sub, d_sup

        return make_pair

    def test_identical_data_no_violation(self):
        def make_pair(rng):
            disc = Discretization(Grid(DOM, 64), manufactured_op(), Neumann(g=Const(0.0)))
            return disc, disc

        assert discrete_comparison_check(make_pair, SolveParams(), 3) == 0

    def test_constant_shift_identity(self):
        # f_super = f_sub + 1 with c = 1: u_super = u_sub + 1 exactly
        op1 = manufactured_op()
        f2 = FuncField(lambda x: (np.pi**2 + 1) * np.cos(np.pi * x[..., 0]) + 1.0)
        op2 = linear_op(f=f2)
        g = Grid(DOM, 64)
        u1 = solve(Discretization(g, op1, Neumann(g=Const(0.0)))).values
        u2 = solve(Discretization(g, op2, Neumann(g=Const(0.0)))).values
        assert np.max(np.abs(u2 - (u1 + 1.0))) <= 1e-10

    def test_randomized_ordered_pairs(self):
        violations = discrete_comparison_check(
            self.make_pair_factory(), SolveParams(), 20,
            rng=np.random.default_rng(42),
        )
        assert violations == 0


class TestHolderEstimate:
    def sol_from_values(self, values, n):
        g = Grid(DOM, n)
        from neumannlab.solver import SolutionField

        return SolutionField(g, values, 0.0, 1)

    def test_linear_function(self):
        g = Grid(DOM, 256)
        beta, semi = holder_estimate(self.sol_from_values(g.nodes[:, 0], 256))
        assert beta == pytest.approx(1.0, abs=1e-6)
        assert semi == pytest.approx(1.0, rel=1e-2)

    def test_sqrt_function(self):
        g = Grid(DOM, 1024)
        beta, _ = holder_estimate(self.sol_from_values(np.sqrt(g.nodes[:, 0]), 1024))
        assert beta == pytest.approx(0.5, abs=0.05)

    def test_constant_convention(self):
        beta, semi = holder_estimate(self.sol_from_values(np.full(65, 2.5), 64))
        assert beta == 1.0 and semi == 0.0
