import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neumannlab.errors import DomainError
from neumannlab.geometry import (
    Disc,
    DistanceField,
    Grid,
    Interval,
    PeriodicStrip,
    check_w3_inequality,
    wrap_difference,
)


def fields():
    return [
        DistanceField(Interval(0.0, 1.0), r0=0.2),
        DistanceField(PeriodicStrip(2.0, 1.0), r0=0.2),
        DistanceField(Disc(1.0), r0=0.2),
    ]


def random_points(field, rng, n):
    dom = field.domain
    if isinstance(dom, Interval):
        return rng.uniform(dom.a, dom.b, size=(n, 1))
    if isinstance(dom, PeriodicStrip):
        return np.column_stack(
            [rng.uniform(0, dom.period, n), rng.uniform(0, dom.height, n)]
        )
    r = dom.radius * np.sqrt(rng.uniform(0, 1, n))
    th = rng.uniform(0, 2 * np.pi, n)
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


class TestEvalDistance:
    def test_interval_exact_zone_left(self):
        f = DistanceField(Interval(0.0, 1.0), r0=0.2)
        d, g, _ = f.eval_distance(0.05)
        assert d == pytest.approx(0.05, abs=0)
        assert g[..., 0] == pytest.approx(1.0, abs=0)

    def test_disc_exact_zone(self):
        f = DistanceField(Disc(1.0), r0=0.2)
        d, g, _ = f.eval_distance([0.9, 0.0])
        assert d == pytest.approx(0.1, abs=1e-15)
        assert np.allclose(g, [-1.0, 0.0], atol=1e-15)

    def test_interval_plateau_value(self):
        # beyond r0 the profile saturates: phi = r0/2 * (1 + W(1)) = 0.75 r0
        f = DistanceField(Interval(0.0, 1.0), r0=0.2)
        d, g, h = f.eval_distance(0.5)
        t = 1.0  # blend variable is clamped at 1 for s >= r0
        expected = 0.1 * (1.0 + (t - (2.5 * t**4 - 3 * t**5 + t**6)))
        assert d == pytest.approx(expected, abs=1e-15)
        assert d == pytest.approx(0.15, abs=1e-15)
        assert g[..., 0] == 0.0 and h[..., 0, 0] == 0.0

    def test_blend_midzone_matches_polynomial(self):
        f = DistanceField(Interval(0.0, 1.0), r0=0.2)
        s = 0.15  # inside the transition [0.1, 0.2]
        t = (s - 0.1) / 0.1
        expected = 0.1 * (1.0 + t - (2.5 * t**4 - 3 * t**5 + t**6))
        d, _, _ = f.eval_distance(s)
        assert d == pytest.approx(expected, rel=1e-14)

    def test_outside_domain_raises(self):
        f = DistanceField(Interval(0.0, 1.0), r0=0.2)
        with pytest.raises(DomainError):
            f.eval_distance(1.5)
        with pytest.raises(DomainError):
            DistanceField(Disc(1.0)).eval_distance([1.2, 0.0])

    @pytest.mark.parametrize("field", fields(), ids=["interval", "strip", "disc"])
    def test_bounds_and_gradient_norm(self, field):
        rng = np.random.default_rng(0)
        x = random_points(field, rng, 2000)
        d, g, _ = field.eval_distance(x)
        assert np.all(d >= 0.0) and np.all(d <= 1.0)
        assert np.all(np.linalg.norm(g, axis=-1) <= 1.0 + 1e-12)

    @pytest.mark.parametrize("field", fields(), ids=["interval", "strip", "disc"])
    def test_derivatives_match_finite_differences(self, field):
        rng = np.random.default_rng(1)
        # keep a margin so stencil points stay inside
        x = 0.9 * random_points(field, rng, 200) if isinstance(field.domain, Disc) \
            else random_points(field, rng, 200) * 0.9 + 0.05 * np.array(
                [0.0, 1.0] if field.dim == 2 else [1.0]
            )
        h = 1e-6
        _, g, hess = field.eval_distance(x)
        for i in range(field.dim):
            e = np.zeros(field.dim)
            e[i] = h
            dp = field.value(x + e)
            dm = field.value(x - e)
            fd = (dp - dm) / (2 * h)
            assert np.allclose(fd, g[..., i], atol=5e-9)
            gp = field._eval_unchecked(x + e)[1]
            gm = field._eval_unchecked(x - e)[1]
            assert np.allclose((gp - gm) / (2 * h), hess[..., i, :], atol=2e-4)


class TestOutwardNormal:
    def test_interval_endpoints(self):
        f = DistanceField(Interval(0.0, 1.0), r0=0.2)
        assert f.outward_normal(0.0)[..., 0] == pytest.approx(-1.0)
        assert f.outward_normal(1.0)[..., 0] == pytest.approx(1.0)

    def test_disc_radial(self):
        f = DistanceField(Disc(1.0), r0=0.2)
        n = f.outward_normal([0.0, 1.0])
        assert np.allclose(n, [0.0, 1.0], atol=1e-15)

    @pytest.mark.parametrize("field", fields(), ids=["interval", "strip", "disc"])
    def test_unit_norm_on_boundary(self, field):
        rng = np.random.default_rng(2)
        dom = field.domain
        if isinstance(dom, Interval):
            pts = np.array([[dom.a], [dom.b]])
        elif isinstance(dom, PeriodicStrip):
            x1 = rng.uniform(0, dom.period, 50)
            pts = np.vstack(
                [np.column_stack([x1, np.zeros(50)]),
                 np.column_stack([x1, np.full(50, dom.height)])]
            )
        else:
            th = rng.uniform(0, 2 * np.pi, 100)
            pts = dom.radius * np.column_stack([np.cos(th), np.sin(th)])
        n = field.outward_normal(pts)
        assert np.allclose(np.linalg.norm(n, axis=-1), 1.0, atol=1e-12)


class TestW3Inequality:
    def test_degenerate_pair_no_violation(self):
        f = DistanceField(Interval(0.0, 1.0), r0=0.2)
        x = np.array([[0.3], [0.7]])
        v, fitted = check_w3_inequality(f, x, x)
        assert v == 0
        assert fitted == 0.0

    def test_exact_zone_linear(self):
        f = DistanceField(Interval(0.0, 1.0), r0=0.2)
        v, _ = check_w3_inequality(f, np.array([[0.01]]), np.array([[0.03]]))
        assert v == 0

    @pytest.mark.parametrize("field", fields(), ids=["interval", "strip", "disc"])
    def test_no_violations_random_pairs(self, field):
        rng = np.random.default_rng(3)
        xs = random_points(field, rng, 10_000)
        ys = random_points(field, rng, 10_000)
        v, fitted = check_w3_inequality(field, xs, ys)
        assert v == 0
        assert fitted <= field.d3_bound / 24.0 * (1 + 1e-9)

    def test_empty_samples_raise(self):
        f = DistanceField(Interval(0.0, 1.0), r0=0.2)
        with pytest.raises(ValueError):
            check_w3_inequality(f, np.empty((0, 1)), np.empty((0, 1)))


class TestGrid:
    def test_interval_grid(self):
        g = Grid(Interval(0.0, 1.0), 10)
        assert g.n_nodes == 11
        assert g.h == pytest.approx(0.1)
        assert g.boundary_index_set == {0, 10}

    def test_strip_grid_periodic_first_axis(self):
        g = Grid(PeriodicStrip(2.0, 1.0), (4, 3))
        assert g.n_nodes == 4 * 4
        assert g.shape == (4, 4)
        x1 = np.unique(g.nodes[:, 0])
        assert np.allclose(x1, [0.0, 0.5, 1.0, 1.5])
        f = DistanceField(PeriodicStrip(2.0, 1.0), r0=0.2)
        onb = np.isclose(f.value(g.nodes), 0.0)
        assert set(np.nonzero(onb)[0]) == set(g.boundary_index_set)

    def test_grid_nodes_satisfy_distance_invariants(self):
        for g, f in [
            (Grid(Interval(0.0, 1.0), 64), DistanceField(Interval(0.0, 1.0))),
            (Grid(PeriodicStrip(2.0, 1.0), (8, 8)), DistanceField(PeriodicStrip(2.0, 1.0))),
        ]:
            d, grad, _ = f.eval_distance(g.nodes)
            assert np.all((0.0 <= d) & (d <= 1.0))
            assert np.all(np.linalg.norm(grad, axis=-1) <= 1.0)

    def test_disc_grid_rejected(self):
        with pytest.raises(ValueError):
            Grid(Disc(1.0), 8)


class TestWrapDifference:
    def test_strip_minimal_image(self):
        dom = PeriodicStrip(2.0, 1.0)
        d = wrap_difference(dom, [[1.9, 0.5]], [[0.1, 0.5]])
        assert d[0, 0] == pytest.approx(-0.2)


@settings(max_examples=200, deadline=None)
@given(
    x=st.floats(min_value=0.0, max_value=1.0),
    y=st.floats(min_value=0.0, max_value=1.0),
)
def test_w3_property_interval(x, y):
    f = DistanceField(Interval(0.0, 1.0), r0=0.2)
    v, _ = check_w3_inequality(f, np.array([[x]]), np.array([[y]]))
    assert v == 0
