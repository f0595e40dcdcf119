import json

import numpy as np
import pytest

from neumannlab.boundary import ControlledReflection, Neumann
from neumannlab.fields import Affine, Const, FuncField
from neumannlab.geometry import DistanceField, Interval
from neumannlab.operators import ControlledCoefficients, OperatorSpec
from neumannlab.experiments import (
    ContDepStudy,
    Problem,
    RateStudy,
    fit_rate,
    run_cont_dep,
    run_vv_rate,
)

FIELD = DistanceField(Interval(0.0, 1.0), r0=0.2)


def linear_problem(c=1.0, weak=False, boundary=None, sigma=1.0, b=0.0, f=None):
    if f is None:
        f = FuncField(lambda x: (np.pi**2 + 1) * np.cos(np.pi * x[..., 0]))
    op = OperatorSpec(
        "linear", ControlledCoefficients.single(sigma, b, c, f, dim=1, lam=c)
    )
    bc = Neumann(g=Const(0.0)) if boundary is None else boundary
    return Problem(FIELD, op, bc, weak_boundary=weak)


def degenerate_problem():
    f = FuncField(lambda x: np.cos(np.pi * x[..., 0]))
    return linear_problem(sigma=0.0, b=1.0, f=f, weak=True)


class TestFitRate:
    def test_exact_slope_one(self):
        slope, _, r2 = fit_rate([(1, 1), (0.5, 0.5), (0.25, 0.25)])
        assert slope == pytest.approx(1.0, abs=1e-12)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_two_point_exact(self):
        slope, _, _ = fit_rate([(1, 2), (0.25, 1)])
        assert slope == pytest.approx(0.5, abs=1e-12)

    def test_noisy_half_slope(self):
        rng = np.random.default_rng(7)
        scales = np.geomspace(1, 1e-3, 12)
        errors = 2.0 * scales**0.5 * np.exp(rng.normal(0, 0.02, 12))
        slope, _, _ = fit_rate(list(zip(scales, errors)))
        assert slope == pytest.approx(0.5, abs=0.05)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            fit_rate([(1.0, 0.0), (0.5, 1.0)])
        with pytest.raises(ValueError):
            fit_rate([(1.0, 1.0)])


class TestRateStudy:
    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            RateStudy(degenerate_problem(), mu_schedule=(0.25, 0.5))
        with pytest.raises(ValueError):
            RateStudy(degenerate_problem(), mu_schedule=(0.25, -0.1))
        with pytest.raises(ValueError):
            RateStudy(degenerate_problem(), ref_factor=2)

    def test_degenerate_drift_rate(self):
        study = RateStudy(degenerate_problem(), grid_n=2048)
        rep = run_vv_rate(study)
        assert rep.passed
        assert rep.summary["slope"] >= 0.4
        assert rep.summary["monotone"]
        assert len(rep.table) == 8

    def test_report_determinism(self):
        study = RateStudy(degenerate_problem(), grid_n=512,
                          mu_schedule=(0.25, 0.125, 0.0625))
        r1 = run_vv_rate(study).to_json()
        r2 = run_vv_rate(study).to_json()
        assert r1 == r2

    def test_report_save(self, tmp_path):
        study = RateStudy(degenerate_problem(), grid_n=512,
                          mu_schedule=(0.25, 0.125, 0.0625))
        rep = run_vv_rate(study)
        path = rep.save(tmp_path, "vv")
        data = json.loads(path.read_text())
        assert data["study"] == "vv-rate"
        assert "runtime_seconds" not in json.dumps(data)
        assert (tmp_path / "vv.csv").read_text().startswith("mu,error,iterations")


class TestContDep:
    MAGS = tuple(0.04 * 2.0 ** (-k) for k in range(7))

    def test_zero_perturbation_ratio_zero(self):
        rep = run_cont_dep(ContDepStudy(linear_problem(), "f-shift", (0.0,),
                                        grid_n=64))
        assert rep.table[0]["ratio"] == 0.0

    def test_f_shift_identity_and_unit_ratio(self):
        # c = 2 everywhere: |u1-u2| = s / 2 exactly, R = 1
        prob = linear_problem(c=2.0)
        rep = run_cont_dep(ContDepStudy(prob, "f-shift", self.MAGS, grid_n=128))
        assert rep.passed
        for row in rep.table:
            assert row["sup_diff"] == pytest.approx(row["magnitude"] / 2.0, abs=1e-8)
            assert row["ratio"] == pytest.approx(1.0, abs=1e-6)

    def test_sigma_shift_bounded(self):
        rep = run_cont_dep(ContDepStudy(linear_problem(), "sigma-shift",
                                        self.MAGS, grid_n=128))
        assert rep.passed
        assert rep.summary["max_ratio"] <= 10 * rep.summary["median_ratio"]

    def test_gamma_shift_bounded(self):
        gam = Affine(-1.0, [2.0])
        bc = ControlledReflection(
            gamma=[[gam], [gam]],
            g=[[Affine(-1.0, [2.0])], [Affine(-1.3, [2.0])]],
            nu=1.0,
        )
        f = FuncField(lambda x: (np.pi**2 + 1) * np.cos(np.pi * x[..., 0]) + x[..., 0])
        prob = linear_problem(boundary=bc, f=f)
        rep = run_cont_dep(ContDepStudy(prob, "gamma-shift", self.MAGS, grid_n=128))
        assert rep.passed
        assert all(row["mu2"] == pytest.approx(row["magnitude"], abs=1e-12)
                   for row in rep.table)

    def test_unknown_family_rejected(self):
        with pytest.raises(ValueError):
            ContDepStudy(linear_problem(), "b-shift", (0.1,))

    def test_declared_C_gate(self):
        rep = run_cont_dep(ContDepStudy(linear_problem(), "f-shift", (0.04, 0.02),
                                        grid_n=64, declared_C=0.5))
        assert not rep.passed  # ratio is 1 > 0.5
