"""Desk-scale experiment harnesses: vanishing-viscosity rate and
continuous-dependence envelope, with deterministic tabular reports.

The viscosity study solves the regularized problem F = mu * Laplacian(u) per
schedule entry on a fixed grid and measures sup-norm errors against an
unviscous reference on a finer grid; the continuous-dependence study drives a
perturbation family through a magnitude schedule and tracks the ratio

    R = lambda |u1-u2|_0 / (delta1 + delta2^abar + mu1/nu + (mu2/nu)^abar),

which stays bounded when the estimate holds (abar = alpha ^ beta_hat).
"""

import csv
import json
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .boundary import ControlledReflection, boundary_distance
from .errors import NonconvergenceError
from .fields import Affine, Const, FuncField, MatrixField, VectorField
from .geometry import DistanceField, Grid, Interval
from .operators import ControlledCoefficients, OperatorSpec, coefficient_distance
from .solver import Discretization, SolveParams, holder_estimate, solve


@dataclass
class Problem:
    """One boundary value problem: domain binding plus equation and wall data."""

    dfield: DistanceField
    operator: OperatorSpec
    boundary: object
    weak_boundary: bool = False

    @property
    def domain(self):
        return self.dfield.domain

    def discretize(self, n, mu=0.0, weak=None):
        weak = self.weak_boundary if weak is None else weak
        return Discretization(Grid(self.domain, n), self.operator, self.boundary,
                              mu=mu, weak_boundary=weak)


@dataclass
class Report:
    study: str
    config: dict
    table: list
    summary: dict
    passed: bool
    runtime_seconds: float = dc_field(default=0.0, compare=False)

    def to_json_dict(self):
        """Serializable payload; excludes the volatile runtime field."""
        return {
            "study": self.study,
            "config": self.config,
            "table": self.table,
            "summary": self.summary,
            "passed": self.passed,
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def save(self, outdir, name):
        import pathlib

        outdir = pathlib.Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / f"{name}.json").write_text(self.to_json())
        if self.table:
            with open(outdir / f"{name}.csv", "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(self.table[0].keys()))
                writer.writeheader()
                writer.writerows(self.table)
        return outdir / f"{name}.json"


def fit_rate(pairs):
    """(slope, intercept, r_squared) of log(error) against log(scale)."""
    pairs = [(float(s), float(e)) for s, e in pairs]
    if len(pairs) < 2:
        raise ValueError("need at least two (scale, error) pairs")
    if any(s <= 0 or e <= 0 for s, e in pairs):
        raise ValueError("scales and errors must be positive")
    xs = np.log([s for s, _ in pairs])
    ys = np.log([e for _, e in pairs])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), float(r2)


DEFAULT_MU_SCHEDULE = tuple(2.0 ** (-k) for k in range(2, 10))


@dataclass
class RateStudy:
    problem: Problem
    mu_schedule: tuple = DEFAULT_MU_SCHEDULE
    grid_n: int = 2048
    ref_factor: int = 4

    def __post_init__(self):
        sched = tuple(float(m) for m in self.mu_schedule)
        if any(m <= 0 for m in sched):
            raise ValueError("viscosity schedule must be positive")
        if any(a <= b for a, b in zip(sched, sched[1:])):
            raise ValueError("viscosity schedule must be strictly decreasing")
        if self.ref_factor < 4:
            raise ValueError("reference grid must be at least 4x finer")
        self.mu_schedule = sched


def run_vv_rate(study: RateStudy, params=None):
    """Viscosity rate study; pass flag is slope >= beta_hat/2 - 0.1."""
    params = params or SolveParams()
    t0 = time.perf_counter()
    prob = study.problem
    n = study.grid_n
    ref = solve(prob.discretize(n * study.ref_factor, mu=0.0), params)
    beta_hat, seminorm = holder_estimate(ref)
    u_ref = ref.values[:: study.ref_factor]
    table = []
    errors = []
    aborted = None
    for mu in study.mu_schedule:
        try:
            sol = solve(prob.discretize(n, mu=mu, weak=False), params)
        except NonconvergenceError as exc:
            aborted = f"nonconvergence at mu={mu!r}: {exc}"
            break
        err = float(np.max(np.abs(sol.values - u_ref)))
        errors.append(err)
        table.append({"mu": mu, "error": err, "iterations": sol.iterations})
    summary = {"beta_hat": beta_hat, "seminorm": seminorm, "grid_n": n,
               "ref_factor": study.ref_factor}
    if aborted:
        summary["aborted"] = aborted
        passed = False
        slope = None
    else:
        slope, intercept, r2 = fit_rate(list(zip(study.mu_schedule, errors)))
        monotone = all(
            errors[k + 1] <= errors[k] + 1e-12 for k in range(len(errors) - 1)
        )
        summary.update({
            "slope": slope,
            "intercept": intercept,
            "r_squared": r2,
            "monotone": monotone,
            "target_slope": beta_hat / 2.0 - 0.1,
        })
        passed = slope >= beta_hat / 2.0 - 0.1
    report = Report("vv-rate", _rate_config(study), table, summary, bool(passed))
    report.runtime_seconds = time.perf_counter() - t0
    return report


def _rate_config(study):
    return {
        "mu_schedule": list(study.mu_schedule),
        "grid_n": study.grid_n,
        "ref_factor": study.ref_factor,
    }


# ---------------------------------------------------------------------------
# perturbation families
# ---------------------------------------------------------------------------

def _wrap_grid(entries, fn):
    return [[fn(e) for e in row] for row in entries]


def perturb_f(op: OperatorSpec, s: float):
    """f -> f + s on every control (constant data shift)."""
    cc = op.coefficients
    new = ControlledCoefficients(
        sigma=cc.sigma,
        b=cc.b,
        c=cc.c,
        f=_wrap_grid(cc.f, lambda f: FuncField(lambda x, _f=f: _f(x) + s)),
        dim=cc.dim,
        alpha=cc.alpha,
        lam=cc.lam,
    )
    return OperatorSpec(op.variant, new)


def perturb_sigma(op: OperatorSpec, s: float):
    """sigma -> sigma + s*I on every control."""
    cc = op.coefficients

    def bump(m: MatrixField):
        if m.scale is not None:
            sc = m.scale
            return MatrixField(scale=FuncField(lambda x, _s=sc: _s(x) + s), dim=cc.dim)
        entries = [
            [
                (FuncField(lambda x, _e=e: _e(x) + s) if i == j else e)
                for j, e in enumerate(row)
            ]
            for i, row in enumerate(m.entries)
        ]
        return MatrixField(entries=entries)

    new = ControlledCoefficients(
        sigma=_wrap_grid(cc.sigma, bump), b=cc.b, c=cc.c, f=cc.f,
        dim=cc.dim, alpha=cc.alpha, lam=cc.lam,
    )
    return OperatorSpec(op.variant, new)


def perturb_gamma(bc: ControlledReflection, s: float, domain: Interval):
    """gamma -> gamma + s*n(x) on every control of a controlled reflection.

    The shift is along the outward normal, so gamma.n grows by s and the
    monotonicity margin is preserved; |gamma1 - gamma2| = s on the wall.
    """
    if not isinstance(bc, ControlledReflection):
        raise TypeError("gamma perturbation targets controlled reflection specs")
    width = domain.b - domain.a
    n_aff = Affine(-(domain.b + domain.a) / width, [2.0 / width])
    gam = [
        [
            VectorField([
                FuncField(lambda x, _g=v.components[0]: _g(x) + s * n_aff(x))
            ])
            for v in row
        ]
        for row in bc.gamma
    ]
    return ControlledReflection(gamma=gam, g=bc.g, nu=bc.nu + s, lip=bc.lip)


FAMILIES = ("f-shift", "sigma-shift", "gamma-shift")


def perturbed_problem(problem: Problem, family: str, s: float):
    if family == "f-shift":
        return Problem(problem.dfield, perturb_f(problem.operator, s),
                       problem.boundary, problem.weak_boundary)
    if family == "sigma-shift":
        return Problem(problem.dfield, perturb_sigma(problem.operator, s),
                       problem.boundary, problem.weak_boundary)
    if family == "gamma-shift":
        return Problem(problem.dfield, problem.operator,
                       perturb_gamma(problem.boundary, s, problem.domain),
                       problem.weak_boundary)
    raise ValueError(f"unknown family {family!r}; pick one of {FAMILIES}")


@dataclass
class ContDepStudy:
    problem: Problem
    family: str
    magnitudes: tuple
    grid_n: int = 256
    alpha: float = None
    declared_C: float = None
    envelope_factor: float = 10.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        mags = tuple(float(s) for s in self.magnitudes)
        if any(s < 0 for s in mags):
            raise ValueError("magnitudes must be nonnegative")
        self.magnitudes = mags


def run_cont_dep(study: ContDepStudy, params=None):
    """Continuous-dependence envelope study.

    Pass criteria: ratios bounded (max <= envelope_factor * median over the
    schedule) and, when declared_C is set, max ratio <= declared_C.
    """
    params = params or SolveParams()
    t0 = time.perf_counter()
    prob = study.problem
    n = study.grid_n
    base_sol = solve(prob.discretize(n), params)
    beta_hat, _ = holder_estimate(base_sol)
    alpha = prob.operator.coefficients.alpha if study.alpha is None else study.alpha
    abar = min(alpha, beta_hat)
    fine = Grid(prob.domain, 4 * n).nodes
    bpts = _boundary_points(prob)
    lam1 = prob.operator.declared_lambda(fine)
    table = []
    ratios = []
    aborted = None
    for s in study.magnitudes:
        pert = perturbed_problem(prob, study.family, s)
        d1, d2 = coefficient_distance(prob.operator, pert.operator, fine)
        m1, m2, _ = boundary_distance(prob.boundary, pert.boundary, prob.dfield, bpts)
        try:
            sol2 = solve(pert.discretize(n), params)
        except NonconvergenceError as exc:
            aborted = f"nonconvergence at magnitude {s!r}: {exc}"
            break
        sup_diff = float(np.max(np.abs(base_sol.values - sol2.values)))
        lam = max(lam1, pert.operator.declared_lambda(fine))
        nu = float(np.sqrt(prob.boundary.nu * pert.boundary.nu))
        denom = d1 + d2**abar + m1 / nu + (m2 / nu) ** abar
        ratio = 0.0 if denom == 0.0 else lam * sup_diff / denom
        ratios.append(ratio)
        table.append({
            "magnitude": s, "delta1": d1, "delta2": d2,
            "mu1": m1, "mu2": m2, "sup_diff": sup_diff, "ratio": ratio,
        })
    summary = {"beta_hat": beta_hat, "alpha_bar": abar, "family": study.family,
               "grid_n": n}
    if aborted:
        summary["aborted"] = aborted
        passed = False
    else:
        finite = [r for r in ratios if r > 0]
        max_r = max(ratios) if ratios else 0.0
        med_r = float(np.median(finite)) if finite else 0.0
        bounded = max_r <= study.envelope_factor * med_r if finite else True
        summary.update({"max_ratio": max_r, "median_ratio": med_r,
                        "bounded": bounded})
        passed = bounded
        if study.declared_C is not None:
            summary["declared_C"] = study.declared_C
            passed = passed and max_r <= study.declared_C
    report = Report("cont-dep", {
        "family": study.family,
        "magnitudes": list(study.magnitudes),
        "grid_n": study.grid_n,
    }, table, summary, bool(passed))
    report.runtime_seconds = time.perf_counter() - t0
    return report


def _boundary_points(problem: Problem):
    dom = problem.domain
    if isinstance(dom, Interval):
        return np.array([[dom.a], [dom.b]])
    n1 = 64
    x1 = dom.period * np.arange(n1) / n1
    top = np.column_stack([x1, np.full(n1, dom.height)])
    bot = np.column_stack([x1, np.zeros(n1)])
    return np.vstack([bot, top])
