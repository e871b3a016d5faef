"""Built-in acceptance checks shared by ``thermogeo verify`` and the test suite.

Every check is deterministic (fixed seeds) and returns a :class:`CheckResult`
whose ``detail`` string contains only reproducible numbers.
"""
from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson

from . import analytic, axisym, embedding, frames, geometry, linearized, stress_free
from .errors import NotEmbeddable
from .fields import Chart, MetricField, ScalarField, VectorField
from .thermal_metric import ExpansionLaw

SEED = 20240611


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.detail}"


def _fmt(x: float) -> str:
    return f"{x:.3e}"


# 1 -------------------------------------------------------------------------
def check_flat_metric_zero() -> CheckResult:
    worst_analytic = 0.0
    for chart in (Chart.box([(-1, 1)] * 2, 9), Chart.box([(-1, 1)] * 3, 9)):
        b = geometry.metric_curvature(MetricField.identity(chart))
        worst_analytic = max(worst_analytic, *(b.sup_norms[k] for k in ("riemann", "ricci", "scalar",
                                                                         "torsion")))
    worst_grid = 0.0
    for chart in (Chart.box([(-1, 1)] * 2, 64), Chart.box([(0, 1)] * 3, 32)):
        d = chart.dimension
        G = MetricField.from_samples(chart, np.broadcast_to(np.eye(d), chart.grid_shape + (d, d)))
        b = geometry.metric_curvature(G)
        worst_grid = max(worst_grid, *(b.sup_norms[k] for k in ("riemann", "ricci", "scalar")))
    ok = worst_analytic == 0.0 and worst_grid < 1e-10
    return CheckResult(1, "flat metric has zero curvature", ok,
                       f"analytic {_fmt(worst_analytic)}, grid {_fmt(worst_grid)}")


# 2 -------------------------------------------------------------------------
def _grid_scalar_error(omega: ScalarField, n: int) -> float:
    chart = Chart.box(omega.chart.bounds, n)
    om = ScalarField(chart, omega.func, omega.grad, omega.hess)
    sampled = ScalarField.from_samples(chart, om.values)
    G = MetricField.conformal_to(MetricField.identity(chart), sampled)
    b = geometry.metric_curvature(G)
    exact = geometry.conformal_scalar_2d(om).values
    sl = chart.interior(b.band)
    return float(np.max(np.abs(b.scalar[sl] - exact[sl])))


def check_conformal_2d(fields: int = 10) -> CheckResult:
    rng = np.random.default_rng(SEED)
    chart = Chart.box([(-1, 1)] * 2, 17)
    worst_rel, worst_order = 0.0, np.inf
    for _ in range(fields):
        om = analytic.random_fourier_field(chart, rng)
        G = MetricField.conformal_to(MetricField.identity(chart), om)
        s = geometry.metric_curvature(G).scalar
        ref = geometry.conformal_scalar_2d(om).values
        worst_rel = max(worst_rel, float(np.max(np.abs(s - ref)) / np.max(np.abs(ref))))
        e1, e2 = _grid_scalar_error(om, 41), _grid_scalar_error(om, 81)
        worst_order = min(worst_order, float(np.log2(e1 / e2)))
    ok = worst_rel < 1e-6 and worst_order > 3.5
    return CheckResult(2, "2D conformal scalar curvature", ok,
                       f"analytic rel {_fmt(worst_rel)}, grid order {worst_order:.2f}")


# 3 -------------------------------------------------------------------------
def check_radial_family() -> CheckResult:
    chart = Chart.box([(0.5, 2.0), (0.0, 2 * np.pi)], (17, 17), "polar")
    ok, worst = True, 0.0
    verdicts = []
    for beta in (-1.5, -0.5, 0.5, 1.0):
        fam = stress_free.RadialStressFreeFamily(1.0, beta, 0.5, 2.0)
        rep = stress_free.check_stress_free_2d(fam.omega_field(chart))
        cone = stress_free.cone_from_beta(beta)
        expected = 2 * np.pi * (1 - 1 / abs(1.0 / (beta + 1.0)))
        worst = max(worst, abs(cone.deficit_angle - expected))
        ok &= rep.passes
        verdicts.append(rep.verdict)
    ok &= worst < 1e-12
    return CheckResult(3, "radial stress-free family", bool(ok),
                       f"verdicts {','.join(verdicts)}; deficit error {_fmt(worst)}")


# 4 -------------------------------------------------------------------------
def check_closed_form_3d() -> CheckResult:
    chart = Chart.box([(0.5, 1.5)] * 3, 9)
    om = stress_free.closed_form_3d(1.0, None, chart)
    rep = stress_free.check_stress_free_3d(om)
    eqs = max(rep.residual_norms[f"eq{k}"] for k in range(1, 7))
    pert = analytic.add_fields(om, analytic.quadratic_form_field(
        chart, [[0, 0.01, 0], [0.01, 0, 0], [0, 0, 0]]))
    rp = stress_free.check_stress_free_3d(pert)
    perturbed = min(rp.residual_norms["ricci"],
                    max(rp.residual_norms[f"eq{k}"] for k in range(1, 7)))
    ok = rep.residual_norms["ricci"] < 1e-8 and eqs < 1e-8 and perturbed > 1e-4
    return CheckResult(4, "3D closed-form stress-free profile", ok,
                       f"ricci {_fmt(rep.residual_norms['ricci'])}, system {_fmt(eqs)}, "
                       f"perturbed {_fmt(perturbed)}")


# 5 -------------------------------------------------------------------------
def check_inverse_alpha() -> CheckResult:
    chart = Chart.box([(1.0, 2.0), (0.0, 1.0)], (17, 5), "polar")
    worst = 0.0
    for name, T, dT, d2T, al, dal in stress_free.closed_form_alpha_pairs(300.0, 400.0, 1.0, 2.0,
                                                                         1e-3):
        law = ExpansionLaw.from_alpha(al, 300.0, dal)
        Tf = analytic.radial_field(chart, T, dT, d2T)
        worst = max(worst, stress_free.zero_stress_residual(Tf, law).sup_norm())
    return CheckResult(5, "inverse-alpha closed forms", worst < 1e-8, f"residual {_fmt(worst)}")


# 6 -------------------------------------------------------------------------
def check_embedding() -> CheckResult:
    beta = -0.5
    om = lambda r: beta * np.log(r)  # noqa: E731
    omp = lambda r: beta / np.asarray(r, dtype=float)  # noqa: E731
    prof = embedding.embed_radial(om, omp, 1.0, 2.0, 10_000)
    err = embedding.induced_metric_error(prof, om)
    slope = float(np.max(np.abs(prof.slope - np.sqrt(3.0))))
    try:
        embedding.embed_radial(lambda r: np.log(r), lambda r: 1 / np.asarray(r), 1.0, 2.0, 100)
        raised = False
    except NotEmbeddable:
        raised = True
    ok = err < 1e-6 and slope < 1e-9 and raised
    return CheckResult(6, "embedding isometry", ok,
                       f"metric {_fmt(err)}, slope {_fmt(slope)}, beta=1 rejected {raised}")


# 7 -------------------------------------------------------------------------
def check_ap_connection() -> CheckResult:
    chart = Chart.box([(-1, 1)] * 3, 7)
    theta = analytic.shifted(analytic.polynomial_radial(chart, 0.1, 2.0), 1.0)
    G = MetricField.conformal_to(MetricField.identity(chart),
                                 theta.map(np.log, lambda t: 1 / t, lambda t: -1 / t ** 2))
    riem, tors = 0.0, np.inf
    for form in ("expansion", "orthonormal"):
        b = geometry.curvature(frames.thermal_ap_connection(theta, form), G)
        riem = max(riem, b.sup_norms["riemann"])
        tors = min(tors, b.sup_norms["torsion"])
    lc = geometry.levi_civita(G)
    coord = geometry.curvature(lc, G).sup_norms["torsion"]
    fr = frames.orthonormal_frame(G)
    nc = frames.noncoordinate_torsion(frames.frame_connection(fr, lc),
                                      frames.commutation_coefficients(fr)).sup_norm()
    ok = riem < 1e-8 and tors > 1e-3 and coord < 1e-10 and nc < 1e-10
    return CheckResult(7, "AP connection flat with torsion", ok,
                       f"riemann {_fmt(riem)}, torsion {_fmt(tors)}, "
                       f"Levi-Civita torsion {_fmt(coord)}/{_fmt(nc)}")


# 8 -------------------------------------------------------------------------
def axisym_pressure_oracle(R, R1, r1, mu, alpha, T0, k, T_ref, panels=10 ** 6):
    """Independent ``p(R)`` for ``T = T0 + k ln R`` with constant ``alpha``.

    ``r**2`` is closed-form; ``p`` integrates the pressure equation with
    composite Simpson on ``panels`` uniform panels and is interpolated
    linearly onto ``R``.
    """
    s = 2 * alpha * k
    c = np.exp(2 * alpha * (T0 - T_ref))
    x = np.linspace(R1, R[-1], panels + 1)
    e = c * x ** s
    r2 = r1 ** 2 + 2 * c * (x ** (s + 2) - R1 ** (s + 2)) / (s + 2)
    omp = alpha * k / x
    f = (2 * mu * x * e / r2) * (2 * (1 + x * omp) - x ** 2 * e / r2 - r2 / (x ** 2 * e))
    p = cumulative_simpson(f, x=x, initial=0.0)
    return np.interp(R, x, p)


def check_axisym() -> CheckResult:
    mu, alpha = 1.0, 0.5
    law = ExpansionLaw.constant(alpha, 0.0)
    uni = axisym.AxisymProblem(1.0, 2.0, lambda R: np.ones_like(R), law, axisym.NeoHookean2D(mu))
    s = axisym.solve_axisym(uni)
    stress = max(float(np.max(np.abs(s.P_rR))), float(np.max(np.abs(s.P_thTh))))
    ratio = float(np.max(np.abs(s.r / s.R_samples - np.exp(alpha))))
    T0, k = 0.2, 0.3
    prob = axisym.AxisymProblem(1.0, 2.0, lambda R: T0 + k * np.log(R), law,
                                axisym.NeoHookean2D(mu), bc="paper_datum",
                                T_derivative=lambda R: k / R)
    sol = axisym.solve_axisym(prob)
    oracle = axisym_pressure_oracle(sol.R_samples, 1.0, sol.r1, mu, alpha, T0, k, 0.0)
    prel = float(np.max(np.abs(sol.p - oracle)) / np.max(np.abs(oracle)))
    eq = max(s.residual_equilibrium, sol.residual_equilibrium)
    J = max(s.incompressibility_error, sol.incompressibility_error)
    ok = stress < 1e-8 * mu and ratio < 1e-9 and prel < 1e-8 and eq < 1e-6 * mu / 1.0 and J < 1e-8
    return CheckResult(8, "axisymmetric annulus", ok,
                       f"uniform stress {_fmt(stress)}, r/R {_fmt(ratio)}, p rel {_fmt(prel)}, "
                       f"equilibrium {_fmt(eq)}, J {_fmt(J)}")


# 9 -------------------------------------------------------------------------
def random_vector_field(chart: Chart, rng: np.random.Generator) -> VectorField:
    comps = [analytic.random_fourier_field(chart, rng) for _ in range(chart.dimension)]
    return VectorField(chart,
                       lambda x: np.stack([c.func(x) for c in comps], -1),
                       lambda x: np.stack([c.grad(x) for c in comps], -2),
                       lambda x: np.stack([c.hess(x) for c in comps], -3))


def equivalence_residual(rng: np.random.Generator, chart: Chart) -> float:
    lam = float(rng.uniform(0.0, 3.0))
    mu = float(rng.uniform(0.2, 3.0))
    alpha = float(rng.uniform(1e-3, 1e-1))
    m = linearized.SVKModuli(lam, mu)
    u = random_vector_field(chart, rng)
    dT = analytic.random_fourier_field(chart, rng)
    geo = linearized.linearized_operator(linearized.svk_tensors(m),
                                         linearized.LinearizedLoad(linearized.beta_field(alpha, dT)),
                                         u).values
    nav = linearized.classical_navier_residual(m, alpha, dT, u).values
    return float(np.max(np.abs(geo - nav)) / max(np.max(np.abs(nav)), np.max(np.abs(geo)), 1e-300))


def check_linearization(draws: int = 50) -> CheckResult:
    rng = np.random.default_rng(SEED + 9)
    chart = Chart.box([(-1, 1)] * 3, 5)
    eq = max(equivalence_residual(rng, chart) for _ in range(draws))
    bc_err = 0.0
    for lam, mu in ((1.3, 0.7), (0.0, 1.0), (2.0, 0.5)):
        t = linearized.svk_tensors(linearized.SVKModuli(lam, mu))
        bc_err = max(bc_err, float(np.max(np.abs(t.b_contraction()
                                                 + (3 * lam + 2 * mu) / 2 * np.eye(3)))))
    m = linearized.SVKModuli(1.3, 0.7)
    svk = linearized.bc_condition_check(linearized.svk_energy(m)).residual
    nh = linearized.bc_condition_check(linearized.compressible_neo_hookean_energy(1.3, 0.7)).residual
    ok = eq < 1e-10 and bc_err < 1e-12 and svk < 1e-6 and nh < 1e-6
    return CheckResult(9, "linearization equivalence", ok,
                       f"operator rel {_fmt(eq)}, B contraction {_fmt(bc_err)}, "
                       f"B-C SVK {_fmt(svk)}, neo-Hookean {_fmt(nh)}")


# 10 ------------------------------------------------------------------------
def check_dgamma() -> CheckResult:
    rng = np.random.default_rng(SEED + 10)
    chart = Chart.box([(-1, 1)] * 3, 7)
    worst = 0.0
    for _ in range(3):
        beta = analytic.random_fourier_field(chart, rng)
        G = MetricField.conformal_to(MetricField.identity(chart),
                                     analytic.random_fourier_field(chart, rng))
        d = linearized.dgamma_trace_derivative(G, beta)
        worst = max(worst, float(np.max(np.abs(d.values - 1.5 * beta.gradient))))
    return CheckResult(10, "trace of connection derivative", worst < 1e-6, f"error {_fmt(worst)}")


# 11 ------------------------------------------------------------------------
DETERMINISM_SCENARIO = {
    "kind": "axisym",
    "parameters": {"R1": 1.0, "R2": 2.0, "mu": 1.0, "alpha": 0.5, "T0": 0.2, "k": 0.3,
                   "panels": 64},
    "output_dir": "out",
}


def check_cli_determinism() -> CheckResult:
    from .scenario import run, validate_scenario

    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        for i in range(2):
            sc = validate_scenario(DETERMINISM_SCENARIO)
            rep = run(sc, Path(tmp) / f"run{i}")
            outputs.append({Path(p).name: Path(p).read_bytes() for p in rep.artifact_paths})
    same = outputs[0] == outputs[1] and len(outputs[0]) > 0
    return CheckResult(11, "scenario output determinism", same,
                       f"{len(outputs[0])} artifacts byte-identical {same}")


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_flat_metric_zero, check_conformal_2d, check_radial_family, check_closed_form_3d,
    check_inverse_alpha, check_embedding, check_ap_connection, check_axisym,
    check_linearization, check_dgamma, check_cli_determinism,
)


def run_all() -> list[CheckResult]:
    results = []
    for i, check in enumerate(CHECKS, start=1):
        try:
            results.append(check())
        except Exception as exc:  # a crashing check is a failing check
            results.append(CheckResult(i, check.__name__, False, f"{type(exc).__name__}: {exc}"))
    return results
