import numpy as np
import pytest
from hypothesis import given, strategies as st

from thermogeo import analytic, stress_free
from thermogeo.errors import ChartMismatch, DegenerateFrame, DimensionMismatch, QuadratureFailure
from thermogeo.fields import Chart, MetricField, ScalarField
from thermogeo.quadrature import adaptive_simpson, cumulative_gauss_legendre, cumulative_simpson
from thermogeo.thermal_metric import (AnisotropicExpansion, ExpansionLaw, MassDensity,
                                      build_anisotropic_metric, build_material_metric,
                                      density_at_temperature, is_incompressible, jacobian,
                                      volume_form)

CHART3 = Chart.box([(-1, 1)] * 3, 5)


# --- quadrature -----------------------------------------------------------------

def test_adaptive_simpson_exact_and_smooth():
    assert adaptive_simpson(lambda t: t ** 3, 0.0, 2.0) == pytest.approx(4.0, abs=1e-13)
    assert adaptive_simpson(np.exp, 0.0, 1.0) == pytest.approx(np.e - 1, abs=1e-10)


def test_adaptive_simpson_budget_and_nan():
    with pytest.raises(QuadratureFailure):
        adaptive_simpson(lambda t: np.sin(1 / t) / t, 1e-9, 1.0, max_intervals=64)
    with pytest.raises(QuadratureFailure):
        adaptive_simpson(lambda t: np.nan, 0.0, 1.0)


def test_cumulative_integrals():
    xs = np.array([0.5, 0.0, 1.0])
    np.testing.assert_allclose(cumulative_simpson(np.cos, 0.0, xs), np.sin(xs), atol=1e-10)
    R = np.linspace(1.0, 2.0, 11)
    np.testing.assert_allclose(cumulative_gauss_legendre(lambda r: r ** 7, R),
                               (R ** 8 - 1) / 8, rtol=1e-13)


# --- expansion laws ---------------------------------------------------------------

def test_constant_law():
    law = ExpansionLaw.constant(2e-3, 300.0)
    assert law.omega(np.array(300.0)) == 0.0
    assert law.omega(np.array(310.0)) == pytest.approx(2e-2)


@given(st.floats(-2.0, 2.0), st.floats(0.1, 3.0))
def test_law_alpha_omega_consistency(a, b):
    alpha = lambda T: a + b * T ** 2  # noqa: E731
    law = ExpansionLaw.from_alpha(alpha, 0.0)
    Ts = np.linspace(-1.0, 1.0, 7)
    assert law.consistency_residual(Ts) < 1e-8
    np.testing.assert_allclose(law.omega(Ts), a * Ts + b * Ts ** 3 / 3, atol=1e-10)


def test_law_from_omega_normalized():
    law = ExpansionLaw.from_omega(lambda T: np.sin(T) + 4.0, T0=0.5)
    assert law.omega(np.array(0.5)) == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(law.alpha(np.array([0.1, 0.7])), np.cos([0.1, 0.7]), atol=1e-8)


# --- material metric ---------------------------------------------------------------

def test_reference_temperature_gives_H():
    chart = Chart.box([(0.5, 2.0), (0, 1)], 5, "polar")
    H = chart.flat_metric()
    G = build_material_metric(H, ScalarField.constant(chart, 300.0), ExpansionLaw.constant(1e-3, 300.0))
    np.testing.assert_array_equal(G.values, H.values)


def test_log_temperature_gives_radial_family():
    beta, alpha, R0 = -0.4, 0.02, 0.5
    fam = stress_free.RadialStressFreeFamily(R0 ** (-2 * beta), beta, R0, 2.0)
    chart = Chart.box([(R0, 2.0), (0.0, 1.0)], 9, "polar")
    T = stress_free.radial_family_to_temperature(fam, alpha, 10.0, chart)
    G = build_material_metric(MetricField.identity(chart), T, ExpansionLaw.constant(alpha, 10.0))
    R = chart.points[..., 0]
    np.testing.assert_allclose(G.values[..., 0, 0], fam.gamma * R ** (2 * beta), rtol=1e-13)


@given(st.integers(0, 10 ** 6))
def test_determinant_identity(seed):
    rng = np.random.default_rng(seed)
    T = ScalarField.from_samples(CHART3, rng.uniform(-1, 1, CHART3.grid_shape))
    law = ExpansionLaw.from_omega(lambda t: 0.3 * t + 0.1 * t ** 2, 0.0,
                                  lambda t: 0.3 + 0.2 * t)
    G = build_material_metric(MetricField.identity(CHART3), T, law)
    np.testing.assert_allclose(G.determinant, np.exp(6 * law.omega(T.values)), rtol=1e-12)


def test_material_metric_chart_mismatch():
    with pytest.raises(ChartMismatch):
        build_material_metric(MetricField.identity(CHART3),
                              ScalarField.constant(Chart.box([(0, 1)] * 3, 5), 0.0),
                              ExpansionLaw.constant(1.0))


def test_material_metric_commutes_with_restriction():
    chart = Chart.box([(-1, 1)] * 2, 9)
    T = analytic.random_fourier_field(chart, np.random.default_rng(1))
    law = ExpansionLaw.constant(0.1)
    G = build_material_metric(MetricField.identity(chart), T, law)
    sub = chart.restrict(slice(2, 7), slice(0, 9, 2))
    Ts = ScalarField(sub, T.func, T.grad, T.hess)
    Gs = build_material_metric(MetricField.identity(sub), Ts, law)
    np.testing.assert_allclose(Gs.values, G.values[2:7, 0:9:2], rtol=1e-14)


# --- anisotropic expansion ------------------------------------------------------------

def test_anisotropic_isotropy_limit():
    T = analytic.random_fourier_field(CHART3, np.random.default_rng(2))
    law = ExpansionLaw.constant(0.2)
    G1 = build_anisotropic_metric(AnisotropicExpansion(np.eye(3), [law] * 3), T)
    G2 = build_material_metric(MetricField.identity(CHART3), T, law)
    np.testing.assert_allclose(G1.values, G2.values, rtol=1e-13)


def test_anisotropic_single_direction():
    T = ScalarField.constant(CHART3, 1.0)
    laws = [ExpansionLaw.constant(0.3), ExpansionLaw.constant(0.0), ExpansionLaw.constant(0.0)]
    G = build_anisotropic_metric(AnisotropicExpansion(np.eye(3), laws), T)
    np.testing.assert_allclose(G.values[0, 0, 0], np.diag([np.exp(0.6), 1, 1]), rtol=1e-14)


@given(st.floats(0.0, 2 * np.pi), st.permutations([0, 1, 2]))
def test_anisotropic_spectrum_rotation_and_relabeling(angle, perm):
    c, s = np.cos(angle), np.sin(angle)
    A = np.array([[c, s, 0], [-s, c, 0], [0, 0, 1.0]])
    T = ScalarField.constant(CHART3, 1.0)
    laws = [ExpansionLaw.constant(a) for a in (0.1, -0.2, 0.35)]
    G = build_anisotropic_metric(AnisotropicExpansion(A, laws), T)
    ev = np.sort(np.linalg.eigvalsh(G.values[1, 2, 3]))
    np.testing.assert_allclose(ev, np.sort(np.exp([0.2, -0.4, 0.7])), rtol=1e-12)
    Gp = build_anisotropic_metric(AnisotropicExpansion(A[list(perm)], [laws[i] for i in perm]), T)
    np.testing.assert_allclose(Gp.values, G.values, rtol=1e-13)


def test_anisotropic_errors():
    T = ScalarField.constant(CHART3, 1.0)
    law = ExpansionLaw.constant(0.1)
    with pytest.raises(DegenerateFrame):
        build_anisotropic_metric(AnisotropicExpansion(np.array([[1, 0, 0], [2, 0, 0], [0, 0, 1.0]]),
                                                      [law] * 3), T)
    with pytest.raises(DimensionMismatch):
        build_anisotropic_metric(AnisotropicExpansion(np.eye(3), [law] * 2), T)


# --- volume, mass and incompressibility --------------------------------------------------

def test_volume_form_examples():
    assert np.all(volume_form(MetricField.identity(CHART3)).values == 1.0)
    om = analytic.random_fourier_field(CHART3, np.random.default_rng(3))
    G = MetricField.conformal_to(MetricField.identity(CHART3), om)
    np.testing.assert_allclose(volume_form(G).values, np.exp(3 * om.values), rtol=1e-13)
    polar = Chart.box([(0.5, 2.0), (0, 1)], 5, "polar")
    om2 = analytic.log_radial(polar, 0.3)
    G2 = MetricField.conformal_to(polar.flat_metric(), om2)
    R = polar.points[..., 0]
    np.testing.assert_allclose(volume_form(G2).values, R * np.exp(2 * om2.values), rtol=1e-13)


def test_density_examples():
    law = ExpansionLaw.constant(1e-3)
    assert density_at_temperature(3, law, 5.0, 5.0) == 1.0
    assert density_at_temperature(3, law, 0.0, 50.0) == pytest.approx(np.exp(-0.15), rel=1e-12)
    # piecewise-linear alpha against the closed-form omega difference
    alpha = lambda t: np.where(t < 1.0, 0.1 * t, 0.1 + 0.3 * (t - 1.0))  # noqa: E731
    omega = lambda t: np.where(t < 1.0, 0.05 * t ** 2, 0.05 + 0.1 * (t - 1) + 0.15 * (t - 1) ** 2)  # noqa: E731
    pw = ExpansionLaw.from_omega(omega, 0.0, alpha)
    f = density_at_temperature(MassDensity(ScalarField.constant(CHART3, 1.0)), pw, 0.2, 2.5)
    assert f == pytest.approx(np.exp(3 * (omega(0.2) - omega(2.5))), rel=1e-9)


def test_mass_form_is_temperature_independent():
    law = ExpansionLaw.from_alpha(lambda t: 1e-3 * (1 + 0.01 * t), 0.0)
    T0, T1 = 0.0, 80.0
    G0 = build_material_metric(MetricField.identity(CHART3), ScalarField.constant(CHART3, T0), law)
    G1 = build_material_metric(MetricField.identity(CHART3), ScalarField.constant(CHART3, T1), law)
    ratio = density_at_temperature(3, law, T0, T1) * volume_form(G1).values / volume_form(G0).values
    np.testing.assert_allclose(ratio, 1.0, atol=1e-12)


def test_mass_density_must_be_positive():
    with pytest.raises(ValueError):
        MassDensity(ScalarField.constant(CHART3, -1.0))


def test_jacobian_examples():
    G = MetricField.identity(CHART3)
    assert is_incompressible(jacobian(np.eye(3), G, G))
    # axisymmetric map r(R) = sqrt(R**2 + 1), F = diag(r', 1) on polar charts
    R = np.linspace(1, 2, 7)
    r, rp = np.sqrt(R ** 2 + 1), R / np.sqrt(R ** 2 + 1)
    F = np.zeros((7, 2, 2))
    F[:, 0, 0], F[:, 1, 1] = rp, 1.0
    om = 0.1
    Gv = np.zeros((7, 2, 2))
    Gv[:, 0, 0], Gv[:, 1, 1] = np.exp(2 * om), np.exp(2 * om) * R ** 2
    gv = np.zeros((7, 2, 2))
    gv[:, 0, 0], gv[:, 1, 1] = 1.0, r ** 2
    np.testing.assert_allclose(jacobian(F, Gv, gv), r * rp / (R * np.exp(2 * om)), rtol=1e-14)


@given(st.integers(0, 10 ** 6))
def test_jacobian_cholesky_identity(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3))
    G = A @ A.T + 3 * np.eye(3)
    F = np.linalg.cholesky(G).T  # F^T F = G
    assert abs(jacobian(F, G, np.eye(3)) - 1.0) < 1e-12
