"""Zero-stress temperature distributions in two and three dimensions.

A temperature field is stress-free when the material metric
``exp(2 Omega) delta`` it induces is flat.  In 2D that means ``Omega`` is
harmonic; in 3D it forces the six-equation nonlinear system whose only
non-trivial solutions are ``Omega = -ln(c0 |X - b|**2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .analytic import radial_field
from .errors import DegenerateCone, DimensionMismatch, NonMonotoneTemperature, OriginInDomain
from .fields import Chart, ScalarField
from .geometry import FLATNESS_TOL, SampledTensor, conformal_ricci, flat_laplacian
from .thermal_metric import ExpansionLaw, TemperatureField

# Grid mode: residual threshold is FLATNESS_TOL + GRID_FLATNESS_C * (h / diameter)**4.
GRID_FLATNESS_C = 1e3
INVERSION_SAMPLES = 512


@dataclass
class FlatnessReport:
    residual_norms: dict[str, float]
    verdict: str
    notes: str = ""
    tolerance: float = FLATNESS_TOL
    beta: float | None = None

    @property
    def passes(self) -> bool:
        return self.verdict != "not_flat"


@dataclass(frozen=True)
class RadialStressFreeFamily:
    """``exp(2 Omega) = gamma R**(2 beta)`` on ``R0 <= R <= R1``."""

    gamma: float
    beta: float
    R0: float
    R1: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not 0 < self.R0 < self.R1:
            raise ValueError("need 0 < R0 < R1")

    def omega_field(self, chart: Chart) -> ScalarField:
        b, s = self.beta, 0.5 * np.log(self.gamma)
        return radial_field(chart, lambda r: b * np.log(r) + s, lambda r: b / r,
                            lambda r: -b / r ** 2)


@dataclass(frozen=True)
class ConeDescriptor:
    c: float
    deficit_angle: float
    embeddable_in_R3: bool


def flatness_tolerance(omega_field: ScalarField) -> float:
    """Scale-free residual threshold: fixed in analytic mode, ``~h**4`` on grids."""
    if omega_field.hess is not None and omega_field.grad is not None:
        return FLATNESS_TOL
    chart = omega_field.chart
    h = max(s for s in chart.spacing if np.isfinite(s))
    return FLATNESS_TOL + GRID_FLATNESS_C * (h / chart.diameter) ** 4


def _radial_profile(omega_field: ScalarField, band: int) -> tuple[bool, bool]:
    """(is_radial, is_constant) for a field on a polar chart."""
    chart = omega_field.chart
    sl = chart.interior(band)
    grad = omega_field.gradient[sl]
    scale = max(1.0, float(np.max(np.abs(omega_field.values))))
    radial = bool(np.max(np.abs(grad[..., 1:])) <= 1e-9 * scale)
    constant = bool(np.max(np.abs(grad)) <= 1e-12 * scale)
    return radial, constant


def check_stress_free_2d(omega_field: ScalarField, tol: float | None = None) -> FlatnessReport:
    """Classify ``exp(2 Omega) delta`` in 2D by the harmonicity of ``Omega``.

    The residual is ``sup |lap Omega| * diameter**2`` over interior samples.
    Locally flat, non-constant radial profiles on polar charts with a
    non-zero cone deficit are reported as ``flat_local_only``; the notes say
    whether the chart is a full annulus (obstructed) or a sector (fine).
    """
    chart = omega_field.chart
    if chart.dimension != 2:
        raise DimensionMismatch("check_stress_free_2d needs a two-dimensional chart")
    lap = flat_laplacian(omega_field)
    residual = lap.sup_norm() * chart.diameter ** 2
    tol = flatness_tolerance(omega_field) if tol is None else float(tol)
    norms = {"laplacian": residual}
    if not residual < tol:
        return FlatnessReport(norms, "not_flat",
                              f"sup|lap Omega| * diam^2 = {residual:.6e} exceeds {tol:.3e}", tol)
    if chart.coordinate_kind != "polar":
        return FlatnessReport(norms, "flat", "harmonic log-scale factor", tol)
    radial, constant = _radial_profile(omega_field, lap.band)
    if constant or not radial:
        return FlatnessReport(norms, "flat", "harmonic log-scale factor", tol)
    sl = chart.interior(omega_field.gradient_band)
    R = chart.points[sl][..., 0]
    beta = float(np.median(R * omega_field.gradient[sl][..., 0]))
    if abs(beta) < 1e-12 or abs(beta + 2) < 1e-12:
        return FlatnessReport(norms, "flat", "radial profile with zero cone deficit", tol, beta)
    cone = cone_from_beta(beta) if abs(beta + 1) > 1e-12 else None
    if chart.multiply_connected:
        deficit = "degenerate cone" if cone is None else f"deficit angle {cone.deficit_angle:.12e}"
        notes = ("locally flat; full annulus is globally obstructed "
                 f"(cone with {deficit}), so stresses arise")
    else:
        notes = "locally flat; simply-connected sector is globally stress-free"
    return FlatnessReport(norms, "flat_local_only", notes, tol, beta)


def radial_family_to_temperature(family: RadialStressFreeFamily, alpha0: float, T0: float,
                                 chart: Chart | None = None) -> TemperatureField:
    """Temperature ``T0 + (beta / alpha0) ln(R / R0)`` realizing the family.

    With a constant expansion coefficient ``alpha0`` the induced log-scale
    factor is ``beta ln(R / R0)``, i.e. the family member with
    ``gamma = R0**(-2 beta)``.
    """
    if not alpha0 > 0:
        raise ValueError("alpha0 must be positive")
    if chart is None:
        chart = Chart.box([(family.R0, family.R1), (0.0, 2 * np.pi)], (65, 65), "polar")
    k, R0 = family.beta / alpha0, family.R0
    base = radial_field(chart, lambda r: T0 + k * np.log(r / R0), lambda r: k / r,
                        lambda r: -k / r ** 2)
    return TemperatureField.wrap(base, label=f"log profile beta={family.beta}")


def cone_from_beta(beta: float) -> ConeDescriptor:
    """Cone ``c = 1/(beta + 1)`` with deficit ``2 pi (1 - 1/|c|)``."""
    if beta == -1:
        raise DegenerateCone("beta = -1 gives c = infinity (cylinder-like degeneration)")
    c = 1.0 / (beta + 1.0)
    deficit = 2 * np.pi * (1.0 - abs(beta + 1.0))
    return ConeDescriptor(c, deficit, bool(-2 < beta < 0))


@dataclass
class InverseAlpha:
    """Expansion coefficient required for a radial profile to be stress-free."""

    T_profile: Callable
    T_derivative: Callable
    beta: float
    R0: float
    R1: float
    T_second: Callable | None = None
    _interp: PchipInterpolator = field(init=False, repr=False)

    def __post_init__(self):
        R = np.linspace(self.R0, self.R1, INVERSION_SAMPLES)
        dT = np.asarray(self.T_derivative(R), dtype=float)
        if not (np.all(dT > 0) or np.all(dT < 0)):
            bad = R[np.argmin(np.abs(dT))]
            raise NonMonotoneTemperature(f"T'(R) vanishes or changes sign near R = {bad:.6g}")
        T = np.asarray(self.T_profile(R), dtype=float)
        order = np.argsort(T)
        self._interp = PchipInterpolator(T[order], R[order])
        self.T_range = (float(T.min()), float(T.max()))

    def alpha_of_R(self, R):
        R = np.asarray(R, dtype=float)
        return self.beta / (R * self.T_derivative(R))

    def dalpha_dR(self, R):
        R = np.asarray(R, dtype=float)
        d1 = self.T_derivative(R)
        if self.T_second is not None:
            d2 = self.T_second(R)
        else:
            h = 1e-4 * R
            d2 = (self.T_derivative(R + h) - self.T_derivative(R - h)) / (2 * h)
        return -self.beta * (d1 + R * d2) / (R * d1) ** 2

    def radius_of_T(self, T) -> np.ndarray:
        """Invert the monotone profile: monotone cubic start, Newton polish."""
        T = np.asarray(T, dtype=float)
        R = np.clip(self._interp(np.clip(T, *self.T_range)), self.R0, self.R1)
        for _ in range(8):
            step = (self.T_profile(R) - T) / self.T_derivative(R)
            R = np.clip(R - step, self.R0, self.R1)
            if np.all(np.abs(step) <= 1e-15 * np.abs(R)):
                break
        return R

    def alpha_of_T(self, T):
        return self.alpha_of_R(self.radius_of_T(T))

    def dalpha_dT(self, T):
        R = self.radius_of_T(T)
        return self.dalpha_dR(R) / self.T_derivative(R)

    def expansion_law(self, T0: float | None = None) -> ExpansionLaw:
        """Law ``alpha(T)`` normalized at ``T0`` (default ``T(R0)``)."""
        T0 = float(self.T_profile(np.array(self.R0))) if T0 is None else T0
        return ExpansionLaw.from_alpha(self.alpha_of_T, T0, self.dalpha_dT)


def inverse_alpha_radial(T_profile: Callable, T_derivative: Callable, beta: float,
                         R0: float, R1: float, T_second: Callable | None = None) -> InverseAlpha:
    """``alpha = beta / (R T'(R))``, as a function of ``R`` and of ``T``.

    Raises
    ------
    NonMonotoneTemperature
        If ``T'`` vanishes or changes sign on ``[R0, R1]``.
    """
    return InverseAlpha(T_profile, T_derivative, float(beta), float(R0), float(R1), T_second)


def closed_form_alpha_pairs(T0: float, T1: float, R0: float, R1: float, alpha0: float):
    """The three radial temperature profiles with known stress-free ``alpha``.

    Returns a list of ``(name, T, T', T'', alpha(T), alpha'(T))`` tuples of
    vectorized callables; ``T(R0) = T0`` and ``T(R1) = T1`` in each case.
    """
    L = np.log(R1 / R0)
    b1 = (T1 - T0) / (R1 - R0)
    a1 = (T0 * R1 - T1 * R0) / (R1 - R0)
    K2 = R0 * R1 * (T0 - T1) / (R1 - R0)
    a2 = (T1 * R1 - T0 * R0) / (R1 - R0)
    k3 = (T1 - T0) / L
    a3 = (T0 * np.log(R1) - T1 * np.log(R0)) / L
    return [
        ("linear", lambda r: a1 + b1 * r, lambda r: b1 + 0 * r, lambda r: 0 * r,
         lambda t: alpha0 * R0 * b1 / (t - a1), lambda t: -alpha0 * R0 * b1 / (t - a1) ** 2),
        ("reciprocal", lambda r: a2 + K2 / r, lambda r: -K2 / r ** 2, lambda r: 2 * K2 / r ** 3,
         lambda t: alpha0 * K2 / (R0 * (t - a2)), lambda t: -alpha0 * K2 / (R0 * (t - a2) ** 2)),
        ("logarithmic", lambda r: a3 + k3 * np.log(r), lambda r: k3 / r, lambda r: -k3 / r ** 2,
         lambda t: alpha0 + 0 * t, lambda t: 0 * t),
    ]


def zero_stress_residual(T: ScalarField, law: ExpansionLaw) -> ScalarField:
    """``alpha'(T) |grad T|**2 + alpha(T) lap T``, i.e. ``lap Omega`` by the chain rule."""
    chart = T.chart
    ginv = chart.flat_metric().inverse
    lap = flat_laplacian(T)
    t = T.values
    grad2 = np.einsum("...i,...ij,...j->...", T.gradient, ginv, T.gradient)
    vals = law.dalpha(t) * grad2 + law.alpha(t) * lap.values
    return ScalarField.from_samples(chart, vals, band=lap.band)


def _require_cartesian_3d(chart: Chart):
    if chart.dimension != 3:
        raise DimensionMismatch("the flatness system is three-dimensional")
    if chart.coordinate_kind != "cartesian":
        raise DimensionMismatch("the flatness system is written in Cartesian coordinates")


def flatness_system_residuals_3d(omega_field: ScalarField) -> tuple[ScalarField, ...]:
    """Residuals of the six scalar equations equivalent to Ricci flatness."""
    chart = omega_field.chart
    _require_cartesian_3d(chart)
    g, H = omega_field.gradient, omega_field.hessian
    lap = np.trace(H, axis1=-2, axis2=-1)
    sq = g ** 2
    band = omega_field.hessian_band
    out = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        out.append(H[..., i, j] - g[..., i] * g[..., j])
    for i in range(3):
        others = sq.sum(axis=-1) - sq[..., i]
        out.append(H[..., i, i] + lap + others)
    return tuple(ScalarField.from_samples(chart, v, band=band) for v in out)


def check_stress_free_3d(omega_field: ScalarField, tol: float | None = None) -> FlatnessReport:
    """Full (nonlinear) and linearized flatness residuals of ``exp(2 Omega) delta``.

    The verdict follows the full Ricci residual; the linearized residual
    ``sup |Hess Omega| * diam**2`` is reported alongside.
    """
    chart = omega_field.chart
    bundle = conformal_ricci(None, omega_field)
    d2 = chart.diameter ** 2
    norms = {"ricci": bundle.sup_norms["ricci"] * d2}
    if chart.coordinate_kind == "cartesian":
        H = SampledTensor(chart, omega_field.hessian, omega_field.hessian_band)
        norms["linearized"] = H.sup_norm() * d2
        for k, r in enumerate(flatness_system_residuals_3d(omega_field), start=1):
            norms[f"eq{k}"] = r.sup_norm() * d2
    tol = flatness_tolerance(omega_field) if tol is None else float(tol)
    verdict = "flat" if norms["ricci"] < tol else "not_flat"  # NaN counts as not flat
    return FlatnessReport(norms, verdict, "conformal Ricci residual", tol)


def _origin_inside(chart: Chart, b: np.ndarray) -> bool:
    if chart.coordinate_kind == "spherical":
        return chart.bounds[0][0] <= 0.0
    if chart.coordinate_kind != "cartesian":
        raise DimensionMismatch("closed_form_3d needs a Cartesian or spherical chart")
    return all(lo <= bi <= hi for (lo, hi), bi in zip(chart.bounds, b))


def closed_form_3d(c0: float, origin, chart: Chart) -> ScalarField:
    """``Omega = -ln(c0 |X - origin|**2)``, the nonlinear 3D stress-free profile.

    Raises
    ------
    OriginInDomain
        If the singular point lies in the closed chart box.
    """
    if chart.dimension != 3:
        raise DimensionMismatch("closed_form_3d is three-dimensional")
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    b = np.zeros(3) if origin is None else np.asarray(origin, dtype=float)
    if chart.coordinate_kind == "spherical" and np.any(b != 0):
        raise ValueError("on spherical charts the origin is the chart centre")
    if _origin_inside(chart, b):
        raise OriginInDomain(f"origin {tuple(b)} lies inside the chart")
    return radial_field(chart, lambda r: -np.log(c0 * r ** 2), lambda r: -2 / r,
                        lambda r: 2 / r ** 2,
                        None if chart.coordinate_kind != "cartesian" else b)


def closed_form_3d_temperature(c0: float, origin, chart: Chart, alpha: float,
                               T0: float = 0.0) -> TemperatureField:
    """Constant-``alpha`` temperature ``T0 - ln(c0 R**2) / alpha`` of the 3D profile."""
    om = closed_form_3d(c0, origin, chart)
    T = ScalarField(chart, lambda x: T0 + om.func(x) / alpha, lambda x: om.grad(x) / alpha,
                    lambda x: om.hess(x) / alpha)
    return TemperatureField.wrap(T, label="3D inversion profile")


def inversion_map(c0: float, origin=None):
    """Map ``X -> b + (X - b) / (c0 |X - b|**2)`` and its Jacobian.

    The map is an isometry from ``exp(2 Omega) delta`` (with the closed-form
    ``Omega``) onto Euclidean space: ``J^T J = exp(2 Omega) I``.
    """
    b = np.zeros(3) if origin is None else np.asarray(origin, dtype=float)

    def phi(X):
        y = np.asarray(X, dtype=float) - b
        r2 = np.sum(y * y, axis=-1)[..., None]
        return b + y / (c0 * r2)

    def jac(X):
        y = np.asarray(X, dtype=float) - b
        r2 = np.sum(y * y, axis=-1)
        d = y.shape[-1]
        nn = y[..., :, None] * y[..., None, :] / r2[..., None, None]
        return (np.eye(d) - 2 * nn) / (c0 * r2)[..., None, None]

    return phi, jac
