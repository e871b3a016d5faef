"""Connections, curvature and torsion on a single coordinate chart.

Index conventions
-----------------
``ConnectionField.coefficients[..., a, b, c]`` is the coefficient of
``nabla_{d/dX^b} d/dX^c = Gamma^a_{bc} d/dX^a``: the first lower index is the
differentiation direction.  ``ConnectionField.derivatives[..., a, b, c, e]``
is ``d Gamma^a_{bc} / dX^e``.

The Riemann tensor ``riemann[..., a, b, c, d]`` is ``R^a_{bcd}``, the
component of ``R(d_c, d_d) d_b``::

    R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
                + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}

For a symmetric connection this is the familiar coordinate formula.  Ricci is
the contraction ``R_{bd} = R^c_{bcd}`` and torsion is
``T^a_{bc} = Gamma^a_{bc} - Gamma^a_{cb}``.  With these signs the round
sphere of radius ``a`` has scalar curvature ``+2/a**2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChartMismatch, DimensionMismatch
from .fields import FD_BAND, Chart, MetricField, ScalarField, fd_gradient

# Scale-invariant flatness threshold on sup|Ricci| * diameter**2 (analytic mode).
FLATNESS_TOL = 1e-6


@dataclass(eq=False)
class ConnectionField:
    chart: Chart
    coefficients: np.ndarray
    derivatives: np.ndarray | None = None
    symmetric_lower: bool = False
    band: int = 0

    def __post_init__(self):
        if self.symmetric_lower:
            c = self.coefficients
            self.coefficients = 0.5 * (c + np.swapaxes(c, -1, -2))
            if self.derivatives is not None:
                d = self.derivatives
                self.derivatives = 0.5 * (d + np.swapaxes(d, -2, -3))

    def derivative_array(self) -> np.ndarray:
        if self.derivatives is not None:
            return self.derivatives
        return fd_gradient(self.chart, self.coefficients)

    @property
    def derivative_band(self) -> int:
        return self.band if self.derivatives is not None else self.band + FD_BAND

    def trace(self) -> np.ndarray:
        """``Gamma^A_{AB}``, the combination appearing in divergences."""
        return np.einsum("...aab->...b", self.coefficients)


@dataclass(eq=False)
class SampledTensor:
    """Grid samples of a tensor together with the unreliable boundary band."""

    chart: Chart
    values: np.ndarray
    band: int = 0

    def interior(self) -> np.ndarray:
        return self.values[self.chart.interior(self.band)]

    def sup_norm(self) -> float:
        v = self.interior()
        return float(np.max(np.abs(v))) if v.size else 0.0


@dataclass(eq=False)
class CurvatureBundle:
    chart: Chart
    ricci: np.ndarray
    scalar: np.ndarray
    band: int = 0
    riemann: np.ndarray | None = None
    torsion: np.ndarray | None = None
    weyl_schouten: np.ndarray | None = None
    sup_norms: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.refresh_norms()

    def refresh_norms(self) -> None:
        sl = self.chart.interior(self.band)
        for name in ("riemann", "ricci", "scalar", "torsion", "weyl_schouten"):
            arr = getattr(self, name)
            if arr is not None:
                v = arr[sl]
                self.sup_norms[name] = float(np.max(np.abs(v))) if v.size else 0.0

    def scalar_field(self) -> ScalarField:
        return ScalarField.from_samples(self.chart, self.scalar, band=self.band)


def _christoffel_lowered(dG: np.ndarray) -> np.ndarray:
    # dG[..., i, j, k] = d_k G_ij  ->  Gamma_{l i j} = (d_i G_jl + d_j G_il - d_l G_ij) / 2
    t1 = np.einsum("...jli->...lij", dG)
    t2 = np.einsum("...ilj->...lij", dG)
    t3 = np.einsum("...ijl->...lij", dG)
    return 0.5 * (t1 + t2 - t3)


def levi_civita(metric: MetricField) -> ConnectionField:
    """Christoffel symbols of the second kind.

    Uses the metric's analytic first partials when present (and its second
    partials for the derivative array consumed by :func:`curvature`);
    otherwise fourth-order central differences on the chart grid.
    """
    ginv = metric.inverse
    dG = metric.gradient
    low = _christoffel_lowered(dG)
    gamma = np.einsum("...kl,...lij->...kij", ginv, low)
    derivs = None
    if metric.grad is not None and metric.hess is not None:
        ddG = metric.hessian  # [..., i, j, k, m] = d_k d_m G_ij
        dginv = -np.einsum("...ka,...abm,...bl->...klm", ginv, dG, ginv)
        dlow = 0.5 * (np.einsum("...jlim->...lijm", ddG) + np.einsum("...iljm->...lijm", ddG)
                      - np.einsum("...ijlm->...lijm", ddG))
        derivs = (np.einsum("...klm,...lij->...kijm", dginv, low)
                  + np.einsum("...kl,...lijm->...kijm", ginv, dlow))
    return ConnectionField(metric.chart, gamma, derivs, symmetric_lower=True,
                           band=metric.gradient_band)


def riemann_from_connection(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    return (np.einsum("...adbc->...abcd", dgamma)
            - np.einsum("...acbd->...abcd", dgamma)
            + np.einsum("...ace,...edb->...abcd", gamma, gamma)
            - np.einsum("...ade,...ecb->...abcd", gamma, gamma))


def curvature(connection: ConnectionField, metric: MetricField) -> CurvatureBundle:
    """Riemann, Ricci, scalar curvature and torsion of ``connection``."""
    if connection.chart != metric.chart:
        raise ChartMismatch("connection and metric are defined on different charts")
    gamma = connection.coefficients
    riem = riemann_from_connection(gamma, connection.derivative_array())
    ricci = np.einsum("...abad->...bd", riem)
    scalar = np.einsum("...bd,...bd->...", metric.inverse, ricci)
    torsion = gamma - np.swapaxes(gamma, -1, -2)
    return CurvatureBundle(metric.chart, ricci, scalar, band=connection.derivative_band,
                           riemann=riem, torsion=torsion)


def metric_curvature(metric: MetricField) -> CurvatureBundle:
    return curvature(levi_civita(metric), metric)


def covariant_hessian(omega: ScalarField, connection: ConnectionField) -> np.ndarray:
    """``nabla_i nabla_j omega = d_ij omega - Gamma^k_{ij} d_k omega``."""
    return omega.hessian - np.einsum("...kij,...k->...ij", connection.coefficients, omega.gradient)


def flat_laplacian(omega: ScalarField) -> SampledTensor:
    """Laplacian of ``omega`` under the chart's own Euclidean metric."""
    flat = omega.chart.flat_metric()
    hess = covariant_hessian(omega, levi_civita(flat))
    lap = np.einsum("...ij,...ij->...", flat.inverse, hess)
    return SampledTensor(omega.chart, lap, omega.hessian_band)


def conformal_scalar_2d(omega_field: ScalarField) -> ScalarField:
    """Scalar curvature of ``exp(2 Omega) * flat`` in 2D: ``-2 exp(-2 Omega) lap(Omega)``."""
    if omega_field.chart.dimension != 2:
        raise DimensionMismatch("the closed-form scalar curvature is two-dimensional")
    lap = flat_laplacian(omega_field)
    vals = -2.0 * np.exp(-2.0 * omega_field.values) * lap.values
    return ScalarField.from_samples(omega_field.chart, vals, band=lap.band)


def conformal_ricci(base_metric: MetricField | None, omega_field: ScalarField,
                    n: int | None = None) -> CurvatureBundle:
    """Ricci tensor of ``exp(2 Omega) * base`` from the base geometry.

    Uses the five-term conformal transformation law with covariant
    derivatives of the base metric; for a Cartesian Euclidean base these
    reduce to plain partial derivatives.
    """
    chart = omega_field.chart
    base = chart.flat_metric() if base_metric is None else base_metric
    if base.chart != chart:
        raise ChartMismatch("base metric and Omega live on different charts")
    n = chart.dimension if n is None else int(n)
    if n != chart.dimension:
        raise DimensionMismatch(f"n={n} but the chart is {chart.dimension}-dimensional")
    conn = levi_civita(base)
    base_curv = curvature(conn, base)
    g0, g0inv = base.values, base.inverse
    hess = covariant_hessian(omega_field, conn)
    w = omega_field.gradient
    ww = w[..., :, None] * w[..., None, :]
    trace_h = np.einsum("...kl,...kl->...", g0inv, hess)
    trace_ww = np.einsum("...kl,...kl->...", g0inv, ww)
    ricci = (base_curv.ricci - (n - 2) * hess - g0 * trace_h[..., None, None]
             + (n - 2) * ww - (n - 2) * g0 * trace_ww[..., None, None])
    scalar = np.exp(-2 * omega_field.values) * np.einsum("...ij,...ij->...", g0inv, ricci)
    band = max(base_curv.band, omega_field.hessian_band)
    return CurvatureBundle(chart, ricci, scalar, band=band)


def weyl_schouten(metric: MetricField) -> SampledTensor:
    """Weyl-Schouten (Cotton) tensor ``C_IJK``; vanishes iff conformally flat in 3D."""
    chart = metric.chart
    if chart.dimension != 3:
        raise DimensionMismatch("the Weyl-Schouten test applies to three dimensions")
    conn = levi_civita(metric)
    curv = curvature(conn, metric)
    ricci, gamma, g = curv.ricci, conn.coefficients, metric.values
    d_ricci = fd_gradient(chart, ricci)  # [..., i, j, k] = d_k R_ij
    cov = (d_ricci - np.einsum("...lki,...lj->...ijk", gamma, ricci)
           - np.einsum("...lkj,...il->...ijk", gamma, ricci))
    d_scalar = fd_gradient(chart, curv.scalar)
    cotton = (cov - np.swapaxes(cov, -1, -2)
              - 0.25 * (g[..., :, :, None] * d_scalar[..., None, None, :]
                        - g[..., :, None, :] * d_scalar[..., None, :, None]))
    return SampledTensor(chart, cotton, curv.band + FD_BAND)


def metric_covariant_derivative(connection: ConnectionField, metric: MetricField) -> SampledTensor:
    """``nabla_c G_ab``; zero for the Levi-Civita connection of ``metric``."""
    g, gamma = metric.values, connection.coefficients
    cov = (metric.gradient - np.einsum("...eca,...eb->...abc", gamma, g)
           - np.einsum("...ecb,...ae->...abc", gamma, g))
    return SampledTensor(metric.chart, cov, max(connection.band, metric.gradient_band))


def first_bianchi(riemann: np.ndarray) -> np.ndarray:
    """Cyclic sum ``R^a_{bcd} + R^a_{cdb} + R^a_{dbc}``."""
    return (riemann + np.einsum("...acdb->...abcd", riemann)
            + np.einsum("...adbc->...abcd", riemann))


def ricci_flatness_residual(bundle: CurvatureBundle) -> float:
    """Scale-free flatness measure ``sup|Ricci| * diameter**2``."""
    return bundle.sup_norms["ricci"] * bundle.chart.diameter ** 2
