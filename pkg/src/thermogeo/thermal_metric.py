"""Temperature-dependent material metrics, volume forms and mass density.

A temperature field ``T`` and an expansion law ``omega(T)`` (with
``alpha = d omega / dT``) give the material metric ``G = exp(2 omega(T)) H``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ChartMismatch, DegenerateFrame, DimensionMismatch, SingularMetric
from .fields import MetricField, ScalarField
from .quadrature import adaptive_simpson, cumulative_simpson

ArrayFn = Callable[[np.ndarray], np.ndarray]


def _fd_step(T):
    return 1e-3 * np.maximum(1.0, np.abs(T))


def _fd5(f: ArrayFn, T) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    h = _fd_step(T)
    return (f(T - 2 * h) - 8 * f(T - h) + 8 * f(T + h) - f(T + 2 * h)) / (12 * h)


def _vectorize(f: Callable) -> ArrayFn:
    def g(T):
        T = np.asarray(T, dtype=float)
        out = f(T)
        return np.broadcast_to(np.asarray(out, dtype=float), T.shape).copy()
    return g


@dataclass(frozen=True)
class ExpansionLaw:
    """Log-scale factor ``omega(T)`` and its derivative ``alpha(T)``.

    Build instances with :meth:`constant`, :meth:`from_alpha` or
    :meth:`from_omega`; all three normalize ``omega(T0) = 0``.  Callables
    must accept numpy arrays.
    """

    omega: ArrayFn
    alpha: ArrayFn
    T0: float = 0.0
    alpha_prime: ArrayFn | None = None

    @classmethod
    def constant(cls, alpha: float, T0: float = 0.0) -> "ExpansionLaw":
        a = float(alpha)
        return cls(omega=lambda T: a * (np.asarray(T, dtype=float) - T0),
                   alpha=lambda T: np.full(np.shape(T), a),
                   T0=float(T0),
                   alpha_prime=lambda T: np.zeros(np.shape(T)))

    @classmethod
    def from_alpha(cls, alpha: Callable, T0: float = 0.0,
                   alpha_prime: Callable | None = None) -> "ExpansionLaw":
        """``omega(T) = int_{T0}^{T} alpha`` by adaptive Simpson quadrature."""
        alpha_v = _vectorize(alpha)
        scalar_alpha = lambda t: float(alpha_v(np.array(t)))  # noqa: E731

        def omega(T):
            return cumulative_simpson(scalar_alpha, T0, np.asarray(T, dtype=float))

        return cls(omega=omega, alpha=alpha_v, T0=float(T0),
                   alpha_prime=None if alpha_prime is None else _vectorize(alpha_prime))

    @classmethod
    def from_omega(cls, omega: Callable, T0: float = 0.0, alpha: Callable | None = None,
                   alpha_prime: Callable | None = None) -> "ExpansionLaw":
        """Shift ``omega`` so that it vanishes at ``T0``; differentiate it if ``alpha`` is absent."""
        raw = _vectorize(omega)
        shift = float(raw(np.array(T0)))
        om = lambda T: raw(T) - shift  # noqa: E731
        al = _vectorize(alpha) if alpha is not None else (lambda T: _fd5(om, T))
        return cls(omega=om, alpha=al, T0=float(T0),
                   alpha_prime=None if alpha_prime is None else _vectorize(alpha_prime))

    def dalpha(self, T) -> np.ndarray:
        """``d alpha / dT``: analytic when supplied, else finite differences."""
        if self.alpha_prime is not None:
            return self.alpha_prime(T)
        return _fd5(self.alpha, T)

    def consistency_residual(self, temperatures) -> float:
        """``max |alpha - FD[omega]| / (1 + |alpha|)`` over ``temperatures``."""
        T = np.asarray(temperatures, dtype=float)
        a = self.alpha(T)
        return float(np.max(np.abs(a - _fd5(self.omega, T)) / (1 + np.abs(a))))

    def omega_field(self, T: ScalarField) -> ScalarField:
        """``Omega(X) = omega(T(X))`` with chain-rule partials."""
        return T.map(self.omega, self.alpha, self.dalpha)


class TemperatureField(ScalarField):
    """Scalar field in temperature units with an optional ``label``."""

    def __init__(self, *args, label: str = "", **kw):
        super().__init__(*args, **kw)
        self.label = label

    @classmethod
    def wrap(cls, field: ScalarField, label: str = "") -> "TemperatureField":
        if isinstance(field, TemperatureField):
            return field
        if field.is_analytic:
            return cls(field.chart, field.func, field.grad, field.hess, label=label)
        return cls(field.chart, samples=field.values, band=field.band, label=label)


@dataclass(frozen=True)
class AnisotropicExpansion:
    """Frame of covectors ``E^I = A[I, J] dX^J`` with one expansion law per covector.

    ``frame`` is either a callable ``x -> (..., d, d)`` or an array sampled on
    the chart grid.
    """

    frame: Callable | np.ndarray
    omegas: Sequence[ExpansionLaw]


@dataclass(frozen=True)
class MassDensity:
    rho0_at_T0: ScalarField
    N: int = 3

    def __post_init__(self):
        if np.any(self.rho0_at_T0.values <= 0):
            raise ValueError("reference mass density must be positive")


def build_material_metric(H: MetricField, T: ScalarField, law: ExpansionLaw) -> MetricField:
    """``G = exp(2 omega(T)) H``."""
    if H.chart != T.chart:
        raise ChartMismatch("H and T are defined on different charts")
    return MetricField.conformal_to(H, law.omega_field(T))


def build_anisotropic_metric(spec: AnisotropicExpansion, T: ScalarField,
                             tol: float = 1e-12) -> MetricField:
    """``G_JK = sum_I exp(2 omega_I(T)) A[I, J] A[I, K]``."""
    chart = T.chart
    d = chart.dimension
    if len(spec.omegas) != d:
        raise DimensionMismatch(f"need {d} expansion laws, got {len(spec.omegas)}")
    A = spec.frame(chart.points) if callable(spec.frame) else np.asarray(spec.frame, dtype=float)
    A = np.broadcast_to(A, chart.grid_shape + (d, d))
    scale = np.prod(np.linalg.norm(A, axis=-1), axis=-1)
    if np.any(np.abs(np.linalg.det(A)) <= tol * scale):
        raise DegenerateFrame("frame covectors are linearly dependent at some sample")

    def assemble(Tv, Av):
        w = np.stack([law.omega(Tv) for law in spec.omegas], axis=-1)
        return np.einsum("...i,...ij,...ik->...jk", np.exp(2 * w), Av, Av)

    if T.is_analytic and callable(spec.frame):
        frame = spec.frame
        return MetricField(chart, lambda x: assemble(T.func(x), frame(x)))
    return MetricField(chart, samples=assemble(T.values, A), band=T.band)


def volume_form(G: MetricField) -> ScalarField:
    """Density ``sqrt(det G)`` of the Riemannian volume form."""
    G.check_positive_definite()
    if G.is_analytic:
        return ScalarField(G.chart, lambda x: np.sqrt(np.linalg.det(G.func(x))))
    return ScalarField.from_samples(G.chart, np.sqrt(G.determinant), band=G.band)


def density_at_temperature(rho: MassDensity | int, law: ExpansionLaw, T_from: float,
                           T_to: float) -> float:
    """Density scale factor ``exp(-N int_{T_from}^{T_to} alpha)``.

    ``rho`` may be a :class:`MassDensity` or just the dimension ``N``.
    """
    N = rho.N if isinstance(rho, MassDensity) else int(rho)
    integral = adaptive_simpson(lambda t: float(law.alpha(np.array(t))), T_from, T_to)
    return float(np.exp(-N * integral))


def jacobian(F, G: MetricField | np.ndarray, g: MetricField | np.ndarray) -> ScalarField | np.ndarray:
    """``J = det F sqrt(det g / det G)``.

    ``F[..., a, A]`` holds the deformation gradient on the grid and ``g`` is
    the spatial metric evaluated at the deformed points.  Returns a sampled
    :class:`ScalarField` when ``G`` is a field, otherwise a plain array.
    """
    Fv = np.asarray(F, dtype=float)
    Gv = G.values if isinstance(G, MetricField) else np.asarray(G, dtype=float)
    gv = g.values if isinstance(g, MetricField) else np.asarray(g, dtype=float)
    if isinstance(G, MetricField) and isinstance(g, MetricField) and G.chart != g.chart:
        raise ChartMismatch("G and g samples must share a grid")
    dG, dg = np.linalg.det(Gv), np.linalg.det(gv)
    if np.any(dG <= 0) or np.any(dg <= 0):
        raise SingularMetric("metric determinant is not positive")
    J = np.linalg.det(Fv) * np.sqrt(dg / dG)
    if isinstance(G, MetricField):
        return ScalarField.from_samples(G.chart, J, band=G.band)
    return J


def is_incompressible(J: ScalarField | np.ndarray, tol: float = 1e-8) -> bool:
    vals = J.values if isinstance(J, ScalarField) else np.asarray(J)
    return bool(np.max(np.abs(vals - 1.0)) < tol)
