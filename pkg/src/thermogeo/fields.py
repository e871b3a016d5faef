"""Coordinate charts, sampled fields and fourth-order finite differences.

Every field lives on the uniform sample grid of a :class:`Chart`.  A field is
either *analytic* (built from callables, optionally with analytic first and
second partials) or *sampled* (a plain array of grid values).  Missing partials
are produced by fourth-order finite differences along the grid axes.

Array layout is ``(*grid_shape, *component_shape)``; partial-derivative
indices are appended at the end, so the gradient of a metric has layout
``(..., i, j, k)`` meaning ``dG_ij / dX^k``.

Derivatives obtained by finite differences are least accurate near the edges
of the grid.  Each array therefore carries a *band*: the number of boundary
layers (per axis) that norms and acceptance checks must skip.  Every finite
difference level widens the band by two.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, SingularMetric, StencilOutOfBounds

COORDINATE_KINDS = ("cartesian", "polar", "cylindrical", "spherical")
_KIND_DIMENSION = {"polar": 2, "cylindrical": 3, "spherical": 3}
FD_BAND = 2
MIN_FD_POINTS = 5


@dataclass(frozen=True)
class Chart:
    """A coordinate box ``bounds`` sampled on a uniform ``grid_shape`` grid.

    ``coordinate_kind`` only affects how points map into Euclidean space
    (:meth:`to_cartesian`) and which metric :meth:`flat_metric` returns.
    Polar coordinates are ``(R, Theta)``, cylindrical ``(R, Theta, Z)`` and
    spherical ``(R, Theta, Phi)`` with ``Theta`` the polar angle.
    """

    bounds: tuple[tuple[float, float], ...]
    grid_shape: tuple[int, ...]
    coordinate_kind: str = "cartesian"

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        shape = tuple(int(n) for n in self.grid_shape)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "grid_shape", shape)
        if len(bounds) not in (2, 3):
            raise DimensionMismatch(f"chart dimension must be 2 or 3, got {len(bounds)}")
        if len(shape) != len(bounds):
            raise DimensionMismatch("grid_shape and bounds have different lengths")
        if self.coordinate_kind not in COORDINATE_KINDS:
            raise ValueError(f"unknown coordinate kind {self.coordinate_kind!r}")
        expected = _KIND_DIMENSION.get(self.coordinate_kind)
        if expected is not None and expected != len(bounds):
            raise DimensionMismatch(
                f"{self.coordinate_kind} coordinates need dimension {expected}")
        for lo, hi in bounds:
            if not hi > lo:
                raise ValueError(f"empty interval [{lo}, {hi}]")
        if any(n < 1 for n in shape):
            raise ValueError("grid_shape entries must be positive")
        if self.coordinate_kind != "cartesian" and bounds[0][0] < 0.0:
            raise ValueError("radial coordinate must be non-negative")

    @classmethod
    def box(cls, bounds: Sequence[tuple[float, float]], n: int | Sequence[int],
            kind: str = "cartesian") -> "Chart":
        if np.isscalar(n):
            n = (int(n),) * len(bounds)
        return cls(tuple(bounds), tuple(n), kind)

    @property
    def dimension(self) -> int:
        return len(self.bounds)

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(np.linspace(lo, hi, n) for (lo, hi), n in zip(self.bounds, self.grid_shape))

    @cached_property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (n - 1) if n > 1 else np.inf
                     for (lo, hi), n in zip(self.bounds, self.grid_shape))

    @cached_property
    def points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    def to_cartesian(self, points: np.ndarray) -> np.ndarray:
        x = np.asarray(points, dtype=float)
        kind = self.coordinate_kind
        if kind == "cartesian":
            return x
        r, th = x[..., 0], x[..., 1]
        if kind == "polar":
            return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
        if kind == "cylindrical":
            return np.stack([r * np.cos(th), r * np.sin(th), x[..., 2]], axis=-1)
        ph = x[..., 2]
        return np.stack([r * np.sin(th) * np.cos(ph), r * np.sin(th) * np.sin(ph),
                         r * np.cos(th)], axis=-1)

    @cached_property
    def diameter(self) -> float:
        """Diagonal of the Euclidean bounding box of the embedded samples."""
        pts = self.to_cartesian(self.points).reshape(-1, self.dimension)
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    @property
    def multiply_connected(self) -> bool:
        """True for full annuli and shells (angular range covers a full turn)."""
        if self.coordinate_kind in ("polar", "cylindrical"):
            lo, hi = self.bounds[1]
            return hi - lo >= 2 * np.pi - 1e-12 and self.bounds[0][0] > 0.0
        return False

    def interior(self, band: int) -> tuple[slice, ...]:
        """Index slices selecting samples at least ``band`` layers from the edge.

        Axes with fewer than ``MIN_FD_POINTS`` samples were never
        differentiated along and are kept whole.
        """
        if band <= 0:
            return tuple(slice(None) for _ in self.grid_shape)
        out = []
        for n in self.grid_shape:
            if n < MIN_FD_POINTS:
                out.append(slice(None))
                continue
            if n - 2 * band < 1:
                raise StencilOutOfBounds(
                    f"grid axis with {n} samples has no interior beyond a band of {band}")
            out.append(slice(band, n - band))
        return tuple(out)

    def restrict(self, *slices: slice) -> "Chart":
        """Sub-chart whose samples are the grid samples selected by ``slices``."""
        bounds, shape = [], []
        for ax, sl in zip(self.axes, slices):
            sub = ax[sl]
            if sub.size > 2 and not np.allclose(np.diff(sub), sub[1] - sub[0]):
                raise ValueError("restriction must keep a uniform grid")
            bounds.append((sub[0], sub[-1]))
            shape.append(sub.size)
        return Chart(tuple(bounds), tuple(shape), self.coordinate_kind)

    def flat_metric(self) -> "MetricField":
        """The Euclidean metric written in this chart, with analytic partials."""
        d = self.dimension
        kind = self.coordinate_kind

        def comps(x):
            g = np.zeros(x.shape[:-1] + (d, d))
            for i in range(d):
                g[..., i, i] = 1.0
            if kind in ("polar", "cylindrical", "spherical"):
                g[..., 1, 1] = x[..., 0] ** 2
            if kind == "spherical":
                g[..., 2, 2] = (x[..., 0] * np.sin(x[..., 1])) ** 2
            return g

        def grad(x):
            dg = np.zeros(x.shape[:-1] + (d, d, d))
            if kind in ("polar", "cylindrical", "spherical"):
                dg[..., 1, 1, 0] = 2 * x[..., 0]
            if kind == "spherical":
                r, th = x[..., 0], x[..., 1]
                dg[..., 2, 2, 0] = 2 * r * np.sin(th) ** 2
                dg[..., 2, 2, 1] = 2 * r ** 2 * np.sin(th) * np.cos(th)
            return dg

        def hess(x):
            h = np.zeros(x.shape[:-1] + (d, d, d, d))
            if kind in ("polar", "cylindrical", "spherical"):
                h[..., 1, 1, 0, 0] = 2.0
            if kind == "spherical":
                r, th = x[..., 0], x[..., 1]
                h[..., 2, 2, 0, 0] = 2 * np.sin(th) ** 2
                h[..., 2, 2, 0, 1] = h[..., 2, 2, 1, 0] = 4 * r * np.sin(th) * np.cos(th)
                h[..., 2, 2, 1, 1] = 2 * r ** 2 * np.cos(2 * th)
            return h

        return MetricField(self, comps, grad, hess)


# ---------------------------------------------------------------------------
# finite differences

def fd_derivative(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Fourth-order first derivative of ``values`` along grid ``axis``.

    Central five-point stencil in the interior; one-sided fourth-order
    stencils on the two outermost layers so the result covers the full grid.
    """
    f = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = f.shape[0]
    if n < MIN_FD_POINTS:
        raise StencilOutOfBounds(f"need at least {MIN_FD_POINTS} samples per axis, got {n}")
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return np.moveaxis(out, 0, axis)


def fd_gradient(chart: Chart, values: np.ndarray) -> np.ndarray:
    """Stack of :func:`fd_derivative` along every chart axis (new last index)."""
    return np.stack([fd_derivative(values, k, chart.spacing[k])
                     for k in range(chart.dimension)], axis=-1)


# ---------------------------------------------------------------------------
# fields

class Field:
    """Base class for scalar, vector and metric fields on a chart."""

    component_ndim = 0

    def __init__(self, chart: Chart, func: Callable | None = None,
                 grad: Callable | None = None, hess: Callable | None = None, *,
                 samples: np.ndarray | None = None, band: int = 0):
        if func is None and samples is None:
            raise ValueError("a field needs either a callable or samples")
        self.chart = chart
        self.func = func
        self.grad = grad if func is not None else None
        self.hess = hess if func is not None else None
        self._samples = None if samples is None else np.asarray(samples, dtype=float)
        self.band = 0 if func is not None else int(band)
        if self._samples is not None:
            expected = chart.grid_shape + self._component_shape()
            if self._samples.shape != expected:
                raise ValueError(f"samples have shape {self._samples.shape}, expected {expected}")

    def _component_shape(self) -> tuple[int, ...]:
        return (self.chart.dimension,) * self.component_ndim

    @classmethod
    def from_samples(cls, chart: Chart, samples, band: int = 0):
        return cls(chart, samples=samples, band=band)

    @property
    def is_analytic(self) -> bool:
        return self.func is not None

    def __call__(self, points):
        if self.func is None:
            raise TypeError("sampled fields can only be read on their grid (use .values)")
        return self.func(np.asarray(points, dtype=float))

    @cached_property
    def values(self) -> np.ndarray:
        if self._samples is not None:
            return self._samples
        return np.asarray(self.func(self.chart.points), dtype=float)

    @cached_property
    def gradient(self) -> np.ndarray:
        if self.grad is not None:
            return np.asarray(self.grad(self.chart.points), dtype=float)
        return fd_gradient(self.chart, self.values)

    @property
    def gradient_band(self) -> int:
        return 0 if self.grad is not None else self.band + FD_BAND

    @cached_property
    def hessian(self) -> np.ndarray:
        if self.hess is not None:
            return np.asarray(self.hess(self.chart.points), dtype=float)
        h = fd_gradient(self.chart, self.gradient)
        return 0.5 * (h + np.swapaxes(h, -1, -2))

    @property
    def hessian_band(self) -> int:
        if self.hess is not None:
            return 0
        return self.gradient_band + FD_BAND

    def sup_norm(self, band: int | None = None) -> float:
        band = self.band if band is None else band
        return float(np.max(np.abs(self.values[self.chart.interior(band)])))


class ScalarField(Field):
    """Real function on a chart (temperature, log-scale factor, ...)."""

    component_ndim = 0

    @classmethod
    def constant(cls, chart: Chart, value: float) -> "ScalarField":
        d = chart.dimension
        return cls(chart, lambda x: np.full(x.shape[:-1], float(value)),
                   lambda x: np.zeros(x.shape[:-1] + (d,)),
                   lambda x: np.zeros(x.shape[:-1] + (d, d)))

    def map(self, f: Callable, fp: Callable | None = None,
            fpp: Callable | None = None) -> "ScalarField":
        """Compose with a scalar function ``f``; chain rule when ``fp``/``fpp`` given."""
        chart = self.chart
        if not self.is_analytic:
            return ScalarField.from_samples(chart, f(self.values), band=self.band)
        func = lambda x: f(self.func(x))  # noqa: E731
        grad = hess = None
        if fp is not None and self.grad is not None:
            def grad(x):
                return fp(self.func(x))[..., None] * self.grad(x)
            if fpp is not None and self.hess is not None:
                def hess(x):
                    t, g = self.func(x), self.grad(x)
                    return (fpp(t)[..., None, None] * g[..., :, None] * g[..., None, :]
                            + fp(t)[..., None, None] * self.hess(x))
        return ScalarField(chart, func, grad, hess)


class VectorField(Field):
    """Vector field; gradient layout ``(..., b, B)`` is ``dU^b/dX^B``."""

    component_ndim = 1


class MetricField(Field):
    """Symmetric positive-definite matrix field.

    ``conformal`` optionally records ``(omega, base)`` when the metric is
    ``exp(2 omega) * base``; operations use it for closed-form shortcuts.
    """

    component_ndim = 2

    def __init__(self, *args, conformal: tuple[ScalarField, "MetricField"] | None = None, **kw):
        super().__init__(*args, **kw)
        self.conformal = conformal

    @classmethod
    def identity(cls, chart: Chart) -> "MetricField":
        d = chart.dimension
        eye = np.eye(d)
        return cls(chart, lambda x: np.broadcast_to(eye, x.shape[:-1] + (d, d)).copy(),
                   lambda x: np.zeros(x.shape[:-1] + (d, d, d)),
                   lambda x: np.zeros(x.shape[:-1] + (d, d, d, d)))

    @classmethod
    def conformal_to(cls, base: "MetricField", omega: ScalarField) -> "MetricField":
        """``exp(2 omega) * base`` with analytic partials whenever both inputs have them."""
        if base.chart != omega.chart:
            from .errors import ChartMismatch
            raise ChartMismatch("base metric and conformal factor live on different charts")
        chart = base.chart
        if not (base.is_analytic and omega.is_analytic):
            vals = np.exp(2 * omega.values)[..., None, None] * base.values
            return cls(chart, samples=vals, band=max(base.band, omega.band),
                       conformal=(omega, base))

        def func(x):
            return np.exp(2 * omega.func(x))[..., None, None] * base.func(x)

        grad = hess = None
        if base.grad is not None and omega.grad is not None:
            def grad(x):
                e = np.exp(2 * omega.func(x))[..., None, None, None]
                w = omega.grad(x)
                return e * (2 * base.func(x)[..., None] * w[..., None, None, :] + base.grad(x))
            if base.hess is not None and omega.hess is not None:
                def hess(x):
                    e = np.exp(2 * omega.func(x))[..., None, None, None, None]
                    w, ww = omega.grad(x), omega.hess(x)
                    h0, dh, ddh = base.func(x), base.grad(x), base.hess(x)
                    s = 4 * w[..., :, None] * w[..., None, :] + 2 * ww
                    out = h0[..., :, :, None, None] * s[..., None, None, :, :]
                    out = out + 2 * dh[..., :, :, :, None] * w[..., None, None, None, :]
                    out = out + 2 * dh[..., :, :, None, :] * w[..., None, None, :, None]
                    return e * (out + ddh)
        return cls(chart, func, grad, hess, conformal=(omega, base))

    def check_positive_definite(self) -> None:
        g = self.values
        if not np.all(np.isfinite(g)):
            raise SingularMetric("metric has non-finite components")
        if not np.allclose(g, np.swapaxes(g, -1, -2), rtol=1e-12, atol=1e-14):
            raise SingularMetric("metric is not symmetric")
        eig = np.linalg.eigvalsh(g)
        if np.any(eig <= 0.0):
            idx = np.unravel_index(np.argmin(eig[..., 0]), eig.shape[:-1])
            raise SingularMetric(
                f"metric not positive-definite at sample {tuple(int(i) for i in idx)}")

    @cached_property
    def inverse(self) -> np.ndarray:
        self.check_positive_definite()
        return np.linalg.inv(self.values)

    @cached_property
    def determinant(self) -> np.ndarray:
        return np.linalg.det(self.values)


def same_chart(*fields) -> bool:
    charts = [f.chart for f in fields]
    return all(c == charts[0] for c in charts[1:])
