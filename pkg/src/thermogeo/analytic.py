"""Closed-form scalar fields with analytic first and second partials."""
from __future__ import annotations

from typing import Callable

import numpy as np

from .fields import Chart, ScalarField


def radial_field(chart: Chart, f: Callable, fp: Callable, fpp: Callable,
                 origin=None) -> ScalarField:
    """``Omega = f(R)`` with ``R`` the Euclidean distance to ``origin``.

    On polar, cylindrical and spherical charts ``R`` is the first coordinate
    and ``origin`` must be omitted.  On Cartesian charts ``R = |X - origin|``
    (default origin zero).
    """
    d = chart.dimension
    if chart.coordinate_kind != "cartesian":
        if origin is not None:
            raise ValueError("origin is only meaningful on Cartesian charts")

        def grad(x):
            out = np.zeros(x.shape[:-1] + (d,))
            out[..., 0] = fp(x[..., 0])
            return out

        def hess(x):
            out = np.zeros(x.shape[:-1] + (d, d))
            out[..., 0, 0] = fpp(x[..., 0])
            return out

        return ScalarField(chart, lambda x: f(x[..., 0]), grad, hess)

    b = np.zeros(d) if origin is None else np.asarray(origin, dtype=float)

    def rel(x):
        y = x - b
        return y, np.linalg.norm(y, axis=-1)

    def ratio(r):
        # fp(r) / r, with its r -> 0 limit fpp(0) for profiles smooth at the origin
        safe = np.where(r > 0, r, 1.0)
        return np.where(r > 0, fp(safe) / safe, fpp(r))

    def grad(x):
        y, r = rel(x)
        return ratio(r)[..., None] * y

    def hess(x):
        y, r = rel(x)
        n = y / np.where(r > 0, r, 1.0)[..., None]
        nn = n[..., :, None] * n[..., None, :]
        return fpp(r)[..., None, None] * nn + ratio(r)[..., None, None] * (np.eye(d) - nn)

    return ScalarField(chart, lambda x: f(rel(x)[1]), grad, hess)


def log_radial(chart: Chart, beta: float, scale: float = 0.0, origin=None) -> ScalarField:
    """``Omega = beta ln R + scale``."""
    return radial_field(chart, lambda r: beta * np.log(r) + scale, lambda r: beta / r,
                        lambda r: -beta / r ** 2, origin)


def polynomial_radial(chart: Chart, coeff: float, power: float, origin=None) -> ScalarField:
    """``Omega = coeff * R**power``."""
    p = float(power)
    return radial_field(chart, lambda r: coeff * r ** p, lambda r: coeff * p * r ** (p - 1),
                        lambda r: coeff * p * (p - 1) * r ** (p - 2), origin)


def quadratic_form_field(chart: Chart, Q, b=None, c: float = 0.0) -> ScalarField:
    """``x.Q.x / 2 + b.x + c`` (``Q`` symmetrized)."""
    d = chart.dimension
    Q = np.asarray(Q, dtype=float)
    Q = 0.5 * (Q + Q.T)
    b = np.zeros(d) if b is None else np.asarray(b, dtype=float)
    return ScalarField(chart,
                       lambda x: 0.5 * np.einsum("...i,ij,...j->...", x, Q, x) + x @ b + c,
                       lambda x: x @ Q + b,
                       lambda x: np.broadcast_to(Q, x.shape[:-1] + (d, d)).copy())


def fourier_field(chart: Chart, wavevectors, amplitudes, phases, offset: float = 0.0) -> ScalarField:
    """``offset + sum_k a_k sin(k . x + phi_k)`` with exact partials."""
    K = np.atleast_2d(np.asarray(wavevectors, dtype=float))
    a = np.asarray(amplitudes, dtype=float)
    ph = np.asarray(phases, dtype=float)

    def arg(x):
        return x @ K.T + ph

    return ScalarField(
        chart,
        lambda x: offset + np.sin(arg(x)) @ a,
        lambda x: (np.cos(arg(x)) * a) @ K,
        lambda x: -np.einsum("...m,mi,mj->...ij", np.sin(arg(x)) * a, K, K),
    )


def random_fourier_field(chart: Chart, rng: np.random.Generator, modes: int = 3,
                         amplitude: float = 0.3, max_wavenumber: float = 2.0) -> ScalarField:
    """Random smooth field of ``modes`` plane waves; deterministic given ``rng``."""
    d = chart.dimension
    K = rng.uniform(-max_wavenumber, max_wavenumber, size=(modes, d))
    a = rng.uniform(-amplitude, amplitude, size=modes)
    ph = rng.uniform(0, 2 * np.pi, size=modes)
    return fourier_field(chart, K, a, ph, offset=float(rng.uniform(-0.2, 0.2)))


def shifted(field: ScalarField, constant: float) -> ScalarField:
    return ScalarField(field.chart, lambda x: field.func(x) + constant, field.grad, field.hess)


def add_fields(f1: ScalarField, f2: ScalarField) -> ScalarField:
    """Pointwise sum of two analytic fields, keeping partials when both have them."""
    grad = hess = None
    if f1.grad is not None and f2.grad is not None:
        grad = lambda x: f1.grad(x) + f2.grad(x)  # noqa: E731
    if f1.hess is not None and f2.hess is not None:
        hess = lambda x: f1.hess(x) + f2.hess(x)  # noqa: E731
    return ScalarField(f1.chart, lambda x: f1.func(x) + f2.func(x), grad, hess)
