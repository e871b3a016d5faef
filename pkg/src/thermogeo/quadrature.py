"""One-dimensional quadrature helpers: adaptive Simpson and composite Gauss-Legendre."""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import QuadratureFailure

SIMPSON_TOL = 1e-10
SIMPSON_MAX_INTERVALS = 2 ** 20

_GL5_X, _GL5_W = np.polynomial.legendre.leggauss(5)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = SIMPSON_TOL, max_intervals: int = SIMPSON_MAX_INTERVALS) -> float:
    """Integrate a scalar function with Richardson-corrected adaptive Simpson.

    Raises
    ------
    QuadratureFailure
        If the interval budget ``max_intervals`` is exhausted or ``f``
        returns non-finite values.
    """
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    def fv(x):
        y = float(f(x))
        if not np.isfinite(y):
            raise QuadratureFailure(f"integrand is not finite at {x!r}")
        return y

    fa, fm, fb = fv(a), fv(0.5 * (a + b)), fv(b)
    whole = (b - a) * (fa + 4 * fm + fb) / 6
    stack = [(a, b, fa, fm, fb, whole, tol)]
    total, used = 0.0, 1
    while stack:
        lo, hi, flo, fmid, fhi, s, eps = stack.pop()
        mid = 0.5 * (lo + hi)
        fl, fr = fv(0.5 * (lo + mid)), fv(0.5 * (mid + hi))
        left = (mid - lo) * (flo + 4 * fl + fmid) / 6
        right = (hi - mid) * (fmid + 4 * fr + fhi) / 6
        err = left + right - s
        if abs(err) <= 15 * eps or hi - lo <= 1e-14 * max(1.0, abs(mid)):
            total += left + right + err / 15
            continue
        used += 1
        if used > max_intervals:
            raise QuadratureFailure(
                f"adaptive Simpson exceeded {max_intervals} subdivisions on [{a}, {b}]")
        stack.append((lo, mid, flo, fl, fmid, left, 0.5 * eps))
        stack.append((mid, hi, fmid, fr, fhi, right, 0.5 * eps))
    return sign * total


def cumulative_simpson(f: Callable[[float], float], x0: float, xs: np.ndarray,
                       tol: float = SIMPSON_TOL) -> np.ndarray:
    """``int_{x0}^{x} f`` for every entry of ``xs`` (any shape).

    The integral is accumulated over the sorted unique abscissae so each gap
    is integrated only once.
    """
    xs = np.asarray(xs, dtype=float)
    flat = xs.ravel()
    knots, inverse = np.unique(np.concatenate([[x0], flat]), return_inverse=True)
    pieces = np.array([adaptive_simpson(f, knots[i], knots[i + 1], tol)
                       for i in range(knots.size - 1)])
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    cum -= cum[inverse[0]]
    return cum[inverse[1:]].reshape(xs.shape)


def gauss_legendre_panels(f: Callable[[np.ndarray], np.ndarray], edges: np.ndarray) -> np.ndarray:
    """Five-point Gauss-Legendre integral of vectorized ``f`` over each panel.

    Returns one value per consecutive pair in ``edges``.
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * _GL5_X[None, :]
    vals = np.asarray(f(nodes), dtype=float)
    return half * (vals @ _GL5_W)


def cumulative_gauss_legendre(f: Callable[[np.ndarray], np.ndarray],
                              edges: np.ndarray) -> np.ndarray:
    """Running integral from ``edges[0]`` to each edge (same length as ``edges``)."""
    return np.concatenate([[0.0], np.cumsum(gauss_legendre_panels(f, edges))])


def composite_simpson(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int) -> float:
    """Plain composite Simpson rule with ``panels`` (even) subintervals."""
    panels = int(panels) + (int(panels) % 2)
    x = np.linspace(a, b, panels + 1)
    y = np.asarray(f(x), dtype=float)
    h = (b - a) / panels
    return float(h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))
