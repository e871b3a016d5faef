"""Axisymmetric incompressible neo-Hookean annulus under a radial temperature field.

The material metric is ``exp(2 Omega(R)) diag(1, R**2)`` with
``Omega(R) = omega(T(R))`` and the deformation is ``(r(R), Theta)``.
Incompressibility gives ``r r' = R exp(2 Omega)``, hence

    r**2(R) = r1**2 + int_{R1}^{R} 2 xi exp(2 Omega(xi)) dxi,

and radial equilibrium fixes the pressure derivative

    p' = (2 mu R e / r**2) [2 (1 + R Omega') - R**2 e / r**2 - r**2 / (R**2 e)],

with ``e = exp(2 Omega)``.  The free energy is ``mu tr C`` (no volumetric
temperature term).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (ChartMismatch, NonPositiveRadius, ShootingDivergence, SingularF)
from .fields import Chart, MetricField, fd_derivative, fd_gradient
from .geometry import ConnectionField, SampledTensor, levi_civita
from .quadrature import _GL5_W, _GL5_X
from .thermal_metric import ExpansionLaw, jacobian

DEFAULT_PANELS = 2048
MAX_NEWTON_ITERATIONS = 200
BC_MODES = ("paper_datum", "traction_free")


@dataclass(frozen=True)
class NeoHookean2D:
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")


@dataclass(frozen=True)
class AxisymProblem:
    R1: float
    R2: float
    T_profile: Callable
    law: ExpansionLaw
    material: NeoHookean2D
    bc: str = "traction_free"
    T_derivative: Callable | None = None
    r1: float | None = None
    panels: int = DEFAULT_PANELS

    def __post_init__(self):
        if not 0 < self.R1 < self.R2:
            raise ValueError("need 0 < R1 < R2")
        if self.bc not in BC_MODES:
            raise ValueError(f"bc must be one of {BC_MODES}")
        if self.panels < 4:
            raise ValueError("need at least 4 panels")

    def omega(self, R):
        return self.law.omega(self.T_profile(np.asarray(R, dtype=float)))

    def omega_prime(self, R):
        R = np.asarray(R, dtype=float)
        if self.T_derivative is not None:
            dT = self.T_derivative(R)
        else:
            h = 1e-5 * R
            dT = (self.T_profile(R - 2 * h) - 8 * self.T_profile(R - h)
                  + 8 * self.T_profile(R + h) - self.T_profile(R + 2 * h)) / (12 * h)
        return self.law.alpha(self.T_profile(R)) * dT


@dataclass
class AxisymSolution:
    R_samples: np.ndarray
    r: np.ndarray
    p: np.ndarray
    P_rR: np.ndarray
    P_thTh: np.ndarray
    r1: float
    p0: float
    residual_equilibrium: float
    residual_bc: float
    incompressibility_error: float
    iterations: int = 0
    extras: dict = field(default_factory=dict)

    def columns(self) -> dict[str, np.ndarray]:
        return {"R": self.R_samples, "r": self.r, "p": self.p, "P_rR": self.P_rR,
                "P_thTh": self.P_thTh}


class _Quadrature:
    """Precomputed panel data for ``r**2`` and ``p`` on a fixed radial grid."""

    def __init__(self, problem: AxisymProblem):
        self.problem = problem
        self.edges = np.linspace(problem.R1, problem.R2, problem.panels + 1)
        lo, hi = self.edges[:-1], self.edges[1:]
        self.half = 0.5 * (hi - lo)
        self.nodes = 0.5 * (hi + lo)[:, None] + self.half[:, None] * _GL5_X
        self.Q_edges = np.concatenate([[0.0], np.cumsum(self.half * (self._g(self.nodes) @ _GL5_W))])
        # Q at each GL node: integral from the panel's left edge with a nested rule
        sub_half = 0.5 * (self.nodes - lo[:, None])
        sub_nodes = (0.5 * (self.nodes + lo[:, None]))[..., None] + sub_half[..., None] * _GL5_X
        self.Q_nodes = self.Q_edges[:-1, None] + sub_half * (self._g(sub_nodes) @ _GL5_W)
        self.e_nodes = np.exp(2 * problem.omega(self.nodes))
        self.w_nodes = problem.omega_prime(self.nodes)

    def _g(self, x):
        return 2 * x * np.exp(2 * self.problem.omega(x))

    def r2_edges(self, r1):
        return r1 ** 2 + self.Q_edges

    def pressure_increments(self, r1, mu):
        """``p(R) - p(R1)`` at every edge for inner radius ``r1``."""
        R, e, w = self.nodes, self.e_nodes, self.w_nodes
        r2 = r1 ** 2 + self.Q_nodes
        if np.any(r2 <= 0):
            raise NonPositiveRadius("r**2 became non-positive inside the annulus")
        dp = (2 * mu * R * e / r2) * (2 * (1 + R * w) - R ** 2 * e / r2 - r2 / (R ** 2 * e))
        return np.concatenate([[0.0], np.cumsum(self.half * (dp @ _GL5_W))])


def _stresses(R, r, p, e, mu):
    P_rR = 2 * mu * R / r - p * r / (R * e)
    P_thTh = 2 * mu / (R ** 2 * e) - p / r ** 2
    return P_rR, P_thTh


def _traction_residual(quad: _Quadrature, r1: float, p0: float, mu: float) -> np.ndarray:
    R = quad.edges[[0, -1]]
    r2 = quad.r2_edges(r1)[[0, -1]]
    if np.any(r2 <= 0) or r1 <= 0:
        raise NonPositiveRadius("inner radius must stay positive")
    p = p0 + quad.pressure_increments(r1, mu)[[0, -1]]
    e = np.exp(2 * quad.problem.omega(R))
    P, _ = _stresses(R, np.sqrt(r2), p, e, mu)
    return P / mu


def _shoot(quad: _Quadrature, mu: float, r1: float, p0: float) -> tuple[float, float, int]:
    """Damped Newton on ``(r1, p0)`` for ``P_rR(R1) = P_rR(R2) = 0``."""
    x = np.array([r1, p0 / mu])
    f = _traction_residual(quad, x[0], x[1] * mu, mu)
    for it in range(1, MAX_NEWTON_ITERATIONS + 1):
        if np.max(np.abs(f)) < 1e-13:
            return x[0], x[1] * mu, it - 1
        J = np.empty((2, 2))
        for k in range(2):
            h = 1e-7 * max(1.0, abs(x[k]))
            xp = x.copy()
            xp[k] += h
            J[:, k] = (_traction_residual(quad, xp[0], xp[1] * mu, mu) - f) / h
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise ShootingDivergence(f"singular shooting Jacobian at iteration {it}") from exc
        lam, norm0 = 1.0, np.linalg.norm(f)
        while True:
            xn = x + lam * step
            if xn[0] > 0:
                try:
                    fn = _traction_residual(quad, xn[0], xn[1] * mu, mu)
                    if np.linalg.norm(fn) < (1 - 1e-4 * lam) * norm0 or lam < 1e-10:
                        break
                except NonPositiveRadius:
                    pass
            lam *= 0.5
            if lam < 1e-12:
                raise ShootingDivergence(f"line search failed at iteration {it}")
        x, f = xn, fn
        if np.max(np.abs(step)) * lam < 1e-15 * max(1.0, np.max(np.abs(x))):
            return x[0], x[1] * mu, it
    if np.max(np.abs(f)) < 1e-10:
        return x[0], x[1] * mu, MAX_NEWTON_ITERATIONS
    raise ShootingDivergence(
        f"traction-free shooting did not converge in {MAX_NEWTON_ITERATIONS} iterations")


def solve_axisym(problem: AxisymProblem) -> AxisymSolution:
    """Deformation, pressure and PK1 stresses of the heated annulus.

    ``bc="paper_datum"`` sets ``p(R1) = 0`` with ``r1`` given or defaulting
    to the free-expansion radius ``R1 exp(Omega(R1))``.  ``bc="traction_free"``
    finds ``r1`` and ``p(R1)`` so that ``P_rR`` vanishes on both rims.

    Raises
    ------
    ShootingDivergence
        If the traction-free Newton iteration fails.
    NonPositiveRadius
        If ``r**2`` becomes non-positive.
    """
    mu = problem.material.mu
    quad = _Quadrature(problem)
    R = quad.edges
    r1_free = problem.R1 * np.exp(problem.omega(problem.R1))
    iterations = 0
    if problem.bc == "paper_datum":
        r1 = float(problem.r1) if problem.r1 is not None else float(r1_free)
        p0 = 0.0
    else:
        r1_guess = float(problem.r1) if problem.r1 is not None else float(r1_free)
        r1, p0, iterations = _shoot(quad, mu, r1_guess, 2 * mu)
    if r1 <= 0:
        raise NonPositiveRadius("inner deformed radius must be positive")
    r2 = quad.r2_edges(r1)
    if np.any(r2 <= 0):
        raise NonPositiveRadius("r**2 became non-positive inside the annulus")
    r = np.sqrt(r2)
    p = p0 + quad.pressure_increments(r1, mu)
    e = np.exp(2 * problem.omega(R))
    P_rR, P_thTh = _stresses(R, r, p, e, mu)
    sol = AxisymSolution(R, r, p, P_rR, P_thTh, r1, p0, 0.0, 0.0, 0.0, iterations)
    sol.residual_bc = (float(max(abs(P_rR[0]), abs(P_rR[-1]))) if problem.bc == "traction_free"
                       else float(abs(p[0])))
    sol.residual_equilibrium = equilibrium_residual(sol, problem)
    sol.incompressibility_error = incompressibility_error(sol, problem)
    return sol


# ---------------------------------------------------------------------------
# verification in the covariant balance law

_STRIP_POINTS = 5
_STRIP_WIDTH = 0.4


def strip_chart(R: np.ndarray) -> Chart:
    """Thin polar strip of the annulus on which the 2D balance law is evaluated."""
    return Chart(((float(R[0]), float(R[-1])), (0.0, _STRIP_WIDTH)), (R.size, _STRIP_POINTS), "polar")


def pk1_neo_hookean(F, G, g, mu: float, p) -> np.ndarray:
    """``P[a, A] = 2 mu F[a, B] G^{BA} - p (F^-1)[A, b] g^{ba}``.

    All inputs are arrays broadcast over a common sample shape; ``p`` may be
    a scalar, an array or a field with ``.values``.
    """
    F = np.asarray(F, dtype=float)
    Gv = G.values if hasattr(G, "values") else np.asarray(G, dtype=float)
    gv = g.values if hasattr(g, "values") else np.asarray(g, dtype=float)
    pv = p.values if hasattr(p, "values") else np.asarray(p, dtype=float)
    det = np.linalg.det(F)
    if np.any(~np.isfinite(det)) or np.any(np.abs(det) < 1e-14):
        raise SingularF("deformation gradient is singular")
    Finv = np.linalg.inv(F)
    return (2 * mu * np.einsum("...aB,...BA->...aA", F, np.linalg.inv(Gv))
            - pv[..., None, None] * np.einsum("...Ab,...ba->...aA", Finv, np.linalg.inv(gv)))


def divergence_PK1(P: np.ndarray, Gamma_material: ConnectionField,
                   gamma_spatial: ConnectionField, F: np.ndarray) -> SampledTensor:
    """``P^{aA}_{|A} = d_A P^{aA} + Gamma^A_{AB} P^{aB} + gamma^a_{bc} F^c_A P^{bA}``.

    ``gamma_spatial`` holds the spatial Christoffel symbols evaluated at the
    deformed positions, sampled on the material grid.
    """
    chart = Gamma_material.chart
    if gamma_spatial.chart != chart or P.shape[:-2] != chart.grid_shape:
        raise ChartMismatch("stress and connections must share the material grid")
    div = np.einsum("...aAA->...a", fd_gradient(chart, P))
    div = div + np.einsum("...AAB,...aB->...a", Gamma_material.coefficients, P)
    div = div + np.einsum("...abc,...cA,...bA->...a", gamma_spatial.coefficients, F, P)
    return SampledTensor(chart, div, max(Gamma_material.band, gamma_spatial.band) + 2)


def _strip_fields(sol: AxisymSolution, problem: AxisymProblem):
    chart = strip_chart(sol.R_samples)
    shape = chart.grid_shape
    R = chart.points[..., 0]
    r = np.broadcast_to(sol.r[:, None], shape)
    om, w = problem.omega, problem.omega_prime

    def G_func(x):
        out = np.zeros(x.shape[:-1] + (2, 2))
        e = np.exp(2 * om(x[..., 0]))
        out[..., 0, 0], out[..., 1, 1] = e, e * x[..., 0] ** 2
        return out

    def G_grad(x):
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        Rx = x[..., 0]
        e, wx = np.exp(2 * om(Rx)), w(Rx)
        out[..., 0, 0, 0] = 2 * wx * e
        out[..., 1, 1, 0] = e * (2 * Rx + 2 * wx * Rx ** 2)
        return out

    G = MetricField(chart, G_func, G_grad)
    g = np.zeros(shape + (2, 2))
    g[..., 0, 0], g[..., 1, 1] = 1.0, r ** 2
    gam = np.zeros(shape + (2, 2, 2))
    gam[..., 0, 1, 1] = -r
    gam[..., 1, 0, 1] = gam[..., 1, 1, 0] = 1.0 / r
    F = np.zeros(shape + (2, 2))
    F[..., 0, 0] = fd_derivative(r, 0, chart.spacing[0])
    F[..., 1, 1] = 1.0
    p = np.broadcast_to(sol.p[:, None], shape)
    return chart, G, g, ConnectionField(chart, gam, symmetric_lower=True), F, p


def equilibrium_residual(sol: AxisymSolution, problem: AxisymProblem) -> float:
    """Sup of the covariant PK1 divergence (both components) over interior samples."""
    chart, G, g, gam, F, p = _strip_fields(sol, problem)
    P = np.zeros(chart.grid_shape + (2, 2))
    P[..., 0, 0] = sol.P_rR[:, None]
    P[..., 1, 1] = sol.P_thTh[:, None]
    div = divergence_PK1(P, levi_civita(G), gam, F)
    return div.sup_norm()


def radial_equilibrium_residual(sol: AxisymSolution, problem: AxisymProblem) -> np.ndarray:
    """``dP^rR/dR + (1/R + 2 Omega') P^rR - r P^thTh`` on the radial samples."""
    R = sol.R_samples
    dP = fd_derivative(sol.P_rR, 0, R[1] - R[0])
    return dP + (1 / R + 2 * problem.omega_prime(R)) * sol.P_rR - sol.r * sol.P_thTh


def incompressibility_error(sol: AxisymSolution, problem: AxisymProblem) -> float:
    """``max |J - 1|`` with ``J = det F sqrt(det g / det G)`` and ``r'`` by differences."""
    chart, G, g, _, F, _ = _strip_fields(sol, problem)
    J = jacobian(F, G.values, g)
    return float(np.max(np.abs(J - 1.0)))


def cauchy_physical_stresses(sol: AxisymSolution, problem: AxisymProblem) -> tuple[np.ndarray, np.ndarray]:
    """Physical Cauchy stresses ``(sigma_rr, sigma_thth)`` (``J = 1``)."""
    R, r = sol.R_samples, sol.r
    r_prime = R * np.exp(2 * problem.omega(R)) / r
    return sol.P_rR * r_prime, sol.P_thTh * r ** 2
