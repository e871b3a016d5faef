"""Geometric linearization of thermoelasticity and its classical counterpart.

At a stress-free Euclidean reference (``G = g = delta``, ``F = I``, material
and spatial Cartesian axes aligned) the linearized balance of momentum is

    A[a, A, b, B] U_{b,AB} + (B[a, A, C, D] G_CD beta)_{,A}
        + (N/2) beta_{,B} P[a, B] = 0,

with ``A = dP/dF``, ``B = dP/dG`` and ``beta = 2 alpha dT/deps``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .errors import ChartMismatch, NonDifferentiable, SingularSystem
from .fields import MetricField, ScalarField, VectorField
from .geometry import SampledTensor, levi_civita

FD_STEP = 1e-3
RICHARDSON_TOL = 1e-6


@dataclass(frozen=True)
class SVKModuli:
    lam: float
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not 3 * self.lam + 2 * self.mu > 0:
            raise ValueError("3 lambda + 2 mu must be positive")


@dataclass(frozen=True)
class ElasticTensors:
    """Constant-coefficient tensors ``A[a,A,b,B]``, ``B[a,A,C,D]``, ``C_elast[A,B,C,D]``."""

    A: np.ndarray
    B: np.ndarray
    C_elast: np.ndarray

    def b_contraction(self) -> np.ndarray:
        """``B[a, A, C, C]`` (``G = delta``)."""
        return np.einsum("aAcc->aA", self.B)


@dataclass(frozen=True)
class LinearizedLoad:
    beta: ScalarField
    prestress: np.ndarray | None = None


def svk_tensors(moduli: SVKModuli, dim: int = 3) -> ElasticTensors:
    """SVK tensors at the stress-free Euclidean reference in aligned Cartesian axes."""
    lam, mu = moduli.lam, moduli.mu
    d = np.eye(dim)
    A = (lam * np.einsum("aA,bB->aAbB", d, d)
         + mu * (np.einsum("ab,AB->aAbB", d, d) + np.einsum("aB,bA->aAbB", d, d)))
    B = (-0.5 * lam * np.einsum("CD,aA->aACD", d, d)
         - 0.5 * mu * (np.einsum("AC,aD->aACD", d, d) + np.einsum("AD,aC->aACD", d, d)))
    C = 0.5 * A  # dS/dC with the SVK law; A = 2 C at this reference
    return ElasticTensors(A, B, C)


def svk_second_pk(C: np.ndarray, G: np.ndarray, moduli: SVKModuli) -> np.ndarray:
    """``S = lam tr(E) G^-1 + 2 mu G^-1 E G^-1`` with ``E = (C - G)/2``."""
    Ginv = np.linalg.inv(G)
    E = 0.5 * (C - G)
    trE = np.einsum("...ij,...ij->...", Ginv, E)
    return (moduli.lam * trE[..., None, None] * Ginv
            + 2 * moduli.mu * np.einsum("...ik,...kl,...lj->...ij", Ginv, E, Ginv))


def svk_pk1(F: np.ndarray, G: np.ndarray, moduli: SVKModuli) -> np.ndarray:
    """``P = F S(C, G)`` with ``C = F^T F`` (Euclidean ambient space)."""
    C = np.einsum("...aA,...aB->...AB", F, F)
    return np.einsum("...aB,...BA->...aA", F, svk_second_pk(C, G, moduli))


def numerical_tensors(pk1: Callable[[np.ndarray, np.ndarray], np.ndarray], F: np.ndarray,
                      G: np.ndarray, h: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference ``dP/dF`` and symmetrized ``dP/dG`` of a stress map."""
    d = F.shape[-1]
    A = np.zeros((d, d, d, d))
    B = np.zeros((d, d, d, d))
    for b in range(d):
        for Bi in range(d):
            e = np.zeros((d, d))
            e[b, Bi] = h
            A[:, :, b, Bi] = (pk1(F + e, G) - pk1(F - e, G)) / (2 * h)
    for c in range(d):
        for D in range(d):
            e = np.zeros((d, d))
            e[c, D] += 0.5 * h
            e[D, c] += 0.5 * h
            B[:, :, c, D] = (pk1(F, G + e) - pk1(F, G - e)) / (2 * h)
    return A, B


def _check_chart(U: VectorField, load: LinearizedLoad):
    if U.chart != load.beta.chart:
        raise ChartMismatch("U and beta live on different charts")
    if U.chart.coordinate_kind != "cartesian":
        raise ChartMismatch("the linearized operator is written in Cartesian coordinates")


def linearized_operator(tensors: ElasticTensors, load: LinearizedLoad, U: VectorField) -> SampledTensor:
    """Geometric linearized momentum residual for constant ``A`` and ``B``."""
    _check_chart(U, load)
    chart = U.chart
    n = chart.dimension
    dbeta = load.beta.gradient
    res = np.einsum("aAbB,...bAB->...a", tensors.A, U.hessian)
    res = res + np.einsum("aA,...A->...a", tensors.b_contraction(), dbeta)
    if load.prestress is not None:
        P = np.asarray(load.prestress, dtype=float)
        res = res + 0.5 * n * np.einsum("...B,...aB->...a", dbeta, P)
    band = max(U.hessian_band, load.beta.gradient_band)
    return SampledTensor(chart, res, band)


def classical_navier_residual(moduli: SVKModuli, alpha: float, deltaT: ScalarField,
                              u: VectorField) -> SampledTensor:
    """``mu lap u + (lam + mu) grad div u - (3 lam + 2 mu) alpha grad dT``."""
    if u.chart != deltaT.chart:
        raise ChartMismatch("u and deltaT live on different charts")
    lam, mu = moduli.lam, moduli.mu
    H = u.hessian  # [..., i, j, k] = d_j d_k u_i
    lap = np.einsum("...ijj->...i", H)
    grad_div = np.einsum("...jji->...i", H)
    res = mu * lap + (lam + mu) * grad_div - (3 * lam + 2 * mu) * alpha * deltaT.gradient
    return SampledTensor(u.chart, res, max(u.hessian_band, deltaT.gradient_band))


def beta_field(alpha: float | Callable, deltaT: ScalarField, T: ScalarField | None = None) -> ScalarField:
    """``beta = 2 alpha(T) dT``; constant ``alpha`` keeps analytic partials."""
    if np.isscalar(alpha):
        a = float(alpha)
        return deltaT.map(lambda t: 2 * a * t, lambda t: 2 * a + 0 * t, lambda t: 0 * t)
    vals = 2 * alpha(T.values) * deltaT.values
    return ScalarField.from_samples(deltaT.chart, vals, band=deltaT.band)


def dgamma_trace_derivative(G: MetricField, beta: ScalarField, eps: float = 1e-3) -> SampledTensor:
    """Central difference in ``eps`` of ``Gamma^A_{AB}`` along ``G_eps = exp(eps beta) G``."""
    if G.chart != beta.chart:
        raise ChartMismatch("G and beta live on different charts")

    def trace(e):
        half = beta.map(lambda t: 0.5 * e * t, lambda t: 0.5 * e + 0 * t, lambda t: 0 * t)
        return levi_civita(MetricField.conformal_to(G, half)).trace()

    deriv = (trace(eps) - trace(-eps)) / (2 * eps)
    return SampledTensor(G.chart, deriv, max(G.gradient_band, beta.gradient_band))


# ---------------------------------------------------------------------------
# one-dimensional rod


@dataclass
class Rod1DSolution:
    x: np.ndarray
    u: np.ndarray
    sigma: np.ndarray

    def columns(self) -> dict[str, np.ndarray]:
        return {"x": self.x, "u": self.u, "sigma": self.sigma}


def solve_linearized_1d(moduli: SVKModuli, alpha: float, deltaT: Callable,
                        bc: dict, n: int, length: float = 1.0) -> Rod1DSolution:
    """Finite-volume solve of ``((lam + 2 mu) u' - (3 lam + 2 mu) alpha dT)' = 0``.

    ``bc`` maps ``"left"`` and ``"right"`` to ``("displacement", value)`` or
    ``("traction", value)``.  With tractions at both ends the rigid
    translation is fixed by ``u(0) = 0``; unequal end tractions have no
    equilibrium.

    Raises
    ------
    SingularSystem
        For incompatible traction data.
    """
    if n < 16:
        raise ValueError("n must be at least 16")
    kinds = {}
    for side in ("left", "right"):
        kind, value = bc[side]
        if kind not in ("displacement", "traction"):
            raise ValueError(f"unknown boundary condition {kind!r}")
        kinds[side] = (kind, float(value))
    lam, mu = moduli.lam, moduli.mu
    k, m = lam + 2 * mu, (3 * lam + 2 * mu) * alpha
    x = np.linspace(0.0, length, n)
    h = x[1] - x[0]
    xm = 0.5 * (x[1:] + x[:-1])
    th = m * np.asarray(deltaT(xm), dtype=float) * np.ones_like(xm)
    (lk, lv), (rk, rv) = kinds["left"], kinds["right"]
    if lk == rk == "traction" and abs(lv - rv) > 1e-12 * max(1.0, abs(lv), abs(rv)):
        raise SingularSystem("end tractions differ; the free rod has no equilibrium")
    ab = np.zeros((3, n))
    rhs = np.zeros(n)
    # interior: sigma_{i+1/2} - sigma_{i-1/2} = 0
    ab[0, 2:] = k / h
    ab[1, 1:-1] = -2 * k / h
    ab[2, :-2] = k / h
    rhs[1:-1] = th[1:] - th[:-1]
    if lk == "displacement" or rk == "traction" and lk == "traction":
        ab[1, 0], ab[0, 1] = 1.0, 0.0
        rhs[0] = lv if lk == "displacement" else 0.0
    else:  # sigma_{1/2} = t
        ab[1, 0], ab[0, 1] = -k / h, k / h
        rhs[0] = lv + th[0]
    if rk == "displacement":
        ab[1, -1], ab[2, -2] = 1.0, 0.0
        rhs[-1] = rv
    else:
        ab[1, -1], ab[2, -2] = k / h, -k / h
        rhs[-1] = rv + th[-1]
    u = solve_banded((1, 1), ab, rhs)
    if not np.all(np.isfinite(u)):
        raise SingularSystem("rod system is singular")
    sigma = k * np.gradient(u, x, edge_order=2) - m * np.asarray(deltaT(x), dtype=float) * np.ones_like(x)
    return Rod1DSolution(x, u, sigma)


# ---------------------------------------------------------------------------
# the B-C condition


def _sym_unit(d: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((d, d))
    e[i, j] += 0.5
    e[j, i] += 0.5
    return e


def _mixed(psi, C, G, dC1, dG1, dC2, dG2, h):
    f = lambda s, t: psi(C + s * dC1 + t * dC2, G + s * dG1 + t * dG2)  # noqa: E731
    return (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)


def _richardson_mixed(psi, C, G, dirs, h):
    vals = [_mixed(psi, C, G, *dirs, h / 2 ** k) for k in range(3)]
    r1 = (4 * vals[1] - vals[0]) / 3
    r2 = (4 * vals[2] - vals[1]) / 3
    if not (np.isfinite(r1) and np.isfinite(r2)):
        raise NonDifferentiable("free energy is not finite near the reference")
    if abs(r1 - r2) > RICHARDSON_TOL * (1 + abs(r2)):
        raise NonDifferentiable(
            f"Richardson extrapolation did not settle ({r1:.6e} vs {r2:.6e})")
    return r2


@dataclass
class BCCheck:
    residual: float
    C_contraction: np.ndarray  # C[l, j, k, k]
    B_contraction: np.ndarray  # B[l, j, k, k]


def bc_condition_check(free_energy: Callable[[np.ndarray, np.ndarray], float], dim: int = 3,
                       h: float = FD_STEP) -> BCCheck:
    """``max |B_ljkk + C_ljkk|`` at the reference ``C = G = I``.

    ``C = 2 d2Psi/dC dC`` (i.e. ``dS/dC``) and ``B = 2 d2Psi/dC dG``
    (``dP/dG`` at ``F = I``), both from mixed central differences with
    Richardson extrapolation.  Only the contractions with ``delta`` are
    needed, so each entry is a second directional derivative along a
    symmetric unit direction and the identity.

    Raises
    ------
    NonDifferentiable
        If the extrapolated derivatives do not settle.
    """
    I = np.eye(dim)
    Z = np.zeros((dim, dim))
    Cc = np.zeros((dim, dim))
    Bc = np.zeros((dim, dim))
    for l in range(dim):
        for j in range(l, dim):
            e = _sym_unit(dim, l, j)
            Cc[l, j] = Cc[j, l] = 2 * _richardson_mixed(free_energy, I, I, (e, Z, I, Z), h)
            Bc[l, j] = Bc[j, l] = 2 * _richardson_mixed(free_energy, I, I, (e, Z, Z, I), h)
    return BCCheck(float(np.max(np.abs(Bc + Cc))), Cc, Bc)


# test free energies: Psi(C, G) on symmetric matrices


def svk_energy(moduli: SVKModuli) -> Callable:
    def psi(C, G):
        Ginv = np.linalg.inv(G)
        E = 0.5 * (C - G)
        A = Ginv @ E
        return 0.5 * moduli.lam * np.trace(A) ** 2 + moduli.mu * np.trace(A @ A)
    return psi


def compressible_neo_hookean_energy(lam: float, mu: float) -> Callable:
    """``mu/2 (tr(C G^-1) - 3) - mu ln J + lam/2 (ln J)**2``, ``J = sqrt(det C / det G)``."""
    def psi(C, G):
        lnJ = 0.5 * (np.log(np.linalg.det(C)) - np.log(np.linalg.det(G)))
        n = C.shape[-1]
        return 0.5 * mu * (np.trace(C @ np.linalg.inv(G)) - n) - mu * lnJ + 0.5 * lam * lnJ ** 2
    return psi


def fiber_energy(k: float, direction) -> Callable:
    """Anisotropic, scale-invariant term ``k/2 (a.C.a / a.G.a - 1)**2``."""
    a = np.asarray(direction, dtype=float)

    def psi(C, G):
        return 0.5 * k * (a @ C @ a / (a @ G @ a) - 1.0) ** 2
    return psi


def sum_energies(*energies: Callable) -> Callable:
    return lambda C, G: sum(e(C, G) for e in energies)


def trace_energy_with_G(mu: float) -> Callable:
    """``mu C:G^-1``: not stress-free at the reference, so the condition fails (``2 mu``)."""
    return lambda C, G: mu * np.trace(C @ np.linalg.inv(G))


def svk_ignoring_G(moduli: SVKModuli) -> Callable:
    """SVK written with ``E = (C - I)/2``: blind to ``G``, violates the condition."""
    def psi(C, G):
        E = 0.5 * (C - np.eye(C.shape[-1]))
        return 0.5 * moduli.lam * np.trace(E) ** 2 + moduli.mu * np.trace(E @ E)
    return psi
