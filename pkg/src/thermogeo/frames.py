"""Orthonormal material frames, the elastic part of ``F`` and frame connections.

Layout
------
``FrameField.F_hat[..., A, B]`` is the ``B``-th coordinate component of the
frame vector ``E_A``; the dual coframe is ``F_hat_inv[..., A, B]`` with
``sum_B F_hat[A, B] F_hat_inv[C, B] = delta_AC``.  Frame partials are
``dF_hat[..., A, B, e] = d F_hat[A, B] / dX^e`` and ``ddF_hat`` appends a
second derivative index.

Three-index frame quantities ``c[A, B, C]``, ``Gamma_bar[A, B, C]`` and the
frame torsion ``T[A, B, C]`` carry the upper index last, i.e. ``c_AB^C``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ChartMismatch, SingularMetric
from .fields import FD_BAND, Chart, MetricField, ScalarField, fd_gradient
from .geometry import ConnectionField, SampledTensor

CONFORMAL_DETECT_TOL = 1e-14


@dataclass(eq=False)
class FrameField:
    chart: Chart
    F_hat: np.ndarray
    F_hat_inv: np.ndarray | None = None
    dF_hat: np.ndarray | None = None
    ddF_hat: np.ndarray | None = None
    band: int = 0

    def __post_init__(self):
        if self.F_hat_inv is None:
            det = np.linalg.det(self.F_hat)
            if np.any(~np.isfinite(det)) or np.any(np.abs(det) < 1e-300):
                raise SingularMetric("frame matrix is singular")
            self.F_hat_inv = np.swapaxes(np.linalg.inv(self.F_hat), -1, -2)

    def derivative(self) -> np.ndarray:
        return self.dF_hat if self.dF_hat is not None else fd_gradient(self.chart, self.F_hat)

    @property
    def derivative_band(self) -> int:
        return self.band if self.dF_hat is not None else self.band + FD_BAND

    def second_derivative(self) -> np.ndarray:
        if self.ddF_hat is not None:
            return self.ddF_hat
        dd = fd_gradient(self.chart, self.derivative())
        return 0.5 * (dd + np.swapaxes(dd, -1, -2))

    @property
    def second_derivative_band(self) -> int:
        return self.band if self.ddF_hat is not None else self.derivative_band + FD_BAND

    def inverse_derivative(self) -> np.ndarray:
        """``d F_hat_inv[A, B] / dX^e`` from ``dN = -N dM^T N``."""
        N, dM = self.F_hat_inv, self.derivative()
        return -np.einsum("...ab,...cbe,...cd->...ade", N, dM, N)

    def inverse_second_derivative(self) -> np.ndarray:
        N, dM, ddM = self.F_hat_inv, self.derivative(), self.second_derivative()
        dN = self.inverse_derivative()
        return -(np.einsum("...abe,...cbf,...cd->...adef", dN, dM, N)
                 + np.einsum("...ab,...cbef,...cd->...adef", N, ddM, N)
                 + np.einsum("...ab,...cbf,...cde->...adef", N, dM, dN))

    def orthonormality_residual(self, G: MetricField) -> float:
        M = self.F_hat
        gram = np.einsum("...ac,...bd,...cd->...ab", M, M, G.values)
        return float(np.max(np.abs(gram - np.eye(self.chart.dimension))))

    def inverse_residual(self) -> float:
        prod = np.einsum("...ab,...cb->...ac", self.F_hat, self.F_hat_inv)
        return float(np.max(np.abs(prod - np.eye(self.chart.dimension))))


def scaled_identity_frame(vartheta: ScalarField, power: float) -> FrameField:
    """Frame ``vartheta**power * I`` with analytic partials when ``vartheta`` has them."""
    chart = vartheta.chart
    d = chart.dimension
    eye = np.eye(d)
    v, p = vartheta.values, float(power)
    M = (v ** p)[..., None, None] * eye
    if vartheta.grad is None or vartheta.hess is None:
        return FrameField(chart, M, band=vartheta.band)
    g, h = vartheta.gradient, vartheta.hessian
    dM = (p * v ** (p - 1))[..., None] * g
    ddM = ((p * (p - 1) * v ** (p - 2))[..., None, None] * g[..., :, None] * g[..., None, :]
           + (p * v ** (p - 1))[..., None, None] * h)
    return FrameField(chart, M, (v ** -p)[..., None, None] * eye,
                      eye[:, :, None] * dM[..., None, None, :],
                      eye[:, :, None, None] * ddM[..., None, None, :, :])


def conformal_frame(vartheta: ScalarField) -> FrameField:
    """Orthonormal frame ``vartheta**-1 I`` of ``vartheta**2 delta``."""
    return scaled_identity_frame(vartheta, -1.0)


def _check_rotation(L: np.ndarray, d: int) -> None:
    err = np.max(np.abs(np.einsum("...ab,...cb->...ac", L, L) - np.eye(d)))
    if err > 1e-10:
        raise ValueError(f"gauge is not orthogonal (residual {err:.3e})")


def orthonormal_frame(G: MetricField, gauge: np.ndarray | Callable | None = None) -> FrameField:
    """Orthonormal frame of ``G``: inverse Cholesky factor, optionally rotated.

    A metric recognized as ``scalar * delta`` gets the frame
    ``scalar**-1/2 * I``; with an analytic conformal factor the frame
    partials are analytic too.  ``gauge`` is a rotation ``Lambda[A, C]``
    (constant array, sampled array or callable) giving ``F' = Lambda F``.
    """
    chart = G.chart
    d = chart.dimension
    G.check_positive_definite()
    g = G.values
    diag = np.einsum("...ii->...i", g)
    off = g - diag[..., :, None] * np.eye(d)
    scalar_like = (np.max(np.abs(off) / diag.max(axis=-1)[..., None, None]) < CONFORMAL_DETECT_TOL
                   and np.max(np.abs(diag - diag[..., :1])) <= CONFORMAL_DETECT_TOL * np.max(diag))
    frame = None
    if scalar_like and G.conformal is not None:
        omega, base = G.conformal
        if (omega.grad is not None and omega.hess is not None
                and np.max(np.abs(base.values - np.eye(d))) == 0.0):
            frame = conformal_frame(omega.map(np.exp, np.exp, np.exp))
    if frame is None:
        if scalar_like:
            M = (diag[..., 0] ** -0.5)[..., None, None] * np.eye(d)
        else:
            M = np.linalg.inv(np.linalg.cholesky(g))  # rows satisfy M G M^T = I
        frame = FrameField(chart, M, band=G.band)
    if gauge is None:
        return frame
    L = gauge(chart.points) if callable(gauge) else np.asarray(gauge, dtype=float)
    _check_rotation(L, d)
    M = np.einsum("...ac,...cb->...ab", L, frame.F_hat)
    if L.ndim == 2 and frame.dF_hat is not None:
        return FrameField(chart, M, None, np.einsum("ac,...cbe->...abe", L, frame.dF_hat),
                          np.einsum("ac,...cbef->...abef", L, frame.ddF_hat), frame.band)
    return FrameField(chart, M, band=frame.band)


def elastic_part(F, frame: FrameField) -> np.ndarray:
    """``F^a_A`` written in the frame: ``Fe[a, A] = F[a, B] F_hat[A, B]``."""
    F = np.asarray(F, dtype=float)
    if F.shape[:-2] not in ((), frame.chart.grid_shape):
        raise ChartMismatch("F is not sampled on the frame's grid")
    return np.einsum("...aB,...AB->...aA", F, frame.F_hat)


def commutation_coefficients(frame: FrameField) -> SampledTensor:
    """``[E_A, E_B] = c_AB^C E_C`` stored as ``c[A, B, C]``."""
    M, N, dM = frame.F_hat, frame.F_hat_inv, frame.derivative()
    t = np.einsum("...ae,...bde->...abd", M, dM)
    c = np.einsum("...cd,...abd->...abc", N, t - np.swapaxes(t, -2, -3))
    return SampledTensor(frame.chart, c, frame.derivative_band)


def frame_connection(frame: FrameField, Gamma: ConnectionField) -> SampledTensor:
    """``nabla_{E_A} E_B = Gamma_bar[A, B, C] E_C`` for a coordinate connection."""
    if frame.chart != Gamma.chart:
        raise ChartMismatch("frame and connection live on different charts")
    M, N, dM = frame.F_hat, frame.F_hat_inv, frame.derivative()
    inner = dM + np.einsum("...be,...fde->...bfd", M, Gamma.coefficients)
    gbar = np.einsum("...ad,...cf,...bfd->...abc", M, N, inner)
    return SampledTensor(frame.chart, gbar, max(frame.derivative_band, Gamma.band))


def noncoordinate_torsion(frame_conn: SampledTensor, c: SampledTensor) -> SampledTensor:
    """``T_AB^C = Gamma_bar_AB^C - Gamma_bar_BA^C - c_AB^C``."""
    if frame_conn.chart != c.chart:
        raise ChartMismatch("inputs live on different charts")
    g = frame_conn.values
    return SampledTensor(c.chart, g - np.swapaxes(g, -2, -3) - c.values,
                         max(frame_conn.band, c.band))


def ap_connection(frame: FrameField) -> ConnectionField:
    """Connection for which every frame vector ``E_A`` is covariantly constant.

    ``Gamma^I_{JK} = sum_A E_A^I d_J E^A_K`` (``J`` the differentiation
    direction).  It is flat and in general has torsion.
    """
    M, N = frame.F_hat, frame.F_hat_inv
    dN = frame.inverse_derivative()
    gamma = np.einsum("...ai,...akj->...ijk", M, dN)
    derivs = None
    if frame.ddF_hat is not None:
        ddN = frame.inverse_second_derivative()
        derivs = (np.einsum("...aie,...akj->...ijke", frame.derivative(), dN)
                  + np.einsum("...ai,...akje->...ijke", M, ddN))
    return ConnectionField(frame.chart, gamma, derivs, band=frame.derivative_band)


def thermal_ap_connection(vartheta: ScalarField, form: str = "expansion") -> ConnectionField:
    """The thermal AP connection of ``F_T = vartheta I`` in one of two forms.

    ``form="expansion"`` keeps the columns of ``F_T`` parallel,
    ``Gamma^I_{JK} = (F_T)^I_A d_K (F_T^-1)^A_J``; ``form="orthonormal"`` keeps
    the orthonormal frame ``F_T^-1`` parallel,
    ``Gamma^A_{BC} = (F_T^-1)^A_M d_B (F_T)^M_C``.  Both are flat with torsion.
    """
    if form == "expansion":
        return ap_connection(scaled_identity_frame(vartheta, 1.0))
    if form == "orthonormal":
        return ap_connection(scaled_identity_frame(vartheta, -1.0))
    raise ValueError(f"unknown form {form!r}")


def parallel_residual(frame: FrameField, connection: ConnectionField) -> SampledTensor:
    """``nabla_J E_A^I = d_J E_A^I + Gamma^I_{JK} E_A^K`` stored as ``[A, I, J]``."""
    res = frame.derivative() + np.einsum("...ijk,...ak->...aij", connection.coefficients,
                                         frame.F_hat)
    return SampledTensor(frame.chart, res, max(frame.derivative_band, connection.band))
