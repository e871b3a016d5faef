"""Cylindrically symmetric stress-free embeddings of radially heated 2D sheets.

A planar sheet with radial log-scale factor ``Omega(R)`` relaxes to the
surface of revolution ``rho(R) = R exp(Omega)``, ``z(R)`` whose induced
metric equals ``exp(2 Omega)(dR**2 + R**2 dTheta**2)``.  This is possible
only while ``-2/R <= Omega'(R) <= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NotEmbeddable
from .quadrature import cumulative_gauss_legendre

CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class EmbeddingProfile:
    R_samples: np.ndarray
    rho: np.ndarray
    z: np.ndarray
    slope: np.ndarray  # dz/drho; +inf where rho'(R) = 0


@dataclass(frozen=True)
class SurfaceMesh:
    """Indexed triangle mesh; ``faces`` hold 0-based vertex indices."""

    vertices: np.ndarray
    faces: np.ndarray
    rings: int
    angular_samples: int

    def to_obj(self) -> str:
        lines = [f"v {x:.12e} {y:.12e} {z:.12e}" for x, y, z in self.vertices]
        lines += [f"f {i + 1} {j + 1} {k + 1}" for i, j, k in self.faces]
        return "\n".join(lines) + "\n"


def _q(R, omega_prime):
    return 1.0 + R * omega_prime(R)


def check_embeddable(omega_prime: Callable, R) -> None:
    """Raise :class:`NotEmbeddable` at the first ``R`` violating ``-2/R <= Omega' <= 0``."""
    R = np.asarray(R, dtype=float)
    w = np.asarray(omega_prime(R), dtype=float) * np.ones_like(R)
    tol = CONSTRAINT_TOL * (1.0 + 2.0 / R)
    bad = (w > tol) | (w < -2.0 / R - tol)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NotEmbeddable(
            f"Omega'(R) = {w[i]:.6e} at R = {R[i]:.6e} violates -2/R < Omega'(R) < 0",
            radius=float(R[i]))


def embed_radial(omega_profile: Callable, omega_prime: Callable, R0: float, R1: float,
                 samples: int) -> EmbeddingProfile:
    """Surface of revolution isometric to the heated sheet on ``[R0, R1]``.

    ``z(R0) = 0`` and the nondecreasing branch of ``z`` is chosen.  ``z`` is
    integrated with five-point Gauss-Legendre on every sample interval.
    """
    if not 0 < R0 < R1:
        raise ValueError("need 0 < R0 < R1")
    if samples < 2:
        raise ValueError("need at least two samples")
    R = np.linspace(R0, R1, int(samples))
    check_embeddable(omega_prime, R)

    def dz_dR(r):
        q = _q(r, omega_prime)
        return np.exp(omega_profile(r)) * np.sqrt(np.clip(1.0 - q * q, 0.0, None))

    nodes = np.linspace(R0, R1, 9)[1:-1]
    check_embeddable(omega_prime, nodes)
    z = cumulative_gauss_legendre(dz_dR, R)
    rho = R * np.exp(omega_profile(R))
    q = _q(R, omega_prime)
    s = np.sqrt(np.clip(1.0 - q * q, 0.0, None))
    vertical = np.abs(q) <= CONSTRAINT_TOL
    slope = np.where(vertical, np.inf, s / np.where(vertical, 1.0, q))
    return EmbeddingProfile(R, rho, z, slope)


def induced_metric_error(profile: EmbeddingProfile, omega_profile: Callable) -> float:
    """``max |(dz**2 + drho**2) / (exp(2 Omega) dR**2) - 1|`` over sample intervals.

    ``Omega`` is taken at interval midpoints, making this a second-order
    discrete check of the first fundamental form.
    """
    R = profile.R_samples
    dR, dz, drho = np.diff(R), np.diff(profile.z), np.diff(profile.rho)
    mid = 0.5 * (R[1:] + R[:-1])
    ratio = (dz ** 2 + drho ** 2) / (np.exp(2 * omega_profile(mid)) * dR ** 2)
    return float(np.max(np.abs(ratio - 1.0)))


def export_surface(profile: EmbeddingProfile, angular_samples: int) -> SurfaceMesh:
    """Triangulate the surface of revolution; the angular seam is closed."""
    m = int(angular_samples)
    if m < 3:
        raise ValueError("need at least three angular samples")
    n = profile.R_samples.size
    phi = 2 * np.pi * np.arange(m) / m
    rho, z = profile.rho[:, None], profile.z[:, None]
    verts = np.stack([rho * np.cos(phi), rho * np.sin(phi), np.broadcast_to(z, (n, m))],
                     axis=-1).reshape(-1, 3)
    i = np.arange(n - 1)[:, None]
    j = np.arange(m)[None, :]
    jn = (j + 1) % m
    a, b = i * m + j, i * m + jn
    c, d = (i + 1) * m + j, (i + 1) * m + jn
    faces = np.concatenate([np.stack([a, b, d], -1).reshape(-1, 3),
                            np.stack([a, d, c], -1).reshape(-1, 3)])
    return SurfaceMesh(verts, faces.astype(np.int64), n, m)


def vertex_angle_defects(mesh: SurfaceMesh) -> np.ndarray:
    """``2 pi - sum of incident triangle angles`` at every interior-ring vertex."""
    V, F = mesh.vertices, mesh.faces
    total = np.zeros(len(V))
    for k in range(3):
        p, q, r = V[F[:, k]], V[F[:, (k + 1) % 3]], V[F[:, (k + 2) % 3]]
        u, v = q - p, r - p
        cos = np.einsum("ij,ij->i", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        np.add.at(total, F[:, k], np.arccos(np.clip(cos, -1.0, 1.0)))
    m = mesh.angular_samples
    return (2 * np.pi - total)[m:-m]


def apex_angle_defect(mesh: SurfaceMesh) -> float:
    """Cone-angle defect at the (extrapolated) apex.

    Unrolling the band between the two innermost rings gives the developed
    angle ``2 pi * (radial growth) / (slant distance)``, where the radial
    growth is read off the regular-polygon perimeters.  The defect is
    ``2 pi`` minus that angle; it is zero for a flat annulus.
    """
    m = mesh.angular_samples
    r0, r1 = mesh.vertices[:m], mesh.vertices[m:2 * m]

    def perimeter(ring):
        return float(np.sum(np.linalg.norm(np.roll(ring, -1, axis=0) - ring, axis=1)))

    growth = (perimeter(r1) - perimeter(r0)) / (2 * m * np.sin(np.pi / m))
    slant = float(np.mean(np.linalg.norm(r1 - r0, axis=1)))
    return 2 * np.pi * (1.0 - growth / slant)
