import numpy as np
import pytest
from hypothesis import given, strategies as st

from thermogeo import embedding
from thermogeo.errors import NotEmbeddable


def log_profile(beta, c=0.0):
    return (lambda r: c + beta * np.log(r)), (lambda r: beta / np.asarray(r, dtype=float))


def test_constant_scale_is_planar_annulus():
    om, omp = (lambda r: 0.2 + 0 * r), (lambda r: 0 * np.asarray(r))
    prof = embedding.embed_radial(om, omp, 1.0, 2.0, 50)
    np.testing.assert_allclose(prof.z, 0.0, atol=1e-15)
    np.testing.assert_allclose(prof.rho, prof.R_samples * np.exp(0.2), rtol=1e-15)
    np.testing.assert_allclose(prof.slope, 0.0, atol=1e-15)


def test_half_power_profile_is_a_cone():
    om, omp = log_profile(-0.5)
    prof = embedding.embed_radial(om, omp, 1.0, 2.0, 200)
    np.testing.assert_allclose(prof.slope, np.sqrt(3.0), rtol=1e-12)
    np.testing.assert_allclose(prof.rho, np.sqrt(prof.R_samples), rtol=1e-14)
    # closed form z = sqrt(3) (rho - 1) with z(R0) = 0
    np.testing.assert_allclose(prof.z, np.sqrt(3.0) * (prof.rho - 1.0), atol=1e-12)


def test_vertical_cylinder_limit():
    om, omp = log_profile(-1.0)
    prof = embedding.embed_radial(om, omp, 1.0, 3.0, 20)
    np.testing.assert_allclose(prof.rho, 1.0, rtol=1e-14)
    np.testing.assert_allclose(prof.z, np.log(prof.R_samples), atol=1e-12)
    assert np.all(np.isinf(prof.slope))


@pytest.mark.parametrize("beta", [0.1, -2.5])
def test_not_embeddable_reports_radius(beta):
    om, omp = log_profile(beta)
    with pytest.raises(NotEmbeddable) as info:
        embedding.embed_radial(om, omp, 1.0, 2.0, 10)
    assert info.value.radius == pytest.approx(1.0)
    assert "violates" in str(info.value)


def test_constraint_violated_midway():
    # Omega' = 0.5 (R - 1.5): admissible below R = 1.5 only
    om = lambda r: 0.25 * (r - 1.5) ** 2  # noqa: E731
    omp = lambda r: 0.5 * (np.asarray(r) - 1.5)  # noqa: E731
    with pytest.raises(NotEmbeddable) as info:
        embedding.embed_radial(om, omp, 1.0, 2.0, 101)
    assert 1.5 < info.value.radius <= 1.52


def test_argument_validation():
    om, omp = log_profile(-0.5)
    with pytest.raises(ValueError):
        embedding.embed_radial(om, omp, 0.0, 1.0, 10)
    with pytest.raises(ValueError):
        embedding.embed_radial(om, omp, 1.0, 2.0, 1)
    prof = embedding.embed_radial(om, omp, 1.0, 2.0, 10)
    with pytest.raises(ValueError):
        embedding.export_surface(prof, 2)


def test_induced_metric_second_order():
    om = lambda r: -0.3 * np.log(r) - 0.05 * r  # noqa: E731
    omp = lambda r: -0.3 / np.asarray(r) - 0.05  # noqa: E731
    errs = [embedding.induced_metric_error(embedding.embed_radial(om, omp, 1.0, 2.0, n), om)
            for n in (101, 201)]
    assert errs[0] < 1e-5
    assert np.log2(errs[0] / errs[1]) > 1.9


@given(st.floats(-2.0, 0.0))
def test_induced_metric_matches_for_family(beta):
    om, omp = log_profile(beta)
    prof = embedding.embed_radial(om, omp, 1.0, 2.0, 2000)
    assert embedding.induced_metric_error(prof, om) < 1e-6
    assert prof.z[0] == 0.0
    assert np.all(np.diff(prof.z) >= 0)


@given(st.floats(-1.0, 0.0))
def test_rho_monotone_when_q_nonnegative(beta):
    om, omp = log_profile(beta)
    prof = embedding.embed_radial(om, omp, 1.0, 2.0, 64)
    assert np.all(np.diff(prof.rho) >= -1e-14)


def test_rho_decreases_below_cylinder_limit():
    om, omp = log_profile(-1.5)
    prof = embedding.embed_radial(om, omp, 1.0, 2.0, 64)
    assert np.all(np.diff(prof.rho) < 0)


def test_mesh_shape_and_obj():
    om, omp = log_profile(-0.5)
    prof = embedding.embed_radial(om, omp, 1.0, 2.0, 12)
    mesh = embedding.export_surface(prof, 64)
    assert mesh.vertices.shape == (12 * 64, 3)
    assert mesh.faces.shape == (2 * 11 * 64, 3)
    assert mesh.faces.min() == 0 and mesh.faces.max() == 12 * 64 - 1
    text = mesh.to_obj()
    lines = text.splitlines()
    assert text.endswith("\n") and "\r" not in text
    assert sum(ln.startswith("v ") for ln in lines) == 12 * 64
    assert sum(ln.startswith("f ") for ln in lines) == 2 * 11 * 64
    idx = np.array([[int(t) for t in ln.split()[1:]] for ln in lines if ln.startswith("f ")])
    assert idx.min() == 1
    # vertices lie on the surface of revolution
    r = np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1]).reshape(12, 64)
    np.testing.assert_allclose(r, np.repeat(prof.rho[:, None], 64, 1), rtol=1e-13)


@pytest.mark.parametrize("beta, expected", [(-0.5, np.pi), (0.0, 0.0), (-0.25, np.pi / 2)])
def test_apex_defect(beta, expected):
    om, omp = log_profile(beta)
    mesh = embedding.export_surface(embedding.embed_radial(om, omp, 1.0, 2.0, 400), 64)
    assert embedding.apex_angle_defect(mesh) == pytest.approx(expected, abs=1e-6)


def test_interior_vertices_flat():
    # a cone is developable: no Gaussian curvature away from the apex
    om, omp = log_profile(-0.5)
    mesh = embedding.export_surface(embedding.embed_radial(om, omp, 1.0, 2.0, 40), 64)
    assert np.max(np.abs(embedding.vertex_angle_defects(mesh))) < 1e-10
