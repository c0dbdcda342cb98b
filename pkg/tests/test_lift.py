import math

import numpy as np
import pytest

from schwarzlift import jets
from schwarzlift.errors import BoundaryIndex, InversionPole
from schwarzlift.harmonic import HarmonicMap, conformal_factor, harmonic_schwarzian, curvature_term
from schwarzlift.jets import Z
from schwarzlift.lift import (SpaceMobius, ahlfors_s1_lemma1, ahlfors_s1_numeric,
                              apply_space_mobius, curve_derivatives, gauss_normal, lift_mesh,
                              lift_point, lift_points, lift_segment, read_ply, s1_from_derivatives, s1_profile,
                              surface_normal, write_curve_csv, write_obj, write_ply)
from schwarzlift.quadrature import path_integral

from conftest import disk_points

PI = math.pi
C = 60.0


def catenoid_coords(z, c=C):
    x, y = z.real, z.imag
    rad = c * np.exp(PI * x) + np.exp(-PI * x) / c
    return np.stack([rad * np.cos(PI * y), rad * np.sin(PI * y), 2 * PI * x], axis=-1)


def poly_map(a=0.2, b=0.3 + 0.1j, c=0.5):
    h = Z + a * Z * Z
    q = b + c * Z
    g = jets.integral(q * q * (1 + 2 * a * Z))
    return HarmonicMap(h, g, q)


def test_lift_at_base_point(catenoid60):
    m = catenoid60.realized
    p = lift_point(m, 0.0)
    assert p.w == 0 and p.u == pytest.approx(C + 1 / C, rel=1e-15) and p.v == 0


def test_lift_matches_catenoid_parametrization(catenoid60):
    z = disk_points(200, 0.99)
    got = lift_points(catenoid60.realized, z)
    assert np.allclose(got, catenoid_coords(z), rtol=0, atol=1e-9)


def test_cut_point_coincidence(catenoid60):
    ends = lift_points(catenoid60.realized, np.array([1j, -1j]))
    target = np.array([-(C + 1 / C), 0, 0])
    assert np.max(np.abs(ends - target)) <= 1e-9


def test_height_path_independence():
    a, b, c = 0.2, 0.3 + 0.1j, 0.5
    m = poly_map(a, b, c)
    z = disk_points(30, 0.9)
    w = lift_points(m, z)[:, 2]

    def integrand(t):
        return (1 + 2 * a * t) * (b + c * t)

    bent = np.array([2 * path_integral(integrand, [0, zk.real, zk]).imag for zk in z])
    # antiderivative of (1 + 2a t)(b + c t)
    exact = 2 * np.imag(b * z + (c / 2 + a * b) * z ** 2 + 2 * a * c * z ** 3 / 3)
    assert np.max(np.abs(w - bent)) <= 1e-9
    assert np.max(np.abs(w - exact)) <= 1e-10


def test_surface_normal_properties():
    m = poly_map()
    z = disk_points(50)
    n = surface_normal(m, z)
    assert np.allclose(np.linalg.norm(n, axis=-1), 1, atol=1e-14)
    xx, _ = curve_derivatives(m, z, 1.0)
    xy, _ = curve_derivatives(m, z, 1j)
    assert np.max(np.abs(np.sum(n * xx, axis=-1))) <= 1e-9 * np.max(np.abs(xx))
    assert np.max(np.abs(np.sum(n * xy, axis=-1))) <= 1e-9 * np.max(np.abs(xy))
    assert np.allclose(n, gauss_normal(m, z), atol=1e-12)


def test_planar_normal_is_vertical():
    m = HarmonicMap(jets.exp(Z), 0 * Z, 0 * Z)
    n = surface_normal(m, disk_points(20))
    assert np.allclose(np.abs(n[:, 2]), 1) and np.allclose(n[:, 2], n[0, 2])


def test_catenoid_normal_at_origin(catenoid60):
    n = surface_normal(catenoid60.realized, 0.0)
    q = 1 / C
    assert n[0] < 0
    assert abs(abs(n[2]) - (1 - q * q) / (1 + q * q)) <= 1e-12


@pytest.mark.parametrize("which", ["poly", "catenoid"])
def test_normal_against_difference_partials(which, catenoid60):
    m = poly_map() if which == "poly" else catenoid60.realized
    z = disk_points(10, 0.8, seed=3)
    h = 1e-3

    def d(e):
        f = lambda s: lift_points(m, z + s * e)
        return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)

    n_fd = np.cross(d(1), d(1j))
    n_fd /= np.linalg.norm(n_fd, axis=-1, keepdims=True)
    assert np.max(np.abs(n_fd - surface_normal(m, z))) <= 1e-8


def lifted_diameter(m, n=2001, top=0.95, theta=0.0):
    x = np.linspace(-top, top, n)
    return lift_segment(m, x, np.exp(1j * theta))


def test_lifted_curve_invariants(catenoid60):
    c = lifted_diameter(catenoid60.realized, 401)
    assert np.allclose(c.speed, np.exp(conformal_factor(catenoid60.realized, c.sources).sigma), rtol=1e-6)
    assert np.max(np.abs(np.sum(c.normal * c.velocity, axis=-1)) / c.speed) <= 1e-8
    assert c.arclength[0] == 0 and np.all(np.diff(c.arclength) > 0)


def test_s1_of_line_and_circle():
    # exact derivatives: line (b, 0, 0) gives 0, unit-speed circle gives 1/2
    b = np.array([2.0, -1.0, 3.0])
    zero = np.zeros(3)
    assert s1_from_derivatives(b, zero, zero) == 0
    t = np.linspace(0, 6, 50)
    d1 = np.stack([-np.sin(t), np.cos(t), 0 * t], axis=-1)
    d2 = np.stack([-np.cos(t), -np.sin(t), 0 * t], axis=-1)
    assert np.allclose(s1_from_derivatives(d1, d2, -d1), 0.5, atol=1e-15)


def test_s1_numeric_of_sampled_circle():
    m = HarmonicMap(jets.exp(1j * Z), 0 * Z, 0 * Z)
    c = lifted_diameter(m, 201, 0.9)
    assert np.allclose(s1_profile(c)[3:-3], 0.5, atol=1e-8)


def test_s1_of_extremal_is_twice_p():
    # planar map h = atanh: the lifted real diameter is Φ(x) = atanh x
    m = HarmonicMap(jets.atanh(Z), 0 * Z, 0 * Z)
    c = lifted_diameter(m, 1901, 0.9)
    idx = np.arange(10, 1890, 37)
    s1 = np.array([ahlfors_s1_numeric(c, i) for i in idx])
    assert np.allclose(s1, 2 / (1 - c.x[idx] ** 2) ** 2, rtol=1e-6)


def test_boundary_index(catenoid60):
    c = lifted_diameter(catenoid60.realized, 21)
    with pytest.raises(BoundaryIndex):
        ahlfors_s1_numeric(c, 2)
    with pytest.raises(BoundaryIndex):
        ahlfors_s1_numeric(c, -3)
    assert np.isnan(s1_profile(c)[:3]).all() and np.isfinite(s1_profile(c)[3:-3]).all()


def test_s1_decomposition_against_numeric(catenoid60):
    m = catenoid60.realized
    c = lifted_diameter(m, 1901, 0.95)
    for x0 in (-0.5, 0.0, 0.5):
        i = int(np.argmin(np.abs(c.x - x0)))
        s1 = ahlfors_s1_lemma1(m, c.x[i]).s1
        assert abs(s1 - ahlfors_s1_numeric(c, i)) <= 1e-5 * max(1, abs(s1))


def test_s1_bounded_by_criterion_terms(catenoid60):
    m = catenoid60.realized
    x = np.linspace(-0.99, 0.99, 399)
    terms = ahlfors_s1_lemma1(m, x)
    bound = np.real(harmonic_schwarzian(m, x + 0j)) + curvature_term(m, x + 0j)
    assert np.all(terms.s1 <= bound + 1e-9 * np.abs(bound))


def test_s1_decomposition_planar_case():
    h = jets.exp(Z) + 0.2 * Z ** 3
    m = HarmonicMap(h, 0 * Z, 0 * Z)
    x = np.linspace(-0.9, 0.9, 19)
    t = ahlfors_s1_lemma1(m, x)
    from schwarzlift.jets import classical_schwarzian
    assert np.allclose(t.s1, np.real(classical_schwarzian(h.jet(x + 0j))), rtol=1e-10)
    assert np.all(t.k_term == 0) and np.allclose(t.ke_term, 0, atol=1e-12)


def test_frenet_decomposition(catenoid60):
    m = catenoid60.realized
    c = lifted_diameter(m, 2001, 0.95)
    h = c.step
    v = c.speed
    dv = np.gradient(v, h, edge_order=2)
    ratio = dv / v
    s_of_arclength = np.gradient(ratio, h, edge_order=2) - 0.5 * ratio ** 2
    v1, v2 = curve_derivatives(m, c.sources, 1.0)
    kappa2 = np.sum(np.cross(v1, v2) ** 2, axis=-1) / np.sum(v1 * v1, axis=-1) ** 3
    s1 = s1_profile(c)
    inner = slice(10, -10)
    resid = np.abs(s1[inner] - (s_of_arclength[inner] + 0.5 * v[inner] ** 2 * kappa2[inner]))
    assert np.max(resid) <= 1e-4


def test_space_mobius_round_trip():
    rng = np.random.default_rng(0)
    T = (SpaceMobius.rotation([1, 2, 3], 0.7).then(SpaceMobius.translation([1, -2, 0.5]))
         .then(SpaceMobius.inversion()).then(SpaceMobius.dilation(2.5)))
    pts = rng.normal(size=(100, 3))
    assert np.max(np.abs(T.inverse()(T(pts)) - pts)) <= 1e-10
    with pytest.raises(InversionPole):
        SpaceMobius.inversion()(np.zeros((1, 3)))
    with pytest.raises(ValueError):
        SpaceMobius.orthogonal(np.ones((3, 3)))


def test_push_forward_matches_differences():
    T = SpaceMobius.translation([0.3, -1, 2]).then(SpaceMobius.inversion()).then(
        SpaceMobius.rotation([0, 1, 1], 1.1))
    p = np.array([0.5, 0.2, -0.4])
    v = np.array([0.1, -0.7, 0.3])
    h = 1e-6
    fd = (T(p + h * v) - T(p - h * v)) / (2 * h)
    assert np.allclose(T.push_forward(p, v)[1], fd, rtol=1e-8)


def test_identity_mobius_keeps_curve(catenoid60):
    c = lifted_diameter(catenoid60.realized, 101)
    d = apply_space_mobius(SpaceMobius.identity(), c)
    assert np.array_equal(d.points, c.points) and np.allclose(d.speed, c.speed)


@pytest.mark.parametrize("name, T", [
    ("rotation", SpaceMobius.rotation([1, -1, 2], 0.9)),
    ("translation", SpaceMobius.translation([5, -3, 40])),
    ("dilation", SpaceMobius.dilation(3.0)),
    ("inversion", SpaceMobius.translation([40, 10, -5]).then(SpaceMobius.inversion())),
])
def test_s1_mobius_invariance(name, T, catenoid60):
    c = lifted_diameter(catenoid60.realized, 1901, 0.95)
    before = s1_profile(c)
    after = s1_profile(apply_space_mobius(T, c))
    inner = slice(3, -3)
    tol = 1e-6 if name == "dilation" else 1e-4
    assert np.max(np.abs(after[inner] - before[inner]) / np.maximum(1, np.abs(before[inner]))) <= tol


def test_derivative_bound_for_normalized_extremal_adjacent_curve(catenoid60):
    # criterion holds with equality for p = π²/4; normalize φ(0)=0, |φ'(0)|=1, φ''(0)=0
    m = catenoid60.realized
    v1, v2 = curve_derivatives(m, 0.0, 1.0)
    speed = np.linalg.norm(v1)
    e1 = v1 / speed
    perp = v2 - np.dot(v2, e1) * e1
    e2 = perp / np.linalg.norm(perp)
    rot = np.array([e1, e2, np.cross(e1, e2)])
    accel = rot @ v2 / speed
    b = np.array([-accel[0], accel[1], accel[2]]) / 2
    T = (SpaceMobius.translation(-lift_points(m, 0.0)).then(SpaceMobius.orthogonal(rot))
         .then(SpaceMobius.dilation(1 / speed)).then(SpaceMobius.inversion())
         .then(SpaceMobius.translation(-b)).then(SpaceMobius.inversion()))
    h = 1e-3
    x = (np.arange(-950, 950) + 0.5) * h
    c = apply_space_mobius(T, lift_segment(m, x))
    mid = 950
    d1 = (c.points[mid] - c.points[mid - 1]) / h
    d2 = (c.points[mid + 1] - c.points[mid] - c.points[mid - 1] + c.points[mid - 2]) / (2 * h * h)
    assert abs(np.linalg.norm(d1) - 1) <= 1e-5 and np.linalg.norm(d2) <= 1e-4
    bound = 1 / np.cos(PI * x / 2) ** 2
    assert np.all(c.speed <= bound * (1 + 1e-6))


def test_mesh_counts_and_flat_disk():
    m = HarmonicMap(Z, 0 * Z, 0 * Z)
    mesh = lift_mesh(m, 5, 12, 0.9)
    assert len(mesh.vertices) == 5 * 12 + 1
    assert len(mesh.faces) == 12 + 2 * 12 * 4
    assert np.all(mesh.vertices[:, 2] == 0)
    assert np.allclose(mesh.vertices[:, 0] + 1j * mesh.vertices[:, 1], mesh.sources)
    with pytest.raises(ValueError):
        lift_mesh(m, 5, 12, 1.0)


def test_catenoid_mesh(catenoid60):
    mesh = lift_mesh(catenoid60.realized, 20, 24, 0.99)
    x = mesh.sources.real
    radius = C * np.exp(PI * x) + np.exp(-PI * x) / C
    assert np.allclose(np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1]), radius, rtol=1e-12, atol=1e-8)
    assert np.max(np.abs(mesh.normals - surface_normal(catenoid60.realized, mesh.sources))) <= 1e-6


def test_mesh_files_round_trip(tmp_path, catenoid60):
    mesh = lift_mesh(catenoid60.realized, 4, 8, 0.9)
    write_ply(mesh, tmp_path / "m.ply")
    back = read_ply(tmp_path / "m.ply")
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.normals, mesh.normals)
    assert np.array_equal(back.faces, mesh.faces)
    write_obj(mesh, tmp_path / "m.obj")
    lines = (tmp_path / "m.obj").read_text().splitlines()
    verts = np.array([[float(t) for t in ln.split()[1:]] for ln in lines if ln.startswith("v ")])
    faces = [ln for ln in lines if ln.startswith("f ")]
    assert np.array_equal(verts, mesh.vertices) and len(faces) == len(mesh.faces)
    assert faces[0] == "f 1//1 2//2 3//3"


def test_curve_csv(tmp_path, catenoid60):
    c = lifted_diameter(catenoid60.realized, 11, 0.5)
    write_curve_csv(c, tmp_path / "c.csv", ahlfors_s1_lemma1(catenoid60.realized, c.x).s1)
    rows = (tmp_path / "c.csv").read_text().splitlines()
    assert rows[0] == "x,u,v,w,speed,s1_numeric,s1_lemma1"
    assert len(rows) == 12
    assert rows[1].split(",")[5] == "" and rows[6].split(",")[5] != ""
