import math

import numpy as np
import pytest

from schwarzlift import jets
from schwarzlift.errors import InsufficientSamples, MultipleCriticalPoints, OutOfRange
from schwarzlift.harmonic import HarmonicMap, conformal_factor, harmonic_schwarzian
from schwarzlift.jets import Z, classical_schwarzian
from schwarzlift.lift import SpaceMobius
from schwarzlift.metric import (PsiJet, RadialMetric, TracelessTensor, chordal_distance,
                                critical_points, distortion_check, hessian_equation_residual,
                                holder_estimate, lemma2_margin, lemma2_margin_tensor,
                                normalizing_mobius, omega_profile, radial_hessian_check,
                                schwarzian_tensor, schwarzian_tensor_matrix,
                                subtraction_residual, tau_slope_at_zero, u_function)
from schwarzlift.nehari import solve_extremal
from schwarzlift.verify import make_example, polar_points

from conftest import disk_points

PI = math.pi


def analytic(h):
    return HarmonicMap(h, 0 * Z, 0 * Z)


TAN = analytic((2 / PI) * jets.tan(PI / 2 * Z))
ATANH = analytic(jets.atanh(Z))


@pytest.fixture(scope="module")
def nehari2_metric():
    return RadialMetric(solve_extremal("nehari2"))


def fd_grad_hess(f, z, h=1e-3):
    fx = (f(z + h) - f(z - h)) / (2 * h)
    fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    fxx = (f(z + h) - 2 * f(z) + f(z - h)) / h ** 2
    fyy = (f(z + 1j * h) - 2 * f(z) + f(z - 1j * h)) / h ** 2
    fxy = (f(z + h + 1j * h) - f(z + h - 1j * h) - f(z - h + 1j * h) + f(z - h - 1j * h)) / (4 * h * h)
    return np.array([fx, fy]), np.array([[fxx, fxy], [fxy, fyy]])


def test_traceless_tensor_identification():
    t = TracelessTensor(0.3, -1.2)
    assert abs(np.linalg.norm(t.matrix(), 2) - t.norm()) <= 1e-14
    assert TracelessTensor.from_matrix(t.matrix()) == t
    v = np.array([math.cos(0.4), math.sin(0.4)])
    assert abs(v @ t.matrix() @ v - t.contract(0.4)) <= 1e-14


def test_tensor_of_log_derivative_is_classical_schwarzian():
    f = jets.exp(Z) + 0.3 * Z ** 3
    psi = lambda w: np.log(np.abs(f.jet(w).f1))
    for z in disk_points(5, 0.8):
        grad, hess = fd_grad_hess(psi, z, 1e-4)
        got = schwarzian_tensor_matrix(grad, hess).value
        assert abs(got - classical_schwarzian(f.jet(z))) <= 1e-5 * max(1, abs(got))


def test_tensor_of_sigma_is_harmonic_schwarzian(catenoid60):
    m = catenoid60.realized
    z = disk_points(20)
    sj = conformal_factor(m, z)
    for k, zk in enumerate(z):
        jet_k = PsiJet(sj.sigma[k], sj.sigma_z[k], sj.sigma_zz[k])
        assert abs(schwarzian_tensor(jet_k).value - harmonic_schwarzian(m, zk)) <= 1e-10


def test_constant_function_has_zero_tensor():
    assert schwarzian_tensor(PsiJet(3.0, 0j, 0j)).value == 0


def test_subtraction_residual(catenoid60, pi2over4_metric):
    z = 0.4 + 0.1j
    sj = conformal_factor(catenoid60.realized, z)
    assert subtraction_residual(sj, pi2over4_metric.jet(z)) <= 1e-9
    assert subtraction_residual(sj, PsiJet(0.0, 0j, 0j)) == 0
    rng = np.random.default_rng(5)
    for _ in range(100):
        a = PsiJet(0.0, *(rng.normal(size=2) + 1j * rng.normal(size=2)) * 5)
        b = PsiJet(0.0, *(rng.normal(size=2) + 1j * rng.normal(size=2)) * 5)
        assert subtraction_residual(a, b) <= 1e-9 * max(1, abs(a.psi_zz) + abs(b.psi_zz) + 50)


def test_radial_metric_jet_against_differences(pi2over4_metric):
    met = pi2over4_metric
    psi = lambda w: float(met.jet(w).psi)
    for z in (0.3 + 0.2j, -0.5j, 0.7):
        j = met.jet(z)
        grad, hess = fd_grad_hess(psi, z, 1e-4)
        assert abs(j.psi_z - 0.5 * (grad[0] - 1j * grad[1])) <= 1e-6 * max(1, abs(j.psi_z))
        fd_zz = 0.25 * (hess[0, 0] - hess[1, 1] - 2j * hess[0, 1])
        assert abs(j.psi_zz - fd_zz) <= 1e-5 * max(1, abs(j.psi_zz))


def test_metric_curvature_negative(pi2over4_metric):
    r = np.linspace(0, 0.99, 200)
    pr = pi2over4_metric.profile
    assert np.all(pr.metric_coefficient(r) + pr.p(r) > 0)


def test_tensor_margin_catenoid(catenoid60, pi2over4_metric):
    m, met = catenoid60.realized, pi2over4_metric
    assert lemma2_margin(m, met, 0.3) >= 0
    z = disk_points(50, 0.9)
    a, b = lemma2_margin(m, met, z), lemma2_margin_tensor(m, met, z)
    assert np.allclose(a, b, atol=1e-9, rtol=1e-8)
    assert np.allclose(lemma2_margin(m, met, np.conj(z)), a, atol=1e-12, rtol=1e-10)


def test_tensor_margin_zero_for_extremal_on_real_axis(nehari2_metric):
    x = np.linspace(-0.95, 0.95, 39) + 0j
    assert np.max(np.abs(lemma2_margin(ATANH, nehari2_metric, x))) <= 1e-8


@pytest.mark.parametrize("case", ["catenoid", "strip_nehari2", "strip_two_over"])
def test_tensor_margin_on_grid(case):
    ex = {"catenoid": lambda: make_example("catenoid_exp", {"c": 60.0}),
          "strip_nehari2": lambda: make_example("strip_catenoid", {"p_kind": "nehari2", "c": 0.05}),
          "strip_two_over": lambda: make_example("strip_catenoid", {"p_kind": "two_over", "c": 0.02})}[case]()
    met = RadialMetric(solve_extremal(ex.p))
    _, _, z = polar_points(60, 60, 0.95)
    assert np.min(lemma2_margin(ex.realized, met, z)) >= -1e-8


def test_tensor_margin_out_of_range(catenoid60):
    met = RadialMetric(solve_extremal("pi2over4", rmax=0.9))
    with pytest.raises(OutOfRange):
        lemma2_margin(catenoid60.realized, met, 0.95)


def test_u_function_values(catenoid60, pi2over4_metric):
    assert u_function(catenoid60.realized, pi2over4_metric, 0.0) == pytest.approx(
        1 / math.sqrt(PI * (60 + 1 / 60)), rel=1e-13)
    assert u_function(TAN, pi2over4_metric, 0.0) == pytest.approx(1.0, abs=1e-13)


def test_u_function_smooth_along_radii(catenoid60, pi2over4_metric):
    def second(h):
        r = np.array([0.4 - h, 0.4, 0.4 + h]) * np.exp(0.3j)
        u = u_function(catenoid60.realized, pi2over4_metric, r)
        return (u[0] - 2 * u[1] + u[2]) / h ** 2
    assert abs(second(1e-3) - second(5e-4)) <= 1e-5 * abs(second(5e-4))


def test_radial_hessian_planar_extremal(pi2over4_metric):
    rep = radial_hessian_check(TAN, pi2over4_metric, 0.0)
    assert rep.passed and rep.min_margin >= -1e-6
    assert rep.extra["max_fd_error"] <= 1e-5


@pytest.mark.parametrize("theta", [0.0, PI / 2])
def test_radial_hessian_catenoid(theta, catenoid60, pi2over4_metric):
    rep = radial_hessian_check(catenoid60.realized, pi2over4_metric, theta, n=400)
    assert rep.min_margin >= -1e-6 and rep.extra["min_margin_exact"] >= -1e-9
    rec = rep.record()
    assert set(rec) >= {"check", "grid", "min_margin", "argmin", "pass"}


def test_omega_flat_for_analytic_extremal(pi2over4_metric):
    prof = omega_profile(TAN, SpaceMobius.identity(), pi2over4_metric, 0.0, n=200)
    assert np.allclose(prof.omega, 1, atol=1e-9)
    assert np.max(np.abs(prof.second_differences)) <= 1e-9


def test_omega_convex_catenoid(catenoid60, pi2over4_metric):
    prof = omega_profile(catenoid60.realized, SpaceMobius.identity(), pi2over4_metric, PI / 4)
    assert prof.report.passed


def test_normalizing_mobius(catenoid60, pi2over4_metric):
    m = catenoid60.realized
    for theta in (0.0, PI / 4, PI / 2):
        norm = normalizing_mobius(m, theta)
        assert norm.c == pytest.approx((1 + norm.alpha) / 2)
        assert tau_slope_at_zero(m, norm.transform, theta) == pytest.approx(-1, abs=1e-6)
        prof = omega_profile(m, norm.transform, pi2over4_metric, theta)
        assert prof.slope_at_zero > 0 and prof.report.passed


def test_critical_point_of_catenoid(catenoid60, pi2over4_metric):
    crit = critical_points(catenoid60.realized, pi2over4_metric)
    assert len(crit) == 1
    # u depends on x only through e^σ and on r through Φ'; the minimum sits on the real axis
    assert abs(crit[0].imag) <= 1e-6


def test_distortion_catenoid(catenoid60, pi2over4_metric):
    fit = distortion_check(catenoid60.realized, pi2over4_metric, r0=0.5)
    assert fit.a > 0 and fit.max_violation <= 1e-8


def test_distortion_identity_map_has_log_shape(nehari2_metric):
    fit = distortion_check(analytic(Z), nehari2_metric, r0=0.5)
    assert fit.a > 0 and fit.max_violation <= 1e-8
    r = np.linspace(0.5, 0.95, 20)
    pr = nehari2_metric.profile
    generic = pr.derivatives(r)[1] / (fit.a * pr(r) + fit.b) ** 2
    display = 1 / ((1 - r * r) * (fit.a / 2 * np.log((1 + r) / (1 - r)) + fit.b) ** 2)
    assert np.allclose(generic, display, rtol=1e-9)


def test_distortion_rejects_extremal(nehari2_metric):
    with pytest.raises(MultipleCriticalPoints):
        distortion_check(ATANH, nehari2_metric)


def test_chordal_distance_matches_stereographic_projection():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=(50, 3)) * 3, rng.normal(size=(50, 3)) * 3

    def project(p):
        n2 = np.sum(p * p, axis=-1, keepdims=True)
        return np.concatenate([2 * p, n2 - 1], axis=-1) / (n2 + 1)

    assert np.allclose(chordal_distance(x, y), np.linalg.norm(project(x) - project(y), axis=-1))
    assert np.all(chordal_distance(x, y) <= 2)


def test_holder_catenoid(catenoid60):
    fit = holder_estimate(catenoid60.realized)
    assert fit.exponent >= 0.9 and fit.kind in ("holder", "lipschitz")
    assert fit.residual_power < fit.residual_log


def test_holder_log_for_lambda_one():
    assert holder_estimate(ATANH).kind == "log"
    strip = make_example("strip_catenoid", {"p_kind": "nehari2", "c": 0.05})
    assert holder_estimate(strip.realized).kind == "log"


def test_holder_two_over_strip_asymptotic_window():
    strip = make_example("strip_catenoid", {"p_kind": "two_over", "c": 0.02})
    fit = holder_estimate(strip.realized, deltas=np.logspace(-6, -4, 9))
    assert fit.exponent >= 0.9


def test_holder_needs_samples():
    with pytest.raises(InsufficientSamples):
        holder_estimate(analytic(Z), deltas=[1e-2, 1e-3])


def test_hessian_equation_euclidean_and_radial(catenoid60, pi2over4_metric):
    m = catenoid60.realized
    psi = lambda w: float(np.asarray(conformal_factor(m, w).sigma)) / 10
    rho = lambda w: float(pi2over4_metric.jet(w).psi)
    for z in (0.2 + 0.1j, -0.4j, 0.5):
        for theta in (0.0, 0.7):
            assert hessian_equation_residual(psi, z, theta) <= 1e-6
            assert hessian_equation_residual(psi, z, theta, rho=rho) <= 1e-6
