"""Schwarzian tensor, the radial extremal metric Φ'(|z|)²|dz|², and the
convexity, distortion and boundary-modulus audits built on it."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InsufficientSamples, MultipleCriticalPoints, OutOfRange
from .harmonic import HarmonicMap, conformal_factor, curvature_term, gauss_curvature, harmonic_schwarzian
from .lift import SpaceMobius, curve_derivatives, lift_points
from .nehari import ExtremalProfile


# -- tensors -----------------------------------------------------------------

@dataclass(frozen=True)
class TracelessTensor:
    """The matrix ``[[a, -b], [-b, -a]]`` identified with ``a + bi``."""

    a: float
    b: float

    @classmethod
    def from_complex(cls, w):
        return cls(float(np.real(w)), float(np.imag(w)))

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(0.5 * (m[0, 0] - m[1, 1]), -0.5 * (m[0, 1] + m[1, 0]))

    @property
    def value(self):
        return complex(self.a, self.b)

    def matrix(self):
        return np.array([[self.a, -self.b], [-self.b, -self.a]])

    def norm(self):
        """Euclidean-frame norm ``|a + bi|`` (operator norm of the matrix)."""
        return abs(self.value)

    def contract(self, theta):
        """``B(v, v)`` for the unit vector at angle ``theta``."""
        return float(np.real(self.value * np.exp(2j * theta)))


@dataclass(frozen=True)
class PsiJet:
    """Real function with its Wirtinger derivatives at a point."""

    psi: float
    psi_z: complex
    psi_zz: complex
    psi_zzbar: float = 0.0


def schwarzian_tensor(jet) -> TracelessTensor:
    """``2(ψ_zz − ψ_z²)`` for a :class:`PsiJet` or :class:`SigmaJet`-like object."""
    z1 = getattr(jet, "psi_z", None)
    if z1 is None:
        z1, z2 = jet.sigma_z, jet.sigma_zz
    else:
        z2 = jet.psi_zz
    return TracelessTensor.from_complex(2 * (z2 - z1 ** 2))


def schwarzian_tensor_matrix(grad, hess) -> TracelessTensor:
    """Traceless part of ``Hess ψ − dψ⊗dψ`` from Euclidean gradient and Hessian."""
    g = np.asarray(grad, dtype=float)
    return TracelessTensor.from_matrix(np.asarray(hess, dtype=float) - np.outer(g, g))


def subtraction_residual(sigma, varphi) -> float:
    """``|B(σ−φ) − (B(σ) − B(φ))|`` with the difference jet formed directly."""
    s_z, s_zz = _first_second(sigma)
    v_z, v_zz = _first_second(varphi)
    diff = PsiJet(0.0, s_z - v_z, s_zz - v_zz)
    lhs = schwarzian_tensor(PsiJet(0.0, s_z, s_zz)).value - schwarzian_tensor(
        PsiJet(0.0, v_z, v_zz)).value
    hat = _conformal_change(varphi, diff)
    return abs(hat - lhs)


def _first_second(jet):
    if hasattr(jet, "psi_z"):
        return jet.psi_z, jet.psi_zz
    return jet.sigma_z, jet.sigma_zz


def _conformal_change(rho, psi_jet):
    """Identification of ``B_ĝ(ψ)`` for ``ĝ = e^{2ρ} g0`` in the Euclidean frame.

    Computed as traceless part of ``Hess_ĝ ψ − dψ⊗dψ`` where the Hessian of
    ``ĝ`` carries the Christoffel correction ``−dρ⊗dψ − dψ⊗dρ + ⟨∇ρ,∇ψ⟩ I``.
    """
    r_z, _ = _first_second(rho)
    p_z, p_zz = psi_jet.psi_z, psi_jet.psi_zz
    # traceless parts in complex form: Hess ψ -> 4ψ_zz/2, dα⊗dβ -> 2α_zβ_z
    return 2 * p_zz - 2 * p_z ** 2 - 4 * r_z * p_z


# -- radial metric -----------------------------------------------------------

@dataclass(frozen=True)
class RadialMetric:
    """Conformal metric ``e^{2φ}|dz|²`` with ``e^φ = Φ'(|z|)``."""

    profile: ExtremalProfile

    @property
    def p(self):
        return self.profile.p

    @property
    def rmax(self):
        return self.profile.rmax

    def radial(self, r):
        """``(φ, φ', φ'', φ'/r)`` as functions of the radius."""
        pr = self.profile
        _, d1, _, _ = pr.derivatives(r)
        big_r, big_r1 = pr.log_derivative(r)
        over_r = 2 * pr.metric_coefficient(r) - 0.5 * big_r ** 2
        return np.log(d1), big_r, big_r1, over_r

    def jet(self, z) -> PsiJet:
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        if np.any(r > self.rmax):
            raise OutOfRange(f"|z| exceeds the metric radius {self.rmax}")
        phi, d1, d2, over_r = self.radial(r)
        safe = np.where(r == 0, 1.0, r)
        zeta_bar = np.where(r == 0, 0.0, np.conj(z) / safe)
        phi_z = zeta_bar * d1 / 2
        phi_zz = zeta_bar ** 2 / 4 * (d2 - over_r)
        phi_zzbar = 0.25 * (d2 + over_r)
        return PsiJet(*(v[()] if np.ndim(v) == 0 else v for v in (phi, phi_z, phi_zz, phi_zzbar)))

    def curvature(self, r):
        """``|K_g| = 2Φ'^{-2}(A + p)``."""
        return self.profile.metric_curvature(r)


# -- reports -----------------------------------------------------------------

@dataclass
class CheckReport:
    check: str
    grid: dict
    min_margin: float
    argmin: object
    passed: bool
    extra: dict = None

    def record(self):
        arg = self.argmin
        if isinstance(arg, complex):
            arg = [arg.real, arg.imag]
        out = {"check": self.check, "grid": self.grid, "min_margin": self.min_margin,
               "argmin": arg, "pass": bool(self.passed)}
        if self.extra:
            out.update(self.extra)
        return out

    def to_json(self):
        return json.dumps(self.record(), sort_keys=True)


# -- tensor margin against the extremal metric ---------------------------------

def lemma2_margin(m: HarmonicMap, metric: RadialMetric, z):
    """``½|K_g| − (‖B_g(σ−φ)‖_g + e^{2(σ−φ)}|K|)`` at ``z``.

    Uses ``|B0(σ) − B0(φ)| = |ζ² Sf + A − p|`` and ``e^{2φ} = Φ'²``.
    """
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    if np.any(r > metric.rmax):
        raise OutOfRange("|z| exceeds the metric radius")
    pr = metric.profile
    safe = np.where(r == 0, 1.0, r)
    zeta = np.where(r == 0, 1.0, z / safe)
    sf = harmonic_schwarzian(m, z)
    a = pr.metric_coefficient(r)
    pv = pr.p(r)
    _, d1, _, _ = pr.derivatives(r)
    lhs = np.abs(zeta ** 2 * sf + a - pv) + curvature_term(m, z)
    out = ((a + pv) - lhs) / d1 ** 2
    return out[()] if np.ndim(out) == 0 else out


def lemma2_margin_tensor(m: HarmonicMap, metric: RadialMetric, z):
    """Same margin with ``B0(σ) − B0(φ)`` formed from the two tensors."""
    sj = conformal_factor(m, z)
    pj = metric.jet(z)
    b_sigma = 2 * (sj.sigma_zz - sj.sigma_z ** 2)
    b_phi = 2 * (pj.psi_zz - pj.psi_z ** 2)
    e2phi = np.exp(2 * pj.psi)
    norm_g = np.abs(b_sigma - b_phi) / e2phi
    k_term = curvature_term(m, z) / e2phi
    return 0.5 * metric.curvature(np.abs(z)) - (norm_g + k_term)


# -- convexity ---------------------------------------------------------------

def u_function(m: HarmonicMap, metric: RadialMetric, z):
    """``u = e^{(φ−σ)/2} = sqrt(Φ'(|z|)/(|h'|+|g'|))``."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    if np.any(r > metric.rmax):
        raise OutOfRange("|z| exceeds the metric radius")
    _, d1, _, _ = metric.profile.derivatives(r)
    sj = conformal_factor(m, z)
    out = np.sqrt(d1 / np.exp(sj.sigma))
    return out[()] if np.ndim(out) == 0 else out


def _u_radial_second(m, metric, r, theta):
    """Exact ``d²u/ds²`` along the ray at angle ``theta`` (``s = Φ(r)``)."""
    d = np.exp(1j * theta)
    z = r * d
    sj = conformal_factor(m, z)
    pr = metric.profile
    _, d1, _, _ = pr.derivatives(r)
    big_r, big_r1 = pr.log_derivative(r)
    u = np.sqrt(d1 / np.exp(sj.sigma))
    s_r = 2 * np.real(sj.sigma_z * d)
    s_rr = 2 * np.real(sj.sigma_zz * d * d) + 2 * sj.sigma_zzbar
    psi_r = big_r - s_r
    psi_rr = big_r1 - s_rr
    u_r = u * psi_r / 2
    u_rr = u * (psi_rr / 2 + psi_r ** 2 / 4)
    return (u_rr - u_r * big_r) / d1 ** 2, u


def radial_hessian_check(m: HarmonicMap, metric: RadialMetric, theta=0.0, n=400,
                         r_top=0.95, tol=1e-6) -> CheckReport:
    """Audit ``d²u/ds² ≥ ¼ u⁻³ |K|`` along the ray at ``theta``.

    ``s`` runs over a uniform grid of ``[−Φ(r_top), Φ(r_top)]`` (the ray and
    its continuation through 0 form one geodesic); second derivatives come
    from central differences of ``u`` in ``s``.
    """
    pr = metric.profile
    if r_top > pr.rmax:
        raise OutOfRange("r_top exceeds the profile radius")
    s_top = float(pr(r_top))
    s = np.linspace(-s_top, s_top, 2 * n + 1)
    r = pr.inverse_phi_array(s)
    z = r * np.exp(1j * theta)
    u = u_function(m, metric, z)
    h = s[1] - s[0]
    d2 = (u[2:] - 2 * u[1:-1] + u[:-2]) / h ** 2
    k = np.abs(gauss_curvature(m, z[1:-1]))
    margin = d2 - 0.25 * k / u[1:-1] ** 3
    i = int(np.argmin(margin))
    exact, _ = _u_radial_second(m, metric, np.abs(r[1:-1]),
                                np.where(r[1:-1] < 0, theta + math.pi, theta))
    exact_margin = exact - 0.25 * k / u[1:-1] ** 3
    return CheckReport(
        "radial_hessian", {"theta": theta, "n": n, "r_top": r_top},
        float(margin[i]), complex(z[1 + i]), bool(margin[i] >= -tol),
        {"min_margin_exact": float(np.min(exact_margin)),
         "max_fd_error": float(np.max(np.abs(d2 - exact)))})


def _ray_scale(m, T, z, direction):
    """``e^τ``: speed of ``s -> T(lift(z + s·direction))`` at ``s = 0``."""
    pts = lift_points(m, z)
    v1, _ = curve_derivatives(m, z, direction)
    _, vel = T.push_forward(pts, v1)
    return np.linalg.norm(vel, axis=-1)


@dataclass(frozen=True)
class OmegaProfile:
    s: np.ndarray
    r: np.ndarray
    omega: np.ndarray
    second_differences: np.ndarray
    report: CheckReport

    @property
    def slope_at_zero(self):
        h = self.s[1] - self.s[0]
        return float((self.omega[1] - self.omega[0]) / h)


def omega_profile(m: HarmonicMap, T: SpaceMobius, metric: RadialMetric, theta=0.0,
                  n=400, r_top=0.95, rel_tol=1e-6) -> OmegaProfile:
    """``ω(s) = sqrt(Φ'(r(s))/e^{τ(r(s))})`` along the ray at ``theta``."""
    pr = metric.profile
    s_top = float(pr(r_top))
    s = np.linspace(0.0, s_top, n + 1)
    r = pr.inverse_phi_array(s)
    d = np.exp(1j * theta)
    z = r * d
    scale = _ray_scale(m, T, z, d)
    _, d1, _, _ = pr.derivatives(r)
    omega = np.sqrt(d1 / scale)
    sd = omega[2:] - 2 * omega[1:-1] + omega[:-2]
    bound = -rel_tol * float(np.max(np.abs(omega)))
    i = int(np.argmin(sd))
    rep = CheckReport("omega_convexity", {"theta": theta, "n": n, "r_top": r_top},
                      float(sd[i]), complex(z[1 + i]), bool(sd[i] >= bound),
                      {"threshold": bound})
    return OmegaProfile(s, r, omega, sd, rep)


def _frame(v1, v2):
    e1 = v1 / np.linalg.norm(v1)
    perp = v2 - np.dot(v2, e1) * e1
    if np.linalg.norm(perp) < 1e-14 * max(1.0, np.linalg.norm(v2)):
        trial = np.eye(3)[int(np.argmin(np.abs(e1)))]
        perp = trial - np.dot(trial, e1) * e1
    e2 = perp / np.linalg.norm(perp)
    return np.array([e1, e2, np.cross(e1, e2)])


@dataclass(frozen=True)
class NormalizingMobius:
    transform: SpaceMobius
    alpha: float
    beta: float
    c: float


def normalizing_mobius(m: HarmonicMap, theta: float) -> NormalizingMobius:
    """Space Möbius map giving the lifted ray at ``theta`` a negative ``τ'(0)``.

    The ray is first moved to start at the origin with unit velocity along
    ``e1`` and acceleration ``(α, β, 0)``; then ``z -> z/(1 + cz)`` with
    ``c = (1 + α)/2`` is applied in the ``(x, y)`` plane, realized with a
    single inversion whose centre sits at the image of ``z = −1/c``.
    """
    d = np.exp(1j * theta)
    v1, v2 = curve_derivatives(m, 0.0, d)
    origin = lift_points(m, 0.0)
    speed = np.linalg.norm(v1)
    rot = _frame(v1, v2)
    # after dilating by 1/speed the ray has unit velocity and acceleration v2/speed
    alpha = float(np.dot(rot[0], v2) / speed)
    beta = float(np.dot(rot[1], v2) / speed)
    c = (1 + alpha) / 2
    normalize = (SpaceMobius.translation(-origin)
                 .then(SpaceMobius.orthogonal(rot))
                 .then(SpaceMobius.dilation(1 / speed)))
    if c == 0:
        return NormalizingMobius(normalize, alpha, beta, c)
    # z/(1+cz) = (1 - 1/(1+cz))/c; in the plane 1/w is inversion then y -> -y
    recip = SpaceMobius.inversion().then(SpaceMobius.orthogonal(np.diag([1.0, -1.0, 1.0])))
    complex_map = (SpaceMobius.dilation(c)
                   .then(SpaceMobius.translation([1.0, 0.0, 0.0]))
                   .then(recip)
                   .then(SpaceMobius.orthogonal(np.diag([-1.0, -1.0, 1.0])))
                   .then(SpaceMobius.translation([1.0, 0.0, 0.0]))
                   .then(SpaceMobius.dilation(1 / c)))
    return NormalizingMobius(normalize.then(complex_map), alpha, beta, c)


def tau_slope_at_zero(m: HarmonicMap, T: SpaceMobius, theta: float, h=1e-4) -> float:
    """``τ'(0)`` by central differences of ``log e^τ`` along the ray."""
    d = np.exp(1j * theta)
    z = np.array([-h, h]) * d
    tau = np.log(_ray_scale(m, T, z, d))
    return float((tau[1] - tau[0]) / (2 * h))


# -- distortion --------------------------------------------------------------

def _u_and_grad(m, metric, xy):
    z = complex(xy[0], xy[1])
    r = abs(z)
    if r >= metric.rmax:
        return math.inf, np.zeros(2)
    u = float(u_function(m, metric, z))
    pj = metric.jet(z)
    sj = conformal_factor(m, z)
    u_z = u * (pj.psi_z - sj.sigma_z) / 2
    return u, np.array([2 * np.real(u_z), -2 * np.imag(u_z)])


def critical_points(m: HarmonicMap, metric: RadialMetric, nr=40, ntheta=40, r_search=0.95,
                    dedup=1e-3, grad_tol=1e-7):
    """Interior critical points of ``u`` by multi-start descent from grid minima."""
    radii = r_search * (np.arange(nr) + 0.5) / nr
    angles = 2 * np.pi * np.arange(ntheta) / ntheta
    rr, tt = np.meshgrid(radii, angles, indexing="ij")
    z = rr * np.exp(1j * tt)
    u = u_function(m, metric, z)
    starts = []
    for i in range(nr):
        for j in range(ntheta):
            nb = [u[i, (j - 1) % ntheta], u[i, (j + 1) % ntheta]]
            if i > 0:
                nb.append(u[i - 1, j])
            if i < nr - 1:
                nb.append(u[i + 1, j])
            if u[i, j] <= min(nb):
                starts.append(z[i, j])
    found = []
    bound = r_search
    for z0 in starts:
        res = minimize(lambda v: _u_and_grad(m, metric, v), [z0.real, z0.imag], jac=True,
                       method="L-BFGS-B", bounds=[(-bound, bound)] * 2,
                       options={"gtol": 1e-12, "ftol": 1e-15, "maxiter": 500})
        zc = complex(res.x[0], res.x[1])
        if abs(zc) >= r_search:
            continue
        g = np.linalg.norm(_u_and_grad(m, metric, res.x)[1])
        if g > grad_tol * max(1.0, abs(res.fun)):
            continue
        if all(abs(zc - w) > dedup for w in found):
            found.append(zc)
    return found


def _refined_min(fn, z_grid, r_lo, r_hi, n_starts=5):
    """Minimum of ``fn`` over the annulus, polishing the best grid samples."""
    vals = np.asarray(fn(z_grid), dtype=float)
    best = float(np.min(vals))

    def polar(v):
        return float(fn(v[0] * np.exp(1j * v[1])))

    for k in np.argsort(vals)[:n_starts]:
        z0 = z_grid[k]
        res = minimize(polar, [abs(z0), np.angle(z0)], method="L-BFGS-B",
                       bounds=[(r_lo, r_hi), (None, None)])
        best = min(best, float(res.fun))
    return best


@dataclass(frozen=True)
class DistortionFit:
    a: float
    b: float
    max_violation: float
    critical_point: complex


def distortion_check(m: HarmonicMap, metric: RadialMetric, r0=0.5, r_top=0.95,
                     nr=40, ntheta=40) -> DistortionFit:
    """Fit ``u ≥ aΦ(|z|) + b`` on ``r0 < |z| < r_top`` and verify the bound
    ``e^σ ≤ Φ'/(aΦ + b)²`` on an offset, twice finer grid."""
    crit = critical_points(m, metric, nr, ntheta)
    if len(crit) > 1:
        raise MultipleCriticalPoints(
            f"u has {len(crit)} critical points; the lift is planar", crit)
    pr = metric.profile

    def samples(kr, kt, offset):
        radii = r0 + (r_top - r0) * (np.arange(kr) + offset) / kr
        angles = 2 * np.pi * (np.arange(kt) + offset) / kt
        return (radii[:, None] * np.exp(1j * angles[None, :])).ravel()

    z_fit = samples(nr, ntheta, 0.5)
    u_fit = u_function(m, metric, z_fit)
    phi_fit = pr(np.abs(z_fit))
    floor = 0.5 * float(np.min(u_fit))

    def companion(a):
        return float(np.min(u_fit - a * phi_fit))

    def feasible(a):
        return a * float(np.min(phi_fit)) + companion(a) >= floor

    lo, hi = 0.0, 1.0
    while feasible(hi) and hi < 1e8:
        lo, hi = hi, 2 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    a = lo
    b = _refined_min(lambda zz: u_function(m, metric, zz) - a * pr(np.abs(zz)),
                     z_fit, r0, r_top)

    z_ver = samples(2 * nr, 2 * ntheta, 0.25)
    r = np.abs(z_ver)
    _, d1, _, _ = pr.derivatives(r)
    bound = d1 / (a * pr(r) + b) ** 2
    e_sigma = np.exp(conformal_factor(m, z_ver).sigma)
    viol = float(np.max((e_sigma - bound) / bound))
    return DistortionFit(a, b, viol, crit[0] if crit else complex("nan"))


# -- boundary modulus ----------------------------------------------------------

def chordal_distance(x, y):
    """Chordal distance of points of R^3 ∪ {∞} on the unit 3-sphere."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    num = 2 * np.linalg.norm(x - y, axis=-1)
    return num / np.sqrt((1 + np.sum(x * x, axis=-1)) * (1 + np.sum(y * y, axis=-1)))


@dataclass(frozen=True)
class HolderFit:
    exponent: float
    kind: str
    residual_power: float
    residual_log: float
    deltas: np.ndarray
    moduli: np.ndarray


def holder_estimate(m: HarmonicMap, deltas=None, n_angles=16, min_exponent=0.05,
                    lipschitz_at=0.995) -> HolderFit:
    """Fit the boundary modulus of continuity of the lift in the chordal metric.

    For each separation δ the modulus is the largest chordal distance over
    radial pairs ``(1−2δ, 1−δ)`` and tangential pairs on ``|z| = 1−δ`` at
    ``n_angles`` equally spaced directions starting from the positive axis.  A power law ``C δ^β`` and a logarithmic law
    ``C (log 1/δ)^(−k)`` are fitted by least squares in log coordinates.
    """
    if deltas is None:
        deltas = np.logspace(-4, -1, 13)
    deltas = np.asarray(deltas, dtype=float)
    # the axis directions are included: boundary singularities of the
    # catalogue sit at ±1 and cut points at ±i
    angles = 2 * np.pi * np.arange(n_angles) / n_angles
    moduli = []
    for dl in deltas:
        r = 1 - dl
        rad_a = (1 - 2 * dl) * np.exp(1j * angles)
        rad_b = r * np.exp(1j * angles)
        tan_b = r * np.exp(1j * (angles + dl / r))
        pts = lift_points(m, np.concatenate([rad_a, rad_b, tan_b]))
        pa, pb, pc = np.split(pts, 3)
        dist = np.concatenate([chordal_distance(pa, pb), chordal_distance(pb, pc)])
        moduli.append(np.max(dist[np.isfinite(dist)]) if np.any(np.isfinite(dist)) else np.nan)
    moduli = np.asarray(moduli)
    ok = np.isfinite(moduli) & (moduli > 0)
    if ok.sum() < 4:
        raise InsufficientSamples("fewer than four usable separations")
    x = np.log(deltas[ok])
    y = np.log(moduli[ok])
    slope, icpt = np.polyfit(x, y, 1)
    if slope < min_exponent:
        slope = min_exponent
        icpt = float(np.mean(y - slope * x))
    res_pow = float(np.sqrt(np.mean((y - (icpt + slope * x)) ** 2)))
    xl = np.log(np.log(1 / deltas[ok]))
    coef = np.polyfit(xl, y, 1)
    res_log = float(np.sqrt(np.mean((y - np.polyval(coef, xl)) ** 2)))
    if res_log < res_pow:
        kind = "log"
    elif slope >= lipschitz_at:
        kind = "lipschitz"
    else:
        kind = "holder"
    return HolderFit(float(slope), kind, res_pow, res_log, deltas, moduli)


# -- Hessian equation --------------------------------------------------------

def _fd_hessian(f, z, h):
    """Gradient and Hessian of a real function of ``z`` by 4th-order stencils."""
    ex, ey = h, 1j * h

    def d1(e):
        return (-f(z + 2 * e) + 8 * f(z + e) - 8 * f(z - e) + f(z - 2 * e)) / (12 * h)

    def d2(e):
        return (-f(z + 2 * e) + 16 * f(z + e) - 30 * f(z) + 16 * f(z - e) - f(z - 2 * e)) / (12 * h * h)

    weights = {-2: 1.0, -1: -8.0, 1: 8.0, 2: -1.0}
    fxy = sum(wi * wj * f(z + i * ex + j * ey)
              for i, wi in weights.items() for j, wj in weights.items()) / (144 * h * h)
    grad = np.array([d1(ex), d1(ey)])
    hess = np.array([[d2(ex), fxy], [fxy, d2(ey)]])
    return grad, hess


def hessian_equation_residual(psi, z, theta=0.0, rho=None, h=1e-3):
    """Residual of ``Hess_g(e^{−ψ}) + e^{−ψ}B_g(ψ) = ½(Δ_g e^{−ψ}) g``
    contracted with the ``g``-unit vector at angle ``theta``, for the metric
    ``g = e^{2ρ}|dz|²`` (Euclidean when ``rho`` is None).  All derivatives by
    finite differences; relative to the size of the Hessian term."""
    if rho is None:
        def rho(w):
            return 0.0 * np.real(w)
    z = complex(z)

    def phi(w):
        return np.exp(-psi(w))

    gp, hp = _fd_hessian(psi, z, h)
    gf, hf = _fd_hessian(phi, z, h)
    gr, _ = _fd_hessian(rho, z, h)

    def hess_g(grad_f, hess_f):
        corr = -np.outer(gr, grad_f) - np.outer(grad_f, gr) + np.dot(gr, grad_f) * np.eye(2)
        return hess_f + corr

    b_psi = TracelessTensor.from_matrix(hess_g(gp, hp) - np.outer(gp, gp))
    e2rho = math.exp(2 * float(rho(z)))
    lap_g = np.trace(hf) / e2rho
    v = np.array([math.cos(theta), math.sin(theta)]) / math.sqrt(e2rho)
    lhs = v @ hess_g(gf, hf) @ v + float(phi(z)) * (v @ b_psi.matrix() @ v)
    rhs = 0.5 * lap_g
    scale = max(abs(v @ hess_g(gf, hf) @ v), abs(rhs), 1e-300)
    return abs(lhs - rhs) / scale
