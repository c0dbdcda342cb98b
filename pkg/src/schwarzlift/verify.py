"""Univalence-criterion checks, the injectivity scan, and the example families
with their closed-form identities."""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.optimize import least_squares, minimize
from scipy.spatial import cKDTree

from . import jets
from .errors import ChartError, NotApplicable, ParamError
from .harmonic import (HarmonicMap, conformal_factor, curvature_term,
                       harmonic_schwarzian, map_value)
from .jets import DiskMobius, Z
from .lift import ahlfors_s1_lemma1, lift_points
from .nehari import NehariFunction, get_nehari

SHARP_C = (1 + math.sqrt(2)) * math.exp(math.pi)
DEFAULT_GRID = (60, 60, 0.95)


def thread_count(threads=None):
    """Worker cap: explicit value, else ``SCHWARZLIFT_THREADS``, else 1."""
    if threads is None:
        threads = os.environ.get("SCHWARZLIFT_THREADS", "1")
    return max(1, int(threads))


def _pmap(fn, items, threads=None):
    items = list(items)
    n = thread_count(threads)
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- criterion ----------------------------------------------------------------

def criterion_lhs(m: HarmonicMap, z):
    """``|Sf| + e^{2σ}|K|``."""
    return np.abs(harmonic_schwarzian(m, z)) + curvature_term(m, z)


def polar_points(nr, ntheta, rmax):
    """Radii ``0 … rmax`` (inclusive) times ``ntheta`` equally spaced angles."""
    radii = rmax * np.arange(nr) / (nr - 1)
    angles = 2 * np.pi * np.arange(ntheta) / ntheta
    return radii, angles, radii[:, None] * np.exp(1j * angles[None, :])


@dataclass
class CriterionReport:
    nr: int
    ntheta: int
    rmax: float
    radii: np.ndarray
    angles: np.ndarray
    margins: np.ndarray
    min_margin: float
    argmin: complex
    equality_locus: np.ndarray
    tol: float
    p_name: str = ""

    @property
    def passed(self):
        return self.min_margin >= -self.tol

    def record(self):
        return {
            "check": "criterion",
            "grid": {"nr": self.nr, "ntheta": self.ntheta, "rmax": self.rmax},
            "p": self.p_name,
            "min_margin": self.min_margin,
            "argmin": [self.argmin.real, self.argmin.imag],
            "max_abs_margin": float(np.max(np.abs(self.margins))),
            "equality_points": int(self.equality_locus.size),
            "pass": bool(self.passed),
        }

    def to_json(self):
        return json.dumps(self.record(), sort_keys=True)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "theta", "margin"])
            for i, r in enumerate(self.radii):
                for j, t in enumerate(self.angles):
                    w.writerow([repr(float(r)), repr(float(t)), repr(float(self.margins[i, j]))])


def _locate_chart_failure(m, z):
    for zk in np.ravel(z):
        try:
            criterion_lhs(m, zk)
        except ChartError as exc:
            raise ChartError(f"{exc} at z={complex(zk):.12g}") from exc


def check_criterion(m: HarmonicMap, p, grid=DEFAULT_GRID, tol=1e-9) -> CriterionReport:
    """Margins ``2p(|z|) − (|Sf| + e^{2σ}|K|)`` on a polar grid ``(nr, ntheta, rmax)``."""
    p = get_nehari(p)
    nr, ntheta, rmax = grid
    radii, angles, z = polar_points(nr, ntheta, rmax)
    try:
        lhs = criterion_lhs(m, z)
    except ChartError:
        _locate_chart_failure(m, z)
        raise
    margins = 2 * p(np.abs(z)) - lhs
    k = int(np.argmin(margins))
    locus = z.ravel()[np.abs(margins.ravel()) <= tol]
    return CriterionReport(nr, ntheta, rmax, radii, angles, margins, float(margins.ravel()[k]),
                           complex(z.ravel()[k]), locus, tol, p.name)


# -- example families -------------------------------------------------------

@dataclass
class ExampleMap:
    family: str
    params: dict
    realized: HarmonicMap
    p: NehariFunction
    closed_forms: dict = field(default_factory=dict)
    source: object = None  # the analytic F of the G-construction, when there is one

    def closed_form_mismatch(self, n=200, radius=0.95, seed=0):
        """Largest relative gap between closed forms and the generic engine."""
        rng = np.random.default_rng(seed)
        z = radius * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
        generic = {
            "schwarzian": lambda w: harmonic_schwarzian(self.realized, w),
            "scale": lambda w: np.exp(conformal_factor(self.realized, w).sigma),
            "curvature_term": lambda w: curvature_term(self.realized, w),
        }
        worst = {}
        for key, fn in self.closed_forms.items():
            a, b = fn(z), generic[key](z)
            worst[key] = float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))
        return worst


def _catenoid_exp(c=60.0, t=1.0):
    if c <= 0 or t <= 0:
        raise ParamError("catenoid_exp needs c > 0 and t > 0")
    k = t * math.pi
    m = HarmonicMap(c * jets.exp(k * Z), jets.exp(-k * Z) / c, (1j / c) * jets.exp(-k * Z),
                    q_inv=(-1j * c) * jets.exp(k * Z), name=f"catenoid_exp(c={c:g}, t={t:g})")

    def scale(z):
        x = np.real(z)
        return k * (c * np.exp(k * x) + np.exp(-k * x) / c)

    closed = {
        "scale": scale,
        "schwarzian": lambda z: -k * k / 2 + 4 * k ** 4 / scale(z) ** 2,
        "curvature_term": lambda z: 4 * k ** 4 / scale(z) ** 2 + 0 * np.real(z),
    }
    return ExampleMap("catenoid_exp", {"c": c, "t": t}, m, get_nehari("pi2over4"), closed)


_STRIP = {
    # F, F', SF for the odd extremal of each weight
    "nehari2": (lambda: jets.atanh(Z),
                lambda z: 1 / (1 - z * z),
                lambda z: 2 / (1 - z * z) ** 2),
    "two_over": (lambda: Z / (2 * (1 - Z * Z)) + 0.5 * jets.atanh(Z),
                 lambda z: 1 / (1 - z * z) ** 2,
                 lambda z: 4 / (1 - z * z)),
}


def _imaginary_axis_sup(F, n=2001):
    y = (1 - 1e-9) * np.linspace(0, 1, n)
    return float(np.max(np.abs(F(1j * y))))


def _g_construction(F, c, name):
    """``h = G``, ``g = 1/G`` with ``G = (cF + i)/(cF − i)`` and ``q = i/G``."""
    G = (c * F + 1j) / (c * F - 1j)
    g = (c * F - 1j) / (c * F + 1j)
    q = 1j * g
    q_inv = -1j * G
    return HarmonicMap(G, g, q, q_inv=q_inv, name=name)


def _g_closed_forms(F, dF, SF, c):
    def parts(z):
        f0 = F(z)
        return f0, dF(z, f0), 1 + c * c * np.abs(f0) ** 2

    def schwarzian(z):
        f0, f1, w = parts(z)
        corr = 4 * c * c * (1 + c * c * np.conj(f0) ** 2) * f1 ** 2 / ((1 + c * c * f0 ** 2) * w ** 2)
        return SF(z) - corr

    def scale(z):
        f0, f1, _ = parts(z)
        return 2 * c * np.abs(f1) * (1 / np.abs(c * f0 - 1j) ** 2 + 1 / np.abs(c * f0 + 1j) ** 2)

    def curv(z):
        f0, f1, w = parts(z)
        return 4 * c * c * np.abs(f1) ** 2 / w ** 2

    return {"schwarzian": schwarzian, "scale": scale, "curvature_term": curv}


def _audit_catenoid_identity(ex, n=100, radius=0.95, seed=1, tol=1e-9):
    rng = np.random.default_rng(seed)
    z = radius * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    G = ex.realized.h(z)
    f = map_value(ex.realized, z)
    gap = np.max(np.abs(f - (G + 1 / np.conj(G))) / np.maximum(1, np.abs(f)))
    if gap > tol:
        raise ParamError(f"f = G + 1/conj(G) fails (relative gap {gap:.3g})")
    return float(gap)


def _strip_catenoid(p_kind="nehari2", c=0.05):
    if p_kind not in _STRIP:
        raise ParamError(f"strip_catenoid p_kind must be one of {sorted(_STRIP)}")
    if c <= 0:
        raise ParamError("strip_catenoid needs c > 0")
    make_F, dF, SF = _STRIP[p_kind]
    F = make_F()
    if 1 / c <= _imaginary_axis_sup(F):
        raise ParamError(f"i/c lies in F(D) for c={c:g}")
    m = _g_construction(F, c, f"strip_catenoid({p_kind}, c={c:g})")
    closed = _g_closed_forms(F, lambda z, f0: dF(z), SF, c)
    ex = ExampleMap("strip_catenoid", {"p_kind": p_kind, "c": c}, m, get_nehari(p_kind), closed, F)
    _audit_catenoid_identity(ex)
    # F odd makes G(-z) = 1/G(z), so h(-z) and g(z) coincide
    w = np.linspace(-0.9, 0.9, 7) * np.exp(0.7j)
    if np.max(np.abs(m.h(-w) - m.g(w))) > 1e-9 * np.max(np.abs(m.g(w))):
        raise ParamError("G(-z) != 1/G(z); F is not odd")
    return ex


def _hille(eps=0.05, c=0.02):
    if eps <= 0 or c <= 0:
        raise ParamError("hille needs eps > 0 and c > 0")
    if 1 / c <= math.exp(eps * math.pi / 2):
        raise ParamError(f"i/c may lie in F(D): need 1/c > exp(eps*pi/2), c={c:g}")
    F = jets.exp(2j * eps * jets.atanh(Z))
    m = _g_construction(F, c, f"hille(eps={eps:g}, c={c:g})")
    closed = _g_closed_forms(F, lambda z, f0: 2j * eps * f0 / (1 - z * z),
                             lambda z: 2 * (1 + eps * eps) / (1 - z * z) ** 2, c)
    ex = ExampleMap("hille", {"eps": eps, "c": c}, m, get_nehari("nehari2"), closed, F)
    _audit_catenoid_identity(ex)
    rng = np.random.default_rng(2)
    z = 0.999 * np.sqrt(rng.uniform(0, 1, 200)) * np.exp(2j * np.pi * rng.uniform(0, 1, 200))
    modulus = np.abs(F(z))
    bound = math.exp(eps * math.pi / 2)
    if np.any(modulus > bound * (1 + 1e-12)) or np.any(modulus < (1 - 1e-12) / bound):
        raise ParamError("|F| leaves [exp(-eps*pi/2), exp(eps*pi/2)]")
    return ex


FAMILIES = {
    "catenoid_exp": _catenoid_exp,
    "strip_catenoid": _strip_catenoid,
    "hille": _hille,
}


def make_example(family: str, params=None) -> ExampleMap:
    if family not in FAMILIES:
        raise ParamError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    params = dict(params or {})
    try:
        return FAMILIES[family](**params)
    except TypeError as exc:
        raise ParamError(f"bad parameters for {family}: {exc}") from exc


# -- the strip example's reduced inequality ---------------------------------

def example2_reduced_margin(F, c, z):
    """``|1−z²|²/(1−|z|²)² − |1−ζ| − 2c²/(1+c²|F|²)²``."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise ParamError("z must lie in the open unit disk")
    f0 = F(z)
    w = (1 + c * c * np.abs(f0) ** 2) ** 2
    zeta = 2 * c * c * (1 + c * c * np.conj(f0) ** 2) / ((1 + c * c * f0 ** 2) * w)
    lhs = np.abs(1 - zeta) + 2 * c * c / w
    rhs = np.abs(1 - z * z) ** 2 / (1 - np.abs(z) ** 2) ** 2
    return rhs - lhs


def level_arc(t, n=400):
    """Upper arc where ``|1−z²|/(1−|z|²) = √(1+t²)``: centre ``−i/t``, through ``±1``."""
    radius = math.sqrt(1 + t * t) / t
    a1 = math.atan2(1 / t, 1)
    alpha = a1 + (math.pi - 2 * a1) * (np.arange(n) + 0.5) / n
    return -1j / t + radius * np.exp(1j * alpha)


def level_arc_sweep(c, ts=(0.25, 0.5, 1.0, 2.0, 4.0), n=400, F=None):
    """Minimum reduced margin along each level arc, keyed by ``t``."""
    F = jets.atanh(Z) if F is None else F
    return {t: float(np.min(example2_reduced_margin(F, c, level_arc(t, n)))) for t in ts}


def probe_strip_c(c=0.05, ts=(0.25, 0.5, 1.0, 2.0, 4.0), n=400):
    """Accept ``c`` when every level-arc sweep has a positive minimum."""
    sweep = level_arc_sweep(c, ts, n)
    return all(v > 0 for v in sweep.values()), sweep


# -- Hille sharpness -------------------------------------------------------------

def hille_delta(ex: ExampleMap, grid=DEFAULT_GRID):
    """Smallest ``δ`` with ``|Sf| + e^{2σ}|K| ≤ (2+δ)/(1−|z|²)²`` on the grid."""
    nr, ntheta, rmax = grid
    _, _, z = polar_points(nr, ntheta, rmax)
    scaled = (1 - np.abs(z) ** 2) ** 2 * criterion_lhs(ex.realized, z)
    return float(np.max(scaled) - 2)


def hille_unit_points(eps, w_max=80.0, n_scan=4001, dps=80):
    """Points of ``(−1, 1)`` where ``((1+z)/(1−z))^{iε} = 1``, located in
    extended precision by bracketing ``Im F`` along the real diameter."""
    with mpmath.workdps(dps):
        ie = mpmath.mpc(0, eps)

        def F(x):
            return mpmath.power((1 + x) / (1 - x), ie)

        w = [mpmath.mpf(w_max) * (2 * k - (n_scan - 1)) / (n_scan - 1) for k in range(n_scan)]
        xs = [mpmath.tanh(v) for v in w]
        vals = [F(x) for x in xs]
        roots = []
        for k in range(n_scan - 1):
            a, b = vals[k], vals[k + 1]
            if mpmath.re(a) <= 0 and mpmath.re(b) <= 0:
                continue
            if mpmath.im(a) == 0 and mpmath.re(a) > 0:
                roots.append(xs[k])
                continue
            if mpmath.sign(mpmath.im(a)) * mpmath.sign(mpmath.im(b)) < 0:
                # near x = 1 the residual is limited by the resolution of 1 − x
                root = mpmath.findroot(lambda x: mpmath.im(F(x)), (xs[k], xs[k + 1]),
                                       solver="anderson", verify=False)
                if abs(root) < 1 and abs(F(root) - 1) < mpmath.mpf(10) ** (-dps // 4):
                    roots.append(root)
        return roots


# -- Möbius transfer -------------------------------------------------------------

def transfer_map(m: HarmonicMap, T: DiskMobius) -> HarmonicMap:
    """``F = f∘T`` as a harmonic map with the composed chart data."""
    t = T.as_analytic()
    q_inv = m.q_inv(t) if m.q_inv is not None else None
    return HarmonicMap(m.h(t), m.g(t), m.q(t), q_inv=q_inv, name=f"{m.name}∘T", audit=False)


def nehari_trick_margin(p, T: DiskMobius, x):
    """``(1−x²)²p(x) − (1−|T(x)|²)²p(|T(x)|)``."""
    p = get_nehari(p)
    x = np.asarray(x, dtype=float)
    tx = np.abs(T(x.astype(complex)))
    return (1 - x * x) ** 2 * p(x) - (1 - tx * tx) ** 2 * p(tx)


@dataclass(frozen=True)
class TransferReport:
    rho: float
    min_margin: float
    schwarzian_gap: float
    scale_gap: float
    trick_margin: float


def mobius_transfer_check(m: HarmonicMap, p, rho, x=None) -> TransferReport:
    """Criterion on ``(−1, 1)`` for ``F = f∘T``, with chain-rule cross-checks."""
    p = get_nehari(p)
    x = np.linspace(-0.95, 0.95, 191) if x is None else np.asarray(x, dtype=float)
    T = DiskMobius(rho)
    F = transfer_map(m, T)
    xc = x.astype(complex)
    margin = 2 * p(x) - criterion_lhs(F, xc)
    tx = T(xc)
    d = T.derivative(xc)
    sf_chain = harmonic_schwarzian(m, tx) * d * d
    sf_direct = harmonic_schwarzian(F, xc)
    sc_chain = np.exp(conformal_factor(m, tx).sigma) * np.abs(d)
    sc_direct = np.exp(conformal_factor(F, xc).sigma)
    return TransferReport(
        float(rho), float(np.min(margin)),
        float(np.max(np.abs(sf_chain - sf_direct) / np.maximum(1, np.abs(sf_direct)))),
        float(np.max(np.abs(sc_chain - sc_direct) / sc_direct)),
        float(np.min(nehari_trick_margin(p, T, x))))


# -- injectivity scan -----------------------------------------------------------

def disk_samples(n, rmax):
    """Sunflower points of the disk plus a ring on ``|z| = rmax`` at the same spacing."""
    k = np.arange(n)
    golden = (3 - math.sqrt(5)) * math.pi
    inner = rmax * np.sqrt((k + 0.5) / n) * np.exp(1j * golden * k)
    spacing = rmax * math.sqrt(math.pi / n)
    n_ring = max(8, int(math.ceil(2 * math.pi * rmax / spacing)))
    ring = rmax * np.exp(2j * np.pi * np.arange(n_ring) / n_ring)
    return np.concatenate([inner, ring]), spacing


@dataclass(frozen=True)
class Collision:
    z1: complex
    z2: complex
    distance: float


@dataclass(frozen=True)
class NearPair:
    z1: complex
    z2: complex
    distance: float
    gap: float


@dataclass
class ScanReport:
    n: int
    rmax: float
    sep: float
    spacing: float
    candidates: int
    collisions: list
    nearest: NearPair

    @property
    def passed(self):
        return not self.collisions

    def record(self):
        near = self.nearest
        return {
            "check": "univalence_scan",
            "grid": {"n": self.n, "rmax": self.rmax, "sep": self.sep},
            "candidates": self.candidates,
            "collisions": [[c.z1.real, c.z1.imag, c.z2.real, c.z2.imag, c.distance]
                           for c in self.collisions],
            "nearest": None if near is None else
            [near.z1.real, near.z1.imag, near.z2.real, near.z2.imag, near.distance, near.gap],
            "min_margin": None if near is None else near.gap,
            "argmin": None if near is None else [near.z1.real, near.z1.imag],
            "pass": self.passed,
        }

    def to_json(self):
        return json.dumps(self.record(), sort_keys=True)


def _polar(v):
    return v[0] * np.exp(1j * v[1]), v[2] * np.exp(1j * v[3])


def _refine_collision(m, z1, z2, rmax, sep, scale):
    def residual(v):
        a, b = _polar(v)
        pa, pb = lift_points(m, np.array([a, b]))
        guard = max(0.0, 0.5 * sep - abs(a - b))
        return np.concatenate([(pa - pb) / scale, [1e3 * guard]])

    v0 = [abs(z1), np.angle(z1), abs(z2), np.angle(z2)]
    lo = [0.0, -np.inf, 0.0, -np.inf]
    hi = [rmax, np.inf, rmax, np.inf]
    v0 = np.clip(v0, lo, hi)
    res = least_squares(residual, v0, bounds=(lo, hi), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    a, b = _polar(res.x)
    pa, pb = lift_points(m, np.array([a, b]))
    return complex(a), complex(b), float(np.linalg.norm(pa - pb))


def _gap(m, a, b):
    pa, pb = lift_points(m, np.array([a, b]))
    es = np.exp(conformal_factor(m, np.array([a, b])).sigma)
    return float(np.linalg.norm(pa - pb) / (abs(a - b) * np.min(es))), float(np.linalg.norm(pa - pb))


def _refine_near(m, z1, z2, rmax, sep):
    def objective(v):
        a, b = _polar(v)
        if abs(a - b) < sep:
            return 1e6
        return _gap(m, a, b)[0]

    v0 = [abs(z1), np.angle(z1), abs(z2), np.angle(z2)]
    res = minimize(objective, v0, method="L-BFGS-B",
                   bounds=[(0, rmax), (None, None), (0, rmax), (None, None)])
    a, b = _polar(res.x)
    if abs(a - b) < sep or objective(res.x) > objective(v0):
        a, b = z1, z2
    gap, dist = _gap(m, a, b)
    return NearPair(complex(a), complex(b), dist, gap)


def univalence_scan(m: HarmonicMap, n=20000, rmax=0.999, sep=0.1, radius_factor=1.0,
                    neighbours=12, max_refine=24, confirm_tol=1e-9, threads=None) -> ScanReport:
    """Falsifier search for ``f̃(z1) = f̃(z2)`` with ``|z1 − z2| ≥ sep``.

    Candidates are sample pairs whose images lie within
    ``radius_factor·spacing·e^σ`` of each other (the image-space sampling
    resolution).  The best candidates are refined by least squares on the
    image difference; a collision is reported only when refinement drives
    it below ``confirm_tol`` relative to the local scale.  Independently,
    the separated pair minimizing ``|Δf̃|/(|Δz|·min e^σ)`` among image-space
    neighbours is refined and reported as the nearest near-collision.
    """
    z, spacing = disk_samples(n, rmax)
    pts = lift_points(m, z)
    es = np.exp(conformal_factor(m, z).sigma)
    tree = cKDTree(pts)

    balls = tree.query_ball_point(pts, r=radius_factor * spacing * es)
    cand = []
    for i, nb in enumerate(balls):
        for j in nb:
            if j > i and abs(z[i] - z[j]) >= sep:
                d = np.linalg.norm(pts[i] - pts[j])
                cand.append((d / max(es[i], es[j]), i, j))
    cand.sort()

    def confirm(item):
        _, i, j = item
        scale = max(es[i], es[j])
        a, b, dist = _refine_collision(m, z[i], z[j], rmax, sep, scale)
        if dist <= confirm_tol * scale and abs(a - b) >= 0.5 * sep:
            return Collision(a, b, dist)
        return None

    found = [c for c in _pmap(confirm, _spread(cand, max_refine, z), threads) if c is not None]

    k = min(neighbours + 1, len(z))
    dist, idx = tree.query(pts, k=k)
    dz = np.abs(z[:, None] - z[idx])
    ok = dz >= sep
    nearest = None
    if np.any(ok):
        denom = np.where(ok, dz * np.minimum(es[:, None], es[idx]), 1.0)
        gap = np.where(ok, dist / denom, np.inf)
        flat = int(np.argmin(gap))
        i, jj = divmod(flat, k)
        nearest = _refine_near(m, z[i], z[idx[i, jj]], rmax, sep)
    return ScanReport(n, rmax, sep, spacing, len(cand), found, nearest)


def _spread(cand, limit, z):
    """Best candidates, skipping ones whose first point repeats an earlier pick."""
    chosen, seen = [], []
    for item in cand:
        zi = z[item[1]]
        if all(abs(zi - s) > 0.05 for s in seen):
            chosen.append(item)
            seen.append(zi)
        if len(chosen) >= limit:
            break
    return chosen


def boundary_cut_sequence(m: HarmonicMap, rmaxs=(0.99, 0.999, 0.9999), n=20000, sep=0.1):
    """Nearest near-collision pairs for a sequence of radii approaching 1."""
    return [(r, univalence_scan(m, n, r, sep, max_refine=0).nearest) for r in rmaxs]


# -- cut-point circle -------------------------------------------------------------

@dataclass(frozen=True)
class CircleAudit:
    radius: float
    circle_residual: float
    height_residual: float
    max_abs_margin: float
    curvature_gap: float
    endpoint_gap: float

    def passed(self, circle_tol=1e-8, margin_tol=1e-9, curvature_tol=1e-6):
        return (self.circle_residual <= circle_tol and self.height_residual <= circle_tol
                and self.max_abs_margin <= margin_tol and self.curvature_gap <= curvature_tol)


def cut_point_circle_audit(ex: ExampleMap, n=201, rmax=0.999) -> CircleAudit:
    """Imaginary diameter of the exponential catenoid: circle, equality, curvature line."""
    if ex.family != "catenoid_exp" or ex.params.get("t", 1.0) != 1.0:
        raise NotApplicable("the circle audit applies to catenoid_exp with t = 1")
    c = ex.params["c"]
    radius = c + 1 / c
    y = rmax * np.linspace(-1, 1, n)
    z = 1j * y
    pts = lift_points(ex.realized, z)
    circle = np.max(np.abs(np.hypot(pts[:, 0], pts[:, 1]) - radius)) / radius
    height = np.max(np.abs(pts[:, 2])) / radius
    margins = 2 * ex.p(np.abs(z)) - criterion_lhs(ex.realized, z)
    terms = ahlfors_s1_lemma1(ex.realized, y, theta=math.pi / 2)
    # κ_e² − |K| relative to |K|; both enter as halves of e^{2σ}-scaled terms
    curv = np.max(np.abs(terms.ke_term - terms.k_term) / terms.k_term)
    ends = lift_points(ex.realized, np.array([1j, -1j]))
    target = np.array([-radius, 0.0, 0.0])
    end_gap = float(np.max(np.abs(ends - target)))
    return CircleAudit(radius, float(circle), float(height), float(np.max(np.abs(margins))),
                       float(curv), end_gap)


EXAMPLES_TABLE = [
    ("catenoid_exp", "c, t", "h = c exp(t pi z), g = exp(-t pi z)/c, q = (i/c) exp(-t pi z)",
     "|Sf| + e^{2s}|K| = t^2 pi^2/2 when c > (1+sqrt 2) e^pi; p = pi^2/4"),
    ("strip_catenoid", "p_kind, c", "G = (cF+i)/(cF-i), h = G, g = 1/G, q = i/G, F odd extremal",
     "equality on the real axis for small c; p = nehari2 or two_over"),
    ("hille", "eps, c", "as strip_catenoid with F = ((1+z)/(1-z))^(i eps)",
     "criterion holds with numerator 2 + delta; F = 1 infinitely often"),
]
