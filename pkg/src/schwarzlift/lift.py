"""Weierstrass-Enneper lift of a harmonic map into R^3, lifted curves,
Ahlfors' real Schwarzian S1, space Möbius maps and surface meshes."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import BoundaryIndex, DomainError, InversionPole, NegativeVariance, PathError
from .harmonic import (HarmonicMap, chart_data, conformal_factor, curvature_term,
                       harmonic_schwarzian, map_value)
from .quadrature import DEFAULT_BUDGET, DEFAULT_TOL, segment_integral

__all__ = [
    "SurfacePoint", "lift_point", "lift_points", "surface_normal", "gauss_normal",
    "LiftedCurve", "lift_segment", "curve_derivatives", "s1_from_derivatives",
    "ahlfors_s1_numeric", "s1_profile", "ahlfors_s1_lemma1", "SpaceMobius",
    "apply_space_mobius", "Mesh", "lift_mesh", "write_obj", "write_ply", "read_ply",
    "write_curve_csv",
]


@dataclass(frozen=True)
class SurfacePoint:
    u: float
    v: float
    w: float
    source: complex

    def as_array(self):
        return np.array([self.u, self.v, self.w])


# -- lift --------------------------------------------------------------------

def _height_integrand(m):
    def integrand(w):
        return chart_data(m, w).height_derivs()[0]
    return integrand


def _height(m, z, tol, budget):
    """``W(z) = 2 Im ∫_{z0}^{z} h'q dζ``; vectorized over ``z``."""
    f = _height_integrand(m)
    try:
        return 2 * np.imag(segment_integral(f, m.z0, z, tol, budget))
    except DomainError as exc:
        if m.z0 == 0:
            raise PathError(f"segment from z0 leaves the domain: {exc}") from exc
        try:
            first = segment_integral(f, m.z0, 0.0, tol, budget)
            return 2 * np.imag(first + segment_integral(f, 0.0, z, tol, budget))
        except DomainError as exc2:
            raise PathError(f"straight path and detour via 0 both fail: {exc2}") from exc2


def lift_points(m: HarmonicMap, z, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Lifted coordinates ``(U, V, W)`` as an array of shape ``z.shape + (3,)``."""
    z = np.asarray(z, dtype=complex)
    fz = map_value(m, z)
    w = _height(m, z, tol, budget)
    return np.stack([np.real(fz), np.imag(fz), np.broadcast_to(w, np.shape(fz))], axis=-1)


def lift_point(m: HarmonicMap, z, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET) -> SurfacePoint:
    u, v, w = lift_points(m, complex(z), tol, budget)
    return SurfacePoint(float(u), float(v), float(w), complex(z))


def _partials(m, z):
    """Coordinate partials ``X_x`` and ``X_y`` of the lift, shape ``(..., 3)``."""
    cd = chart_data(m, z)
    h1, _ = cd.h_derivs()
    g1, _ = cd.g_derivs()
    w1, _ = cd.height_derivs()
    fx = h1 + np.conj(g1)
    fy = 1j * h1 - 1j * np.conj(g1)
    xx = np.stack([np.real(fx), np.imag(fx), 2 * np.imag(w1)], axis=-1)
    xy = np.stack([np.real(fy), np.imag(fy), 2 * np.real(w1)], axis=-1)
    return xx, xy


def surface_normal(m: HarmonicMap, z):
    """Unit normal ``X_x × X_y / |X_x × X_y|`` from jets of the chart pair."""
    xx, xy = _partials(m, z)
    n = np.cross(xx, xy)
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


def gauss_normal(m: HarmonicMap, z):
    """Normal from the Gauss map: ``(−2 Im q, −2 Re q, 1 − |q|²)/(1 + |q|²)``."""
    cd = chart_data(m, z)
    k = cd.k.f0
    s = 1 + np.abs(k) ** 2
    h_form = np.stack([-2 * np.imag(k), -2 * np.real(k), 1 - np.abs(k) ** 2], axis=-1)
    # same normal written through k = 1/q
    g_form = np.stack([2 * np.imag(k), -2 * np.real(k), np.abs(k) ** 2 - 1], axis=-1)
    sw = np.asarray(cd.swapped)[..., None]
    return np.where(sw, g_form, h_form) / np.asarray(s)[..., None]


# -- lifted curves -------------------------------------------------------------

@dataclass(frozen=True)
class LiftedCurve:
    """Samples of ``x -> lift(base + x·direction)`` on a uniform grid of ``x``."""

    x: np.ndarray
    points: np.ndarray
    velocity: np.ndarray
    speed: np.ndarray
    normal: np.ndarray
    arclength: np.ndarray
    sources: np.ndarray = field(default=None)

    @property
    def step(self):
        return float(self.x[1] - self.x[0])

    def __len__(self):
        return len(self.x)

    def sample(self, i):
        p = self.points[i]
        src = self.sources[i] if self.sources is not None else complex("nan")
        return (self.x[i], SurfacePoint(*map(float, p), src), self.velocity[i],
                self.speed[i], self.normal[i])


def curve_derivatives(m: HarmonicMap, z, direction=1.0):
    """First and second derivatives of ``t -> lift(z + t·direction)`` at ``t = 0``."""
    d = complex(direction)
    cd = chart_data(m, z)
    h1, h2 = cd.h_derivs()
    g1, g2 = cd.g_derivs()
    w1, w2 = cd.height_derivs()
    d1f = h1 * d + np.conj(g1 * d)
    d2f = h2 * d * d + np.conj(g2 * d * d)
    v1 = np.stack([np.real(d1f), np.imag(d1f), 2 * np.imag(w1 * d)], axis=-1)
    v2 = np.stack([np.real(d2f), np.imag(d2f), 2 * np.imag(w2 * d * d)], axis=-1)
    return v1, v2


def lift_segment(m: HarmonicMap, x, direction=1.0, base=0.0, tol=DEFAULT_TOL) -> LiftedCurve:
    """Lift the straight curve ``base + x·direction`` sampled at the uniform grid ``x``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("x must be a 1-d grid with at least two samples")
    d = complex(direction)
    d = d / abs(d)
    z = base + x * d
    pts = lift_points(m, z, tol)
    vel, _ = curve_derivatives(m, z, d)
    speed = np.linalg.norm(vel, axis=-1)
    normal = surface_normal(m, z)
    if len(x) >= 3:
        arc = cumulative_simpson(speed, x=x, initial=0.0)
    else:
        arc = np.array([0.0, 0.5 * (speed[0] + speed[1]) * (x[1] - x[0])])
    return LiftedCurve(x, pts, vel, speed, normal, arc, z)


def s1_from_derivatives(d1, d2, d3):
    """Ahlfors' S1 from the first three derivatives of a space curve."""
    n1 = np.sum(d1 * d1, axis=-1)
    return (np.sum(d3 * d1, axis=-1) / n1
            - 3 * np.sum(d2 * d1, axis=-1) ** 2 / n1 ** 2
            + 1.5 * np.sum(d2 * d2, axis=-1) / n1)


def _fd_derivatives(points, h, idx):
    p = {k: points[idx + k] for k in range(-3, 4)}
    d1 = (-p[2] + 8 * p[1] - 8 * p[-1] + p[-2]) / (12 * h)
    d2 = (-p[2] + 16 * p[1] - 30 * p[0] + 16 * p[-1] - p[-2]) / (12 * h * h)
    d3 = (-p[3] + 8 * p[2] - 13 * p[1] + 13 * p[-1] - 8 * p[-2] + p[-3]) / (8 * h ** 3)
    return d1, d2, d3


def ahlfors_s1_numeric(c: LiftedCurve, index: int) -> float:
    """S1 at one sample from fourth-order central differences of the samples."""
    n = len(c)
    if index < 0:
        index += n
    if index < 3 or index > n - 4:
        raise BoundaryIndex(f"sample {index} needs three neighbours on each side (n={n})")
    return float(s1_from_derivatives(*_fd_derivatives(c.points, c.step, index)))


def s1_profile(c: LiftedCurve) -> np.ndarray:
    """Numeric S1 at every sample; the three samples at each end are NaN."""
    n = len(c)
    out = np.full(n, np.nan)
    if n >= 7:
        idx = np.arange(3, n - 3)
        out[idx] = s1_from_derivatives(*_fd_derivatives(c.points, c.step, idx))
    return out


@dataclass(frozen=True)
class S1Terms:
    s1: float
    re_sf: float
    k_term: float
    ke_term: float

    def __iter__(self):
        return iter((self.s1, self.re_sf, self.k_term, self.ke_term))


def ahlfors_s1_lemma1(m: HarmonicMap, x, theta=0.0, neg_tol=1e-9) -> S1Terms:
    """S1 of the lifted diameter at angle ``theta`` assembled from surface data.

    ``s1 = Re(e^{2iθ} Sf) + ½ e^{2σ}|K| + ½ e^{2σ} κ_e²`` where
    ``κ_e² = κ² − κ_i²`` and ``e^σ κ_i = −∂σ/∂n`` for the left normal ``n``.
    """
    d = np.exp(1j * theta)
    z = np.asarray(x, dtype=float) * d
    sj = conformal_factor(m, z)
    sf = harmonic_schwarzian(m, z)
    e2s = np.exp(2 * sj.sigma)
    re_sf = np.real(d * d * sf)
    k_term = 0.5 * curvature_term(m, z)
    v1, v2 = curve_derivatives(m, z, d)
    cr = np.cross(v1, v2)
    kappa2 = np.sum(cr * cr, axis=-1) / np.sum(v1 * v1, axis=-1) ** 3
    dn_sigma = 2 * np.real(sj.sigma_z * 1j * d)
    kappa_i2 = dn_sigma ** 2 / e2s
    ke2 = kappa2 - kappa_i2
    if np.any(ke2 < -neg_tol * np.maximum(1.0, kappa2)):
        raise NegativeVariance(f"κ² − κ_i² = {np.min(ke2):.3g} < 0")
    ke2 = np.maximum(ke2, 0.0)
    ke_term = 0.5 * e2s * ke2
    return S1Terms(re_sf + k_term + ke_term, re_sf, k_term, ke_term)


# -- space Möbius maps -------------------------------------------------------

def _apply_op(op, arg, pts):
    if op == "orth":
        return pts @ arg.T
    if op == "translate":
        return pts + arg
    if op == "dilate":
        return pts * arg
    r2 = np.sum(pts * pts, axis=-1, keepdims=True)
    if np.any(r2 == 0):
        raise InversionPole("sample at the inversion centre")
    return pts / r2


def _push_op(op, arg, pts, vecs):
    if op == "orth":
        return vecs @ arg.T
    if op == "translate":
        return vecs
    if op == "dilate":
        return vecs * arg
    r2 = np.sum(pts * pts, axis=-1, keepdims=True)
    if np.any(r2 == 0):
        raise InversionPole("sample at the inversion centre")
    dot = np.sum(pts * vecs, axis=-1, keepdims=True)
    return vecs / r2 - 2 * dot * pts / r2 ** 2


@dataclass(frozen=True)
class SpaceMobius:
    """Composition of orthogonal maps, translations, dilations and the
    inversion ``x -> x/|x|²``; operations apply left to right."""

    ops: tuple = ()

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def orthogonal(cls, matrix):
        mat = np.asarray(matrix, dtype=float)
        if not np.allclose(mat @ mat.T, np.eye(3), atol=1e-12):
            raise ValueError("matrix is not orthogonal")
        return cls((("orth", mat),))

    @classmethod
    def rotation(cls, axis, angle):
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        kx = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
        mat = np.eye(3) + np.sin(angle) * kx + (1 - np.cos(angle)) * kx @ kx
        return cls((("orth", mat),))

    @classmethod
    def translation(cls, vector):
        return cls((("translate", np.asarray(vector, dtype=float)),))

    @classmethod
    def dilation(cls, factor):
        if factor == 0:
            raise ValueError("dilation factor must be nonzero")
        return cls((("dilate", float(factor)),))

    @classmethod
    def inversion(cls):
        return cls((("invert", None),))

    def then(self, other: "SpaceMobius") -> "SpaceMobius":
        """The map ``other ∘ self``."""
        return SpaceMobius(self.ops + other.ops)

    def inverse(self) -> "SpaceMobius":
        inv = []
        for op, arg in reversed(self.ops):
            if op == "orth":
                inv.append((op, arg.T))
            elif op == "translate":
                inv.append((op, -arg))
            elif op == "dilate":
                inv.append((op, 1.0 / arg))
            else:
                inv.append((op, arg))
        return SpaceMobius(tuple(inv))

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        for op, arg in self.ops:
            pts = _apply_op(op, arg, pts)
        return pts

    def push_forward(self, pts, vecs):
        """Images of the points and of tangent vectors attached to them."""
        pts = np.asarray(pts, dtype=float)
        vecs = np.asarray(vecs, dtype=float)
        for op, arg in self.ops:
            vecs = _push_op(op, arg, pts, vecs)
            pts = _apply_op(op, arg, pts)
        return pts, vecs


def apply_space_mobius(T: SpaceMobius, c: LiftedCurve) -> LiftedCurve:
    """Image curve with tangent data carried by the exact differential of ``T``."""
    pts, vel = T.push_forward(c.points, c.velocity)
    _, nrm = T.push_forward(c.points, c.normal)
    nrm = nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)
    speed = np.linalg.norm(vel, axis=-1)
    arc = cumulative_simpson(speed, x=c.x, initial=0.0) if len(c) >= 3 else c.arclength
    return replace(c, points=pts, velocity=vel, speed=speed, normal=nrm, arclength=arc)


# -- meshes ------------------------------------------------------------------

@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray
    normals: np.ndarray
    faces: np.ndarray
    sources: np.ndarray


def polar_grid(nr, ntheta, rmax):
    """Centre followed by ``nr`` rings of ``ntheta`` points, outermost at ``rmax``."""
    radii = rmax * np.arange(1, nr + 1) / nr
    angles = 2 * np.pi * np.arange(ntheta) / ntheta
    ring = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()
    return np.concatenate([[0j], ring])


def lift_mesh(m: HarmonicMap, nr: int, ntheta: int, rmax: float, tol=DEFAULT_TOL) -> Mesh:
    """Triangulated polar-grid mesh of the lift with analytic vertex normals."""
    if not 0 < rmax < 1:
        raise ValueError("rmax must lie in (0, 1)")
    if nr < 1 or ntheta < 3:
        raise ValueError("need nr >= 1 and ntheta >= 3")
    z = polar_grid(nr, ntheta, rmax)
    verts = lift_points(m, z, tol)
    normals = surface_normal(m, z)
    faces = []
    for j in range(ntheta):
        faces.append((0, 1 + j, 1 + (j + 1) % ntheta))
    for k in range(nr - 1):
        inner, outer = 1 + k * ntheta, 1 + (k + 1) * ntheta
        for j in range(ntheta):
            j1 = (j + 1) % ntheta
            a, b = inner + j, inner + j1
            c, d = outer + j, outer + j1
            faces.append((a, c, d))
            faces.append((a, d, b))
    return Mesh(verts, normals, np.array(faces, dtype=np.int64), z)


def write_obj(mesh: Mesh, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for n in mesh.normals:
            fh.write(f"vn {n[0]:.17g} {n[1]:.17g} {n[2]:.17g}\n")
        for f in mesh.faces + 1:
            fh.write(f"f {f[0]}//{f[0]} {f[1]}//{f[1]} {f[2]}//{f[2]}\n")


def write_ply(mesh: Mesh, path):
    """Binary little-endian PLY with double-precision positions and normals."""
    nv, nf = len(mesh.vertices), len(mesh.faces)
    header = (
        "ply\nformat binary_little_endian 1.0\n"
        f"element vertex {nv}\n"
        "property double x\nproperty double y\nproperty double z\n"
        "property double nx\nproperty double ny\nproperty double nz\n"
        f"element face {nf}\n"
        "property list uchar int vertex_indices\nend_header\n"
    )
    vdata = np.hstack([mesh.vertices, mesh.normals]).astype("<f8")
    fdata = np.zeros(nf, dtype=[("n", "u1"), ("idx", "<i4", (3,))])
    fdata["n"] = 3
    fdata["idx"] = mesh.faces
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(vdata.tobytes())
        fh.write(fdata.tobytes())


def read_ply(path) -> Mesh:
    """Read a PLY written by :func:`write_ply`."""
    with open(path, "rb") as fh:
        data = fh.read()
    end = data.index(b"end_header\n") + len(b"end_header\n")
    header = data[:end].decode("ascii").splitlines()
    if "format binary_little_endian 1.0" not in header:
        raise ValueError("only binary little-endian PLY is supported")
    counts = {}
    for line in header:
        parts = line.split()
        if parts[:1] == ["element"]:
            counts[parts[1]] = int(parts[2])
    nv, nf = counts["vertex"], counts["face"]
    vbytes = nv * 6 * 8
    vdata = np.frombuffer(data, dtype="<f8", count=nv * 6, offset=end).reshape(nv, 6)
    fdata = np.frombuffer(data, dtype=[("n", "u1"), ("idx", "<i4", (3,))], count=nf,
                          offset=end + vbytes)
    if np.any(fdata["n"] != 3):
        raise ValueError("only triangle faces are supported")
    return Mesh(vdata[:, :3].copy(), vdata[:, 3:].copy(), fdata["idx"].astype(np.int64),
                np.full(nv, np.nan, dtype=complex))


def write_curve_csv(c: LiftedCurve, path, s1_lemma1=None):
    """CSV ``x,u,v,w,speed,s1_numeric,s1_lemma1``; unavailable values are empty."""
    s1n = s1_profile(c)
    s1l = np.full(len(c), np.nan) if s1_lemma1 is None else np.asarray(s1_lemma1)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["x", "u", "v", "w", "speed", "s1_numeric", "s1_lemma1"])
        for i in range(len(c)):
            row = [c.x[i], *c.points[i], c.speed[i], s1n[i], s1l[i]]
            wr.writerow(["" if np.isnan(val) else repr(float(val)) for val in row])

