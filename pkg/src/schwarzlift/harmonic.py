"""Harmonic maps f = h + conj(g) with dilatation q², their conformal factor,
harmonic Schwarzian and the Gauss curvature of the minimal-surface lift."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChartError, DomainError, ParamError
from .jets import AnalyticFn, Jet3, classical_schwarzian

__all__ = [
    "HarmonicMap", "SigmaJet", "ChartData", "chart_data", "conformal_factor",
    "harmonic_schwarzian", "gauss_curvature", "curvature_term", "map_value",
]

_ZERO_DERIVATIVE = 1e-300


class HarmonicMap:
    """A harmonic map ``h + conj(g)`` with ``g' = q² h'``.

    ``q_inv`` optionally supplies ``1/q`` as its own expression for maps
    where ``q`` has poles; otherwise the g-chart uses the reciprocal jet.
    The construction audit compares ``g'`` with ``q² h'`` at ``n_audit``
    seeded random points of the disk of radius ``audit_radius``.
    """

    def __init__(self, h: AnalyticFn, g: AnalyticFn, q: AnalyticFn, z0=0.0,
                 q_inv: AnalyticFn | None = None, name: str = "", audit=True,
                 n_audit=100, audit_radius=0.95, seed=0, audit_tol=1e-9):
        self.h, self.g, self.q = h, g, q
        self.q_inv = q_inv
        self.z0 = complex(z0)
        self.name = name
        if audit:
            self.audit(n_audit, audit_radius, seed, audit_tol)

    def __repr__(self):
        label = self.name or f"h={self.h}, g={self.g}, q={self.q}"
        return f"HarmonicMap({label})"

    def audit(self, n=100, radius=0.95, seed=0, tol=1e-9):
        """Largest relative mismatch of ``g'`` against ``q² h'``; raises on failure."""
        rng = np.random.default_rng(seed)
        r = radius * np.sqrt(rng.uniform(0, 1, n))
        z = r * np.exp(2j * np.pi * rng.uniform(0, 1, n))
        worst = 0.0
        for zk in z:
            try:
                g1 = self.g.jet(zk).f1
                qh = self.q(zk) ** 2 * self.h.jet(zk).f1
            except DomainError:
                continue
            denom = abs(g1) + abs(qh)
            if denom == 0:
                continue
            rel = abs(g1 - qh) / denom
            worst = max(worst, rel)
            if rel > tol:
                raise ParamError(f"g' != q^2 h' at z={zk:.6g} (relative mismatch {rel:.3g})")
        return worst


@dataclass(frozen=True)
class ChartData:
    """Jets in the chart ``(a, k)``: ``(h, q)`` or ``(g, 1/q)``.

    ``swapped`` is True where the g-chart was used.
    """

    a: Jet3
    k: Jet3
    swapped: object

    @property
    def weight(self):
        return 1 + np.abs(self.k.f0) ** 2

    def h_derivs(self):
        """``(h', h'')`` in either chart."""
        a, k = self.a, self.k
        sw = self.swapped
        h1 = np.where(sw, a.f1 * k.f0 ** 2, a.f1)
        h2 = np.where(sw, a.f2 * k.f0 ** 2 + 2 * a.f1 * k.f0 * k.f1, a.f2)
        return _squeeze(h1), _squeeze(h2)

    def g_derivs(self):
        """``(g', g'')`` in either chart."""
        a, k = self.a, self.k
        sw = self.swapped
        g1 = np.where(sw, a.f1, a.f1 * k.f0 ** 2)
        g2 = np.where(sw, a.f2, a.f2 * k.f0 ** 2 + 2 * a.f1 * k.f0 * k.f1)
        return _squeeze(g1), _squeeze(g2)

    def height_derivs(self):
        """``(h'q, (h'q)')``; the chart products ``a'k`` agree in both charts."""
        a, k = self.a, self.k
        return _squeeze(a.f1 * k.f0), _squeeze(a.f2 * k.f0 + a.f1 * k.f1)


def _squeeze(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


def _merge(full, part, mask):
    return Jet3(*(np.where(mask, p, f) for f, p in zip(full, part)))


def chart_data(m: HarmonicMap, z, chart="auto") -> ChartData:
    """Jets of the chart pair at ``z``; the g-chart is used where ``|q| > 1``."""
    z = np.asarray(z, dtype=complex)
    hj = m.h.jet(z)
    try:
        qj = m.q.jet(z)
        q_ok = True
    except DomainError:
        if m.q_inv is None:
            raise
        q_ok = False

    if chart == "h":
        if not q_ok:
            raise ChartError("q has a pole; the h-chart is unavailable")
        swap = np.zeros(z.shape, dtype=bool)
    elif chart == "g":
        swap = np.ones(z.shape, dtype=bool)
    elif not q_ok:
        swap = np.ones(z.shape, dtype=bool)
    else:
        swap = (np.abs(qj.f0) > 1) | (np.abs(hj.f1) <= _ZERO_DERIVATIVE)

    if not np.any(swap):
        a, k = hj, qj
    else:
        zs = z[swap] if z.ndim else z
        gj = m.g.jet(zs)
        if m.q_inv is not None:
            kj = m.q_inv.jet(zs)
        else:
            if np.any(np.asarray(qj.take(swap).f0 if z.ndim else qj.f0) == 0):
                raise ChartError("q vanishes in the g-chart and no 1/q expression was given")
            kj = (qj.take(swap) if z.ndim else qj).reciprocal()
        if z.ndim == 0:
            a, k = gj, kj
        elif np.all(swap):
            a, k = gj, kj
        else:
            a = _merge(hj, _scatter(gj, swap, z.shape), swap)
            k = _merge(qj, _scatter(kj, swap, z.shape), swap)

    if np.any(np.abs(np.asarray(a.f1)) <= _ZERO_DERIVATIVE):
        raise ChartError("both h' and g' vanish; e^sigma = 0")
    return ChartData(a, k, swap if z.ndim else bool(swap))


def _scatter(jet, mask, shape):
    out = []
    for c in jet:
        full = np.ones(shape, dtype=complex)
        full[mask] = c
        out.append(full)
    return Jet3(*out)


@dataclass(frozen=True)
class SigmaJet:
    """Log conformal factor and its Wirtinger derivatives at a point."""

    sigma: float
    sigma_z: complex
    sigma_zz: complex
    sigma_zzbar: float
    swapped: object = False

    @property
    def sigma_x(self):
        return 2 * np.real(self.sigma_z)

    @property
    def sigma_y(self):
        return -2 * np.imag(self.sigma_z)

    @property
    def laplacian(self):
        return 4 * self.sigma_zzbar

    @property
    def scale(self):
        """``e^σ``."""
        return np.exp(self.sigma)


def _sigma_from_chart(cd: ChartData) -> SigmaJet:
    a, k = cd.a, cd.k
    s = 1 + np.abs(k.f0) ** 2
    ratio = a.f2 / a.f1
    kk = np.conj(k.f0) * k.f1 / s
    sigma = np.log(np.abs(a.f1)) + np.log(s)
    sigma_z = ratio / 2 + kk
    sigma_zz = 0.5 * (a.f3 / a.f1 - ratio ** 2) + np.conj(k.f0) * k.f2 / s - kk ** 2
    sigma_zzbar = np.abs(k.f1) ** 2 / s ** 2
    return SigmaJet(*(_squeeze(v) for v in (sigma, sigma_z, sigma_zz, sigma_zzbar)), cd.swapped)


def conformal_factor(m: HarmonicMap, z, chart="auto") -> SigmaJet:
    """``σ = log(|h'| + |g'|)`` with ``σ_z``, ``σ_zz``, ``σ_zz̄`` from closed forms."""
    return _sigma_from_chart(chart_data(m, z, chart))


def harmonic_schwarzian(m: HarmonicMap, z, method="hq", chart="auto"):
    """Harmonic Schwarzian of ``f`` at ``z``.

    ``method="hq"`` uses the expansion in the chart pair ``(a, k)``;
    ``method="sigma"`` evaluates ``2(σ_zz − σ_z²)``.
    """
    cd = chart_data(m, z, chart)
    if method == "sigma":
        sj = _sigma_from_chart(cd)
        return _squeeze(2 * (sj.sigma_zz - sj.sigma_z ** 2))
    if method != "hq":
        raise ValueError(f"unknown method {method!r}")
    a, k = cd.a, cd.k
    s = 1 + np.abs(k.f0) ** 2
    kbar = np.conj(k.f0)
    out = (classical_schwarzian(a, tol=_ZERO_DERIVATIVE)
           + 2 * kbar / s * (k.f2 - k.f1 * a.f2 / a.f1)
           - 4 * (k.f1 * kbar / s) ** 2)
    return _squeeze(out)


def curvature_term(m: HarmonicMap, z, chart="auto"):
    """``e^{2σ}|K| = Δσ = 4|q'|²/(1+|q|²)²``."""
    cd = chart_data(m, z, chart)
    s = 1 + np.abs(cd.k.f0) ** 2
    return _squeeze(4 * np.abs(cd.k.f1) ** 2 / s ** 2)


def gauss_curvature(m: HarmonicMap, z, chart="auto"):
    """Gauss curvature ``K = −4|q'|²/(|h'|²(1+|q|²)⁴)`` of the lift, always ≤ 0."""
    cd = chart_data(m, z, chart)
    s = 1 + np.abs(cd.k.f0) ** 2
    return _squeeze(-4 * np.abs(cd.k.f1) ** 2 / (np.abs(cd.a.f1) ** 2 * s ** 4))


def map_value(m: HarmonicMap, z):
    """``f(z) = h(z) + conj(g(z))``."""
    return m.h(z) + np.conj(m.g(z))
