"""Nehari weights p, disconjugacy of u'' + p u = 0, and the extremal profile.

The extremal solution ``u0`` (``u0(0) = 1``, ``u0'(0) = 0``) and
``Φ = ∫ u0^{-2}`` are integrated together with an explicit 8th-order
Runge-Kutta scheme; dense output supplies values between grid nodes.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DisconjugacyFailure, NonconvergentLimit, OutOfRange

DEFAULT_RMAX = 1 - 1e-4
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14
SMALL_R = 1e-5


@dataclass(frozen=True)
class NehariFunction:
    """An even weight ``p`` on (-1, 1) with optional closed-form data."""

    name: str
    func: Callable
    expr: str = ""
    phi_closed: Optional[Callable] = None
    lam: Optional[float] = None
    note: str = ""
    strict: bool = True

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def scaled(self, t: float) -> "NehariFunction":
        base = self.func
        return NehariFunction(
            f"{t:g}*{self.name}", lambda x: t * base(x), f"{t!r}*({self.expr})",
            None, None if self.lam is None else t * self.lam,
            note=self.note, strict=self.strict)


def _atanh_phi(x):
    return np.arctanh(x)


def _two_over_phi(x):
    return x / (2 * (1 - x * x)) + 0.25 * np.log((1 + x) / (1 - x))


CATALOGUE = {
    "zero": NehariFunction(
        "zero", lambda x: np.zeros_like(x), "0", lambda x: np.asarray(x, dtype=float),
        0.0, note="degenerate weight; extremal is the identity", strict=False),
    "pi2over4": NehariFunction(
        "pi2over4", lambda x: np.full_like(x, math.pi ** 2 / 4), "pi^2/4",
        lambda x: 2 / math.pi * np.tan(math.pi * np.asarray(x) / 2), 0.0),
    "nehari2": NehariFunction(
        "nehari2", lambda x: 1 / (1 - x * x) ** 2, "1/(1-x^2)^2", _atanh_phi, 1.0),
    "two_over": NehariFunction(
        "two_over", lambda x: 2 / (1 - x * x), "2/(1-x^2)", _two_over_phi, 0.0,
        note="extremal is the integral of (1-x^2)^-2"),
}

# Kept outside the catalogue: its extremal has finite Φ(1), so p ≤ A fails
# near the boundary; the maximal rescaling 2·p is "two_over".
FLAGGED = {
    "one_over": NehariFunction(
        "one_over", lambda x: 1 / (1 - x * x), "1/(1-x^2)", None, 0.0,
        note="incomplete: Φ(1) < ∞; the integral of (1-x^2)^-2 is the extremal of two_over"),
}


def nehari_from_expression(text: str) -> NehariFunction:
    """User weight from an expression in ``x``; the real part is used."""
    from .parser import parse_expression

    fn = parse_expression(text)
    return NehariFunction(text, lambda x: np.real(fn(np.asarray(x, dtype=complex))), text)


def get_nehari(spec) -> NehariFunction:
    """Catalogue key, ``t*key`` scaling, or an expression in ``x``."""
    if isinstance(spec, NehariFunction):
        return spec
    key = spec.strip()
    named = {**CATALOGUE, **FLAGGED}
    if key in named:
        return named[key]
    if "*" in key:
        head, _, tail = key.partition("*")
        if tail.strip() in named:
            try:
                return named[tail.strip()].scaled(float(head))
            except ValueError:
                pass
    return nehari_from_expression(key)


def _rhs(p):
    def rhs(x, y):
        u, du, _ = y
        return [du, -float(p(x)) * u, 1.0 / (u * u)]
    return rhs


def _zero_event(x, y):
    return y[0]


_zero_event.terminal = True
_zero_event.direction = -1


@dataclass(frozen=True)
class ExtremalProfile:
    """Sampled ``u0``, ``Φ``, ``Φ'`` on ``[0, rmax]`` with dense evaluation."""

    p: NehariFunction
    grid: np.ndarray
    u0: np.ndarray
    du0: np.ndarray
    phi: np.ndarray
    phi1: np.ndarray
    rmax: float
    dense: object = field(repr=False)

    def _check(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        if np.any(r > self.rmax * (1 + 1e-12)):
            raise OutOfRange(f"|x| exceeds the profile radius {self.rmax}")
        return r

    def state(self, x):
        """``(u0, u0', Φ)`` at ``|x|`` from the dense interpolant."""
        r = self._check(x)
        y = self.dense(r.ravel())
        return tuple(y[k].reshape(r.shape) for k in range(3))

    def derivatives(self, x):
        """``(Φ, Φ', Φ'', Φ''')`` at ``x`` using the odd extension of ``Φ``."""
        x = np.asarray(x, dtype=float)
        u, du, phi = self.state(x)
        sgn = np.sign(x)
        pv = self.p(np.abs(x))
        d1 = 1 / (u * u)
        d2 = -2 * du / u ** 3
        d3 = 6 * du * du / u ** 4 + 2 * pv / (u * u)
        return sgn * phi, d1, sgn * d2, d3

    def __call__(self, x):
        return self.derivatives(x)[0]

    def log_derivative(self, r):
        """``R = Φ''/Φ'`` and ``R' = 2p + R²/2`` at radius ``r``."""
        r = self._check(r)
        u, du, _ = self.state(r)
        big_r = -2 * du / u
        return big_r, 2 * self.p(r) + 0.5 * big_r ** 2

    def metric_coefficient(self, r):
        """``A(r) = R²/4 + R/(2r)``; ``A(0) = p(0)``."""
        r = self._check(r)
        big_r, _ = self.log_derivative(r)
        small = r < SMALL_R
        safe = np.where(small, 1.0, r)
        a = 0.25 * big_r ** 2 + big_r / (2 * safe)
        limit = self.p(np.zeros_like(r)) + 0.25 * big_r ** 2
        out = np.where(small, limit, a)
        return out[()] if np.ndim(out) == 0 else out

    def metric_curvature(self, r):
        """``|K_g| = 2 Φ'^{-2} (A + p)``."""
        r = self._check(r)
        _, d1, _, _ = self.derivatives(r)
        return 2 * (self.metric_coefficient(r) + self.p(r)) / d1 ** 2

    def inverse_phi(self, s):
        """Radius ``r ≥ 0`` with ``Φ(r) = s`` (odd extension for ``s < 0``)."""
        s = float(s)
        top = float(self.state(self.rmax)[2])
        if abs(s) > top:
            raise OutOfRange(f"|s| = {abs(s)} exceeds Φ(rmax) = {top}")
        if s == 0:
            return 0.0
        r = brentq(lambda t: float(self.state(t)[2]) - abs(s), 0.0, self.rmax, xtol=1e-15)
        return math.copysign(r, s)

    def inverse_phi_array(self, s, iterations=4):
        """Vectorized inverse of ``Φ`` on ``[0, Φ(rmax)]`` by Newton steps."""
        s = np.asarray(s, dtype=float)
        top = float(self.state(self.rmax)[2])
        a = np.abs(s)
        if np.any(a > top * (1 + 1e-12)):
            raise OutOfRange(f"|s| exceeds Φ(rmax) = {top}")
        r = np.interp(a, self.phi, self.grid)
        for _ in range(iterations):
            u, _, phi = self.state(np.clip(r, 0.0, self.rmax))
            r = np.clip(r - (phi - a) * u * u, 0.0, self.rmax)
        return np.sign(s) * r

    def write_csv(self, path):
        a = self.metric_coefficient(self.grid)
        pv = self.p(self.grid)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["x", "u0", "phi", "phi1", "A", "p"])
            for row in zip(self.grid, self.u0, self.phi, self.phi1, a, pv):
                wr.writerow([repr(float(v)) for v in row])


def solve_extremal(p, rmax=DEFAULT_RMAX, n=2001, rtol=ODE_RTOL, atol=ODE_ATOL) -> ExtremalProfile:
    """Integrate ``u'' + p u = 0``, ``u(0)=1``, ``u'(0)=0`` with ``Φ' = u^{-2}``."""
    p = get_nehari(p)
    if not 0 < rmax < 1:
        raise OutOfRange("rmax must lie in (0, 1)")
    grid = np.linspace(0.0, rmax, n)
    sol = solve_ivp(_rhs(p), (0.0, rmax), [1.0, 0.0, 0.0], method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True, events=_zero_event)
    if sol.status != 0:
        # Φ' = u^-2 blows up before the event fires; locate the zero without Φ
        crossing = _first_zero(p, rmax, rtol, atol)
        if crossing is not None:
            raise DisconjugacyFailure(f"u0 vanishes at x = {crossing:.6g} < rmax", crossing)
        raise DisconjugacyFailure(f"integration failed: {sol.message}")
    y = sol.sol(grid)
    if np.any(y[0] <= 0):
        raise DisconjugacyFailure("u0 is not positive on the grid")
    return ExtremalProfile(p, grid, y[0], y[1], y[2], 1 / y[0] ** 2, rmax, sol.sol)


def _first_zero(p, rmax, rtol, atol):
    def rhs(x, y):
        return [y[1], -float(p(x)) * y[0]]

    sol = solve_ivp(rhs, (0.0, rmax), [1.0, 0.0], method="DOP853", rtol=rtol, atol=atol,
                    events=_zero_event)
    hits = sol.t_events[0]
    return float(hits[0]) if len(hits) else None


@dataclass(frozen=True)
class DisconjugacyReport:
    passed: bool
    zeros: tuple
    eps: float
    note: str = ("numerical surrogate: the solution vanishing at -1+eps is "
                 "integrated to 1-eps and its sign changes are counted")


def disconjugacy_check(p, eps=1e-4, rtol=1e-10, atol=1e-12) -> DisconjugacyReport:
    """Count interior zeros of the solution with ``u(−1+ε) = 0``, ``u'(−1+ε) = 1``."""
    p = get_nehari(p)
    start, stop = -1 + eps, 1 - eps

    def ev(x, y):
        return y[0]

    def rhs(x, y):
        return [y[1], -float(p(x)) * y[0]]

    sol = solve_ivp(rhs, (start, stop), [0.0, 1.0], method="DOP853", rtol=rtol,
                    atol=atol, events=ev)
    zeros = tuple(float(t) for t in sol.t_events[0] if t > start + 1e-9)
    return DisconjugacyReport(len(zeros) == 0 and sol.status == 0, zeros, eps)


@dataclass(frozen=True)
class BoundaryLimit:
    lam: float
    mu: float
    estimates: tuple = ()


def lambda_limit(p, deltas=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6), tol=1e-6) -> BoundaryLimit:
    """``λ = lim (1−x²)² p(x)`` as ``x → 1⁻`` by Richardson extrapolation."""
    p = get_nehari(p)
    d = np.asarray(deltas, dtype=float)
    vals = (d * (2 - d)) ** 2 * p(1 - d)
    ratio = d[0] / d[1]
    first = (ratio * vals[1:] - vals[:-1]) / (ratio - 1)
    second = (ratio ** 2 * first[1:] - first[:-1]) / (ratio ** 2 - 1)
    lam = float(second[-1])
    if abs(second[-1] - second[-2]) > tol:
        raise NonconvergentLimit(
            f"extrapolated limits {second[-2]:.9g} and {second[-1]:.9g} disagree")
    if lam > 1 + tol or lam < -tol:
        raise OutOfRange(f"λ = {lam:.9g} lies outside [0, 1]")
    lam = min(max(lam, 0.0), 1.0)
    return BoundaryLimit(lam, 1 + math.sqrt(1 - lam), tuple(second))


def max_nehari_scale(p, tol=1e-3, t_cap=1e4, eps=1e-4) -> float:
    """Largest ``t`` (to ``tol``) with ``t·p`` still passing the disconjugacy check."""
    p = get_nehari(p)
    if not disconjugacy_check(p, eps).passed:
        raise DisconjugacyFailure("p itself fails the disconjugacy check")
    lo, hi = 1.0, 2.0
    while disconjugacy_check(p.scaled(hi), eps).passed:
        lo, hi = hi, 2 * hi
        if hi > t_cap:
            return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if disconjugacy_check(p.scaled(mid), eps).passed:
            lo = mid
        else:
            hi = mid
    return lo
