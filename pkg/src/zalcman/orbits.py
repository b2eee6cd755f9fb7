"""Periodic points, multipliers, Koenigs/Poincare linearizers and Misiurewicz data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import _kernels
from .dyn import UnicriticalMap, iterate, orbit_with_derivative
from .errors import (
    DepthInsufficient,
    NoConvergence,
    NonMinimalPeriod,
    NotPreperiodic,
    NotRepelling,
    OrbitEscaped,
    PreconditionError,
    SuperattractingCollision,
)

NEWTON_TOL = 1e-13
NEWTON_STEPS = 64
MINIMALITY_TOL = 1e-9
INDIFFERENT_BAND = 1e-6
SUPERATTRACTING_TOL = 1e-10
REVISIT_TOL = 1e-9
CHART_TOL = 1e-10
MAX_CHART_ITERATIONS = 2**20


def proper_divisors(n):
    return [q for q in range(1, n) if n % q == 0]


def classify_multiplier(multiplier):
    m = abs(multiplier)
    if m < SUPERATTRACTING_TOL:
        return "superattracting"
    if abs(m - 1.0) < INDIFFERENT_BAND:
        return "indifferent"
    return "repelling" if m > 1.0 else "attracting"


@dataclass(frozen=True)
class PeriodicOrbit:
    fmap: UnicriticalMap
    point: complex
    period: int
    multiplier: complex
    kind: str
    cycle: Tuple[complex, ...]

    @property
    def residual(self):
        return abs(iterate(self.fmap, self.point, self.period) - self.point)


def _newton_periodic(fmap, period, z):
    radius = fmap.escape_radius
    for _ in range(NEWTON_STEPS):
        tr = orbit_with_derivative(fmap, z, period)
        if tr.escaped_at is not None:
            raise NoConvergence(f"Newton iterate {z} left the filled Julia set region")
        g = tr.final - z
        gp = tr.derivative - 1
        if gp == 0:
            raise NoConvergence(f"singular Newton step at {z}")
        step = g / gp
        z = z - step
        if abs(z) > 2 * radius:
            raise NoConvergence(f"Newton iterate {z} escaped the basin")
        if abs(step) <= NEWTON_TOL * max(1.0, abs(z)):
            return z
    raise NoConvergence(f"no convergence for period {period} after {NEWTON_STEPS} steps")


def find_periodic(fmap, period, seed):
    """Newton on f^p(z) - z from ``seed``; checks that ``period`` is minimal."""
    if period < 1:
        raise PreconditionError("period must be >= 1")
    z = _newton_periodic(fmap, period, complex(seed))
    for q in proper_divisors(period):
        if abs(iterate(fmap, z, q) - z) < MINIMALITY_TOL:
            raise NonMinimalPeriod(q, z, f"period-{period} solve landed on a cycle of period {q}")
    cycle = [z]
    for _ in range(period - 1):
        # each point polished separately so the stored cycle is closed to rounding
        cycle.append(_newton_periodic(fmap, period, fmap(cycle[-1])))
    multiplier = 1 + 0j
    for a in cycle:
        multiplier *= fmap.derivative(a)
    return PeriodicOrbit(fmap, z, period, multiplier, classify_multiplier(multiplier), tuple(cycle))


def cycles_of_period(fmap, period):
    """All cycles of exact period ``period``, from the roots of f^p(z) - z.

    Coefficients are expanded with numpy.polynomial and the roots polished by
    Newton; intended for small d**p only.
    """
    P = np.polynomial.Polynomial
    f = P([fmap.c] + [0] * (fmap.degree - 1) + [1])
    g = P([0, 1])
    for _ in range(period):
        g = f(g)
    roots = (g - P([0, 1])).roots()
    found = []
    for r in roots:
        try:
            orb = find_periodic(fmap, period, r)
        except (NoConvergence, NonMinimalPeriod):
            continue
        if all(min(abs(orb.point - a) for a in o.cycle) > 1e-8 for o in found):
            found.append(orb)
    return found


# -- Poincare functions ------------------------------------------------------------


@dataclass(frozen=True)
class PoincareChart:
    """phi(w) = lim f^{kp}(a0 + w / lambda^k), frozen at a certified depth k."""

    base: PeriodicOrbit
    depth: int
    domain_radius: float
    tol: float = CHART_TOL
    gap: float = 0.0

    def __post_init__(self):
        if not abs(self.base.multiplier) > 1.0 + INDIFFERENT_BAND:
            raise NotRepelling(f"Poincare chart needs a repelling cycle, |multiplier| = {abs(self.base.multiplier)}")

    @property
    def multiplier(self):
        return self.base.multiplier

    def reference(self, k):
        cyc = self.base.cycle
        p = self.base.period
        return np.array([cyc[j % p] for j in range(k * p + 1)], dtype=np.complex128)


def _chart_values(orbit, k, ws):
    fmap = orbit.fmap
    cyc = orbit.cycle
    p = orbit.period
    ref = np.array([cyc[j % p] for j in range(k * p + 1)], dtype=np.complex128)
    scale = complex(orbit.multiplier) ** (-k)
    vals, ders, ok = _kernels.perturbed_eval(
        ref, fmap.c, scale, np.ascontiguousarray(ws, dtype=np.complex128), fmap.degree, False, _kernels.binomials(fmap.degree)
    )
    return vals, ders, ok


def _boundary_samples(radius, n=256):
    t = 2 * np.pi * np.arange(n) / n
    return radius * np.exp(1j * t)


def poincare_chart(orbit, domain_radius=1.0, tol=CHART_TOL):
    """Certify a depth for the linearizer of a repelling cycle on |w| <= R.

    Depths k = 1, 2, 4, ... are tried; the first one whose k and k+1 values
    agree to ``tol`` (relative to max(1, sup|phi|)) on the circle |w| = R is
    kept.  The difference is holomorphic, so the circle bounds the disk.
    """
    if orbit.kind != "repelling":
        raise NotRepelling(f"cycle is {orbit.kind}, not repelling")
    ws = _boundary_samples(domain_radius)
    k = 1
    gap = math.inf
    log_lam = math.log10(abs(orbit.multiplier))
    while k * orbit.period <= MAX_CHART_ITERATIONS and (k + 1) * log_lam < 290:
        v0, _, ok0 = _chart_values(orbit, k, ws)
        v1, _, ok1 = _chart_values(orbit, k + 1, ws)
        if ok0.all() and ok1.all():
            scale = max(1.0, float(np.abs(v0).max()))
            gap = float(np.abs(v0 - v1).max()) / scale
            if gap < tol:
                return PoincareChart(orbit, k, float(domain_radius), tol, gap)
        k *= 2
    raise DepthInsufficient(gap, tol, f"no certified depth on |w| <= {domain_radius}")


def poincare_eval(chart, w, check=True):
    """Evaluate the Poincare function of ``chart`` at w (scalar or array).

    Satisfies phi(0) = a0, phi'(0) = 1 and phi(lambda w) = f^p(phi(w)).
    """
    w_arr = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    if np.any(np.abs(w_arr) > chart.domain_radius * (1 + 1e-12)):
        raise PreconditionError(f"|w| exceeds the chart radius {chart.domain_radius}")
    flat = w_arr.ravel()
    v0, _, ok0 = _chart_values(chart.base, chart.depth, flat)
    if check:
        v1, _, ok1 = _chart_values(chart.base, chart.depth + 1, flat)
        scale = np.maximum(1.0, np.abs(v0))
        gap = float((np.abs(v0 - v1) / scale).max()) if ok1.all() else math.inf
        if not ok0.all() or gap > 2 * chart.tol:
            raise DepthInsufficient(gap, chart.tol)
    out = v0.reshape(w_arr.shape)
    if np.ndim(w) == 0:
        return complex(out[0])
    return out


# -- critical orbits and Misiurewicz data -------------------------------------------


class _RevisitIndex:
    """Spatial hash of orbit points for tolerance-based revisit detection."""

    def __init__(self, tol):
        self.tol = tol
        self.cells = {}

    def _key(self, z):
        return (math.floor(z.real / self.tol), math.floor(z.imag / self.tol))

    def find(self, z):
        kx, ky = self._key(z)
        best = None
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for i, zi in self.cells.get((kx + dx, ky + dy), ()):
                    if abs(zi - z) < self.tol and (best is None or i < best):
                        best = i
        return best

    def add(self, i, z):
        self.cells.setdefault(self._key(z), []).append((i, z))


def shadowed_orbit(fmap, z0, horizon, revisit_tol=REVISIT_TOL):
    """Orbit z0, f(z0), ..., f^horizon(z0) with landing snapped onto the cycle.

    Once a point revisits an earlier one (within ``revisit_tol``) the cycle is
    polished by Newton and the remaining entries are copied from it, so
    repelling cycles are followed exactly instead of drifting off.  Returns
    (orbit array, (l, p) or None).
    """
    z = complex(z0)
    out = np.empty(horizon + 1, dtype=np.complex128)
    index = _RevisitIndex(revisit_tol)
    radius = fmap.escape_radius
    for j in range(horizon + 1):
        if not abs(z) <= radius:
            raise OrbitEscaped(j, z)
        i = index.find(z)
        if i is not None:
            l, p = i, j - i
            cyc = _polish_cycle(fmap, p, out[l])
            for m in range(l, horizon + 1):
                out[m] = cyc[(m - l) % p]
            return out, (l, p)
        index.add(j, z)
        out[j] = z
        z = fmap(z)
    return out, None


def critical_orbit(d, c0, horizon, revisit_tol=REVISIT_TOL):
    """Shadowed orbit of the critical value c0 under z^d + c0."""
    fmap = UnicriticalMap(d, c0)
    return shadowed_orbit(fmap, fmap.c, horizon, revisit_tol)


POLISH_EACH_MAX = 64


def _polish_cycle(fmap, p, seed):
    # long cycles: polish one point only, per-point Newton would cost O(p^2)
    if p > POLISH_EACH_MAX:
        cyc = [complex(seed)]
        for _ in range(p - 1):
            cyc.append(fmap(cyc[-1]))
        return cyc
    try:
        z = _newton_periodic(fmap, p, complex(seed))
    except NoConvergence:
        z = complex(seed)
    if abs(z - seed) > 1e-6:
        z = complex(seed)
    cyc = [z]
    for _ in range(p - 1):
        nxt = fmap(cyc[-1])
        try:
            pol = _newton_periodic(fmap, p, nxt)
            nxt = pol if abs(pol - nxt) < 1e-6 else nxt
        except NoConvergence:
            pass
        cyc.append(nxt)
    return cyc


@dataclass(frozen=True)
class MisiurewiczData:
    degree: int
    c0: complex
    l: int
    p: int
    a0: complex
    A0: complex
    lambda0: complex
    preperiodic: Tuple[complex, ...]
    cycle: Tuple[complex, ...]

    @property
    def fmap(self):
        return UnicriticalMap(self.degree, self.c0)

    def n(self, k):
        return self.l + k * self.p

    def rho(self, k):
        return 1.0 / (self.A0 * self.lambda0**k)

    def reference_orbit(self, n):
        """Exact critical-value orbit z_0 = c0, ..., z_n (cycle part copied)."""
        out = np.empty(n + 1, dtype=np.complex128)
        for j in range(n + 1):
            out[j] = self.preperiodic[j] if j < self.l else self.cycle[(j - self.l) % self.p]
        return out


def misiurewicz_data(d, c0, horizon=200):
    """Preperiod l, period p, landing point a0, A0 = (f^l)'(c0), lambda0 = (f^p)'(a0)."""
    fmap = UnicriticalMap(d, c0)
    try:
        orbit, landing = critical_orbit(d, fmap.c, horizon)
    except OrbitEscaped as exc:
        raise NotPreperiodic(f"critical orbit of c={c0} escapes at step {exc.index}") from exc
    if landing is None:
        raise NotPreperiodic(f"no preperiodic landing within {horizon} steps for c={c0}")
    l, p = landing
    # backward scan for a smaller preperiod (drift can delay the first revisit)
    while l > 0 and abs(orbit[l - 1] - iterate(fmap, orbit[l - 1], p)) < REVISIT_TOL:
        l -= 1
    if l == 0:
        raise NotPreperiodic(f"c={c0} has a periodic critical orbit (superattracting), not Misiurewicz")
    pre = tuple(complex(orbit[j]) for j in range(l))
    if any(abs(z) < SUPERATTRACTING_TOL for z in pre):
        raise SuperattractingCollision(f"critical point lies on the preperiodic orbit of c={c0}")
    try:
        cyc_orbit = find_periodic(fmap, p, orbit[l])
    except NonMinimalPeriod as exc:
        p = exc.actual
        cyc_orbit = find_periodic(fmap, p, orbit[l])
    A0 = 1 + 0j
    for z in pre:
        A0 *= fmap.derivative(z)
    if abs(A0) < SUPERATTRACTING_TOL:
        raise SuperattractingCollision(f"A0 = {A0} vanishes for c={c0}")
    if cyc_orbit.kind != "repelling":
        raise NotRepelling(f"landing cycle of c={c0} is {cyc_orbit.kind}")
    return MisiurewiczData(d, fmap.c, l, p, cyc_orbit.point, A0, cyc_orbit.multiplier, pre, cyc_orbit.cycle)
