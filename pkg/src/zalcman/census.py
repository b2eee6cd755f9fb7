"""Preperiodic parameters: Prep(k, l) solving, hyperbolic centres, and
continuation sequences accumulating at an active parameter.

Convention: the orbit starts at the critical value, z_0 = c, z_{m+1} = z_m^d + c.
c is in Prep(k, l) when z_{k+l} = z_k with (k, l) minimal; Prep(0, l) are
the centres of period-l hyperbolic components (f_c^l(0) = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .dyn import OVERFLOW_GUARD, UnicriticalMap
from .errors import ContinuationStalled, NoConvergence, NonMinimalPeriod, PreconditionError
from .orbits import cycles_of_period, proper_divisors

RESIDUAL_TOL = 1e-10
MINIMALITY_TOL = 1e-6
DEDUP_RADIUS = 1e-9
NEWTON_STEPS = 100
STEP_TOL = 1e-14
MULTIPLIER_BAND = 1e-6


@dataclass(frozen=True)
class PrepParameter:
    c: complex
    k: int
    l: int
    misiurewicz: bool
    landing_multiplier: complex
    residual: float
    degree: int = 2


@dataclass
class CensusReport:
    target: complex
    mode: str
    fixed: int
    entries: List[Tuple[PrepParameter, float]] = field(default_factory=list)
    stalled_at: Optional[int] = None


def param_orbit(d, c, n):
    """z_0..z_n and dz_m/dc for the critical-value orbit; works on arrays of c."""
    c = np.asarray(c, dtype=np.complex128)
    zs = np.empty((n + 1,) + c.shape, dtype=np.complex128)
    ds = np.empty_like(zs)
    z = c.copy()
    dz = np.ones_like(c)
    zs[0], ds[0] = z, dz
    with np.errstate(all="ignore"):
        for m in range(n):
            dz = d * z ** (d - 1) * dz + 1
            z = z**d + c
            zs[m + 1], ds[m + 1] = z, dz
    return zs, ds


def prep_residual(d, c, k, l):
    """|f_c^{k+l}(c) - f_c^k(c)|, iterated from scratch."""
    fmap = UnicriticalMap(d, c)
    z = fmap.c
    zk = z if k == 0 else None
    for m in range(1, k + l + 1):
        z = fmap(z)
        if abs(z) > OVERFLOW_GUARD:
            return math.inf
        if m == k:
            zk = z
    return abs(z - zk)


def _gfactor(zs, ds, d, k, l):
    """The factor of Prep(k, l) left after removing all preperiods < k.

    k = 0: h = z_{l-1} (so that f^l(0) = 0, a simple root).
    k >= 1: G = sum_j x^(d-1-j) y^j with x = z_{k-1+l}, y = z_{k-1}, since
    z_{k+l} - z_k = (x - y) G and x - y is the (k-1, l) equation.
    Returns (value, derivative).
    """
    if k == 0:
        return zs[l - 1], ds[l - 1]
    x, dx = zs[k - 1 + l], ds[k - 1 + l]
    y, dy = zs[k - 1], ds[k - 1]
    g = np.zeros_like(x)
    dg = np.zeros_like(x)
    for j in range(d):
        a, b = d - 1 - j, j
        g = g + x**a * y**b
        if a:
            dg = dg + a * x ** (a - 1) * dx * y**b
        if b:
            dg = dg + b * x**a * y ** (b - 1) * dy
    return g, dg


def _newton_step(d, c, k, l):
    """Deflated Newton step for Prep(k, l); divisor periods are divided out."""
    zs, ds = param_orbit(d, c, k + l)
    with np.errstate(all="ignore"):
        g, dg = _gfactor(zs, ds, d, k, l)
        logd = dg / g
        for q in proper_divisors(l):
            gq, dgq = _gfactor(zs, ds, d, k, q)
            logd = logd - dgq / gq
        return 1.0 / logd, g


def _newton(d, seed, k, l):
    c = complex(seed)
    for _ in range(NEWTON_STEPS):
        step, g = _newton_step(d, c, k, l)
        step = complex(step)
        if g == 0:
            return c
        if not (math.isfinite(step.real) and math.isfinite(step.imag)):
            raise NoConvergence(f"Newton for Prep({k},{l}) broke down at c={c}")
        c -= step
        if abs(c) > 4.0:
            raise NoConvergence(f"Newton for Prep({k},{l}) left the parameter disk")
        if abs(step) <= STEP_TOL * max(1.0, abs(c)):
            return c
    raise NoConvergence(f"Newton for Prep({k},{l}) did not converge from {seed}")


def _landing_multiplier(d, c, k, l):
    zs, _ = param_orbit(d, c, k + l)
    m = 1 + 0j
    for j in range(k, k + l):
        m *= d * complex(zs[j]) ** (d - 1)
    return m


def _smaller_type(d, c, k, l):
    """Smallest (k', l') with k' <= k, l' | l, (k', l') != (k, l) that c also solves."""
    for kk in range(0, k + 1):
        for q in [*proper_divisors(l), l]:
            if (kk, q) == (k, l):
                continue
            if prep_residual(d, c, kk, q) < MINIMALITY_TOL:
                return kk, q
    return None


def classify_prep(d, c, k, l):
    """Verify that c solves Prep(k, l) minimally and build the record."""
    res = prep_residual(d, c, k, l)
    if not res < RESIDUAL_TOL:
        raise NoConvergence(f"residual {res:.2e} for Prep({k},{l}) at c={c}")
    smaller = _smaller_type(d, c, k, l)
    if smaller is not None:
        raise NonMinimalPeriod(smaller, c, f"c={c} solves the smaller type Prep{smaller}")
    mult = _landing_multiplier(d, c, k, l)
    return PrepParameter(complex(c), k, l, bool(k >= 1 and abs(mult) > 1 + MULTIPLIER_BAND), mult, res, d)


def solve_prep(d, k, l, seed):
    """Newton in c for f_c^{k+l}(c) = f_c^k(c), deflated against smaller types."""
    if k < 0 or l < 1:
        raise PreconditionError("need k >= 0 and l >= 1")
    UnicriticalMap(d, 0)
    c = _newton(d, seed, k, l)
    return classify_prep(d, c, k, l)


# -- hyperbolic centres ---------------------------------------------------------------


def expected_center_count(d, l):
    """Number of parameters with f_c^l(0) = 0 and l minimal: sum_{q|l} mu(l/q) d^(q-1)."""
    return sum(_mobius(l // q) * d ** (q - 1) for q in range(1, l + 1) if l % q == 0)


def _mobius(n):
    out = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
        p += 1
    return -out if n > 1 else out


def default_region(d):
    r = 2.0 ** (1.0 / (d - 1)) + 0.05
    return (-r, r, -r, r)


def canonical_order(cs):
    return sorted(cs, key=lambda z: (round(z.real, 12), round(z.imag, 12)))


def dedupe(cs, radius=DEDUP_RADIUS):
    out = []
    for z in canonical_order(cs):
        if all(abs(z - w) > radius for w in out):
            out.append(z)
    return canonical_order(out)


def find_superattracting_centers(d, l, region=None, seeds_per_side=None):
    """All c in ``region`` with f_c^l(0) = 0, l minimal (grid-seeded Newton)."""
    if l < 1:
        raise PreconditionError("l must be >= 1")
    x0, x1, y0, y1 = region if region is not None else default_region(d)
    if not (x1 > x0 and y1 > y0):
        raise PreconditionError("region must be a nondegenerate rectangle")
    if seeds_per_side is None:
        seeds_per_side = int(min(1024, max(96, 12 * math.sqrt(d ** (l - 1)))))
    xs = np.linspace(x0, x1, seeds_per_side)
    ys = np.linspace(y0, y1, seeds_per_side)
    c = (xs[None, :] + 1j * ys[:, None]).ravel()
    for _ in range(NEWTON_STEPS):
        step, _ = _newton_step(d, c, 0, l)
        bad = ~np.isfinite(step)
        step[bad] = 0
        c = c - step
        c[bad | (np.abs(c) > 4)] = np.nan
        if np.nanmax(np.abs(step)) < 1e-15:
            break
    c = c[np.isfinite(c)]
    # a final scalar polish, then verification
    found = []
    for z in dedupe(list(c), 1e-7):
        try:
            z = _newton(d, z, 0, l)
            rec = classify_prep(d, z, 0, l)
        except (NoConvergence, NonMinimalPeriod):
            continue
        if x0 <= rec.c.real <= x1 and y0 <= rec.c.imag <= y1:
            found.append(rec)
    keep = dedupe([r.c for r in found])
    return [next(r for r in found if r.c == z) for z in keep]


def center_roots_oracle(d, l):
    """Roots of f_c^l(0) with minimal l via coefficient expansion (numpy roots)."""
    P = np.polynomial.Polynomial
    c = P([0, 1])

    def poly(n):
        z = P([0])
        for _ in range(n):
            z = z**d + c
        return z

    top = poly(l)
    roots = top.roots()
    divisors = [poly(q) for q in proper_divisors(l)]
    keep = [r for r in roots if all(abs(p(r)) > 1e-6 for p in divisors)]
    return canonical_order([complex(r) for r in keep])


# -- continuation sequences -----------------------------------------------------------

MODES = ("thm1-1", "thm1-2", "thm1-3")


def _own_type(d, t0, l_fixed, kmax=64):
    """Smallest k with t0 in Prep(k, l_fixed) at 1e-9, else None."""
    for k in range(kmax):
        if prep_residual(d, t0, k, l_fixed) < 1e-9:
            return k
    return None


def _has_repelling_cycle(d, t0, l):
    if d**l > 4096:
        raise PreconditionError(f"cannot enumerate period-{l} cycles for degree {d}")
    return any(o.kind == "repelling" for o in cycles_of_period(UnicriticalMap(d, t0), l))


def _try(d, seed, k, l):
    try:
        return solve_prep(d, k, l, seed)
    except (NoConvergence, NonMinimalPeriod):
        return None


def _continue_one(d, t0, prev, k, l):
    """One continuation step: halfway seed, then a ring of seeds around t0."""
    t0 = complex(t0)
    primary = _try(d, prev + (t0 - prev) / 2, k, l)
    prev_dist = abs(prev - t0)
    if prev_dist == 0:
        # first step: nothing to beat, ring scale fixed
        prev_dist, ring_scale = math.inf, 0.1
    else:
        ring_scale = prev_dist
    if primary is not None and abs(primary.c - t0) < prev_dist:
        return primary
    best = primary
    for s in (0.5, 0.25, 0.125, 1.0):
        radius = ring_scale * s
        for a in range(8):
            seed = t0 + radius * complex(math.cos(a * math.pi / 4), math.sin(a * math.pi / 4))
            cand = _try(d, seed, k, l)
            if cand is not None and (best is None or abs(cand.c - t0) < abs(best.c - t0)):
                best = cand
        if best is not None and abs(best.c - t0) < prev_dist:
            return best
    return best


def thm1_sequence(d, t0, mode, fixed=None, max_index=10):
    """Prep parameters accumulating at t0 by continuation.

    mode "thm1-1": l = ``fixed``, preperiods k_j increasing (Misiurewicz side).
    mode "thm1-2": k = ``fixed``, periods l_j increasing.
    mode "thm1-3": superattracting centres, periods l_j increasing.
    """
    if mode not in MODES:
        raise PreconditionError(f"mode must be one of {MODES}")
    if max_index < 1:
        raise PreconditionError("max_index must be >= 1")
    t0 = complex(t0)
    UnicriticalMap(d, t0)
    if mode == "thm1-1":
        l = int(fixed if fixed is not None else 1)
        if not _has_repelling_cycle(d, t0, l):
            raise PreconditionError(f"f_t0 has no repelling cycle of period {l}")
        own = _own_type(d, t0, l)
        start = 1 if own is None else own + 1
        types = [(start + j, l) for j in range(max_index)]
    elif mode == "thm1-2":
        k = int(fixed if fixed is not None else 1)
        types = [(k, 1 + j) for j in range(max_index)]
    else:
        types = [(0, 1 + j) for j in range(max_index)]
    report = CensusReport(t0, mode, types[0][1] if mode == "thm1-1" else types[0][0], [])
    prev = t0
    for j, (k, l) in enumerate(types, start=1):
        rec = _continue_one(d, t0, prev, k, l)
        if rec is None:
            report.stalled_at = j
            raise ContinuationStalled(report, j, f"continuation stalled at index {j} (type ({k},{l}))")
        report.entries.append((rec, abs(rec.c - t0)))
        prev = rec.c
    return report
