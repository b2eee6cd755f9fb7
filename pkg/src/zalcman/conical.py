"""Conical-point testers and semi-hyperbolicity diagnostics.

mm0_test pulls the disk B(f^n(z0), r) back along the orbit of z0 and tracks
the degree of f^n on the component containing z0.  Each inverse step goes
through the branch of (w - c)^(1/d) that maps f(x) back to x.  When the disk
misses the critical value the branch is univalent on it and the image radii
are bounded in closed form:

    with u0 = x_next - c, t = rho / |u0|:
    |u0|^(1/d) ((1 + t)^(1/d) - 1)  <=  image radius  <=  |u0|^(1/d) (1 - (1 - t)^(1/d))

Both bounds follow from (1 + s)^(1/d) - 1 = s / sum_m (1 + s)^(m/d) and the
coefficient signs of the binomial series.  They are sharper than the generic
Koebe distortion estimate for the same step and just as rigorous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import _kernels
from .errors import NonGeometricGrowth, OrbitEscaped, PreconditionError
from .orbits import shadowed_orbit

MEMBERSHIP_CAP = 10_000
FEIGENBAUM_PARAMETER = -1.4011551890920506


@dataclass(frozen=True)
class PullbackDisk:
    n: int
    center: complex
    radius_lower: float
    radius_upper: float
    degree: int
    certified: bool


@dataclass
class ConicalVerdict:
    z0: complex
    r: float
    d_bound: int
    n_max: int
    qualifying_steps: List[int]
    verdict: str
    certified: bool
    disks: List[PullbackDisk] = field(default_factory=list)

    def disk(self, n):
        return self.disks[n - 1]


def _check_in_julia(fmap, z0, cap=MEMBERSHIP_CAP):
    """Bounded (shadowed) orbit, and |(f^n)'(z0)| not collapsing, which would mean a Fatou basin.

    The shadowed orbit is used so that points of repelling cycles are not
    pushed off their cycle by rounding.  Returns the orbit.
    """
    try:
        orbit, _ = shadowed_orbit(fmap, z0, cap)
    except OrbitEscaped as exc:
        raise OrbitEscaped(exc.index, None, f"z0={z0} escapes at step {exc.index}") from exc
    log_der = 0.0
    for z in orbit[:200]:
        fz = abs(fmap.derivative(complex(z)))
        log_der += math.log(fz) if fz > 0 else -math.inf
        if log_der < -20:
            raise PreconditionError(f"z0={z0} is attracted to a cycle: orbit derivative decays, not in J")
    return orbit


def _inverse_near(fmap, w, hint):
    """The preimage of w under fmap closest to ``hint``."""
    d = fmap.degree
    u = complex(w - fmap.c)
    if u == 0:
        return 0j
    root = u ** (1.0 / d)
    best = None
    for m in range(d):
        cand = root * complex(math.cos(2 * math.pi * m / d), math.sin(2 * math.pi * m / d))
        if best is None or abs(cand - hint) < abs(best - hint):
            best = cand
    return best


def pullback(fmap, orbit, n, r):
    """Pull B(orbit[n], r) back to orbit[0]; returns a PullbackDisk."""
    d = fmap.degree
    x = complex(orbit[n])
    lo = hi = float(r)
    degree = 1
    certified = True
    for j in range(n - 1, -1, -1):
        u = abs(x - fmap.c)
        x_prev = _inverse_near(fmap, x, orbit[j])
        if u > hi:
            scale = u ** (1.0 / d)
            new_lo = scale * math.expm1(math.log1p(lo / u) / d)
            new_hi = -scale * math.expm1(math.log1p(-hi / u) / d)
        else:
            # the critical value may lie in the disk: charge degree d, keep only an enclosing bound
            degree *= d
            certified = False
            new_hi = abs(x_prev) + (u + hi) ** (1.0 / d)
            # heuristic: linearised radius with a quarter-theorem style factor
            lin = d * max(abs(x_prev), lo ** (1.0 / d)) ** (d - 1)
            new_lo = min(new_hi, lo / lin / 4.0)
        lo, hi, x = new_lo, new_hi, x_prev
    return PullbackDisk(n, x, lo, hi, degree, certified)


def mm0_test(fmap, z0, r, d_bound=1, n_max=60):
    """Degree-bounded pullbacks of B(f^n(z0), r) for n <= n_max.

    conical-certified: steps n_max//2 and n_max both qualify through
    univalent (certified) pullbacks, with the enclosing radius shrinking
    between them.  conical-heuristic: same but some step was not certified.
    """
    if not r > 0:
        raise PreconditionError("r must be positive")
    if n_max < 2:
        raise PreconditionError("n_max must be >= 2")
    orbit = _check_in_julia(fmap, z0)[: n_max + 1]
    disks = [pullback(fmap, orbit, n, r) for n in range(1, n_max + 1)]
    qualifying = [dk.n for dk in disks if dk.degree <= d_bound]
    half, full = disks[n_max // 2 - 1], disks[n_max - 1]
    both = half.n in qualifying and full.n in qualifying and full.radius_upper < half.radius_upper
    if both and half.certified and full.certified:
        verdict, certified = "conical-certified", True
    elif both:
        verdict, certified = "conical-heuristic", False
    else:
        verdict, certified = "not-detected", False
    return ConicalVerdict(complex(z0), float(r), d_bound, n_max, qualifying, verdict, certified, disks)


# -- LM1 ------------------------------------------------------------------------------


@dataclass
class LM1Verdict:
    z0: complex
    radii: Tuple[float, ...]
    evidence: bool
    stabilized_depth: dict
    failed_radius: Optional[float]
    indices: Tuple[int, ...]
    heuristic: bool = True

    @property
    def verdict(self):
        return "LM1-evidence" if self.evidence else "not-stabilized"


def recurrent_maxima(fmap, z0, horizon, cluster_eps=1e-6):
    """Indices n where |(f^n)'(z0)| reaches a new maximum and f^n(z0) returns
    to one accumulation cluster; with the orbit and derivative arrays."""
    orbit, landing = shadowed_orbit(fmap, z0, horizon)
    ders = np.empty(horizon + 1, dtype=np.complex128)
    D = 1 + 0j
    for n in range(horizon + 1):
        ders[n] = D
        D = D * fmap.derivative(complex(orbit[n]))
        if abs(D) > 1e250:
            ders = ders[: n + 1]
            orbit = orbit[: n + 1]
            break
    mags = np.abs(ders)
    best, maxima = 1.0, []
    for n in range(1, len(mags)):
        if mags[n] > best:
            best = mags[n]
            maxima.append(n)
    if len(maxima) < 2:
        raise NonGeometricGrowth(f"|(f^n)'({z0})| does not grow within {horizon} steps")
    if landing is not None:
        anchor = orbit[next((n for n in maxima if n >= landing[0]), maxima[-1])]
    else:
        tail = maxima[len(maxima) // 2 :]
        anchor = max(tail, key=lambda n: sum(abs(orbit[m] - orbit[n]) < cluster_eps for m in tail))
        anchor = orbit[anchor]
    chosen = [n for n in maxima if abs(orbit[n] - anchor) < cluster_eps]
    return chosen, orbit, ders


def _rescaled_values(fmap, orbit, ders, n, ws):
    ref = np.ascontiguousarray(orbit[: n + 1])
    scale = 1.0 / complex(ders[n])
    return _kernels.perturbed_eval(ref, fmap.c, scale, ws, fmap.degree, False, _kernels.binomials(fmap.degree))


def _samples(R, n=64):
    t = 2 * np.pi * (np.arange(n) + 0.5) / n
    return np.concatenate([R * np.exp(1j * t), 0.5 * R * np.exp(1j * t[::4]), [0j]])


def lm1_test(fmap, z0, radii=(1.0, 2.0, 4.0, 8.0), max_depth=64, tol=1e-6, horizon=400):
    """Stabilisation of f^{n_k}(z0 + w / (f^{n_k})'(z0)) on |w| <= R for each R.

    The verdict is evidence only: agreement at finite radius and depth does
    not decide full-plane convergence.
    """
    radii = tuple(float(R) for R in radii)
    if not radii or any(R <= 0 for R in radii) or list(radii) != sorted(radii):
        raise PreconditionError("radii must be a positive increasing schedule")
    _check_in_julia(fmap, z0)
    idx, orbit, ders = recurrent_maxima(fmap, z0, horizon)
    idx = idx[: max_depth + 1]
    if len(idx) < 2:
        raise NonGeometricGrowth("fewer than two recurrent derivative maxima")
    stabilized = {}
    for R in radii:
        ws = _samples(R)
        prev, ok_prev = None, None
        found = None
        for k, n in enumerate(idx):
            vals, _, ok = _rescaled_values(fmap, orbit, ders, n, ws)
            if prev is not None and ok.all() and ok_prev.all():
                gap = np.abs(vals - prev) / np.maximum(1.0, np.abs(prev))
                if gap.max() < tol:
                    found = k - 1
                    break
            prev, ok_prev = vals, ok
        if found is None:
            return LM1Verdict(complex(z0), radii, False, stabilized, R, tuple(idx))
        stabilized[R] = found
    return LM1Verdict(complex(z0), radii, True, stabilized, None, tuple(idx))


# -- semi-hyperbolicity -------------------------------------------------------------------


@dataclass
class HyperbolicityReport:
    c0: complex
    X0: Tuple[complex, ...]
    landing_index: Optional[int]
    kappa: Optional[float]
    eta: Optional[float]
    semi_hyperbolic: bool
    separation: float = math.nan


def _greedy_clusters(points, eps):
    reps = []
    for z in points:
        if all(abs(z - r) >= eps for r in reps):
            reps.append(complex(z))
    return reps


def expansion_constants(fmap, X0, steps=32):
    """(kappa, eta) with |(f^n)'(x)| >= kappa (1 + eta)^n for x in X0, n <= steps.

    eta comes from the slowest average growth rate; kappa is then the
    largest constant making the bound hold.  None when growth is absent.
    """
    logs = []
    for x in X0:
        z = complex(x)
        acc = [0.0]
        for _ in range(steps):
            fz = abs(fmap.derivative(z))
            if fz == 0:
                return None, None
            acc.append(acc[-1] + math.log(fz))
            z = fmap(z)
        logs.append(acc)
    logs = np.array(logs)
    rate = float((logs[:, -1] / steps).min())
    if rate <= 0:
        return None, None
    eta = math.exp(rate) - 1.0
    n = np.arange(steps + 1)
    kappa = float(np.exp((logs - n * rate).min()))
    return kappa, eta


def omega_limit_estimate(fmap, c0=None, burn_in=1000, horizon=10_000, cluster_eps=1e-6, separation=1e-4):
    """Cluster representatives of the orbit tail, landing index and expansion fit."""
    start = fmap.c if c0 is None else complex(c0)
    if burn_in >= horizon:
        raise PreconditionError("burn_in must be below horizon")
    orbit, landing = shadowed_orbit(fmap, start, horizon)
    X0 = _greedy_clusters(orbit[burn_in:], cluster_eps)
    landing_index = None
    for n in range(horizon + 1):
        if min(abs(orbit[n] - x) for x in X0) <= 1e-9:
            landing_index = n
            break
    kappa, eta = expansion_constants(fmap, X0)
    sep = float(np.abs(orbit[1:] - start).min())
    semi = bool(eta is not None and sep > separation)
    return HyperbolicityReport(start, tuple(X0), landing_index, kappa, eta, semi, sep)


def semi_hyperbolic_test(fmap, c0=None, horizon=10_000, separation=1e-4):
    """True iff min over 1 <= n <= horizon of |f^n(c0) - c0| exceeds ``separation``."""
    start = fmap.c if c0 is None else complex(c0)
    orbit, _ = shadowed_orbit(fmap, start, horizon)
    return bool(np.abs(orbit[1:] - start).min() > separation)
