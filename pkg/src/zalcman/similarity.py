"""Rescaling limits at a Misiurewicz parameter and the Julia/Mandelbrot similarity.

For a Misiurewicz c0 with data (l, p, a0, A0, lambda0) the maps

    phi_k(w) = f^{l + k p}(c0 + rho_k w),   rho_k = 1 / (A0 lambda0^k)

converge to an entire phi with phi(0) = a0.  The model set is phi^{-1}(J).
Rescaled pieces of J (centred at c0, scale rho_k) and of M (centred at c0,
scale Q rho_k) both converge to it after truncation at radius r.

Grid sets here are built from escape data plus a distance estimate: a cell is
marked when its orbit stays bounded, or when the estimated distance from the
cell centre to the set is below ``tau * h``.  Julia sets at Misiurewicz
parameters have no interior, so a bounded-orbit test alone would mark almost
nothing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import _kernels
from .compact import Frame, GridSet, hausdorff_distance, truncate
from .dyn import UnicriticalMap, escape_radius
from .errors import (
    DepthInsufficient,
    DynamicsError,
    NonGeometricGrowth,
    OrbitEscaped,
    PreconditionError,
)
from .orbits import MisiurewiczData, critical_orbit, misiurewicz_data

DEFAULT_CAP = 4096
DEFAULT_TAU = 1.0
DEPTH_TOL = 1e-8
DERIV_LIMIT = 1e250


# -- the similarity constant ---------------------------------------------------------


def _orbit_derivatives(d, c0, horizon):
    """Critical-value orbit z_0..z_horizon and D_n = (f^n)'(c0), n = 0..horizon.

    Stops early (shorter arrays) once |D_n| passes DERIV_LIMIT.
    """
    zs, landing = critical_orbit(d, c0, horizon)
    ders = np.empty(horizon + 1, dtype=np.complex128)
    D = 1 + 0j
    n_used = horizon
    for n in range(horizon + 1):
        ders[n] = D
        if abs(D) > DERIV_LIMIT:
            n_used = n
            break
        D = D * d * complex(zs[n]) ** (d - 1)
    return zs[: n_used + 1], ders[: n_used + 1], landing


def lambda_series(d, c0, tail_tol=1e-15, horizon=10_000, window=16):
    """Sum over n >= 0 of 1 / (f^n)'(c0) along the critical-value orbit.

    Summation stops once the tail, estimated from the geometric decay rate
    over the last ``window`` terms, is below ``tail_tol``.  Raises
    NonGeometricGrowth if that never happens within ``horizon`` terms.
    """
    try:
        _, ders, _ = _orbit_derivatives(d, c0, horizon)
    except OrbitEscaped as exc:
        raise PreconditionError(f"c0={c0} is not in M: critical orbit escapes") from exc
    if np.any(ders == 0):
        raise NonGeometricGrowth(f"critical orbit of c0={c0} returns to the critical point")
    terms = 1.0 / ders
    mags = np.abs(terms)
    total = 0j
    for n, t in enumerate(terms):
        total += t
        if n >= window:
            recent = mags[n - window + 1 : n + 1]
            if recent[0] == 0:
                break
            ratio = (recent[-1] / recent[0]) ** (1.0 / (window - 1))
            if ratio < 1:
                tail = recent.max() * ratio / (1 - ratio)
                if tail < tail_tol:
                    return complex(total)
        if mags[n] < 1e-300:
            return complex(total)
    raise NonGeometricGrowth(f"series for c0={c0} not certified within {horizon} terms")


def similarity_constant(d, c0, **kw):
    """Q with c0 + Q rho_k w on the parameter side matching c0 + rho_k w
    on the dynamical side.

    d/dc f_c^n(c) = (f^n)'(c0) * sum_{m<=n} 1/(f^m)'(c0), so a parameter
    offset Q*eps moves f^n(c) like a dynamical offset eps exactly when
    Q * lambda = 1; hence Q = 1 / lambda_series.
    """
    return 1.0 / lambda_series(d, c0, **kw)


def similarity_constant_direct(d, c0, n):
    """Finite-n ratio (f^n)'(c0) / (d/dc f_c^n(c)) at c0; tends to Q."""
    from .dyn import param_orbit_with_derivative, orbit_with_derivative

    _, dparam = param_orbit_with_derivative(d, complex(c0), n)
    tr = orbit_with_derivative(UnicriticalMap(d, c0), complex(c0), n)
    return tr.derivative / dparam


# -- rescaling sequences -------------------------------------------------------------


@dataclass(frozen=True)
class RescalingSequence:
    entries: Tuple[Tuple[int, complex], ...]

    def __len__(self):
        return len(self.entries)

    @property
    def n(self):
        return [e[0] for e in self.entries]

    @property
    def rho(self):
        return [e[1] for e in self.entries]


def misiurewicz_sequence(data, k_max):
    return RescalingSequence(tuple((data.n(k), data.rho(k)) for k in range(k_max + 1)))


def self_similarity_sequence(d, c0, horizon=200, cluster_eps=1e-6):
    """Scales 1/(f^n)'(c0) at running maxima of |(f^n)'(c0)|.

    Only indices whose orbit point sits in one accumulation cluster are kept:
    the cluster of the landing point when the orbit lands on a cycle,
    otherwise the cluster holding most of the running maxima.  The scales
    are derivative based, which is right only while the pullbacks stay
    univalent; critical points inside the pullbacks are not handled.
    """
    try:
        zs, ders, landing = _orbit_derivatives(d, c0, horizon)
    except OrbitEscaped as exc:
        raise PreconditionError(f"c0={c0} is not in M") from exc
    mags = np.abs(ders)
    best = -1.0
    maxima = []
    for n in range(1, len(mags)):
        if mags[n] > best:
            best = mags[n]
            maxima.append(n)
    if len(maxima) < 2 or mags[-1] <= 1.0:
        raise NonGeometricGrowth(f"derivative growth not observed for c0={c0} within {horizon} steps")
    if landing is not None:
        anchor = zs[landing[0]]
    else:
        tail = maxima[len(maxima) // 2 :]
        reps = _greedy_clusters([zs[n] for n in tail], cluster_eps)
        counts = [sum(abs(zs[n] - r) < cluster_eps for n in tail) for r in reps]
        anchor = reps[int(np.argmax(counts))]
    chosen = [n for n in maxima if abs(zs[n] - anchor) < cluster_eps]
    if len(chosen) < 2:
        raise NonGeometricGrowth(f"no recurrent running maxima for c0={c0}")
    return RescalingSequence(tuple((n, complex(1.0 / ders[n])) for n in chosen))


def _greedy_clusters(points, eps):
    reps = []
    for z in points:
        if all(abs(z - r) >= eps for r in reps):
            reps.append(z)
    return reps


# -- Zalcman maps on a grid ----------------------------------------------------------


@dataclass
class ZalcmanGrid:
    frame: Frame
    depth: int
    values: np.ndarray
    derivatives: np.ndarray
    info: dict = field(default_factory=dict)


def _flat_points(frame, r=None):
    pts = frame.points()
    if r is None:
        sel = np.ones(pts.shape, dtype=bool)
    else:
        sel = np.abs(pts) <= r + frame.spacing
    return pts, sel


def _phi_values(data, k, ws):
    ref = data.reference_orbit(data.n(k))
    return _kernels.perturbed_eval(
        ref, data.c0, data.rho(k), np.ascontiguousarray(ws, dtype=np.complex128), data.degree, False,
        _kernels.binomials(data.degree),
    )


def depth_gap(data, frame, k):
    """sup over the frame of |phi_k - phi_{k+1}|."""
    ws = frame.points().ravel()
    v0, _, ok0 = _phi_values(data, k, ws)
    v1, _, ok1 = _phi_values(data, k + 1, ws)
    if not (ok0.all() and ok1.all()):
        return math.inf
    return float(np.abs(v0 - v1).max())


def certified_depth(data, frame, tol=DEPTH_TOL, k_max=None):
    """Smallest k with sup-grid |phi_k - phi_{k+1}| < tol."""
    lam = abs(data.lambda0)
    if k_max is None:
        k_max = int(280 / math.log10(lam)) - 1
    gap = math.inf
    for k in range(k_max + 1):
        gap = depth_gap(data, frame, k)
        if gap < tol:
            return k, gap
    raise DepthInsufficient(gap, tol, f"no depth <= {k_max} certified on the frame")


def zalcman_limit_grid(data, frame, depth):
    """phi_depth at each cell centre, with the depth gap carried in ``info``."""
    pts = frame.points()
    vals, ders, ok = _phi_values(data, depth, pts.ravel())
    gap = depth_gap(data, frame, depth)
    info = {"gap": gap, "certified": bool(gap < DEPTH_TOL), "overflow": int((~ok).sum())}
    if not info["certified"]:
        warnings.warn(f"depth {depth} not certified: gap {gap:.2e}", RuntimeWarning, stacklevel=2)
    return ZalcmanGrid(frame, depth, vals.reshape(frame.shape), ders.reshape(frame.shape), info)


# -- set builders ---------------------------------------------------------------------


def _classified_set(data, frame, r, n_ref, scale, param_mode, cap, tau):
    if r > frame.half_width:
        raise PreconditionError(f"r={r} exceeds frame half_width {frame.half_width}")
    pts, sel = _flat_points(frame, r)
    ws = np.ascontiguousarray(pts[sel])
    ref = data.reference_orbit(n_ref)
    # the parameter moves with w in param mode, so bound |c| over the frame
    radius = escape_radius(data.degree, abs(data.c0) + abs(scale) * 1.5 * frame.half_width)
    esc, dist = _kernels.classify(
        ref, data.c0, complex(scale), ws, data.degree, param_mode, _kernels.binomials(data.degree),
        float(radius), int(n_ref + 2 * cap),
    )
    near = dist < tau * frame.spacing
    marked_cap = (esc < 0) | (esc > n_ref + cap) | near
    marked_2cap = (esc < 0) | near
    mask = np.zeros(frame.shape, dtype=bool)
    mask[sel] = marked_cap
    info = {
        "bounded": int((esc < 0).sum()),
        "near": int(near.sum()),
        "flipped": int((marked_cap != marked_2cap).sum()),
        "cap": cap,
        "tau": tau,
    }
    return truncate(GridSet(frame, mask, info), r)


def model_set(data, frame, r=1.0, depth=None, cap=DEFAULT_CAP, tau=DEFAULT_TAU):
    """[phi^{-1}(J)]_r with phi replaced by phi_depth at a certified depth."""
    if depth is None:
        depth, gap = certified_depth(data, frame)
    else:
        gap = depth_gap(data, frame, depth)
    s = _classified_set(data, frame, r, data.n(depth), data.rho(depth), False, cap, tau)
    s.info.update(depth=depth, depth_gap=gap, certified=bool(gap < DEPTH_TOL))
    return s


def julia_rescaled_set(data, k, frame, r=1.0, cap=DEFAULT_CAP, tau=DEFAULT_TAU):
    """[rho_k^{-1}(J - c0)]_r: cell w marked when c0 + rho_k w is in J."""
    return _classified_set(data, frame, r, data.n(k), data.rho(k), False, cap, tau)


def mandelbrot_rescaled_set(data, Q, k, frame, r=1.0, cap=DEFAULT_CAP, tau=DEFAULT_TAU):
    """[(Q rho_k)^{-1}(M - c0)]_r: cell w marked when c0 + Q rho_k w is in M."""
    Q = complex(Q)
    if Q == 0:
        raise PreconditionError("Q must be nonzero")
    return _classified_set(data, frame, r, data.n(k), Q * data.rho(k), True, cap, tau)


# -- the full report -------------------------------------------------------------------


@dataclass
class SimilarityRow:
    k: int
    n: int
    rho: complex
    julia: Optional[GridSet]
    mandel: Optional[GridSet]
    d_julia: float
    d_mandel: float
    d_between: float
    error: Optional[str] = None


@dataclass
class SimilarityReport:
    data: MisiurewiczData
    lam: complex
    Q: complex
    r: float
    k_range: Tuple[int, int]
    frame: Frame
    model: GridSet
    rows: List[SimilarityRow]
    grid_tolerance: float
    slope: Optional[float] = None
    slope_rows: int = 0


def report_frame(r=1.0, resolution=512, half_width=None):
    return Frame(0j, 1.05 * r if half_width is None else half_width, resolution)


def rate_slope(rows, h):
    """Slope of log d_between against log sqrt|rho_k| over rows with d_between > 3h."""
    use = [row for row in rows if row.error is None and row.d_between > 3 * h]
    if len(use) < 2:
        return None, len(use)
    x = np.array([0.5 * math.log(abs(row.rho)) for row in use])
    y = np.array([math.log(row.d_between) for row in use])
    slope = float(np.polyfit(x, y, 1)[0])
    return slope, len(use)


def similarity_report(d, c0, r=1.0, frame_resolution=512, k_min=1, k_max=6, cap=DEFAULT_CAP,
                      tau=DEFAULT_TAU, Q=None, keep_sets=True):
    """Model set, rescaled J and M pieces for k_min..k_max and their distances."""
    frame = report_frame(r, frame_resolution)
    if r > frame.half_width:
        raise PreconditionError("r exceeds the frame")
    if k_min < 0 or k_max < k_min:
        raise PreconditionError("need 0 <= k_min <= k_max")
    data = misiurewicz_data(d, c0)
    lam = lambda_series(d, data.c0)
    if Q is None:
        Q = 1.0 / lam
    model = model_set(data, frame, r, cap=cap, tau=tau)
    rows = []
    for k in range(k_min, k_max + 1):
        try:
            js = julia_rescaled_set(data, k, frame, r, cap, tau)
            ms = mandelbrot_rescaled_set(data, Q, k, frame, r, cap, tau)
            row = SimilarityRow(
                k, data.n(k), data.rho(k), js if keep_sets else None, ms if keep_sets else None,
                hausdorff_distance(js, model), hausdorff_distance(ms, model), hausdorff_distance(js, ms),
            )
        except (DynamicsError, ValueError) as exc:
            row = SimilarityRow(k, data.n(k), data.rho(k), None, None, math.nan, math.nan, math.nan, str(exc))
        rows.append(row)
    h = frame.spacing
    slope, used = rate_slope(rows, h)
    return SimilarityReport(data, lam, complex(Q), r, (k_min, k_max), frame, model, rows, h * math.sqrt(2), slope, used)


def panel_image(row, model=None):
    """RGB panel: rescaled M in grey | overlay | rescaled J in black."""
    m = row.mandel.mask
    j = row.julia.mask
    white = np.full(m.shape + (3,), 255, dtype=np.uint8)
    left = white.copy()
    left[m] = (128, 128, 128)
    right = white.copy()
    right[j] = (0, 0, 0)
    mid = white.copy()
    mid[m] = (128, 128, 128)
    mid[j] = (0, 0, 0)
    if model is not None:
        mid[model.mask & ~j & ~m] = (200, 60, 60)
    gap = np.full((m.shape[0], 4, 3), 255, dtype=np.uint8)
    gap[:, 1:3] = (0, 0, 0)
    return np.concatenate([left, gap, mid, gap, right], axis=1)
