"""Numba kernels for per-cell iteration and distance transforms.

Every kernel treats cells independently (no reductions across a ``prange``),
so results are bit-identical for any thread count.
"""

import warnings
from math import comb

import numpy as np
import numba
from numba import njit, prange

warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

# |dz/dw| beyond this is frozen; the distance estimate is then ~0 anyway.
DERIV_CLAMP = 1e250
BAILOUT = 1e8


def set_threads(n):
    """Set the kernel thread count, clamped to what numba was started with."""
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def binomials(d):
    return np.array([comb(d, m) for m in range(d + 1)], dtype=np.float64)


@njit(cache=True)
def _pow(z, d):
    r = z
    for _ in range(d - 1):
        r = r * z
    return r


@njit(cache=True)
def _pert_step(zref, delta, d, binom):
    # (zref + delta)^d - zref^d, expanded so small deltas keep full relative precision
    if d == 2:
        return delta * (2.0 * zref + delta)
    acc = 1.0 + 0j
    for m in range(d - 1, 0, -1):
        acc = acc * delta + binom[m] * _pow(zref, d - m)
    return acc * delta


@njit(cache=True, parallel=True)
def perturbed_eval(ref, c_base, scale, ws, d, param_mode, binom):
    """Evaluate F(w) = f^n(base + scale*w) with n = len(ref) - 1.

    ``ref`` is the reference orbit (ref[0] = base, ref[j+1] = f(ref[j])).  In
    ``param_mode`` the parameter moves with w as well (c = c_base + scale*w),
    which is the Mandelbrot-side map.  Returns (values, d/dw, ok).
    """
    n_ref = ref.shape[0] - 1
    m = ws.shape[0]
    vals = np.zeros(m, dtype=np.complex128)
    ders = np.zeros(m, dtype=np.complex128)
    ok = np.ones(m, dtype=np.bool_)
    for i in prange(m):
        dc = scale * ws[i] if param_mode else 0j
        ddc = scale if param_mode else 0j
        delta = scale * ws[i]
        ddelta = scale
        good = True
        for j in range(n_ref):
            zr = ref[j]
            ddelta = d * _pow(zr + delta, d - 1) * ddelta + ddc
            delta = _pert_step(zr, delta, d, binom) + dc
            if abs(delta) > 1e150 or abs(ddelta) > DERIV_CLAMP:
                good = False
                break
        if good:
            vals[i] = ref[n_ref] + delta
            ders[i] = ddelta
        ok[i] = good
    return vals, ders, ok


@njit(cache=True, parallel=True)
def classify(ref, c_base, scale, ws, d, param_mode, binom, radius, cap2):
    """Escape index and w-plane distance estimate for w -> base + scale*w.

    The first ``len(ref) - 1`` iterations run as perturbations of the
    reference orbit, later ones directly.  Per cell:
      esc  : first n <= cap2 with |z_n| > radius, else -1
      dist : |z| log|z| / |dz/dw| once the orbit passes BAILOUT (0 if bounded)
    """
    n_ref = ref.shape[0] - 1
    m = ws.shape[0]
    esc = np.full(m, -1, dtype=np.int64)
    dist = np.zeros(m, dtype=np.float64)
    for i in prange(m):
        dc = scale * ws[i] if param_mode else 0j
        ddc = scale if param_mode else 0j
        c = c_base + dc
        delta = scale * ws[i]
        ddelta = scale
        z = ref[0] + delta
        dz = ddelta
        e = -1
        n = 0
        while True:
            az = abs(z)
            if e < 0 and az > radius:
                e = n
            if az > BAILOUT or n >= cap2 or (e >= 0 and n >= e + 200):
                break
            if n < n_ref:
                zr = ref[n]
                if abs(ddelta) < DERIV_CLAMP:
                    ddelta = d * _pow(zr + delta, d - 1) * ddelta + ddc
                delta = _pert_step(zr, delta, d, binom) + dc
                z = ref[n + 1] + delta
                dz = ddelta
            else:
                if abs(dz) < DERIV_CLAMP:
                    dz = d * _pow(z, d - 1) * dz + ddc
                z = _pow(z, d) + c
            n += 1
        esc[i] = e
        if e >= 0:
            az = abs(z)
            adz = abs(dz)
            if adz >= DERIV_CLAMP:
                dist[i] = 0.0
            elif adz == 0.0 or az <= 1.0:
                dist[i] = np.inf
            else:
                dist[i] = az * np.log(az) / adz
    return esc, dist


@njit(cache=True, parallel=True)
def escape_counts(z0, cs, d, radius, cap):
    """Plain escape iteration: first n <= cap with |z_n| > radius, else -1."""
    m = z0.shape[0]
    out = np.full(m, -1, dtype=np.int64)
    for i in prange(m):
        z = z0[i]
        c = cs[i]
        for n in range(cap + 1):
            if abs(z) > radius:
                out[i] = n
                break
            z = _pow(z, d) + c
    return out


@njit(cache=True)
def _edt_line(f, out, v, zn, zd, inf):
    # Lower envelope of parabolas y = (x - p)^2 + f[p].  Breakpoints are kept
    # as exact fractions zn/zd (zd > 0); zd == 0 marks the +inf sentinel.
    n = f.shape[0]
    k = 0
    v[0] = 0
    zd[1] = 0
    for q in range(1, n):
        while True:
            p = v[k]
            sn = (f[q] + q * q) - (f[p] + p * p)
            sd = 2 * (q - p)
            if k > 0 and sn * zd[k] <= zn[k] * sd:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        zn[k] = sn
        zd[k] = sd
        zd[k + 1] = 0
    k = 0
    for q in range(n):
        while zd[k + 1] != 0 and zn[k + 1] < q * zd[k + 1]:
            k += 1
        p = v[k]
        val = (q - p) * (q - p) + f[p]
        out[q] = val if val < inf else inf


@njit(cache=True, parallel=True)
def edt_sq(mask):
    """Exact squared Euclidean distance (in cells) to the nearest marked cell.

    Two separable passes, integer arithmetic throughout.  Cells with no
    marked cell anywhere get ``4*(rows^2 + cols^2) + 1``.
    """
    rows, cols = mask.shape
    inf = 4 * (rows * rows + cols * cols) + 1
    g = np.empty((rows, cols), dtype=np.int64)
    for j in prange(cols):
        f = np.empty(rows, dtype=np.int64)
        for i in range(rows):
            f[i] = 0 if mask[i, j] else inf
        out = np.empty(rows, dtype=np.int64)
        v = np.empty(rows, dtype=np.int64)
        zn = np.zeros(rows + 1, dtype=np.int64)
        zd = np.zeros(rows + 1, dtype=np.int64)
        _edt_line(f, out, v, zn, zd, inf)
        for i in range(rows):
            g[i, j] = out[i]
    res = np.empty((rows, cols), dtype=np.int64)
    for i in prange(rows):
        f = g[i, :].copy()
        out = np.empty(cols, dtype=np.int64)
        v = np.empty(cols, dtype=np.int64)
        zn = np.zeros(cols + 1, dtype=np.int64)
        zd = np.zeros(cols + 1, dtype=np.int64)
        _edt_line(f, out, v, zn, zd, inf)
        for j in range(cols):
            res[i, j] = out[j]
    return res
