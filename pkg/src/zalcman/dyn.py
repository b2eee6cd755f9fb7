"""Forward dynamics of the unicritical family f_c(z) = z^d + c.

All scalar routines are written against plain ``*``/``+``/``abs`` so they also
run on ``mpmath.mpc`` inputs; that is the extended-precision hook used by the
oracle tests.  Grid-scale work lives in :mod:`zalcman._kernels`.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import OrbitEscaped, PreconditionError

ComplexValue = complex

OVERFLOW_GUARD = 1e150


def powd(z, d):
    """z**d by repeated multiplication (same operation order as the kernels)."""
    r = z
    for _ in range(d - 1):
        r = r * z
    return r


def escape_radius(d, c):
    """Radius beyond which every orbit of z^d + c tends to infinity."""
    return max(abs(c), 2.0, 2.0 ** (1.0 / (d - 1)))


def _as_param(c):
    if isinstance(c, numbers.Real) or isinstance(c, complex):
        c = complex(c)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise PreconditionError(f"parameter must be finite, got {c!r}")
    return c


@dataclass(frozen=True)
class UnicriticalMap:
    degree: int
    c: ComplexValue

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 2:
            raise PreconditionError(f"degree must be an integer >= 2, got {self.degree!r}")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "c", _as_param(self.c))

    def __call__(self, z):
        return powd(z, self.degree) + self.c

    def derivative(self, z):
        if self.degree == 2:
            return 2 * z
        return self.degree * powd(z, self.degree - 1)

    @property
    def critical_point(self):
        return 0j

    @property
    def critical_value(self):
        return self.c

    @property
    def escape_radius(self):
        return escape_radius(self.degree, self.c)


@dataclass(frozen=True)
class OrbitTrace:
    points: Tuple[ComplexValue, ...]
    derivative: ComplexValue
    escaped_at: Optional[int] = None

    @property
    def final(self):
        return self.points[-1]


@dataclass(frozen=True)
class MembershipVerdict:
    """``escaped_at`` is None for the ``bounded(cap)`` outcome."""

    escaped_at: Optional[int]
    cap: int

    @property
    def bounded(self):
        return self.escaped_at is None

    @property
    def status(self):
        return "bounded" if self.escaped_at is None else "escaped"

    def __str__(self):
        if self.escaped_at is None:
            return f"bounded({self.cap})"
        return f"escaped({self.escaped_at})"


def iterate(fmap, z, n):
    """Return f^n(z).  Raises OrbitEscaped once |z| passes the overflow guard."""
    if n < 0:
        raise PreconditionError("n must be >= 0")
    for j in range(n):
        if abs(z) > OVERFLOW_GUARD:
            raise OrbitEscaped(j, z)
        z = fmap(z)
    if abs(z) > OVERFLOW_GUARD:
        raise OrbitEscaped(n, z)
    return z


def orbit_with_derivative(fmap, z, n):
    """Orbit z_0..z_n together with (f^n)'(z_0) = prod f'(z_j), j < n.

    If the orbit passes the overflow guard the trace is cut there and
    ``escaped_at`` records the index.
    """
    if n < 0:
        raise PreconditionError("n must be >= 0")
    points = [z]
    der = 1 + 0 * z
    for j in range(n):
        if abs(z) > OVERFLOW_GUARD:
            return OrbitTrace(tuple(points), der, escaped_at=j)
        der = der * fmap.derivative(z)
        z = fmap(z)
        points.append(z)
    if abs(z) > OVERFLOW_GUARD:
        return OrbitTrace(tuple(points), der, escaped_at=n)
    return OrbitTrace(tuple(points), der)


def param_orbit_with_derivative(d, c, n):
    """Return (f_c^n(c), d/dc f_c^n(c)).

    Forward-mode recurrence z' <- d z^(d-1) z' + 1 starting from z = c, z' = 1.
    """
    if n < 0:
        raise PreconditionError("n must be >= 0")
    z = c
    dz = 1 + 0 * c
    for j in range(n):
        if abs(z) > OVERFLOW_GUARD:
            raise OrbitEscaped(j, z)
        dz = d * powd(z, d - 1) * dz + 1
        z = powd(z, d) + c
    if abs(z) > OVERFLOW_GUARD:
        raise OrbitEscaped(n, z)
    return z, dz


def _membership(z, c, d, cap):
    if cap < 1:
        raise PreconditionError("cap must be >= 1")
    radius = escape_radius(d, c)
    for n in range(cap + 1):
        if abs(z) > radius:
            return MembershipVerdict(n, cap)
        z = powd(z, d) + c
    return MembershipVerdict(None, cap)


def mandelbrot_membership(d, c, cap):
    """Escape test for the critical value orbit f_c^n(c), n = 0..cap."""
    return _membership(c, c, d, cap)


def julia_membership(fmap, z, cap):
    """Escape test for the orbit of z under fmap, n = 0..cap.

    For the Misiurewicz parameters used in this package J = K, so a bounded
    orbit means membership of J up to the resolution set by ``cap``.
    """
    return _membership(z, fmap.c, fmap.degree, cap)


def postcritical_orbit(fmap, depth):
    """f^n(0) for n = 1..depth, cut after the first point outside the escape radius."""
    if depth < 1:
        raise PreconditionError("depth must be >= 1")
    radius = fmap.escape_radius
    out = []
    z = 0j
    for _ in range(depth):
        z = fmap(z)
        if abs(z) > OVERFLOW_GUARD:
            raise OrbitEscaped(len(out) + 1, z)
        out.append(z)
        if abs(z) > radius:
            break
    return out
