import math

import mpmath
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from zalcman.dyn import (
    OVERFLOW_GUARD,
    UnicriticalMap,
    escape_radius,
    iterate,
    julia_membership,
    mandelbrot_membership,
    orbit_with_derivative,
    param_orbit_with_derivative,
    postcritical_orbit,
)
from zalcman.errors import OrbitEscaped, PreconditionError


def disk_point(radius):
    return st.builds(
        lambda r, t: complex(r * math.cos(t), r * math.sin(t)),
        st.floats(0, radius),
        st.floats(0, 2 * math.pi),
    )


# -- examples -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "c, z, n, expected",
    [(0, 2, 3, 256), (-1, 0, 2, 0), (1j, 0, 3, -1j)],
)
def test_iterate_examples(c, z, n, expected):
    assert iterate(UnicriticalMap(2, c), z, n) == expected


def test_iterate_overflow_is_escape():
    with pytest.raises(OrbitEscaped) as info:
        iterate(UnicriticalMap(2, 0), 10.0, 20)
    assert info.value.index <= 20


def test_orbit_with_derivative_examples():
    tr = orbit_with_derivative(UnicriticalMap(2, -2), -2, 2)
    assert tr.points == (-2, 2, 2) and tr.derivative == -16
    assert orbit_with_derivative(UnicriticalMap(2, 0), 1, 1).derivative == 2
    assert orbit_with_derivative(UnicriticalMap(2, 1j), 1j, 2).derivative == -4 - 4j


def test_orbit_trace_cut_at_escape():
    tr = orbit_with_derivative(UnicriticalMap(2, 0), 1e40, 10)
    assert tr.escaped_at is not None
    assert all(abs(z) <= OVERFLOW_GUARD for z in tr.points[:-1])


def test_param_orbit_examples():
    assert param_orbit_with_derivative(2, 0j, 1) == (0, 1)
    assert param_orbit_with_derivative(2, -2 + 0j, 1) == (2, -3)
    assert param_orbit_with_derivative(2, -1 + 0j, 2) == (-1, 1)


def test_membership_examples():
    assert mandelbrot_membership(2, -1, 1000).bounded
    assert mandelbrot_membership(2, 1, 1000).status == "escaped"
    assert not mandelbrot_membership(2, 0.3, 1000).bounded
    assert julia_membership(UnicriticalMap(2, 0), 0.5, 500).bounded
    assert not julia_membership(UnicriticalMap(2, 0), 3, 500).bounded
    assert julia_membership(UnicriticalMap(2, -2), 1.5, 500).bounded
    assert str(mandelbrot_membership(2, -1, 50)) == "bounded(50)"
    assert str(mandelbrot_membership(2, 1, 50)) == "escaped(2)"


def test_postcritical_examples():
    assert postcritical_orbit(UnicriticalMap(2, -1), 4) == [-1, 0, -1, 0]
    assert postcritical_orbit(UnicriticalMap(2, 1j), 4) == [1j, -1 + 1j, -1j, -1 + 1j]
    assert postcritical_orbit(UnicriticalMap(2, -2), 3) == [-2, 2, 2]
    assert len(postcritical_orbit(UnicriticalMap(2, 1), 10)) < 10


def test_preconditions():
    with pytest.raises(PreconditionError):
        UnicriticalMap(1, 0)
    with pytest.raises(PreconditionError):
        UnicriticalMap(2, complex("nan"))
    with pytest.raises(PreconditionError):
        iterate(UnicriticalMap(2, 0), 0, -1)
    with pytest.raises(PreconditionError):
        mandelbrot_membership(2, 0, 0)
    with pytest.raises(PreconditionError):
        postcritical_orbit(UnicriticalMap(2, 0), 0)


def test_map_basics():
    f = UnicriticalMap(3, 0.5)
    assert f.critical_point == 0 and f.critical_value == 0.5
    assert f(1) == 1.5 and f.derivative(2) == 12


def test_extended_precision_hook():
    mpmath.mp.dps = 40
    try:
        f = UnicriticalMap(2, mpmath.mpc(0, 1))
        tr = orbit_with_derivative(f, mpmath.mpc(0, 1), 2)
        assert isinstance(tr.derivative, mpmath.mpc)
        assert abs(tr.derivative - (-4 - 4j)) < mpmath.mpf(10) ** -35
    finally:
        mpmath.mp.dps = 15


# -- properties -----------------------------------------------------------------------


@given(d=st.integers(2, 5), c=disk_point(3.0), z=disk_point(6.0))
def test_escape_radius_is_sound(d, c, z):
    R = escape_radius(d, abs(c))
    assert R >= max(abs(c), 2.0 ** (1.0 / (d - 1)))
    assume(abs(z) > R)
    # beyond R the modulus grows at every step
    assert abs(z) ** (d - 1) - abs(c) / abs(z) > 1
    f = UnicriticalMap(d, c)
    assert abs(f(z)) > abs(z)


@given(c=disk_point(2.0), z=disk_point(2.5))
def test_escaped_points_keep_growing(c, z):
    f = UnicriticalMap(2, c)
    v = julia_membership(f, z, 200)
    assume(not v.bounded)
    w = iterate(f, z, v.escaped_at)
    for _ in range(100):
        if abs(w) > 1e100:
            break
        nxt = f(w)
        assert abs(nxt) > abs(w)
        w = nxt


@settings(max_examples=100)
@given(d=st.integers(2, 4), c=disk_point(0.7), z=disk_point(1.5), n=st.integers(1, 12))
def test_derivative_matches_central_difference(d, c, z, n):
    f = UnicriticalMap(d, c)
    tr = orbit_with_derivative(f, z, n)
    assume(all(abs(p) <= 4 for p in tr.points))
    h = 1e-7
    # central differences with step h only resolve F' while h |F''/F'| stays small
    assume(abs(tr.derivative) * h < 1e-3 and abs(tr.derivative) > 1e-3)
    fd = (iterate(f, z + h, n) - iterate(f, z - h, n)) / (2 * h)
    assert abs(fd - tr.derivative) / abs(tr.derivative) < 1e-6


@given(c=disk_point(2.0), n=st.integers(1, 10))
def test_param_derivative_matches_central_difference(c, n):
    try:
        _, dz = param_orbit_with_derivative(2, c, n)
    except OrbitEscaped:
        assume(False)
    assume(1e-3 < abs(dz) < 1e4)
    h = 1e-7
    fd = (param_orbit_with_derivative(2, c + h, n)[0] - param_orbit_with_derivative(2, c - h, n)[0]) / (2 * h)
    assert abs(fd - dz) / abs(dz) < 1e-5


@given(c=disk_point(2.0), z=disk_point(2.0), n=st.integers(0, 30))
def test_iteration_is_deterministic(c, z, n):
    f = UnicriticalMap(2, c)
    try:
        a = iterate(f, z, n)
        b = iterate(UnicriticalMap(2, c), z, n)
    except OrbitEscaped:
        return
    assert a == b or (a != a and b != b)
