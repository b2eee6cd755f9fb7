import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from zalcman.dyn import UnicriticalMap, iterate
from zalcman.errors import (
    DepthInsufficient,
    NoConvergence,
    NonMinimalPeriod,
    NotPreperiodic,
    NotRepelling,
    PreconditionError,
)
from zalcman.orbits import (
    PoincareChart,
    classify_multiplier,
    critical_orbit,
    cycles_of_period,
    find_periodic,
    misiurewicz_data,
    poincare_chart,
    poincare_eval,
    proper_divisors,
)


def grid_in_disk(radius, n=32):
    xs = np.linspace(-radius, radius, n)
    w = xs[None, :] + 1j * xs[:, None]
    return w[np.abs(w) <= radius]


# -- periodic points -----------------------------------------------------------------


@pytest.mark.parametrize(
    "c, p, seed, point, multiplier, kind",
    [
        (0, 1, 0.9, 1, 2, "repelling"),
        (-2, 1, 1.8, 2, 4, "repelling"),
        (-1, 2, 0.1, None, 0, "superattracting"),
    ],
)
def test_find_periodic_examples(c, p, seed, point, multiplier, kind):
    orb = find_periodic(UnicriticalMap(2, c), p, seed)
    assert orb.kind == kind
    assert abs(orb.multiplier - multiplier) < 1e-12
    if point is not None:
        assert abs(orb.point - point) < 1e-12
    else:
        assert sorted(round(z.real, 12) for z in orb.cycle) == [-1, 0]


def test_find_periodic_reports_divisor_cycle():
    # seeding a period-2 solve at the fixed point 2 of z^2 - 2
    with pytest.raises(NonMinimalPeriod) as info:
        find_periodic(UnicriticalMap(2, -2), 2, 2.0)
    assert info.value.actual == 1


def test_find_periodic_errors():
    with pytest.raises(PreconditionError):
        find_periodic(UnicriticalMap(2, 0), 0, 0.5)
    with pytest.raises(NoConvergence):
        find_periodic(UnicriticalMap(2, 0), 1, 1e6)


def test_classification_bands():
    assert classify_multiplier(0) == "superattracting"
    assert classify_multiplier(0.5j) == "attracting"
    assert classify_multiplier(1 + 1e-8) == "indifferent"
    assert classify_multiplier(-1.5) == "repelling"
    assert proper_divisors(12) == [1, 2, 3, 4, 6]


@pytest.mark.parametrize("d, c, p", [(2, 1j, 3), (2, -0.75 + 0.1j, 4), (3, 0.4 + 0.2j, 3), (2, 0.3, 5)])
def test_cycle_enumeration_matches_count(d, c, p):
    # d^p - sum over proper divisors of the points of smaller exact period
    fmap = UnicriticalMap(d, c)
    exact = {}
    for q in range(1, p + 1):
        exact[q] = d**q - sum(exact[r] for r in proper_divisors(q))
    cycles = cycles_of_period(fmap, p)
    assert len(cycles) == exact[p] // p
    for orb in cycles:
        assert orb.residual < 1e-12
        for q in proper_divisors(p):
            assert abs(iterate(fmap, orb.point, q) - orb.point) > 1e-9


@settings(max_examples=60)
@given(
    c=st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False),
    p=st.integers(1, 4),
    seed=st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
)
def test_periodic_orbit_invariants(c, p, seed):
    fmap = UnicriticalMap(2, c)
    try:
        orb = find_periodic(fmap, p, seed)
    except (NoConvergence, NonMinimalPeriod):
        assume(False)
    assert orb.residual < 1e-12
    for q in proper_divisors(p):
        assert abs(iterate(fmap, orb.point, q) - orb.point) >= 1e-9
    assert orb.kind == classify_multiplier(orb.multiplier)
    # chain rule multiplier against a central difference of f^p
    assume(1e-2 < abs(orb.multiplier) < 1e3)
    h = 1e-6
    fd = (iterate(fmap, orb.point + h, p) - iterate(fmap, orb.point - h, p)) / (2 * h)
    assert abs(fd - orb.multiplier) / abs(orb.multiplier) < 1e-6


# -- Poincare charts -----------------------------------------------------------------


@pytest.fixture(scope="module")
def chart_m2():
    return poincare_chart(find_periodic(UnicriticalMap(2, -2), 1, 1.8), domain_radius=2.0)


@pytest.fixture(scope="module")
def chart_i():
    data = misiurewicz_data(2, 1j)
    return poincare_chart(find_periodic(data.fmap, 2, data.a0), domain_radius=2.0)


def test_chart_examples(chart_m2, chart_i):
    assert poincare_eval(chart_m2, 0) == 2
    assert abs(poincare_eval(chart_m2, 1) - 2 * math.cosh(1)) < 1e-9
    assert abs(poincare_eval(chart_m2, 1) - 3.0861612696) < 1e-9
    lam = chart_i.multiplier
    assert abs(lam - (4 + 4j)) < 1e-12 and abs(chart_i.base.point - (-1 + 1j)) < 1e-12
    v = poincare_eval(chart_i, 0.1)
    f = chart_i.base.fmap
    assert abs(iterate(f, v, 2) - poincare_eval(chart_i, lam * 0.1)) < 1e-8


def test_chart_closed_form_on_disk(chart_m2):
    w = grid_in_disk(2.0)
    got = poincare_eval(chart_m2, w)
    expect = 2 * np.cosh(np.sqrt(w.astype(np.complex128)))
    assert np.abs(got - expect).max() < 1e-8


@pytest.mark.parametrize("which", ["chart_m2", "chart_i"])
def test_koenigs_normalization(which, request):
    chart = request.getfixturevalue(which)
    h = 1e-5
    assert abs(poincare_eval(chart, 0) - chart.base.point) < 1e-10
    deriv = (poincare_eval(chart, h) - poincare_eval(chart, -h)) / (2 * h)
    assert abs(deriv - 1) < 1e-5


@pytest.mark.parametrize("which", ["chart_m2", "chart_i"])
def test_functional_equation(which, request):
    chart = request.getfixturevalue(which)
    lam = chart.multiplier
    w = grid_in_disk(chart.domain_radius / abs(lam))
    f = chart.base.fmap
    lhs = poincare_eval(chart, lam * w)
    rhs = np.array([iterate(f, v, chart.base.period) for v in poincare_eval(chart, w)])
    assert np.abs(lhs - rhs).max() < 1e-8


def test_chart_certificate(chart_m2):
    assert chart_m2.gap < chart_m2.tol
    w = grid_in_disk(2.0, 16)
    deeper = PoincareChart(chart_m2.base, chart_m2.depth + 1, chart_m2.domain_radius)
    assert np.abs(poincare_eval(chart_m2, w) - poincare_eval(deeper, w, check=False)).max() < 1e-10


def test_chart_errors(chart_m2):
    with pytest.raises(NotRepelling):
        poincare_chart(find_periodic(UnicriticalMap(2, -1), 2, 0.1))
    with pytest.raises(PreconditionError):
        poincare_eval(chart_m2, 3)
    shallow = PoincareChart(chart_m2.base, 1, 2.0)
    with pytest.raises(DepthInsufficient):
        poincare_eval(shallow, 1.5)


# -- Misiurewicz data ----------------------------------------------------------------


def test_misiurewicz_examples():
    m = misiurewicz_data(2, -2)
    assert (m.l, m.p) == (1, 1)
    assert m.a0 == 2 and m.A0 == -4 and m.lambda0 == 4
    m = misiurewicz_data(2, 1j)
    assert (m.l, m.p) == (1, 2)
    assert abs(m.a0 - (-1 + 1j)) < 1e-14 and abs(m.A0 - 2j) < 1e-14 and abs(m.lambda0 - (4 + 4j)) < 1e-12
    with pytest.raises(NotPreperiodic):
        misiurewicz_data(2, -1)
    with pytest.raises(NotPreperiodic):
        misiurewicz_data(2, 1)


def test_misiurewicz_rescaling_helpers():
    m = misiurewicz_data(2, 1j)
    assert [m.n(k) for k in range(3)] == [1, 3, 5]
    assert abs(m.rho(1) - 1 / (2j * (4 + 4j))) < 1e-15
    orb = m.reference_orbit(6)
    assert orb[0] == 1j and orb[1] == m.a0 and orb[3] == m.a0


def test_misiurewicz_cubic():
    # z^3 + c with f(c) fixed: c^3 + c = w c for a primitive cube root of unity w
    w = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
    c = (w - 1) ** 0.5
    m = misiurewicz_data(3, c)
    a0 = c**3 + c
    assert (m.l, m.p) == (1, 1)
    assert abs(m.a0 - a0) < 1e-12
    assert abs(m.A0 - 3 * c**2) < 1e-12 and abs(m.lambda0 - 3 * a0**2) < 1e-10


def test_critical_orbit_snaps_onto_cycle():
    orb, landing = critical_orbit(2, 1j, 100)
    assert landing == (1, 2)
    assert np.all(orb[1::2] == orb[1]) and np.all(orb[2::2] == orb[2])
