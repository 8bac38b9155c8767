import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.special import ellipk

from magspec.conformal import (
    CalibrationError,
    LevelGeometry,
    PoleError,
    RectangleDomain,
    comparability_check,
    distortion_profile,
    distortion_ratio,
    halfline_distortion_ratio,
    interior_grid,
    phi_mobius,
    phi_mobius_inverse,
    sc_calibrate,
    side_length_ratio,
)
from magspec.conformal import comparability_ratios

SCHR = LevelGeometry(1.0, 2.0)  # b = 1, d = 1 Schrodinger levels 1, 3, 5, ...


# Möbius map ------------------------------------------------------------------------

def test_mobius_examples():
    assert phi_mobius(0, -1.0) == 1
    assert phi_mobius(-1 + 1j, -1.0) == -1j
    assert phi_mobius_inverse(-1j, -1.0) == -1 + 1j


def test_mobius_pole():
    with pytest.raises(PoleError):
        phi_mobius(-2.0, -2.0)
    with pytest.raises(PoleError):
        phi_mobius_inverse(0, -2.0)


def test_mobius_round_trip():
    rng = np.random.default_rng(0)
    pts = 50 * (rng.normal(size=10_000) + 1j * rng.normal(size=10_000))
    err = max(abs(phi_mobius_inverse(phi_mobius(z, -2.0), -2.0) - z) / (1 + abs(z)) for z in pts)
    assert err < 1e-13


@given(st.floats(-100, 100), st.floats(-100, 100), st.floats(-10, 0))
def test_left_of_mu0_maps_to_left_half_plane(x, y, mu0):
    assume(x < mu0)
    assert phi_mobius(complex(x, y), mu0).real < 0


def test_vertical_approach_to_level():
    for eps in (1e-2, 1e-5, 1e-9):
        lam = complex(3.0, eps)
        z = phi_mobius(lam, -2.0)
        assert abs(z - 0.2) == pytest.approx(eps / abs(lam + 2.0) / 5.0, rel=1e-9)


# distortion quotients ----------------------------------------------------------------

def test_level_geometry_distances():
    assert SCHR.dist_levels(3 + 4j) == 4
    assert SCHR.dist_levels(-2.0) == 3
    assert SCHR.dist_halfline(-2.0) == 3 and SCHR.dist_halfline(7 - 0.5j) == 0.5
    assert SCHR.in_A(3 + 3j) and SCHR.in_D(3 + 5j)
    assert SCHR.image_dist_levels(-0.5j, -2.0) == 0.5  # 0 is a limit point of the image


@pytest.mark.parametrize("lam", [-2.5, -3.0, -10.0, -1e4])
def test_distortion_left_of_mu0_closed_form(lam):
    mu0 = -2.0
    want = (1 + abs(lam)) ** 2 / (abs(lam - mu0) * abs(lam - 1.0))
    assert distortion_ratio(lam, mu0, SCHR) == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("offset", [1e-3 + 0j, 1e-2j, -5e-3 + 2e-3j])
def test_distortion_single_isolated_level_closed_form(offset):
    level, mu0 = 4.0, -1.0
    geom = LevelGeometry(level, 1e6)
    lam = level + offset
    want = (1 + abs(lam)) ** 2 / (abs(lam - mu0) * abs(level - mu0))
    assert distortion_ratio(lam, mu0, geom) == pytest.approx(want, rel=1e-12)


def test_distortion_on_level_rejected():
    with pytest.raises(ZeroDivisionError):
        distortion_ratio(3.0, -2.0, SCHR)
    with pytest.raises(ZeroDivisionError):
        halfline_distortion_ratio(8.0, -2.0, SCHR)


@given(st.floats(-60, 60), st.floats(-60, 60))
def test_distortion_quotients_positive(x, y):
    lam = complex(x, y)
    assume(SCHR.dist_levels(lam) > 1e-9 and SCHR.dist_halfline(lam) > 1e-9 and lam != -2.0)
    assert distortion_ratio(lam, -2.0, SCHR) > 0
    assert halfline_distortion_ratio(lam, -2.0, SCHR) > 0


@given(st.floats(-60, 60), st.floats(-60, 60))
def test_sandwich_outside_level_disks(x, y):
    lam = complex(x, y)
    assume(SCHR.in_D(lam))
    dl, dj = SCHR.dist_levels(lam), SCHR.dist_halfline(lam)
    assert dl / 2 <= dj <= dl


def test_distortion_profile_small_sample():
    prof = distortion_profile(-2.0, SCHR, count=2000, seed=3)
    assert prof.n_samples == 2000 and prof.n_in_D > 0
    assert prof.empirical_inf >= 1 / 6 - 1e-9
    assert prof.sandwich_violations == 0 and prof.image_sandwich_violations == 0
    assert distortion_ratio(prof.argmin, -2.0, SCHR) == pytest.approx(prof.empirical_inf)


def test_distortion_profile_rejects_small_count():
    with pytest.raises(ValueError):
        distortion_profile(-2.0, SCHR, count=10)


# rectangles --------------------------------------------------------------------------

def test_rectangle_around_level():
    r = RectangleDomain.around_level(3.0, 1.0, 0.1, 0.5)
    assert r.vertices == (2.1 + 0j, 2.1 + 1j, 3.9 + 1j, 3.9 + 0j)
    low = RectangleDomain.around_level(3.0, 1.0, 0.1, 0.5, upper=False)
    assert low.vertices[1] == 2.1 - 1j
    with pytest.raises(ValueError):
        RectangleDomain.around_level(3.0, 1.0, 1.0, 0.5)


def test_base_point_enlargement():
    r = RectangleDomain.around_level(3.0, 1.0, 0.1, 0.5).for_base_point(0.5)
    assert r.height == 6.0 and r.scaling == 6.0
    assert min(r.center.imag, r.center.imag - 2 * 0.5) >= 1 + 2 * 0.5


# Schwarz-Christoffel ---------------------------------------------------------------

@pytest.mark.parametrize("y", [-3.0, -1.0, 0.0, 0.4, 2.5])
def test_side_length_ratio_is_elliptic_quotient(y):
    a = math.atan(math.exp(y))
    want = ellipk(math.sin(a) ** 2) / ellipk(math.cos(a) ** 2)
    assert side_length_ratio(y) == pytest.approx(want, rel=1e-12)


def test_square_prevertices_symmetric():
    m = sc_calibrate(RectangleDomain(0, 1, 1, 0.5, 0.1))
    want = np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))
    got = np.array(m.prevertices)
    assert max(min(abs(want - z)) for z in got) < 1e-12


def _arc_length(m, a, b):
    """mpmath length of the image of the arc (a, b) between two prevertices.

    ``|phi'(e^{it})| = scale prod_k |e^{it} - z_k|^{-1/2}``; ``t = end -+ u^2``
    removes the inverse square-root endpoint singularities.
    """
    al = mp.mpf(m.alpha)
    zk = [mp.expj(t) for t in (al, mp.pi - al, mp.pi + al, -al)]
    speed = lambda t: m.scale * mp.fprod([abs(mp.expj(t) - z) ** -0.5 for z in zk])
    a, b = mp.mpf(a), mp.mpf(b)
    mid = (a + b) / 2
    h = mp.sqrt(mid - a)
    return (mp.quad(lambda u: speed(a + u * u) * 2 * u, [0, h])
            + mp.quad(lambda u: speed(b - u * u) * 2 * u, [0, h]))


@pytest.mark.parametrize("w,h", [(2.0, 1.0), (1.0, 3.0), (5.0, 1.0)])
def test_edge_lengths_against_arc_length_oracle(w, h):
    m = sc_calibrate(RectangleDomain(0.0, w, h, w / 2, 0.1))
    with mp.workdps(30):
        al = mp.mpf(m.alpha)
        assert float(_arc_length(m, -al, al)) == pytest.approx(w, rel=1e-10)
        assert float(_arc_length(m, al, mp.pi - al)) == pytest.approx(h, rel=1e-10)


def test_aspect_two_elliptic_oracle():
    m = sc_calibrate(RectangleDomain(0.0, 2.0, 1.0, 1.0, 0.1))
    a = m.alpha
    assert ellipk(math.sin(a) ** 2) / ellipk(math.cos(a) ** 2) == pytest.approx(2.0, rel=1e-12)
    assert np.max(np.abs(m.vertex_images() - np.array(m.rect.vertices))) < 1e-10


@pytest.fixture(scope="module")
def off_centre_map():
    return sc_calibrate(RectangleDomain(0.0, 2.0, 1.0, 1.2, 0.1), 0.6 + 0.3j)


def test_base_point_and_contained_level(off_centre_map):
    m = off_centre_map
    assert abs(m.forward(np.array([0.0]))[0] - (0.6 + 0.3j)) < 1e-12
    assert abs(m.forward(np.array([1.0]))[0] - 1.2) < 1e-10


def test_derivative_matches_central_difference(off_centre_map):
    m = off_centre_map
    rng = np.random.default_rng(1)
    z = 0.8 * np.sqrt(rng.random(20)) * np.exp(2j * np.pi * rng.random(20))
    h = 1e-6
    fd = (m.forward(z + h) - m.forward(z - h)) / (2 * h)
    assert np.max(np.abs(m.derivative(z) - fd) / np.abs(fd)) < 1e-7


def test_boundary_circle_maps_onto_edges(off_centre_map):
    m = off_centre_map
    ang = np.sort(np.angle(np.array(m.prevertices)))
    ang = np.append(ang, ang[0] + 2 * np.pi)
    for a, b in zip(ang[:-1], ang[1:]):
        t = np.linspace(a, b, 514)[1:-1]
        lam = m.forward(np.exp(1j * t))
        assert max(abs(m.rect.dist_boundary(l)) for l in lam) < 1e-6


def test_inverse_round_trip(off_centre_map):
    m = off_centre_map
    z = interior_grid(32) * 0.99
    back = m.inverse(m.forward(z))
    assert np.max(np.abs(back - z)) < 1e-10


def test_comparability_at_origin(off_centre_map):
    m = off_centre_map
    lam0 = 0.6 + 0.3j
    main, _, _ = comparability_ratios(m, np.array([0j]))
    corners = min(abs(lam0 - v) for v in m.rect.vertices)
    assert main[0] == pytest.approx(m.rect.dist_boundary(lam0) * corners, rel=1e-10)


def test_comparability_bounded_along_radii():
    m = sc_calibrate(RectangleDomain(0.0, 2.0, 1.0, 1.0, 0.1))
    grid = comparability_check(m)
    assert 0 < grid.c1 <= grid.c2 < math.inf
    for th in (0.3, 1.3, 2.9, -1.0):
        r = 1 - np.geomspace(1e-1, 1e-7, 7)
        main, _, _ = comparability_ratios(m, r * np.exp(1j * th))
        # measured limits lie within a factor two of the grid extremes
        assert np.all(main > 0.5 * grid.c1) and np.all(main < 2 * grid.c2)
        assert abs(main[-1] - main[-2]) < 1e-3 * main[-1]


def test_lower_half_plane_rectangle():
    rect = RectangleDomain(0.0, 2.0, 1.0, 1.0, 0.1, upper=False)
    m = sc_calibrate(rect, 0.7 - 0.4j)
    assert abs(m.forward(np.array([0.0]))[0] - (0.7 - 0.4j)) < 1e-12
    lam = m.forward(interior_grid(32))
    assert np.all(lam.imag < 0) and all(rect.contains(l, 1e-12) for l in lam)
    assert np.max(np.abs(m.vertex_images() - np.array(rect.vertices))) < 1e-8


def test_calibration_rejections():
    with pytest.raises(ValueError):
        sc_calibrate(RectangleDomain(0.0, 21.0, 1.0, 1.0, 0.1))
    with pytest.raises(ValueError):
        sc_calibrate(RectangleDomain(0.0, 2.0, 1.0, 1.0, 0.1), 3.0 + 0.5j)
    with pytest.raises(ValueError):
        sc_calibrate(RectangleDomain(0.0, 2.0, 1.0, 1.0, 0.1), n_quad=64)
    with pytest.raises(ValueError):
        comparability_check(sc_calibrate(RectangleDomain(0.0, 2.0, 1.0, 1.0, 0.1)), grid_n=8)


def test_calibration_error_carries_residual():
    err = CalibrationError("missed", 0.5)
    assert err.residual == 0.5 and "0.5" in str(err)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
@settings(max_examples=15)
def test_any_interior_base_point_is_reached(fx, fy):
    rect = RectangleDomain(0.0, 3.0, 1.0, 1.5, 0.1)
    lam0 = complex(3 * fx, fy)
    m = sc_calibrate(rect, lam0)
    assert cmath.isclose(m.forward(np.array([0.0]))[0], lam0, abs_tol=1e-11)
    assert abs(m.forward(np.array([1.0]))[0] - 1.5) < 1e-9
