import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import seeded_operator
from magspec.conformal import RectangleDomain
from magspec.detreg import (
    Box,
    Circle,
    ContourError,
    as_holomorphic,
    contour_moments,
    det_function,
    det_reg,
    locate_zeros,
    winding_number,
)
from magspec.landau_model import (
    AssembledOperator,
    Envelope,
    Longitudinal,
    MagneticModel,
    PotentialSpec,
    TruncationSpec,
    assemble,
)
from magspec.spectral import ResolventSingularityError, eigenvalues


# det_reg ---------------------------------------------------------------------------

@pytest.mark.parametrize("p_ceil", [1, 2, 3, 5])
def test_det_reg_of_zero_is_one(p_ceil):
    assert det_reg(np.zeros((3, 3)), p_ceil) == 1


def test_det_reg_plain_product():
    assert det_reg(np.diag([0.5j]), 1) == 1 + 0.5j


def test_det_reg_single_correction():
    assert math.isclose(det_reg(np.diag([1.0]), 2).real, 2 * math.exp(-1), rel_tol=1e-15)
    assert math.isclose(2 * math.exp(-1), 0.735759, rel_tol=1e-6)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
@settings(max_examples=30)
def test_det_reg_vanishes_with_eigenvalue_minus_one(seed, p_ceil):
    rng = np.random.default_rng(seed)
    n = 4
    s = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 3 * np.eye(n)
    mu = np.concatenate([[-1.0], 0.5 * (rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1))])
    a = s @ np.diag(mu) @ np.linalg.inv(s)
    assert abs(det_reg(a, p_ceil)) < 1e-10


@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
@settings(max_examples=40)
def test_det_reg_p1_is_determinant(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    want = np.linalg.det(np.eye(n) + a)
    assert abs(det_reg(a, 1) - want) <= 1e-10 * abs(want)


def test_det_reg_rejects_bad_order():
    with pytest.raises(ValueError):
        det_reg(np.eye(2), 0)


# det_function ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def schr_op():
    return seeded_operator(3)


def test_det_function_order_is_ceiling():
    op = seeded_operator(0)
    assert det_function(op, 2.5).p_ceil == 3
    assert det_function(op, 3.0).p_ceil == 3
    assert det_function(op, 1.0).p_ceil == 1
    with pytest.raises(ValueError):
        det_function(op, 0.5)


@pytest.mark.parametrize("p", [1.0, 2.0, 2.5, 4.0])
def test_det_function_matches_eigenvalue_product(schr_op, p):
    f = det_function(schr_op, p)
    diag = schr_op.h0_diag
    for lam in (2 + 1j, -0.5 - 0.7j, 4.1 + 0.05j, 10j):
        T = schr_op.v / (diag - lam)[None, :]
        want = det_reg(T, f.p_ceil)
        assert abs(f(lam) - want) <= 1e-9 * abs(want)


def test_det_function_derivative_matches_central_difference(schr_op):
    f = det_function(schr_op, 2.5)
    for lam in (2 + 1j, 5.2 - 0.4j):
        h = 1e-5
        fd = (f(lam + h) - f(lam - h)) / (2 * h)
        assert abs(f.derivative([lam])[0] - fd) <= 1e-6 * abs(fd)


def test_free_det_function_is_one():
    op = assemble(MagneticModel("Schrodinger2d", 1.0), TruncationSpec(2, 3),
                  PotentialSpec.scalar(0.0))
    f = det_function(op, 2.0)
    assert np.all(f.values([1j, 3 + 2j, -4.0]) == 1)
    assert locate_zeros(f, Box(-5, 5, 0.1, 5)).zeros == ()


def test_det_function_tends_to_one_far_up(schr_op):
    f = det_function(schr_op, 2.5)
    big = 1e4 * schr_op.v_sup_norm
    for x in (0.0, 3.0, -7.0):
        for y in (1.01 * big, 10 * big):
            assert abs(f(complex(x, y)) - 1) < 1e-6
            assert abs(f(complex(x, -y)) - 1) < 1e-6


def test_det_function_vanishes_at_eigenvalues(schr_op):
    f = det_function(schr_op, 2.5)
    spec = eigenvalues(schr_op.h).off(schr_op.h0_diag)
    assert len(spec) > 0
    # |f| itself is scaled by a steep local slope, so test the Newton step f/f'
    for lam, _ in spec.items:
        logf, g = f.log_derivative([lam])
        assert abs(f(lam)) == 0 or abs(1 / g[0]) < 1e-12


def test_det_function_rejects_unperturbed_values(schr_op):
    f = det_function(schr_op, 2.5)
    with pytest.raises(ResolventSingularityError):
        f(complex(schr_op.h0_diag[0]))


def test_det_function_cache_is_safe_under_threads(schr_op):
    f = det_function(schr_op, 2.5)
    pts = np.linspace(0, 6, 200) + 0.3j
    out = [None] * 8

    def work(i):
        out[i] = f.values(pts)

    threads = [threading.Thread(target=work, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(np.array_equal(o, out[0]) for o in out)
    assert len(f.cache) == len(pts)


# winding numbers -------------------------------------------------------------------

def test_winding_of_linear_function():
    f = as_holomorphic(lambda z: z - (0.3 + 0.2j), lambda z: np.ones_like(z))
    assert winding_number(f, Circle(0.3 + 0.2j, 0.5)) == 1
    assert winding_number(f, Circle(3.0, 0.5)) == 0


def test_winding_without_derivative():
    f = as_holomorphic(lambda z: (z - 1j) ** 3 * (z + 2))
    assert winding_number(f, Circle(1j, 0.5)) == 3
    assert winding_number(f, Box(-3, 3, -1, 2)) == 4


def test_low_node_count_rejected():
    f = as_holomorphic(lambda z: z)
    with pytest.raises(ValueError):
        winding_number(f, Circle(0, 1), n_quad=32)


def test_contour_through_zero_errors():
    f = as_holomorphic(lambda z: z - 1.0, lambda z: np.ones_like(z))
    with pytest.raises(ContourError):
        winding_number(f, Circle(0.0, 1.0))


def _jordan_operator(target=2.0 + 0.5j):
    """A 3x3 operator with h0 = diag(1, 3, 5) whose h has a double eigenvalue ``target``."""
    h0_diag = np.array([1.0, 3.0, 5.0])
    rng = np.random.default_rng(0)
    s = np.eye(3) + 0.3 * (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    J = np.array([[target, 1, 0], [0, target, 0], [0, 0, 4.5 + 0.3j]])
    h = s @ J @ np.linalg.inv(s)
    h0 = np.diag(h0_diag.astype(complex))
    model = MagneticModel("Schrodinger2d", 1.0)
    return AssembledOperator(h0, h - h0, h, model, TruncationSpec(1, 3),
                             float(np.abs(h - h0).max()), h0_diag)


def test_double_zero_from_jordan_block():
    op = _jordan_operator()
    f = det_function(op, 2.0)
    assert winding_number(f, Circle(2.0 + 0.5j, 0.1)) == 2
    eig = np.linalg.eigvals(op.h)
    assert np.sum(np.abs(eig - (2.0 + 0.5j)) < 0.1) == 2
    # rounding splits the block into two eigenvalues ~sqrt(eps) apart; they are one double zero
    for tol in (1e-8, 1e-6):
        zs = locate_zeros(f, Box(1.5, 2.5, 0.2, 0.8), tol=tol)
        assert len(zs.zeros) == 1 and zs.zeros[0][1] == 2
        assert abs(zs.zeros[0][0] - (2.0 + 0.5j)) < 1e-6


def test_contour_grazing_a_zero_is_refused():
    f = det_function(_jordan_operator(), 2.0)
    with pytest.raises(ContourError):
        winding_number(f, Box(1.5, 2.0, 0.2, 0.5))


@given(st.floats(0.2, 0.8), st.floats(0.2, 0.8))
@settings(max_examples=15)
def test_winding_is_additive_under_splitting(fx, fy):
    f = det_function(seeded_operator(1), 2.5)
    box = Box(-1, 7, 0.05, 3)
    total = winding_number(f, box)
    try:
        parts = [winding_number(f, b) for b in box.split(fx, fy)]
    except ContourError:  # a cut through a zero is legitimately refused
        return
    assert sum(parts) == total


# zero location ---------------------------------------------------------------------

def test_single_eigenvalue_located():
    op = seeded_operator(4)
    spec = eigenvalues(op.h).off(op.h0_diag)
    lam = max(spec.values(), key=lambda z: z.imag)
    box = Box(lam.real - 0.2, lam.real + 0.2, lam.imag - 0.2 * lam.imag, lam.imag + 0.2)
    inside = [z for z in spec.values() if box.contains(z)]
    zs = locate_zeros(det_function(op, 2.5), box, tol=1e-8)
    assert zs.count == len(inside) >= 1
    assert min(abs(zs.values() - lam)) < 1e-8
    assert zs.residual < 1e-8


def test_pauli3d_rectangle_zeros_match_eigenvalues():
    model = MagneticModel("Pauli3d", 1.0, 1)
    pot = PotentialSpec.matrix([[0.5 + 0.4j, 0.1], [0.1j, 0.3 + 0.5j]],
                               Envelope("gaussian", 1.5), Envelope("gaussian", 2.0))
    op = assemble(model, TruncationSpec(2, 3, Longitudinal(3.0, 3)), pot)
    spec = eigenvalues(op.h)
    rect = RectangleDomain.around_level(model.level(1), 0.5 * model.gap, 0.1,
                                        2 * op.v_sup_norm)
    # the determinant is singular on the real axis, so the bottom edge is lifted
    # below the lowest eigenvalue in the rectangle
    eta = 0.5 * min([z.imag for z in spec.values() if z.imag > 1e-6] + [0.05])
    region = Box(rect.left, rect.right, eta, rect.height)
    want = np.array([z for z in spec.values() if region.contains(z)])
    zs = locate_zeros(det_function(op, 2.5), region, tol=1e-8)
    got = zs.values()
    assert len(got) == len(want) >= 1
    assert max(min(abs(want - z)) for z in got) < 1e-8


def test_region_containing_unperturbed_value_rejected(schr_op):
    with pytest.raises(ValueError):
        locate_zeros(det_function(schr_op, 2.5), Box(0, 2, -1, 1))


def test_moments_match_zero_power_sums():
    zeros = np.array([0.2 + 0.1j, -0.3j, 0.4])
    f = as_holomorphic(lambda z: np.prod([z - a for a in zeros], axis=0))
    k, mom = contour_moments(f, Circle(0, 1), kmax=3)
    assert k == 3
    for j in range(4):
        assert abs(mom[j] - np.sum(zeros**j)) < 1e-9
