import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_disk_zeros
from magspec.bgk import (
    GrowthData,
    NormalizedComposite,
    ProbeError,
    ProbeGrid,
    bgk_zero_sum,
    fit_growth,
    growth_weight,
    synth_blaschke,
)
from magspec.conformal import RectangleDomain, sc_calibrate
from magspec.detreg import det_function
from magspec.landau_model import (
    Envelope,
    Longitudinal,
    MagneticModel,
    PotentialSpec,
    TruncationSpec,
    assemble,
)

disk_points = st.builds(lambda r, t: r * complex(math.cos(t), math.sin(t)),
                        st.floats(0, 0.999), st.floats(0, 2 * math.pi))


# zero sums ---------------------------------------------------------------------------

def test_empty_sum_is_zero():
    assert bgk_zero_sum([], GrowthData(1.0, 1.0)) == 0.0


def test_zero_at_origin():
    assert bgk_zero_sum([0j], GrowthData(1.0, 1.0, tau=0.5)) == 1.0
    assert bgk_zero_sum([0j], GrowthData(1.0, 1.0, (1.0,), (2.0,), 0.5)) == 1.0


def test_fifty_zeros_against_mpmath():
    zeros = random_disk_zeros(7)
    data = GrowthData(1.0, 2.0, (1.0, -1j), (1.5, 0.2), 0.3)
    with mp.workdps(40):
        want = mp.fsum((1 - abs(mp.mpc(a))) ** mp.mpf(3.3)
                       * abs(mp.mpc(a) - 1) ** mp.mpf(0.8) for a in zeros)
    assert bgk_zero_sum(zeros, data) == pytest.approx(float(want), rel=1e-13)


@given(st.lists(disk_points, max_size=20), st.floats(0.05, 2), st.floats(0.0, 3))
def test_sum_nonincreasing_in_tau_without_singular_points(zeros, tau, alpha):
    d = GrowthData(1.0, alpha, tau=tau)
    assert bgk_zero_sum(zeros, d.with_tau(2 * tau)) <= bgk_zero_sum(zeros, d) * (1 + 1e-12)


@given(st.lists(st.builds(lambda r, t: r * complex(math.cos(t), math.sin(t)),
                          st.floats(0.05, 0.999), st.floats(0, 2 * math.pi)), max_size=10),
       st.integers(0, 4))
def test_large_tau_counts_zeros_at_origin(zeros, n0):
    # every term off the origin is at most 0.95^4002 < 1e-88
    s = bgk_zero_sum(list(zeros) + [0j] * n0, GrowthData(1.0, 1.0, tau=4000.0))
    assert abs(s - n0) < 1e-80


def test_growth_data_validation():
    with pytest.raises(ValueError):
        GrowthData(1.0, 1.0, (1.0,), ())
    with pytest.raises(ValueError):
        GrowthData(1.0, 1.0, (0.5,), (1.0,))
    with pytest.raises(ValueError):
        GrowthData(1.0, -1.0)
    with pytest.raises(ValueError):
        GrowthData(1.0, 1.0, tau=0.0)
    with pytest.raises(ValueError):
        GrowthData(-1.0, 1.0)
    with pytest.raises(ValueError):
        bgk_zero_sum([1.0], GrowthData(1.0, 1.0))


# synthetic Blaschke products -------------------------------------------------------

def test_blaschke_zeros_and_normalisation():
    zs = random_disk_zeros(2, n=12, r_max=0.9)
    h = synth_blaschke(zs)
    assert abs(h(0)) == pytest.approx(1.0, rel=1e-13) and abs(h(0) - 1) < 1e-12
    assert np.max(np.abs(h(zs))) < 1e-14


def test_blaschke_boundary_moduli():
    zs = random_disk_zeros(3, n=12, r_max=0.9)
    h = synth_blaschke(zs)
    circle = np.exp(2j * np.pi * np.arange(256) / 256)
    assert np.max(np.abs(np.abs(h.raw(circle)) - 1)) < 1e-12
    want = 1 / np.prod(np.abs(zs))
    assert np.max(np.abs(np.abs(h(circle)) / want - 1)) < 1e-12


def test_log_abs_matches_modulus():
    zs = random_disk_zeros(4, n=10)
    h = synth_blaschke(zs)
    z = 0.7 * np.exp(1j * np.linspace(0, 6, 40))
    assert np.max(np.abs(h.log_abs(z) - np.log(np.abs(h(z))))) < 1e-12


def test_zero_at_origin_factor():
    h = synth_blaschke([0j, 0.5])
    assert h(0) == 0
    assert h(0.25) == pytest.approx(0.25 * (0.25 / 0.5) / (1 - 0.125))


# growth fit ----------------------------------------------------------------------------

def test_probe_grid_size():
    g = ProbeGrid(5, 16, 4)
    assert len(g.points()) == 1 + 5 * 16
    assert len(g.points([1.0, -1.0])) == 1 + 5 * (16 + 2 * 9)
    assert np.all(np.abs(g.points([1.0])) < 1)


def test_growth_weight_values():
    z = np.array([0.5, -0.5j])
    w = growth_weight(z, 2.0, [1.0], [1.0])
    assert w == pytest.approx([4 / 0.5, 4 / abs(-0.5j - 1)])


def test_constant_function_has_zero_constant():
    fit = fit_growth(lambda z: np.ones_like(z))
    assert fit.K0 <= 1e-10 and fit.residual <= 0


def test_fit_is_smallest_envelope_on_the_grid():
    zs = random_disk_zeros(5, n=8, r_max=0.9)
    h = synth_blaschke(zs)
    probe = ProbeGrid(10, 64, 8)
    fit = fit_growth(h, probe, p=3.0, zeros=zs)
    z = probe.points([1.0])
    la = np.log(np.abs(h.raw(z))) - np.sum(np.log(np.abs(zs)))
    q = la / growth_weight(z, 1.5, [1.0], [0.75])
    assert fit.K0 == pytest.approx(max(0.0, q.max()), rel=1e-10)
    assert fit.residual <= 1e-12
    assert fit.data.alpha == 1.5 and fit.data.beta == (0.75,)


def test_constant_decreases_as_zero_approaches_circle():
    # normalising h(0) = 1 makes |h| = 1/|a| on the circle, so log|h| shrinks
    # like (1 - |a|) as the zero moves out
    radii = [0.5, 0.8, 0.9, 0.99, 0.999]
    K = [fit_growth(synth_blaschke([r * 1j]), zeros=[r * 1j]).K0 for r in radii]
    assert all(b < a for a, b in zip(K, K[1:]))
    assert all(0.1 < k / (1 - r) < 0.5 for k, r in zip(K, radii))


def test_fit_rejects_non_finite_log():
    on_grid = 0.5 * np.exp(1j * np.pi / 16)  # first ring, first half-step angle
    assert np.min(np.abs(ProbeGrid(3, 16, 4).points() - on_grid)) < 1e-15
    with pytest.raises(ProbeError):
        fit_growth(synth_blaschke([on_grid]), ProbeGrid(3, 16, 4), xi_guess=())


# composites with a determinant -------------------------------------------------------

@pytest.fixture(scope="module")
def pipeline():
    model = MagneticModel("Pauli3d", 1.0, 1)
    pot = PotentialSpec.matrix([[0.3, 0.1j], [0.1, 0.2 + 0.2j]], Envelope("gaussian", 1.5),
                               Envelope("gaussian", 2.0))
    op = assemble(model, TruncationSpec(2, 3, Longitudinal(3.0, 3)), pot)
    f = det_function(op, 2.5)
    rect = RectangleDomain.around_level(model.level(1), 0.5 * model.gap, 0.1,
                                        op.v_sup_norm).for_base_point(op.v_sup_norm)
    return f, sc_calibrate(rect)


def test_composite_normalised_at_origin(pipeline):
    f, m = pipeline
    h = NormalizedComposite(f, m.forward)
    assert abs(h(0)[0] - 1) < 1e-12
    z = np.array([0.3 + 0.2j, -0.5j])
    want = np.array([f(l) for l in m.forward(z)]) / f(m.forward(np.array([0j]))[0])
    assert np.max(np.abs(h(z) - want) / np.abs(want)) < 1e-10
    assert np.max(np.abs(h.log_abs(z) - np.log(np.abs(want)))) < 1e-10


def test_composite_growth_constant_finite(pipeline):
    f, m = pipeline
    fit = fit_growth(NormalizedComposite(f, m.forward), ProbeGrid(12, 64, 8), p=2.5)
    assert math.isfinite(fit.K0) and fit.K0 >= 0 and fit.residual <= 1e-12


def test_composite_without_logs():
    h = NormalizedComposite(lambda lam: lam + 2.0, lambda z: z)
    assert h(0.5)[0] == 1.25
    with pytest.raises(ProbeError):
        NormalizedComposite(lambda lam: lam, lambda z: z)
