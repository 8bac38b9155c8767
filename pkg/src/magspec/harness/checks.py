"""Composite checks shared by the runner and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..detreg import Box, det_function, locate_zeros
from ..landau_model import AssembledOperator
from ..spectral import ComplexSpectrum

__all__ = ["Agreement", "agreement_regions", "det_eig_agreement", "match_multisets"]


@dataclass(frozen=True)
class Agreement:
    n_eig: int
    n_det: int
    max_error: float
    multiplicities_equal: bool
    eta: float

    @property
    def ok(self) -> bool:
        return self.n_eig == self.n_det and self.multiplicities_equal


def _choose_eta(imag_abs: np.ndarray, floor: float = 0.01, margin: float = 0.1) -> float:
    """Lowest cut height above ``floor`` sitting in a gap of ``{0} U |Im|``.

    The gap ``(a, b)`` must satisfy ``(b - a)/(b + a) >= margin`` so that the
    contour stays a fixed fraction of its height away from every eigenvalue.
    """
    pts = np.unique(np.concatenate([[0.0], imag_abs]))
    for a, b in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (a + b)
        if mid >= floor and (b - a) / (b + a) >= margin:
            return float(mid)
    return float(max(2 * floor, 1.5 * pts[-1]))


def agreement_regions(spectrum: ComplexSpectrum, v_sup: float) -> tuple[float, list[Box]]:
    """Upper and lower boxes ``[Re_min - 1, Re_max + 1] x [eta, 2||V|| + 1]`` (mirrored)."""
    vals = spectrum.values()
    re_min = float(vals.real.min()) if vals.size else 0.0
    re_max = float(vals.real.max()) if vals.size else 1.0
    eta = _choose_eta(np.abs(vals.imag))
    top = max(2 * v_sup + 1, eta + 1)
    boxes = [Box(re_min - 1, re_max + 1, eta, top), Box(re_min - 1, re_max + 1, -top, -eta)]
    return eta, boxes


def match_multisets(a: np.ndarray, b: np.ndarray) -> float:
    """Largest distance in the optimal one-to-one matching (``inf`` if sizes differ)."""
    if len(a) != len(b):
        return math.inf
    if len(a) == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def det_eig_agreement(op: AssembledOperator, spectrum: ComplexSpectrum, p: float = 2.0,
                      tol: float = 1e-8, cluster_tol: float = 1e-6) -> Agreement:
    """Zeros of the regularised determinant against eigenvalues off the real axis."""
    eta, boxes = agreement_regions(spectrum, op.v_sup_norm)
    f = det_function(op, p)
    inside = [it for it in spectrum.items if any(bx.contains(it[0]) for bx in boxes)]
    zeros = []
    for bx in boxes:
        zeros.extend(locate_zeros(f, bx, tol).zeros)
    eig_vals = np.array([v for v, m in inside for _ in range(m)], dtype=complex)
    det_vals = np.array([z for z, m in zeros for _ in range(m)], dtype=complex)
    err = match_multisets(eig_vals, det_vals)
    mult_ok = len(eig_vals) == len(det_vals)
    if mult_ok:
        for v, m in inside:
            got = sum(mz for z, mz in zeros if abs(z - v) <= cluster_tol)
            if got != m:
                mult_ok = False
                break
    return Agreement(len(eig_vals), len(det_vals), err, mult_ok, eta)
