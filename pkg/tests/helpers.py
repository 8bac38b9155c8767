"""Seeded operator configurations shared by the unit and acceptance tests."""

from __future__ import annotations

import numpy as np

from magspec.landau_model import (
    Envelope,
    Longitudinal,
    MagneticModel,
    PotentialSpec,
    TruncationSpec,
    assemble,
)


def seeded_operator(seed: int, scale: float = 1.0):
    """Seeds 0-9 and 20+ (even tens) give Schrödinger operators, 10-19 Pauli3d ones.

    Potentials are complex with phases in (pi/4, 3pi/4), so the perturbed
    spectrum leaves the real axis.
    """
    rng = np.random.default_rng(seed)
    ph = np.pi / 4 + rng.random() * np.pi / 2
    if (seed // 10) % 2 == 0:
        model = MagneticModel("Schrodinger2d", 1.0, 1)
        amp = scale * np.exp(1j * ph) * (0.8 + 0.4 * rng.random())
        pot = PotentialSpec.scalar(amp, Envelope("gaussian", 1.5 + rng.random()))
        return assemble(model, TruncationSpec(3, 6), pot)
    model = MagneticModel("Pauli3d", 1.0, 1)
    a = (np.diag(np.exp(1j * (ph + 0.3 * rng.normal(size=2)))) * (0.8 + 0.4 * rng.random())
         + 0.2 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))))
    pot = PotentialSpec.matrix(scale * a, Envelope("gaussian", 1.5 + rng.random()),
                               Envelope("gaussian", 2.0))
    return assemble(model, TruncationSpec(2, 3, Longitudinal(3.0, 3 + seed % 2)), pot)


def small_schrodinger(seed: int, size: float = 0.2):
    """Schrödinger truncation with a weak generic complex gaussian potential."""
    rng = np.random.default_rng(seed)
    amp = size * (rng.normal() + 1j * rng.normal())
    model = MagneticModel("Schrodinger2d", 1.0, 1)
    pot = PotentialSpec.scalar(amp, Envelope("gaussian", 1.0 + rng.random()))
    return assemble(model, TruncationSpec(3, 4), pot)


def random_disk_zeros(seed: int, n: int = 50, r_max: float = 0.98) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.random(n)) * r_max
    th = 2 * np.pi * rng.random(n)
    return r * np.exp(1j * th)
