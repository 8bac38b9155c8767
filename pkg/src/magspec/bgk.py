"""Zero sums for holomorphic functions of the disk with prescribed boundary growth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "ProbeError",
    "GrowthData",
    "SyntheticH",
    "synth_blaschke",
    "bgk_zero_sum",
    "ProbeGrid",
    "GrowthFit",
    "growth_weight",
    "fit_growth",
    "NormalizedComposite",
]


class ProbeError(ValueError):
    pass


@dataclass(frozen=True)
class GrowthData:
    """``log|h(z)| <= K0 (1-|z|)^-alpha prod |z - xi_j|^-beta_j``; ``tau`` enters the sum."""

    K0: float
    alpha: float
    xi: tuple[complex, ...] = ()
    beta: tuple[float, ...] = ()
    tau: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(complex(x) for x in self.xi))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if len(self.xi) != len(self.beta):
            raise ValueError("one exponent per singular point")
        if any(abs(abs(x) - 1) > 1e-12 for x in self.xi):
            raise ValueError("singular points must lie on the unit circle")
        if self.alpha < 0 or any(b < 0 for b in self.beta):
            raise ValueError("exponents must be nonnegative")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.K0 >= 0:
            raise ValueError("K0 must be nonnegative")

    def with_tau(self, tau: float) -> "GrowthData":
        return GrowthData(self.K0, self.alpha, self.xi, self.beta, tau)


def _check_zeros(zeros) -> np.ndarray:
    z = np.asarray(list(zeros), dtype=complex).ravel()
    if z.size and np.max(np.abs(z)) >= 1:
        raise ValueError("zeros must lie in the open unit disk")
    return z


def bgk_zero_sum(zeros: Sequence[complex], data: GrowthData) -> float:
    """``sum (1-|z|)^(alpha+1+tau) prod |z - xi_j|^((beta_j - 1 + tau)_+)``."""
    z = _check_zeros(zeros)
    terms = []
    for a in z:
        t = (1.0 - abs(a)) ** (data.alpha + 1 + data.tau)
        for x, b in zip(data.xi, data.beta):
            e = max(b - 1 + data.tau, 0.0)
            if e > 0:
                t *= abs(a - x) ** e
        terms.append(t)
    return math.fsum(terms)


@dataclass(frozen=True)
class SyntheticH:
    """Finite Blaschke product normalised to ``h(0) = 1``.

    For zeros ``a != 0`` the factor is ``(a - z) / (a (1 - conj(a) z))``.  Zeros at
    the origin contribute a plain ``z`` (and then ``h(0) = 0``).  The
    normalisation makes ``|h| = 1 / prod|a|`` on the circle; :meth:`raw` is the
    unimodular product ``prod (|a|/a) (a - z)/(1 - conj(a) z)``.
    """

    zeros: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "zeros", tuple(complex(a) for a in _check_zeros(self.zeros)))

    def _factors(self, z: np.ndarray, normalized: bool) -> np.ndarray:
        out = np.ones_like(z)
        for a in self.zeros:
            if a == 0:
                out = out * z
                continue
            b = (a - z) / (1.0 - np.conj(a) * z)
            out = out * (b / a if normalized else b * (abs(a) / a))
        return out

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return self._factors(z, True)

    def raw(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return self._factors(z, False)

    def log_abs(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape)
        with np.errstate(divide="ignore"):  # -inf exactly at a zero
            for a in self.zeros:
                if a == 0:
                    out += np.log(np.abs(z))
                else:
                    out += (np.log(np.abs(a - z)) - np.log(np.abs(1.0 - np.conj(a) * z))
                            - math.log(abs(a)))
        return out


def synth_blaschke(zeros: Sequence[complex]) -> SyntheticH:
    return SyntheticH(tuple(zeros))


@dataclass
class NormalizedComposite:
    """``z -> f(phi(z)) / f(phi(0))`` for a determinant ``f`` and a disk map ``phi``.

    When ``f`` exposes ``log_values`` (as a determinant function does),
    :meth:`log_abs` works with logarithms throughout, so values too large or
    too small for floating point near the real axis stay representable.
    """

    f: Callable
    phi: Callable
    f0: complex = field(init=False)

    def __post_init__(self):
        lam0 = np.atleast_1d(self.phi(np.array([0j])))
        self._log = getattr(self.f, "log_values", None)
        if self._log is not None:
            self.log_f0 = complex(np.asarray(self._log(lam0))[0])
            self.f0 = complex(np.exp(self.log_f0))
            if not np.isfinite(self.log_f0.real):
                raise ProbeError("the composite vanishes at the origin")
            return
        self.f0 = complex(np.asarray(self.f(lam0))[0])
        if self.f0 == 0:
            raise ProbeError("the composite vanishes at the origin")
        self.log_f0 = complex(np.log(self.f0))

    def __call__(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        lam = np.asarray(self.phi(z))
        if self._log is not None:
            return np.exp(np.asarray(self._log(lam)) - self.log_f0)
        return np.asarray(self.f(lam), dtype=complex) / self.f0

    def log_abs(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self._log is not None:
            lam = np.asarray(self.phi(z))
            return (np.asarray(self._log(lam)) - self.log_f0).real
        return np.log(np.abs(self(z)))


@dataclass(frozen=True)
class ProbeGrid:
    """Polar probe points: radii ``1 - 2^-k`` (k = 1..n_radial) and a uniform ring.

    Rings at radius ``r`` get ``n_angular`` half-step angles plus extra angles
    clustered at the singular points, spaced like ``1 - r``.
    """

    n_radial: int = 24
    n_angular: int = 256
    n_local: int = 16

    def points(self, xi: Sequence[complex] = ()) -> np.ndarray:
        pts = [np.array([0j])]
        th = 2 * np.pi * (np.arange(self.n_angular) + 0.5) / self.n_angular
        for k in range(1, self.n_radial + 1):
            r = 1.0 - 2.0**-k
            ring = [r * np.exp(1j * th)]
            for x in xi:
                off = (1 - r) * np.geomspace(1e-2, 1e2, self.n_local)
                ang = np.angle(x) + np.concatenate([-off, off, [0.0]])
                ring.append(r * np.exp(1j * ang))
            pts.extend(ring)
        return np.concatenate(pts)


def growth_weight(z: np.ndarray, alpha: float, xi: Sequence[complex],
                  beta: Sequence[float]) -> np.ndarray:
    """``(1-|z|)^-alpha prod |z - xi_j|^-beta_j``."""
    z = np.asarray(z, dtype=complex)
    w = (1.0 - np.abs(z)) ** (-alpha)
    for x, b in zip(xi, beta):
        w = w * np.abs(z - x) ** (-b)
    return w


@dataclass(frozen=True)
class GrowthFit:
    data: GrowthData
    residual: float          # max over the grid of log|h| - K0 w (<= 0 up to rounding)
    least_squares_K0: float  # unconstrained fit, for diagnostics only
    argmax: complex
    n_points: int

    @property
    def K0(self) -> float:
        return self.data.K0


def fit_growth(h, probe: ProbeGrid = ProbeGrid(), xi_guess: Sequence[complex] = (1.0,),
               p: float = 4.0, alpha: Optional[float] = None,
               beta: Optional[Sequence[float]] = None, tau: float = 0.5,
               zeros: Sequence[complex] = ()) -> GrowthFit:
    """Smallest ``K0`` with ``log|h| <= K0 w`` on the probe grid.

    Exponents default to ``alpha = p/2`` and ``beta = p/4`` at every singular
    point.  Probe points within ``1e-6`` of a known zero are dropped.
    """
    xi = tuple(complex(x) for x in xi_guess)
    alpha = p / 2 if alpha is None else alpha
    beta = tuple([p / 4] * len(xi) if beta is None else beta)
    z = probe.points(xi)
    zs = np.asarray(list(zeros), dtype=complex)
    if zs.size:
        keep = np.min(np.abs(z[:, None] - zs[None, :]), axis=1) > 1e-6
        z = z[keep]
    if hasattr(h, "log_abs"):
        la = np.asarray(h.log_abs(z), dtype=float)
    else:
        la = np.log(np.abs(np.asarray(h(z), dtype=complex)))
    if not np.all(np.isfinite(la)):
        raise ProbeError("log|h| is not finite on the probe grid")
    w = growth_weight(z, alpha, xi, beta)
    q = la / w
    i = int(np.argmax(q))
    K0 = max(0.0, float(q[i]))
    residual = float(np.max(la - K0 * w))
    ls = float(np.dot(la, w) / np.dot(w, w))
    return GrowthFit(GrowthData(K0, alpha, xi, beta, tau), residual, ls, complex(z[i]), len(z))
