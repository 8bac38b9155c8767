"""Lieb-Thirring-type eigenvalue sums, their right-hand constants and box checks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .conformal import LevelGeometry
from .landau_model import Envelope, Family, IntegrabilityError, PotentialSpec, sup_norm
from .spectral import ComplexSpectrum

__all__ = [
    "Variant",
    "LTConfig",
    "LTSumReport",
    "LEVEL_TOL",
    "dist_to_levels",
    "dist_to_halfline",
    "lt_terms",
    "lt_sum",
    "envelope_integral",
    "k_constant",
    "numerical_range_box",
    "numerical_range_box_check",
]

LEVEL_TOL = 1e-10


class Variant(str, enum.Enum):
    ABSTRACT = "Abstract_esta"
    SCHRODINGER = "Schrodinger_estc"
    SCHRODINGER_BOUNDED = "SchrodingerBounded_este"
    PAULI2D = "Pauli2d_estg"
    PAULI2D_BOUNDED = "Pauli2dBounded_esti"
    PAULI3D = "Pauli3d_est0"
    TAIL = "TailVariant"


_BOUNDED = {Variant.SCHRODINGER_BOUNDED, Variant.PAULI2D_BOUNDED}


@dataclass(frozen=True)
class LTConfig:
    """Which sum to evaluate.

    ``base`` is only used by the tail variant: it names the full-plane sum whose
    terms are restricted to ``|lam| >= tau`` with ``(1+|lam|)`` replaced by
    ``|lam|``.  ``d`` is the half-dimension, used for the default ``gamma``.
    """

    p: float
    variant: Variant = Variant.ABSTRACT
    eps: float = 0.1
    gamma: Optional[float] = None
    tau: Optional[float] = None
    base: Variant = Variant.ABSTRACT
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "base", Variant(self.base))
        if not self.p > 0:
            raise ValueError("p must be positive")
        if self.base is Variant.TAIL:
            raise ValueError("the tail variant needs a full-plane base variant")
        if self.variant is Variant.TAIL and (self.tau is None or not self.tau > 0):
            raise ValueError("the tail variant needs a positive tau")
        if self.gamma is None:
            object.__setattr__(self, "gamma", self.d + 1.5 + 0.1)
        if self.shape is Variant.PAULI3D:
            if not 0 < self.eps < 1:
                raise ValueError("eps must lie in (0, 1)")
            if not self.gamma > self.d + 1.5:
                raise ValueError("gamma must exceed d + 3/2")

    @property
    def shape(self) -> Variant:
        """The full-plane variant that fixes the numerator and the constant."""
        return self.base if self.variant is Variant.TAIL else self.variant

    @property
    def is_tail(self) -> bool:
        return self.variant is Variant.TAIL

    @property
    def weight_power(self) -> float:
        return self.gamma if self.shape is Variant.PAULI3D else 2 * self.p


@dataclass(frozen=True)
class LTSumReport:
    config: LTConfig
    sum: float
    K: float
    ratio: float
    term_table: tuple[tuple[complex, int, float], ...]  # (eigenvalue, multiplicity, term)


def dist_to_levels(lam: complex, geom: LevelGeometry) -> float:
    return geom.dist_levels(complex(lam))


def dist_to_halfline(lam: complex, lam0: float) -> float:
    lam = complex(lam)
    if lam.real >= lam0:
        return abs(lam.imag)
    return abs(lam - lam0)


def _pos(x: float) -> float:
    return max(x, 0.0)


def lt_terms(lam: complex, geom: LevelGeometry, config: LTConfig) -> float:
    """One eigenvalue's contribution (multiplicity one)."""
    lam = complex(lam)
    a = abs(lam)
    if config.is_tail and a < config.tau:
        return 0.0
    dl = dist_to_levels(lam, geom)
    weight = a if config.is_tail else 1.0 + a
    if config.shape is Variant.PAULI3D:
        p, eps = config.p, config.eps
        e_lv = _pos(p / 4 - 1 + eps)
        if dl <= LEVEL_TOL and e_lv > 0:
            return 0.0
        dh = dist_to_halfline(lam, geom.base)
        num = dh ** (p / 2 + 1 + eps) * (dl**e_lv if e_lv > 0 else 1.0)
        return num / weight**config.gamma
    if dl <= LEVEL_TOL:
        return 0.0
    return dl**config.p / weight ** (2 * config.p)


def lt_sum(spec: ComplexSpectrum, geom: LevelGeometry, config: LTConfig,
           K: Optional[float] = None) -> LTSumReport:
    """Multiplicity-weighted sum for the configured variant.

    ``K`` is the right-hand constant (see :func:`k_constant`); when omitted the
    report carries ``K = nan`` and ``ratio = nan``.
    """
    table = []
    for lam, mult in spec.items:
        table.append((lam, mult, mult * lt_terms(lam, geom, config)))
    total = math.fsum(t for _, _, t in table)
    if K is None:
        K = math.nan
        ratio = math.nan
    elif K == 0:
        ratio = 0.0 if total == 0 else math.inf
    else:
        ratio = total / K
    return LTSumReport(config, total, float(K), ratio, tuple(table))


# ---------------------------------------------------------------------------
# right-hand constants


def _quad(f, a, b) -> float:
    val, err = quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=400)
    if not math.isfinite(val):
        raise IntegrabilityError("divergent envelope integral")
    return val


def envelope_integral(env: Envelope, p: float, dim: int) -> float:
    """``int_{R^dim} |f(|x|)|^p dx`` for a radial envelope ``f``."""
    if p <= 0:
        raise ValueError("p must be positive")
    if env.kind == "constant":
        raise IntegrabilityError("constant envelope is not integrable")
    if env.kind == "power_decay" and not env.param * p > dim:
        raise IntegrabilityError(
            f"<x>^-{env.param} is not in L^{p}(R^{dim}): need m p > {dim}"
        )
    # |S^{dim-1}| int_0^inf r^{dim-1} f(r)^p dr
    sphere = 2 * math.pi ** (dim / 2) / math.gamma(dim / 2)
    g = lambda r: r ** (dim - 1) * float(env(np.array([r]))[0]) ** p
    if env.kind == "compact_bump":
        return sphere * _quad(g, 0.0, env.param)
    if env.kind == "gaussian":
        # exp(-p r^2 / w^2) in closed form keeps the integral exact
        w = env.param
        return (math.pi * w * w / p) ** (dim / 2)
    return sphere * _quad(g, 0.0, math.inf)


def _common_profile(pot: PotentialSpec):
    """Shared envelopes and largest amplitude; ``|v_lk| <= A F G`` then holds."""
    profs = [pr for pr in pot.profiles() if pr.amplitude != 0]
    if not profs:
        return None
    F, G = profs[0].F, profs[0].G
    for pr in profs[1:]:
        if pr.F != F or pr.G != G:
            raise ValueError("k_constant needs all nonzero entries to share envelopes")
    return max(abs(pr.amplitude) for pr in profs), F, G


def k_constant(pot: PotentialSpec, config: LTConfig, d: int = 1,
               v_sup: Optional[float] = None) -> float:
    """Right-hand constant ``K`` of the configured variant.

    The dominating function is ``A F`` with ``A`` the largest entry amplitude,
    so ``int |A F|^p = A^p int |F|^p``.  For the (2d+1)-dimensional Pauli bound
    the product ``F(x_perp) G(x)`` is split as ``[F G^(1/2)] [G^(1/2)]``.  Tail
    variants multiply by ``(1 + 1/tau)`` to the weight power.
    """
    shape = config.shape
    p = config.p
    common = _common_profile(pot)
    if common is None:
        return 0.0
    A, F, G = common
    if v_sup is None:
        v_sup = sup_norm(pot)
    if shape is Variant.PAULI3D:
        if G is None:
            raise ValueError("the (2d+1)-dimensional bound needs a longitudinal envelope G")
        if G.kind == "power_decay" and not G.param > 1:
            raise IntegrabilityError("G^(1/2) must be square integrable: need m > 1")
        iF = envelope_integral(F, p, 2 * d) * envelope_integral(G, p / 2, 1)
        g_l2 = math.sqrt(envelope_integral(G, 1.0, 1))
        g_inf = 1.0  # envelopes peak at the origin with value one
        K = (g_l2 + g_inf) ** p * (1 + v_sup) ** (d + p / 2 + 1.5 + config.eps) * A**p * iF
    else:
        K = A**p * envelope_integral(F, p, 2 * d)
        if shape in _BOUNDED:
            K *= (1 + v_sup) ** (2 * p)
    if config.is_tail:
        K *= (1 + 1 / config.tau) ** config.weight_power
    return float(K)


# ---------------------------------------------------------------------------
# numerical-range box


def numerical_range_box(v_sup: float, family: Family) -> tuple[float, float]:
    """``(re_min, im_max)``: ``Re >= -c||V||`` and ``|Im| <= c||V||``, ``c = 2`` for
    matrix potentials and ``1`` for scalar ones."""
    if v_sup < 0:
        raise ValueError("v_sup must be nonnegative")
    c = 2.0 if Family(family).is_pauli else 1.0
    return -c * v_sup, c * v_sup


def numerical_range_box_check(spec: ComplexSpectrum, v_sup: float, family: Family,
                              tol: float = 1e-10) -> bool:
    re_min, im_max = numerical_range_box(v_sup, family)
    vals = spec.values()
    if vals.size == 0:
        return True
    return bool(np.all(vals.real >= re_min - tol) and np.all(np.abs(vals.imag) <= im_max + tol))
