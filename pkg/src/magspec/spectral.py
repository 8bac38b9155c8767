"""Dense non-Hermitian spectra, Schatten norms and resolvent checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .landau_model import (
    AssembledOperator,
    Envelope,
    Family,
    PotentialSpec,
    Profile,
    assemble,
)

__all__ = [
    "CLUSTER_TOL",
    "ComplexSpectrum",
    "SchattenReport",
    "EigenSolverError",
    "ResolventSingularityError",
    "eigenvalues",
    "schatten_norm",
    "schatten_power",
    "weight_matrix",
    "weighted_resolvent",
    "ResolventProfile",
    "resolvent_bound_profile",
    "loglog_slope",
    "HansmannResult",
    "default_mu0",
    "hansmann_check",
]

CLUSTER_TOL = 1e-8
RESOLVENT_MIN_DIST = 1e-12


class EigenSolverError(RuntimeError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class ResolventSingularityError(ValueError):
    def __init__(self, distance: float):
        super().__init__(f"point is within {distance:.3g} of the unperturbed spectrum")
        self.distance = distance


@dataclass(frozen=True)
class ComplexSpectrum:
    """Eigenvalues with algebraic multiplicities."""

    items: tuple[tuple[complex, int], ...]

    @classmethod
    def from_values(cls, values: Iterable[complex], tol: float = CLUSTER_TOL) -> "ComplexSpectrum":
        vals = np.asarray(list(values), dtype=complex).ravel()
        n = len(vals)
        if n == 0:
            return cls(())
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        order = np.argsort(vals.real, kind="stable")
        # sweep on the real part: only neighbours within tol can be linked
        for ii, a in enumerate(order):
            for b in order[ii + 1:]:
                if vals[b].real - vals[a].real > tol:
                    break
                if abs(vals[a] - vals[b]) <= tol:
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
        groups: dict[int, list[int]] = {}
        for a in range(n):
            groups.setdefault(find(a), []).append(a)
        items = [(complex(np.mean(vals[g])), len(g)) for g in groups.values()]
        items.sort(key=lambda it: (it[0].real, it[0].imag))
        return cls(tuple(items))

    @property
    def dimension(self) -> int:
        return sum(m for _, m in self.items)

    def __len__(self) -> int:
        return len(self.items)

    def values(self) -> np.ndarray:
        """All eigenvalues, each repeated by its multiplicity."""
        return np.array([v for v, m in self.items for _ in range(m)], dtype=complex)

    def restrict(self, keep) -> "ComplexSpectrum":
        return ComplexSpectrum(tuple(it for it in self.items if keep(it[0])))

    def off(self, points: Sequence[float], tol: float = 1e-10) -> "ComplexSpectrum":
        """Drop eigenvalues within ``tol`` of any of ``points`` (e.g. the h0 diagonal)."""
        pts = np.unique(np.asarray(points, dtype=complex))
        return self.restrict(lambda z: np.min(np.abs(pts - z)) > tol if len(pts) else True)


def eigenvalues(matrix) -> ComplexSpectrum:
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("eigenvalues needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if a.shape[0] == 0:
        return ComplexSpectrum(())
    try:
        t, z = sla.schur(a.astype(complex), output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolverError(f"Schur iteration failed: {exc}") from exc
    vals = np.diag(t)
    if not np.all(np.isfinite(vals)):
        resid = float(np.linalg.norm(z @ t @ z.conj().T - a))
        raise EigenSolverError("Schur iteration returned non-finite values", resid)
    return ComplexSpectrum.from_values(vals)


@dataclass(frozen=True)
class SchattenReport:
    p: float
    singular_values: np.ndarray
    norm: float

    @property
    def power(self) -> float:
        """``norm ** p`` computed as the plain sum of ``sigma_i ** p``."""
        return math.fsum(float(s) ** self.p for s in self.singular_values)


def schatten_norm(matrix, p: float) -> SchattenReport:
    if not p >= 1:
        raise ValueError("Schatten index must be >= 1")
    s = sla.svdvals(np.asarray(matrix, dtype=complex))
    s = np.sort(s)[::-1]
    if s.size == 0 or s[0] == 0:
        return SchattenReport(p, s, 0.0)
    if math.isinf(p):
        return SchattenReport(p, s, float(s[0]))
    scaled = math.fsum(float(x) ** p for x in s / s[0])
    return SchattenReport(p, s, float(s[0] * scaled ** (1.0 / p)))


def schatten_power(matrix, p: float) -> float:
    """``||A||_{S_p}^p``."""
    return schatten_norm(matrix, p).power


# ---------------------------------------------------------------------------
# resolvents


def weight_matrix(op: AssembledOperator, F: Envelope, G: Optional[Envelope] = None,
                  quad_order: int = 32) -> np.ndarray:
    """Landau-basis matrix of multiplication by ``F(x_perp) G(x)`` (times the spin identity)."""
    if op.model.family.is_pauli:
        zero = Profile(0.0, F, G)
        one = Profile(1.0, F, G)
        pot = PotentialSpec(((one, zero), (zero, one)))
    else:
        pot = PotentialSpec(((Profile(1.0, F, G),),))
    return assemble(op.model, op.trunc, pot, quad_order).v


def _as_weight(w, op: AssembledOperator):
    if w is None:
        return None
    if isinstance(w, Envelope):
        return weight_matrix(op, w)
    w = np.asarray(w)
    if w.shape != (op.dim, op.dim):
        raise ValueError("weight matrix has the wrong shape")
    return w


def weighted_resolvent(op: AssembledOperator, lam: complex, left_weight=None,
                       right_weight=None) -> np.ndarray:
    """``W_L (h0 - lam)^{-1} W_R``; weights are matrices, envelopes or ``None``."""
    diag = np.diag(op.h0)
    gap = float(np.min(np.abs(diag - lam)))
    if gap <= RESOLVENT_MIN_DIST:
        raise ResolventSingularityError(gap)
    r = 1.0 / (diag - lam)
    wl = _as_weight(left_weight, op)
    wr = _as_weight(right_weight, op)
    if wl is None and wr is None:
        return np.diag(r)
    if wl is None:
        return r[:, None] * wr
    if wr is None:
        return wl * r[None, :]
    return (wl * r[None, :]) @ wr


def _levels_upto(op: AssembledOperator, lam: complex) -> np.ndarray:
    top = max(float(np.max(op.h0_diag)), abs(lam)) + 2 * op.model.gap
    n = int(math.ceil(top / op.model.gap)) + 2
    return np.array([op.model.level(j) for j in range(n)])


def rhs_shape(op: AssembledOperator, lam: complex, p: float) -> float:
    """The lambda-dependent factor of the Schatten resolvent bound for the family."""
    levels = _levels_upto(op, lam)
    dist_lv = float(np.min(np.abs(levels - lam)))
    fam, d = op.model.family, op.model.d
    if fam is Family.PAULI3D:
        lam0 = op.model.level(0)
        dist_hl = abs(lam.imag) if lam.real >= lam0 else abs(lam - lam0)
        return (1 + abs(lam)) ** (d + 0.5) / (dist_hl ** (p / 2) * dist_lv ** (p / 4))
    if fam is Family.PAULI2D:
        return (1 + abs(lam)) / dist_lv**p
    return (1 + abs(lam)) ** d / dist_lv**p


@dataclass(frozen=True)
class ResolventProfile:
    rows: tuple[tuple[complex, float, float], ...]

    @property
    def empirical_constant(self) -> float:
        return max(lhs / rhs for _, lhs, rhs in self.rows)

    def lhs(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])


def resolvent_bound_profile(op: AssembledOperator, p: float, path: Sequence[complex],
                            left_weight=None, right_weight=None) -> ResolventProfile:
    wl = _as_weight(left_weight, op)
    wr = _as_weight(right_weight, op)
    rows = []
    for lam in path:
        lam = complex(lam)
        m = weighted_resolvent(op, lam, wl, wr)
        rows.append((lam, schatten_power(m, p), rhs_shape(op, lam, p)))
    return ResolventProfile(tuple(rows))


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


# ---------------------------------------------------------------------------
# Hansmann comparison


@dataclass(frozen=True)
class HansmannResult:
    lhs_sum: float
    rhs_norm_p: float
    ratio: float
    mu0: float


def real_part_bound(h: np.ndarray) -> float:
    """Smallest eigenvalue of ``(h + h*)/2``: the left edge of the numerical range."""
    return float(np.linalg.eigvalsh(0.5 * (h + h.conj().T))[0])


def default_mu0(op: AssembledOperator) -> float:
    """``mu_1 - 1`` with ``mu_1 = min(0, min Re N(h))``."""
    return min(0.0, real_part_bound(op.h)) - 1.0


def hansmann_check(op: AssembledOperator, mu0: Optional[float] = None,
                   p: float = 2.0) -> HansmannResult:
    if mu0 is None:
        mu0 = default_mu0(op)
    mu0 = complex(mu0)
    if mu0.imag != 0:
        raise ValueError("mu0 must be real")
    mu0 = mu0.real
    diag = op.h0_diag
    if np.min(np.abs(diag - mu0)) < 1.0:
        raise ValueError("mu0 must be at distance >= 1 from the unperturbed spectrum")
    if mu0 > real_part_bound(op.h) - 1.0 + 1e-12:
        raise ValueError("mu0 must lie at least 1 left of the numerical range")
    n = op.dim
    shifted = op.h - mu0 * np.eye(n)
    try:
        B = np.linalg.solve(shifted, np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise ResolventSingularityError(0.0) from exc
    b0 = 1.0 / (diag - mu0)
    # spectral mapping sigma(B) = 1/(sigma(h) - mu0) and the resolvent identity
    # B - B0 = -B V B0: both exact when V = 0 and free of cancellation otherwise
    sigB = 1.0 / (eigenvalues(op.h).values() - mu0)
    lhs = math.fsum(float(np.min(np.abs(b0 - z))) ** p for z in sigB)
    rhs = schatten_power(-(B @ op.v) * b0[None, :], p)
    if rhs == 0.0:
        ratio = 0.0 if lhs == 0.0 else math.inf
    else:
        ratio = lhs / rhs
    return HansmannResult(lhs, rhs, ratio, mu0)
