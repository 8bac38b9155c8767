"""Truncated Landau-basis models of magnetic Schrödinger and Pauli operators.

The unperturbed Hamiltonian is diagonal in the symmetric-gauge Landau basis.
A single plane carries states ``(j, k)`` with Landau index ``j`` and a second
quantum number ``k``; the angular momentum is ``ell = k - j`` and the radial
index is ``min(j, k)``.  Potentials are products of radial envelopes, so their
matrix elements are diagonal in ``ell`` and reduce to one-dimensional radial
integrals, evaluated by Gauss-Legendre quadrature in ``t = r**2``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import eval_genlaguerre, gammaln, roots_legendre

__all__ = [
    "Family",
    "MagneticModel",
    "Longitudinal",
    "TruncationSpec",
    "Envelope",
    "Profile",
    "PotentialSpec",
    "AssembledOperator",
    "QuadratureError",
    "IntegrabilityError",
    "landau_levels",
    "radial_function",
    "transverse_states",
    "sup_norm",
    "assemble",
]

QUAD_TOL = 1e-8
QUAD_MAX_ORDER = 4096


class QuadratureError(RuntimeError):
    """Matrix-element quadrature did not converge under order doubling."""


class IntegrabilityError(ValueError):
    """An envelope is incompatible with the model or with the integrability it needs."""


class Family(str, enum.Enum):
    SCHRODINGER2D = "Schrodinger2d"
    PAULI2D = "Pauli2d"
    PAULI2D_GENERAL = "Pauli2dGeneral"
    PAULI3D = "Pauli3d"

    @property
    def is_pauli(self) -> bool:
        return self is not Family.SCHRODINGER2D


@dataclass(frozen=True)
class MagneticModel:
    """Operator family, field strength ``b`` and half-dimension ``d``."""

    family: Family
    b: float
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValueError(f"field strength must be positive, got {self.b}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"half-dimension must be a positive integer, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if self.family is Family.PAULI2D and self.d != 1:
            raise ValueError("Pauli2d is the planar case d = 1; use Pauli2dGeneral")

    def level(self, j: int) -> float:
        """Threshold ``j``: ``b(d+2j)`` for Schrödinger, ``2bj`` for the Pauli families."""
        if self.family is Family.SCHRODINGER2D:
            return self.b * (self.d + 2 * j)
        return 2.0 * self.b * j

    @property
    def gap(self) -> float:
        return 2.0 * self.b

    def spin_levels(self, j: int) -> tuple[float, ...]:
        """Diagonal values carried by transverse level ``j`` (one per spin block)."""
        if self.family is Family.SCHRODINGER2D:
            return (self.level(j),)
        # H_perp -/+ b d, where H_perp has levels b(d + 2j)
        return (2.0 * self.b * j, 2.0 * self.b * (j + self.d))


def landau_levels(model: MagneticModel, j_max: int) -> list[float]:
    if j_max < 0:
        raise ValueError("j_max must be non-negative")
    return [model.level(j) for j in range(j_max + 1)]


@dataclass(frozen=True)
class Longitudinal:
    """Dirichlet box ``[-L, L]`` with ``n_x`` interior grid points."""

    box_half_length: float
    n_x: int

    def __post_init__(self):
        if not self.box_half_length > 0:
            raise ValueError("box half length must be positive")
        if self.n_x < 2:
            raise ValueError("n_x must be at least 2")

    @property
    def spacing(self) -> float:
        return 2.0 * self.box_half_length / (self.n_x + 1)

    def grid(self) -> np.ndarray:
        return -self.box_half_length + self.spacing * np.arange(1, self.n_x + 1)

    def laplacian_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the Dirichlet second difference ``-D_x**2``, increasing."""
        n, h = self.n_x, self.spacing
        q = np.arange(1, n + 1)
        return (4.0 / h**2) * np.sin(q * np.pi / (2 * (n + 1))) ** 2

    def sine_basis(self) -> np.ndarray:
        """Orthogonal DST-I matrix whose columns diagonalise the second difference."""
        n = self.n_x
        i = np.arange(1, n + 1)
        return np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(i, i) * np.pi / (n + 1))


@dataclass(frozen=True)
class TruncationSpec:
    n_levels: int
    m_per_level: int
    longitudinal: Optional[Longitudinal] = None

    def __post_init__(self):
        if self.n_levels < 1 or self.m_per_level < 1:
            raise ValueError("n_levels and m_per_level must be positive")

    def dimension(self, model: MagneticModel) -> int:
        n = self.n_levels * self.m_per_level
        if model.family.is_pauli:
            n *= 2
        if model.family is Family.PAULI3D:
            if self.longitudinal is None:
                raise ValueError("Pauli3d needs a longitudinal box")
            n *= self.longitudinal.n_x
        return n


# ---------------------------------------------------------------------------
# envelopes and potentials

_ENVELOPE_KINDS = ("gaussian", "power_decay", "compact_bump", "constant")


@dataclass(frozen=True)
class Envelope:
    """Radial envelope ``f(|x|)``.

    ``gaussian``: ``exp(-|x|^2/w^2)`` with ``param = w``;
    ``power_decay``: ``(1+|x|^2)^(-m/2)`` with ``param = m``;
    ``compact_bump``: ``exp(1 - 1/(1-(|x|/R)^2))`` inside ``|x| < R``, ``param = R``;
    ``constant``: identically one.
    All envelopes equal one at the origin.
    """

    kind: str
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in _ENVELOPE_KINDS:
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if self.kind != "constant" and not self.param > 0:
            raise IntegrabilityError(
                f"{self.kind} envelope needs a positive parameter, got {self.param}"
            )

    @property
    def decays(self) -> bool:
        return self.kind != "constant"

    @property
    def separable(self) -> bool:
        """Whether ``f(|x|)`` factorises over orthogonal planes."""
        return self.kind in ("gaussian", "constant")

    def of_r2(self, t) -> np.ndarray:
        """Envelope as a function of ``t = |x|^2``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-t / self.param**2)
        if self.kind == "power_decay":
            return (1.0 + t) ** (-0.5 * self.param)
        if self.kind == "compact_bump":
            s = t / self.param**2
            out = np.zeros_like(t)
            inside = s < 1.0
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside]))
            return out
        return np.ones_like(t)

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.of_r2(r * r)

    def plane_factor(self, d: int) -> "Envelope":
        """Per-plane factor of a separable envelope in ``d`` planes."""
        if not self.separable:
            raise IntegrabilityError(f"{self.kind} envelope does not factor over planes")
        return self


@dataclass(frozen=True)
class Profile:
    """One potential entry: ``amplitude * F(|x_perp|) * G(x)``."""

    amplitude: complex
    F: Envelope = field(default_factory=lambda: Envelope("constant"))
    G: Optional[Envelope] = None

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))


@dataclass(frozen=True)
class PotentialSpec:
    """A 1x1 (scalar) or 2x2 array of profiles."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        n = len(rows)
        if n not in (1, 2) or any(len(row) != n for row in rows):
            raise ValueError("potential must be a 1x1 or 2x2 array of profiles")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def scalar(cls, amplitude: complex, F: Envelope | None = None) -> "PotentialSpec":
        return cls(((Profile(amplitude, F or Envelope("constant")),),))

    @classmethod
    def matrix(
        cls,
        amplitudes: Sequence[Sequence[complex]],
        F: Envelope | None = None,
        G: Envelope | None = None,
    ) -> "PotentialSpec":
        F = F or Envelope("constant")
        return cls(tuple(tuple(Profile(a, F, G) for a in row) for row in amplitudes))

    @property
    def size(self) -> int:
        return len(self.entries)

    def amplitude_matrix(self) -> np.ndarray:
        return np.array([[p.amplitude for p in row] for row in self.entries], dtype=complex)

    def scaled(self, factor: complex) -> "PotentialSpec":
        return PotentialSpec(
            tuple(
                tuple(Profile(p.amplitude * factor, p.F, p.G) for p in row)
                for row in self.entries
            )
        )

    def profiles(self):
        for row in self.entries:
            yield from row


def _compact_coordinate(n: int) -> np.ndarray:
    """Nested grid on [0, inf) via r = s/(1-s), s = i/n."""
    s = np.arange(n) / n
    return s / (1.0 - s)


def sup_norm(pot: PotentialSpec, grid_n: int = 64) -> float:
    """``sup_x ||V(x)||`` (spectral norm of the entry matrix) on a refined grid.

    The grid maps ``[0, 1)`` onto ``[0, inf)`` for ``|x_perp|`` and for ``|x|``,
    so it always contains the origin and reaches the decaying tails; it is
    doubled until the maximum changes by less than ``1e-6`` relative.
    """
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")
    for p in pot.profiles():
        for env in (p.F, p.G):
            if env is not None and env.kind == "power_decay" and env.param <= 0:
                raise IntegrabilityError("non-decaying power envelope")
    n = pot.size
    amps = pot.amplitude_matrix()
    if not np.any(amps):
        return 0.0

    def evaluate(m: int) -> float:
        r = _compact_coordinate(m)
        x = _compact_coordinate(m)
        vals = np.empty((m, m, n, n), dtype=complex)
        for a in range(n):
            for c in range(n):
                prof = pot.entries[a][c]
                fr = prof.F(r)
                gx = prof.G(x) if prof.G is not None else np.ones_like(x)
                vals[:, :, a, c] = prof.amplitude * np.outer(fr, gx)
        if n == 1:
            return float(np.max(np.abs(vals)))
        return float(np.max(np.linalg.norm(vals, ord=2, axis=(2, 3))))

    m = grid_n
    prev = evaluate(m)
    for _ in range(12):
        m *= 2
        cur = evaluate(m)
        if abs(cur - prev) <= 1e-6 * max(abs(cur), 1e-300):
            return cur
        prev = cur
    return prev


# ---------------------------------------------------------------------------
# Landau basis


def radial_function(j: int, k: int, b: float, r) -> np.ndarray:
    """Radial profile ``R_{jk}(r)`` of the planar Landau state ``(j, k)``.

    The full wavefunction is ``R_{jk}(r) exp(i (k-j) theta)`` and is normalised
    in ``L^2(R^2)``.
    """
    with np.errstate(over="ignore"):
        return _radial_of_u(j, k, 0.5 * b * np.asarray(r, dtype=float) ** 2, b)


def _radial_of_u(j: int, k: int, u, b: float) -> np.ndarray:
    # past u ~ 1500 the Gaussian factor is exactly 0; clamping keeps u finite
    u = np.minimum(np.asarray(u, dtype=float), 1e300)
    ell = abs(k - j)
    n = min(j, k)
    lognorm = 0.5 * (math.log(b / (2 * math.pi)) + gammaln(n + 1) - gammaln(n + ell + 1))
    with np.errstate(divide="ignore"):
        logu = np.where(u > 0, np.log(np.where(u > 0, u, 1.0)), -np.inf)
    power = np.where(u > 0, np.exp(lognorm + 0.5 * ell * logu - 0.5 * u), 0.0)
    if ell == 0:
        power = np.exp(lognorm - 0.5 * u)
    # far out the Gaussian factor underflows to 0 while the polynomial may overflow
    with np.errstate(invalid="ignore"):
        return np.where(power == 0, 0.0, power * eval_genlaguerre(n, ell, u))


def transverse_states(d: int, n_levels: int, m_per_level: int) -> list[tuple]:
    """Kept transverse states, grouped by total level index.

    Each state is a tuple of ``d`` planar pairs ``(j_i, k_i)``.  For level ``J``
    the candidates have ``sum j_i = J`` and every ``k_i < m_per_level``; the
    first ``m_per_level`` in the order (sum of k, j-tuple, k-tuple) are kept.
    """
    out = []
    for J in range(n_levels):
        cands = []
        for js in _compositions(J, d):
            for ks in itertools.product(range(m_per_level), repeat=d):
                cands.append((sum(ks), js, ks))
        cands.sort()
        for _, js, ks in cands[:m_per_level]:
            out.append(tuple(zip(js, ks)))
    return out


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _plane_matrix(
    pairs: list[tuple[int, int]], b: float, env: Envelope, quad_order: int, t_cap: float
) -> np.ndarray:
    """Radially integrated matrix ``<(j,k)| env |(j',k')>`` for planar states.

    Converged by order doubling; raises QuadratureError otherwise.
    """
    n = len(pairs)
    if env.kind == "constant":
        return np.eye(n)
    big = max(j + k for j, k in pairs)
    t_max = 2.0 * (2 * big + 60) / b
    if env.kind == "compact_bump":
        t_max = min(t_max, env.param**2)
    if t_cap is not None:
        t_max = min(t_max, t_cap)
    ells = np.array([k - j for j, k in pairs])

    def build(q: int) -> np.ndarray:
        x, w = roots_legendre(q)
        t = 0.5 * t_max * (x + 1.0)
        w = 0.5 * t_max * w
        u = 0.5 * b * t
        rad = np.array([_radial_of_u(j, k, u, b) for j, k in pairs])
        weighted = rad * (w * env.of_r2(t))
        m = np.pi * weighted @ rad.T
        m[ells[:, None] != ells[None, :]] = 0.0
        return m

    q = max(int(quad_order), 4)
    prev = build(q)
    while q < QUAD_MAX_ORDER:
        q *= 2
        cur = build(q)
        if np.max(np.abs(cur - prev)) < QUAD_TOL:
            return cur
        prev = cur
    raise QuadratureError(
        f"radial quadrature for {env.kind} did not converge by order {QUAD_MAX_ORDER}"
    )


def _transverse_matrix(
    states: list[tuple], model: MagneticModel, env: Envelope, quad_order: int
) -> np.ndarray:
    d = model.d
    if d == 1:
        pairs = [s[0] for s in states]
        return _plane_matrix(pairs, model.b, env, quad_order, None)
    factor = env.plane_factor(d)
    per_plane = []
    for i in range(d):
        pairs = sorted({s[i] for s in states})
        index = {p: a for a, p in enumerate(pairs)}
        mat = _plane_matrix(pairs, model.b, factor, quad_order, None)
        per_plane.append((index, mat))
    n = len(states)
    out = np.ones((n, n))
    for i, (index, mat) in enumerate(per_plane):
        idx = np.array([index[s[i]] for s in states])
        out *= mat[np.ix_(idx, idx)]
    return out


def _longitudinal_matrix(lon: Longitudinal, env: Optional[Envelope]) -> np.ndarray:
    if env is None or env.kind == "constant":
        return np.eye(lon.n_x)
    if env.kind == "power_decay" and env.param <= 0.5:
        raise IntegrabilityError("longitudinal envelope must be square integrable (m > 1/2)")
    S = lon.sine_basis()
    return S.T @ (env(lon.grid())[:, None] * S)


@dataclass(frozen=True)
class AssembledOperator:
    h0: np.ndarray
    v: np.ndarray
    h: np.ndarray
    model: MagneticModel
    trunc: TruncationSpec
    v_sup_norm: float
    h0_diag: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def potential_factor(self) -> int:
        """Numerical-range box factor: 1 for scalar, 2 for matrix potentials."""
        return 2 if self.model.family.is_pauli else 1


def assemble(
    model: MagneticModel,
    trunc: TruncationSpec,
    pot: PotentialSpec,
    quad_order: int = 32,
) -> AssembledOperator:
    """Build ``h0`` (diagonal), ``v`` and ``h = h0 + v`` in the truncated basis.

    Basis ordering is spin (Pauli families), then transverse state, then
    longitudinal sine mode (Pauli3d).
    """
    if quad_order < 4:
        raise ValueError("quad_order must be at least 4")
    fam = model.family
    want = 2 if fam.is_pauli else 1
    if pot.size != want:
        raise ValueError(f"{fam.value} needs a {want}x{want} potential, got {pot.size}x{pot.size}")
    if fam is Family.PAULI3D and trunc.longitudinal is None:
        raise ValueError("Pauli3d needs a longitudinal box")
    if fam is not Family.PAULI3D and trunc.longitudinal is not None:
        raise ValueError("longitudinal box is only meaningful for Pauli3d")
    for prof in pot.profiles():
        if fam is not Family.PAULI3D and prof.G is not None and prof.G.kind != "constant":
            raise IntegrabilityError("a longitudinal envelope needs the Pauli3d family")
        if model.d > 1 and not prof.F.separable:
            raise IntegrabilityError(
                f"{prof.F.kind} envelope is not separable; d > 1 needs gaussian or constant"
            )

    states = transverse_states(model.d, trunc.n_levels, trunc.m_per_level)
    level_index = [sum(j for j, _ in s) for s in states]
    n_t = len(states)

    # diagonal of h0, integer-indexed
    blocks = []
    for spin in range(want):
        blocks.append(np.array([model.spin_levels(J)[spin] for J in level_index]))
    if fam is Family.PAULI3D:
        lon = trunc.longitudinal
        lap = lon.laplacian_eigenvalues()
        diag = np.concatenate([np.add.outer(blk, lap).ravel() for blk in blocks])
    else:
        diag = np.concatenate(blocks)

    # potential
    cache: dict = {}

    def tmat(env: Envelope) -> np.ndarray:
        if env not in cache:
            cache[env] = _transverse_matrix(states, model, env, quad_order)
        return cache[env]

    n_l = trunc.longitudinal.n_x if fam is Family.PAULI3D else 1
    blk_dim = n_t * n_l
    v = np.zeros((want * blk_dim, want * blk_dim), dtype=complex)
    for a in range(want):
        for c in range(want):
            prof = pot.entries[a][c]
            if prof.amplitude == 0:
                continue
            block = tmat(prof.F)
            if fam is Family.PAULI3D:
                block = np.kron(block, _longitudinal_matrix(trunc.longitudinal, prof.G))
            v[a * blk_dim:(a + 1) * blk_dim, c * blk_dim:(c + 1) * blk_dim] = prof.amplitude * block

    h0 = np.diag(diag.astype(complex))
    return AssembledOperator(
        h0=h0,
        v=v,
        h=h0 + v,
        model=model,
        trunc=trunc,
        v_sup_norm=sup_norm(pot),
        h0_diag=diag,
    )
