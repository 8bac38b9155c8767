"""Regularised determinants and argument-principle zero location.

``f(lam) = det_p(I + V (h0 - lam)^{-1})`` vanishes exactly at the eigenvalues of
``h = h0 + v`` that are not eigenvalues of ``h0``, with matching orders.  The
diagonal ``h0`` here is real, and ``f`` has essential singularities on the
real axis for ``p_ceil >= 2``, so contours stay off the real axis.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import roots_legendre

from .landau_model import AssembledOperator
from .spectral import RESOLVENT_MIN_DIST, ResolventSingularityError

__all__ = [
    "det_reg",
    "DetFunction",
    "det_function",
    "Box",
    "Circle",
    "Polyline",
    "ContourError",
    "ZeroSearchError",
    "ZeroSet",
    "winding_number",
    "contour_moments",
    "locate_zeros",
]

PANEL = 16
_GL = roots_legendre(PANEL)


class ContourError(RuntimeError):
    """The argument-principle integral did not settle to an integer."""


class ZeroSearchError(RuntimeError):
    """Subdivision exceeded its depth budget."""


def _correction(mu: np.ndarray, p_ceil: int) -> np.ndarray:
    out = np.zeros_like(mu)
    term = np.ones_like(mu)
    for k in range(1, p_ceil):
        term = term * (-mu)
        out = out + term / k
    return out


def det_reg(A, p_ceil: int) -> complex:
    """``prod_mu (1 + mu) exp(sum_{k<p_ceil} (-mu)^k / k)`` over the eigenvalues of ``A``."""
    if int(p_ceil) != p_ceil or p_ceil < 1:
        raise ValueError("p_ceil must be a positive integer")
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 1.0 + 0j
    mu = np.linalg.eigvals(A)
    return complex(np.prod(1.0 + mu) * np.exp(np.sum(_correction(mu, int(p_ceil)))))


def _trace_inverse(A: np.ndarray, sign: np.ndarray) -> np.ndarray:
    """Batched ``tr(A^{-1})``; infinite where ``A`` is exactly singular."""
    out = np.full(A.shape[0], np.inf, dtype=complex)
    ok = sign != 0
    if np.any(ok):
        try:
            out[ok] = np.trace(np.linalg.inv(A[ok]), axis1=1, axis2=2)
        except np.linalg.LinAlgError:
            for i in np.flatnonzero(ok):
                try:
                    out[i] = np.trace(np.linalg.inv(A[i]))
                except np.linalg.LinAlgError:
                    pass
    return out


@dataclass
class DetFunction:
    """Callable ``lam -> det_{p_ceil}(I + V (h0 - lam)^{-1})`` with an insert-only cache.

    The determinant factors as ``det(I + T) * exp(C)`` with
    ``C = sum_{k<p_ceil} (-1)^k tr(T^k) / k``.  The first factor equals
    ``det(h - lam) / prod_i (h0_ii - lam)``; ``exp(C)`` is zero-free and
    holomorphic away from the real unperturbed values, so it contributes
    nothing to an argument integral over a contour that encloses none of them.
    :meth:`argument_data` therefore returns ``log det(I + T)`` and its exact
    logarithmic derivative ``sum_i 1/(h0_ii - lam) - tr((h - lam)^{-1})``: near
    the real axis ``C`` is huge and would drown the argument integral in
    cancellation.  All derivatives are analytic; none are finite differences.
    """

    op: AssembledOperator
    p_ceil: int
    cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        self._diag = np.diag(self.op.h0).astype(complex)
        self._v = np.asarray(self.op.v, dtype=complex)
        self._h = np.asarray(self.op.h, dtype=complex)
        self._trivial = not np.any(self._v)

    @property
    def poles(self) -> np.ndarray:
        """The distinct unperturbed values; contours must avoid them."""
        return np.unique(self._diag.real)

    def _compute(self, lams: np.ndarray) -> np.ndarray:
        """Rows ``(log f, log det(I+T), d/dlam log det(I+T), f'/f)``."""
        gaps = np.min(np.abs(self._diag[None, :] - lams[:, None]), axis=1)
        if np.any(gaps <= RESOLVENT_MIN_DIST):
            raise ResolventSingularityError(float(np.min(gaps)))
        out = np.zeros((len(lams), 4), dtype=complex)
        if self._trivial:
            return out
        n = self._h.shape[0]
        eye = np.eye(n)
        chunk = max(1, 4096 // max(1, n))
        for s in range(0, len(lams), chunk):
            part = lams[s:s + chunk]
            r = 1.0 / (self._diag[None, :] - part[:, None])
            A = self._h[None] - part[:, None, None] * eye[None]
            sign, logabs = np.linalg.slogdet(A)
            with np.errstate(divide="ignore"):
                log1 = logabs + np.log(sign) + np.sum(np.log(r), axis=1)
            g1 = np.sum(r, axis=1) - _trace_inverse(A, sign)
            T = self._v[None, :, :] * r[:, None, :]
            dT = T * r[:, None, :]
            corr = np.zeros(len(part), dtype=complex)
            dcorr = np.zeros(len(part), dtype=complex)
            power = None  # T^(k-1)
            for k in range(1, self.p_ceil):
                dterm = dT if power is None else power @ dT
                dcorr += (-1) ** k * np.trace(dterm, axis1=1, axis2=2)
                power = T if power is None else power @ T
                corr += (-1) ** k * np.trace(power, axis1=1, axis2=2) / k
            out[s:s + chunk] = np.stack([log1 + corr, log1, g1, g1 + dcorr], axis=1)
        return out

    def _rows(self, lams) -> np.ndarray:
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        out = np.empty((len(lams), 4), dtype=complex)
        missing = []
        with self._lock:
            for i, z in enumerate(lams):
                hit = self.cache.get(complex(z))
                if hit is None:
                    missing.append(i)
                else:
                    out[i] = hit
        if missing:
            fresh = self._compute(lams[missing])
            out[missing] = fresh
            with self._lock:
                for i, row in zip(missing, fresh):
                    self.cache.setdefault(complex(lams[i]), row)
        return out

    def values(self, lams) -> np.ndarray:
        return np.exp(self.log_values(lams))

    def log_values(self, lams) -> np.ndarray:
        """A branch of ``log f`` (imaginary part defined modulo 2 pi)."""
        return self._rows(lams)[:, 0]

    def __call__(self, lam: complex) -> complex:
        return complex(self.values([lam])[0])

    def derivative(self, lams) -> np.ndarray:
        logf, g = self.log_derivative(lams)
        return np.exp(logf) * g

    def log_derivative(self, lams) -> tuple[np.ndarray, np.ndarray]:
        """``(log f, f'/f)`` at the given points."""
        rows = self._rows(lams)
        return rows[:, 0], rows[:, 3]

    def argument_data(self, lams) -> tuple[np.ndarray, np.ndarray]:
        """``(log g, g'/g)`` for the factor ``g = det(I + T)`` that carries every zero."""
        rows = self._rows(lams)
        return rows[:, 1], rows[:, 2]


def det_function(op: AssembledOperator, p: float) -> DetFunction:
    if not p >= 1:
        raise ValueError("p must be >= 1")
    return DetFunction(op, int(math.ceil(p - 1e-12)))


# ---------------------------------------------------------------------------
# contours
#
# Every contour is a map t -> z(t) on [0, 1] with derivative z'(t); the
# argument integral is computed with adaptively bisected Gauss-Legendre panels.


@dataclass(frozen=True)
class Polyline:
    """Closed polygon, vertices in positive (counter-clockwise) order."""

    vertices: tuple

    def _edges(self):
        verts = np.asarray(self.vertices, dtype=complex)
        edges = np.roll(verts, -1) - verts
        cum = np.concatenate([[0.0], np.cumsum(np.abs(edges))])
        return verts, edges, cum / cum[-1]

    def breakpoints(self) -> np.ndarray:
        return self._edges()[2]

    def param(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        verts, edges, knots = self._edges()
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, len(verts) - 1)
        span = knots[i + 1] - knots[i]
        u = (t - knots[i]) / span
        return verts[i] + u * edges[i], edges[i] / span

    def distance(self, z: complex) -> float:
        verts = np.asarray(self.vertices, dtype=complex)
        best = math.inf
        for a, b in zip(verts, np.roll(verts, -1)):
            e = b - a
            t = np.clip(((z - a) * np.conj(e)).real / abs(e) ** 2, 0.0, 1.0)
            best = min(best, abs(z - (a + t * e)))
        return best


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]``."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("empty box")

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    @property
    def size(self) -> float:
        return max(self.x1 - self.x0, self.y1 - self.y0)

    def contour(self) -> Polyline:
        return Polyline((complex(self.x0, self.y0), complex(self.x1, self.y0),
                         complex(self.x1, self.y1), complex(self.x0, self.y1)))

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return (self.x0 - margin <= z.real <= self.x1 + margin
                and self.y0 - margin <= z.imag <= self.y1 + margin)

    def split(self, fx: float = 0.5, fy: float = 0.5) -> list["Box"]:
        xm = self.x0 + fx * (self.x1 - self.x0)
        ym = self.y0 + fy * (self.y1 - self.y0)
        return [Box(self.x0, xm, self.y0, ym), Box(xm, self.x1, self.y0, ym),
                Box(self.x0, xm, ym, self.y1), Box(xm, self.x1, ym, self.y1)]


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float

    def breakpoints(self) -> np.ndarray:
        return np.array([0.0, 1.0])

    def param(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        e = np.exp(2j * np.pi * np.asarray(t, dtype=float))
        return self.center + self.radius * e, 2j * np.pi * self.radius * e

    def distance(self, z: complex) -> float:
        return abs(abs(z - self.center) - self.radius)


def _as_contour(contour):
    if isinstance(contour, Box):
        return contour.contour()
    if isinstance(contour, (Polyline, Circle)):
        return contour
    return Polyline(tuple(complex(z) for z in contour))


def _initial_panels(c, n_quad: int) -> list[tuple[float, float]]:
    knots = c.breakpoints()
    per = max(1, n_quad // PANEL)
    out = []
    for a, b in zip(knots[:-1], knots[1:]):
        k = max(1, int(round(per * (b - a))))
        edges = np.linspace(a, b, k + 1)
        out.extend(zip(edges[:-1], edges[1:]))
    return out


def _argument_data(func, z):
    """``(log f, f'/f)`` up to a zero-free holomorphic factor (see DetFunction)."""
    get = getattr(func, "argument_data", None)
    return get(z) if get is not None else func.log_derivative(z)


def _adaptive_moments(func, c, n_quad, kmax, center, scale, seg_tol):
    """Adaptive composite GL for ``(1/2 pi i) int zeta^k f'/f dz``; returns moments and log f samples."""
    x, w = _GL
    ks = np.arange(kmax + 1)

    def panel(a, b):
        t = a[:, None] + (b - a)[:, None] * 0.5 * (x + 1.0)
        z, dz = c.param(t.ravel())
        f, g = _argument_data(func, z)
        zeta = (z - center) / scale
        ww = (np.tile(w, len(a)) * 0.5 * np.repeat(b - a, PANEL)) * dz * g / (2j * np.pi)
        contrib = ww[:, None] * zeta[:, None] ** ks[None, :]
        return contrib.reshape(len(a), PANEL, kmax + 1).sum(axis=1), t.ravel(), f, g * dz

    init = np.array(_initial_panels(c, n_quad))
    a, b = init[:, 0], init[:, 1]
    min_width = 1e-9 * (b[-1] - a[0])
    whole = panel(a, b)[0]
    total = np.zeros(kmax + 1, dtype=complex)
    ts, fs, gs = [], [], []
    bad = False
    rounds = 0
    while len(a):
        rounds += 1
        m = 0.5 * (a + b)
        left, tl, fl, gl = panel(a, m)
        right, tr, fr, gr = panel(m, b)
        halves = left + right
        err = np.max(np.abs(halves - whole), axis=1)
        ok = err <= seg_tol
        if np.any(((b - a) < min_width) & ~ok):
            raise ContourError("contour passes too close to a zero to resolve the argument")
        if not np.all(np.isfinite(halves)):
            bad = True
            ok = ok | ~np.all(np.isfinite(halves), axis=1)
        total += halves[ok].sum(axis=0)
        tl = tl.reshape(len(a), PANEL)
        tr = tr.reshape(len(a), PANEL)
        fl = fl.reshape(len(a), PANEL)
        fr = fr.reshape(len(a), PANEL)
        gl = gl.reshape(len(a), PANEL)
        gr = gr.reshape(len(a), PANEL)
        ts.append(np.concatenate([tl[ok], tr[ok]], axis=1).ravel())
        fs.append(np.concatenate([fl[ok], fr[ok]], axis=1).ravel())
        gs.append(np.concatenate([gl[ok], gr[ok]], axis=1).ravel())
        keep = ~ok
        a = np.concatenate([a[keep], m[keep]])
        b = np.concatenate([m[keep], b[keep]])
        whole = np.concatenate([left[keep], right[keep]])
        if rounds > 60:
            bad = True
            break
    t_all = np.concatenate(ts)
    order = np.argsort(t_all, kind="stable")
    return total, (t_all[order], np.concatenate(fs)[order], np.concatenate(gs)[order]), bad


def _phase_winding(samples) -> float:
    """Net change of arg f along the sampled contour, divided by 2 pi.

    Consecutive phase differences are taken from the sampled values of ``f``;
    the ``2 pi`` branch of each difference is the one closest to the
    trapezoidal estimate of ``Im int f'/f dz`` over that gap.
    """
    t, logf, gdz = samples
    t = np.append(t, t[0] + 1.0)
    ph = np.append(logf.imag, logf[0].imag)
    gdz = np.append(gdz, gdz[0])
    raw = np.angle(np.exp(1j * np.diff(ph)))
    est = (0.5 * (gdz[1:] + gdz[:-1]) * np.diff(t)).imag
    fixed = raw + 2 * np.pi * np.round((est - raw) / (2 * np.pi))
    return float(np.sum(fixed) / (2 * np.pi))


def contour_moments(func, contour, n_quad: int = 64, kmax: int = 0,
                    center: complex = 0.0, scale: float = 1.0,
                    max_refine: int = 16) -> tuple[int, np.ndarray]:
    """Winding number and normalised moments ``(1/2 pi i) oint ((z-c)/s)^k f'/f dz``.

    ``func`` is a DetFunction or any object exposing ``log_derivative``.  The
    integral uses adaptively bisected Gauss-Legendre panels starting from
    ``n_quad`` nodes; it is accepted when the zeroth moment is within 0.05 of an
    integer that also matches the phase-unwrapping count.  Otherwise the panel
    tolerance is tightened and the starting node count doubled, up to
    ``max_refine`` times the initial count.
    """
    if n_quad < 64:
        raise ValueError("n_quad must be at least 64")
    c = _as_contour(contour)
    n, seg_tol = n_quad, 1e-6
    last = math.nan
    while n <= n_quad * max_refine:
        mom, f, bad = _adaptive_moments(func, c, n, kmax, center, scale, seg_tol)
        if not bad and np.all(np.isfinite(mom)) and np.all(np.isfinite(f[1])):
            k = int(round(mom[0].real))
            last = abs(mom[0] - k)
            if last < 0.05 and abs(_phase_winding(f) - k) < 0.05:
                return k, mom
        n *= 2
        seg_tol *= 0.01
    raise ContourError(f"argument integral did not settle (residual {last})")


def winding_number(func, contour, n_quad: int = 64) -> int:
    return contour_moments(func, contour, n_quad)[0]


class _Analytic:
    """Adapter giving plain callables ``(f, df)`` the log_derivative interface."""

    def __init__(self, f, df=None):
        self.f, self.df = f, df

    def values(self, z):
        return np.asarray(self.f(np.asarray(z)), dtype=complex)

    def log_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        f = self.values(z)
        if self.df is not None:
            d = np.asarray(self.df(z), dtype=complex)
        else:
            h = 1e-6 * (1 + np.abs(z))
            d = (self.values(z + h) - self.values(z - h)) / (2 * h)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(f), d / f

    def derivative(self, z):
        return self.log_derivative(z)[1] * self.values(z)


def as_holomorphic(f, df=None):
    """Wrap a vectorised callable for use with the contour routines."""
    return _Analytic(f, df)


# ---------------------------------------------------------------------------
# zero location


@dataclass(frozen=True)
class ZeroSet:
    zeros: tuple[tuple[complex, int], ...]
    region: object
    residual: float

    @property
    def count(self) -> int:
        return sum(m for _, m in self.zeros)

    def values(self) -> np.ndarray:
        return np.array([z for z, m in self.zeros for _ in range(m)], dtype=complex)


def _newton(func, z0: complex, mult: int = 1, iters: int = 60) -> complex:
    z = complex(z0)
    for _ in range(iters):
        logf, g = _argument_data(func, [z])
        if not np.isfinite(logf[0]) or not np.isfinite(g[0]) or g[0] == 0:
            return z
        step = mult / g[0]
        z -= step
        if abs(step) <= 1e-14 * (1 + abs(z)):
            break
    return z


def _power_sums_to_roots(s: np.ndarray) -> np.ndarray:
    """Roots from power sums ``s[1..N]`` via Newton's identities."""
    N = len(s) - 1
    e = np.zeros(N + 1, dtype=complex)
    e[0] = 1.0
    for k in range(1, N + 1):
        acc = 0j
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * s[i]
        e[k] = acc / k
    coeffs = np.array([(-1) ** k * e[k] for k in range(N + 1)])
    return np.roots(coeffs)


def locate_zeros(func, region: Box, tol: float = 1e-8, n_quad: int = 64,
                 max_cluster: int = 3, max_depth: int = 40) -> ZeroSet:
    """All zeros of ``func`` inside ``region`` with multiplicities.

    Cells are quadrisected on their winding numbers; once a cell holds at most
    ``max_cluster`` zeros they are recovered from contour moments (Newton's
    identities), polished by Newton's method and merged when closer than
    ``tol``.  Cells smaller than ``tol`` are resolved directly the same way.
    """
    if isinstance(region, (tuple, list)):
        region = Box(*region)
    if getattr(func, "_trivial", False):
        return ZeroSet((), region, 0.0)
    poles = getattr(func, "poles", None)
    if poles is not None and region.y0 <= 0.0 <= region.y1 and np.any(
            (poles >= region.x0) & (poles <= region.x1)):
        raise ValueError("region contains an unperturbed value, where the determinant "
                         "has an essential singularity")
    found: list[tuple[complex, int]] = []
    stack = [(region, 0, None)]
    shifts = (0.5, 0.4871, 0.5317, 0.4419, 0.5683)
    while stack:
        cell, depth, known = stack.pop()
        if depth > max_depth:
            raise ZeroSearchError(f"subdivision depth exceeded {max_depth}")
        c, s = cell.center, 0.5 * cell.size
        if known is None:
            total, mom = contour_moments(func, cell, n_quad, kmax=max_cluster, center=c, scale=s)
        else:
            total, mom = known
        if total == 0:
            continue
        if total <= max_cluster or cell.size < tol:
            roots = _roots_in_cell(func, cell, total, n_quad, c, s, mom)
            if roots is not None:
                found.extend(roots)
                continue
        children = None
        for fx in shifts:
            try:
                kids = cell.split(fx, fx)
                counts = [contour_moments(func, k, n_quad, kmax=max_cluster, center=k.center,
                                          scale=0.5 * k.size) for k in kids]
            except ContourError:
                continue
            if sum(cnt for cnt, _ in counts) == total:
                children = list(zip(kids, counts))
                break
        if children is None:
            raise ContourError("could not split a cell without crossing a zero")
        for kid, known_kid in children:
            if known_kid[0]:
                stack.append((kid, depth + 1, known_kid))
    found = _merge(func, found, tol)
    resid = max((abs(func.values([z])[0]) for z, _ in found), default=0.0)
    return ZeroSet(tuple(sorted(found, key=lambda t: (t[0].real, t[0].imag))), region, float(resid))


def _roots_in_cell(func, cell: Box, total: int, n_quad: int, c: complex, s: float,
                   mom: np.ndarray):
    if total > len(mom) - 1:
        _, mom = contour_moments(func, cell, n_quad, kmax=total, center=c, scale=s)
    guesses = c + s * _power_sums_to_roots(mom[:total + 1])
    # group guesses that sit on top of each other (multiple zeros)
    groups: list[list[complex]] = []
    for g in guesses:
        for grp in groups:
            if abs(grp[0] - g) < 1e-4 * s:
                grp.append(g)
                break
        else:
            groups.append([g])
    out = []
    margin = 1e-9 * (1 + abs(c))
    for grp in groups:
        m = len(grp)
        z = _newton(func, complex(np.mean(grp)), m)
        if not cell.contains(z, margin):
            return None
        out.append((z, m))
    # separate guesses of one multiple zero polish onto the same point
    fused: list[tuple[complex, int]] = []
    for z, m in out:
        for i, (w, k) in enumerate(fused):
            if abs(z - w) < 1e-6 * s:
                fused[i] = (_newton(func, (w * k + z * m) / (k + m), k + m), k + m)
                break
        else:
            fused.append((z, m))
    out = fused
    for i, (z, m) in enumerate(out):
        others = [abs(z - w) for j, (w, _) in enumerate(out) if j != i]
        if others and min(others) < 1e-6 * s:
            return None
        if m > 1:
            rho = min([1e-3 * s] + [0.25 * o for o in others])
            try:
                if contour_moments(func, Circle(z, rho), n_quad)[0] != m:
                    return None
            except ContourError:
                return None
    return out


def _merge(func, found: list[tuple[complex, int]], tol: float) -> list[tuple[complex, int]]:
    merged: list[list] = []
    for z, m in found:
        for item in merged:
            if abs(item[0] - z) <= tol:
                tot = item[1] + m
                item[0] = (item[0] * item[1] + z * m) / tot
                item[1] = tot
                item[2] = True
                break
        else:
            merged.append([z, m, False])
    out = []
    for z, m, touched in merged:
        if touched:
            z = _newton(func, z, m)
        out.append((complex(z), int(m)))
    return out
