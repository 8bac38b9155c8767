"""Möbius distortion checks and the disk-to-rectangle Schwarz-Christoffel map."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import roots_jacobi, roots_legendre

__all__ = [
    "PoleError",
    "CalibrationError",
    "MapAccuracyError",
    "LevelGeometry",
    "phi_mobius",
    "phi_mobius_inverse",
    "distortion_ratio",
    "halfline_distortion_ratio",
    "DistortionProfile",
    "distortion_profile",
    "RectangleDomain",
    "ConformalRectMap",
    "side_length_ratio",
    "sc_calibrate",
    "Comparability",
    "comparability_check",
    "interior_grid",
]


class PoleError(ZeroDivisionError):
    pass


class CalibrationError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3g})")
        self.residual = residual


class MapAccuracyError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# level geometry and the Möbius map


@dataclass(frozen=True)
class LevelGeometry:
    """Equally spaced thresholds ``base + j * gap``, ``j = 0, 1, 2, ...``.

    ``levels`` is a finite prefix kept for display; every query treats the
    sequence as infinite.  Each radius ``r_j`` (distance from a level to the
    others) equals ``gap``.
    """

    base: float
    gap: float
    n_shown: int = 8

    def __post_init__(self):
        if not self.gap > 0:
            raise ValueError("level gap must be positive")

    @classmethod
    def from_model(cls, model, n_shown: int = 8) -> "LevelGeometry":
        return cls(model.level(0), model.level(1) - model.level(0), n_shown)

    @property
    def levels(self) -> list[float]:
        return [self.base + j * self.gap for j in range(self.n_shown)]

    @property
    def radii(self) -> list[float]:
        return [self.gap] * self.n_shown

    def nearest_index(self, lam: complex) -> int:
        j = round((lam.real - self.base) / self.gap)
        return max(0, int(j))

    def dist_levels(self, lam: complex) -> float:
        lam = complex(lam)
        return abs(lam - (self.base + self.nearest_index(lam) * self.gap))

    def dist_halfline(self, lam: complex) -> float:
        lam = complex(lam)
        if lam.real >= self.base:
            return abs(lam.imag)
        return abs(lam - self.base)

    def in_A(self, lam: complex) -> bool:
        """Inside ``A = union of B(Lambda_j, 2 r_j)``."""
        return self.dist_levels(lam) < 2 * self.gap

    def in_D(self, lam: complex) -> bool:
        return not self.in_A(lam)

    # image side -----------------------------------------------------------
    def image_point(self, j: int, mu0: float) -> float:
        return 1.0 / (self.base + j * self.gap - mu0)

    def _image_candidates(self, z: complex, mu0: float) -> list[int]:
        cands = set(range(12))
        if z.real > 0:
            jstar = (1.0 / z.real + mu0 - self.base) / self.gap
            if math.isfinite(jstar) and jstar < 1e15:
                js = int(max(0, round(jstar)))
                cands.update(range(max(0, js - 3), js + 4))
        return sorted(cands)

    def image_dist_levels(self, z: complex, mu0: float) -> float:
        """Distance from ``z`` to the closure of ``{1/(Lambda_j - mu0)}`` (includes 0)."""
        z = complex(z)
        best = abs(z)
        for j in self._image_candidates(z, mu0):
            best = min(best, abs(z - self.image_point(j, mu0)))
        return best

    def image_dist_halfline(self, z: complex, mu0: float) -> float:
        """Distance from ``z`` to the image of ``[Lambda_0, inf)``, the segment ``[0, w_0]``."""
        z = complex(z)
        w0 = self.image_point(0, mu0)
        x = min(max(z.real, 0.0), w0)
        return abs(z - x)

    def image_radius(self, j: int, mu0: float) -> float:
        w = self.image_point
        right = w(j, mu0) - w(j + 1, mu0)
        if j == 0:
            return right
        return min(right, w(j - 1, mu0) - w(j, mu0))

    def in_image_A(self, z: complex, mu0: float) -> bool:
        z = complex(z)
        for j in self._image_candidates(z, mu0):
            if abs(z - self.image_point(j, mu0)) < 2 * self.image_radius(j, mu0):
                return True
        return False


def phi_mobius(lam: complex, mu0: float) -> complex:
    lam = complex(lam)
    if lam == mu0:
        raise PoleError("lambda equals mu0")
    return 1.0 / (lam - mu0)


def phi_mobius_inverse(z: complex, mu0: float) -> complex:
    z = complex(z)
    if z == 0:
        raise PoleError("z = 0 is the image of infinity")
    return mu0 + 1.0 / z


def distortion_ratio(lam: complex, mu0: float, geom: LevelGeometry) -> float:
    """``dist(phi(lam), phi(levels)) (1+|lam|)^2 / dist(lam, levels)``."""
    lam = complex(lam)
    den = geom.dist_levels(lam)
    if den == 0:
        raise ZeroDivisionError("lambda lies on a level")
    z = phi_mobius(lam, mu0)
    return geom.image_dist_levels(z, mu0) * (1 + abs(lam)) ** 2 / den


def halfline_distortion_ratio(lam: complex, mu0: float, geom: LevelGeometry) -> float:
    """The same quotient with the half-line ``J = [Lambda_0, inf)`` in place of the levels."""
    lam = complex(lam)
    den = geom.dist_halfline(lam)
    if den == 0:
        raise ZeroDivisionError("lambda lies on the half-line")
    z = phi_mobius(lam, mu0)
    return geom.image_dist_halfline(z, mu0) * (1 + abs(lam)) ** 2 / den


@dataclass(frozen=True)
class DistortionProfile:
    empirical_inf: float
    argmin: complex
    halfline_inf: float
    halfline_argmin: complex
    inf_in_A: float
    n_samples: int
    n_in_D: int
    sandwich_violations: int
    image_sandwich_checked: int
    image_sandwich_violations: int


def _sample_disk(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(count))
    th = 2 * np.pi * rng.random(count)
    return r * np.exp(1j * th)


def distortion_profile(mu0: float, geom: LevelGeometry, count: int = 10_000,
                       radius: float = 100.0, seed: int = 0, eps: float = 1e-9,
                       n_polish: int = 12) -> DistortionProfile:
    """Empirical infimum of the distortion quotients over a uniform disk sample.

    Samples closer than ``eps`` to a level (or to the half-line, for the
    half-line quotient) are redrawn.  The best ``n_polish`` samples are then
    refined by Nelder-Mead inside the disk, because the infimum is typically
    attained at isolated points that uniform sampling only approaches slowly.
    Also counts violations of the two-sided sandwich on the samples in ``D``
    (and its image-plane analogue on samples whose image lies in the image
    complement set).
    """
    if count < 1000:
        raise ValueError("count must be at least 1000")
    rng = np.random.default_rng(seed)
    pts = _sample_disk(rng, count, radius)
    for _ in range(100):
        bad = np.array([geom.dist_levels(z) < eps or geom.dist_halfline(z) < eps or z == mu0
                        for z in pts])
        if not bad.any():
            break
        pts[bad] = _sample_disk(rng, int(bad.sum()), radius)

    ratio = np.array([distortion_ratio(z, mu0, geom) for z in pts])
    hratio = np.array([halfline_distortion_ratio(z, mu0, geom) for z in pts])

    n_D = viol = img_checked = img_viol = 0
    in_A = np.zeros(len(pts), dtype=bool)
    for i, lam in enumerate(pts):
        if geom.in_A(lam):
            in_A[i] = True
            continue
        n_D += 1
        dl, dj = geom.dist_levels(lam), geom.dist_halfline(lam)
        if not (dl / 2 <= dj <= dl):
            viol += 1
        z = phi_mobius(lam, mu0)
        if not geom.in_image_A(z, mu0):
            img_checked += 1
            zl, zj = geom.image_dist_levels(z, mu0), geom.image_dist_halfline(z, mu0)
            if not (zl / 2 <= zj <= zl):
                img_viol += 1

    def polish(fun, values):
        order = np.argsort(values)[:n_polish]
        best_v, best_z = float(values[order[0]]), complex(pts[order[0]])

        def obj(x):
            z = complex(x[0], x[1])
            if abs(z) > radius:
                return math.inf
            try:
                return fun(z, mu0, geom)
            except ZeroDivisionError:
                return math.inf

        for i in order:
            z0 = pts[i]
            step = max(1e-3, 0.05 * abs(z0))
            simplex = np.array([[z0.real, z0.imag], [z0.real + step, z0.imag],
                                [z0.real, z0.imag + step]])
            res = minimize(obj, [z0.real, z0.imag], method="Nelder-Mead",
                           options={"initial_simplex": simplex, "xatol": 1e-10,
                                    "fatol": 1e-14, "maxiter": 4000})
            if res.fun < best_v:
                best_v, best_z = float(res.fun), complex(res.x[0], res.x[1])
        return best_v, best_z

    inf, arg = polish(distortion_ratio, ratio)
    hinf, harg = polish(halfline_distortion_ratio, hratio)
    inf_A = float(ratio[in_A].min()) if in_A.any() else math.inf
    return DistortionProfile(inf, arg, hinf, harg, inf_A, count, n_D, viol,
                             img_checked, img_viol)


# ---------------------------------------------------------------------------
# rectangles


@dataclass(frozen=True)
class RectangleDomain:
    """Rectangle with vertices ``lam1, lam2, lam3, lam4``.

    ``lam1`` and ``lam4`` lie on the real axis (bottom-left and bottom-right);
    ``lam2`` and ``lam3`` are the top-left and top-right vertices, all in one
    closed half-plane.  ``height`` may exceed ``2 ||V||`` when the rectangle
    was enlarged to leave room for the interior base point (``scaling``).
    """

    left: float
    right: float
    height: float
    contained_level: float
    delta: float
    upper: bool = True
    scaling: float = 1.0

    def __post_init__(self):
        if not (self.right > self.left and self.height > 0):
            raise ValueError("degenerate rectangle")
        if not (self.left < self.contained_level < self.right):
            raise ValueError("the level must lie strictly inside the bottom edge")

    @classmethod
    def around_level(cls, level: float, half_gap: float, delta: float, v_sup: float,
                     upper: bool = True) -> "RectangleDomain":
        """``[level - (half_gap - delta), level + (half_gap - delta)]`` by ``2 ||V||``."""
        if not 0 < delta < half_gap:
            raise ValueError("need 0 < delta < half gap")
        if not v_sup > 0:
            raise ValueError("height 2||V|| must be positive")
        w = half_gap - delta
        return cls(level - w, level + w, 2.0 * v_sup, level, delta, upper)

    def for_base_point(self, v_sup: float) -> "RectangleDomain":
        """Enlarge the height so that the centre ``lam0`` satisfies

        ``min(|Im lam0|, dist(lam0, box)) >= 1 + 2 ||V||`` for the numerical-range
        box ``|Im| <= 2 ||V||``; that needs ``|Im lam0| >= 1 + 4 ||V||``.
        """
        need = 2.0 * (1.0 + 4.0 * v_sup)
        if self.height >= need:
            return self
        return RectangleDomain(self.left, self.right, need, self.contained_level,
                               self.delta, self.upper, need / self.height)

    @property
    def sign(self) -> float:
        return 1.0 if self.upper else -1.0

    @property
    def vertices(self) -> tuple[complex, complex, complex, complex]:
        top = self.sign * self.height
        return (complex(self.left, 0.0), complex(self.left, top),
                complex(self.right, top), complex(self.right, 0.0))

    @property
    def width(self) -> float:
        return self.right - self.left

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.left + self.right), 0.5 * self.sign * self.height)

    def contains(self, lam: complex, tol: float = 0.0) -> bool:
        y = self.sign * lam.imag
        return (self.left - tol <= lam.real <= self.right + tol) and (-tol <= y <= self.height + tol)

    def dist_boundary(self, lam: complex) -> float:
        y = self.sign * lam.imag
        return min(lam.real - self.left, self.right - lam.real, y, self.height - y)

    def dist_bottom(self, lam: complex) -> float:
        x = min(max(lam.real, self.left), self.right)
        return abs(lam - x)


# ---------------------------------------------------------------------------
# Schwarz-Christoffel


_GL32 = roots_legendre(32)
_GJ32 = roots_jacobi(32, -0.5, 0.0)  # weight (1-x)^(-1/2) on [-1, 1]


def _graded_panels(floor: float = 1e-15) -> np.ndarray:
    edges = [0.0]
    s = 0.5
    while s > floor:
        edges.append(1.0 - s)
        s *= 0.5
    edges.append(1.0)
    return np.array(edges)


_PANELS = _graded_panels()


def _graded_rule(order_scale: int = 1):
    """Composite GL nodes/weights on [0, 1] graded geometrically toward 1."""
    x, w = _GL32 if order_scale == 1 else roots_legendre(32 * order_scale)
    a, b = _PANELS[:-1], _PANELS[1:]
    t = (a[:, None] + (b - a)[:, None] * 0.5 * (x + 1.0)).ravel()
    ww = ((b - a)[:, None] * 0.5 * w).ravel()
    return t, ww


_RULE = _graded_rule()


def _lens(y: float, sign: float, rule=None) -> float:
    """``int_0^1 dt / sqrt(t^4 + sign 2 c t^2 + 1)`` with ``c = -tanh(y)`` on the graded rule."""
    t, w = rule or _RULE
    c = -math.tanh(y)
    s2 = 1.0 / math.cosh(y) ** 2
    return float(np.sum(w / np.sqrt((t * t + sign * c) ** 2 + s2)))


def side_length_ratio(y: float, rule=None) -> float:
    """Height/width of the canonical rectangle for prevertex parameter ``y = log tan(alpha)``.

    The canonical map sends ``e^{+-i alpha}`` and ``e^{i(pi +- alpha)}`` to the
    corners; ``c = cos(2 alpha) = -tanh(y)`` and ``1 - c^2 = sech(y)^2`` are
    evaluated without cancellation.
    """
    return _lens(y, 1.0, rule) / _lens(y, -1.0, rule)


def _solve_alpha_param(aspect: float, max_iter: int = 200) -> float:
    """Damped Newton for ``log(H/W)(y) = log(aspect)``, safeguarded by bisection."""
    target = math.log(aspect)
    g = lambda y: math.log(side_length_ratio(y)) - target
    lo, hi = -40.0, 40.0
    y = 0.0
    gy = g(y)
    for _ in range(max_iter):
        if abs(gy) < 1e-14:
            return y
        if gy > 0:
            hi = y
        else:
            lo = y
        h = 1e-6 * (1 + abs(y))
        d = (g(y + h) - g(y - h)) / (2 * h)
        step = -gy / d if d != 0 and math.isfinite(d) else math.inf
        lam = 1.0
        new = y + step
        while lam > 1e-4:
            new = y + lam * step
            if lo < new < hi and abs(g(new)) < abs(gy):
                break
            lam *= 0.5
        else:
            new = 0.5 * (lo + hi)
        if abs(new - y) < 1e-15 * (1 + abs(y)):
            y = new
            break
        y, gy = new, g(new)
    gy = g(y)
    if abs(gy) > 1e-10:
        raise CalibrationError("prevertex Newton did not converge", abs(gy))
    return y


@dataclass(frozen=True)
class ConformalRectMap:
    """Conformal map of the unit disk onto a rectangle with ``phi(0) = lam0``.

    Internally ``phi(z) = c0 + rot * psi(T(z))`` where ``psi`` is the symmetric
    map onto a centred rectangle, ``T`` a disk automorphism and ``rot`` a
    quarter-turn placing the arc through ``z = 1`` on the real bottom edge.
    """

    rect: RectangleDomain
    prevertices: tuple  # z1..z4, preimages of lam1..lam4
    C: complex
    center_image: complex
    alpha: float
    canon_prevertices: np.ndarray = field(repr=False)
    scale: float = field(repr=False, default=1.0)
    rot: complex = field(repr=False, default=1.0)
    w0: complex = field(repr=False, default=0j)
    theta: complex = field(repr=False, default=1.0)
    n_quad: int = 128

    # canonical pieces ------------------------------------------------------
    def _psi(self, u: np.ndarray) -> np.ndarray:
        t, w = _RULE
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        prod = np.ones((len(u), len(t)), dtype=complex)
        tz = u[:, None] * t[None, :]
        for zk in self.canon_prevertices:
            prod *= np.sqrt(1.0 - tz / zk)
        return self.scale * u * ((1.0 / prod) @ w)

    def _dpsi(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        out = np.ones_like(u)
        for zk in self.canon_prevertices:
            out = out / np.sqrt(1.0 - u / zk)
        return self.scale * out

    def _psi_vertex(self, k: int) -> complex:
        """``psi`` at a canonical prevertex by Gauss-Jacobi on graded panels."""
        zk = self.canon_prevertices[k]
        others = [z for i, z in enumerate(self.canon_prevertices) if i != k]
        x, w = _GL32
        xj, wj = _GJ32
        total = 0j
        a_ = _PANELS[:-1]
        b_ = _PANELS[1:]
        for a, b in zip(a_[:-1], b_[:-1]):
            t = a + (b - a) * 0.5 * (x + 1.0)
            f = 1.0 / np.sqrt(1.0 - t)
            for z in others:
                f = f / np.sqrt(1.0 - t * zk / z)
            total += np.sum(w * f) * (b - a) * 0.5
        a, b = a_[-1], b_[-1]
        # int_a^1 (1-t)^(-1/2) g(t) dt with t = a + (1-a)(x+1)/2: (1-t) = (1-a)(1-x)/2
        t = a + (b - a) * 0.5 * (xj + 1.0)
        g = np.ones_like(t, dtype=complex)
        for z in others:
            g = g / np.sqrt(1.0 - t * zk / z)
        total += np.sum(wj * g) * math.sqrt((b - a) * 0.5)
        return self.scale * zk * total

    def _T(self, z):
        z = np.asarray(z, dtype=complex)
        v = self.theta * z
        return (v + self.w0) / (1.0 + np.conj(self.w0) * v)

    def _dT(self, z):
        z = np.asarray(z, dtype=complex)
        v = self.theta * z
        return self.theta * (1 - abs(self.w0) ** 2) / (1.0 + np.conj(self.w0) * v) ** 2

    def _place(self, w):
        c = self.rect.center
        if self.rect.upper:
            return c + self.rot * w
        return np.conj(np.conj(c) + self.rot * w)

    # public ---------------------------------------------------------------
    def forward(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        zz = z if self.rect.upper else np.conj(z)
        return self._place(self._psi(self._T(zz.ravel()))).reshape(z.shape)

    def derivative(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        zz = z if self.rect.upper else np.conj(z)
        d = self.rot * self._dpsi(self._T(zz)) * self._dT(zz)
        return d if self.rect.upper else np.conj(d)

    def vertex_images(self) -> np.ndarray:
        """``phi(z_k)`` evaluated by quadrature at the prevertices."""
        out = []
        for k in range(4):
            out.append(self._place(self._psi_vertex(self._vertex_to_canon[k])))
        return np.array(out)

    @property
    def _vertex_to_canon(self) -> list[int]:
        # canonical order (e^{i a}, e^{i(pi-a)}, e^{i(pi+a)}, e^{-ia}) = corners
        # (top-right, top-left, bottom-left, bottom-right) of psi; after the
        # quarter turn these become (lam4, lam3, lam2, lam1) in the upper case.
        return [3, 2, 1, 0]

    def inverse(self, lam, tol: float = 1e-13, max_iter: int = 80) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        z = self._initial_guess(lam)
        for _ in range(max_iter):
            f = self.forward(z) - lam
            d = self.derivative(z)
            step = f / d
            new = z - step
            # damp steps that leave the disk
            out = np.abs(new) >= 1
            while np.any(out):
                step[out] *= 0.5
                new[out] = z[out] - step[out]
                out = np.abs(new) >= 1
                if np.all(np.abs(step[out]) < 1e-300):
                    break
            z = new
            if np.max(np.abs(step)) < tol:
                break
        return z

    def _initial_guess(self, lam: np.ndarray) -> np.ndarray:
        if not hasattr(self, "_table"):
            r = np.concatenate([np.linspace(0, 0.9, 19), 1 - np.geomspace(0.1, 1e-6, 30)])
            th = np.linspace(0, 2 * np.pi, 257)[:-1]
            zs = (r[:, None] * np.exp(1j * th[None, :])).ravel()
            object.__setattr__(self, "_table", (zs, self.forward(zs)))
        zs, ls = self._table
        idx = np.argmin(np.abs(ls[None, :] - lam[:, None]), axis=1)
        return zs[idx].copy()


def sc_calibrate(rect: RectangleDomain, lam0: Optional[complex] = None,
                 n_quad: int = 128) -> ConformalRectMap:
    """Calibrate the disk-to-rectangle map with ``phi(0) = lam0`` and ``phi(1)`` on the
    bottom edge at the contained level.

    The prevertex problem is solved for the symmetric (centred) map by damped
    Newton on the side-length ratio; a general interior ``lam0`` is reached by
    composing with the disk automorphism that moves ``0`` to its preimage and
    turns the preimage of the contained level to ``1``.
    """
    if n_quad < 128:
        raise ValueError("n_quad must be at least 128")
    height, width = rect.height, rect.width
    if max(height / width, width / height) > 20:
        raise ValueError("aspect ratios above 20 are not supported")
    # psi maps onto a rectangle of horizontal extent `height` and vertical
    # extent `width`; the quarter turn -i maps its right edge to the bottom.
    y = _solve_alpha_param(width / height)
    alpha = math.atan(math.exp(y))
    half_w = _lens(y, -1.0)
    scale = 0.5 * height / half_w
    canon = np.exp(1j * np.array([alpha, math.pi - alpha, math.pi + alpha, -alpha]))
    proto = ConformalRectMap(rect, (), scale, rect.center, alpha, canon, scale, -1j)

    if lam0 is None:
        lam0 = rect.center
    lam0 = complex(lam0)
    if not rect.contains(lam0) or rect.dist_boundary(lam0) <= 0:
        raise ValueError("lam0 must lie strictly inside the rectangle")
    # all geometry below is done for the upper mirror image of the rectangle
    lam0_up = lam0 if rect.upper else lam0.conjugate()
    up = proto if rect.upper else ConformalRectMap(
        RectangleDomain(rect.left, rect.right, rect.height, rect.contained_level,
                        rect.delta, True, rect.scaling), (), scale, rect.center.conjugate(),
        alpha, canon, scale, -1j)
    w0, theta = 0j, 1.0 + 0j
    if abs(lam0_up - up.rect.center) > 1e-14 * (1 + abs(lam0)):
        w0 = complex(up.inverse(lam0_up)[0])
        w1 = _boundary_preimage(up, complex(rect.contained_level, 0.0), alpha)
        theta = (w1 - w0) / (1 - np.conj(w0) * w1)
        theta /= abs(theta)
    # prevertices of phi: T^{-1}(canonical), ordered as preimages of lam1..lam4
    Tinv = lambda u: ((u - w0) / (1 - np.conj(w0) * u)) / theta
    pre = [Tinv(canon[k]) for k in [3, 2, 1, 0]]
    if not rect.upper:
        pre = [np.conj(z) for z in pre]
    m = ConformalRectMap(rect, tuple(complex(z) for z in pre), scale * -1j, lam0, alpha,
                         canon, scale, -1j, w0, theta, n_quad)
    resid = float(np.max(np.abs(m.vertex_images() - np.array(rect.vertices))))
    if resid > 1e-8:
        raise CalibrationError("vertex images miss the rectangle corners", resid)
    return m


def _boundary_preimage(m: ConformalRectMap, target: complex, alpha: float) -> complex:
    """Point on the arc ``(-alpha, alpha)`` of the canonical map sent to ``target``."""
    from scipy.optimize import brentq

    def g(s):
        return float((m.forward(np.array([np.exp(1j * s)])) - target)[0].real)

    s = brentq(g, -alpha + 1e-15, alpha - 1e-15, xtol=1e-15, rtol=1e-15)
    return complex(np.exp(1j * s))


def interior_grid(n: int) -> np.ndarray:
    """``n x n`` polar grid strictly inside the disk: ``r = i/(n+1)``, half-step angles."""
    r = np.arange(1, n + 1) / (n + 1)
    th = 2 * np.pi * (np.arange(n) + 0.5) / n
    return (r[:, None] * np.exp(1j * th[None, :])).ravel()


@dataclass(frozen=True)
class Comparability:
    c1: float
    c2: float
    edge_c1: float
    edge_c2: float
    max_outside: float

    @property
    def spread(self) -> float:
        return self.c2 / self.c1

    @property
    def edge_spread(self) -> float:
        return self.edge_c2 / self.edge_c1


def _arc_distance(z: np.ndarray, za: complex, zb: complex) -> np.ndarray:
    """Distance from points of the disk to the circle arc from ``za`` to ``zb`` through 1."""
    a, b = np.angle(za), np.angle(zb)
    lo, hi = min(a, b), max(a, b)
    ang = np.angle(z)
    on = (ang >= lo) & (ang <= hi)
    radial = np.abs(1.0 - np.abs(z))
    ends = np.minimum(np.abs(z - za), np.abs(z - zb))
    return np.where(on, radial, ends)


def comparability_ratios(m: ConformalRectMap, z: np.ndarray):
    lam = m.forward(z)
    rect = m.rect
    verts = np.array(rect.vertices)
    dB = np.array([rect.dist_boundary(l) for l in lam])
    dF = np.min(np.abs(lam[:, None] - verts[None, :]), axis=1)
    main = dB * dF / (1.0 - np.abs(z))
    z1, z4 = m.prevertices[0], m.prevertices[3]
    dL = np.array([rect.dist_bottom(l) for l in lam])
    dE = np.minimum(np.abs(lam - verts[0]), np.abs(lam - verts[3]))
    edge = dL * dE / _arc_distance(z, z1, z4)
    outside = np.array([max(0.0, -rect.dist_boundary(l)) for l in lam])
    return main, edge, outside


def comparability_check(m: ConformalRectMap, grid_n: int = 32) -> Comparability:
    """Extremes over ``interior_grid(grid_n)`` of

    ``dist(lam, boundary) dist(lam, corners) / dist(z, circle)`` and of the
    bottom-edge variant ``dist(lam, bottom) dist(lam, {lam1, lam4}) / dist(z, arc)``.
    """
    if grid_n < 32:
        raise ValueError("grid_n must be at least 32")
    z = interior_grid(grid_n)
    main, edge, outside = comparability_ratios(m, z)
    worst = float(outside.max())
    if worst > 1e-8:
        raise MapAccuracyError(f"grid point mapped {worst:.3g} outside the rectangle")
    return Comparability(float(main.min()), float(main.max()), float(edge.min()),
                         float(edge.max()), worst)
