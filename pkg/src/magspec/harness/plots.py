"""SVG figures: spectra with level/box/rectangle overlays, and ratio-vs-sweep charts."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from ..landau_model import Family, MagneticModel  # noqa: E402
from ..lt_sums import numerical_range_box  # noqa: E402
from .records import RunRecord  # noqa: E402

__all__ = ["spectrum_figure", "ratio_figure", "level_rectangles", "emit_plots"]

plt.rcParams["svg.hashsalt"] = "magspec"


def _model(rec: RunRecord) -> MagneticModel:
    m = rec.model
    return MagneticModel(Family(m["family"]), float(m["b"]), int(m["d"]))


def level_rectangles(rec: RunRecord, x_max: float) -> list[tuple[float, float, float, float]]:
    """``(left, bottom, width, height)`` of the rectangles around each level up to ``x_max``.

    Each is ``level +- (gap/2 - delta)`` wide and ``2 ||V||`` high, above and below
    the axis.
    """
    model = _model(rec)
    half = 0.5 * model.gap - rec.delta
    h = 2.0 * rec.v_sup
    out = []
    j = 0
    while model.level(j) <= x_max and h > 0 and half > 0:
        lv = model.level(j)
        out.append((lv - half, 0.0, 2 * half, h))
        out.append((lv - half, -h, 2 * half, h))
        j += 1
    return out


def spectrum_figure(rec: RunRecord):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    vals = [v for v, m in rec.spectrum for _ in range(m)]
    model = _model(rec)
    xs = [v.real for v in vals]
    x_hi = max(xs + [model.level(2)]) + 0.5 * model.gap
    x_lo = min(xs + [model.level(0)]) - 0.5 * model.gap
    j = 0
    levels = []
    while model.level(j) <= x_hi:
        levels.append(model.level(j))
        j += 1
    ax.plot(levels, [0.0] * len(levels), linestyle="none", marker="|", markersize=14,
            color="black", label="levels", gid="levels")
    if rec.v_sup > 0:
        re_min, im_max = numerical_range_box(rec.v_sup, model.family)
        ax.add_patch(Rectangle((re_min, -im_max), x_hi - re_min, 2 * im_max, fill=False,
                               linestyle="--", edgecolor="tab:gray", gid="box",
                               label="numerical-range box"))
        for i, (x, y, w, h) in enumerate(level_rectangles(rec, x_hi)):
            ax.add_patch(Rectangle((x, y), w, h, fill=False, edgecolor="tab:orange",
                                   linewidth=0.8, gid=f"rect-{i}"))
    if vals:
        ax.scatter([v.real for v in vals], [v.imag for v in vals], s=12, color="tab:blue",
                   zorder=3, label="eigenvalues", gid="eigenvalues")
    pad = max(0.5, 2.5 * rec.v_sup)
    ax.set_xlim(x_lo, x_hi)
    ax.set_ylim(-pad, pad)
    ax.axhline(0.0, color="black", linewidth=0.5)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(f"point {rec.index}: {rec.model['family']}, dim {rec.dimension}")
    ax.legend(loc="upper right", fontsize=7)
    return fig


def ratio_figure(records: Sequence[RunRecord]):
    fig, ax = plt.subplots(figsize=(6, 4))
    ok = [r for r in records if r.ok and r.lt]
    keys = sorted({k for r in ok for k in r.sweep})
    if len(keys) == 1:
        xs = [float(r.sweep[keys[0]]) for r in ok]
        ax.set_xlabel(keys[0])
        ax.set_xscale("log" if all(x > 0 for x in xs) else "linear")
    else:
        xs = [r.index for r in ok]
        ax.set_xlabel("sweep index")
    ys = [r.lt[0]["ratio"] for r in ok]
    ax.plot(xs, ys, marker="o", gid="ratio")
    if ys and all(y > 0 for y in ys):
        ax.set_yscale("log")
    ax.set_ylabel("sum / K")
    ax.set_title(ok[0].lt[0]["variant"] if ok else "no successful points")
    return fig


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def emit_plots(records: Sequence[RunRecord], out_dir) -> list[Path]:
    if not records:
        raise ValueError("no records to plot")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for rec in records:
        if rec.ok:
            paths.append(_save(spectrum_figure(rec), out / f"spectrum_{rec.index:04d}.svg"))
    paths.append(_save(ratio_figure(records), out / "ratio_vs_sweep.svg"))
    return paths
