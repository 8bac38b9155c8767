"""Command line: ``magspec run|plot|check|sweep-report``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..conformal import LevelGeometry
from ..landau_model import Family, MagneticModel
from ..lt_sums import LTConfig, lt_sum, numerical_range_box_check
from ..spectral import ComplexSpectrum
from .config import ConfigError, load_config
from .records import RunRecord, read_records

__all__ = ["main", "check_record", "sweep_table"]


def check_record(rec: RunRecord) -> list[str]:
    """Re-validate a stored record; returns the list of failed invariants."""
    if not rec.ok:
        return []
    fails = []
    m = rec.model
    model = MagneticModel(Family(m["family"]), float(m["b"]), int(m["d"]))
    spec = ComplexSpectrum(tuple(rec.spectrum))
    if rec.dimension and spec.dimension != rec.dimension:
        fails.append(f"spectrum has {spec.dimension} eigenvalues, dimension {rec.dimension}")
    if not numerical_range_box_check(spec, rec.v_sup, model.family):
        fails.append("eigenvalue outside the numerical-range box")
    geom = LevelGeometry.from_model(model)
    disc = ComplexSpectrum(tuple(rec.discrete))
    for entry in rec.lt:
        cfg = LTConfig(p=entry["p"], variant=entry["variant"], eps=entry["eps"],
                       gamma=entry["gamma"], tau=entry["tau"], base=entry["base"],
                       d=entry["d"])
        rep = lt_sum(disc, geom, cfg, entry["K"])
        if any(t < 0 for _, _, t in rep.term_table):
            fails.append("negative LT term")
        if not math.isclose(rep.sum, entry["sum"], rel_tol=1e-12, abs_tol=1e-300):
            fails.append(f"LT sum mismatch: stored {entry['sum']!r}, recomputed {rep.sum!r}")
        if not math.isfinite(entry["ratio"]):
            fails.append("non-finite LT ratio")
    if rec.det_eig is not None:
        de = rec.det_eig
        if de["n_eig"] != de["n_det"] or not de["multiplicities_equal"] or de["max_error"] > 1e-6:
            fails.append(f"determinant zeros disagree with eigenvalues: {de}")
    if rec.distortion is not None:
        if rec.distortion["sandwich_violations"]:
            fails.append("distance sandwich violated")
        if not rec.distortion["inf"] > 0:
            fails.append("distortion infimum not positive")
    if rec.hansmann is not None and not math.isfinite(rec.hansmann["ratio"]):
        fails.append("non-finite Hansmann ratio")
    return fails


def sweep_table(records: Sequence[RunRecord]) -> str:
    keys = sorted({k for r in records for k in r.sweep})
    head = keys + ["status", "sum", "K", "sum/K", "resolvent C", "distortion inf",
                   "hansmann"]
    rows = []
    for r in records:
        row = [repr(r.sweep.get(k, "")) for k in keys] + [r.status]
        if r.ok and r.lt:
            lt = r.lt[0]
            row += [f"{lt['sum']:.6g}", f"{lt['K']:.6g}", f"{lt['ratio']:.6g}"]
        else:
            row += ["-", "-", "-"]
        row.append(f"{r.resolvent['constant']:.6g}" if r.resolvent else "-")
        row.append(f"{r.distortion['inf']:.6g}" if r.distortion else "-")
        row.append(f"{r.hansmann['ratio']:.6g}" if r.hansmann else "-")
        if not r.ok:
            row[len(keys)] = f"error ({r.error['type']})"
        rows.append(row)
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(head)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
    ratios = [r.lt[0]["ratio"] for r in records if r.ok and r.lt and r.lt[0]["ratio"] > 0]
    if ratios:
        lines.append(f"sum/K over the sweep: min {min(ratios):.6g}, max {max(ratios):.6g}, "
                     f"max/min {max(ratios) / min(ratios):.4g}")
    return "\n".join(lines)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="magspec", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)
    r = sub.add_parser("run", help="run a configuration (all sweep points)")
    r.add_argument("config", type=Path)
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--out", type=Path, default=Path("."), help="output directory")
    r.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $MAGSPEC_WORKERS or 1)")
    r.add_argument("--plots", action="store_true", help="also emit SVG plots")
    p = sub.add_parser("plot", help="emit SVG plots from a record file")
    p.add_argument("records", type=Path)
    p.add_argument("--out", type=Path, default=Path("plots"))
    c = sub.add_parser("check", help="re-validate invariants of stored records")
    c.add_argument("records", type=Path)
    s = sub.add_parser("sweep-report", help="tabulate empirical constants over a sweep")
    s.add_argument("records", type=Path)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.verb == "run":
        from .runner import run

        try:
            cfg = load_config(args.config)
        except (ConfigError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        records = run(cfg, args.out, args.workers)
        print(sweep_table(records))
        if args.plots:
            from .plots import emit_plots

            emit_plots(records, args.out / cfg.outputs["plots"])
        return 0 if all(r.ok for r in records) else 1
    records = read_records(args.records)
    if args.verb == "plot":
        from .plots import emit_plots

        for path in emit_plots(records, args.out):
            print(path)
        return 0
    if args.verb == "check":
        bad = 0
        for rec in records:
            fails = check_record(rec)
            tag = "skip (error record)" if not rec.ok else ("ok" if not fails else "FAIL")
            print(f"record {rec.index}: {tag}")
            for f in fails:
                print(f"  - {f}")
            bad += bool(fails)
        return 1 if bad else 0
    print(sweep_table(records))
    return 0


if __name__ == "__main__":
    sys.exit(main())
