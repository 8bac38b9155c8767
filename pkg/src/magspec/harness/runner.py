"""Sweep execution: one record per sweep point, written in sweep order."""

from __future__ import annotations

import logging
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from ..conformal import LevelGeometry, distortion_profile
from ..landau_model import assemble
from ..lt_sums import k_constant, lt_sum, numerical_range_box_check
from ..spectral import (
    default_mu0,
    eigenvalues,
    hansmann_check,
    loglog_slope,
    resolvent_bound_profile,
)
from .checks import det_eig_agreement
from .config import ExperimentConfig
from .records import RunRecord, write_csv

__all__ = ["WORKERS_ENV", "run_point", "run", "worker_count"]

WORKERS_ENV = "MAGSPEC_WORKERS"
log = logging.getLogger(__name__)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _lt_entry(report) -> dict:
    c = report.config
    return {"variant": c.variant.value, "base": c.base.value, "p": c.p, "eps": c.eps,
            "gamma": c.gamma, "tau": c.tau, "d": c.d,
            "sum": report.sum, "K": report.K, "ratio": report.ratio}


def _resolvent_entry(op, p: float, F) -> dict:
    level = op.model.level(1)
    etas = [2.0**-k for k in range(1, 9)]
    path = [complex(level, e) for e in etas]
    prof = resolvent_bound_profile(op, p, path, left_weight=F)
    return {"p": p, "target": level, "constant": prof.empirical_constant,
            "slope": loglog_slope(etas, prof.lhs())}


def run_point(index: int, sweep: dict, cfg: ExperimentConfig) -> RunRecord:
    """Execute one sweep point; any exception becomes an error-tagged record."""
    rec = RunRecord(index=index, sweep=dict(sweep), config_hash=cfg.digest(), started=_now())
    try:
        model, trunc, pot, ltc = cfg.model(), cfg.trunc(), cfg.potential(), cfg.lt()
        checks = cfg.checks
        rec.model = {"family": model.family.value, "b": model.b, "d": model.d}
        rec.delta = float(checks["delta"])
        op = assemble(model, trunc, pot)
        rec.dimension, rec.v_sup = op.dim, float(op.v_sup_norm)
        spec = eigenvalues(op.h)
        rec.spectrum = list(spec.items)
        disc = spec.off(np.unique(op.h0_diag))
        rec.discrete = list(disc.items)
        geom = LevelGeometry.from_model(model)
        K = k_constant(pot, ltc, model.d, op.v_sup_norm)
        rec.lt = [_lt_entry(lt_sum(disc, geom, ltc, K))]
        rec.box_ok = numerical_range_box_check(spec, op.v_sup_norm, model.family)
        if checks["resolvent"]:
            F = next(iter(pot.profiles())).F
            rec.resolvent = _resolvent_entry(op, max(ltc.p, 2.0), F)
        if checks["det_eig"] and np.any(op.v):
            ag = det_eig_agreement(op, spec, float(checks["det_p"]))
            rec.det_eig = {"n_eig": ag.n_eig, "n_det": ag.n_det, "max_error": ag.max_error,
                           "multiplicities_equal": ag.multiplicities_equal, "eta": ag.eta}
        if checks["hansmann"]:
            hr = hansmann_check(op, p=ltc.p)
            rec.hansmann = {"lhs": hr.lhs_sum, "rhs": hr.rhs_norm_p, "ratio": hr.ratio,
                            "mu0": hr.mu0}
        n = int(checks["distortion_samples"])
        if n > 0:
            prof = distortion_profile(default_mu0(op), geom, count=n,
                                      radius=float(checks["distortion_radius"]),
                                      seed=_point_seed(cfg.seed, index))
            rec.distortion = {"inf": prof.empirical_inf, "halfline_inf": prof.halfline_inf,
                              "n_in_D": prof.n_in_D,
                              "sandwich_violations": prof.sandwich_violations}
    except Exception as exc:  # noqa: BLE001 - every failure is recorded, the sweep continues
        log.debug("sweep point %d failed:\n%s", index, traceback.format_exc())
        rec.status = "error"
        rec.error = {"type": type(exc).__name__, "message": str(exc)}
    rec.finished = _now()
    return rec


def _job(args):
    return run_point(*args)


def run(cfg: ExperimentConfig, out_dir: Optional[Path] = None,
        workers: Optional[int] = None) -> list[RunRecord]:
    """Run every sweep point; records are appended in sweep order.

    With ``out_dir`` the records stream to ``outputs.records`` (one JSON line per
    point, flushed as soon as every earlier point has finished) and a CSV
    projection is written at the end.
    """
    jobs = [(i, sweep, pc) for i, (sweep, pc) in enumerate(cfg.points())]
    workers = worker_count() if workers is None else max(1, workers)
    sink = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        sink = open(out_dir / cfg.outputs["records"], "w", encoding="utf-8")
    records: list[Optional[RunRecord]] = [None] * len(jobs)
    next_to_write = 0

    def accept(rec: RunRecord):
        nonlocal next_to_write
        records[rec.index] = rec
        while next_to_write < len(records) and records[next_to_write] is not None:
            if sink is not None:
                sink.write(records[next_to_write].to_json() + "\n")
                sink.flush()
            next_to_write += 1

    try:
        if workers == 1 or len(jobs) <= 1:
            for job in jobs:
                accept(_job(job))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for rec in pool.map(_job, jobs):
                    accept(rec)
    finally:
        if sink is not None:
            sink.close()
    done = [r for r in records if r is not None]
    if out_dir is not None:
        write_csv(done, out_dir / cfg.outputs["csv"])
    return done
