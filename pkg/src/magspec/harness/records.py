"""Run records: one JSON object per line, plus a CSV projection of scalar columns."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional

__all__ = ["RunRecord", "write_records", "read_records", "write_csv", "CSV_COLUMNS",
           "records_equal"]


def _enc_spectrum(items) -> list:
    return [[float(complex(v).real), float(complex(v).imag), int(m)] for v, m in items]


def _dec_spectrum(rows) -> list:
    return [(complex(r[0], r[1]), int(r[2])) for r in rows]


@dataclass
class RunRecord:
    index: int
    sweep: dict
    config_hash: str
    status: str = "ok"
    error: Optional[dict] = None
    started: str = ""
    finished: str = ""
    model: dict = field(default_factory=dict)
    dimension: int = 0
    v_sup: float = 0.0
    delta: float = 0.1
    spectrum: list = field(default_factory=list)   # [(complex, multiplicity)]
    discrete: list = field(default_factory=list)   # off the unperturbed values
    lt: list = field(default_factory=list)         # dicts: config fields + sum, K, ratio
    box_ok: Optional[bool] = None
    resolvent: Optional[dict] = None
    det_eig: Optional[dict] = None
    distortion: Optional[dict] = None
    hansmann: Optional[dict] = None

    def to_json(self, timestamps: bool = True) -> str:
        d = asdict(self)
        d["spectrum"] = _enc_spectrum(self.spectrum)
        d["discrete"] = _enc_spectrum(self.discrete)
        if not timestamps:
            d.pop("started")
            d.pop("finished")
        # repr-based float output round-trips every double exactly (17 digits)
        return json.dumps(d, sort_keys=True, separators=(",", ":"), allow_nan=True)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        d = json.loads(line)
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown record fields {sorted(unknown)}")
        d["spectrum"] = _dec_spectrum(d.get("spectrum", []))
        d["discrete"] = _dec_spectrum(d.get("discrete", []))
        return cls(**d)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def scalars(self) -> dict:
        row = {"index": self.index, "status": self.status, "config_hash": self.config_hash,
               "dimension": self.dimension, "v_sup": self.v_sup,
               "n_discrete": sum(m for _, m in self.discrete)}
        for k, v in sorted(self.sweep.items()):
            row[f"sweep:{k}"] = v
        if self.lt:
            first = self.lt[0]
            row.update(lt_variant=first["variant"], lt_sum=first["sum"], lt_K=first["K"],
                       lt_ratio=first["ratio"])
        row["box_ok"] = self.box_ok
        if self.resolvent:
            row["resolvent_constant"] = self.resolvent["constant"]
            row["resolvent_slope"] = self.resolvent["slope"]
        if self.det_eig:
            row["det_eig_max_error"] = self.det_eig["max_error"]
        if self.distortion:
            row["distortion_inf"] = self.distortion["inf"]
        if self.hansmann:
            row["hansmann_ratio"] = self.hansmann["ratio"]
        if self.error:
            row["error"] = f"{self.error['type']}: {self.error['message']}"
        return row


CSV_COLUMNS = ["index", "status", "config_hash", "dimension", "v_sup", "n_discrete",
               "lt_variant", "lt_sum", "lt_K", "lt_ratio", "box_ok", "resolvent_constant",
               "resolvent_slope", "det_eig_max_error", "distortion_inf", "hansmann_ratio",
               "error"]


def write_records(records: Iterable[RunRecord], path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def read_records(path) -> list[RunRecord]:
    out = []
    with open(Path(path), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(RunRecord.from_json(line))
    return out


def write_csv(records: list[RunRecord], path) -> None:
    sweep_cols = sorted({f"sweep:{k}" for r in records for k in r.sweep})
    cols = CSV_COLUMNS[:3] + sweep_cols + CSV_COLUMNS[3:]
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        w.writeheader()
        for r in records:
            w.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v)
                        for k, v in r.scalars().items()})


def _same(a, b) -> bool:
    if isinstance(a, float) and isinstance(b, float):
        return (a == b) or (math.isnan(a) and math.isnan(b))
    if isinstance(a, complex) and isinstance(b, complex):
        return _same(a.real, b.real) and _same(a.imag, b.imag)
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_same(a[k], b[k]) for k in a)
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    return a == b


def records_equal(a: RunRecord, b: RunRecord) -> bool:
    """Field-wise equality treating NaN as equal to NaN."""
    return all(_same(getattr(a, f.name), getattr(b, f.name)) for f in fields(RunRecord))
