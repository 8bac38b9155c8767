"""Experiment configuration: TOML schema, validation and sweep expansion.

Schema (every key optional unless noted; unknown keys are errors)::

    seed = 0

    [model]
    family = "Schrodinger2d"   # Schrodinger2d | Pauli2d | Pauli2dGeneral | Pauli3d
    b = 1.0
    d = 1

    [truncation]
    n_levels = 3
    m_per_level = 6
    box_half_length = 4.0      # Pauli3d only: Dirichlet box [-L, L]
    n_x = 4                    # Pauli3d only: interior grid points

    [potential]
    amplitude = [0.3, 0.2]     # scalar potential: [re, im] or a real number
    # amplitudes = [[a11, a12], [a21, a22]]  for matrix potentials, entries as above
    scale = 1.0                # multiplies every amplitude
    F = { kind = "gaussian", param = 1.5 }
    G = { kind = "gaussian", param = 2.0 }   # Pauli3d only

    [lt]
    p = 2.0
    variant = "Schrodinger_estc"
    eps = 0.1
    # gamma, tau, base (tail variant)

    [checks]
    det_eig = true
    det_p = 2.5
    resolvent = true
    distortion_samples = 10000
    distortion_radius = 100.0
    hansmann = true
    delta = 0.1

    [sweep]
    "potential.scale" = [0.1, 0.2, 0.4, 0.8]

    [outputs]
    records = "records.jsonl"
    csv = "records.csv"
    plots = "plots"
"""

from __future__ import annotations

import copy
import hashlib
import itertools
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..landau_model import (
    Envelope,
    Family,
    Longitudinal,
    MagneticModel,
    PotentialSpec,
    TruncationSpec,
)
from ..lt_sums import LTConfig, Variant

__all__ = ["ConfigError", "ExperimentConfig", "DEFAULTS", "load_config", "parse_complex"]


class ConfigError(ValueError):
    pass


_REQUIRED = object()

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "model": {"family": "Schrodinger2d", "b": 1.0, "d": 1},
    "truncation": {"n_levels": 3, "m_per_level": 6, "box_half_length": 4.0, "n_x": 4},
    "potential": {"amplitude": None, "amplitudes": None, "scale": 1.0,
                  "F": {"kind": "gaussian", "param": 1.5}, "G": None},
    "lt": {"p": 2.0, "variant": None, "eps": 0.1, "gamma": None, "tau": None,
           "base": "Abstract_esta"},
    "checks": {"det_eig": True, "det_p": 2.5, "resolvent": True,
               "distortion_samples": 10000, "distortion_radius": 100.0,
               "hansmann": True, "delta": 0.1},
    "sweep": {},
    "outputs": {"records": "records.jsonl", "csv": "records.csv", "plots": "plots"},
}

_FREEFORM = {"sweep"}
_DICT_VALUED = {("potential", "F"), ("potential", "G")}


def parse_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"complex numbers are [re, im] pairs, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"expected a number or [re, im], got {x!r}")
    return complex(float(x))


def _merge(defaults: dict, given: dict, path: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        full = f"{path}{key}"
        if key not in defaults:
            raise ConfigError(f"unknown key {full!r}")
        sect = path.rstrip(".")
        if isinstance(defaults[key], dict) and key not in _FREEFORM and (sect, key) not in _DICT_VALUED:
            if not isinstance(val, dict):
                raise ConfigError(f"{full!r} must be a table")
            out[key] = _merge(defaults[key], val, full + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def _get_path(tree: dict, path: str):
    node = tree
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"sweep path {path!r} does not name a config field")
        node = node[part]
    return node


def _set_path(tree: dict, path: str, value) -> None:
    parts = path.split(".")
    _get_path(tree, path)
    node = tree
    for part in parts[:-1]:
        node = node[part]
    node[parts[-1]] = value


def _envelope(spec) -> Optional[Envelope]:
    if spec is None:
        return None
    if not isinstance(spec, dict) or set(spec) - {"kind", "param"} or "kind" not in spec:
        raise ConfigError(f"envelopes are {{kind, param}} tables, got {spec!r}")
    return Envelope(spec["kind"], float(spec.get("param", 1.0)))


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated configuration tree (one sweep point after :meth:`points`)."""

    tree: dict

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        cfg = cls(_merge(DEFAULTS, raw))
        for path in cfg.tree["sweep"]:
            _get_path(cfg.tree, path)
            vals = cfg.tree["sweep"][path]
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"sweep values for {path!r} must be a non-empty list")
        cfg.model()
        cfg.trunc()
        cfg.potential()
        cfg.lt()
        return cfg

    # builders --------------------------------------------------------------
    def model(self) -> MagneticModel:
        m = self.tree["model"]
        try:
            return MagneticModel(Family(m["family"]), float(m["b"]), int(m["d"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def trunc(self) -> TruncationSpec:
        t = self.tree["truncation"]
        lon = None
        if self.model().family is Family.PAULI3D:
            lon = Longitudinal(float(t["box_half_length"]), int(t["n_x"]))
        return TruncationSpec(int(t["n_levels"]), int(t["m_per_level"]), lon)

    def potential(self) -> PotentialSpec:
        p = self.tree["potential"]
        F = _envelope(p["F"]) or Envelope("constant")
        G = _envelope(p["G"])
        scale = float(p["scale"])
        if self.model().family.is_pauli:
            amps = p["amplitudes"]
            if amps is None:
                if p["amplitude"] is None:
                    raise ConfigError("matrix potentials need potential.amplitudes")
                a = p["amplitude"]
                amps = [[a, 0], [0, a]]
            try:
                mat = [[scale * parse_complex(x) for x in row] for row in amps]
            except TypeError as exc:
                raise ConfigError("potential.amplitudes must be a 2x2 array") from exc
            if len(mat) != 2 or any(len(r) != 2 for r in mat):
                raise ConfigError("potential.amplitudes must be a 2x2 array")
            return PotentialSpec.matrix(mat, F, G)
        if p["amplitudes"] is not None:
            raise ConfigError("scalar potentials take potential.amplitude")
        if p["amplitude"] is None:
            raise ConfigError("potential.amplitude is required")
        if G is not None:
            raise ConfigError("G envelopes only apply to the Pauli3d family")
        return PotentialSpec.scalar(scale * parse_complex(p["amplitude"]), F)

    def lt(self) -> LTConfig:
        lt = self.tree["lt"]
        variant = lt["variant"]
        if variant is None:
            variant = {
                Family.SCHRODINGER2D: Variant.SCHRODINGER,
                Family.PAULI2D: Variant.PAULI2D,
                Family.PAULI2D_GENERAL: Variant.PAULI2D,
                Family.PAULI3D: Variant.PAULI3D,
            }[self.model().family]
        try:
            return LTConfig(
                p=float(lt["p"]), variant=Variant(variant), eps=float(lt["eps"]),
                gamma=None if lt["gamma"] is None else float(lt["gamma"]),
                tau=None if lt["tau"] is None else float(lt["tau"]),
                base=Variant(lt["base"]), d=self.model().d,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def checks(self) -> dict:
        return self.tree["checks"]

    @property
    def seed(self) -> int:
        return int(self.tree["seed"])

    @property
    def outputs(self) -> dict:
        return self.tree["outputs"]

    # sweeps -----------------------------------------------------------------
    def with_seed(self, seed: int) -> "ExperimentConfig":
        tree = copy.deepcopy(self.tree)
        tree["seed"] = int(seed)
        return ExperimentConfig(tree)

    def points(self) -> list[tuple[dict, "ExperimentConfig"]]:
        """Cartesian product of the sweep lists, in declaration order."""
        sweep = self.tree["sweep"]
        paths = list(sweep)
        out = []
        for combo in itertools.product(*(sweep[p] for p in paths)):
            tree = copy.deepcopy(self.tree)
            tree["sweep"] = {}
            for path, val in zip(paths, combo):
                _set_path(tree, path, val)
            out.append((dict(zip(paths, combo)), ExperimentConfig(tree)))
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.tree, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def load_config(path) -> ExperimentConfig:
    with open(Path(path), "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return ExperimentConfig.from_dict(raw)
