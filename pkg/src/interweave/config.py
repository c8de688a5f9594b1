"""JSON run configuration shared by all CLI subcommands.

A document looks like::

    {
      "schema_version": 1,
      "seed": 0,
      "fading": "rayleigh_unit",
      "scenario": {"p": 0.5, "pu_snr_db": 0, "rs_db": 0, "noise_var": 1},
      "sweep": {"p": "0:0.1:0.9", "rs_db": [0, 10, 20, 30], "gamma": [0.8, 1]},
      "cases": [{"p_fa": 0.1, "p_md": 0.2}],
      "gamma": 0.8,
      "grid_resolution": 101,
      "detectors": [{"kind": "energy", "l_segments": 4, "m_per_segment": 64, "snr_db": -24}],
      "roc_points": 200,
      "simulation": {"n_slots": 1000000, "p_fa": 0.1, "p_md": 0.2},
      "output": {"dir": "out"}
    }

Only the blocks a subcommand needs have to be present. The scenario takes
either absolute powers (``power_pu``, ``power_cr``) or decibel values
(``pu_snr_db``, ``rs_db``).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .channel import Fading, SystemParams
from .detectors import DEFAULT_ROC_POINTS, DetectorKind, DetectorParams
from .ratemodel import DetectionErrorPair
from .specfun import DomainError

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed or incomplete configuration; maps to exit code 1."""


def parse_sweep(spec) -> list[float]:
    """Expand a sweep axis into its grid points.

    Accepts a number, a list of numbers, or ``"start:step:stop"`` with both
    endpoints included. Points are ``start + i*step`` computed in exact
    rational arithmetic, so no rounding accumulates along the grid.
    """
    if isinstance(spec, bool):
        raise ConfigError(f"bad sweep value {spec!r}")
    if isinstance(spec, (int, float)):
        return [float(spec)]
    if isinstance(spec, (list, tuple)):
        if not spec:
            raise ConfigError("sweep list is empty")
        out = []
        for v in spec:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"sweep list entries must be numbers, got {v!r}")
            out.append(float(v))
        return out
    if not isinstance(spec, str):
        raise ConfigError(f"bad sweep value {spec!r}")
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"sweep {spec!r} is not start:step:stop")
    try:
        start, step, stop = (Fraction(s.strip()) for s in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"sweep {spec!r}: {exc}") from None
    if step <= 0:
        raise ConfigError(f"sweep {spec!r}: step must be positive")
    if stop < start:
        raise ConfigError(f"sweep {spec!r}: stop is below start")
    count = math.floor((stop - start) / step) + 1
    return [float(start + i * step) for i in range(count)]


def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ConfigError(f"missing field '{where}.{key}'")
    return block[key]


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{name}' must be a number, got {value!r}")
    return float(value)


def _integer(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{name}' must be an integer, got {value!r}")
    return value


def _check_keys(block, allowed, where: str) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"'{where}' must be an object")
    extra = sorted(set(block) - set(allowed))
    if extra:
        raise ConfigError(f"unknown field(s) in '{where}': {', '.join(extra)}")


@dataclass(frozen=True)
class Scenario:
    p: Optional[float] = None
    power_pu: Optional[float] = None
    power_cr: Optional[float] = None
    pu_snr_db: Optional[float] = None
    rs_db: Optional[float] = None
    noise_var: float = 1.0

    KEYS = ("p", "power_pu", "power_cr", "pu_snr_db", "rs_db", "noise_var")

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        _check_keys(d, cls.KEYS, "scenario")
        vals = {k: _number(d[k], f"scenario.{k}") for k in cls.KEYS if k in d}
        sc = cls(**vals)
        if sc.power_pu is not None and sc.pu_snr_db is not None:
            raise ConfigError("scenario: give power_pu or pu_snr_db, not both")
        if sc.power_cr is not None and sc.rs_db is not None:
            raise ConfigError("scenario: give power_cr or rs_db, not both")
        if not sc.noise_var > 0:
            raise ConfigError("scenario.noise_var must be positive")
        return sc

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.KEYS if getattr(self, k) is not None}

    def params(self, p: Optional[float] = None, rs_db: Optional[float] = None) -> SystemParams:
        """Resolve to :class:`SystemParams`; sweep values override ``p`` and ``rs_db``."""
        p = self.p if p is None else p
        if p is None:
            raise ConfigError("missing field 'scenario.p'")
        if self.power_pu is not None:
            power_pu = self.power_pu
        elif self.pu_snr_db is not None:
            power_pu = self.noise_var * 10.0 ** (self.pu_snr_db / 10.0)
        else:
            raise ConfigError("missing field 'scenario.power_pu' (or 'scenario.pu_snr_db')")
        if rs_db is None:
            rs_db = self.rs_db
        if rs_db is not None:
            power_cr = power_pu / 10.0 ** (rs_db / 10.0)
        elif self.power_cr is not None:
            power_cr = self.power_cr
        else:
            raise ConfigError("missing field 'scenario.power_cr' (or 'scenario.rs_db')")
        try:
            return SystemParams(p, power_pu, power_cr, self.noise_var)
        except DomainError as exc:
            raise ConfigError(f"scenario: {exc}") from None


DETECTOR_KEYS = ("kind", "name", "l_segments", "m_per_segment", "signal_energy",
                 "noise_var", "power_pu", "snr_db", "true_msc", "ed_delta_scale")
_DETECTOR_REQUIRED = {
    DetectorKind.ENERGY: ("l_segments", "m_per_segment"),
    DetectorKind.MATCHED_FILTER: ("signal_energy",),
    DetectorKind.MSC: ("l_segments", "true_msc"),
}
_INT_FIELDS = ("l_segments", "m_per_segment")


@dataclass(frozen=True)
class DetectorBlock:
    """One sensor; ``snr_db`` is a shorthand for ``power_pu = noise * 10^(snr/10)``."""

    fields: tuple  # sorted (key, value) pairs as given

    @classmethod
    def from_dict(cls, d: dict, index: int) -> "DetectorBlock":
        where = f"detectors[{index}]"
        _check_keys(d, DETECTOR_KEYS, where)
        kind_raw = _require(d, "kind", where)
        try:
            kind = DetectorKind(kind_raw)
        except ValueError:
            raise ConfigError(f"{where}.kind: unknown detector {kind_raw!r}") from None
        for key in _DETECTOR_REQUIRED[kind]:
            _require(d, key, where)
        if kind is DetectorKind.ENERGY and "power_pu" not in d and "snr_db" not in d:
            raise ConfigError(f"missing field '{where}.power_pu' (or '{where}.snr_db')")
        if "power_pu" in d and "snr_db" in d:
            raise ConfigError(f"{where}: give power_pu or snr_db, not both")
        vals = {}
        for k, v in d.items():
            if k in ("kind", "name"):
                if not isinstance(v, str):
                    raise ConfigError(f"'{where}.{k}' must be a string")
                vals[k] = v
            elif k in _INT_FIELDS:
                vals[k] = _integer(v, f"{where}.{k}")
            else:
                vals[k] = _number(v, f"{where}.{k}")
        block = cls(tuple(sorted(vals.items())))
        try:
            block.params()
        except DomainError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        return block

    def to_dict(self) -> dict:
        return dict(self.fields)

    @property
    def label(self) -> str:
        d = self.to_dict()
        return d.get("name", d["kind"])

    def params(self) -> DetectorParams:
        d = self.to_dict()
        d.pop("name", None)
        snr_db = d.pop("snr_db", None)
        if snr_db is not None:
            d["power_pu"] = d.get("noise_var", 1.0) * 10.0 ** (snr_db / 10.0)
        return DetectorParams(**d)


@dataclass(frozen=True)
class SimulationBlock:
    p_fa: float
    p_md: float
    n_slots: int = 1_000_000

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationBlock":
        _check_keys(d, ("p_fa", "p_md", "n_slots"), "simulation")
        n = _integer(d.get("n_slots", 1_000_000), "simulation.n_slots")
        if n < 1:
            raise ConfigError("simulation.n_slots must be >= 1")
        blk = cls(_number(_require(d, "p_fa", "simulation"), "simulation.p_fa"),
                  _number(_require(d, "p_md", "simulation"), "simulation.p_md"), n)
        try:
            blk.err()
        except DomainError as exc:
            raise ConfigError(f"simulation: {exc}") from None
        return blk

    def to_dict(self) -> dict:
        return {"p_fa": self.p_fa, "p_md": self.p_md, "n_slots": self.n_slots}

    def err(self) -> DetectionErrorPair:
        return DetectionErrorPair(self.p_fa, self.p_md)


TOP_KEYS = ("schema_version", "seed", "fading", "scenario", "sweep", "cases", "gamma",
            "grid_resolution", "detectors", "roc_points", "simulation", "output")
SWEEP_AXES = ("p", "rs_db", "gamma")


@dataclass(frozen=True)
class ConfigDocument:
    scenario: Scenario = field(default_factory=Scenario)
    seed: int = 0
    fading: Fading = Fading.RAYLEIGH_UNIT
    sweep: tuple = ()  # (axis, spec) pairs, spec kept verbatim
    cases: tuple = ()  # DetectionErrorPair
    gamma: float = 1.0
    grid_resolution: int = 101
    detectors: tuple = ()  # DetectorBlock
    roc_points: int = DEFAULT_ROC_POINTS
    simulation: Optional[SimulationBlock] = None
    output_dir: Optional[str] = None

    @classmethod
    def from_dict(cls, d: Any) -> "ConfigDocument":
        _check_keys(d, TOP_KEYS, "config")
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
        seed = _integer(d.get("seed", 0), "seed")
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        try:
            fading = Fading(d.get("fading", Fading.RAYLEIGH_UNIT.value))
        except ValueError:
            raise ConfigError(f"unknown fading kind {d.get('fading')!r}") from None

        sweep = []
        raw_sweep = d.get("sweep", {})
        _check_keys(raw_sweep, SWEEP_AXES, "sweep")
        for axis in SWEEP_AXES:
            if axis in raw_sweep:
                spec = raw_sweep[axis]
                values = parse_sweep(spec)
                if axis == "p" and not all(0.0 <= v <= 1.0 for v in values):
                    raise ConfigError("sweep.p values must lie in [0, 1]")
                if axis == "gamma" and not all(0.0 < v <= 1.0 for v in values):
                    raise ConfigError("sweep.gamma values must lie in (0, 1]")
                sweep.append((axis, tuple(spec) if isinstance(spec, list) else spec))

        cases = []
        raw_cases = d.get("cases", [])
        if not isinstance(raw_cases, list):
            raise ConfigError("'cases' must be a list")
        for i, c in enumerate(raw_cases):
            _check_keys(c, ("p_fa", "p_md"), f"cases[{i}]")
            try:
                cases.append(DetectionErrorPair(
                    _number(_require(c, "p_fa", f"cases[{i}]"), f"cases[{i}].p_fa"),
                    _number(_require(c, "p_md", f"cases[{i}]"), f"cases[{i}].p_md")))
            except DomainError as exc:
                raise ConfigError(f"cases[{i}]: {exc}") from None

        gamma = _number(d.get("gamma", 1.0), "gamma")
        if not 0.0 < gamma <= 1.0:
            raise ConfigError("gamma must lie in (0, 1]")
        res = _integer(d.get("grid_resolution", 101), "grid_resolution")
        if res < 2:
            raise ConfigError("grid_resolution must be >= 2")
        roc_points = _integer(d.get("roc_points", DEFAULT_ROC_POINTS), "roc_points")
        if roc_points < 2:
            raise ConfigError("roc_points must be >= 2")

        raw_det = d.get("detectors", [])
        if not isinstance(raw_det, list):
            raise ConfigError("'detectors' must be a list")
        detectors = tuple(DetectorBlock.from_dict(b, i) for i, b in enumerate(raw_det))

        sim = SimulationBlock.from_dict(d["simulation"]) if "simulation" in d else None

        out = d.get("output", {})
        _check_keys(out, ("dir",), "output")
        out_dir = out.get("dir")
        if out_dir is not None and not isinstance(out_dir, str):
            raise ConfigError("'output.dir' must be a string")

        return cls(Scenario.from_dict(d.get("scenario", {})), seed, fading, tuple(sweep),
                   tuple(cases), gamma, res, detectors, roc_points, sim, out_dir)

    def to_dict(self) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "seed": self.seed,
            "fading": self.fading.value,
            "scenario": self.scenario.to_dict(),
            "gamma": self.gamma,
            "grid_resolution": self.grid_resolution,
            "roc_points": self.roc_points,
        }
        if self.sweep:
            d["sweep"] = {a: list(s) if isinstance(s, tuple) else s for a, s in self.sweep}
        if self.cases:
            d["cases"] = [{"p_fa": c.p_fa, "p_md": c.p_md} for c in self.cases]
        if self.detectors:
            d["detectors"] = [b.to_dict() for b in self.detectors]
        if self.simulation is not None:
            d["simulation"] = self.simulation.to_dict()
        if self.output_dir is not None:
            d["output"] = {"dir": self.output_dir}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def axis(self, name: str) -> Optional[list[float]]:
        for axis, spec in self.sweep:
            if axis == name:
                return parse_sweep(spec)
        return None

    def with_seed(self, seed: int) -> "ConfigDocument":
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        return ConfigDocument(self.scenario, seed, self.fading, self.sweep, self.cases,
                              self.gamma, self.grid_resolution, self.detectors,
                              self.roc_points, self.simulation, self.output_dir)


def loads(text: str) -> ConfigDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return ConfigDocument.from_dict(raw)


def load(path) -> ConfigDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return loads(text)
