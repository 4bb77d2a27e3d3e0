"""Versioned JSON run configuration.

Unknown keys are rejected at every level so typos fail loudly. See FORMATS.md.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .circuit import HeaterCalibration
from .experiment import NoiseModel, TwoQutritState, build_state
from .qcore import white_noise_for_fidelity
from .ring import RingParams, paper_ring

SCHEMA = 1
RING_PRESETS = {"paper-critical": "critical", "paper-design": "design",
                "paper-extraction": "extraction"}


class ConfigError(ValueError):
    pass


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    bad = set(d) - set(allowed)
    if bad:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(bad)}")


@dataclass(frozen=True)
class CountSettings:
    pair_rate_hz: float = 100.0            # detected pairs/s summed over all detector pairs
    fringe_integration_s: float = 10.0     # per scan point
    fringe_points: int = 41
    tomography_counts_per_setting: float = 2440.0
    inequality_counts_per_setting: float = 5000.0
    mc_samples: int = 100


@dataclass(frozen=True)
class TomographySettings:
    method: str = "mle"
    projection: str = "simplex"
    normalization: str = "basis"


@dataclass(frozen=True)
class SpectrumSettings:
    start_nm: float = 1535.0
    stop_nm: float = 1570.0
    n_points: int = 35001


@dataclass(frozen=True)
class MetrologySettings:
    grid_points: int = 41      # per axis of the two-dimensional pump-phase map
    cut_points: int = 1001


@dataclass(frozen=True)
class RunConfig:
    sources: tuple = ()
    heater: HeaterCalibration = HeaterCalibration()
    noise: NoiseModel = NoiseModel()
    pump: TwoQutritState = TwoQutritState()
    seed: int | None = None
    output_dir: str = "out"
    counts: CountSettings = CountSettings()
    tomography: TomographySettings = TomographySettings()
    spectrum: SpectrumSettings = SpectrumSettings()
    metrology: MetrologySettings = MetrologySettings()

    def ring(self, source: int) -> RingParams:
        if not 1 <= source <= len(self.sources):
            raise ConfigError(f"source must be in 1..{len(self.sources)}")
        return self.sources[source - 1]


def _dataclass_from(cls, d, where):
    names = [f.name for f in fields(cls)]
    _check_keys(d, names, where)
    try:
        return cls(**d)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from e


def _ring(entry, where):
    if isinstance(entry, str):
        if entry not in RING_PRESETS:
            raise ConfigError(f"{where}: unknown ring preset {entry!r}")
        return paper_ring(RING_PRESETS[entry])
    _check_keys(entry, RingParams.__dataclass_fields__, where)
    try:
        return RingParams.from_dict(entry)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from e


def _noise(d):
    keys = ["white_noise_weight", "fidelity", "port_efficiencies", "accidental_rate",
            "resonance_detuning", "pair_weights"]
    _check_keys(d, keys, "noise")
    d = dict(d)
    if "fidelity" in d:
        if "white_noise_weight" in d:
            raise ConfigError("noise: give either fidelity or white_noise_weight")
        d["white_noise_weight"] = white_noise_for_fidelity(float(d.pop("fidelity")))
    for k in ("port_efficiencies", "resonance_detuning"):
        if d.get(k) is not None:
            d[k] = tuple(d[k])
    try:
        return NoiseModel(**d)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"noise: {e}") from e


def parse_config(d: dict, base_dir: Path | None = None) -> RunConfig:
    allowed = ["schema", "sources", "heater", "noise", "pump", "seed", "output_dir", "counts",
               "tomography", "spectrum", "metrology"]
    _check_keys(d, allowed, "config")
    if d.get("schema") != SCHEMA:
        raise ConfigError(f"config needs \"schema\": {SCHEMA}")
    kw = {}
    src = d.get("sources", ["paper-critical"] * 3)
    if not isinstance(src, list) or not 1 <= len(src) <= 3:
        raise ConfigError("sources must be a list of one to three rings")
    kw["sources"] = tuple(_ring(s, f"sources[{k}]") for k, s in enumerate(src))
    if "heater" in d:
        kw["heater"] = _dataclass_from(HeaterCalibration, d["heater"], "heater")
    if "noise" in d:
        kw["noise"] = _noise(d["noise"])
    if "pump" in d:
        _check_keys(d["pump"], ["amplitudes", "phases"], "pump")
        try:
            kw["pump"] = build_state(d["pump"].get("amplitudes", (1, 1, 1)),
                                     d["pump"].get("phases", (0, 0)))
        except ValueError as e:
            raise ConfigError(f"pump: {e}") from e
    if d.get("seed") is not None:
        if not isinstance(d["seed"], int) or d["seed"] < 0:
            raise ConfigError("seed must be a non-negative integer")
        kw["seed"] = d["seed"]
    if "output_dir" in d:
        kw["output_dir"] = str(d["output_dir"])
    for key, cls in (("counts", CountSettings), ("tomography", TomographySettings),
                     ("spectrum", SpectrumSettings), ("metrology", MetrologySettings)):
        if key in d:
            kw[key] = _dataclass_from(cls, d[key], key)
    return RunConfig(**kw)


def load_config(path: str | os.PathLike | None) -> RunConfig:
    """Read a config file; None gives the defaults (paper geometry, ideal state)."""
    if path is None:
        return parse_config({"schema": SCHEMA})
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        d = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{p}: invalid JSON ({e})") from e
    return parse_config(d, p.parent)


def resolve_seed(cli_seed: int | None, cfg: RunConfig, env=os.environ) -> int | None:
    """--seed wins, then QSIM_SEED, then the config file."""
    if cli_seed is not None:
        return cli_seed
    if env.get("QSIM_SEED"):
        try:
            return int(env["QSIM_SEED"])
        except ValueError as e:
            raise ConfigError("QSIM_SEED must be an integer") from e
    return cfg.seed


def dump_json(obj) -> str:
    """Stable JSON: sorted keys, numpy scalars converted, repr-exact floats."""

    def conv(o):
        if isinstance(o, dict):
            return {str(k): conv(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [conv(v) for v in o]
        if isinstance(o, np.ndarray):
            return conv(o.tolist())
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, np.bool_):
            return bool(o)
        return o

    return json.dumps(conv(obj), sort_keys=True, indent=2) + "\n"
