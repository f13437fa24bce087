"""Run configuration: one JSON document with full defaults."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import Scenario, SimulationSetup, default_scenarios
from .sigsim import MachineConfig, NoiseSpec

__all__ = ["ConfigError", "DEFAULTS", "RunConfig", "load_config"]

MODELS = ("brtree", "chain", "mlknn")


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "seed": 42,
    "fs_hz": 10000.0,
    "duration_s": 2.0,
    "per_condition": 15,
    "machines": [
        {
            "name": "generator",
            "pole_pairs": 2,
            "shaft_speed_rpm": 1500.0,
            "supply_freq_hz": 60.0,
            "fundamental_current_amp": 10.0,
            "fundamental_vib_amp_mm_s": 1.0,
        },
        {
            "name": "motor",
            "pole_pairs": 3,
            "shaft_speed_rpm": 1500.0,
            "supply_freq_hz": 50.0,
            "fundamental_current_amp": 10.0,
            "fundamental_vib_amp_mm_s": 1.0,
        },
    ],
    "faults": {
        "current_amp": 0.05,
        "vib_unbalance_mm_s": 2.0,
        "vib_misalignment_mm_s": 1.5,
        "subharmonic_weight": 0.5,
        "severity_levels": [0.5, 1.0, 1.5, 2.0],
    },
    "current_noise": {
        "white_sigma": 0.05,
        "disturb_count_min": 10,
        "disturb_count_max": 20,
        "disturb_freq_lo_hz": 5.0,
        "disturb_freq_hi_hz": 500.0,
        "disturb_amp_lo": 0.05,
        "disturb_amp_hi": 1.0,
    },
    "vibration_noise": {
        "white_sigma": 0.1,
        "disturb_count_min": 10,
        "disturb_count_max": 20,
        "disturb_freq_lo_hz": 5.0,
        "disturb_freq_hi_hz": 500.0,
        "disturb_amp_lo": 0.01,
        "disturb_amp_hi": 0.1,
    },
    "multitaper": {"nw": 4.0, "k": 7},
    "machine_class": "I",
    "classifier": {
        "model": "chain",
        "criterion": "gini",
        "max_depth": None,
        "chain_order": [0, 1],
        "knn_k": 3,
        "knn_s": 1.0,
        "drop_distances": False,
    },
    "split": 0.8,
    "out": "out",
}


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config field {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config field {where!r} must be an object")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = val
    return out


def _build(where, factory, **kwargs):
    try:
        return factory(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass
class RunConfig:
    data: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    @classmethod
    def from_dict(cls, d: dict | None = None) -> "RunConfig":
        cfg = cls(_merge(DEFAULTS, d or {}))
        cfg.validate()
        return cfg

    def override(self, **flat) -> "RunConfig":
        """Apply dotted-path overrides such as ``classifier.knn_k=5``; ``None`` is ignored."""
        nested = {}
        for dotted, val in flat.items():
            if val is None:
                continue
            node = nested
            *parents, leaf = dotted.split(".")
            for p in parents:
                node = node.setdefault(p, {})
            node[leaf] = val
        merged = _merge(self.data, nested)
        out = RunConfig(merged)
        out.validate()
        return out

    def __getitem__(self, key):
        return self.data[key]

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def classifier(self) -> dict:
        return self.data["classifier"]

    def machines(self) -> tuple[MachineConfig, MachineConfig]:
        ms = self.data["machines"]
        if len(ms) != 2:
            raise ConfigError("machines: exactly two entries (generator, motor) are required")
        return tuple(_build(f"machines[{i}]", MachineConfig, **m) for i, m in enumerate(ms))

    def current_noise(self) -> NoiseSpec:
        return _build("current_noise", NoiseSpec, **self.data["current_noise"])

    def vibration_noise(self) -> NoiseSpec:
        return _build("vibration_noise", NoiseSpec, **self.data["vibration_noise"])

    def setup(self) -> SimulationSetup:
        f = self.data["faults"]
        mt = self.data["multitaper"]
        return _build(
            "setup",
            SimulationSetup,
            machines=self.machines(),
            vib_noise=self.vibration_noise(),
            fs_hz=float(self.data["fs_hz"]),
            duration_s=float(self.data["duration_s"]),
            nw=float(mt["nw"]),
            k=int(mt["k"]),
            severity_levels=tuple(float(v) for v in f["severity_levels"]),
            machine_class=self.data["machine_class"],
            subharmonic_weight=float(f["subharmonic_weight"]),
        )

    def scenarios(self) -> tuple[Scenario, ...]:
        f = self.data["faults"]
        return _build(
            "faults",
            default_scenarios,
            current_amp=float(f["current_amp"]),
            vib_unbalance_mm_s=float(f["vib_unbalance_mm_s"]),
            vib_misalignment_mm_s=float(f["vib_misalignment_mm_s"]),
            subharmonic_weight=float(f["subharmonic_weight"]),
        )

    def validate(self) -> None:
        d = self.data
        if not isinstance(d["seed"], int) or d["seed"] < 0:
            raise ConfigError(f"seed: must be a non-negative integer, got {d['seed']!r}")
        if not isinstance(d["per_condition"], int) or d["per_condition"] < 0:
            raise ConfigError("per_condition: must be a non-negative integer")
        if not 0 < float(d["split"]) < 1:
            raise ConfigError(f"split: must lie in (0, 1), got {d['split']!r}")
        if d["machine_class"] not in ("I", "II", "III", "IV"):
            raise ConfigError(f"machine_class: must be I, II, III or IV, got {d['machine_class']!r}")
        mt = d["multitaper"]
        if not (float(mt["nw"]) > 0 and int(mt["k"]) >= 1):
            raise ConfigError("multitaper: need nw > 0 and k >= 1")
        c = d["classifier"]
        if c["model"] not in MODELS:
            raise ConfigError(f"classifier.model: must be one of {MODELS}, got {c['model']!r}")
        if c["criterion"] not in ("gini", "entropy"):
            raise ConfigError(f"classifier.criterion: must be gini or entropy, got {c['criterion']!r}")
        if c["max_depth"] is not None and (not isinstance(c["max_depth"], int) or c["max_depth"] < 1):
            raise ConfigError("classifier.max_depth: must be a positive integer or null")
        if sorted(c["chain_order"]) != [0, 1]:
            raise ConfigError(f"classifier.chain_order: must be a permutation of [0, 1], got {c['chain_order']!r}")
        if not isinstance(c["knn_k"], int) or c["knn_k"] < 1:
            raise ConfigError("classifier.knn_k: must be a positive integer")
        if not float(c["knn_s"]) > 0:
            raise ConfigError("classifier.knn_s: must be > 0")
        setup = self.setup()
        for name, noise in (("current_noise", self.current_noise()), ("vibration_noise", setup.vib_noise)):
            try:
                noise.check_against(setup.fs_hz)
            except ValueError as exc:
                raise ConfigError(f"{name}: {exc}") from exc
        self.scenarios()

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)


def load_config(path=None) -> RunConfig:
    if path is None:
        return RunConfig.from_dict()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig.from_dict(doc)
