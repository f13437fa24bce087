"""Labeled dataset construction, scaling, splitting and CSV I/O."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .features import (
    FEATURE_NAMES,
    N_FEATURES,
    Baseline,
    FeatureVector,
    build_baseline,
    build_feature_vector,
    default_signatures,
)
from .mlc.severity import Severity, iso_severity_lookup
from .sigsim import (
    FaultCondition,
    MachineConfig,
    NoiseSpec,
    gen_current,
    gen_vibration,
    inject_disturbances,
)

__all__ = [
    "LABEL_NAMES",
    "VIB_FEATURE_NAMES",
    "Scenario",
    "SimulationSetup",
    "LabeledSample",
    "Dataset",
    "Scaler",
    "DatasetError",
    "default_scenarios",
    "simulate_run",
    "featurize_run",
    "build_dataset",
    "normalize",
    "apply",
    "split",
    "save_csv",
    "load_csv",
    "vibration_path",
]

LABEL_NAMES = ("isUnbalance", "isMisalignment")
VIB_FEATURE_NAMES = ("vib_rms_max", "gen_vib_rms", "mot_vib_rms")
FLOAT_FMT = "{:.6f}"
# stream id of the healthy reference run, outside the range of sample ids
BASELINE_STREAM = 2**31 - 1


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """One fault condition: labels plus current (relative) and vibration (mm/s) faults."""

    name: str
    current_fault: FaultCondition
    vib_fault: FaultCondition

    @property
    def is_unbalance(self) -> int:
        return int(self.current_fault.unbalance_on)

    @property
    def is_misalignment(self) -> int:
        return int(self.current_fault.misalignment_on)

    def scaled(self, factor: float) -> "Scenario":
        def sc(f):
            return replace(f, unbalance_amp=f.unbalance_amp * factor, misalignment_amp=f.misalignment_amp * factor)

        return replace(self, current_fault=sc(self.current_fault), vib_fault=sc(self.vib_fault))


def default_scenarios(
    current_amp: float = 0.05,
    vib_unbalance_mm_s: float = 2.0,
    vib_misalignment_mm_s: float = 1.5,
    subharmonic_weight: float = 0.5,
) -> tuple[Scenario, ...]:
    """Healthy, unbalance, misalignment and combined conditions."""

    def fc(ub, mis, ub_amp, mis_amp):
        return FaultCondition(ub, ub_amp if ub else 0.0, mis, mis_amp if mis else 0.0, subharmonic_weight)

    out = []
    for name, ub, mis in (
        ("healthy", False, False),
        ("unbalance", True, False),
        ("misalignment", False, True),
        ("combined", True, True),
    ):
        out.append(
            Scenario(name, fc(ub, mis, current_amp, current_amp), fc(ub, mis, vib_unbalance_mm_s, vib_misalignment_mm_s))
        )
    return tuple(out)


@dataclass(frozen=True)
class SimulationSetup:
    machines: tuple = (
        MachineConfig("generator", 2, 1500.0, 60.0, 10.0, 1.0),
        MachineConfig("motor", 3, 1500.0, 50.0, 10.0, 1.0),
    )
    vib_noise: NoiseSpec = NoiseSpec(0.1, 10, 20, 5.0, 500.0, 0.01, 0.1)
    fs_hz: float = 10000.0
    duration_s: float = 2.0
    nw: float = 4.0
    k: int = 7
    severity_levels: tuple = (0.5, 1.0, 1.5, 2.0)
    machine_class: str = "I"
    subharmonic_weight: float = 0.5

    def __post_init__(self):
        if len(self.machines) != 2:
            raise DatasetError("exactly two machines (generator, motor) are required")
        if not self.severity_levels or min(self.severity_levels) <= 0:
            raise DatasetError(f"severity_levels must be non-empty and positive, got {self.severity_levels}")


@dataclass(frozen=True)
class LabeledSample:
    id: int
    features: FeatureVector
    is_unbalance: int
    is_misalignment: int
    severity: Severity
    vibration: tuple = ()

    def __post_init__(self):
        if self.is_unbalance not in (0, 1) or self.is_misalignment not in (0, 1):
            raise DatasetError(f"sample {self.id}: labels must be 0 or 1")
        object.__setattr__(self, "severity", Severity(self.severity))

    @property
    def labels(self) -> tuple[int, int]:
        return (self.is_unbalance, self.is_misalignment)


@dataclass(frozen=True)
class Dataset:
    samples: tuple
    feature_names: tuple = FEATURE_NAMES

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise DatasetError("dataset is empty")
        ids = [s.id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise DatasetError("duplicate sample ids")
        if any(len(s.features.values) != len(self.feature_names) for s in self.samples):
            raise DatasetError("inconsistent feature length")

    def __len__(self):
        return len(self.samples)

    @property
    def ids(self) -> np.ndarray:
        return np.array([s.id for s in self.samples], dtype=int)

    @property
    def X(self) -> np.ndarray:
        return np.array([s.features.values for s in self.samples])

    @property
    def Y(self) -> np.ndarray:
        return np.array([s.labels for s in self.samples], dtype=int)

    @property
    def severities(self) -> np.ndarray:
        return np.array([int(s.severity) for s in self.samples], dtype=int)

    @property
    def X_vib(self) -> np.ndarray:
        return np.array([s.vibration for s in self.samples], dtype=float)

    def subset(self, ids) -> "Dataset":
        wanted = set(int(i) for i in ids)
        return replace(self, samples=tuple(s for s in self.samples if s.id in wanted))

    def with_features(self, X) -> "Dataset":
        X = np.asarray(X, dtype=float)
        return replace(
            self,
            samples=tuple(replace(s, features=FeatureVector(x)) for s, x in zip(self.samples, X)),
        )


def _channel_seed(seed, sample_id, channel):
    return int(np.random.SeedSequence([int(seed), int(sample_id), int(channel)]).generate_state(1)[0])


def simulate_run(
    setup: SimulationSetup,
    scenario: Scenario,
    noise: NoiseSpec,
    seed: int,
    sample_id: int,
    disturbed: bool,
):
    """Six current and two vibration records for one observation.

    Returns ``(currents, vibrations)``; currents are ordered generator a, b, c
    then motor a, b, c.
    """
    currents, vibrations = [], []
    for m, cfg in enumerate(setup.machines):
        for phase in (1, 2, 3):
            ch = 10 * m + phase
            s = _channel_seed(seed, sample_id, ch)
            sig = gen_current(cfg, scenario.current_fault, noise, s, phase, setup.fs_hz, setup.duration_s)
            if disturbed:
                sig = inject_disturbances(sig, noise, s)
            currents.append(sig)
        s = _channel_seed(seed, sample_id, 10 * m + 9)
        vib = gen_vibration(cfg, scenario.vib_fault, setup.vib_noise, s, setup.fs_hz, setup.duration_s)
        if disturbed:
            vib = inject_disturbances(vib, setup.vib_noise, s)
        vibrations.append(vib)
    return currents, vibrations


def vibration_rms(vibrations) -> tuple[float, float, float]:
    r = [float(np.sqrt(np.mean(np.square(v.samples)))) for v in vibrations]
    return (max(r), r[0], r[1])


def build_reference(setup: SimulationSetup, noise: NoiseSpec, seed: int) -> Baseline:
    """Baseline from an undisturbed healthy run on its own random stream."""
    healthy = default_scenarios(subharmonic_weight=setup.subharmonic_weight)[0]
    cur, vib = simulate_run(setup, healthy, noise, seed, BASELINE_STREAM, disturbed=False)
    return build_baseline(cur, vib, setup.machines, setup.nw, setup.k)


def featurize_run(setup, currents, vibrations, baseline) -> tuple[FeatureVector, tuple]:
    fv = build_feature_vector(
        currents,
        vibrations,
        baseline,
        setup.machines,
        setup.nw,
        setup.k,
        signatures=default_signatures(setup.subharmonic_weight),
    )
    return fv, vibration_rms(vibrations)


def _severity_scale(setup, seed, sample_id):
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(sample_id), 99]))
    return float(rng.choice(setup.severity_levels))


def make_sample(setup, scenario, noise, seed, sample_id, original, baseline) -> LabeledSample:
    """Simulate and featurize one observation.

    The undisturbed original of each condition uses the nominal fault
    amplitudes; disturbed copies scale them by a severity step drawn from
    ``setup.severity_levels``.
    """
    scale = 1.0 if original else _severity_scale(setup, seed, sample_id)
    cur, vib = simulate_run(setup, scenario.scaled(scale), noise, seed, sample_id, disturbed=not original)
    fv, vib_feats = featurize_run(setup, cur, vib, baseline)
    severity = iso_severity_lookup(vib_feats[0], setup.machine_class)
    return LabeledSample(sample_id, fv, scenario.is_unbalance, scenario.is_misalignment, severity, vib_feats)


def build_dataset(
    scenarios=None,
    per_condition: int = 15,
    noise: NoiseSpec | None = None,
    seed: int = 42,
    setup: SimulationSetup | None = None,
) -> Dataset:
    """One undisturbed original plus ``per_condition`` disturbed samples per condition.

    With the four default conditions and ``per_condition=15`` this gives 64
    samples.
    """
    setup = setup or SimulationSetup()
    noise = noise or NoiseSpec()
    scenarios = tuple(scenarios or default_scenarios(subharmonic_weight=setup.subharmonic_weight))
    if per_condition < 0:
        raise DatasetError("per_condition must be >= 0")
    noise.check_against(setup.fs_hz)
    setup.vib_noise.check_against(setup.fs_hz)
    baseline = build_reference(setup, noise, seed)

    samples = []
    for scenario in scenarios:
        for j in range(per_condition + 1):
            sid = len(samples)
            try:
                samples.append(make_sample(setup, scenario, noise, seed, sid, j == 0, baseline))
            except ValueError as exc:
                raise DatasetError(f"sample {sid} ({scenario.name}): {exc}") from exc
    ds = Dataset(samples)
    if len(scenarios) == 4 and {s.labels for s in samples} == {(0, 0), (1, 0), (0, 1), (1, 1)}:
        Y = ds.Y
        assert 2 * Y[:, 0].sum() == len(ds) and 2 * Y[:, 1].sum() == len(ds), "labels not balanced"
    return ds


@dataclass(frozen=True)
class Scaler:
    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "min", np.asarray(self.min, dtype=float))
        object.__setattr__(self, "max", np.asarray(self.max, dtype=float))
        if np.any(self.min > self.max):
            raise DatasetError("scaler min exceeds max")

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        span = self.max - self.min
        safe = np.where(span > 0, span, 1.0)
        return np.where(span > 0, (X - self.min) / safe, 0.0)

    def to_dict(self) -> dict:
        return {"min": self.min.tolist(), "max": self.max.tolist()}

    @classmethod
    def from_dict(cls, d) -> "Scaler":
        return cls(d["min"], d["max"])


def normalize(train: Dataset) -> tuple[Scaler, Dataset]:
    """Fit min-max scaling on ``train`` and return it with the scaled set."""
    X = train.X
    scaler = Scaler(X.min(axis=0), X.max(axis=0))
    return scaler, apply(scaler, train)


def apply(scaler: Scaler, ds: Dataset) -> Dataset:
    """Scale with a fitted scaler; values outside [0, 1] are kept."""
    return ds.with_features(scaler.transform(ds.X))


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def split(ds: Dataset, train_fraction: float = 0.8, seed: int = 42) -> tuple[Dataset, Dataset]:
    """Shuffled train/test split stratified on the joint fault-label combination."""
    if not 0 < train_fraction < 1:
        raise DatasetError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(ds)
    n_train = _round_half_up(train_fraction * n)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 7]))
    ids = ds.ids

    strata = {}
    for sid, lab in zip(ids, map(tuple, ds.Y)):
        strata.setdefault(lab, []).append(int(sid))
    keys = sorted(strata)
    sizes = np.array([len(strata[key]) for key in keys])
    quota = sizes * n_train / n
    alloc = np.floor(quota).astype(int)
    for i in np.argsort(-(quota - alloc), kind="stable")[: n_train - alloc.sum()]:
        alloc[i] += 1
    lo = np.where(sizes >= 2, 1, 0)
    hi = np.where(sizes >= 2, sizes - 1, sizes)
    alloc = np.clip(alloc, lo, hi)
    # repair the total after clipping, moving one sample at a time
    while alloc.sum() != n_train:
        step = 1 if alloc.sum() < n_train else -1
        room = (hi - alloc) if step > 0 else (alloc - lo)
        if room.max() <= 0:
            break
        alloc[int(np.argmax(room))] += step

    if alloc.sum() != n_train:
        warnings.warn("dataset too small to stratify; using a plain shuffle", stacklevel=2)
        perm = rng.permutation(ids)
        train_ids = perm[:n_train]
    else:
        train_ids = []
        for key, a in zip(keys, alloc):
            members = rng.permutation(strata[key])
            train_ids.extend(members[:a])
    train_set = set(int(i) for i in train_ids)
    test_ids = [int(i) for i in ids if int(i) not in train_set]
    return ds.subset(train_set), ds.subset(test_ids)


def vibration_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + "_vibration.csv")


def save_csv(ds: Dataset, path) -> Path:
    """Write the dataset table; vibration severity features go to a sibling file."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", *ds.feature_names, *LABEL_NAMES, "Severity"])
        for s in ds.samples:
            w.writerow(
                [s.id, *(FLOAT_FMT.format(v) for v in s.features.values), s.is_unbalance, s.is_misalignment, s.severity.label]
            )
    if all(len(s.vibration) == len(VIB_FEATURE_NAMES) for s in ds.samples):
        with vibration_path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", *VIB_FEATURE_NAMES])
            for s in ds.samples:
                w.writerow([s.id, *(FLOAT_FMT.format(v) for v in s.vibration)])
    return path


def _load_vibration(path):
    vpath = vibration_path(path)
    if not vpath.exists():
        return {}
    with vpath.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["id", *VIB_FEATURE_NAMES]:
        raise DatasetError(f"{vpath}: unexpected header")
    return {int(r[0]): tuple(float(v) for v in r[1:]) for r in rows[1:] if r}


def load_csv(path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DatasetError(f"{path}: empty file")
    header = rows[0]
    expected = ["id", *FEATURE_NAMES, *LABEL_NAMES, "Severity"]
    for col in expected:
        if col not in header:
            raise DatasetError(f"{path}: missing column {col!r}")
    if header != expected:
        raise DatasetError(f"{path}: columns out of order or unexpected extras")
    vib = _load_vibration(path)
    samples = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(expected):
            raise DatasetError(f"{path}: row {lineno} has {len(row)} fields, expected {len(expected)}")
        try:
            sid = int(row[0])
            values = [float(v) for v in row[1 : 1 + N_FEATURES]]
            ub, mis = int(row[1 + N_FEATURES]), int(row[2 + N_FEATURES])
            sev = Severity.parse(row[3 + N_FEATURES])
            samples.append(LabeledSample(sid, FeatureVector(values), ub, mis, sev, vib.get(sid, ())))
        except ValueError as exc:
            raise DatasetError(f"{path}: row {lineno}: {exc}") from exc
    return Dataset(samples)
