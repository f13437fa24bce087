"""Synthetic three-phase current and vibration-velocity signals.

The signal model is additive: a supply fundamental (currents) or a
background running-speed tone (vibration), fault tones at multiples of the
shaft frequency, white Gaussian noise, and optionally a random set of
external disturbance tones.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

__all__ = [
    "MachineConfig",
    "FaultCondition",
    "NoiseSpec",
    "SignalRecord",
    "SimulationError",
    "gen_current",
    "gen_vibration",
    "inject_disturbances",
    "sample_rng",
    "save_signal_csv",
]

UNITS = ("ampere", "mm_per_s")


class SimulationError(ValueError):
    """Invalid simulation parameters."""


def _finite_nonneg(name, value):
    if not math.isfinite(value) or value < 0:
        raise SimulationError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class MachineConfig:
    name: str = "generator"
    pole_pairs: int = 2
    shaft_speed_rpm: float = 1500.0
    supply_freq_hz: float = 60.0
    fundamental_current_amp: float = 10.0
    fundamental_vib_amp_mm_s: float = 1.0

    def __post_init__(self):
        if int(self.pole_pairs) != self.pole_pairs or self.pole_pairs < 1:
            raise SimulationError(f"pole_pairs must be a positive integer, got {self.pole_pairs!r}")
        for attr in ("shaft_speed_rpm", "supply_freq_hz", "fundamental_current_amp"):
            v = getattr(self, attr)
            if not math.isfinite(v) or v <= 0:
                raise SimulationError(f"{attr} must be finite and > 0, got {v!r}")
        _finite_nonneg("fundamental_vib_amp_mm_s", self.fundamental_vib_amp_mm_s)

    @property
    def rot_freq_hz(self) -> float:
        return self.shaft_speed_rpm / 60.0


@dataclass(frozen=True)
class FaultCondition:
    unbalance_on: bool = False
    unbalance_amp: float = 0.0
    misalignment_on: bool = False
    misalignment_amp: float = 0.0
    misalignment_subharmonic_weight: float = 0.5

    def __post_init__(self):
        _finite_nonneg("unbalance_amp", self.unbalance_amp)
        _finite_nonneg("misalignment_amp", self.misalignment_amp)
        w = self.misalignment_subharmonic_weight
        if not (math.isfinite(w) and 0.0 <= w <= 1.0):
            raise SimulationError(f"misalignment_subharmonic_weight must lie in [0, 1], got {w!r}")
        if not self.unbalance_on and self.unbalance_amp != 0:
            raise SimulationError("unbalance_amp must be 0 when unbalance_on is false")
        if not self.misalignment_on and self.misalignment_amp != 0:
            raise SimulationError("misalignment_amp must be 0 when misalignment_on is false")

    @classmethod
    def healthy(cls) -> "FaultCondition":
        return cls()

    def harmonics(self) -> list[tuple[float, float]]:
        """(multiple of shaft frequency, amplitude) pairs of the active faults."""
        out = []
        if self.unbalance_on:
            out.append((1.0, self.unbalance_amp))
        if self.misalignment_on:
            out.append((0.5, self.misalignment_amp * self.misalignment_subharmonic_weight))
            out.append((1.0, self.misalignment_amp))
            out.append((2.0, self.misalignment_amp))
        return [(nu, a) for nu, a in out if a > 0]


@dataclass(frozen=True)
class NoiseSpec:
    white_sigma: float = 0.0
    disturb_count_min: int = 10
    disturb_count_max: int = 20
    disturb_freq_lo_hz: float = 5.0
    disturb_freq_hi_hz: float = 500.0
    disturb_amp_lo: float = 0.0
    disturb_amp_hi: float = 0.0

    def __post_init__(self):
        _finite_nonneg("white_sigma", self.white_sigma)
        if self.disturb_count_min < 0 or self.disturb_count_min > self.disturb_count_max:
            raise SimulationError(
                f"need 0 <= disturb_count_min <= disturb_count_max, got "
                f"{self.disturb_count_min}..{self.disturb_count_max}"
            )
        if not self.disturb_freq_lo_hz < self.disturb_freq_hi_hz:
            raise SimulationError("disturb_freq_lo_hz must be < disturb_freq_hi_hz")
        if self.disturb_freq_lo_hz < 0:
            raise SimulationError("disturb_freq_lo_hz must be >= 0")
        _finite_nonneg("disturb_amp_lo", self.disturb_amp_lo)
        _finite_nonneg("disturb_amp_hi", self.disturb_amp_hi)
        if self.disturb_amp_lo > self.disturb_amp_hi:
            raise SimulationError("disturb_amp_lo must be <= disturb_amp_hi")

    def check_against(self, fs_hz: float) -> None:
        if self.disturb_freq_hi_hz > fs_hz / 2:
            raise SimulationError(
                f"disturb_freq_hi_hz={self.disturb_freq_hi_hz} exceeds Nyquist {fs_hz / 2}"
            )


@dataclass(frozen=True)
class SignalRecord:
    channel_id: str
    fs_hz: float
    duration_s: float
    samples: np.ndarray = field(repr=False)
    units: str = "ampere"

    def __post_init__(self):
        if not (self.fs_hz > 0 and self.duration_s > 0):
            raise SimulationError("fs_hz and duration_s must be > 0")
        if self.units not in UNITS:
            raise SimulationError(f"units must be one of {UNITS}, got {self.units!r}")
        x = np.array(self.samples, dtype=float)
        if x.ndim != 1 or len(x) != round(self.fs_hz * self.duration_s):
            raise SimulationError(
                f"expected {round(self.fs_hz * self.duration_s)} samples, got {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise SimulationError(f"channel {self.channel_id!r} has non-finite samples")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n) / self.fs_hz

    def with_samples(self, samples) -> "SignalRecord":
        return replace(self, samples=samples)


def sample_rng(seed: int, *stream) -> np.random.Generator:
    """Independent generator for ``(seed, *stream)``.

    Each (sample index, channel) pair gets its own stream, so results do not
    depend on generation order.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, stream)]))


def _n_samples(fs_hz, duration_s):
    return round(fs_hz * duration_s)


def _tone(t, freq, amp, phase=0.0):
    return amp * np.sin(2 * np.pi * freq * t + phase)


def _check_nyquist(freq, fs_hz, what):
    if freq >= fs_hz / 2:
        raise SimulationError(f"{what} at {freq} Hz aliases (fs/2 = {fs_hz / 2} Hz)")


def current_tones(cfg: MachineConfig, fault: FaultCondition) -> list[tuple[float, float]]:
    """(frequency, absolute amplitude) of every fault-related current tone."""
    fr = cfg.rot_freq_hz
    out = []
    for nu, rel in fault.harmonics():
        a = rel * cfg.fundamental_current_amp
        out.append((cfg.pole_pairs * nu * fr, a))
        out.append((cfg.supply_freq_hz + nu * fr, a))
        lower = cfg.supply_freq_hz - nu * fr
        if lower > 0:
            out.append((lower, a))
    return out


def gen_current(
    cfg: MachineConfig,
    fault: FaultCondition,
    noise: NoiseSpec,
    seed: int,
    phase_index: int = 1,
    fs_hz: float = 10000.0,
    duration_s: float = 2.0,
) -> SignalRecord:
    """Stator current of one phase, in amperes.

    Every tone of phase ``p`` carries the phase offset ``-2*pi*(p-1)/3`` so the
    three phases form a positive-sequence set. Disturbances are not included;
    see :func:`inject_disturbances`.
    """
    if phase_index not in (1, 2, 3):
        raise SimulationError(f"phase_index must be 1, 2 or 3, got {phase_index!r}")
    offset = -2 * np.pi * (phase_index - 1) / 3
    _check_nyquist(cfg.supply_freq_hz, fs_hz, "supply fundamental")
    tones = current_tones(cfg, fault)
    for f, _ in tones:
        _check_nyquist(f, fs_hz, "fault tone")

    n = _n_samples(fs_hz, duration_s)
    t = np.arange(n) / fs_hz
    x = _tone(t, cfg.supply_freq_hz, cfg.fundamental_current_amp, offset)
    for f, a in tones:
        x = x + _tone(t, f, a, offset)
    if noise.white_sigma > 0:
        x = x + sample_rng(seed, 1, phase_index).normal(0.0, noise.white_sigma, n)
    return SignalRecord(f"{cfg.name}_i{'abc'[phase_index - 1]}", fs_hz, duration_s, x, "ampere")


def gen_vibration(
    cfg: MachineConfig,
    fault: FaultCondition,
    noise: NoiseSpec,
    seed: int,
    fs_hz: float = 10000.0,
    duration_s: float = 2.0,
) -> SignalRecord:
    """Vibration velocity in mm/s: running-speed background plus fault tones."""
    fr = cfg.rot_freq_hz
    tones = [(fr, cfg.fundamental_vib_amp_mm_s)] + [(nu * fr, a) for nu, a in fault.harmonics()]
    for f, _ in tones:
        _check_nyquist(f, fs_hz, "vibration tone")

    n = _n_samples(fs_hz, duration_s)
    t = np.arange(n) / fs_hz
    x = np.zeros(n)
    for f, a in tones:
        if a > 0:
            x = x + _tone(t, f, a)
    if noise.white_sigma > 0:
        x = x + sample_rng(seed, 2, 0).normal(0.0, noise.white_sigma, n)
    return SignalRecord(f"{cfg.name}_vib", fs_hz, duration_s, x, "mm_per_s")


def draw_disturbances(noise: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Rows of (frequency, amplitude, phase) for one random disturbance set."""
    count = int(rng.integers(noise.disturb_count_min, noise.disturb_count_max + 1))
    freqs = rng.uniform(noise.disturb_freq_lo_hz, noise.disturb_freq_hi_hz, count)
    amps = rng.uniform(noise.disturb_amp_lo, noise.disturb_amp_hi, count)
    phases = rng.uniform(0.0, 2 * np.pi, count)
    return np.column_stack([freqs, amps, phases])


def inject_disturbances(sig: SignalRecord, noise: NoiseSpec, seed: int) -> SignalRecord:
    """Return a copy of ``sig`` with 10 to 20 (by default) random tones added."""
    noise.check_against(sig.fs_hz)
    tones = draw_disturbances(noise, sample_rng(seed, 3))
    if len(tones) == 0:
        return sig
    t = sig.t
    x = sig.samples.copy()
    for f, a, ph in tones:
        x += _tone(t, f, a, ph)
    return sig.with_samples(x)


def save_signal_csv(sig: SignalRecord, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "value"])
        for ti, v in zip(sig.t, sig.samples):
            w.writerow([f"{ti:.6f}", repr(float(v))])
    return path
