"""The 27-element fault feature vector.

Layout (names in :data:`FEATURE_NAMES`):

* 0-17: for each machine and phase, the multitaper peak magnitude at the
  1x and 2x fault bands (pole_pairs x multiple x shaft frequency) and the RMS
  over the 0.5x/1x/2x fault bands;
* 18-23: form factor, kurtosis and entropy deviation of each machine's
  vibration channel;
* 24-26: distances of the pooled current fault profile to the healthy,
  unbalance and misalignment signatures.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sigsim import MachineConfig, SignalRecord
from .spectral import PsdEstimate, bands_rms, extract_peak_magnitudes, fft_magnitude, multitaper_psd

__all__ = [
    "FEATURE_NAMES",
    "N_FEATURES",
    "PROFILE_MULTIPLES",
    "FaultSignature",
    "Baseline",
    "FeatureVector",
    "FeatureError",
    "SIGNATURES",
    "preprocess",
    "form_factor",
    "kurtosis",
    "spectral_entropy",
    "entropy_deviation",
    "signature_distance",
    "build_baseline",
    "build_feature_vector",
]

PHASES = ("a", "b", "c")
MACHINE_TAGS = ("gen", "mot")
PROFILE_MULTIPLES = (0.5, 1.0, 2.0)
BAND_TOL_HZ = 2.0
# amplitude floor relative to the unit fundamental; keeps noiseless profiles defined
PROFILE_FLOOR = 1e-6


def _names():
    names = []
    for m in MACHINE_TAGS:
        for p in PHASES:
            names += [f"{m}_i{p}_pk1x", f"{m}_i{p}_pk2x", f"{m}_i{p}_band_rms"]
    for m in MACHINE_TAGS:
        names += [f"{m}_vib_form_factor", f"{m}_vib_kurtosis", f"{m}_vib_entropy_dev"]
    names += ["dist_healthy", "dist_unbalance", "dist_misalignment"]
    return tuple(names)


FEATURE_NAMES = _names()
N_FEATURES = len(FEATURE_NAMES)
assert N_FEATURES == 27


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class FaultSignature:
    fault_kind: str
    components: tuple = ()

    def __post_init__(self):
        if self.fault_kind not in ("healthy", "unbalance", "misalignment"):
            raise FeatureError(f"unknown fault kind {self.fault_kind!r}")
        comps = tuple((float(m), float(r)) for m, r in self.components)
        if self.fault_kind == "healthy" and comps:
            raise FeatureError("healthy signature has no components")
        if self.fault_kind != "healthy" and not comps:
            raise FeatureError(f"{self.fault_kind} signature needs components")
        if any(m <= 0 or r < 0 for m, r in comps):
            raise FeatureError("signature multiples must be > 0 and magnitudes >= 0")
        object.__setattr__(self, "components", comps)

    def profile(self, multiples=PROFILE_MULTIPLES) -> np.ndarray:
        """Reference magnitude profile sampled at ``multiples``.

        The healthy signature is the flat noise-floor profile.
        """
        if self.fault_kind == "healthy":
            return np.ones(len(multiples))
        lookup = dict(self.components)
        return np.array([lookup.get(float(m), 0.0) for m in multiples])


def default_signatures(subharmonic_weight: float = 0.5):
    return (
        FaultSignature("healthy"),
        FaultSignature("unbalance", ((1.0, 1.0),)),
        FaultSignature("misalignment", ((0.5, subharmonic_weight), (1.0, 1.0), (2.0, 1.0))),
    )


SIGNATURES = default_signatures()


@dataclass(frozen=True)
class Baseline:
    """Fault-free reference PSD and spectral entropy per channel."""

    psds: dict = field(repr=False)
    entropies: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.entropies:
            object.__setattr__(
                self, "entropies", {ch: spectral_entropy(p) for ch, p in self.psds.items()}
            )
        for ch, h in self.entropies.items():
            if not np.isfinite(h):
                raise FeatureError(f"baseline entropy of {ch!r} is not finite")


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    names: tuple = FEATURE_NAMES

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (N_FEATURES,):
            raise FeatureError(f"feature vector must have {N_FEATURES} values, got {v.shape}")
        if not np.all(np.isfinite(v)):
            bad = [n for n, x in zip(self.names, v) if not np.isfinite(x)]
            raise FeatureError(f"non-finite features: {bad}")
        if tuple(self.names) != FEATURE_NAMES:
            raise FeatureError("feature names do not match the fixed layout")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values.tolist()))


def preprocess(sig: SignalRecord, supply_freq_hz: float | None = None) -> SignalRecord:
    """Remove the mean; current channels are also scaled to a unit fundamental.

    ``supply_freq_hz`` is required for ``ampere`` channels.
    """
    x = np.asarray(sig.samples, dtype=float)
    if len(x) == 0:
        raise FeatureError("empty signal")
    out = sig.with_samples(x - x.mean())
    if sig.units != "ampere":
        return out
    if supply_freq_hz is None:
        raise FeatureError(f"current channel {sig.channel_id!r} needs supply_freq_hz to normalize")
    fund = fft_magnitude(out).at(supply_freq_hz)
    if not fund > 0:
        raise FeatureError(f"channel {sig.channel_id!r} has zero fundamental at {supply_freq_hz} Hz")
    return out.with_samples(out.samples / fund)


def form_factor(x) -> float:
    """RMS over mean absolute value."""
    x = np.asarray(x, dtype=float)
    mav = np.mean(np.abs(x)) if len(x) else 0.0
    if not mav > 0:
        raise FeatureError("form factor undefined for an all-zero signal")
    return float(np.sqrt(np.mean(x**2)) / mav)


def kurtosis(x) -> float:
    """Non-excess kurtosis ``m4 / m2**2`` (3 for Gaussian data)."""
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        raise FeatureError("kurtosis needs at least 2 samples")
    d = x - x.mean()
    m2 = np.mean(d**2)
    if not m2 > 0:
        raise FeatureError("kurtosis undefined for zero-variance input")
    return float(np.mean(d**4) / m2**2)


def spectral_entropy(psd: PsdEstimate) -> float:
    p = np.asarray(psd.power, dtype=float)
    total = p.sum()
    if not total > 0:
        raise FeatureError("spectral entropy undefined for a zero-power PSD")
    p = p[p > 0] / total
    return float(-np.sum(p * np.log(p)))


def entropy_deviation(psd: PsdEstimate, baseline: Baseline, channel: str) -> float:
    """Spectral entropy (nats) of ``psd`` minus that of the healthy reference."""
    if channel not in baseline.entropies:
        raise FeatureError(f"channel {channel!r} missing from baseline")
    return spectral_entropy(psd) - baseline.entropies[channel]


def signature_distance(peaks, sig: FaultSignature, multiples=PROFILE_MULTIPLES) -> float:
    """Euclidean distance between L2-normalized observed and reference profiles.

    Returns a value in ``[0, sqrt(2)]``.
    """
    obs = np.asarray(peaks, dtype=float)
    if obs.shape != (len(multiples),):
        raise FeatureError(f"expected {len(multiples)} peaks, got {obs.shape}")
    if np.any(obs < 0) or not np.all(np.isfinite(obs)):
        raise FeatureError("peak magnitudes must be finite and >= 0")
    norm = np.linalg.norm(obs)
    if not norm > 0:
        raise FeatureError("observed fault profile is all zero")
    ref = sig.profile(multiples)
    return float(np.linalg.norm(obs / norm - ref / np.linalg.norm(ref)))


def _machine_channels(currents, vibrations, cfgs):
    if len(currents) != 6 or len(vibrations) != 2 or len(cfgs) != 2:
        raise FeatureError("need 6 current channels, 2 vibration channels and 2 machine configs")
    return [(cfgs[m], currents[3 * m : 3 * m + 3], vibrations[m]) for m in range(2)]


def build_baseline(currents, vibrations, cfgs, nw: float = 4.0, k: int = 7) -> Baseline:
    """Reference PSDs from a healthy run of the same two machines."""
    psds = {}
    for cfg, phases, vib in _machine_channels(currents, vibrations, cfgs):
        for sig in phases:
            psds[sig.channel_id] = multitaper_psd(preprocess(sig, cfg.supply_freq_hz), nw, k)
        psds[vib.channel_id] = multitaper_psd(preprocess(vib), nw, k)
    return Baseline(psds)


def build_feature_vector(
    currents,
    vibrations,
    baseline: Baseline,
    cfgs,
    nw: float = 4.0,
    k: int = 7,
    tol_hz: float = BAND_TOL_HZ,
    signatures=SIGNATURES,
) -> FeatureVector:
    """Assemble the 27 features from raw (unpreprocessed) channel records.

    ``currents`` holds generator phases a, b, c followed by motor phases a,
    b, c; ``vibrations`` holds the generator then the motor channel.
    """
    spectral, timedomain = [], []
    profile = np.zeros(len(PROFILE_MULTIPLES))
    for cfg, phases, vib in _machine_channels(currents, vibrations, cfgs):
        fr = cfg.rot_freq_hz
        targets = [cfg.pole_pairs * m * fr for m in PROFILE_MULTIPLES]
        for sig in phases:
            psd = multitaper_psd(preprocess(sig, cfg.supply_freq_hz), nw, k)
            amps = np.sqrt(extract_peak_magnitudes(psd, targets, tol_hz))
            rms = bands_rms(psd, [(f - tol_hz, f + tol_hz) for f in targets])
            spectral += [amps[1], amps[2], rms]
            profile += amps
        v = preprocess(vib)
        vpsd = multitaper_psd(v, nw, k)
        timedomain += [
            form_factor(v.samples),
            kurtosis(v.samples),
            entropy_deviation(vpsd, baseline, vib.channel_id),
        ]
    profile = profile / 6 + PROFILE_FLOOR
    distances = [signature_distance(profile, s) for s in signatures]
    return FeatureVector(np.array(spectral + timedomain + distances))
