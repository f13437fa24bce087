"""Spectral estimation: FFT magnitude, DPSS tapers, multitaper PSD, Park vector.

Power values in a :class:`PsdEstimate` are one-sided and per bin, scaled so
that summing them over all bins gives the mean square of the signal.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .sigsim import SignalRecord

__all__ = [
    "Spectrum",
    "TaperSet",
    "PsdEstimate",
    "SpectralError",
    "fft_magnitude",
    "dpss_tapers",
    "sinc_concentration",
    "periodogram",
    "multitaper_psd",
    "park_vector_spectrum",
    "extract_peak_magnitudes",
    "band_rms",
    "bands_rms",
    "save_spectrum_csv",
]


class SpectralError(ValueError):
    pass


def _freeze(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Spectrum:
    freqs_hz: np.ndarray = field(repr=False)
    magnitudes: np.ndarray = field(repr=False)
    resolution_hz: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "freqs_hz", _freeze(self.freqs_hz))
        object.__setattr__(self, "magnitudes", _freeze(self.magnitudes))

    def at(self, freq_hz: float) -> float:
        """Magnitude at the bin nearest ``freq_hz``."""
        return float(self.magnitudes[int(round(freq_hz / self.resolution_hz))])


@dataclass(frozen=True)
class PsdEstimate:
    freqs_hz: np.ndarray = field(repr=False)
    power: np.ndarray = field(repr=False)
    method: str = "multitaper"

    def __post_init__(self):
        if self.method not in ("periodogram", "multitaper"):
            raise SpectralError(f"unknown PSD method {self.method!r}")
        object.__setattr__(self, "freqs_hz", _freeze(self.freqs_hz))
        object.__setattr__(self, "power", _freeze(self.power))

    @property
    def resolution_hz(self) -> float:
        return float(self.freqs_hz[1] - self.freqs_hz[0])

    @property
    def nyquist_hz(self) -> float:
        return float(self.freqs_hz[-1])


@dataclass(frozen=True)
class TaperSet:
    n: int
    nw: float
    k: int
    tapers: np.ndarray = field(repr=False)
    concentrations: np.ndarray = field(repr=False)


def _samples(sig):
    x = np.asarray(sig.samples if isinstance(sig, SignalRecord) else sig, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise SpectralError("signal must be 1-D with at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise SpectralError("signal contains non-finite samples")
    return x


def _freqs(n, fs):
    return np.fft.rfftfreq(n, d=1.0 / fs)


def _one_sided_weights(n):
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    return w


def fft_magnitude(sig: SignalRecord) -> Spectrum:
    """One-sided amplitude spectrum.

    A unit-amplitude sinusoid centred on a bin shows magnitude 1 there, and a
    constant ``c`` shows magnitude ``c`` at 0 Hz.
    """
    x = _samples(sig)
    n = len(x)
    mag = np.abs(np.fft.rfft(x)) * _one_sided_weights(n) / n
    return Spectrum(_freqs(n, sig.fs_hz), mag, sig.fs_hz / n)


def sinc_concentration(taper, w):
    """Fraction of ``taper``'s energy inside ``[-w, w]`` (cycles per sample).

    Evaluates ``h' A h`` with the sinc kernel ``A[i, j] = sin(2 pi w (i-j)) /
    (pi (i-j))`` through the taper's autocorrelation, so no n-by-n matrix is
    formed.
    """
    h = np.asarray(taper, dtype=float)
    n = len(h)
    nfft = 1 << (2 * n - 1).bit_length()
    hf = np.fft.rfft(h, nfft)
    r = np.fft.irfft(hf * np.conj(hf), nfft)[:n]
    lags = np.arange(1, n)
    kern = np.sin(2 * np.pi * w * lags) / (np.pi * lags)
    return float(2 * w * r[0] + 2 * np.dot(r[1:], kern))


@lru_cache(maxsize=32)
def _dpss_cached(n, nw, k):
    w = nw / n
    i = np.arange(n)
    diag = ((n - 1 - 2 * i) / 2.0) ** 2 * np.cos(2 * np.pi * w)
    off = i[1:] * (n - i[1:]) / 2.0
    try:
        _, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(n - k, n - 1))
    except LinAlgError as exc:
        raise SpectralError(f"DPSS eigensolver did not converge for n={n}, nw={nw}, k={k}") from exc
    tapers = vecs[:, ::-1].T.copy()

    centre = np.arange(n) - (n - 1) / 2.0
    for order, h in enumerate(tapers):
        h /= np.linalg.norm(h)
        stat = h.sum() if order % 2 == 0 else np.dot(centre, h)
        if stat < 0:
            h *= -1
    lam = np.array([sinc_concentration(h, w) for h in tapers])
    tapers.setflags(write=False)
    lam.setflags(write=False)
    return TaperSet(n, nw, k, tapers, lam)


def dpss_tapers(n: int, nw: float = 4.0, k: int = 7) -> TaperSet:
    """Discrete prolate spheroidal sequences.

    Parameters
    ----------
    n : int
        Taper length, at least 8.
    nw : float
        Time-bandwidth product; the half bandwidth is ``nw / n`` cycles per
        sample.
    k : int
        Number of tapers, ordered by decreasing concentration.

    Returns
    -------
    TaperSet
        ``tapers`` has shape ``(k, n)`` with unit-norm rows. Even-order tapers
        have positive sum, odd-order tapers a positive first moment about the
        midpoint.
    """
    n, k = int(n), int(k)
    if n < 8:
        raise SpectralError(f"n must be >= 8, got {n}")
    if not 0 < nw < n / 2:
        raise SpectralError(f"nw must lie in (0, n/2), got {nw}")
    if not 1 <= k <= n:
        raise SpectralError(f"k must lie in [1, n], got {k}")
    if k > 2 * nw:
        warnings.warn(f"k={k} exceeds 2*nw={2 * nw}; higher tapers leak badly", stacklevel=2)
    return _dpss_cached(n, float(nw), k)


def _eigenspectra(x, tapers):
    n = len(x)
    spec = np.abs(np.fft.rfft(tapers * x, axis=-1)) ** 2
    return spec * _one_sided_weights(n) / n


def periodogram(sig: SignalRecord) -> PsdEstimate:
    """Window-free periodogram, same scaling as :func:`multitaper_psd`."""
    x = _samples(sig)
    n = len(x)
    rect = np.full((1, n), 1.0 / np.sqrt(n))
    return PsdEstimate(_freqs(n, sig.fs_hz), _eigenspectra(x, rect)[0], "periodogram")


def multitaper_psd(sig: SignalRecord, nw: float = 4.0, k: int = 7) -> PsdEstimate:
    """Thomson multitaper estimate with unweighted averaging of ``k`` eigenspectra."""
    x = _samples(sig)
    ts = dpss_tapers(len(x), nw, k)
    power = _eigenspectra(x, ts.tapers).mean(axis=0)
    return PsdEstimate(_freqs(len(x), sig.fs_hz), power, "multitaper")


def park_vector_spectrum(ia: SignalRecord, ib: SignalRecord, ic: SignalRecord) -> Spectrum:
    """FFT magnitude of the Park vector modulus of a three-phase set."""
    a, b, c = (_samples(s) for s in (ia, ib, ic))
    if not (len(a) == len(b) == len(c)):
        raise SpectralError(f"phase lengths differ: {len(a)}, {len(b)}, {len(c)}")
    if not (ia.fs_hz == ib.fs_hz == ic.fs_hz):
        raise SpectralError("phases have different sampling rates")
    i_d = np.sqrt(2 / 3) * a - b / np.sqrt(6) - c / np.sqrt(6)
    i_q = (b - c) / np.sqrt(2)
    modulus = ia.with_samples(np.hypot(i_d, i_q))
    return fft_magnitude(modulus)


def _window(psd, lo, hi):
    f = psd.freqs_hz
    return (f >= lo - 1e-9) & (f <= hi + 1e-9)


def extract_peak_magnitudes(psd: PsdEstimate, targets_hz, tol_hz: float = 2.0) -> list[float]:
    """Maximum power within ``tol_hz`` of each target frequency."""
    if tol_hz < psd.resolution_hz - 1e-12:
        raise SpectralError(f"tol_hz={tol_hz} is below the resolution {psd.resolution_hz}")
    out = []
    for target in targets_hz:
        if not 0 <= target <= psd.nyquist_hz:
            raise SpectralError(f"target {target} Hz outside [0, {psd.nyquist_hz}]")
        out.append(float(psd.power[_window(psd, target - tol_hz, target + tol_hz)].max()))
    return out


def band_rms(psd: PsdEstimate, lo_hz: float, hi_hz: float) -> float:
    """Square root of the summed power in ``[lo_hz, hi_hz]``."""
    if not 0 <= lo_hz < hi_hz:
        raise SpectralError(f"invalid band [{lo_hz}, {hi_hz}]")
    if hi_hz > psd.nyquist_hz + 1e-9:
        raise SpectralError(f"band edge {hi_hz} Hz above Nyquist {psd.nyquist_hz}")
    return float(np.sqrt(psd.power[_window(psd, lo_hz, hi_hz)].sum()))


def bands_rms(psd: PsdEstimate, bands) -> float:
    """Like :func:`band_rms` over the union of several bands (no double counting)."""
    mask = np.zeros(len(psd.freqs_hz), dtype=bool)
    for lo, hi in bands:
        if not 0 <= lo < hi:
            raise SpectralError(f"invalid band [{lo}, {hi}]")
        mask |= _window(psd, lo, hi)
    return float(np.sqrt(psd.power[mask].sum()))


def save_spectrum_csv(spec, path):
    values = spec.power if isinstance(spec, PsdEstimate) else spec.magnitudes
    np.savetxt(
        path,
        np.column_stack([spec.freqs_hz, values]),
        delimiter=",",
        header="freq_hz,power",
        comments="",
        fmt=["%.6f", "%.9e"],
    )
    return path
