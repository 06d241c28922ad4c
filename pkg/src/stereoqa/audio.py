"""Audio containers, Mid/Side transforms, level calibration, and MUSHRA anchors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from . import wavio

SUPPORTED_RATES = (44100, 48000)
DEFAULT_FULL_SCALE_SPL_DB = 100.0

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class AudioBuffer:
    """Multi-channel sampled audio.

    samples has shape (channels, n) with values nominally in [-1, 1].
    full_scale_spl_db is the SPL assigned to a full-scale (amplitude 1)
    sinusoid, default 100 dB SPL.
    """

    sample_rate_hz: int
    samples: np.ndarray
    full_scale_spl_db: float = DEFAULT_FULL_SCALE_SPL_DB

    def __post_init__(self):
        samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        if samples.shape[0] not in (1, 2):
            raise ValueError(f"expected 1 or 2 channels, got {samples.shape[0]}")
        if self.sample_rate_hz not in SUPPORTED_RATES:
            raise ValueError(f"sample rate {self.sample_rate_hz} not in {SUPPORTED_RATES}")
        if not np.isfinite(self.full_scale_spl_db):
            raise ValueError("full_scale_spl_db must be finite")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def channel(self, i: int) -> np.ndarray:
        return self.samples[i]

    def with_samples(self, samples) -> "AudioBuffer":
        return AudioBuffer(self.sample_rate_hz, samples, self.full_scale_spl_db)


def load_wav(path, full_scale_spl_db=DEFAULT_FULL_SCALE_SPL_DB) -> AudioBuffer:
    samples, rate = wavio.read_wav(path)
    return AudioBuffer(rate, samples, full_scale_spl_db)


def save_wav(buffer: AudioBuffer, path, bit_depth=24) -> None:
    wavio.write_wav(path, buffer.samples, buffer.sample_rate_hz, bit_depth)


def _require_stereo(buffer: AudioBuffer, what: str) -> None:
    if buffer.n_channels != 2:
        raise ValueError(f"{what} requires a stereo buffer, got {buffer.n_channels} channel(s)")


def to_mid_side(buffer: AudioBuffer) -> AudioBuffer:
    """Orthonormal Mid/Side encode: M = (L+R)/sqrt2, S = (L-R)/sqrt2."""
    _require_stereo(buffer, "to_mid_side")
    left, right = buffer.samples
    return buffer.with_samples(np.stack([(left + right) / SQRT2, (left - right) / SQRT2]))


def from_mid_side(buffer: AudioBuffer) -> AudioBuffer:
    """Inverse of to_mid_side: L = (M+S)/sqrt2, R = (M-S)/sqrt2."""
    _require_stereo(buffer, "from_mid_side")
    mid, side = buffer.samples
    return buffer.with_samples(np.stack([(mid + side) / SQRT2, (mid - side) / SQRT2]))


@dataclass(frozen=True)
class LevelCalibration:
    """Playback level convention: gain that maps the digital full scale to a target SPL."""

    target_spl_db: float
    full_scale_spl_db: float = DEFAULT_FULL_SCALE_SPL_DB


def calibration_gain(calibration: LevelCalibration) -> float:
    gain = 10.0 ** ((calibration.target_spl_db - calibration.full_scale_spl_db) / 20.0)
    if not (np.isfinite(gain) and gain > 0):
        raise ValueError(f"non-finite calibration gain for {calibration}")
    return gain


def _anchor_fir(cutoff_hz: float, sample_rate_hz: int) -> np.ndarray:
    # Transition band cutoff..1.5*cutoff; Hamming-window design gives ~53 dB
    # stopband, comfortably past the 40 dB requirement.
    transition_hz = 0.5 * cutoff_hz
    numtaps = int(np.ceil(4.0 * sample_rate_hz / transition_hz)) | 1
    return sps.firwin(numtaps, 1.22 * cutoff_hz, fs=sample_rate_hz)


def lowpass_anchor(buffer: AudioBuffer, cutoff_hz: float) -> AudioBuffer:
    """MUSHRA lowpass anchor (3.5 or 7 kHz), linear phase with delay compensation."""
    if cutoff_hz >= buffer.sample_rate_hz / 2:
        raise ValueError(f"cutoff {cutoff_hz} Hz above Nyquist")
    taps = _anchor_fir(cutoff_hz, buffer.sample_rate_hz)
    delay = (len(taps) - 1) // 2
    out = np.empty_like(buffer.samples)
    for i in range(buffer.n_channels):
        padded = np.concatenate([buffer.samples[i], np.zeros(delay)])
        out[i] = sps.lfilter(taps, 1.0, padded)[delay:]
    return buffer.with_samples(out)


def mono_anchor(buffer: AudioBuffer) -> AudioBuffer:
    """Mono anchor: both channels replaced by the L/R average."""
    _require_stereo(buffer, "mono_anchor")
    mono = buffer.samples.mean(axis=0)
    return buffer.with_samples(np.stack([mono, mono]))
