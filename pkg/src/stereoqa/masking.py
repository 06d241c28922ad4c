"""Psychoacoustic masking model on a 24-band Bark partition and the NMR metric.

The masking model is deliberately simple and level-linear: per STFT frame,
Bark-band energies are spread with a triangular level-independent spreading
function (+27 dB/Bark below the masker, -10 dB/Bark above), lowered by a
fixed 18 dB masking offset, and floored at the threshold in quiet.  Tonality
adaptation is not modeled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer
from .spectral import DEFAULT_HOP, DEFAULT_WINDOW_LENGTH, Spectrogram, hann_window, stft

N_BARK_BANDS = 24
SPREAD_LOWER_DB_PER_BARK = 27.0   # slope toward maskees below the masker
SPREAD_UPPER_DB_PER_BARK = -10.0  # slope toward maskees above the masker
MASKING_OFFSET_DB = 18.0
NMR_FLOOR_DB = -100.0
SILENCE_GATE_DB = 60.0            # frames this far below the file peak are skipped


def hz_to_bark(f_hz):
    """Closed-form Bark mapping z(f) = 13 atan(0.00076 f) + 3.5 atan((f/7500)^2)."""
    f = np.asarray(f_hz, dtype=np.float64)
    return 13.0 * np.arctan(0.00076 * f) + 3.5 * np.arctan((f / 7500.0) ** 2)


def threshold_in_quiet_db(f_hz):
    """Standard absolute-threshold approximation, in dB SPL."""
    f = np.maximum(np.asarray(f_hz, dtype=np.float64), 20.0)
    khz = f / 1000.0
    return (3.64 * khz ** -0.8
            - 6.5 * np.exp(-0.6 * (khz - 3.3) ** 2)
            + 1e-3 * khz ** 4)


def bark_band_of_bins(n_bins, window_length, sample_rate_hz):
    """Map each rfft bin to one of the 24 unit-Bark bands."""
    freqs = np.fft.rfftfreq(window_length, d=1.0 / sample_rate_hz)
    z = hz_to_bark(freqs)
    return np.clip(z.astype(int), 0, N_BARK_BANDS - 1)


def _spreading_matrix():
    centers = np.arange(N_BARK_BANDS) + 0.5
    dz = centers[None, :] - centers[:, None]  # maskee minus masker
    slope_db = np.where(dz >= 0, SPREAD_UPPER_DB_PER_BARK * dz,
                        SPREAD_LOWER_DB_PER_BARK * dz)
    return 10.0 ** (slope_db / 10.0)  # (masker, maskee) power weights


_SPREAD = _spreading_matrix()


@dataclass(frozen=True)
class MaskingThreshold:
    """Per-frame, per-Bark-band masking threshold levels in dB (SPL convention)."""

    threshold_db: np.ndarray     # (n_frames, 24)
    band_energy_db: np.ndarray   # (n_frames, 24) signal band levels, same scale
    frame_gate: np.ndarray       # (n_frames,) bool, True = frame enters aggregation
    sample_rate_hz: int
    window_length: int
    hop: int


def band_power(spec: Spectrogram) -> np.ndarray:
    """Bark-band mean-square power per frame, sine-calibrated.

    The center bin of a full-scale sinusoid contributes a power of 0.5
    (the Hann mainlobe total within one band is 0.75), so the 0.5
    reference in 10*log10(P/0.5) + full_scale_spl_db puts band levels on
    a dB SPL scale; the fixed mainlobe factor is common to signal, error,
    and threshold and cancels in level ratios.
    """
    window = hann_window(spec.window_length)
    coherent_gain = window.sum()
    power = np.abs(spec.data) ** 2 * (2.0 / coherent_gain ** 2)
    power[:, 0] *= 0.5
    power[:, -1] *= 0.5
    bands = bark_band_of_bins(spec.n_bins, spec.window_length, spec.sample_rate_hz)
    out = np.zeros((spec.n_frames, N_BARK_BANDS))
    for b in range(N_BARK_BANDS):
        sel = bands == b
        if sel.any():
            out[:, b] = power[:, sel].sum(axis=1)
    return out


def _band_quiet_thresholds(window_length, sample_rate_hz):
    freqs = np.fft.rfftfreq(window_length, d=1.0 / sample_rate_hz)
    bands = bark_band_of_bins(freqs.size, window_length, sample_rate_hz)
    quiet = threshold_in_quiet_db(freqs)
    out = np.full(N_BARK_BANDS, 120.0)
    for b in range(N_BARK_BANDS):
        sel = bands == b
        if sel.any():
            out[b] = quiet[sel].min()
    return out


def masking_threshold(channel, sample_rate_hz,
                      full_scale_spl_db=100.0,
                      window_length=DEFAULT_WINDOW_LENGTH,
                      hop=DEFAULT_HOP) -> MaskingThreshold:
    """Masking threshold of one channel, frames x 24 Bark bands, in dB SPL."""
    spec = stft(channel, sample_rate_hz, window_length, hop)
    power = band_power(spec)
    level_offset = full_scale_spl_db - 10.0 * np.log10(0.5)
    band_db = 10.0 * np.log10(np.maximum(power, 1e-30)) + level_offset

    spread = power @ _SPREAD
    spread_db = 10.0 * np.log10(np.maximum(spread, 1e-30)) + level_offset
    quiet_db = _band_quiet_thresholds(window_length, sample_rate_hz)
    threshold_db = np.maximum(spread_db - MASKING_OFFSET_DB, quiet_db[None, :])

    frame_db = 10.0 * np.log10(np.maximum(power.sum(axis=1), 1e-30))
    gate = frame_db > frame_db.max() - SILENCE_GATE_DB
    return MaskingThreshold(threshold_db, band_db, gate, sample_rate_hz,
                            window_length, hop)


@dataclass(frozen=True)
class NmrScore:
    """Noise-to-mask ratio per channel and the L/R average, in dB."""

    per_channel_nmr_db: tuple
    mean_nmr_db: float


def nmr_channel(reference, error, sample_rate_hz, full_scale_spl_db=100.0,
                window_length=DEFAULT_WINDOW_LENGTH, hop=DEFAULT_HOP,
                threshold: MaskingThreshold | None = None) -> float:
    """NMR of one channel given the reference and the error signal.

    Power-domain average of (error band energy / masking threshold) over
    all bands of reference frames above the silence gate, in dB, floored
    at -100 dB.
    """
    if threshold is None:
        threshold = masking_threshold(reference, sample_rate_hz, full_scale_spl_db,
                                      window_length, hop)
    spec = stft(np.asarray(error, dtype=np.float64), sample_rate_hz,
                window_length, hop)
    level_offset = full_scale_spl_db - 10.0 * np.log10(0.5)
    err_db = 10.0 * np.log10(np.maximum(band_power(spec), 1e-30)) + level_offset

    gate = threshold.frame_gate
    if not gate.any():
        return NMR_FLOOR_DB
    ratio = 10.0 ** ((err_db[gate] - threshold.threshold_db[gate]) / 10.0)
    return max(10.0 * np.log10(max(ratio.mean(), 1e-30)), NMR_FLOOR_DB)


def nmr(reference: AudioBuffer, sut: AudioBuffer,
        window_length=DEFAULT_WINDOW_LENGTH, hop=DEFAULT_HOP) -> NmrScore:
    """NMR of a stereo (or mono) pair; channel scores are averaged in dB."""
    if reference.n_samples != sut.n_samples:
        raise ValueError("reference and SUT lengths differ; align inputs first")
    if reference.sample_rate_hz != sut.sample_rate_hz:
        raise ValueError("reference and SUT sample rates differ")
    if reference.n_channels != sut.n_channels:
        raise ValueError("reference and SUT channel counts differ")

    per_channel = []
    for ch in range(reference.n_channels):
        error = sut.samples[ch] - reference.samples[ch]
        per_channel.append(nmr_channel(reference.samples[ch], error,
                                       reference.sample_rate_hz,
                                       reference.full_scale_spl_db,
                                       window_length, hop))
    return NmrScore(tuple(per_channel), float(np.mean(per_channel)))
