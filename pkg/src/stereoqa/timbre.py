"""Envelope-correlation timbre similarity with three stereo-handling modes.

The internal representation per channel is a 24-band Bark-spaced envelope:
magnitude STFT band amplitudes, compressed with exponent 0.3 and smoothed
with an 8 Hz lowpass along time.  Similarity is the Pearson correlation of
reference and SUT representations at zero lag.  The three channel modes
mirror common strategies for feeding stereo material to a monaural model:
score each channel and average, concatenate the channels in time, or
normalize away static inter-channel level differences first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .audio import AudioBuffer
from .masking import band_power
from .spectral import DEFAULT_HOP, DEFAULT_WINDOW_LENGTH, stft

CHANNEL_MODES = ("average", "concatenate", "ild_normalize")
COMPRESSION_EXPONENT = 0.3
ENVELOPE_LOWPASS_HZ = 8.0


@dataclass(frozen=True)
class TimbreScore:
    similarity: float
    channel_mode: str


def channel_envelopes(channel, sample_rate_hz,
                      window_length=DEFAULT_WINDOW_LENGTH, hop=DEFAULT_HOP):
    """(n_frames, 24) compressed, smoothed Bark band envelopes."""
    spec = stft(np.asarray(channel, dtype=np.float64), sample_rate_hz,
                window_length, hop)
    env = np.sqrt(band_power(spec)) ** COMPRESSION_EXPONENT
    if env.shape[0] > 8:
        # drop frames overlapping the analysis zero-padding: their shared
        # fade-in/fade-out would correlate any two signals
        env = env[2:-2]
    frame_rate = sample_rate_hz / hop
    sos = sps.butter(2, ENVELOPE_LOWPASS_HZ / (frame_rate / 2.0), output="sos")
    if env.shape[0] > 15:  # sosfiltfilt needs a minimum signal length
        env = sps.sosfiltfilt(sos, env, axis=0)
    return env


def _correlation(a, b) -> float:
    # center each band's envelope so the shared long-term spectral profile
    # does not dominate; what remains is the modulation pattern
    a = (a - a.mean(axis=0, keepdims=True)).ravel()
    b = (b - b.mean(axis=0, keepdims=True)).ravel()
    denom = np.linalg.norm(a) * np.linalg.norm(b)
    if denom == 0.0:
        return 1.0 if np.allclose(a, b) else 0.0
    return float(np.clip(np.dot(a, b) / denom, -1.0, 1.0))


def modulation_timbre_score(reference: AudioBuffer, sut: AudioBuffer,
                            channel_mode="average",
                            window_length=DEFAULT_WINDOW_LENGTH,
                            hop=DEFAULT_HOP) -> TimbreScore:
    if channel_mode not in CHANNEL_MODES:
        raise ValueError(f"unknown channel_mode {channel_mode!r}, expected one of {CHANNEL_MODES}")
    if reference.n_samples != sut.n_samples:
        raise ValueError("reference and SUT lengths differ; align inputs first")
    if reference.n_channels != sut.n_channels:
        raise ValueError("reference and SUT channel counts differ")

    rate = reference.sample_rate_hz
    sut_samples = sut.samples
    if channel_mode == "ild_normalize":
        # Rescale each SUT channel to the long-term RMS of its reference
        # counterpart so static level differences carry no penalty.
        scaled = []
        for ch in range(reference.n_channels):
            ref_rms = np.sqrt(np.mean(reference.samples[ch] ** 2))
            sut_rms = np.sqrt(np.mean(sut_samples[ch] ** 2))
            gain = ref_rms / sut_rms if sut_rms > 0 else 1.0
            scaled.append(sut_samples[ch] * gain)
        sut_samples = np.stack(scaled)

    ref_reps = [channel_envelopes(reference.samples[ch], rate, window_length, hop)
                for ch in range(reference.n_channels)]
    sut_reps = [channel_envelopes(sut_samples[ch], rate, window_length, hop)
                for ch in range(reference.n_channels)]

    if channel_mode == "concatenate":
        similarity = _correlation(np.concatenate(ref_reps, axis=0),
                                  np.concatenate(sut_reps, axis=0))
    else:
        similarity = float(np.mean([_correlation(r, s)
                                    for r, s in zip(ref_reps, sut_reps)]))
    return TimbreScore(similarity, channel_mode)
