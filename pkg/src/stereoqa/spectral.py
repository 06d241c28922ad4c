"""STFT analysis/resynthesis with Hann windows and weighted overlap-add."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_WINDOW_LENGTH = 2048
DEFAULT_HOP = 1024


@dataclass(frozen=True)
class Spectrogram:
    """Frames x bins complex STFT coefficients plus the analysis geometry."""

    data: np.ndarray            # (n_frames, n_bins) complex
    window_length: int
    hop: int
    sample_rate_hz: int
    n_samples: int              # original signal length, for exact resynthesis trim
    window_kind: str = "hann"
    padded: bool = False        # window longer than the signal, input was zero-padded

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def n_bins(self) -> int:
        return self.data.shape[1]

    @property
    def bin_freqs_hz(self) -> np.ndarray:
        return np.fft.rfftfreq(self.window_length, d=1.0 / self.sample_rate_hz)

    @property
    def frame_rate_hz(self) -> float:
        return self.sample_rate_hz / self.hop


def hann_window(length: int) -> np.ndarray:
    # Periodic Hann, the right variant for overlap-add processing.
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(length) / length)


def stft(x, sample_rate_hz, window_length=DEFAULT_WINDOW_LENGTH, hop=None) -> Spectrogram:
    """Hann STFT.  window_length must be a power of two; default hop is 50%.

    The signal is zero-padded by hop samples at the start and up to a
    whole frame at the end so that every sample is covered by at least
    one full analysis window.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("stft expects a single channel")
    if window_length & (window_length - 1):
        raise ValueError(f"window_length {window_length} is not a power of two")
    if hop is None:
        hop = window_length // 2
    if hop > window_length:
        raise ValueError("hop must not exceed window_length")

    n = x.size
    padded = n < window_length
    n_frames = max(1, int(np.ceil((n + hop) / hop)))
    total = hop + (n_frames - 1) * hop + window_length
    buf = np.zeros(total)
    buf[hop:hop + n] = x

    window = hann_window(window_length)
    idx = np.arange(window_length)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = buf[idx] * window
    data = np.fft.rfft(frames, axis=1)
    return Spectrogram(data, window_length, hop, sample_rate_hz, n, padded=padded)


def istft(spec: Spectrogram) -> np.ndarray:
    """Weighted overlap-add inverse; exact to machine precision for unmodified input."""
    window = hann_window(spec.window_length)
    frames = np.fft.irfft(spec.data, n=spec.window_length, axis=1) * window

    total = spec.hop * (spec.n_frames - 1) + spec.window_length
    acc = np.zeros(total)
    norm = np.zeros(total)
    for m in range(spec.n_frames):
        start = m * spec.hop
        acc[start:start + spec.window_length] += frames[m]
        norm[start:start + spec.window_length] += window ** 2
    acc /= np.maximum(norm, 1e-12)
    return acc[spec.hop:spec.hop + spec.n_samples]
