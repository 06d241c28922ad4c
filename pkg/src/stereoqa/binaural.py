"""Binaural cue extraction (ILD, ITD, IACC) and reference-vs-SUT cue distortion.

The front end splits each channel into octave-spaced bands with zero-phase
brickwall FFT filters, frames the band signals (default 20 ms, 50% overlap),
and per frame/band computes the interaural level difference, the maximum of
the normalized interaural cross-correlation over lags up to +-1.1 ms, and
its lag as the interaural time difference.  Cells whose band energy is more
than 50 dB below the per-band peak are marked invalid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .audio import AudioBuffer

DEFAULT_FRAME_MS = 20.0
N_BANDS = 10
BAND_RANGE_HZ = (100.0, 12800.0)
MAX_ITD_US = 1100.0
ENERGY_GATE_DB = 50.0


@dataclass(frozen=True)
class BinauralCueTrack:
    """Frames x bands ILD/ITD/IACC with energy weights and validity mask."""

    ild_db: np.ndarray
    itd_us: np.ndarray
    iacc: np.ndarray
    frame_energy: np.ndarray
    valid: np.ndarray
    frame_ms: float
    band_edges_hz: np.ndarray
    sample_rate_hz: int


@dataclass(frozen=True)
class CueDistortion:
    d_ild_db: float
    d_itd_us: float
    d_iacc: float


def octave_band_edges(n_bands=N_BANDS, lo_hz=BAND_RANGE_HZ[0],
                      hi_hz=BAND_RANGE_HZ[1]) -> np.ndarray:
    return np.geomspace(lo_hz, hi_hz, n_bands + 1)


def _bandpass_bank(x, sample_rate_hz, edges):
    """Zero-phase brickwall bandpass of one channel into len(edges)-1 bands."""
    spectrum = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(x.size, d=1.0 / sample_rate_hz)
    bands = np.empty((edges.size - 1, x.size))
    for b in range(edges.size - 1):
        masked = np.where((freqs >= edges[b]) & (freqs < edges[b + 1]),
                          spectrum, 0.0)
        bands[b] = np.fft.irfft(masked, n=x.size)
    return bands


def _band_cues(lch, rch, starts, frame_len, max_lag, fs):
    """Per-frame ILD/ITD/IACC for one band pair of channel signals.

    Both channels use the same frame window (zero outside), so the
    correlation is exactly antisymmetric under a channel swap; the per-lag
    normalization over the overlapping region keeps |rho| = 1 exact for
    pure delays.
    """
    eps = 1e-300
    n_frames = starts.size
    need = starts[-1] + frame_len
    lpad = np.concatenate([lch, np.zeros(max(0, need - lch.size))])
    rpad = np.concatenate([rch, np.zeros(max(0, need - rch.size))])
    frames_l = sliding_window_view(lpad, frame_len)[starts]
    frames_r = sliding_window_view(rpad, frame_len)[starts]
    el = np.einsum("tn,tn->t", frames_l, frames_l)
    er = np.einsum("tn,tn->t", frames_r, frames_r)
    energy = el + er
    ild = 10.0 * np.log10((el + eps) / (er + eps))

    # cross-correlation of the framed signals via FFT (linear for |lag| <= pad)
    n_fft = 1 << int(np.ceil(np.log2(frame_len + max_lag)))
    spec_l = np.fft.rfft(frames_l, n_fft, axis=1)
    spec_r = np.fft.rfft(frames_r, n_fft, axis=1)
    circ = np.fft.irfft(np.conj(spec_l) * spec_r, n_fft, axis=1)
    # lag tau = -max_lag..max_lag; circ[:, tau % n_fft] = sum l(n) r(n+tau)
    corr = np.concatenate([circ[:, n_fft - max_lag:], circ[:, :max_lag + 1]], axis=1)

    # per-lag energies of each channel restricted to the overlap region
    cums_l = np.concatenate([np.zeros((n_frames, 1)),
                             np.cumsum(frames_l ** 2, axis=1)], axis=1)
    cums_r = np.concatenate([np.zeros((n_frames, 1)),
                             np.cumsum(frames_r ** 2, axis=1)], axis=1)
    lags = np.arange(-max_lag, max_lag + 1)
    pos = np.maximum(lags, 0)
    neg = np.maximum(-lags, 0)
    el_lag = cums_l[:, frame_len - pos] - cums_l[:, neg]
    er_lag = cums_r[:, frame_len - neg] - cums_r[:, pos]
    mag = np.abs(corr) / np.sqrt((el_lag + eps) * (er_lag + eps))

    peak = np.argmax(mag, axis=1)
    iacc = np.minimum(mag[np.arange(n_frames), peak], 1.0)
    itd = np.zeros(n_frames)
    for t in range(n_frames):
        k = peak[t]
        frac = 0.0
        # an on-grid exact match (|rho| ~ 1) needs no sub-sample refinement
        if 0 < k < lags.size - 1 and mag[t, k] < 1.0 - 1e-9:
            denom = mag[t, k - 1] - 2.0 * mag[t, k] + mag[t, k + 1]
            if denom < -1e-15:
                frac = 0.5 * (mag[t, k - 1] - mag[t, k + 1]) / denom
                frac = float(np.clip(frac, -0.5, 0.5))
        itd[t] = (k - max_lag + frac) / fs * 1e6
    return ild, itd, iacc, energy


def extract_cues(buffer: AudioBuffer, frame_ms=DEFAULT_FRAME_MS,
                 band_edges_hz=None) -> BinauralCueTrack:
    if buffer.n_channels != 2:
        raise ValueError("extract_cues requires a stereo buffer")
    fs = buffer.sample_rate_hz
    edges = np.asarray(band_edges_hz if band_edges_hz is not None
                       else octave_band_edges(), dtype=np.float64)

    frame_len = int(round(frame_ms * 1e-3 * fs))
    hop = max(1, frame_len // 2)
    max_lag = min(int(MAX_ITD_US * 1e-6 * fs) - 1, frame_len - 1)
    n = buffer.n_samples
    n_frames = max(1, 1 + (n - frame_len) // hop) if n >= frame_len else 1
    starts = hop * np.arange(n_frames)

    left_bands = _bandpass_bank(buffer.samples[0], fs, edges)
    right_bands = _bandpass_bank(buffer.samples[1], fs, edges)
    n_bands = edges.size - 1

    ild = np.zeros((n_frames, n_bands))
    itd = np.zeros((n_frames, n_bands))
    iacc = np.zeros((n_frames, n_bands))
    energy = np.zeros((n_frames, n_bands))
    for b in range(n_bands):
        (ild[:, b], itd[:, b], iacc[:, b],
         energy[:, b]) = _band_cues(left_bands[b], right_bands[b], starts,
                                    frame_len, max_lag, fs)

    peak = energy.max(axis=0, keepdims=True)
    valid = (energy > peak * 10.0 ** (-ENERGY_GATE_DB / 10.0)) & (peak > 0)
    return BinauralCueTrack(ild, itd, iacc, energy, valid, frame_ms, edges, fs)


def cue_distortion(ref: BinauralCueTrack, sut: BinauralCueTrack) -> CueDistortion:
    """Energy-weighted mean absolute cue deviations over reference-valid cells."""
    if ref.ild_db.shape != sut.ild_db.shape:
        raise ValueError("cue track geometries differ")
    weights = np.where(ref.valid, ref.frame_energy, 0.0)
    total = weights.sum()
    if total <= 0:
        return CueDistortion(0.0, 0.0, 0.0)
    weights = weights / total
    return CueDistortion(
        float(np.sum(weights * np.abs(ref.ild_db - sut.ild_db))),
        float(np.sum(weights * np.abs(ref.itd_us - sut.itd_us))),
        float(np.sum(weights * np.abs(ref.iacc - sut.iacc))),
    )


def weighted_mean_itd_us(track: BinauralCueTrack) -> float:
    """Energy-weighted mean ITD over valid cells (aggregate delay estimate)."""
    weights = np.where(track.valid, track.frame_energy, 0.0)
    total = weights.sum()
    if total <= 0:
        return 0.0
    return float(np.sum(weights * track.itd_us) / total)


def binaural_quality(distortion: CueDistortion,
                     weights=(1.0, 1.0, 1.0)) -> float:
    """Scalar degradation score, 0 = transparent, more negative = worse.

    score = -(w_ild * d_ild + w_itd * d_itd/100 + w_iacc * d_iacc * 10);
    the fixed factors bring the three cue scales to comparable magnitudes.
    """
    w_ild, w_itd, w_iacc = weights
    if min(weights) < 0:
        raise ValueError("binaural_quality weights must be non-negative")
    return -(w_ild * distortion.d_ild_db
             + w_itd * distortion.d_itd_us / 100.0
             + w_iacc * distortion.d_iacc * 10.0)
