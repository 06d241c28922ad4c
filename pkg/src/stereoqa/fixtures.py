"""Deterministic synthetic test items.

Real production material cannot be redistributed here, so the demo item
set is synthesized: one wide stereo music-like item and one hard-panned
item (speech-band content in the left channel only over a stereo bed).
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .audio import AudioBuffer, save_wav


def music_like(duration_s=2.0, sample_rate_hz=48000, seed=101,
               decorrelate=0.3) -> AudioBuffer:
    """Stereo music-like signal: vibrato harmonics plus lowpassed noise."""
    rng = np.random.default_rng(seed)
    n = int(duration_s * sample_rate_hz)
    t = np.arange(n) / sample_rate_hz

    def one_channel(rng_ch):
        x = np.zeros(n)
        f0 = 220.0 * 2.0 ** rng_ch.uniform(-0.2, 0.2)
        for k in range(1, 9):
            vibrato = 1.0 + 0.002 * np.sin(2 * np.pi * rng_ch.uniform(4, 7) * t)
            amp = 0.22 / k * (0.6 + 0.4 * np.sin(2 * np.pi * rng_ch.uniform(0.5, 3) * t))
            x += amp * np.sin(2 * np.pi * k * f0 * vibrato * t + rng_ch.uniform(0, 2 * np.pi))
        noise = rng_ch.standard_normal(n)
        spectrum = np.fft.rfft(noise)
        freqs = np.fft.rfftfreq(n, 1 / sample_rate_hz)
        spectrum *= 1.0 / np.sqrt(1.0 + (freqs / 2000.0) ** 2)
        x += 0.06 * np.fft.irfft(spectrum, n) / np.std(noise)
        return x

    common = one_channel(rng)
    left = common + decorrelate * one_channel(rng)
    right = common + decorrelate * one_channel(rng)
    peak = max(np.abs(left).max(), np.abs(right).max())
    scale = 0.6 / peak
    return AudioBuffer(sample_rate_hz, np.stack([left, right]) * scale)


def hard_panned(duration_s=2.0, sample_rate_hz=48000, seed=202) -> AudioBuffer:
    """Speech-band AM tone hard-panned left over a correlated stereo noise bed."""
    rng = np.random.default_rng(seed)
    n = int(duration_s * sample_rate_hz)
    t = np.arange(n) / sample_rate_hz

    syllable = 0.5 * (1.0 + np.sign(np.sin(2 * np.pi * 3.0 * t)))
    speech = np.zeros(n)
    for f in (180.0, 360.0, 540.0, 900.0, 1400.0):
        speech += np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi)) / np.sqrt(f / 180.0)
    speech *= 0.25 * syllable

    bed = rng.standard_normal(n)
    spectrum = np.fft.rfft(bed)
    freqs = np.fft.rfftfreq(n, 1 / sample_rate_hz)
    spectrum *= 1.0 / np.sqrt(1.0 + (freqs / 1500.0) ** 2)
    bed = np.fft.irfft(spectrum, n)
    bed *= 0.02 / np.std(bed)

    left = speech + bed
    right = bed.copy()
    peak = max(np.abs(left).max(), np.abs(right).max())
    scale = 0.7 / peak
    return AudioBuffer(sample_rate_hz, np.stack([left, right]) * scale)


DEMO_ITEMS = (
    ("demoMusic", music_like, False, "Synthetic wide stereo music-like mix"),
    ("panSpeechSynth", hard_panned, True, "Synthetic hard-panned speech over music bed"),
)


def make_demo_items(out_dir, duration_s=2.0) -> Path:
    """Write the two demo items and their manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item", "path", "hard_panned", "description"])
        for label, maker, panned, description in DEMO_ITEMS:
            buf = maker(duration_s=duration_s)
            path = out_dir / f"{label}.wav"
            save_wav(buf, path, bit_depth=24)
            writer.writerow([label, str(path), int(panned), description])
    return manifest
