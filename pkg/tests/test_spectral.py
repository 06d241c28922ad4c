"""STFT/ISTFT geometry, exact reconstruction, and spectral oracles."""

import numpy as np
import pytest

from stereoqa.spectral import Spectrogram, hann_window, istft, stft


def test_hann_periodic():
    w = hann_window(8)
    assert w[0] == 0.0
    assert w[4] == pytest.approx(1.0)
    # periodic: w[k] = w_sym(k) over length+1 grid, so w[1] != w[-1] symmetry broken
    assert np.allclose(w, 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(8) / 8))


def test_roundtrip_exact():
    rng = np.random.default_rng(0)
    for n in (1000, 2048, 5000, 48000):
        x = rng.standard_normal(n)
        y = istft(stft(x, 48000))
        assert y.size == n
        assert np.abs(y - x).max() < 1e-12


def test_roundtrip_short_signal_padded():
    x = np.random.default_rng(1).standard_normal(500)
    spec = stft(x, 48000)
    assert spec.padded
    assert np.abs(istft(spec) - x).max() < 1e-12


def test_geometry():
    spec = stft(np.zeros(48000), 48000, 2048, 1024)
    assert spec.n_bins == 1025
    assert spec.frame_rate_hz == pytest.approx(48000 / 1024)
    assert spec.bin_freqs_hz[0] == 0.0
    assert spec.bin_freqs_hz[-1] == 24000.0
    assert spec.bin_freqs_hz[1] == pytest.approx(48000 / 2048)


def test_sine_peaks_at_expected_bin():
    fs, bin_idx = 48000, 43
    f = bin_idx * fs / 2048
    x = np.sin(2 * np.pi * f * np.arange(fs) / fs)
    spec = stft(x, fs)
    interior = np.abs(spec.data[5:-5])
    assert np.all(interior.argmax(axis=1) == bin_idx)
    # on-bin sine through a Hann window: |X[k]| = A * sum(w) / 2
    expected = hann_window(2048).sum() / 2.0
    assert interior[:, bin_idx] == pytest.approx(expected, rel=1e-6)


def test_window_power_oracle():
    # interior frames of unit white noise: E[|X|^2 summed over rfft bins]
    # equals N * sum(w^2) / 2 + (DC/Nyquist correction), checked loosely
    rng = np.random.default_rng(5)
    x = rng.standard_normal(480000)
    spec = stft(x, 48000)
    w = hann_window(2048)
    power = (np.abs(spec.data[5:-5]) ** 2).sum(axis=1)
    power -= 0.5 * np.abs(spec.data[5:-5, 0]) ** 2
    power -= 0.5 * np.abs(spec.data[5:-5, -1]) ** 2
    expected = 2048 * np.sum(w ** 2) / 2.0
    assert power.mean() == pytest.approx(expected, rel=0.02)


def test_invalid_args():
    with pytest.raises(ValueError):
        stft(np.zeros((2, 100)), 48000)
    with pytest.raises(ValueError):
        stft(np.zeros(100), 48000, window_length=1000)
    with pytest.raises(ValueError):
        stft(np.zeros(100), 48000, window_length=64, hop=128)


def test_modified_spectrum_resynthesis():
    # zeroing everything must give (near) silence back, same length
    x = np.random.default_rng(2).standard_normal(10000)
    spec = stft(x, 48000)
    silent = istft(Spectrogram(np.zeros_like(spec.data), spec.window_length,
                               spec.hop, spec.sample_rate_hz, spec.n_samples))
    assert silent.size == x.size
    assert np.abs(silent).max() == 0.0
