"""Stereo-coded degradation generators: quantization noise and spectral holes.

Both artifact classes are applied either directly to the left/right
channels (LR mode) or to the orthonormal mid/side transform (MS mode),
with independent noise/hole realizations per processed channel.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .audio import AudioBuffer, from_mid_side, lowpass_anchor, mono_anchor, to_mid_side
from .masking import masking_threshold, nmr_channel, _band_quiet_thresholds
from .spectral import DEFAULT_HOP, DEFAULT_WINDOW_LENGTH, Spectrogram, istft, stft
from . import masking

ARTIFACTS = ("QN", "SH")
MODES = ("LR", "MS")
LEVELS = ("Q1", "Q2", "Q3", "Q4", "Q5")
EXPERIMENTS = ("QNLR", "QNMS", "SHLR", "SHMS", "QNmix", "SHmix")
LOWPASS_ANCHORS_HZ = (3500.0, 7000.0)
HOLE_BAND_RANGE_HZ = (200.0, 16000.0)


@dataclass(frozen=True)
class TreatmentSpec:
    artifact: str  # "QN" or "SH"
    mode: str      # "LR" or "MS"
    level: str     # "Q1".."Q5"
    seed: int

    def __post_init__(self):
        if self.artifact not in ARTIFACTS:
            raise ValueError(f"unknown artifact {self.artifact!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.level not in LEVELS:
            raise ValueError(f"unknown level {self.level!r}")

    @property
    def label(self) -> str:
        return f"{self.artifact}{self.mode}_{self.level}"


@dataclass(frozen=True)
class QualityLevelTable:
    """Per-level degradation parameters, Q1 = worst, Q5 = best.

    The published study defines five levels but not their parameters; these
    defaults anchor Q2 at the 6 dB noise-to-mask figure used for its
    illustration items and step by 6 dB, and are fully overridable.
    """

    qn_target_nmr_db: dict = field(default_factory=lambda: {
        "Q1": 12.0, "Q2": 6.0, "Q3": 0.0, "Q4": -6.0, "Q5": -12.0})
    sh_hole_density: dict = field(default_factory=lambda: {
        "Q1": 0.40, "Q2": 0.30, "Q3": 0.20, "Q4": 0.10, "Q5": 0.05})
    sh_hole_width_bands: int = 4

    def __post_init__(self):
        qn = [self.qn_target_nmr_db[lv] for lv in LEVELS]
        sh = [self.sh_hole_density[lv] for lv in LEVELS]
        if not all(a > b for a, b in zip(qn, qn[1:])):
            raise ValueError("qn_target_nmr_db must strictly decrease from Q1 to Q5")
        if not all(a > b for a, b in zip(sh, sh[1:])):
            raise ValueError("sh_hole_density must strictly decrease from Q1 to Q5")


def apply_quantization_noise(channel, target_nmr_db, seed, sample_rate_hz,
                             full_scale_spl_db=100.0,
                             window_length=DEFAULT_WINDOW_LENGTH,
                             hop=DEFAULT_HOP):
    """Add noise shaped to sit target_nmr_db above the masking threshold.

    Per frame and Bark band the noise band energy targets threshold +
    target_nmr_db with uniformly random phase; frames below the silence
    gate receive noise at the threshold in quiet instead.  After synthesis
    a single broadband gain trims the realized NMR to the target exactly
    (overlap-add resynthesis perturbs per-cell energies slightly).
    Deterministic in the seed.
    """
    channel = np.asarray(channel, dtype=np.float64)
    thr = masking_threshold(channel, sample_rate_hz, full_scale_spl_db,
                            window_length, hop)
    quiet_db = _band_quiet_thresholds(window_length, sample_rate_hz)

    target_db = np.where(thr.frame_gate[:, None],
                         thr.threshold_db + target_nmr_db,
                         quiet_db[None, :])
    # dB (SPL convention) -> band power in the sine-calibrated scale.
    target_power = 0.5 * 10.0 ** ((target_db - full_scale_spl_db) / 10.0)

    n_frames = target_db.shape[0]
    n_bins = window_length // 2 + 1
    rng = np.random.default_rng(seed)
    spec_data = rng.standard_normal((n_frames, n_bins)) \
        + 1j * rng.standard_normal((n_frames, n_bins))

    bands = masking.bark_band_of_bins(n_bins, window_length, sample_rate_hz)
    noise_spec = Spectrogram(spec_data, window_length, hop, sample_rate_hz,
                             channel.size)
    current = masking.band_power(noise_spec)
    scale = np.sqrt(target_power / np.maximum(current, 1e-30))
    spec_data = spec_data * scale[:, bands]

    noise = istft(Spectrogram(spec_data, window_length, hop, sample_rate_hz,
                              channel.size))
    measured = nmr_channel(channel, noise, sample_rate_hz, full_scale_spl_db,
                           window_length, hop, threshold=thr)
    noise *= 10.0 ** ((target_nmr_db - measured) / 20.0)
    return channel + noise


def apply_spectral_holes(channel, hole_density, hole_width_bands, seed,
                         sample_rate_hz, persistent=False,
                         window_length=DEFAULT_WINDOW_LENGTH,
                         hop=DEFAULT_HOP):
    """Zero random groups of STFT bands per frame and resynthesize.

    Holes are hole_width_bands consecutive bins wide and cover about
    hole_density of the bands between 200 Hz and 16 kHz.  With
    persistent=True one hole pattern is reused for all frames.
    """
    if not 0.0 <= hole_density <= 1.0:
        raise ValueError("hole_density must be in [0, 1]")
    channel = np.asarray(channel, dtype=np.float64)
    spec = stft(channel, sample_rate_hz, window_length, hop)

    freqs = spec.bin_freqs_hz
    candidates = np.where((freqs >= HOLE_BAND_RANGE_HZ[0])
                          & (freqs <= HOLE_BAND_RANGE_HZ[1]))[0]
    n_blocks = candidates.size // hole_width_bands
    n_holes = int(round(hole_density * n_blocks))
    data = spec.data.copy()
    if n_holes > 0:
        rng = np.random.default_rng(seed)
        blocks = candidates[:n_blocks * hole_width_bands].reshape(n_blocks,
                                                                  hole_width_bands)
        if persistent:
            chosen = rng.choice(n_blocks, size=n_holes, replace=False)
            data[:, blocks[chosen].ravel()] = 0.0
        else:
            for t in range(spec.n_frames):
                chosen = rng.choice(n_blocks, size=n_holes, replace=False)
                data[t, blocks[chosen].ravel()] = 0.0
    return istft(Spectrogram(data, window_length, hop, sample_rate_hz,
                             channel.size))


def _apply_artifact(channel, spec: TreatmentSpec, table: QualityLevelTable,
                    seed, sample_rate_hz, full_scale_spl_db,
                    persistent_holes=False):
    if spec.artifact == "QN":
        return apply_quantization_noise(channel,
                                        table.qn_target_nmr_db[spec.level],
                                        seed, sample_rate_hz, full_scale_spl_db)
    return apply_spectral_holes(channel, table.sh_hole_density[spec.level],
                                table.sh_hole_width_bands, seed,
                                sample_rate_hz, persistent=persistent_holes)


def apply_treatment(buffer: AudioBuffer, spec: TreatmentSpec,
                    table: QualityLevelTable | None = None,
                    equal_channel_seeds=False,
                    persistent_holes=False) -> AudioBuffer:
    """Apply a treatment in LR or MS mode.

    LR: the artifact is generated independently for L (seed) and R
    (seed XOR 1).  MS: the buffer is mid/side encoded, the artifact is
    applied to M (seed) and S (seed XOR 1), and the result decoded.
    equal_channel_seeds forces both channels onto the same seed (diagnostic).
    """
    if buffer.n_channels != 2:
        raise ValueError("apply_treatment requires a stereo buffer")
    table = table or QualityLevelTable()
    seeds = (spec.seed, spec.seed if equal_channel_seeds else spec.seed ^ 1)

    work = to_mid_side(buffer) if spec.mode == "MS" else buffer
    out = np.stack([
        _apply_artifact(work.samples[ch], spec, table, seeds[ch],
                        buffer.sample_rate_hz, buffer.full_scale_spl_db,
                        persistent_holes)
        for ch in range(2)
    ])
    result = work.with_samples(out)
    if spec.mode == "MS":
        result = from_mid_side(result)
    return result


def condition_seed(base_seed: int, label: str) -> int:
    """Stable per-condition seed: reproducible and independent across labels."""
    return (int(base_seed) * 0x9E3779B1 + zlib.crc32(label.encode())) % 2 ** 64


def build_condition_set(reference: AudioBuffer, experiment: str,
                        table: QualityLevelTable | None = None,
                        base_seed: int = 0,
                        mix_levels=("Q2", "Q4"),
                        persistent_holes=False) -> dict:
    """All conditions of one trial: treatments, anchors, hidden reference.

    Homogeneous experiments (e.g. QNLR) emit the five quality levels plus
    the 3.5/7 kHz lowpass anchors and the hidden reference.  Mix
    experiments emit two LR and two MS levels, both lowpass anchors, a
    mono anchor, and the hidden reference.
    """
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}, expected one of {EXPERIMENTS}")
    if reference.n_channels != 2:
        raise ValueError("build_condition_set requires a stereo reference")
    table = table or QualityLevelTable()

    artifact = experiment[:2]
    conditions: dict[str, AudioBuffer] = {}

    if experiment.endswith("mix"):
        plan = [(mode, level) for mode in MODES for level in mix_levels]
    else:
        mode = experiment[2:]
        plan = [(mode, level) for level in LEVELS]

    for mode, level in plan:
        spec = TreatmentSpec(artifact, mode, level,
                             condition_seed(base_seed, f"{artifact}{mode}_{level}"))
        conditions[spec.label] = apply_treatment(reference, spec, table,
                                                 persistent_holes=persistent_holes)

    for cutoff in LOWPASS_ANCHORS_HZ:
        conditions[f"lp{cutoff:.0f}"] = lowpass_anchor(reference, cutoff)
    if experiment.endswith("mix"):
        conditions["mono"] = mono_anchor(reference)
    conditions["hidden_reference"] = reference
    return conditions
