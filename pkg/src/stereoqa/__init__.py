"""Stereo coding artifact toolkit: degradation generation, objective audio
quality metrics (masking/NMR, envelope timbre, binaural cues), fusion rules,
and MUSHRA correlation analysis."""

from .audio import (AudioBuffer, LevelCalibration, calibration_gain,
                    from_mid_side, load_wav, lowpass_anchor, mono_anchor,
                    save_wav, to_mid_side)
from .binaural import (BinauralCueTrack, CueDistortion, binaural_quality,
                       cue_distortion, extract_cues)
from .degrade import (QualityLevelTable, TreatmentSpec, apply_quantization_noise,
                      apply_spectral_holes, apply_treatment, build_condition_set)
from .evalstats import (CorrelationReport, ci95, exclude_anchors,
                        fit_third_order_mapping, group_report, ingest_scores,
                        pearson, pool_fisher)
from .fusion import FusedScore, HingeModel, fit_regression, min_rule, predict
from .masking import MaskingThreshold, NmrScore, masking_threshold, nmr
from .spectral import Spectrogram, istft, stft
from .timbre import TimbreScore, modulation_timbre_score

__version__ = "0.1.0"
