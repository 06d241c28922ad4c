"""Run configuration: flat typed keys with documented defaults, loaded from YAML."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .degrade import EXPERIMENTS


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # paths
    manifest: str = "manifest.csv"
    out_dir: str = "out"

    # degradation
    seed: int = 0
    experiments: list = field(default_factory=lambda: list(EXPERIMENTS))
    mix_levels: list = field(default_factory=lambda: ["Q2", "Q4"])
    persistent_holes: bool = False
    qn_target_nmr_db: dict = field(default_factory=lambda: {
        "Q1": 12.0, "Q2": 6.0, "Q3": 0.0, "Q4": -6.0, "Q5": -12.0})
    sh_hole_density: dict = field(default_factory=lambda: {
        "Q1": 0.40, "Q2": 0.30, "Q3": 0.20, "Q4": 0.10, "Q5": 0.05})
    sh_hole_width_bands: int = 4

    # level conventions (dB SPL)
    full_scale_spl_db: float = 100.0
    nmr_target_spl_db: float = 92.0       # masking-model metrics
    timbre_target_spl_db: float = 100.0   # envelope metric, amplitude 1 = 100 dB SPL
    binaural_target_spl_db: float = 65.0  # binaural cue metrics

    # analysis geometry
    stft_window_length: int = 2048
    stft_hop: int = 1024
    binaural_frame_ms: float = 20.0
    binaural_weights: list = field(default_factory=lambda: [1.0, 1.0, 1.0])

    # evaluation
    groupings: list = field(default_factory=lambda: [
        "per_experiment", "per_item", "hardpan_split"])
    drop_mono_anchor: bool = False
    render_figures: bool = True

    def validate(self) -> "RunConfig":
        unknown = set(self.experiments) - set(EXPERIMENTS)
        if unknown:
            raise ConfigError(f"unknown experiment(s) {sorted(unknown)}")
        for grouping in self.groupings:
            if grouping not in ("per_experiment", "per_item", "hardpan_split"):
                raise ConfigError(f"unknown grouping {grouping!r}")
        if len(self.binaural_weights) != 3 or min(self.binaural_weights) < 0:
            raise ConfigError("binaural_weights must be three non-negative numbers")
        return self


def load_config(path: str | Path | None) -> RunConfig:
    """Load a YAML config; missing keys fall back to defaults, unknown keys fail."""
    if path is None:
        return RunConfig().validate()
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping of keys")
    known = {f.name: f.type for f in fields(RunConfig)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")
    return RunConfig(**raw).validate()
