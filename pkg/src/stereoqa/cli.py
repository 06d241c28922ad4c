"""Command-line front end: degrade -> assess -> evaluate.

`degrade` renders every experiment's condition set to WAV files with
sidecar parameter files and a machine-readable index.  `assess` computes
the objective metrics for each (reference, condition) pair in the index.
`evaluate` joins objective values with subjective MUSHRA scores and writes
correlation reports (CSV + JSON + figures).

Exit codes: 0 success (warnings allowed), 1 runtime failure, 2 usage or
config error.
"""

from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path

import click
import numpy as np
import pandas as pd

from . import binaural, degrade as degrade_mod, evalstats, fixtures, fusion, masking, timbre
from .audio import AudioBuffer, load_wav
from .audio import save_wav
from .config import ConfigError, RunConfig, load_config
from .degrade import EXPERIMENTS, QualityLevelTable
from .report import render_report_figures

METRIC_NAMES = ("nmr_db", "timbre_average", "timbre_concatenate",
                "timbre_ild_normalize", "d_ild_db", "d_itd_us", "d_iacc",
                "binaural_quality", "fused_min_rule")


def _load_run_config(config_path, out=None, seed=None, experiments=None) -> RunConfig:
    try:
        cfg = load_config(config_path)
        if out is not None:
            cfg.out_dir = str(out)
        if seed is not None:
            cfg.seed = seed
        if experiments:
            cfg.experiments = [e.strip() for e in experiments.split(",") if e.strip()]
        return cfg.validate()
    except (ConfigError, FileNotFoundError) as exc:
        raise click.UsageError(str(exc))


def _read_manifest(path) -> pd.DataFrame:
    df = pd.read_csv(path)
    required = {"item", "path"}
    if not required.issubset(df.columns):
        raise click.UsageError(f"{path}: manifest needs columns {sorted(required)}")
    if "hard_panned" not in df.columns:
        df["hard_panned"] = 0
    if df["item"].duplicated().any():
        raise click.UsageError(f"{path}: duplicate item labels")
    return df


def _condition_filename(item, label):
    if label.startswith(("QN", "SH")):
        mode_part, level = label.split("_")
        return f"{item}__{mode_part}__{level}.wav"
    if label == "hidden_reference":
        return f"{item}__ref__hidden.wav"
    return f"{item}__anchor__{label}.wav"


@click.group()
def main():
    """Stereo degradation generation, objective metrics, and MUSHRA evaluation."""


@main.command("make-fixtures")
@click.option("--out", required=True, type=click.Path(), help="Fixture output directory.")
@click.option("--duration", default=2.0, show_default=True, help="Item duration in seconds.")
def make_fixtures(out, duration):
    """Generate the synthetic two-item demo set and its manifest."""
    manifest = fixtures.make_demo_items(out, duration_s=duration)
    click.echo(f"wrote {manifest}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None, help="Override output directory.")
@click.option("--seed", type=int, default=None, help="Override base RNG seed.")
@click.option("--experiments", default=None,
              help=f"Comma-separated subset of {','.join(EXPERIMENTS)}.")
def degrade(config_path, out, seed, experiments):
    """Render condition WAVs, sidecar metadata, and the file index."""
    cfg = _load_run_config(config_path, out, seed, experiments)
    table = QualityLevelTable(cfg.qn_target_nmr_db, cfg.sh_hole_density,
                              cfg.sh_hole_width_bands)
    manifest = _read_manifest(cfg.manifest)
    out_dir = Path(cfg.out_dir)
    cond_dir = out_dir / "conditions"
    cond_dir.mkdir(parents=True, exist_ok=True)

    index_rows = []
    failures = []
    for row in manifest.itertuples():
        try:
            reference = load_wav(row.path, cfg.full_scale_spl_db)
        except (OSError, ValueError) as exc:
            failures.append(f"{row.item}: {exc}")
            click.echo(f"warning: skipping {row.item}: {exc}", err=True)
            continue
        written = {}
        for experiment in cfg.experiments:
            conditions = degrade_mod.build_condition_set(
                reference, experiment, table, cfg.seed,
                mix_levels=tuple(cfg.mix_levels),
                persistent_holes=cfg.persistent_holes)
            for label, buf in conditions.items():
                if label not in written:
                    path = cond_dir / _condition_filename(row.item, label)
                    save_wav(buf, path, bit_depth=24)
                    sidecar = {
                        "item": row.item, "condition": label,
                        "seed": degrade_mod.condition_seed(cfg.seed, label),
                        "quality_levels": {
                            "qn_target_nmr_db": cfg.qn_target_nmr_db,
                            "sh_hole_density": cfg.sh_hole_density,
                            "sh_hole_width_bands": cfg.sh_hole_width_bands},
                    }
                    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
                    written[label] = path
                index_rows.append({"item": row.item, "experiment": experiment,
                                   "condition": label,
                                   "path": str(written[label]),
                                   "reference_path": str(row.path)})

    index = pd.DataFrame(index_rows,
                         columns=["item", "experiment", "condition", "path",
                                  "reference_path"])
    index_path = out_dir / "index.csv"
    index.to_csv(index_path, index=False)
    click.echo(f"wrote {len(index)} index rows to {index_path}")
    if failures and not index_rows:
        raise click.ClickException("no item could be processed")


def _assess_pair(reference: AudioBuffer, sut: AudioBuffer, cfg: RunConfig,
                 ref_cues_cache: dict, ref_key) -> dict:
    values = {}
    gain_nmr = 10.0 ** ((cfg.nmr_target_spl_db - cfg.full_scale_spl_db) / 20.0)
    gain_timbre = 10.0 ** ((cfg.timbre_target_spl_db - cfg.full_scale_spl_db) / 20.0)
    gain_bin = 10.0 ** ((cfg.binaural_target_spl_db - cfg.full_scale_spl_db) / 20.0)

    ref_nmr = reference.with_samples(reference.samples * gain_nmr)
    sut_nmr = sut.with_samples(sut.samples * gain_nmr)
    values["nmr_db"] = masking.nmr(ref_nmr, sut_nmr,
                                   cfg.stft_window_length, cfg.stft_hop).mean_nmr_db

    ref_t = reference.with_samples(reference.samples * gain_timbre)
    sut_t = sut.with_samples(sut.samples * gain_timbre)
    for mode in timbre.CHANNEL_MODES:
        score = timbre.modulation_timbre_score(ref_t, sut_t, mode,
                                               cfg.stft_window_length, cfg.stft_hop)
        values[f"timbre_{mode}"] = score.similarity

    if ref_key not in ref_cues_cache:
        ref_b = reference.with_samples(reference.samples * gain_bin)
        ref_cues_cache[ref_key] = binaural.extract_cues(ref_b, cfg.binaural_frame_ms)
    sut_b = sut.with_samples(sut.samples * gain_bin)
    dist = binaural.cue_distortion(ref_cues_cache[ref_key],
                                   binaural.extract_cues(sut_b, cfg.binaural_frame_ms))
    values["d_ild_db"] = dist.d_ild_db
    values["d_itd_us"] = dist.d_itd_us
    values["d_iacc"] = dist.d_iacc
    bin_q = binaural.binaural_quality(dist, tuple(cfg.binaural_weights))
    values["binaural_quality"] = bin_q

    opm_dual = max(values["timbre_concatenate"], 1e-6) / fusion.MIN_RULE_MONO_SCALE
    values["fused_min_rule"] = fusion.min_rule(opm_dual, bin_q).value
    return values


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--index", "index_path", required=True, type=click.Path(exists=True),
              help="index.csv from the degrade step (or user-provided pairs).")
@click.option("--out", type=click.Path(), default=None,
              help="Objective CSV path [default: <out_dir>/objective.csv].")
def assess(config_path, index_path, out):
    """Compute objective metrics for every (reference, condition) pair."""
    cfg = _load_run_config(config_path)
    index = pd.read_csv(index_path)
    pairs = (index[["item", "condition", "path", "reference_path"]]
             .drop_duplicates()
             .sort_values(["item", "condition"]))

    rows = []
    errors = []
    ref_cache: dict = {}
    ref_cues_cache: dict = {}
    for pair in pairs.itertuples():
        try:
            if pair.reference_path not in ref_cache:
                ref_cache[pair.reference_path] = load_wav(pair.reference_path,
                                                          cfg.full_scale_spl_db)
            reference = ref_cache[pair.reference_path]
            sut = load_wav(pair.path, cfg.full_scale_spl_db)
            if sut.sample_rate_hz != reference.sample_rate_hz:
                raise ValueError("sample-rate mismatch between reference and condition")
            values = _assess_pair(reference, sut, cfg, ref_cues_cache,
                                  pair.reference_path)
        except (OSError, ValueError) as exc:
            errors.append(f"{pair.item}/{pair.condition}: {exc}")
            rows.append({"item": pair.item, "condition": pair.condition,
                         "metric": "__error__", "value": np.nan})
            continue
        for metric in METRIC_NAMES:
            rows.append({"item": pair.item, "condition": pair.condition,
                         "metric": metric, "value": values[metric]})

    frame = pd.DataFrame(rows, columns=["item", "condition", "metric", "value"])
    frame = frame.sort_values(["item", "condition", "metric"]).reset_index(drop=True)
    out_path = Path(out) if out else Path(cfg.out_dir) / "objective.csv"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out_path, index=False, float_format="%.12g")
    click.echo(f"wrote {len(frame)} metric rows to {out_path}")
    if errors:
        click.echo(f"warnings ({len(errors)} pair(s) failed):", err=True)
        for err in errors:
            click.echo(f"  {err}", err=True)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--objective", "objective_path", required=True,
              type=click.Path(exists=True))
@click.option("--subjective", "subjective_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None,
              help="Report directory [default: <out_dir>/report].")
@click.option("--grouping", "groupings", multiple=True,
              type=click.Choice(["per_experiment", "per_item", "hardpan_split"]),
              help="Override config grouping modes (repeatable).")
def evaluate(config_path, objective_path, subjective_path, out, groupings):
    """Correlate objective metrics with subjective scores; write reports."""
    cfg = _load_run_config(config_path)
    try:
        subjective = evalstats.ingest_scores(subjective_path)
    except evalstats.ValidationError as exc:
        raise click.ClickException(f"subjective scores invalid: {exc}")
    objective = pd.read_csv(objective_path)
    objective = objective[objective["metric"] != "__error__"].dropna(subset=["value"])

    hard_panned = {}
    try:
        manifest = _read_manifest(cfg.manifest)
        hard_panned = {r.item: bool(r.hard_panned) for r in manifest.itertuples()}
    except (OSError, click.UsageError):
        warnings.warn("manifest unavailable; hardpan_split uses no flags")

    report_dir = Path(out) if out else Path(cfg.out_dir) / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    frames = []
    for grouping in (list(groupings) or cfg.groupings):
        try:
            rep = evalstats.group_report(subjective, objective, grouping,
                                         hard_panned, drop_mono=cfg.drop_mono_anchor)
        except ValueError as exc:
            raise click.ClickException(f"{grouping}: {exc}")
        frames.append(rep.to_frame())

    report = pd.concat(frames, ignore_index=True)
    csv_path = report_dir / "report.csv"
    report.to_csv(csv_path, index=False, float_format="%.12g")
    json_path = report_dir / "report.json"
    json_path.write_text(json.dumps(report.replace({np.nan: None}).to_dict("records"),
                                    indent=2))
    click.echo(f"wrote {csv_path} and {json_path}")
    if cfg.render_figures:
        for path in render_report_figures(report, report_dir):
            click.echo(f"wrote {path}")


if __name__ == "__main__":
    sys.exit(main())
