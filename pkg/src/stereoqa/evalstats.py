"""MUSHRA score ingestion and the correlation analysis pipeline.

Pipeline per group: join per-condition subjective means with objective
metric values, fit a third-order (cubic) mapping from objective to
subjective scale, compute the Pearson correlation of mapped values with
the subjective means, and pool correlations across groups in Fisher's
z-domain.  Lowpass anchors are excluded before any analysis; the mono
anchor is retained by default.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import optimize

EXPERIMENTS = ("QNLR", "QNMS", "SHLR", "SHMS", "QNmix", "SHmix")
LOWPASS_ANCHOR_CONDITIONS = ("lp3500", "lp7000")
MONO_ANCHOR_CONDITION = "mono"
SUBJECTIVE_COLUMNS = ("item", "experiment", "condition", "listener_id", "score")
OBJECTIVE_COLUMNS = ("item", "condition", "metric", "value")
MIN_GROUP_POINTS = 5
R_CLAMP = 1.0 - 1e-7


class ValidationError(ValueError):
    """Input table fails schema or range checks; message lists the rows."""


@dataclass(frozen=True)
class GroupResult:
    grouping: str
    group: str
    metric: str
    r: float
    n: int
    ci95_hi: float
    ci95_lo: float


@dataclass(frozen=True)
class CorrelationReport:
    groups: list
    pooled: dict  # (grouping, metric) -> pooled r

    def to_frame(self) -> pd.DataFrame:
        rows = [{"grouping": g.grouping, "group": g.group, "metric": g.metric,
                 "r": g.r, "n": g.n, "ci95_hi": g.ci95_hi, "ci95_lo": g.ci95_lo}
                for g in self.groups]
        rows += [{"grouping": grouping, "group": "pooled", "metric": metric,
                  "r": r, "n": sum(g.n for g in self.groups
                                   if g.grouping == grouping and g.metric == metric),
                  "ci95_hi": np.nan, "ci95_lo": np.nan}
                 for (grouping, metric), r in self.pooled.items()]
        return pd.DataFrame(rows, columns=["grouping", "group", "metric",
                                           "r", "n", "ci95_hi", "ci95_lo"])


def ingest_scores(path_or_df) -> pd.DataFrame:
    """Read and validate a subjective score table.

    Columns: item, experiment, condition, listener_id, score.  Scores must
    lie in [0, 100] and experiment labels must be known; violations raise
    ValidationError listing the offending rows.  A trial without a
    hidden_reference row only warns.
    """
    if isinstance(path_or_df, pd.DataFrame):
        df = path_or_df.copy()
    else:
        df = pd.read_csv(path_or_df)
    missing = [c for c in SUBJECTIVE_COLUMNS if c not in df.columns]
    if missing:
        raise ValidationError(f"subjective table missing column(s) {missing}")

    df["score"] = pd.to_numeric(df["score"], errors="coerce")
    problems = []
    bad_score = df.index[(df["score"] < 0) | (df["score"] > 100) | df["score"].isna()]
    problems += [f"row {i}: score {df.loc[i, 'score']!r} outside [0, 100]"
                 for i in bad_score]
    bad_exp = df.index[~df["experiment"].isin(EXPERIMENTS)]
    problems += [f"row {i}: unknown experiment {df.loc[i, 'experiment']!r}"
                 for i in bad_exp]
    if problems:
        raise ValidationError("; ".join(problems))

    for (item, experiment), trial in df.groupby(["item", "experiment"]):
        if "hidden_reference" not in set(trial["condition"]):
            warnings.warn(f"trial ({item}, {experiment}) has no hidden_reference row",
                          stacklevel=2)
    return df


def exclude_anchors(records: pd.DataFrame, drop_mono=False) -> pd.DataFrame:
    """Remove lowpass anchor rows (and optionally the mono anchor). Idempotent."""
    drop = set(LOWPASS_ANCHOR_CONDITIONS)
    if drop_mono:
        drop.add(MONO_ANCHOR_CONDITION)
    return records[~records["condition"].isin(drop)].reset_index(drop=True)


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 3:
        raise ValueError("pearson needs two equal-length inputs with n >= 3")
    xd = x - x.mean()
    yd = y - y.mean()
    denom = np.sqrt((xd @ xd) * (yd @ yd))
    if denom == 0.0:
        raise ValueError("pearson undefined for constant input")
    return float(np.clip((xd @ yd) / denom, -1.0, 1.0))


def pool_fisher(rs, ns=None) -> float:
    """Pool correlations in Fisher's z-domain, weighted by n-3 when counts given."""
    rs = np.asarray(rs, dtype=np.float64)
    if rs.size == 0:
        raise ValueError("pool_fisher needs at least one correlation")
    z = np.arctanh(np.clip(rs, -R_CLAMP, R_CLAMP))
    if ns is None:
        pooled = z.mean()
    else:
        w = np.asarray(ns, dtype=np.float64) - 3.0
        if w.size != z.size or np.any(w <= 0):
            raise ValueError("counts must match correlations and exceed 3")
        pooled = np.sum(w * z) / np.sum(w)
    return float(np.tanh(pooled))


def ci95(r, n):
    """Fisher-z 95% interval half-widths (upper, lower) around r."""
    if n < 4:
        raise ValueError("ci95 needs n >= 4")
    z = np.arctanh(np.clip(r, -R_CLAMP, R_CLAMP))
    half = 1.96 / np.sqrt(n - 3)
    return float(np.tanh(z + half) - r), float(r - np.tanh(z - half))


def fit_third_order_mapping(objective, subjective, monotonic=True):
    """Least-squares cubic from objective to subjective scale, c0..c3.

    With monotonic=True (the default), a cubic that is non-monotonic over
    the objective range is refit with the derivative constrained to the
    sign of the raw correlation on a 101-point grid.
    """
    x = np.asarray(objective, dtype=np.float64)
    y = np.asarray(subjective, dtype=np.float64)
    if x.size != y.size or x.size < 5:
        raise ValueError("need at least 5 paired points")
    if np.ptp(x) == 0:
        raise ValueError("objective values are constant; mapping is degenerate")

    design = np.column_stack([np.ones_like(x), x, x ** 2, x ** 3])
    coefs, *_ = np.linalg.lstsq(design, y, rcond=None)
    if not monotonic:
        return tuple(float(c) for c in coefs)

    grid = np.linspace(x.min(), x.max(), 101)
    deriv = coefs[1] + 2 * coefs[2] * grid + 3 * coefs[3] * grid ** 2
    sign = np.sign(pearson(x, y)) or 1.0
    if np.all(sign * deriv >= -1e-12):
        return tuple(float(c) for c in coefs)

    dgrid = np.column_stack([np.zeros_like(grid), np.ones_like(grid),
                             2 * grid, 3 * grid ** 2])

    def rss(c):
        resid = design @ c - y
        return resid @ resid

    res = optimize.minimize(
        rss, coefs, jac=lambda c: 2.0 * design.T @ (design @ c - y),
        constraints=[{"type": "ineq", "fun": lambda c: sign * (dgrid @ c)}],
        method="SLSQP", options={"maxiter": 500})
    return tuple(float(c) for c in res.x)


def apply_cubic(coefs, x):
    x = np.asarray(x, dtype=np.float64)
    return coefs[0] + coefs[1] * x + coefs[2] * x ** 2 + coefs[3] * x ** 3


def _grouping_key(joined: pd.DataFrame, grouping: str, hard_panned: dict):
    if grouping == "per_experiment":
        return joined["experiment"]
    if grouping == "per_item":
        return joined["item"]
    if grouping == "hardpan_split":
        flags = joined["item"].map(lambda item: bool(hard_panned.get(item, False)))
        return flags.map({True: "hard_panned", False: "not_hard_panned"})
    raise ValueError(f"unknown grouping {grouping!r}")


def group_report(subjective: pd.DataFrame, objective: pd.DataFrame,
                 grouping: str, hard_panned: dict | None = None,
                 drop_mono=False) -> CorrelationReport:
    """Correlation report for one grouping mode.

    subjective: raw listener records; objective: item/condition/metric/value
    rows.  Groups with fewer than 5 joined points are skipped with a warning.
    """
    missing = [c for c in OBJECTIVE_COLUMNS if c not in objective.columns]
    if missing:
        raise ValidationError(f"objective table missing column(s) {missing}")
    hard_panned = hard_panned or {}

    subj = exclude_anchors(subjective, drop_mono=drop_mono)
    means = (subj.groupby(["item", "experiment", "condition"], as_index=False)
             ["score"].mean())
    joined = means.merge(objective, on=["item", "condition"], how="inner")
    if joined.empty:
        raise ValueError("join of subjective and objective tables is empty")
    joined["group_key"] = _grouping_key(joined, grouping, hard_panned)

    groups = []
    for (group, metric), sub in sorted(joined.groupby(["group_key", "metric"]),
                                       key=lambda kv: (str(kv[0][0]), kv[0][1])):
        if len(sub) < MIN_GROUP_POINTS:
            warnings.warn(f"group ({group}, {metric}) has only {len(sub)} points; skipped",
                          stacklevel=2)
            continue
        x = sub["value"].to_numpy()
        y = sub["score"].to_numpy()
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            warnings.warn(f"group ({group}, {metric}) is degenerate; skipped",
                          stacklevel=2)
            continue
        mapped = apply_cubic(fit_third_order_mapping(x, y), x)
        if np.ptp(mapped) == 0:
            warnings.warn(f"group ({group}, {metric}) maps to a constant; skipped",
                          stacklevel=2)
            continue
        r = pearson(mapped, y)
        hi, lo = ci95(r, len(sub))
        groups.append(GroupResult(grouping, str(group), metric, r, len(sub), hi, lo))

    pooled = {}
    for metric in sorted({g.metric for g in groups}):
        rs = [g.r for g in groups if g.metric == metric]
        ns = [g.n for g in groups if g.metric == metric]
        pooled[(grouping, metric)] = pool_fisher(rs, ns)
    return CorrelationReport(groups, pooled)
