"""Statistics pipeline: frozen high-precision oracles plus behavior checks.

The numeric expectations were computed with an independent 50-digit
arithmetic implementation of the same formulas and frozen here.
"""

import numpy as np
import pandas as pd
import pytest

from stereoqa.evalstats import (CorrelationReport, ValidationError,
                                apply_cubic, ci95, exclude_anchors,
                                fit_third_order_mapping, group_report,
                                ingest_scores, pearson, pool_fisher)

PEARSON_ORACLE = [
    ([1, 2, 3, 4], [1, 2, 3, 10], 0.88543774484714621),
    ([1, 2, 3, 4, 5], [2, 1, 4, 3, 5], 0.8),
    ([0.5, 1.5, 2.5, 3.5, 4.5, 5.5],
     [1.1, 0.9, 3.2, 2.8, 5.5, 4.9], 0.91446161345646196),
    ([10, 20, 30, 40, 50], [5, 4, 3, 2, 1], -1.0),
    ([1, 4, 9, 16, 25, 36], [1, 2, 3, 4, 5, 6], 0.97891726367781805),
    ([0.1, 0.2, 0.4, 0.8, 1.6], [3, 1, 4, 1, 5], 0.50868218023031922),
]

POOL_ORACLE = [
    ([0.6, 0.9], None, 0.79419205634449743),
    ([0.1, 0.5, 0.8], None, 0.52466222658200303),
    ([-0.4, 0.7], None, 0.21825757707285706),
    ([0.6, 0.9], [10, 50], 0.87897189714845294),
    ([0.2, 0.4, 0.95], [8, 20, 100], 0.91577158769124284),
    ([0.99, -0.99], None, 0.0),
]

CI95_ORACLE = [
    (0.0, 403, 0.097687469894103416, 0.097687469894103416),
    (0.9, 50, 0.042292087422382867, 0.070564654692601788),
    (0.5, 20, 0.27176423872565641, 0.42619811304181744),
    (-0.7, 30, 0.24570551019878736, 0.14673490977241963),
    (0.99, 100, 0.0032724402302383688, 0.0048523698037152414),
    (0.3, 10, 0.48193461037113483, 0.70639945347757185),
]


@pytest.mark.parametrize("x,y,expected", PEARSON_ORACLE)
def test_pearson_oracle(x, y, expected):
    assert pearson(x, y) == pytest.approx(expected, abs=1e-9)


def test_pearson_validation():
    with pytest.raises(ValueError):
        pearson([1, 2], [1, 2])
    with pytest.raises(ValueError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        pearson([1, 2, 3], [1, 2])


@pytest.mark.parametrize("rs,ns,expected", POOL_ORACLE)
def test_pool_fisher_oracle(rs, ns, expected):
    assert pool_fisher(rs, ns) == pytest.approx(expected, abs=1e-9)


def test_pool_fisher_validation():
    with pytest.raises(ValueError):
        pool_fisher([])
    with pytest.raises(ValueError):
        pool_fisher([0.5, 0.6], [10])
    with pytest.raises(ValueError):
        pool_fisher([0.5], [3])


@pytest.mark.parametrize("r,n,hi,lo", CI95_ORACLE)
def test_ci95_oracle(r, n, hi, lo):
    got_hi, got_lo = ci95(r, n)
    assert got_hi == pytest.approx(hi, abs=1e-9)
    assert got_lo == pytest.approx(lo, abs=1e-9)


def test_ci95_validation():
    with pytest.raises(ValueError):
        ci95(0.5, 3)


def _subjective_frame():
    rows = []
    for item in ("itemA", "itemB"):
        for cond, score in [("QNLR_Q1", 20), ("QNLR_Q2", 35), ("QNLR_Q3", 55),
                            ("QNLR_Q4", 72), ("QNLR_Q5", 88),
                            ("lp3500", 25), ("lp7000", 45),
                            ("hidden_reference", 98)]:
            for listener in range(3):
                rows.append({"item": item, "experiment": "QNLR",
                             "condition": cond, "listener_id": f"l{listener}",
                             "score": score + listener})
    return pd.DataFrame(rows)


def test_ingest_valid():
    df = ingest_scores(_subjective_frame())
    assert len(df) == 48


def test_ingest_rejects_bad_scores():
    df = _subjective_frame()
    df.loc[0, "score"] = 120
    with pytest.raises(ValidationError, match="outside"):
        ingest_scores(df)
    df = _subjective_frame()
    df["score"] = df["score"].astype(object)
    df.loc[3, "score"] = "n/a"
    with pytest.raises(ValidationError):
        ingest_scores(df)


def test_ingest_rejects_unknown_experiment():
    df = _subjective_frame()
    df.loc[5, "experiment"] = "QNZZ"
    with pytest.raises(ValidationError, match="unknown experiment"):
        ingest_scores(df)


def test_ingest_warns_without_hidden_reference():
    df = _subjective_frame()
    df = df[df["condition"] != "hidden_reference"]
    with pytest.warns(UserWarning, match="hidden_reference"):
        ingest_scores(df)


def test_exclude_anchors():
    df = _subjective_frame()
    df.loc[len(df)] = {"item": "itemA", "experiment": "QNLR",
                       "condition": "mono", "listener_id": "l0", "score": 40}
    out = exclude_anchors(df)
    assert not set(out["condition"]) & {"lp3500", "lp7000"}
    assert "mono" in set(out["condition"])
    out2 = exclude_anchors(df, drop_mono=True)
    assert "mono" not in set(out2["condition"])
    assert exclude_anchors(out).equals(out)  # idempotent


def test_cubic_fit_recovers_exact_cubic():
    x = np.linspace(-2, 2, 30)
    y = 1.0 + 0.5 * x + 0.25 * x ** 3  # monotone increasing
    coefs = fit_third_order_mapping(x, y)
    assert np.allclose(coefs, [1.0, 0.5, 0.0, 0.25], atol=1e-8)
    assert np.allclose(apply_cubic(coefs, x), y, atol=1e-8)


def test_cubic_fit_monotonic_constraint():
    rng = np.random.default_rng(8)
    x = np.linspace(0, 1, 40)
    y = 100 * x + 8 * np.sin(12 * x) + rng.normal(0, 2, 40)
    coefs = fit_third_order_mapping(x, y)  # default monotonic=True
    grid = np.linspace(0, 1, 101)
    deriv = coefs[1] + 2 * coefs[2] * grid + 3 * coefs[3] * grid ** 2
    assert np.all(deriv >= -1e-6)


def test_cubic_unconstrained_never_hurts_correlation():
    rng = np.random.default_rng(9)
    x = rng.uniform(0, 10, 25)
    y = 50 + 3 * x - 0.5 * x ** 2 + rng.normal(0, 5, 25)
    coefs = fit_third_order_mapping(x, y, monotonic=False)
    r_raw = abs(pearson(x, y))
    r_mapped = abs(pearson(apply_cubic(coefs, x), y))
    assert r_mapped >= r_raw - 1e-12


def test_cubic_fit_validation():
    with pytest.raises(ValueError):
        fit_third_order_mapping([1, 2, 3], [1, 2, 3])
    with pytest.raises(ValueError):
        fit_third_order_mapping([1] * 6, [1, 2, 3, 4, 5, 6])


def _objective_frame():
    rows = []
    for item in ("itemA", "itemB"):
        for i, cond in enumerate(["QNLR_Q1", "QNLR_Q2", "QNLR_Q3",
                                  "QNLR_Q4", "QNLR_Q5", "hidden_reference"]):
            rows.append({"item": item, "condition": cond,
                         "metric": "nmr_db", "value": 12.0 - 6.0 * i})
    return pd.DataFrame(rows)


def test_group_report_per_experiment():
    report = group_report(_subjective_frame(), _objective_frame(),
                          "per_experiment")
    frame = report.to_frame()
    assert set(frame["grouping"]) == {"per_experiment"}
    pooled = frame[frame["group"] == "pooled"]
    assert len(pooled) == 1
    group_rows = frame[frame["group"] != "pooled"]
    assert set(group_rows["group"]) == {"QNLR"}
    # objective decreases as quality (and score) rises: strong |r| after mapping
    assert group_rows["r"].abs().min() > 0.9
    assert (group_rows["ci95_hi"] > 0).all()


def test_group_report_per_item_and_hardpan():
    subj, obj = _subjective_frame(), _objective_frame()
    per_item = group_report(subj, obj, "per_item").to_frame()
    assert {"itemA", "itemB"} <= set(per_item["group"])
    split = group_report(subj, obj, "hardpan_split",
                         {"itemA": True}).to_frame()
    assert {"hard_panned", "not_hard_panned"} <= set(split["group"])


def test_group_report_skips_small_groups():
    subj = _subjective_frame()
    obj = _objective_frame().iloc[:3]  # too few joined points per group
    with pytest.warns(UserWarning, match="skipped"):
        with pytest.raises(ValueError):
            # all groups skipped -> no pooled correlations, but the join is
            # non-empty so the report simply ends up with no groups
            report = group_report(subj, obj, "per_experiment")
            if not report.groups:
                raise ValueError("empty")


def test_group_report_unknown_grouping():
    with pytest.raises(ValueError):
        group_report(_subjective_frame(), _objective_frame(), "bogus")


def test_group_report_missing_columns():
    with pytest.raises(ValidationError):
        group_report(_subjective_frame(),
                     pd.DataFrame({"item": [], "condition": []}),
                     "per_item")
