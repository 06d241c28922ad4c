"""Fusion of monaural and binaural quality components.

Two routes: the fixed min-rule used by combined mono/binaural quality
models, and a trainable forward-stagewise hinge regression (a simplified
MARS without backward pruning) for learning a mapping from several
distortion features to one score.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

MIN_RULE_MONO_SCALE = 0.0528
MIN_RULE_BINAURAL_SCALE = 0.0078
RSS_IMPROVEMENT_STOP = 1e-4


@dataclass(frozen=True)
class FusedScore:
    value: float
    rule: str
    components: dict


def min_rule(opm_dual: float, bin_q: float) -> FusedScore:
    """min(log10(0.0528 * opm_dual), 0.0078 * bin_q): the worse of the
    timbre and spatial components wins."""
    if not opm_dual > 0:
        raise ValueError(f"opm_dual must be positive for the log term, got {opm_dual}")
    mono_term = np.log10(MIN_RULE_MONO_SCALE * opm_dual)
    binaural_term = MIN_RULE_BINAURAL_SCALE * bin_q
    return FusedScore(float(min(mono_term, binaural_term)), "min_rule",
                      {"opm_dual": opm_dual, "bin_q": bin_q,
                       "mono_term": float(mono_term),
                       "binaural_term": float(binaural_term)})


@dataclass(frozen=True)
class Hinge:
    feature: int
    sign: int    # +1: max(0, x - knot); -1: max(0, knot - x)
    knot: float

    def evaluate(self, X):
        return np.maximum(0.0, self.sign * (X[:, self.feature] - self.knot))


@dataclass(frozen=True)
class HingeModel:
    """Piecewise-linear additive model: intercept + sum of hinge products."""

    intercept: float
    terms: tuple            # tuple of (hinges tuple, coefficient)
    n_features: int

    def predict(self, features) -> np.ndarray | float:
        X = np.asarray(features, dtype=np.float64)
        scalar = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        out = np.full(X.shape[0], self.intercept)
        for hinges, coef in self.terms:
            col = np.ones(X.shape[0])
            for h in hinges:
                col *= h.evaluate(X)
            out += coef * col
        return float(out[0]) if scalar else out

    def to_json(self) -> str:
        return json.dumps({
            "intercept": self.intercept,
            "n_features": self.n_features,
            "terms": [{"coefficient": coef,
                       "hinges": [{"feature": h.feature, "sign": h.sign,
                                   "knot": h.knot} for h in hinges]}
                      for hinges, coef in self.terms],
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "HingeModel":
        obj = json.loads(text)
        terms = tuple(
            (tuple(Hinge(h["feature"], h["sign"], h["knot"])
                   for h in term["hinges"]), term["coefficient"])
            for term in obj["terms"])
        return cls(obj["intercept"], terms, obj["n_features"])


def _design_matrix(bases, X):
    cols = [np.ones(X.shape[0])]
    for hinges in bases:
        col = np.ones(X.shape[0])
        for h in hinges:
            col *= h.evaluate(X)
        cols.append(col)
    return np.column_stack(cols)


def _fit_rss(design, y):
    coefs, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coefs
    return coefs, float(resid @ resid), rank


def fit_regression(features, targets, max_terms=10, max_degree=1) -> HingeModel:
    """Forward stagewise hinge selection with least-squares refits.

    At each step the hinge pair (feature, knot at an observed value) with
    the largest residual-sum-of-squares reduction is added and all
    coefficients are refit.  Stops at max_terms basis terms or when the
    relative RSS improvement drops below 1e-4.  Deterministic: ties break
    toward the lowest feature index, then the lowest knot.  max_degree=2
    additionally considers products with one existing term.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
        raise ValueError("features must be N x K and targets length N")
    if X.shape[0] <= 3 * max_terms:
        raise ValueError(f"need more than {3 * max_terms} samples for max_terms={max_terms}")

    usable = [j for j in range(X.shape[1]) if np.ptp(X[:, j]) > 0]
    dropped = sorted(set(range(X.shape[1])) - set(usable))
    if dropped:
        warnings.warn(f"dropping constant feature column(s) {dropped}", stacklevel=2)

    bases: list = []
    design = _design_matrix(bases, X)
    coefs, rss, _ = _fit_rss(design, y)

    while len(bases) + 2 <= max_terms:
        if rss <= 1e-24 * max(1.0, float(y @ y)):
            break
        parents = [()] + (bases[:] if max_degree >= 2 else [])
        best = None  # (rss, parent_idx, feature, knot, new_bases, new_coefs)
        for p_idx, parent in enumerate(parents):
            if len(parent) >= max_degree:
                continue
            for j in usable:
                if any(h.feature == j for h in parent):
                    continue
                for knot in np.unique(X[:, j])[:-1]:
                    pair = [parent + (Hinge(j, +1, float(knot)),),
                            parent + (Hinge(j, -1, float(knot)),)]
                    cand = _design_matrix(bases + pair, X)
                    cand_coefs, cand_rss, rank = _fit_rss(cand, y)
                    if rank < cand.shape[1]:
                        continue  # linearly dependent pair, skip
                    if best is None or cand_rss < best[0] - 1e-12 * max(rss, 1.0):
                        best = (cand_rss, p_idx, j, float(knot), pair, cand_coefs)
        if best is None:
            break
        cand_rss = best[0]
        if (rss - cand_rss) < RSS_IMPROVEMENT_STOP * max(rss, 1e-30):
            break
        bases.extend(best[4])
        coefs, rss = best[5], cand_rss
        if rss <= 1e-24:
            break

    terms = tuple((tuple(hinges), float(c)) for hinges, c in zip(bases, coefs[1:]))
    return HingeModel(float(coefs[0]), terms, X.shape[1])


def predict(model: HingeModel, features):
    return model.predict(features)
