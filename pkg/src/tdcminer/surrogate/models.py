"""Surrogate model families over TDC training samples.

Four predictors share one core: five single-target random forests behind a
feature schema.  The per-set family trains one model per sequence set on the
GA parameters alone; the general model trains across sets on parameters plus
set descriptors; the averaging and nearest-neighbour ensembles combine
per-set models without retraining.
"""

from __future__ import annotations

import logging
import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from ..cluster import OUTCOME_COLUMNS
from ..evotemplate import PARAM_COLUMNS, GAParams
from ..harness import SplitSpec, TooFewSamplesError, split
from ..seqcore import DESCRIPTOR_STAT_COLUMNS, SetDescriptor
from .forest import ForestHyperparams, RandomForest, train_forest

log = logging.getLogger(__name__)

TARGETS = OUTCOME_COLUMNS

PE_ONLY = "PE_ONLY"
PE_PLUS_PS = "PE_PLUS_PS"

MIN_SAMPLES_PER_SET = 10


class AllTargetsZeroError(ValueError):
    """Raised when every true value is zero, leaving MAPE undefined."""


class TooFewSetsError(ValueError):
    """Raised when the general model gets samples from fewer than two sets."""


class NoModelsError(ValueError):
    """Raised when an ensemble receives no member models."""


class InvalidKError(ValueError):
    """Raised when the neighbour count is outside [1, number of models]."""


@dataclass(frozen=True)
class FeatureSchema:
    """Named feature layout: GA parameters, optionally plus set descriptors.

    The n-gram vocabulary is frozen at training time; descriptors queried
    later read 0 for vocabulary entries they lack, and their own unseen
    n-grams are ignored.
    """

    kind: str
    ngram_vocab: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (PE_ONLY, PE_PLUS_PS):
            raise ValueError(f"unknown schema kind {self.kind!r}")

    @property
    def columns(self) -> tuple[str, ...]:
        if self.kind == PE_ONLY:
            return PARAM_COLUMNS
        return PARAM_COLUMNS + DESCRIPTOR_STAT_COLUMNS + self.ngram_vocab

    def vector(self, params: GAParams, descriptor: SetDescriptor | None = None):
        values = list(params.as_columns().values())
        if self.kind == PE_PLUS_PS:
            if descriptor is None:
                raise ValueError("schema requires a set descriptor")
            values += descriptor.csv_values()[: len(DESCRIPTOR_STAT_COLUMNS)]
            values += [descriptor.ngram_freqs.get(g, 0.0) for g in self.ngram_vocab]
        return np.asarray(values, dtype=float)


@dataclass
class SurrogateForest:
    """Five per-target forests behind one feature schema."""

    schema: FeatureSchema
    hyperparams: ForestHyperparams
    forests: dict[str, RandomForest] = field(default_factory=dict)

    def predict(self, params: GAParams, descriptor: SetDescriptor | None = None):
        row = self.schema.vector(params, descriptor)
        return {t: self.forests[t].predict(row) for t in TARGETS}

    def feature_importance(self):
        """Per target: (feature, share) pairs, descending, zero scores dropped."""
        names = self.schema.columns
        ranked = {}
        for target, forest in self.forests.items():
            raw = forest.raw_importance()
            total = raw.sum()
            if total <= 0:
                ranked[target] = []
                continue
            shares = raw / total
            pairs = [(names[i], float(shares[i])) for i in np.argsort(-shares) if shares[i] > 0]
            ranked[target] = pairs
        return ranked


def mape(y_true, y_pred):
    """(MAPE percentage, excluded-row count); zero-target rows are excluded."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or len(y_true) == 0:
        raise ValueError("y_true and y_pred must be equal-length non-empty vectors")
    mask = y_true != 0
    excluded = int((~mask).sum())
    if not mask.any():
        raise AllTargetsZeroError("every true value is zero; MAPE undefined")
    ratios = np.abs(y_true[mask] - y_pred[mask]) / np.abs(y_true[mask])
    return 100.0 * float(ratios.mean()), excluded


def _matrix(samples, schema: FeatureSchema):
    return np.vstack([schema.vector(s.params, s.descriptor) for s in samples])


def _fit(samples, schema: FeatureSchema, hp: ForestHyperparams) -> SurrogateForest:
    x = _matrix(samples, schema)
    forests = {}
    for target in TARGETS:
        y = np.array([s.outcome.as_columns()[target] for s in samples], dtype=float)
        forests[target] = train_forest(x, y, hp)
    return SurrogateForest(schema=schema, hyperparams=hp, forests=forests)


def _mean_validation_mape(model: SurrogateForest, samples) -> float:
    predictions = [model.predict(s.params, s.descriptor) for s in samples]
    scores = []
    for target in TARGETS:
        y_true = [s.outcome.as_columns()[target] for s in samples]
        y_pred = [p[target] for p in predictions]
        try:
            value, _ = mape(y_true, y_pred)
        except AllTargetsZeroError:
            continue
        scores.append(value)
    return float(np.mean(scores)) if scores else math.inf


def grid_search(train, validation, hp_grid, schema: FeatureSchema) -> ForestHyperparams:
    """Exhaustive search; lowest mean validation MAPE wins.

    Ties prefer fewer trees, then shallower depth.
    """
    if not hp_grid or not train or not validation:
        raise ValueError("grid and both partitions must be non-empty")
    scored = []
    for hp in hp_grid:
        model = _fit(train, schema, hp)
        scored.append((_mean_validation_mape(model, validation), hp.n_trees, hp.max_depth, hp))
    return min(scored, key=lambda row: row[:3])[3]


DEFAULT_HP_GRID = (
    ForestHyperparams(n_trees=30, max_depth=4),
    ForestHyperparams(n_trees=30, max_depth=8),
    ForestHyperparams(n_trees=60, max_depth=4),
    ForestHyperparams(n_trees=60, max_depth=8),
)


def _set_split_seed(set_name: str) -> int:
    return zlib.crc32(set_name.encode("utf-8"))


def train_each(samples, hp_grid=DEFAULT_HP_GRID):
    """One PE_ONLY model per set; sets with < 10 samples are skipped.

    Each set's pipeline (70:30 grid-search split seeded from the set name,
    then a refit on all of the set's samples) depends on nothing outside the
    set, so models are reproducible set by set.
    """
    by_set: dict[str, list] = {}
    for s in samples:
        by_set.setdefault(s.set_name, []).append(s)
    schema = FeatureSchema(PE_ONLY)
    models = {}
    for name, rows in by_set.items():
        if len(rows) < MIN_SAMPLES_PER_SET:
            log.warning(
                "set %r has %d samples (< %d); skipping its per-set model",
                name,
                len(rows),
                MIN_SAMPLES_PER_SET,
            )
            continue
        tr, va = split(rows, SplitSpec(0.7, seed=_set_split_seed(name)))
        best = grid_search(tr, va, hp_grid, schema)
        models[name] = _fit(rows, schema, best)
    return models


def train_general(samples, hp_grid=DEFAULT_HP_GRID) -> SurrogateForest:
    """One PE_PLUS_PS model across all sets; vocabulary frozen from training."""
    names = {s.set_name for s in samples}
    if len(names) < 2:
        raise TooFewSetsError("general model needs samples from >= 2 sets")
    vocab = sorted({g for s in samples for g in s.descriptor.ngram_freqs})
    schema = FeatureSchema(PE_PLUS_PS, ngram_vocab=tuple(vocab))
    if len(samples) < 2:
        raise TooFewSamplesError("need at least 2 samples")
    tr, va = split(list(samples), SplitSpec(0.7, seed=0))
    best = grid_search(tr, va, hp_grid, schema)
    return _fit(list(samples), schema, best)


def _models_list(models):
    if isinstance(models, dict):
        return [models[name] for name in sorted(models)]
    return list(models)


def predict_average_ensemble(models, params: GAParams):
    """Unweighted per-target mean over member predictions."""
    members = _models_list(models)
    if not members:
        raise NoModelsError("average ensemble needs at least one model")
    predictions = [m.predict(params) for m in members]
    return {
        t: math.fsum(p[t] for p in predictions) / len(predictions) for t in TARGETS
    }


def _descriptor_vector(descriptor: SetDescriptor, vocab):
    stats = descriptor.csv_values()[: len(DESCRIPTOR_STAT_COLUMNS)]
    return stats + [descriptor.ngram_freqs.get(g, 0.0) for g in vocab]


def predict_knn_ensemble(models, descriptors, new_descriptor, k, params: GAParams):
    """Mean prediction of the k models whose sets look most like the new one.

    Similarity is Euclidean distance over z-scored descriptor columns
    (statistics from the training descriptors); ties break on set name.
    """
    names = sorted(models)
    if not names:
        raise NoModelsError("k-NN ensemble needs at least one model")
    if not 1 <= k <= len(names):
        raise InvalidKError(f"k={k} outside [1, {len(names)}]")
    vocab = sorted({g for name in names for g in descriptors[name].ngram_freqs})
    matrix = np.array(
        [_descriptor_vector(descriptors[name], vocab) for name in names], dtype=float
    )
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    std[std == 0] = 1.0
    query = (np.array(_descriptor_vector(new_descriptor, vocab)) - mean) / std
    scaled = (matrix - mean) / std
    distances = np.linalg.norm(scaled - query, axis=1)
    ranked = sorted(zip(distances, names))
    selected = [name for _, name in ranked[:k]]
    predictions = [models[name].predict(params) for name in selected]
    return {t: math.fsum(p[t] for p in predictions) / k for t in TARGETS}


@dataclass(frozen=True)
class TargetScore:
    """MAPE (NaN when undefined), exclusions, and residual summary."""

    mape: float
    excluded: int
    residual_mean: float
    residual_std: float


@dataclass(frozen=True)
class EvalReport:
    train: dict[str, TargetScore]
    test: dict[str, TargetScore]

    def mean_mape(self, which: str = "test") -> float:
        scores = [
            s.mape for s in getattr(self, which).values() if not math.isnan(s.mape)
        ]
        return float(np.mean(scores)) if scores else math.nan


def _score_split(predict_fn, samples):
    predictions = [predict_fn(s) for s in samples]
    out = {}
    for target in TARGETS:
        y_true = np.array([s.outcome.as_columns()[target] for s in samples], dtype=float)
        y_pred = np.array([p[target] for p in predictions], dtype=float)
        try:
            value, excluded = mape(y_true, y_pred)
        except AllTargetsZeroError:
            value, excluded = math.nan, len(samples)
        residuals = y_pred - y_true
        out[target] = TargetScore(
            mape=value,
            excluded=excluded,
            residual_mean=float(residuals.mean()),
            residual_std=float(residuals.std()),
        )
    return out


def evaluate(predict_fn, train_samples, test_samples) -> EvalReport:
    """Score a sample -> prediction-dict callable on both partitions."""
    if not train_samples or not test_samples:
        raise ValueError("both partitions must be non-empty")
    return EvalReport(
        train=_score_split(predict_fn, train_samples),
        test=_score_split(predict_fn, test_samples),
    )


def family_reports(samples, each_models, general_model=None, knn_k=2):
    """One EvalReport per model family over shared pooled 70:30 splits.

    The pool covers the sets that have a per-set model; each set is split
    with the same seed its model used during training.  "each" predicts a
    row with its own set's model, "general" with the shared model, and the
    ensembles predict each set's rows from the OTHER sets' models only,
    mimicking prediction for a set that has no model of its own.
    """
    if not each_models:
        raise NoModelsError("family evaluation needs at least one per-set model")
    by_set: dict[str, list] = {}
    for s in samples:
        if s.set_name in each_models:
            by_set.setdefault(s.set_name, []).append(s)
    train_pool, test_pool = [], []
    for name in sorted(by_set):
        tr, te = split(by_set[name], SplitSpec(0.7, seed=_set_split_seed(name)))
        train_pool.extend(tr)
        test_pool.extend(te)
    descriptors = {name: rows[0].descriptor for name, rows in by_set.items()}

    reports = {}
    reports["each"] = evaluate(
        lambda s: each_models[s.set_name].predict(s.params), train_pool, test_pool
    )
    if general_model is not None:
        reports["general"] = evaluate(
            lambda s: general_model.predict(s.params, s.descriptor),
            train_pool,
            test_pool,
        )
    if len(each_models) >= 2:

        def without(name):
            return {n: m for n, m in each_models.items() if n != name}

        reports["average"] = evaluate(
            lambda s: predict_average_ensemble(without(s.set_name), s.params),
            train_pool,
            test_pool,
        )

        def knn_fn(s):
            others = without(s.set_name)
            other_descriptors = {n: descriptors[n] for n in others}
            k = min(knn_k, len(others))
            return predict_knn_ensemble(
                others, other_descriptors, s.descriptor, k, s.params
            )

        reports["knn"] = evaluate(knn_fn, train_pool, test_pool)
    return reports
