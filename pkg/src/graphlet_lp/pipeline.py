"""One protocol run: split, features, training, scoring and explanation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atlas import EDGE_LABELS, FEATURE_NAMES, NODE_LABELS
from .boosting import BoostedModel, Hyperparameters, train
from .errors import ConfigurationError
from .explain import DEFAULT_BACKGROUND, ShapReport, aggregate_importance, sample_background, tree_shap
from .graph import Graph
from .metrics import ConfusionCounts, MetricSet, threshold_metrics
from .predictors import CLASSICAL_IDS, KatzConfig, classical_table
from .protocol import FeatureMatrix, PhaseMatrices, SplitPlan, build_phase_matrices, make_split


@dataclass(frozen=True)
class ModelSpec:
    """A parsed model id: ``od``, ``n-only``, ``m-only``, ``single:<feature>``
    or ``classical:<index>``."""

    model_id: str
    features: tuple
    classical: bool = False

    @classmethod
    def parse(cls, model_id: str) -> "ModelSpec":
        if model_id == "od":
            return cls(model_id, FEATURE_NAMES)
        if model_id == "n-only":
            return cls(model_id, NODE_LABELS)
        if model_id == "m-only":
            return cls(model_id, EDGE_LABELS)
        kind, _, arg = model_id.partition(":")
        if kind == "single" and arg in FEATURE_NAMES:
            return cls(model_id, (arg,))
        if kind == "classical" and arg in CLASSICAL_IDS:
            return cls(model_id, (arg,), classical=True)
        raise ConfigurationError(f"unknown model id {model_id!r}")


def classical_matrices(g: Graph, plan: SplitPlan, orbit: PhaseMatrices, index: str,
                       katz: KatzConfig = KatzConfig()) -> PhaseMatrices:
    """One-column matrices holding a classical index, on the same pairs and
    visible graphs as the orbit matrices."""
    g_train, g_test = plan.train_graph(g), plan.test_phase_graph(g)

    def one(m: FeatureMatrix, graph: Graph) -> FeatureMatrix:
        return FeatureMatrix(m.pairs, m.labels, classical_table(graph, m.pairs, (index,), katz), (index,))

    return PhaseMatrices(one(orbit.train, g_train), one(orbit.validation, g_train), one(orbit.test, g_test))


@dataclass
class RunResult:
    seed: int
    plan: SplitPlan
    matrices: PhaseMatrices       # restricted to the model's features
    model: BoostedModel
    probabilities: np.ndarray     # test rows
    confusion: ConfusionCounts
    metrics: MetricSet


def run_once(g: Graph, model_id: str = "od", seed: int = 0, hp: Hyperparameters = Hyperparameters(),
             threshold: float = 0.5, katz: KatzConfig = KatzConfig(), workers: int | None = None,
             orbit: PhaseMatrices | None = None, plan: SplitPlan | None = None) -> RunResult:
    spec = ModelSpec.parse(model_id)
    plan = plan or make_split(g, seed)
    orbit = orbit or build_phase_matrices(g, plan, workers=workers)
    if spec.classical:
        mats = classical_matrices(g, plan, orbit, spec.features[0], katz)
    else:
        mats = PhaseMatrices(orbit.train.select(spec.features), orbit.validation.select(spec.features),
                             orbit.test.select(spec.features))
    model = train(mats.train, mats.validation, hp, seed=seed)
    prob = model.predict_proba(mats.test.X)
    conf, metrics = threshold_metrics(prob, mats.test.labels, threshold)
    return RunResult(plan.seed, plan, mats, model, prob, conf, metrics)


def explain_run(model: BoostedModel, test: FeatureMatrix, train_matrix: FeatureMatrix,
                background_size: int = DEFAULT_BACKGROUND, seed: int = 0) -> ShapReport:
    """SHAP values for every test row against a training-row background."""
    bg = sample_background(train_matrix.X, background_size, seed)
    return tree_shap(model, test.X, bg)


@dataclass
class Signature:
    mean_signed: np.ndarray
    mean_abs: np.ndarray
    metrics: MetricSet
    top_feature: str


def network_signature(g: Graph, seed: int = 0, hp: Hyperparameters = Hyperparameters(),
                      background_size: int = DEFAULT_BACKGROUND, workers: int | None = None) -> Signature:
    """Fit the fused model once and summarise its SHAP values on the test set."""
    res = run_once(g, "od", seed, hp, workers=workers)
    report = explain_run(res.model, res.matrices.test, res.matrices.train, background_size, seed)
    summary = aggregate_importance(report)
    return Signature(report.mean_signed, report.mean_abs, res.metrics, summary.top_feature)
