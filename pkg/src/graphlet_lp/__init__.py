"""Graphlet orbit degrees as link predictors.

Counting (node and edge orbit degrees on 2-4 node graphlets), the classical
indices they generalise, a split/negative-sampling protocol, a boosted tree
classifier with exact Shapley attributions, and corpus-level analyses.
"""

from .atlas import CATEGORY_NAMES, DEFAULT_ATLAS, EDGE_LABELS, FEATURE_NAMES, NODE_LABELS, OrbitAtlas, canonical_label
from .boosting import BoostedModel, Hyperparameters, predict_proba, train
from .domains import NetworkRecord, clustering_stat, pca_2d, violin_data, winning_rates
from .errors import DataError, ValidationError
from .explain import ShapReport, aggregate_importance, exhaustive_shapley, tree_shap
from .graph import Graph, NodePair, load_edge_list, parse_edge_list, write_edge_list
from .metrics import ConfusionCounts, MetricSet, auc, pearson_correlation_matrix, threshold_metrics
from .oracle import brute_force_orbit_census
from .orbits import (edge_orbit_degrees, edge_orbit_table, joined_node_orbit_degrees, node_orbit_degrees,
                     node_orbit_table, pair_node_products)
from .predictors import (KatzConfig, classical_indices, classical_table, popularity_score, similarity_score,
                         verify_decompositions)
from .protocol import FeatureMatrix, SplitPlan, build_features, build_phase_matrices, make_split

__version__ = "0.1.0"
