"""Dataset demographic and content auditing for labelled image corpora.

The package measures who appears in a dataset (face-based census metrics),
what the images contain (NSFW score statistics, clustering, a review
shortlist), how the label space behaves (semantic coordinates, co-occurrence
bias, vocabulary screening), and how models perform per class, then folds
everything into a reproducible audit card.  A small HTTP service coordinates
the human review survey.

Every number the package emits is deterministic: aggregation uses
compensated summation, output floats use shortest round-trip formatting,
and no stage consumes randomness.
"""

from .accuracy import ClassAccuracy, HumanDeltaRow, human_delta_ranking, human_delta_ttest, topk_accuracy
from .affinity import ClusteringResult, affinity_propagation, similarity_matrix
from .card import CardBundle, render_audit_card
from .census import (
    ClassCensusRow,
    CrossModelReport,
    SummaryCounts,
    assemble_census_table,
    compare_models,
    compute_class_census,
    summarize_dataset,
)
from .config import AuditConfig, load_config
from .cooccurrence import (
    GroupDistribution,
    SkewRankEntry,
    assign_groups,
    group_gender_distributions,
    skewness_ranking,
)
from .errors import AuditError, ParseError
from .nsfw import (
    ClassNsfwStats,
    Shortlist,
    class_nsfw_stats,
    clustering_features,
    image_nsfw_score,
    select_shortlist,
)
from .records import (
    ClassInfo,
    FaceAnnotation,
    ImageKey,
    LabelEmbedding,
    NsfwAnnotation,
    PredictionRecord,
    TaxonomyRecord,
)
from .screening import intersect_label_sets, load_watchlist, screen_labels
from .semanticity import SemanticCoord, attach_coordinates, pca_project, semantic_surface
from .stats import pearson, skewness, welch_t
from .survey import Survey, SurveyItem, build_queue, export_survey, replay

__version__ = "1.0.0"

__all__ = [
    "AuditConfig",
    "AuditError",
    "CardBundle",
    "ClassAccuracy",
    "ClassCensusRow",
    "ClassInfo",
    "ClassNsfwStats",
    "ClusteringResult",
    "CrossModelReport",
    "FaceAnnotation",
    "GroupDistribution",
    "HumanDeltaRow",
    "ImageKey",
    "LabelEmbedding",
    "NsfwAnnotation",
    "ParseError",
    "PredictionRecord",
    "SemanticCoord",
    "Shortlist",
    "SkewRankEntry",
    "SummaryCounts",
    "Survey",
    "SurveyItem",
    "TaxonomyRecord",
    "affinity_propagation",
    "assemble_census_table",
    "assign_groups",
    "attach_coordinates",
    "build_queue",
    "class_nsfw_stats",
    "clustering_features",
    "compare_models",
    "compute_class_census",
    "export_survey",
    "group_gender_distributions",
    "human_delta_ranking",
    "human_delta_ttest",
    "image_nsfw_score",
    "intersect_label_sets",
    "load_config",
    "load_watchlist",
    "pca_project",
    "pearson",
    "render_audit_card",
    "replay",
    "screen_labels",
    "select_shortlist",
    "semantic_surface",
    "similarity_matrix",
    "skewness",
    "skewness_ranking",
    "summarize_dataset",
    "topk_accuracy",
    "welch_t",
]
