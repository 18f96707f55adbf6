"""Per-image counting-confidence scoring for sticky-trap pest counting.

The pipeline computes six factor scores per trap image (detection
confidence, predicted count, gradient sharpness, no-reference quality,
histogram complexity, and distribution uniformity), labels images with a
Jaccard counting confidence against ground truth, analyzes metric
sensitivity to capture conditions, and fits a polynomial regression from
factors to confidence.
"""

from .clustering import (
    ClusterConfig,
    ClusterSummary,
    UniformityResult,
    adaptive_eps,
    assess_uniformity,
    dbscan,
    pdu_score,
)
from .config import PipelineConfig, RegressionConfig, load_config
from .data import (
    BoundingBox,
    ConditionMetadata,
    DensityClass,
    Detection,
    FACTOR_NAMES,
    FactorVector,
    GroundTruthBox,
    ImageRecord,
    Phase,
    StirSpeed,
    TIndex,
    attach_annotations,
    load_detections,
    load_ground_truth,
    load_manifest,
    save_detections,
    save_ground_truth,
    save_manifest,
)
from .errors import CountconfError, NumericalError, ValidationError
from .evaluation import (
    DetectionEvalReport,
    MatchResult,
    ap_at_50,
    counting_factors,
    evaluate_corpus,
    iou,
    jaccard_of_totals,
    match,
    mcc,
)
from .imageops import (
    GrayImage,
    average_gradient_magnitude,
    edge_density,
    histogram_entropy,
    to_gray,
)
from .niqe import NiqeModel, fit_pristine_model, load_default_model, niqe_score, quality_score
from .pipeline import ImageScores, score_corpus, score_image, score_record
from .regression import (
    ConfidenceModel,
    FitMetrics,
    Normalizer,
    evaluate_model,
    export_scatter,
    fit_confidence_model,
    run_ablation,
)
from .scene import Centroid, SegmentationConfig, extract_centroids, recolor_tool
from .stats import (
    Factor,
    HypothesisRow,
    MetricRanking,
    Polarity,
    ScoreRow,
    ScoreTable,
    evaluate_hypotheses,
    one_way_anova,
    select_optimal,
    welch_t_test,
)
from .synth import (
    DegradeSpec,
    SceneSpec,
    confidence_plan,
    degrade_for,
    generate,
    generate_corpus,
    pristine_plan,
    single_variable_plan,
    stub_detect,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "Centroid",
    "ClusterConfig",
    "ClusterSummary",
    "ConditionMetadata",
    "ConfidenceModel",
    "CountconfError",
    "DegradeSpec",
    "DensityClass",
    "Detection",
    "DetectionEvalReport",
    "FACTOR_NAMES",
    "Factor",
    "FactorVector",
    "FitMetrics",
    "GrayImage",
    "GroundTruthBox",
    "HypothesisRow",
    "ImageRecord",
    "ImageScores",
    "MatchResult",
    "MetricRanking",
    "NiqeModel",
    "Normalizer",
    "NumericalError",
    "Phase",
    "PipelineConfig",
    "Polarity",
    "RegressionConfig",
    "SceneSpec",
    "ScoreRow",
    "ScoreTable",
    "SegmentationConfig",
    "StirSpeed",
    "TIndex",
    "UniformityResult",
    "ValidationError",
    "adaptive_eps",
    "ap_at_50",
    "assess_uniformity",
    "attach_annotations",
    "average_gradient_magnitude",
    "confidence_plan",
    "counting_factors",
    "dbscan",
    "degrade_for",
    "edge_density",
    "evaluate_corpus",
    "evaluate_hypotheses",
    "evaluate_model",
    "export_scatter",
    "extract_centroids",
    "fit_confidence_model",
    "fit_pristine_model",
    "generate",
    "generate_corpus",
    "histogram_entropy",
    "iou",
    "jaccard_of_totals",
    "load_config",
    "load_default_model",
    "load_detections",
    "load_ground_truth",
    "load_manifest",
    "match",
    "mcc",
    "niqe_score",
    "one_way_anova",
    "pdu_score",
    "pristine_plan",
    "quality_score",
    "recolor_tool",
    "run_ablation",
    "save_detections",
    "save_ground_truth",
    "save_manifest",
    "score_corpus",
    "score_image",
    "score_record",
    "select_optimal",
    "single_variable_plan",
    "stub_detect",
    "to_gray",
    "welch_t_test",
]
