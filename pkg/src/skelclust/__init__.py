"""Density-based clustering over a knot skeleton.

The pipeline: overfit k-means knots, approximate Delaunay edges witnessed by
2-NN assignments, density-based edge weights (Voronoi / face / tube), and
hierarchical segmentation of the knots, with labels propagated to every
observation through its nearest knot.
"""

from .bench import (
    ExperimentConfig,
    ExperimentReport,
    LabeledDataset,
    add_noise_points,
    adjusted_rand_index,
    gen_manifold_mixture,
    gen_mickey,
    gen_mix_mickey,
    gen_ring,
    gen_yinyang,
    generate,
    knn_density_denoise,
    run_experiment,
)
from .core import (
    KnotSet,
    as_data_matrix,
    euclidean_dist,
    resolve_threads,
    rng_stream,
    two_nearest_knots,
)
from .errors import (
    DataError,
    DegenerateEdgeWarning,
    DegenerateGeometryError,
    DegenerateSampleError,
    SkelclustError,
    UsageError,
)
from .knots import KMeansConfig, kmeans, kmeans_objective, knot_size_histogram, reference_knot_count
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .segmentation import (
    ClusteringResult,
    Dendrogram,
    assign_labels,
    cut_dendrogram,
    hierarchical_cluster,
    similarity_to_distance,
)
from .skeleton import EdgeList, SkeletonGraph, approx_delaunay, load_skeleton_json
from .weights import (
    BandwidthRule,
    KernelSpec,
    TubeSpec,
    avgdist_similarity,
    face_density,
    project_to_central_line,
    silverman_bandwidth,
    tube_density,
    tube_radius_rule,
    voronoi_density,
    weight_skeleton,
)

__version__ = "0.1.0"

__all__ = [
    "BandwidthRule",
    "ClusteringResult",
    "DataError",
    "DegenerateEdgeWarning",
    "DegenerateGeometryError",
    "DegenerateSampleError",
    "Dendrogram",
    "EdgeList",
    "ExperimentConfig",
    "ExperimentReport",
    "KMeansConfig",
    "KernelSpec",
    "KnotSet",
    "LabeledDataset",
    "PipelineConfig",
    "PipelineResult",
    "SkelclustError",
    "SkeletonGraph",
    "TubeSpec",
    "UsageError",
    "add_noise_points",
    "adjusted_rand_index",
    "approx_delaunay",
    "as_data_matrix",
    "assign_labels",
    "avgdist_similarity",
    "cut_dendrogram",
    "euclidean_dist",
    "face_density",
    "gen_manifold_mixture",
    "gen_mickey",
    "gen_mix_mickey",
    "gen_ring",
    "gen_yinyang",
    "generate",
    "hierarchical_cluster",
    "kmeans",
    "kmeans_objective",
    "knn_density_denoise",
    "knot_size_histogram",
    "load_skeleton_json",
    "project_to_central_line",
    "reference_knot_count",
    "resolve_threads",
    "rng_stream",
    "run_experiment",
    "run_pipeline",
    "silverman_bandwidth",
    "similarity_to_distance",
    "tube_density",
    "tube_radius_rule",
    "two_nearest_knots",
    "voronoi_density",
    "weight_skeleton",
]
