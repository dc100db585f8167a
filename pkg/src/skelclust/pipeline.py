"""End-to-end pipeline: knots -> edges -> weights -> segmentation -> labels.

One configuration object drives a full clustering run; the result bundles
every intermediate artifact so callers can inspect, serialize, or re-cut
without recomputing.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .core import KnotSet, as_data_matrix
from .errors import UsageError
from .knots import KMeansConfig, kmeans
from .segmentation import (
    ClusteringResult,
    Dendrogram,
    assign_labels,
    cut_dendrogram,
    hierarchical_cluster,
    similarity_to_distance,
)
from .skeleton import EdgeList, SkeletonGraph, approx_delaunay
from .weights import BandwidthRule, KernelSpec, TubeSpec, weight_skeleton


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a clustering run depends on; fully serializable."""

    clusters: int = 2
    k: int | str = "auto"
    weight: str = "voronoi"
    kernel: str = "gaussian"
    bandwidth_mode: str = "silverman_rate"
    rate_exponent: float = -0.2
    fixed_h: float | None = None
    tube_radius: float | str = "auto"
    tube_grid: int = 101
    linkage: str = "single"
    restarts: int = 100
    seed: int = 0
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass(frozen=True)
class PipelineResult:
    knots: KnotSet
    edges: EdgeList
    graph: SkeletonGraph
    dendrogram: Dendrogram
    clustering: ClusteringResult
    wall_ms: float


def run_pipeline(
    data,
    cfg: PipelineConfig,
    knots: KnotSet | None = None,
    graph: SkeletonGraph | None = None,
) -> PipelineResult:
    """Run the full pipeline on ``data``.

    Passing a prebuilt ``knots`` skips the k-means step; passing a prebuilt
    ``graph`` (e.g. reloaded from skeleton JSON) additionally skips edge and
    weight construction, so the same skeleton can be re-segmented at a
    different cluster count cheaply.
    """
    x = as_data_matrix(data)
    t0 = time.perf_counter()
    if graph is not None:
        knots = graph.knots
        edges = EdgeList(pairs=np.array(graph.edges), counts=np.array(graph.evidence))
    else:
        if knots is None:
            knots = kmeans(
                x,
                KMeansConfig(k=cfg.k, restarts=cfg.restarts, seed=cfg.seed),
                threads=cfg.threads,
            )
        edges = approx_delaunay(knots)
        graph = weight_skeleton(
            edges,
            x,
            knots,
            kind=cfg.weight,
            kernel=KernelSpec(cfg.kernel),
            bandwidth=BandwidthRule(
                mode=cfg.bandwidth_mode,
                rate_exponent=cfg.rate_exponent,
                fixed_h=cfg.fixed_h,
            ),
            tube=TubeSpec(radius=cfg.tube_radius, grid_points=cfg.tube_grid),
            threads=cfg.threads,
        )
    distances = similarity_to_distance(graph.edges, graph.weights, knots.k)
    dendrogram = hierarchical_cluster(distances, cfg.linkage)
    groups = cut_dendrogram(dendrogram, cfg.clusters)
    clustering = assign_labels(groups, knots)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    return PipelineResult(
        knots=knots,
        edges=edges,
        graph=graph,
        dendrogram=dendrogram,
        clustering=clustering,
        wall_ms=wall_ms,
    )
