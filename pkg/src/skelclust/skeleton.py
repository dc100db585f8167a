"""Approximate Delaunay edges over knots, built from 2-NN witness counts.

Two knots get an edge exactly when at least one observation has those two
knots as its nearest pair: such a witness certifies that the corresponding
Voronoi cells share a boundary, so (in general position) every edge produced
here is an edge of the exact Delaunay triangulation of the knots. Edges the
data never witnesses are simply absent; downstream weighting treats a missing
edge as similarity zero, which is what the witness-count estimator would
return anyway.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import KnotSet
from .errors import UsageError


@dataclass(frozen=True)
class EdgeList:
    """Sorted unique knot index pairs with their witness counts.

    ``pairs`` is an (m, 2) int array with pairs[i, 0] < pairs[i, 1], sorted
    lexicographically; ``counts[i]`` is the number of observations whose
    nearest two knots are exactly that pair, so counts sums to n.
    """

    pairs: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.pairs.setflags(write=False)
        self.counts.setflags(write=False)

    def __len__(self) -> int:
        return self.pairs.shape[0]


def approx_delaunay(knots: KnotSet) -> EdgeList:
    """Edge list witnessed by the 2-NN assignments of ``knots``."""
    if knots.k < 2:
        raise UsageError("need at least 2 knots to build edges")
    lo = np.minimum(knots.assign1, knots.assign2)
    hi = np.maximum(knots.assign1, knots.assign2)
    keyed = lo * np.int64(knots.k) + hi
    uniq, counts = np.unique(keyed, return_counts=True)
    pairs = np.column_stack([uniq // knots.k, uniq % knots.k]).astype(np.int64)
    return EdgeList(pairs=pairs, counts=counts.astype(np.int64))


@dataclass(frozen=True)
class SkeletonGraph:
    """Weighted skeleton: knots, witnessed edges, and per-edge similarity.

    ``weight_kind`` names the similarity used ("voronoi", "face", "tube", or
    "avgdist"); ``degenerate`` flags edges whose weight was forced to 0
    because the local sample was unusable.
    """

    knots: KnotSet
    edges: np.ndarray
    evidence: np.ndarray
    weights: np.ndarray
    weight_kind: str
    degenerate: np.ndarray

    def __post_init__(self):
        for arr in (self.edges, self.evidence, self.weights, self.degenerate):
            arr.setflags(write=False)

    def to_json_dict(self) -> dict:
        return {
            "knots": self.knots.centers.tolist(),
            "edges": self.edges.tolist(),
            "evidence": self.evidence.tolist(),
            "weights": self.weights.tolist(),
            "weight_kind": self.weight_kind,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


def load_skeleton_json(text: str):
    """Parse a serialized skeleton back into plain arrays.

    Returns (centers, edges, evidence, weights, weight_kind). Rebuilding a
    full KnotSet additionally needs the original data; see
    ``KnotSet.from_centers``.
    """
    doc = json.loads(text)
    centers = np.asarray(doc["knots"], dtype=np.float64)
    edges = np.asarray(doc["edges"], dtype=np.int64).reshape(-1, 2)
    evidence = np.asarray(doc["evidence"], dtype=np.int64)
    weights = np.asarray(doc["weights"], dtype=np.float64)
    return centers, edges, evidence, weights, str(doc["weight_kind"])
