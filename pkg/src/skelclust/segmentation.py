"""Knot segmentation: similarity inversion, agglomeration, cut, labels.

Edge similarities become distances by inversion; knots are then merged
bottom-up under a selectable linkage (single, average, complete), the
dendrogram is cut into S groups, and every observation inherits the group of
its nearest knot.

Absent or zero-weight edges get a large finite sentinel distance rather than
infinity so average-linkage arithmetic stays finite. If the skeleton has more
connected components than S, components end up merging at sentinel height in
index order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import KnotSet
from .errors import UsageError

LINKAGE_KINDS = ("single", "average", "complete")

# Sentinel distance for missing/zero-similarity edges: large enough to sort
# after every real inverse similarity, small enough that size-weighted
# average-linkage sums stay finite.
DISCONNECTED = 1e300


def similarity_to_distance(edges, weights, k: int) -> np.ndarray:
    """Symmetric k x k distance matrix with 1/weight on present edges.

    Edges with weight 0 and absent pairs both get the DISCONNECTED sentinel.
    The diagonal is 0.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    weights = np.asarray(weights, dtype=np.float64)
    if edges.shape[0] != weights.shape[0]:
        raise UsageError("edges and weights must align")
    if np.any(weights < 0):
        raise UsageError("similarities must be nonnegative")
    dist = np.full((k, k), DISCONNECTED, dtype=np.float64)
    np.fill_diagonal(dist, 0.0)
    positive = weights > 0.0
    j, ell = edges[positive, 0], edges[positive, 1]
    dist[j, ell] = 1.0 / weights[positive]
    dist[ell, j] = dist[j, ell]
    return dist


@dataclass(frozen=True)
class Dendrogram:
    """Full agglomeration history over k knots.

    ``merges`` holds k-1 rows (id_a, id_b, height) with id_a < id_b; original
    knots are ids 0..k-1 and the merge at step t creates id k+t. For single
    and average linkage the heights are nondecreasing.
    """

    merges: np.ndarray
    linkage_kind: str
    k: int

    def __post_init__(self):
        self.merges.setflags(write=False)

    def to_json_dict(self) -> dict:
        return {
            "merges": [[int(a), int(b), float(h)] for a, b, h in self.merges],
            "linkage": self.linkage_kind,
            "k": self.k,
        }


def _lance_williams(linkage, d_aj, d_bj, size_a, size_b):
    if linkage == "single":
        return np.minimum(d_aj, d_bj)
    if linkage == "complete":
        return np.maximum(d_aj, d_bj)
    wa = size_a / (size_a + size_b)
    wb = size_b / (size_a + size_b)
    return wa * d_aj + wb * d_bj


def hierarchical_cluster(distances, linkage: str = "single") -> Dendrogram:
    """Agglomerate a symmetric distance matrix into a dendrogram.

    At every step the globally closest active pair merges; ties resolve to
    the smallest (id_a, id_b) pair, which also makes disconnected components
    merge in index order at sentinel height. Inter-cluster distances are
    maintained by the Lance-Williams update for the chosen linkage.
    """
    if linkage not in LINKAGE_KINDS:
        raise UsageError(f"unknown linkage {linkage!r}; choose from {LINKAGE_KINDS}")
    dist = np.array(distances, dtype=np.float64)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise UsageError("distance matrix must be square")
    k = dist.shape[0]
    if k < 2:
        raise UsageError("need at least 2 knots to cluster")
    if not np.allclose(dist, dist.T, rtol=0.0, atol=0.0):
        raise UsageError("distance matrix must be exactly symmetric")

    work = dist.copy()
    np.fill_diagonal(work, np.inf)
    active = np.ones(k, dtype=bool)
    ids = np.arange(k, dtype=np.int64)          # current cluster id per slot
    sizes = np.ones(k, dtype=np.float64)
    merges = np.empty((k - 1, 3), dtype=np.float64)

    for step in range(k - 1):
        sub = work[np.ix_(active, active)]
        height = sub.min()
        # All tied closest pairs, as (id, id) with the smaller id first;
        # pick the lexicographically smallest.
        slots = np.flatnonzero(active)
        ti, tj = np.nonzero(sub == height)
        cand = sorted(
            (min(ids[slots[a]], ids[slots[b]]), max(ids[slots[a]], ids[slots[b]]))
            for a, b in zip(ti, tj)
            if a < b
        )
        id_a, id_b = cand[0]
        slot_a = slots[np.flatnonzero(ids[slots] == id_a)[0]]
        slot_b = slots[np.flatnonzero(ids[slots] == id_b)[0]]
        merges[step] = (id_a, id_b, height)

        others = active.copy()
        others[slot_a] = others[slot_b] = False
        merged = _lance_williams(
            linkage, work[slot_a, others], work[slot_b, others], sizes[slot_a], sizes[slot_b]
        )
        work[slot_a, others] = merged
        work[others, slot_a] = merged
        work[slot_a, slot_a] = np.inf
        active[slot_b] = False
        sizes[slot_a] += sizes[slot_b]
        ids[slot_a] = k + step
    return Dendrogram(merges=merges, linkage_kind=linkage, k=k)


def cut_dendrogram(dendro: Dendrogram, s: int) -> np.ndarray:
    """Partition the k knots into exactly ``s`` groups by undoing the last
    s-1 merges.

    Group ids are relabeled 0..s-1 in order of each group's smallest knot.
    """
    k = dendro.k
    if not (1 <= s <= k):
        raise UsageError(f"cluster count S={s} outside [1, {k}]")
    parent = np.arange(2 * k - 1, dtype=np.int64)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for step in range(k - s):
        id_a, id_b, _ = dendro.merges[step]
        new_id = k + step
        parent[find(int(id_a))] = new_id
        parent[find(int(id_b))] = new_id
    roots = np.array([find(j) for j in range(k)])
    _, groups = np.unique(roots, return_inverse=True)
    # np.unique sorts roots, which does not guarantee smallest-member order;
    # relabel by first appearance over knot index.
    remap = {}
    out = np.empty(k, dtype=np.int64)
    for j in range(k):
        g = int(groups[j])
        if g not in remap:
            remap[g] = len(remap)
        out[j] = remap[g]
    return out


@dataclass(frozen=True)
class ClusteringResult:
    """Final labels: every observation inherits its nearest knot's group."""

    labels: np.ndarray
    knot_groups: np.ndarray
    s: int

    def __post_init__(self):
        self.labels.setflags(write=False)
        self.knot_groups.setflags(write=False)


def assign_labels(knot_groups, knots: KnotSet) -> ClusteringResult:
    """Propagate knot group ids to observations through assign1."""
    knot_groups = np.asarray(knot_groups, dtype=np.int64)
    if knot_groups.shape[0] != knots.k:
        raise UsageError("knot_groups must cover every knot")
    labels = knot_groups[knots.assign1]
    return ClusteringResult(
        labels=labels, knot_groups=knot_groups, s=int(knot_groups.max()) + 1
    )
