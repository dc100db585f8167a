"""Knot construction by restarted k-means, plus knot-size diagnostics.

Knots are an overfit k-means solution (k much larger than the final cluster
count) used purely as a concise representation of the data; global optimality
of the k-means objective is not required. Each restart is seeded
independently from the master seed by restart index, so running restarts in
parallel cannot change which solution is selected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import KnotSet, as_data_matrix, ordered_map, rng_stream
from .errors import DegenerateGeometryError, UsageError


def reference_knot_count(n: int) -> int:
    """Default knot count: sqrt(n) rounded to the nearest integer, min 1."""
    if n < 1:
        raise UsageError(f"need at least one observation, got n={n}")
    return max(1, int(math.floor(math.sqrt(n) + 0.5)))


@dataclass(frozen=True)
class KMeansConfig:
    """Settings for restarted Lloyd k-means.

    ``k`` may be the string "auto", meaning ``reference_knot_count(n)``.
    """

    k: int | str = "auto"
    restarts: int = 1000
    max_iters: int = 100
    tol: float = 1e-6
    seed: int = 0

    def resolve_k(self, n: int) -> int:
        if self.k == "auto":
            return reference_knot_count(n)
        k = int(self.k)
        if k < 1:
            raise UsageError(f"k must be >= 1, got {k}")
        return k


def _assign_to_centers(x, centers, x_sq):
    """Nearest-center labels and squared distances via the expanded norm.

    Uses ||x - c||^2 = ||x||^2 + ||c||^2 - 2 x.c so the inner loop is one
    matrix product; clipping guards the tiny negatives the expansion can
    produce. argmin breaks ties by lowest center index.
    """
    c_sq = np.einsum("ij,ij->i", centers, centers)
    d2 = x_sq[:, None] + c_sq[None, :] - 2.0 * (x @ centers.T)
    np.maximum(d2, 0.0, out=d2)
    labels = np.argmin(d2, axis=1)
    best = d2[np.arange(x.shape[0]), labels]
    return labels, best


def _centroids(x, labels, k):
    """Per-label means; labels absent from ``labels`` yield zero rows."""
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    starts = np.flatnonzero(np.r_[True, sorted_labels[1:] != sorted_labels[:-1]])
    sums = np.zeros((k, x.shape[1]))
    sums[sorted_labels[starts]] = np.add.reduceat(x[order], starts, axis=0)
    counts = np.bincount(labels, minlength=k)
    return sums, counts


def _kmeanspp_init(x, k, rng, x_sq):
    """k-means++ seeding: spread initial centers by squared-distance weight."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centers[0] = x[first]
    closest = np.sum((x - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # All remaining mass sits on already chosen centers; any point works.
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=closest / total))
        centers[j] = x[pick]
        np.minimum(closest, np.sum((x - centers[j]) ** 2, axis=1), out=closest)
    return centers


def _lloyd(x, k, rng, max_iters, tol, x_sq):
    """One Lloyd run from a k-means++ start; returns (objective, centers)."""
    centers = _kmeanspp_init(x, k, rng, x_sq)
    prev_obj = None
    for _ in range(max_iters):
        labels, best = _assign_to_centers(x, centers, x_sq)
        sums, counts = _centroids(x, labels, k)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            # Repair: move each empty center onto the point farthest from its
            # currently assigned center. Donors must come from clusters of
            # size >= 2 so a donation never empties another cluster.
            best = best.copy()
            labels = labels.copy()
            for j in empty:
                eligible = counts[labels] > 1
                donor = int(np.argmax(np.where(eligible, best, -np.inf)))
                sums[labels[donor]] -= x[donor]
                counts[labels[donor]] -= 1
                sums[j] = x[donor]
                counts[j] = 1
                labels[donor] = j
                best[donor] = -np.inf
        centers = sums / counts[:, None]
        obj = float(best[np.isfinite(best)].sum()) if empty.size else float(best.sum())
        if (
            prev_obj is not None
            and not empty.size
            and prev_obj - obj <= tol * max(prev_obj, 1e-300)
        ):
            break
        prev_obj = obj
    labels, best = _assign_to_centers(x, centers, x_sq)
    return float(best.sum()), centers


def kmeans(data, cfg: KMeansConfig = KMeansConfig(), threads: int = 1) -> KnotSet:
    """Best-of-restarts k-means knots for ``data``.

    Runs ``cfg.restarts`` independent Lloyd iterations from k-means++ starts
    and keeps the run with the lowest within-cluster sum of squares (ties by
    restart index). The returned KnotSet carries exact nearest/second-nearest
    assignments recomputed by :func:`two_nearest_knots`.
    """
    x = as_data_matrix(data)
    n = x.shape[0]
    k = cfg.resolve_k(n)
    if cfg.restarts < 1:
        raise UsageError(f"restarts must be >= 1, got {cfg.restarts}")
    if n < k:
        raise UsageError(f"k={k} exceeds number of observations n={n}")
    if k > 1 and np.all(x == x[0]):
        raise DegenerateGeometryError("all observations identical; cannot place k > 1 knots")

    x_sq = np.einsum("ij,ij->i", x, x)
    children = np.random.SeedSequence(int(cfg.seed)).spawn(cfg.restarts)

    def one_restart(child):
        rng = np.random.Generator(np.random.PCG64(child))
        return _lloyd(x, k, rng, cfg.max_iters, cfg.tol, x_sq)

    runs = ordered_map(one_restart, children, threads=threads)
    objectives = np.array([obj for obj, _ in runs])
    centers = runs[int(np.argmin(objectives))][1]

    knots = KnotSet.from_centers(x, centers)
    # The exact 2-NN pass can, in pathological near-ties, empty a knot the
    # Lloyd pass thought occupied; re-seat such knots before returning.
    guard = 0
    while knots.sizes.min() == 0 and guard < k:
        centers = np.array(knots.centers)
        dist_to_own = np.sqrt(
            np.sum((x - centers[knots.assign1]) ** 2, axis=1)
        )
        for j in np.flatnonzero(knots.sizes == 0):
            donor = int(np.argmax(dist_to_own))
            centers[j] = x[donor]
            dist_to_own[donor] = -1.0
        knots = KnotSet.from_centers(x, centers)
        guard += 1
    return knots


def kmeans_objective(data, knots: KnotSet) -> float:
    """Within-cluster sum of squares of ``knots`` on ``data``."""
    x = as_data_matrix(data)
    diffs = x - knots.centers[knots.assign1]
    return float(np.sum(diffs * diffs))


def knot_size_histogram(knots: KnotSet) -> list[tuple[int, int]]:
    """(knot index, size) pairs sorted by knot index; sizes sum to n."""
    return [(int(j), int(s)) for j, s in enumerate(knots.sizes)]
