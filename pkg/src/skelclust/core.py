"""Shared domain types, distance primitives, and deterministic randomness.

Everything downstream works on a validated observation matrix (one row per
observation) and a ``KnotSet`` describing, for every observation, its nearest
and second-nearest knot. Both are immutable after construction, so they can be
shared freely across threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import UsageError

# Above this dimension a k-d tree stops paying for itself and a blocked linear
# scan (O(nkd), cache friendly) is used instead.
KDTREE_MAX_DIM = 20

# Soft cap on scratch memory for the blocked scan, in float64 elements.
_SCAN_BLOCK_BUDGET = 4_000_000


def as_data_matrix(data) -> np.ndarray:
    """Validate and return an n x d float64 observation matrix.

    Accepts anything array-like with one observation per row. Rejects empty
    input and non-finite values; the returned array is C-contiguous. Treat it
    as immutable: every downstream index refers into it.
    """
    x = np.ascontiguousarray(data, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise UsageError(f"expected a 2-d observation matrix, got ndim={x.ndim}")
    n, d = x.shape
    if n < 1 or d < 1:
        raise UsageError(f"observation matrix must be non-empty, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise UsageError("observation matrix contains NaN or Inf")
    return x


def euclidean_dist(a, b) -> float:
    """Euclidean distance between two equal-length vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise UsageError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def _block_rows(n: int, k: int, d: int) -> int:
    block = max(1, _SCAN_BLOCK_BUDGET // max(1, k * d))
    return min(n, block)


def _scan_two_nearest(points: np.ndarray, centers: np.ndarray):
    """Exact 2-NN by blocked linear scan; ties broken by lowest center index.

    Squared distances are computed as sums of squared coordinate differences
    (the same arithmetic as a per-pair double loop), so the result agrees
    bit-for-bit with a brute-force scan, ties included: ``argmin`` returns the
    first minimum, which is the lowest index.
    """
    n, d = points.shape
    k = centers.shape[0]
    assign1 = np.empty(n, dtype=np.int64)
    assign2 = np.empty(n, dtype=np.int64)
    step = _block_rows(n, k, d)
    for start in range(0, n, step):
        block = points[start : start + step]
        d2 = np.sum((block[:, None, :] - centers[None, :, :]) ** 2, axis=-1)
        first = np.argmin(d2, axis=1)
        d2[np.arange(len(block)), first] = np.inf
        second = np.argmin(d2, axis=1)
        assign1[start : start + step] = first
        assign2[start : start + step] = second
    return assign1, assign2


def _kdtree_two_nearest(points: np.ndarray, centers: np.ndarray):
    """2-NN via k-d tree with the same tie rule as the linear scan.

    The tree is only trusted to propose candidates; ordering and ties are
    resolved from exactly recomputed squared distances. Rows where a
    non-returned center could tie the second-nearest distance fall back to
    the exact scan.
    """
    k = centers.shape[0]
    tree = cKDTree(centers)
    q = min(3, k)
    _, idx = tree.query(points, k=q)
    idx = np.atleast_2d(idx)
    cand_d2 = np.sum((points[:, None, :] - centers[idx]) ** 2, axis=-1)
    # Reorder candidates lexicographically by (distance, center index).
    order = np.lexsort((idx, cand_d2), axis=1)
    idx = np.take_along_axis(idx, order, axis=1)
    cand_d2 = np.take_along_axis(cand_d2, order, axis=1)
    assign1 = idx[:, 0].astype(np.int64)
    assign2 = idx[:, 1].astype(np.int64)
    if q >= 3:
        ambiguous = cand_d2[:, 2] <= cand_d2[:, 1]
        if np.any(ambiguous):
            a1, a2 = _scan_two_nearest(points[ambiguous], centers)
            assign1[ambiguous] = a1
            assign2[ambiguous] = a2
    return assign1, assign2


def two_nearest_knots(points, centers):
    """Indices of the nearest and second-nearest center for every point.

    Parameters
    ----------
    points : array-like, shape (n, d)
    centers : array-like, shape (k, d), k >= 2

    Returns
    -------
    (assign1, assign2) : pair of int64 arrays of length n

    Ties are broken by the smaller center index. Agrees exactly with an
    exhaustive O(nk) scan.
    """
    points = as_data_matrix(points)
    centers = as_data_matrix(centers)
    if centers.shape[0] < 2:
        raise UsageError("two_nearest_knots needs at least 2 centers")
    if points.shape[1] != centers.shape[1]:
        raise UsageError(
            f"dimension mismatch: points d={points.shape[1]}, centers d={centers.shape[1]}"
        )
    if centers.shape[1] <= KDTREE_MAX_DIM:
        return _kdtree_two_nearest(points, centers)
    return _scan_two_nearest(points, centers)


@dataclass(frozen=True)
class KnotSet:
    """Knot coordinates plus per-observation 2-NN assignments.

    Attributes
    ----------
    centers : (k, d) array of knot coordinates
    assign1 : (n,) index of the nearest knot per observation
    assign2 : (n,) index of the second-nearest knot (-1 when k == 1)
    sizes : (k,) number of observations whose nearest knot is each knot
    """

    centers: np.ndarray
    assign1: np.ndarray
    assign2: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        for arr in (self.centers, self.assign1, self.assign2, self.sizes):
            arr.setflags(write=False)

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def n(self) -> int:
        return self.assign1.shape[0]

    @classmethod
    def from_centers(cls, data, centers) -> "KnotSet":
        """Build a KnotSet for ``data`` around the given centers."""
        data = as_data_matrix(data)
        centers = as_data_matrix(centers)
        k = centers.shape[0]
        if k >= 2:
            a1, a2 = two_nearest_knots(data, centers)
        else:
            a1 = np.zeros(data.shape[0], dtype=np.int64)
            a2 = np.full(data.shape[0], -1, dtype=np.int64)
        sizes = np.bincount(a1, minlength=k).astype(np.int64)
        return cls(centers=centers, assign1=a1, assign2=a2, sizes=sizes)


def rng_stream(seed: int, *branch: int) -> np.random.Generator:
    """Deterministic generator for ``seed``, optionally branched by indices.

    The same (seed, branch) always yields a bit-identical stream, independent
    of thread count or call order, so every stochastic operation in the
    package takes an explicit seed and derives its generator here.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(b) for b in branch))
    return np.random.Generator(np.random.PCG64(ss))


def resolve_threads(threads=None) -> int:
    """Thread count from an explicit value, SKELETON_THREADS, or 1."""
    if threads is None:
        threads = os.environ.get("SKELETON_THREADS", "")
    try:
        value = int(threads)
    except (TypeError, ValueError):
        value = 1
    return max(1, value)


def ordered_map(fn, items, threads=1):
    """Apply ``fn`` over ``items``, preserving order.

    With threads > 1 the work runs on a thread pool; results come back in
    input order, so parallelism can never change what a caller computes.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
