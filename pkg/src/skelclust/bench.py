"""Synthetic benchmarks, evaluation metrics, and experiment running.

The generators reproduce the package's standard test geometries: a five-part
ring-and-clumps figure ("yinyang"), an unbalanced three-disk figure
("mickey"), a mixture of a plane, a ball, and a ring of different intrinsic
dimensions ("manifold_mixture"), a thin ring around a dense core ("ring"),
and three heavily overlapping Gaussians ("mix_mickey"). All intrinsic
structure lives in the leading dimensions; remaining dimensions are filled
with independent N(0, 0.1^2) noise so the same figure can be embedded at any
ambient dimension.

Every geometric constant is collected below so the figures can be tuned in
one place.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .core import KDTREE_MAX_DIM, rng_stream
from .errors import UsageError
from .knots import KMeansConfig, kmeans
from .segmentation import (
    assign_labels,
    cut_dendrogram,
    hierarchical_cluster,
    similarity_to_distance,
)
from .skeleton import approx_delaunay
from .weights import BandwidthRule, KernelSpec, TubeSpec, weight_skeleton

# --- geometry constants -----------------------------------------------------

NOISE_DIM_SD = 0.1            # sd of the padding dimensions, all generators

YINYANG_OUTER_RADIUS = 3.0
YINYANG_OUTER_N = 2000
YINYANG_ARC_RADIUS = 1.0
YINYANG_ARC_CENTERS = ((0.0, 1.0), (0.0, -1.0))
YINYANG_ARC_SPAN = 0.75 * math.pi   # angular width; a near-semicircle that
                                    # keeps the two arcs from touching
YINYANG_ARC_N = 400           # sized so the five components total n = 3200
YINYANG_CLUMP_SD = 0.2        # wide enough that k-means grants clumps >= 2
                              # knots; tighter clumps collapse to one knot
                              # whose whole cell then bridges to the arcs
YINYANG_CLUMP_N = 200
YINYANG_JITTER_SD = 0.1       # radial thickness of circle and arcs

MICKEY_HEAD_RADIUS = 1.0
MICKEY_HEAD_N = 1000
MICKEY_EAR_RADIUS = 0.3
MICKEY_EAR_CENTERS = ((1.15, 1.15), (-1.15, 1.15))  # clear of the head; a
                                                    # 0.11 gap collapses once
                                                    # noise dims are added
MICKEY_EAR_N = 100

MM_PLANE_SIDE = 4.0
MM_PLANE_N = 2000
MM_BLOB_CENTER = (6.0, 0.0, 0.0)
MM_BLOB_SD = 0.5
MM_BLOB_N = 400
MM_RING_CENTER = (2.0, 6.0, 0.0)
MM_RING_RADIUS = 1.5
MM_RING_JITTER_SD = 0.1
MM_RING_N = 800

RING_N = 1200
RING_PROB = 1.0 / 6.0
RING_SD = 0.2

MIXMICKEY_VAR = 2.0
MIXMICKEY_BIG_N = 2000
MIXMICKEY_SMALL_N = 600
MIXMICKEY_SMALL_CENTERS = ((3.0, 3.0), (-3.0, 3.0))

NOISE_BOX_EXPAND = 0.05       # relative widening of the uniform-noise box

# Natural cluster count per generator, used when an experiment leaves S unset.
GENERATOR_S = {
    "yinyang": 5,
    "mickey": 3,
    "manifold_mixture": 3,
    "ring": 2,
    "mix_mickey": 3,
}


@dataclass(frozen=True)
class LabeledDataset:
    """Observations plus ground-truth component labels.

    ``noise_label`` is set when uniform background noise was appended; rows
    with that truth value are not part of any real component.
    """

    data: np.ndarray
    truth: np.ndarray
    noise_label: int | None = None

    def __post_init__(self):
        self.data.setflags(write=False)
        self.truth.setflags(write=False)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def signal_mask(self) -> np.ndarray:
        if self.noise_label is None:
            return np.ones(self.n, dtype=bool)
        return self.truth != self.noise_label


def _pad_noise(rng, x2: np.ndarray, d: int) -> np.ndarray:
    extra = d - x2.shape[1]
    if extra == 0:
        return x2
    pad = rng.normal(0.0, NOISE_DIM_SD, size=(x2.shape[0], extra))
    return np.hstack([x2, pad])


def _arc(rng, n, center, radius, theta_mid, span, jitter_sd):
    theta = rng.uniform(theta_mid - span / 2.0, theta_mid + span / 2.0, n)
    r = radius + rng.normal(0.0, jitter_sd, n)
    return np.column_stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)])


def _disk(rng, n, center, radius):
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    return np.column_stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)])


def gen_yinyang(d: int, seed: int) -> LabeledDataset:
    """Five components, n = 3200: a big circle of 2000 points, two inner
    arcs of 400 each, two tight clumps of 200 each."""
    if d < 2:
        raise UsageError("yinyang needs d >= 2")
    rng = rng_stream(seed)
    parts = [
        _arc(rng, YINYANG_OUTER_N, (0.0, 0.0), YINYANG_OUTER_RADIUS, 0.0,
             2.0 * math.pi, YINYANG_JITTER_SD),
        # Upper arc opens right, lower arc opens left.
        _arc(rng, YINYANG_ARC_N, YINYANG_ARC_CENTERS[0], YINYANG_ARC_RADIUS,
             0.0, YINYANG_ARC_SPAN, YINYANG_JITTER_SD),
        _arc(rng, YINYANG_ARC_N, YINYANG_ARC_CENTERS[1], YINYANG_ARC_RADIUS,
             math.pi, YINYANG_ARC_SPAN, YINYANG_JITTER_SD),
        np.asarray(YINYANG_ARC_CENTERS[0])
        + rng.normal(0.0, YINYANG_CLUMP_SD, (YINYANG_CLUMP_N, 2)),
        np.asarray(YINYANG_ARC_CENTERS[1])
        + rng.normal(0.0, YINYANG_CLUMP_SD, (YINYANG_CLUMP_N, 2)),
    ]
    x2 = np.vstack(parts)
    truth = np.repeat(np.arange(5), [len(p) for p in parts])
    return LabeledDataset(data=_pad_noise(rng, x2, d), truth=truth)


def gen_mickey(d: int, seed: int) -> LabeledDataset:
    """Three uniform disks, n = 1200, deliberately unbalanced (1000/100/100)."""
    if d < 2:
        raise UsageError("mickey needs d >= 2")
    rng = rng_stream(seed)
    parts = [
        _disk(rng, MICKEY_HEAD_N, (0.0, 0.0), MICKEY_HEAD_RADIUS),
        _disk(rng, MICKEY_EAR_N, MICKEY_EAR_CENTERS[0], MICKEY_EAR_RADIUS),
        _disk(rng, MICKEY_EAR_N, MICKEY_EAR_CENTERS[1], MICKEY_EAR_RADIUS),
    ]
    x2 = np.vstack(parts)
    truth = np.repeat(np.arange(3), [len(p) for p in parts])
    return LabeledDataset(data=_pad_noise(rng, x2, d), truth=truth)


def gen_manifold_mixture(d: int, seed: int) -> LabeledDataset:
    """Structures of intrinsic dimension 2, 3, and 1 in ambient d >= 3:
    a flat plane (2000), a Gaussian ball (400), and a thin ring (800)."""
    if d < 3:
        raise UsageError("manifold_mixture needs d >= 3")
    rng = rng_stream(seed)
    plane = np.column_stack([
        rng.uniform(0.0, MM_PLANE_SIDE, MM_PLANE_N),
        rng.uniform(0.0, MM_PLANE_SIDE, MM_PLANE_N),
        np.zeros(MM_PLANE_N),
    ])
    blob = np.asarray(MM_BLOB_CENTER) + rng.normal(0.0, MM_BLOB_SD, (MM_BLOB_N, 3))
    theta = rng.uniform(0.0, 2.0 * math.pi, MM_RING_N)
    ring = np.column_stack([
        MM_RING_CENTER[0] + MM_RING_RADIUS * np.cos(theta),
        MM_RING_CENTER[1] + MM_RING_RADIUS * np.sin(theta),
        np.full(MM_RING_N, MM_RING_CENTER[2]),
    ]) + rng.normal(0.0, MM_RING_JITTER_SD, (MM_RING_N, 3))
    parts = [plane, blob, ring]
    x3 = np.vstack(parts)
    truth = np.repeat(np.arange(3), [len(p) for p in parts])
    return LabeledDataset(data=_pad_noise(rng, x3, d), truth=truth)


def gen_ring(d: int, seed: int) -> LabeledDataset:
    """A thin unit ring (drawn with probability 1/6) around a dense Gaussian
    core, n = 1200; truth label 1 marks the ring."""
    if d < 2:
        raise UsageError("ring needs d >= 2")
    rng = rng_stream(seed)
    on_ring = rng.uniform(0.0, 1.0, RING_N) < RING_PROB
    theta = rng.uniform(0.0, 2.0 * math.pi, RING_N)
    centers = np.where(
        on_ring[:, None],
        np.column_stack([np.cos(theta), np.sin(theta)]),
        0.0,
    )
    x2 = centers + rng.normal(0.0, RING_SD, (RING_N, 2))
    truth = on_ring.astype(np.int64)
    return LabeledDataset(data=_pad_noise(rng, x2, d), truth=truth)


def gen_mix_mickey(seed: int) -> LabeledDataset:
    """Three overlapping spherical Gaussians in the plane (2000/600/600),
    sharing variance 2 per coordinate."""
    rng = rng_stream(seed)
    sd = math.sqrt(MIXMICKEY_VAR)
    parts = [
        rng.normal(0.0, sd, (MIXMICKEY_BIG_N, 2)),
        np.asarray(MIXMICKEY_SMALL_CENTERS[0]) + rng.normal(0.0, sd, (MIXMICKEY_SMALL_N, 2)),
        np.asarray(MIXMICKEY_SMALL_CENTERS[1]) + rng.normal(0.0, sd, (MIXMICKEY_SMALL_N, 2)),
    ]
    x2 = np.vstack(parts)
    truth = np.repeat(np.arange(3), [len(p) for p in parts])
    return LabeledDataset(data=x2, truth=truth)


GENERATORS = {
    "yinyang": gen_yinyang,
    "mickey": gen_mickey,
    "manifold_mixture": gen_manifold_mixture,
    "ring": gen_ring,
    "mix_mickey": gen_mix_mickey,
}


def generate(name: str, d: int, seed: int) -> LabeledDataset:
    """Dispatch to a generator by name."""
    if name not in GENERATORS:
        raise UsageError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    if name == "mix_mickey":
        if d != 2:
            raise UsageError("mix_mickey is 2-dimensional only")
        return gen_mix_mickey(seed)
    return GENERATORS[name](d, seed)


def add_noise_points(ds: LabeledDataset, frac: float, seed: int) -> LabeledDataset:
    """Append round(frac * n) background points, labeled as noise.

    Noise is uniform over the (slightly expanded) bounding box of the first
    two data dimensions and N(0, 0.1^2) in every remaining dimension.
    """
    if not (0.0 < frac <= 1.0):
        raise UsageError(f"noise fraction must be in (0, 1], got {frac}")
    m = int(round(frac * ds.n))
    if m == 0:
        return ds
    rng = rng_stream(seed, 1)
    lo = ds.data[:, :2].min(axis=0)
    hi = ds.data[:, :2].max(axis=0)
    margin = (hi - lo) * (NOISE_BOX_EXPAND / 2.0)
    box2 = rng.uniform(lo - margin, hi + margin, size=(m, 2))
    noise = _pad_noise(rng, box2, ds.d)
    label = int(ds.truth.max()) + 1
    return LabeledDataset(
        data=np.vstack([ds.data, noise]),
        truth=np.concatenate([ds.truth, np.full(m, label, dtype=np.int64)]),
        noise_label=label,
    )


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected pair-counting agreement between two labelings.

    Exact integer pair counting throughout; 1 for identical partitions, 0 in
    expectation for independent ones. Degenerate pairs of partitions whose
    expected and maximum indices coincide score 1.
    """
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape[0] != b.shape[0]:
        raise UsageError(f"label lengths differ: {a.shape[0]} vs {b.shape[0]}")
    n = a.shape[0]
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    na = int(ia.max()) + 1
    nb = int(ib.max()) + 1
    contingency = np.bincount(ia * nb + ib, minlength=na * nb).reshape(na, nb)

    def pairs(counts) -> int:
        return int(sum(int(c) * (int(c) - 1) // 2 for c in counts))

    sum_cells = pairs(contingency.ravel())
    sum_a = pairs(contingency.sum(axis=1))
    sum_b = pairs(contingency.sum(axis=0))
    n2 = n * (n - 1) // 2
    numerator = 2 * (n2 * sum_cells - sum_a * sum_b)
    denominator = n2 * (sum_a + sum_b) - 2 * sum_a * sum_b
    if denominator == 0:
        return 1.0
    return numerator / denominator


def _kth_neighbor_distance(x: np.ndarray, kth: int) -> np.ndarray:
    """Distance from each row to its kth nearest other row."""
    n, d = x.shape
    if d <= KDTREE_MAX_DIM:
        tree = cKDTree(x)
        dists, _ = tree.query(x, k=kth + 1)
        return dists[:, kth]
    out = np.empty(n)
    step = max(1, 2_000_000 // max(1, n))
    for start in range(0, n, step):
        block = x[start : start + step]
        d2 = np.sum((block[:, None, :] - x[None, :, :]) ** 2, axis=-1)
        part = np.partition(d2, kth, axis=1)[:, kth]
        out[start : start + step] = np.sqrt(part)
    return out


def knn_density_denoise(ds: LabeledDataset, frac: float) -> LabeledDataset:
    """Drop the lowest-density ceil(frac * n) observations.

    Density is ranked by the distance to the ceil(sqrt(n))-th nearest
    neighbor: the larger that distance, the lower the density. Ranking ties
    break by row index.
    """
    if not (0.0 <= frac < 1.0):
        raise UsageError(f"denoise fraction must be in [0, 1), got {frac}")
    m = int(math.ceil(frac * ds.n))
    if m == 0:
        return ds
    kth = min(int(math.ceil(math.sqrt(ds.n))), ds.n - 1)
    radius = _kth_neighbor_distance(np.asarray(ds.data), kth)
    order = np.lexsort((np.arange(ds.n), -radius))
    drop = np.zeros(ds.n, dtype=bool)
    drop[order[:m]] = True
    return LabeledDataset(
        data=ds.data[~drop],
        truth=ds.truth[~drop],
        noise_label=ds.noise_label,
    )


# --- experiment runner -------------------------------------------------------

REPORT_COLUMNS = ("seed", "generator", "d", "method", "linkage", "k", "S", "ari", "wall_ms")


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark sweep: generators x dims x methods x S x repeats."""

    generator: str = "yinyang"
    dims: tuple = (2,)
    methods: tuple = ("voronoi",)
    linkage: str = "single"
    s_values: tuple | None = None
    repeats: int = 10
    seed: int = 0
    k: int | str = "auto"
    restarts: int = 10
    kernel: str = "gaussian"
    rate_exponent: float = -0.2
    tube_grid: int = 101
    noise_frac: float = 0.0
    denoise_frac: float = 0.0
    threads: int = 1


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def median_ari(self, **filters) -> float:
        """Median ARI over rows matching the given column values."""
        vals = [
            r["ari"]
            for r in self.rows
            if not math.isnan(r["ari"])
            and all(r[key] == val for key, val in filters.items())
        ]
        if not vals:
            return float("nan")
        return float(np.median(vals))


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run the full pipeline per (dim, repeat, method, S) and report ARI.

    When noise points were added, ARI is computed on the signal observations
    only. Failures are recorded per row (ari = NaN) and the sweep continues.
    """
    if not cfg.methods:
        raise UsageError("experiment needs at least one method")
    s_values = cfg.s_values or (GENERATOR_S.get(cfg.generator, 2),)
    report = ExperimentReport()
    for d in cfg.dims:
        for rep in range(cfg.repeats):
            seed_i = cfg.seed + rep
            try:
                t0 = time.perf_counter()
                ds = generate(cfg.generator, d, seed_i)
                if cfg.noise_frac > 0.0:
                    ds = add_noise_points(ds, cfg.noise_frac, seed_i)
                if cfg.denoise_frac > 0.0:
                    ds = knn_density_denoise(ds, cfg.denoise_frac)
                knots = kmeans(
                    ds.data,
                    KMeansConfig(k=cfg.k, restarts=cfg.restarts, seed=seed_i),
                    threads=cfg.threads,
                )
                edges = approx_delaunay(knots)
                shared_ms = (time.perf_counter() - t0) * 1000.0
            except Exception as exc:  # noqa: BLE001 - per-seed isolation
                report.failures.append(f"seed {seed_i} d {d}: {exc}")
                for method in cfg.methods:
                    for s in s_values:
                        report.rows.append(
                            _row(cfg, seed_i, d, method, cfg.k, s, float("nan"), 0.0)
                        )
                continue
            mask = ds.signal_mask()
            for method in cfg.methods:
                try:
                    t1 = time.perf_counter()
                    graph = weight_skeleton(
                        edges,
                        ds.data,
                        knots,
                        kind=method,
                        kernel=KernelSpec(cfg.kernel),
                        bandwidth=BandwidthRule(rate_exponent=cfg.rate_exponent),
                        tube=TubeSpec(grid_points=cfg.tube_grid),
                        threads=cfg.threads,
                    )
                    dist = similarity_to_distance(graph.edges, graph.weights, knots.k)
                    dendro = hierarchical_cluster(dist, cfg.linkage)
                    for s in s_values:
                        groups = cut_dendrogram(dendro, s)
                        labels = assign_labels(groups, knots).labels
                        ari = adjusted_rand_index(ds.truth[mask], labels[mask])
                        wall = shared_ms + (time.perf_counter() - t1) * 1000.0
                        report.rows.append(
                            _row(cfg, seed_i, d, method, knots.k, s, ari, wall)
                        )
                except Exception as exc:  # noqa: BLE001 - per-method isolation
                    report.failures.append(f"seed {seed_i} d {d} method {method}: {exc}")
                    for s in s_values:
                        report.rows.append(
                            _row(cfg, seed_i, d, method, knots.k, s, float("nan"), 0.0)
                        )
    report.rows.sort(key=lambda r: (r["seed"], r["generator"], r["d"], r["method"], r["S"]))
    return report


def _row(cfg, seed, d, method, k, s, ari, wall_ms):
    return {
        "seed": seed,
        "generator": cfg.generator,
        "d": d,
        "method": method,
        "linkage": cfg.linkage,
        "k": k if isinstance(k, (int, np.integer)) else "auto",
        "S": s,
        "ari": ari,
        "wall_ms": wall_ms,
    }
