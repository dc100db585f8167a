import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skelclust import (
    ExperimentConfig,
    LabeledDataset,
    UsageError,
    add_noise_points,
    adjusted_rand_index,
    gen_manifold_mixture,
    gen_mickey,
    gen_mix_mickey,
    gen_ring,
    gen_yinyang,
    knn_density_denoise,
    run_experiment,
)
from skelclust.bench import MIXMICKEY_SMALL_CENTERS, MIXMICKEY_VAR, REPORT_COLUMNS

from oracles import pair_counting_ari


# --- generators ----------------------------------------------------------------


def test_yinyang_shape_and_histogram():
    ds = gen_yinyang(2, seed=0)
    assert (ds.n, ds.d) == (3200, 2)
    assert np.bincount(ds.truth).tolist() == [2000, 400, 400, 200, 200]


def test_yinyang_noise_dims_have_expected_sd():
    ds = gen_yinyang(200, seed=3)
    assert ds.d == 200
    sd = ds.data[:, 150].std()
    assert 0.08 <= sd <= 0.12


def test_yinyang_seeds_differ_but_histogram_fixed():
    a = gen_yinyang(2, seed=0)
    b = gen_yinyang(2, seed=1)
    assert not np.array_equal(a.data, b.data)
    assert np.bincount(a.truth).tolist() == np.bincount(b.truth).tolist()


def test_yinyang_deterministic_per_seed():
    a = gen_yinyang(7, seed=5)
    b = gen_yinyang(7, seed=5)
    np.testing.assert_array_equal(a.data, b.data)


def test_yinyang_rejects_d1():
    with pytest.raises(UsageError):
        gen_yinyang(1, seed=0)


def test_mickey_histogram_and_total():
    for d in (2, 10):
        ds = gen_mickey(d, seed=0)
        assert ds.n == 1200
        assert np.bincount(ds.truth).tolist() == [1000, 100, 100]


def test_manifold_mixture_histogram():
    ds = gen_manifold_mixture(3, seed=0)
    assert ds.n == 3200
    assert np.bincount(ds.truth).tolist() == [2000, 400, 800]
    assert ds.d == 3


def test_manifold_mixture_plane_is_flat_in_third_dim():
    ds = gen_manifold_mixture(3, seed=1)
    plane = ds.data[ds.truth == 0]
    assert np.all(plane[:, 2] == 0.0)


def test_manifold_mixture_rejects_d2():
    with pytest.raises(UsageError):
        gen_manifold_mixture(2, seed=0)


def test_ring_count_within_binomial_band():
    ds = gen_ring(2, seed=0)
    assert ds.n == 1200
    ring_count = int((ds.truth == 1).sum())
    assert abs(ring_count - 200) <= 40


def test_ring_mean_radius_near_one():
    ds = gen_ring(2, seed=2)
    ring = ds.data[ds.truth == 1, :2]
    mean_radius = float(np.linalg.norm(ring, axis=1).mean())
    assert abs(mean_radius - 1.0) <= 0.05


def test_mix_mickey_histogram_and_moments():
    ds = gen_mix_mickey(seed=0)
    assert np.bincount(ds.truth).tolist() == [2000, 600, 600]
    assert ds.d == 2
    big = ds.data[ds.truth == 0]
    assert np.allclose(big.var(axis=0), MIXMICKEY_VAR, rtol=0.15)
    small = ds.data[ds.truth == 1]
    assert np.allclose(small.mean(axis=0), MIXMICKEY_SMALL_CENTERS[0], atol=0.2)


# --- noise points -----------------------------------------------------------


def test_add_noise_counts_and_labels():
    ds = gen_yinyang(5, seed=0)
    noisy = add_noise_points(ds, 0.2, seed=0)
    assert noisy.n == 3840
    assert noisy.noise_label == 5
    assert (noisy.truth == 5).sum() == 640
    np.testing.assert_array_equal(noisy.data[:3200], ds.data)
    np.testing.assert_array_equal(noisy.truth[:3200], ds.truth)


def test_add_noise_rounds_to_zero_is_identity():
    ds = LabeledDataset(data=np.eye(3), truth=np.zeros(3, dtype=np.int64))
    out = add_noise_points(ds, 0.1, seed=0)
    assert out.n == 3
    assert out.noise_label is None


def test_noise_labels_never_collide():
    ds = gen_mickey(2, seed=1)
    noisy = add_noise_points(ds, 0.5, seed=1)
    assert noisy.noise_label not in np.unique(ds.truth)
    assert noisy.signal_mask().sum() == 1200


def test_noise_points_inside_expanded_box():
    ds = gen_yinyang(2, seed=4)
    noisy = add_noise_points(ds, 0.2, seed=4)
    box_lo = ds.data[:, :2].min(axis=0)
    box_hi = ds.data[:, :2].max(axis=0)
    span = box_hi - box_lo
    pts = noisy.data[3200:, :2]
    assert np.all(pts >= box_lo - 0.026 * span)
    assert np.all(pts <= box_hi + 0.026 * span)


# --- adjusted Rand index -------------------------------------------------------


def test_ari_identical_partitions():
    labels = np.array([0, 0, 1, 1, 2])
    assert adjusted_rand_index(labels, labels) == 1.0


def test_ari_relabeled_partition_still_one():
    assert adjusted_rand_index([0, 0, 1, 1], [5, 5, 2, 2]) == 1.0


def test_ari_singletons_vs_one_cluster():
    a = np.arange(6)
    b = np.zeros(6, dtype=int)
    assert adjusted_rand_index(a, b) == 0.0


def test_ari_symmetry_and_length_check():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 4, 30)
    b = rng.integers(0, 3, 30)
    assert adjusted_rand_index(a, b) == adjusted_rand_index(b, a)
    with pytest.raises(UsageError):
        adjusted_rand_index(a, b[:-1])


@pytest.mark.parametrize("seed", range(10))
def test_ari_matches_pair_counting_oracle(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 5, 50)
    b = rng.integers(0, 4, 50)
    assert adjusted_rand_index(a, b) == pytest.approx(pair_counting_ari(a, b), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=6), min_size=2, max_size=40),
    st.integers(min_value=0, max_value=2**31 - 1),
)
def test_ari_permutation_invariance(labels, seed):
    a = np.array(labels)
    rng = np.random.default_rng(seed)
    b = rng.integers(0, 3, size=len(a))
    remap = rng.permutation(8)
    assert adjusted_rand_index(remap[a], b) == pytest.approx(
        adjusted_rand_index(a, b), abs=1e-12
    )


def test_ari_large_n_no_overflow():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 3, 10_000)
    b = (a + (rng.uniform(size=10_000) < 0.1)) % 3
    val = adjusted_rand_index(a, b)
    assert 0.5 < val < 1.0


# --- denoiser ----------------------------------------------------------------


def make_ds(data):
    return LabeledDataset(data=np.asarray(data, dtype=float), truth=np.zeros(len(data), dtype=np.int64))


def test_denoise_frac_zero_identity():
    ds = make_ds(np.random.default_rng(0).normal(size=(20, 2)))
    out = knn_density_denoise(ds, 0.0)
    assert out.n == 20


def test_denoise_removes_far_outlier():
    rng = np.random.default_rng(1)
    data = np.vstack([rng.normal(0, 0.1, size=(49, 2)), [[50.0, 50.0]]])
    out = knn_density_denoise(make_ds(data), 1.0 / 50.0)
    assert out.n == 49
    assert not np.any(np.all(out.data == [50.0, 50.0], axis=1))


def test_denoise_exact_count():
    rng = np.random.default_rng(2)
    ds = make_ds(rng.uniform(size=(137, 3)))
    out = knn_density_denoise(ds, 0.1)
    assert out.n == 137 - math.ceil(0.1 * 137)


def test_denoise_rejects_full_fraction():
    ds = make_ds(np.eye(4))
    with pytest.raises(UsageError):
        knn_density_denoise(ds, 1.0)


def test_denoise_permutation_equivariant():
    rng = np.random.default_rng(3)
    data = rng.normal(size=(60, 2))
    ds = make_ds(data)
    kept = knn_density_denoise(ds, 0.2)
    perm = rng.permutation(60)
    kept_perm = knn_density_denoise(make_ds(data[perm]), 0.2)
    as_set = {tuple(row) for row in kept.data}
    as_set_perm = {tuple(row) for row in kept_perm.data}
    assert as_set == as_set_perm


def test_denoise_high_dimensional_path():
    rng = np.random.default_rng(4)
    data = np.vstack([rng.normal(0, 0.1, size=(40, 30)), rng.normal(5, 0.1, size=(1, 30))])
    out = knn_density_denoise(make_ds(data), 1.0 / 41.0)
    assert out.n == 40
    assert np.all(np.abs(out.data) < 2.0)


# --- experiment runner ---------------------------------------------------------


def test_run_experiment_schema_single_row():
    cfg = ExperimentConfig(
        generator="yinyang", dims=(2,), methods=("voronoi",), s_values=(5,),
        repeats=1, seed=0, k=57, restarts=2,
    )
    report = run_experiment(cfg)
    assert len(report.rows) == 1
    row = report.rows[0]
    assert set(row) == set(REPORT_COLUMNS)
    assert -1.0 <= row["ari"] <= 1.0
    assert row["k"] == 57
    assert row["wall_ms"] > 0


def test_run_experiment_row_count_cartesian():
    cfg = ExperimentConfig(
        generator="mickey", dims=(2, 3), methods=("voronoi", "avgdist"), s_values=(3,),
        repeats=2, seed=0, k=20, restarts=2,
    )
    report = run_experiment(cfg)
    assert len(report.rows) == 2 * 2 * 2
    assert report.rows == sorted(
        report.rows, key=lambda r: (r["seed"], r["generator"], r["d"], r["method"], r["S"])
    )


def test_run_experiment_needs_methods():
    with pytest.raises(UsageError):
        run_experiment(ExperimentConfig(methods=()))


def test_run_experiment_records_failures_and_continues():
    cfg = ExperimentConfig(
        generator="mix_mickey", dims=(3,), methods=("voronoi",), s_values=(3,),
        repeats=2, seed=0, restarts=2,
    )
    report = run_experiment(cfg)
    assert len(report.failures) == 2
    assert len(report.rows) == 2
    assert all(math.isnan(r["ari"]) for r in report.rows)


def test_run_experiment_signal_only_scoring_with_noise():
    cfg = ExperimentConfig(
        generator="yinyang", dims=(2,), methods=("voronoi",), s_values=(5,),
        repeats=1, seed=0, k=30, restarts=3, noise_frac=0.2,
    )
    report = run_experiment(cfg)
    assert len(report.rows) == 1
    assert not math.isnan(report.rows[0]["ari"])
