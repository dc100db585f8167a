"""Command-line surface: gen, cluster, eval, bench, denoise.

Exit codes: 0 success, 2 usage error, 3 data/ingestion error, 4 degenerate
geometry. Every cluster run echoes its exact configuration into the output
directory so the run can be reproduced byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    GENERATORS,
    ExperimentConfig,
    LabeledDataset,
    adjusted_rand_index,
    generate,
    knn_density_denoise,
    run_experiment,
)
from .core import KnotSet, resolve_threads
from .errors import DataError, DegenerateGeometryError, SkelclustError, UsageError
from .knots import knot_size_histogram
from .pipeline import PipelineConfig, run_pipeline
from .skeleton import SkeletonGraph, load_skeleton_json

# --- CSV and JSON plumbing ---------------------------------------------------


def _write_dataset_csv(stream, data: np.ndarray, truth=None) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    header = [f"x{i}" for i in range(data.shape[1])]
    if truth is not None:
        header.append("truth")
    writer.writerow(header)
    for i in range(data.shape[0]):
        row = [repr(float(v)) for v in data[i]]
        if truth is not None:
            row.append(str(int(truth[i])))
        writer.writerow(row)


def _read_csv_table(path: str):
    """Parse a CSV into (float matrix, header or None); errors name row/col."""
    rows = []
    header = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for r, row in enumerate(reader):
            if not row or all(not cell.strip() for cell in row):
                continue
            if r == 0:
                try:
                    rows.append([float(cell) for cell in row])
                    continue
                except ValueError:
                    header = [cell.strip() for cell in row]
                    continue
            parsed = []
            for c, cell in enumerate(row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: row {r + 1}, column {c + 1}: not a number: {cell!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise DataError(f"{path}: no data rows")
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise DataError(f"{path}: inconsistent row lengths {sorted(widths)}")
    return np.asarray(rows, dtype=np.float64), header


def _read_features(path: str):
    """Feature matrix for clustering; a trailing 'truth' column is dropped."""
    table, header = _read_csv_table(path)
    if header is not None and header and header[-1].lower() == "truth":
        return table[:, :-1], table[:, -1].astype(np.int64)
    return table, None


def _read_labels(path: str) -> np.ndarray:
    """Label vector: the last column of the file."""
    table, _ = _read_csv_table(path)
    return table[:, -1]


def _json_dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


# --- SVG scatter ---------------------------------------------------------------

_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def write_scatter_svg(path, points2d, labels, centers2d=None, edges=None, size=640):
    """Static scatter of the first two dimensions, colored by label, with the
    skeleton drawn over it. Output is fully deterministic."""
    pts = np.asarray(points2d, dtype=np.float64)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    margin = 20.0

    def sx(v):
        return margin + (v - lo[0]) / span[0] * (size - 2 * margin)

    def sy(v):
        return size - margin - (v - lo[1]) / span[1] * (size - 2 * margin)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i in range(pts.shape[0]):
        color = _PALETTE[int(labels[i]) % len(_PALETTE)]
        out.append(
            f'<circle cx="{sx(pts[i, 0]):.2f}" cy="{sy(pts[i, 1]):.2f}" r="2" '
            f'fill="{color}" fill-opacity="0.6"/>'
        )
    if centers2d is not None and edges is not None:
        c = np.asarray(centers2d, dtype=np.float64)
        for j, ell in np.asarray(edges, dtype=np.int64).reshape(-1, 2):
            out.append(
                f'<line x1="{sx(c[j, 0]):.2f}" y1="{sy(c[j, 1]):.2f}" '
                f'x2="{sx(c[ell, 0]):.2f}" y2="{sy(c[ell, 1]):.2f}" '
                f'stroke="black" stroke-width="0.8" stroke-opacity="0.5"/>'
            )
        for j in range(c.shape[0]):
            out.append(
                f'<rect x="{sx(c[j, 0]) - 2.5:.2f}" y="{sy(c[j, 1]) - 2.5:.2f}" '
                f'width="5" height="5" fill="black"/>'
            )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


# --- subcommands ----------------------------------------------------------------


def cmd_gen(args) -> int:
    ds = generate(args.generator, args.dim, args.seed if args.seed is not None else 0)
    hist = np.bincount(ds.truth).tolist()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            _write_dataset_csv(fh, ds.data, ds.truth)
        print(f"n={ds.n} d={ds.d} components={hist} -> {args.out}")
    else:
        _write_dataset_csv(sys.stdout, ds.data, ds.truth)
        print(f"n={ds.n} d={ds.d} components={hist}", file=sys.stderr)
    return 0


def _pipeline_config_from(args) -> PipelineConfig:
    doc = {}
    if args.config:
        loaded = json.loads(Path(args.config).read_text())
        known = set(PipelineConfig.__dataclass_fields__)
        doc = {key: val for key, val in loaded.items() if key in known}
    overrides = {
        "clusters": args.clusters,
        "k": args.k,
        "weight": args.weight,
        "kernel": args.kernel,
        "bandwidth_mode": "fixed" if args.fixed_h is not None else None,
        "rate_exponent": args.rate_exponent,
        "fixed_h": args.fixed_h,
        "tube_radius": args.tube_radius,
        "tube_grid": args.tube_grid,
        "linkage": args.linkage,
        "restarts": args.restarts,
        "seed": args.seed,
        "threads": resolve_threads(args.threads),
    }
    doc.update({key: val for key, val in overrides.items() if val is not None})
    if isinstance(doc.get("k"), str) and doc["k"] != "auto":
        doc["k"] = int(doc["k"])
    if isinstance(doc.get("tube_radius"), str) and doc["tube_radius"] != "auto":
        doc["tube_radius"] = float(doc["tube_radius"])
    return PipelineConfig.from_dict(doc)


def cmd_cluster(args) -> int:
    cfg = _pipeline_config_from(args)
    data, _ = _read_features(args.input)
    graph = None
    if args.skeleton:
        centers, edges, evidence, weights, weight_kind = load_skeleton_json(
            Path(args.skeleton).read_text()
        )
        graph = SkeletonGraph(
            knots=KnotSet.from_centers(data, centers),
            edges=edges,
            evidence=evidence,
            weights=weights,
            weight_kind=weight_kind,
            degenerate=np.zeros(len(weights), dtype=bool),
        )
    result = run_pipeline(data, cfg, graph=graph)

    out_dir = Path(args.out_dir or "skelclust_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = result.clustering.labels
    with open(out_dir / "labels.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "label"])
        for i, lab in enumerate(labels):
            writer.writerow([i, int(lab)])
    (out_dir / "skeleton.json").write_text(_json_dumps(result.graph.to_json_dict()))
    (out_dir / "dendrogram.json").write_text(_json_dumps(result.dendrogram.to_json_dict()))
    with open(out_dir / "knot_sizes.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["knot", "size"])
        writer.writerows(knot_size_histogram(result.knots))
    echoed = {"command": "cluster", "input": str(args.input), **cfg.to_dict()}
    (out_dir / "config.json").write_text(_json_dumps(echoed))
    if data.shape[1] >= 2:
        write_scatter_svg(
            out_dir / "scatter.svg",
            data[:, :2],
            labels,
            result.knots.centers[:, :2],
            result.graph.edges,
        )
    print(
        f"k={result.knots.k} edges={len(result.graph.edges)} "
        f"S={result.clustering.s} wall_ms={result.wall_ms:.0f} -> {out_dir}"
    )
    return 0


def cmd_eval(args) -> int:
    pred = _read_labels(args.pred)
    truth = _read_labels(args.truth)
    if pred.shape[0] != truth.shape[0]:
        raise UsageError(
            f"label files differ in length: {pred.shape[0]} vs {truth.shape[0]}"
        )
    print(f"{adjusted_rand_index(pred, truth):.6f}")
    return 0


def cmd_bench(args) -> int:
    doc = json.loads(Path(args.config).read_text())
    generators = doc.pop("generators", None) or [doc.pop("generator", "yinyang")]
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise UsageError(f"unknown bench config keys: {sorted(unknown)}")
    for key in ("dims", "methods", "s_values"):
        if key in doc and doc[key] is not None:
            doc[key] = tuple(doc[key])
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.threads is not None:
        doc["threads"] = resolve_threads(args.threads)

    rows, failures = [], []
    for gen_name in generators:
        cfg = ExperimentConfig(generator=gen_name, **doc)
        report = run_experiment(cfg)
        rows.extend(report.rows)
        failures.extend(report.failures)

    out = Path(args.out or (Path(args.out_dir or ".") / "report.csv"))
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["seed", "generator", "d", "method", "linkage", "k", "S", "ari", "wall_ms"])
        for row in rows:
            writer.writerow(
                [
                    row["seed"], row["generator"], row["d"], row["method"],
                    row["linkage"], row["k"], row["S"],
                    f"{row['ari']:.6f}", f"{row['wall_ms']:.1f}",
                ]
            )
    groups = {}
    for row in rows:
        key = (row["generator"], row["d"], row["method"], row["S"])
        groups.setdefault(key, []).append(row["ari"])
    for (gen_name, d, method, s), aris in sorted(groups.items()):
        finite = [a for a in aris if not np.isnan(a)]
        med = float(np.median(finite)) if finite else float("nan")
        print(f"median {gen_name} d={d} {method} S={s}: {med:.4f}")
    for failure in failures:
        print(f"FAILED {failure}", file=sys.stderr)
    print(f"report -> {out}")
    return 0


def cmd_denoise(args) -> int:
    data, truth = _read_features(args.input)
    ds = LabeledDataset(
        data=data,
        truth=truth if truth is not None else np.zeros(len(data), dtype=np.int64),
    )
    kept = knn_density_denoise(ds, args.frac)
    with open(args.out, "w", newline="") as fh:
        _write_dataset_csv(fh, kept.data, kept.truth if truth is not None else None)
    print(f"kept {kept.n} of {ds.n} rows -> {args.out}")
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master RNG seed")
    common.add_argument("--threads", default=None,
                        help="worker threads (or set SKELETON_THREADS)")
    common.add_argument("--out-dir", default=None, help="output directory")

    parser = argparse.ArgumentParser(
        prog="skelclust",
        description="Density-based clustering over a knot skeleton.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", parents=[common], help="write a synthetic dataset CSV")
    p_gen.add_argument("generator", choices=sorted(GENERATORS))
    p_gen.add_argument("--dim", type=int, default=2, help="ambient dimension")
    p_gen.add_argument("--out", default=None, help="output CSV (default: stdout)")
    p_gen.set_defaults(fn=cmd_gen)

    p_cluster = sub.add_parser("cluster", parents=[common], help="cluster a CSV dataset")
    p_cluster.add_argument("--input", required=True, help="input CSV of observations")
    p_cluster.add_argument("--clusters", type=int, default=None, help="final cluster count S")
    p_cluster.add_argument("--k", default=None, help='knot count or "auto"')
    p_cluster.add_argument("--weight", default=None,
                           choices=["voronoi", "face", "tube", "avgdist"])
    p_cluster.add_argument("--kernel", default=None, choices=["gaussian", "uniform"])
    p_cluster.add_argument("--rate-exponent", type=float, default=None,
                           help="bandwidth rate exponent in [-1/3, -1/10]")
    p_cluster.add_argument("--fixed-h", type=float, default=None,
                           help="fixed bandwidth (overrides the rate rule)")
    p_cluster.add_argument("--tube-radius", default=None, help='radius or "auto"')
    p_cluster.add_argument("--tube-grid", type=int, default=None)
    p_cluster.add_argument("--linkage", default=None,
                           choices=["single", "average", "complete"])
    p_cluster.add_argument("--restarts", type=int, default=None)
    p_cluster.add_argument("--config", default=None, help="JSON config; flags override it")
    p_cluster.add_argument("--skeleton", default=None,
                           help="re-segment a saved skeleton.json instead of reweighting")
    p_cluster.set_defaults(fn=cmd_cluster)

    p_eval = sub.add_parser("eval", parents=[common], help="adjusted Rand index of two label files")
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--truth", required=True)
    p_eval.set_defaults(fn=cmd_eval)

    p_bench = sub.add_parser("bench", parents=[common], help="run a benchmark sweep")
    p_bench.add_argument("--config", required=True, help="JSON experiment config")
    p_bench.add_argument("--out", default=None, help="report CSV path")
    p_bench.set_defaults(fn=cmd_bench)

    p_dn = sub.add_parser("denoise", parents=[common],
                          help="drop the lowest-density fraction of rows")
    p_dn.add_argument("--input", required=True)
    p_dn.add_argument("--frac", type=float, default=0.1)
    p_dn.add_argument("--out", required=True)
    p_dn.set_defaults(fn=cmd_denoise)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except DegenerateGeometryError as exc:
        print(f"degenerate geometry: {exc}", file=sys.stderr)
        return 4
    except SkelclustError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
