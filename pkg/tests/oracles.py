"""Independent brute-force reference implementations used only by tests.

Everything here recomputes results from first principles (plain loops over
definitions), deliberately avoiding the production code paths it checks.
"""

import numpy as np


def brute_two_nearest(points, centers):
    """O(nk) double loop; ties by lowest center index via lexsort."""
    points = np.asarray(points, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    n, k = points.shape[0], centers.shape[0]
    a1 = np.empty(n, dtype=np.int64)
    a2 = np.empty(n, dtype=np.int64)
    for i in range(n):
        d2 = np.array([np.sum((points[i] - centers[j]) ** 2) for j in range(k)])
        order = np.lexsort((np.arange(k), d2))
        a1[i], a2[i] = order[0], order[1]
    return a1, a2


def lloyd_from_pair(x, init_pair, max_iters=200):
    """Plain 2-means Lloyd from a specific pair of points; returns WCSS."""
    centers = x[list(init_pair)].astype(np.float64).copy()
    for _ in range(max_iters):
        d2 = ((x[:, None, :] - centers[None]) ** 2).sum(-1)
        labels = d2.argmin(1)
        new = centers.copy()
        for j in range(2):
            if np.any(labels == j):
                new[j] = x[labels == j].mean(0)
        if np.allclose(new, centers, rtol=0.0, atol=0.0):
            break
        centers = new
    d2 = ((x[:, None, :] - centers[None]) ** 2).sum(-1)
    return float(d2.min(1).sum())


def best_lloyd_over_all_pairs(x):
    """Exhaustive best 2-means objective over every distinct init pair."""
    n = x.shape[0]
    best = np.inf
    for a in range(n):
        for b in range(a + 1, n):
            if np.array_equal(x[a], x[b]):
                continue
            best = min(best, lloyd_from_pair(x, (a, b)))
    return best


def exact_delaunay_edges_2d(points):
    """Edges of the exact 2-D Delaunay triangulation by circumcircle scan.

    A pair is an edge iff some triangle through it has an empty circumcircle
    (general position assumed; degenerate triples are skipped). O(k^4).
    """
    pts = np.asarray(points, dtype=np.float64)
    k = pts.shape[0]
    if k == 2:
        return {(0, 1)}
    edges = set()
    for i in range(k):
        for j in range(i + 1, k):
            for m in range(k):
                if m in (i, j):
                    continue
                center, r2 = _circumcircle(pts[i], pts[j], pts[m])
                if center is None:
                    continue
                empty = True
                for q in range(k):
                    if q in (i, j, m):
                        continue
                    if np.sum((pts[q] - center) ** 2) < r2 - 1e-12 * max(r2, 1.0):
                        empty = False
                        break
                if empty:
                    edges.add((i, j))
                    break
    return edges


def _circumcircle(a, b, c):
    ax, ay = a
    bx, by = b
    cx, cy = c
    det = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(det) < 1e-12:
        return None, None
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
          + (cx**2 + cy**2) * (ay - by)) / det
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
          + (cx**2 + cy**2) * (bx - ax)) / det
    center = np.array([ux, uy])
    return center, float(np.sum((a - center) ** 2))


def naive_voronoi_density(j, ell, data, centers):
    """Count points whose two nearest centers are {j, ell}, then divide."""
    a1, a2 = brute_two_nearest(data, centers)
    count = int(np.sum((np.minimum(a1, a2) == min(j, ell)) & (np.maximum(a1, a2) == max(j, ell))))
    dist = float(np.sqrt(np.sum((centers[j] - centers[ell]) ** 2)))
    return (count / data.shape[0]) / dist


def gauss(u):
    return np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)


def naive_face_density(j, ell, data, centers, assign1, h):
    """Per-point loop over the definition of the midpoint KDE."""
    cj, cl = centers[j], centers[ell]
    v = cl - cj
    length = np.sqrt(np.dot(v, v))
    total = 0.0
    n = data.shape[0]
    for i in range(n):
        if assign1[i] not in (j, ell):
            continue
        t = np.dot(data[i] - cj, v) / (length * length)
        total += gauss((t * length - 0.5 * length) / h)
    return total / (n * h)


def naive_tube_profile(j, ell, data, centers, h, radius, grid):
    """Disk-indicator projected KDE evaluated on an explicit grid."""
    cj, cl = centers[j], centers[ell]
    v = cl - cj
    length = np.sqrt(np.dot(v, v))
    n = data.shape[0]
    values = []
    for t in grid:
        total = 0.0
        for i in range(n):
            ti = np.dot(data[i] - cj, v) / (length * length)
            proj = cj + ti * v
            perp = np.sqrt(np.dot(data[i] - proj, data[i] - proj))
            if perp <= radius:
                total += gauss((ti * length - t * length) / h)
        values.append(total / (n * h))
    return np.array(values)


def naive_avgdist(j, ell, data, assign1):
    left = data[assign1 == j]
    right = data[assign1 == ell]
    total = 0.0
    for a in left:
        for b in right:
            total += np.sqrt(np.sum((a - b) ** 2))
    return 1.0 / (total / (len(left) * len(right)))


def naive_agglomerate(dist, linkage):
    """From-scratch agglomeration recomputing inter-cluster distances from
    membership lists and the original matrix (no Lance-Williams updates).

    Ties break on the smallest (id_a, id_b); merge t creates id k + t.
    """
    dist = np.asarray(dist, dtype=np.float64)
    k = dist.shape[0]
    clusters = {i: [i] for i in range(k)}
    merges = []
    next_id = k
    while len(clusters) > 1:
        best = None
        for ida in sorted(clusters):
            for idb in sorted(clusters):
                if idb <= ida:
                    continue
                cross = dist[np.ix_(clusters[ida], clusters[idb])]
                if linkage == "single":
                    val = cross.min()
                elif linkage == "complete":
                    val = cross.max()
                else:
                    val = cross.mean()
                cand = (val, ida, idb)
                if best is None or cand < best:
                    best = cand
        val, ida, idb = best
        merges.append((ida, idb, val))
        clusters[next_id] = clusters.pop(ida) + clusters.pop(idb)
        next_id += 1
    return merges


def prim_mst_edge_weights(dist):
    """Edge weights of a minimum spanning tree via Prim's algorithm."""
    dist = np.asarray(dist, dtype=np.float64)
    k = dist.shape[0]
    in_tree = np.zeros(k, dtype=bool)
    in_tree[0] = True
    best = dist[0].copy()
    weights = []
    for _ in range(k - 1):
        best_masked = np.where(in_tree, np.inf, best)
        nxt = int(np.argmin(best_masked))
        weights.append(float(best_masked[nxt]))
        in_tree[nxt] = True
        best = np.minimum(best, dist[nxt])
    return sorted(weights)


def pair_counting_ari(a, b):
    """O(n^2) literal pair counting definition of the adjusted Rand index."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = len(a)
    together_both = together_a = together_b = 0
    for i in range(n):
        for j in range(i + 1, n):
            sa = a[i] == a[j]
            sb = b[i] == b[j]
            together_a += sa
            together_b += sb
            together_both += sa and sb
    n2 = n * (n - 1) // 2
    expected = together_a * together_b / n2
    maximum = 0.5 * (together_a + together_b)
    if maximum == expected:
        return 1.0
    return (together_both - expected) / (maximum - expected)
