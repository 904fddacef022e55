"""Chebyshev (l-inf) nearest-neighbor distances and closed-ball range counts.

Both backends answer the same two questions about the N projected points of
a dataset: the k-th nearest-neighbor distance of sample i (self excluded)
and the number of other samples within a closed ball of radius r around
sample i. Answers are exact; the tree backend must agree bit for bit with
the brute-force one. Closed balls (<= r) make r = 0 count exact duplicates,
which is what carries the discrete part of mixture distributions.
"""
from __future__ import annotations

import os

import numpy as np
from scipy.spatial import cKDTree

from .core import Dataset, ValidationError

__all__ = ["SubspaceIndex", "build_index", "knn_distance", "count_within"]

BACKENDS = ("brute", "tree")


def _workers() -> int:
    """Worker cap from GRAPHDIV_THREADS; default uses all cores."""
    raw = os.environ.get("GRAPHDIV_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            return -1
        if n >= 1:
            return n
    return -1


class _Sorted1D:
    """Exact closed-ball counting on a single coordinate.

    The ball membership test fl(|x - q|) <= r is monotone in |x - q|, so the
    members form one contiguous run of the sorted values. The run boundaries
    are located by vectorized bisection on that exact predicate rather than
    by searchsorted against rounded interval endpoints q +- r, keeping the
    counts bit-identical to the brute-force comparison.
    """

    def __init__(self, values: np.ndarray):
        self.v = np.sort(values.ravel())
        self.m = self.v.size

    def _pred(self, idx: np.ndarray, q: np.ndarray, r: np.ndarray) -> np.ndarray:
        return np.abs(self.v[idx] - q) <= r

    def _last_true_right(self, anchor, q, r):
        lo = anchor.copy()
        hi = np.full_like(anchor, self.m - 1)
        ok = self._pred(hi, q, r)
        lo[ok] = hi[ok]
        while True:
            active = lo < hi
            if not active.any():
                return lo
            mid = (lo + hi + 1) // 2
            t = active & self._pred(mid, q, r)
            lo[t] = mid[t]
            f = active & ~t
            hi[f] = mid[f] - 1

    def _first_true_left(self, anchor, q, r):
        hi = anchor.copy()
        lo = np.zeros_like(anchor)
        ok = self._pred(lo, q, r)
        hi[ok] = 0
        while True:
            active = lo < hi
            if not active.any():
                return hi
            mid = (lo + hi) // 2
            t = active & self._pred(mid, q, r)
            hi[t] = mid[t]
            f = active & ~t
            lo[f] = mid[f] + 1

    def count(self, q: np.ndarray, r: np.ndarray) -> np.ndarray:
        q = q.ravel()
        out = np.zeros(q.shape, dtype=np.int64)
        c = np.searchsorted(self.v, q)
        # anchor at the nearest value on either side; if neither is inside
        # the ball, no value is
        anchor = np.minimum(c, self.m - 1)
        ok = self._pred(anchor, q, r)
        left = ~ok & (c > 0)
        anchor[left] = c[left] - 1
        ok[left] = self._pred(anchor[left], q[left], r[left])
        if not ok.any():
            return out
        qa, ra, aa = q[ok], r[ok], anchor[ok]
        out[ok] = self._last_true_right(aa, qa, ra) - self._first_true_left(aa, qa, ra) + 1
        return out


class _AtomGroupCounter:
    """Exact closed-ball counting that splits points by heavy-atom patterns.

    Mixture columns concentrate a large share of their mass on a few exact
    float values. Points are grouped by which tracked atom (if any) each
    coordinate sits on; within a group the atom coordinates are constant,
    so the ball test factorizes into a cheap per-query scalar check on the
    atom coordinates and a lower-dimensional tree count on the rest. The
    decomposition is exact: max_c |x_c - q_c| <= r holds iff it holds
    per coordinate, with identical float arithmetic on both paths.
    """

    MIN_GROUP = 64

    def __init__(self, pts: np.ndarray):
        n, d = pts.shape
        self.n = n
        pattern = np.full((n, d), -1, dtype=np.int8)
        for c in range(d):
            col = pts[:, c] + 0.0  # fold -0.0 into +0.0 for grouping
            vals, counts = np.unique(col, return_counts=True)
            heavy = vals[counts >= max(self.MIN_GROUP, n // 16)]
            for ai, atom in enumerate(heavy[:4]):
                pattern[col == atom, c] = ai
        _, inverse, sizes = np.unique(
            pattern, axis=0, return_inverse=True, return_counts=True
        )
        inverse = inverse.ravel()
        self.groups = []
        residual = np.zeros(n, dtype=bool)
        for g in range(sizes.size):
            members = inverse == g
            if sizes[g] < self.MIN_GROUP:
                residual |= members
                continue
            row = pattern[np.argmax(members)]
            atom_cols = np.where(row >= 0)[0]
            var_cols = np.where(row < 0)[0]
            anchors = pts[np.argmax(members)][atom_cols]
            if var_cols.size == 0:
                tree = None
            elif var_cols.size == 1:
                tree = _Sorted1D(pts[members][:, var_cols])
            else:
                tree = cKDTree(np.ascontiguousarray(pts[members][:, var_cols]), leafsize=64)
            self.groups.append((atom_cols, anchors, var_cols, tree, int(sizes[g])))
        if residual.any():
            tree = cKDTree(np.ascontiguousarray(pts[residual]), leafsize=64)
            self.groups.append((np.empty(0, np.intp), np.empty(0), np.arange(d), tree, int(residual.sum())))

    def count(self, queries: np.ndarray, radii: np.ndarray) -> np.ndarray:
        total = np.zeros(len(queries), dtype=np.int64)
        for atom_cols, anchors, var_cols, tree, size in self.groups:
            ok = np.ones(len(queries), dtype=bool)
            for c, a in zip(atom_cols, anchors):
                ok &= np.abs(a - queries[:, c]) <= radii
            if not ok.any():
                continue
            if tree is None:
                total[ok] += size
            elif isinstance(tree, _Sorted1D):
                total[ok] += tree.count(queries[ok][:, var_cols[0]], radii[ok])
            else:
                total[ok] += tree.query_ball_point(
                    np.ascontiguousarray(queries[ok][:, var_cols]),
                    radii[ok], p=np.inf, return_length=True, workers=_workers(),
                )
        return total


class SubspaceIndex:
    """Queryable l-inf index over one coordinate projection of a dataset.

    Immutable after build; concurrent queries are safe. The tree backend
    wraps scipy's kd-tree (which buckets duplicate points in leaves instead
    of recursing) plus an exact-duplicate group table that serves radius-0
    counts directly and an atom-pattern decomposition for bulk counting on
    mixture-heavy data.
    """

    def __init__(self, dataset: Dataset, columns, backend: str = "tree"):
        cols = tuple(int(c) for c in columns)
        if not cols:
            raise ValidationError("empty column list")
        for c in cols:
            if c < 0 or c >= dataset.n_cols:
                raise ValidationError(f"column {c} out of range")
        if backend not in BACKENDS:
            raise ValidationError(f"unknown backend {backend!r}")
        self.dataset = dataset
        self.columns = cols
        self.backend = backend
        self._pts = np.ascontiguousarray(dataset.values[:, cols])
        self._tree = cKDTree(self._pts, leafsize=64) if backend == "tree" else None
        self._dup_sizes = None
        self._grouped = None
        self._grouped_tried = False
        self._sorted1d = None

    @property
    def n(self) -> int:
        return self._pts.shape[0]

    def _duplicate_group_sizes(self) -> np.ndarray:
        """Size of each point's exact-duplicate group (value equality).

        Adding 0.0 first maps -0.0 onto +0.0 so byte-wise grouping matches
        the distance test |a-b| <= 0.
        """
        if self._dup_sizes is None:
            normalized = self._pts + 0.0
            _, inverse, counts = np.unique(
                normalized, axis=0, return_inverse=True, return_counts=True
            )
            self._dup_sizes = counts[inverse.ravel()]
        return self._dup_sizes

    def _brute_dists(self, i: int) -> np.ndarray:
        return np.max(np.abs(self._pts - self._pts[i]), axis=1)

    def knn_distance(self, i: int, k: int) -> float:
        """k-th order statistic of the distances from sample i to the others."""
        n = self.n
        if not 1 <= k <= n - 1:
            raise ValidationError(f"k={k} out of range [1, {n - 1}]")
        if not 0 <= i < n:
            raise ValidationError(f"sample index {i} out of range")
        if self.backend == "brute":
            # self contributes one zero, shifting the order statistic by one
            return float(np.partition(self._brute_dists(i), k)[k])
        d, _ = self._tree.query(self._pts[i], k=[k + 1], p=np.inf)
        return float(d[0])

    def count_within(self, i: int, r: float) -> int:
        """Number of samples j != i with dist(x_j, x_i) <= r (closed ball)."""
        n = self.n
        if not 0 <= i < n:
            raise ValidationError(f"sample index {i} out of range")
        if r < 0:
            raise ValidationError(f"radius must be nonnegative, got {r}")
        if self.backend == "brute":
            return int(np.sum(self._brute_dists(i) <= r)) - 1
        return int(self._tree.query_ball_point(self._pts[i], r, p=np.inf, return_length=True)) - 1

    def knn_distances(self, k: int) -> np.ndarray:
        """knn_distance for every sample at once."""
        return self.knn_distances_with_ties(k)[0]

    def knn_distances_with_ties(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(radii, tied): tied[i] marks a (k+1)-th neighbor at exactly radii[i].

        Untied samples have exactly k others inside their closed ball, so
        callers needing that occupancy can skip the range count for them.
        """
        n = self.n
        if not 1 <= k <= n - 1:
            raise ValidationError(f"k={k} out of range [1, {n - 1}]")
        if self.backend == "brute":
            out = np.empty(n)
            tied = np.zeros(n, dtype=bool)
            for i in range(n):
                dists = self._brute_dists(i)
                if k + 1 <= n - 1:
                    d = np.partition(dists, [k, k + 1])
                    out[i] = d[k]
                    tied[i] = d[k + 1] == d[k]
                else:
                    out[i] = np.partition(dists, k)[k]
            return out, tied
        out = np.zeros(n)
        tied = np.ones(n, dtype=bool)  # duplicate-bucket points resolve via r=0
        need = self._duplicate_group_sizes() <= k
        if np.any(need):
            if k + 2 <= n:
                d, _ = self._tree.query(
                    self._pts[need], k=[k + 1, k + 2], p=np.inf, workers=_workers()
                )
                out[need] = d[:, 0]
                tied[need] = d[:, 1] == d[:, 0]
            else:
                d, _ = self._tree.query(self._pts[need], k=[k + 1], p=np.inf, workers=_workers())
                out[need] = d[:, 0]
                tied[need] = False
        return out, tied

    def count_within_bulk(self, radii: np.ndarray) -> np.ndarray:
        """count_within for every sample i at its own radius radii[i]."""
        radii = np.asarray(radii, dtype=np.float64)
        if radii.shape != (self.n,):
            raise ValidationError("radii must have one entry per sample")
        return self.count_many(np.arange(self.n), radii)

    def count_many(self, indices: np.ndarray, radii: np.ndarray) -> np.ndarray:
        """count_within for each (sample index, radius) pair."""
        indices = np.asarray(indices, dtype=np.intp)
        radii = np.asarray(radii, dtype=np.float64)
        if indices.shape != radii.shape:
            raise ValidationError("indices and radii must have equal length")
        if np.any(radii < 0):
            raise ValidationError("radius must be nonnegative")
        if self.backend == "brute":
            return np.array(
                [self.count_within(int(i), float(r)) for i, r in zip(indices, radii)],
                dtype=np.int64,
            )
        counts = np.empty(indices.shape, dtype=np.int64)
        zero = radii == 0.0
        if np.any(zero):
            counts[zero] = self._duplicate_group_sizes()[indices[zero]] - 1
        rest = ~zero
        if np.any(rest):
            pts = self._pts[indices[rest]]
            if self._pts.shape[1] == 1:
                if self._sorted1d is None:
                    self._sorted1d = _Sorted1D(self._pts)
                counts[rest] = self._sorted1d.count(pts[:, 0], radii[rest]) - 1
                return counts
            grouped = self._atom_groups()
            if grouped is not None:
                counts[rest] = grouped.count(pts, radii[rest]) - 1
            else:
                counts[rest] = (
                    self._tree.query_ball_point(
                        pts, radii[rest], p=np.inf,
                        return_length=True, workers=_workers(),
                    )
                    - 1
                )
        return counts

    def _atom_groups(self):
        """Atom-pattern counter, built once when the data warrants it."""
        if not self._grouped_tried:
            self._grouped_tried = True
            n, d = self._pts.shape
            if n >= 2048 and d <= 8:
                grouped = _AtomGroupCounter(self._pts)
                # engage only when a meaningful share of points sits in
                # groups with at least one pinned atom coordinate
                plain = sum(s for ac, _, _, _, s in grouped.groups if ac.size == 0)
                if len(grouped.groups) > 1 and plain <= 0.9 * n:
                    self._grouped = grouped
        return self._grouped


def build_index(dataset: Dataset, columns, backend: str = "tree") -> SubspaceIndex:
    """Index the projection of a dataset onto the given columns."""
    return SubspaceIndex(dataset, columns, backend)


def knn_distance(index: SubspaceIndex, i: int, k: int) -> float:
    return index.knn_distance(i, k)


def count_within(index: SubspaceIndex, i: int, r: float) -> int:
    return index.count_within(i, r)
