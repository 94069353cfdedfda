"""Comparing clusterings across days: ARI, cross-leveling, meta-clustering."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .graph import GraphUsageError

# Label given to objects absent from a day after cross-leveling. Labels are
# never compared across clusterings, so one reserved constant suffices.
DUMMY_LABEL = "__absent__"


@dataclass(frozen=True)
class LabeledClustering:
    """Object-name -> cluster-label mapping with a date tag."""

    assignments: dict
    tag: str = ""

    @property
    def objects(self) -> frozenset:
        return frozenset(self.assignments)

    def relabeled(self, mapping: dict) -> "LabeledClustering":
        return LabeledClustering(
            {o: mapping[l] for o, l in self.assignments.items()}, self.tag
        )

    def write_tsv(self, path) -> None:
        with open(path, "w") as fh:
            for obj in sorted(self.assignments):
                fh.write(f"{obj}\t{self.assignments[obj]}\n")

    @staticmethod
    def read_tsv(path, tag: str = "") -> "LabeledClustering":
        assignments = {}
        with open(path) as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                obj, label = line.split("\t")
                assignments[obj] = label
        return LabeledClustering(assignments, tag)


def _pair_sum(counts) -> int:
    return sum(comb(c, 2) for c in counts)


def adjusted_rand_index(a: LabeledClustering, b: LabeledClustering) -> float:
    """Hubert-Arabie ARI with exact integer pair counting.

    1 for identical partitions, ~0 for independent ones, possibly negative.
    Degenerate pairs where the correction denominator vanishes (e.g. both
    partitions trivial) return 1.
    """
    if a.objects != b.objects:
        raise GraphUsageError("clusterings must cover identical object sets")
    n = len(a.assignments)
    contingency = Counter(
        (a.assignments[o], b.assignments[o]) for o in a.assignments
    )
    sum_cells = _pair_sum(contingency.values())
    sum_a = _pair_sum(Counter(a.assignments.values()).values())
    sum_b = _pair_sum(Counter(b.assignments.values()).values())
    total = comb(n, 2)
    if total == 0:
        return 1.0
    expected = Fraction(sum_a * sum_b, total)
    max_index = Fraction(sum_a + sum_b, 2)
    if max_index == expected:
        return 1.0
    return float(Fraction(sum_cells) - expected) / float(max_index - expected)


def cross_level(clusterings: list[LabeledClustering]) -> list[LabeledClustering]:
    """Extend every clustering to the union of objects with a dummy label."""
    if len(clusterings) < 2:
        raise GraphUsageError("cross-leveling needs at least two clusterings")
    universe: set = set()
    for c in clusterings:
        universe |= c.objects
    out = []
    for c in clusterings:
        extended = dict(c.assignments)
        for obj in universe - c.objects:
            extended[obj] = DUMMY_LABEL
        out.append(LabeledClustering(extended, c.tag))
    return out


def pairwise_ari_matrix(clusterings: list[LabeledClustering]) -> np.ndarray:
    """Symmetric ARI matrix with unit diagonal; inputs must be cross-leveled."""
    k = len(clusterings)
    matrix = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            matrix[i, j] = matrix[j, i] = adjusted_rand_index(
                clusterings[i], clusterings[j]
            )
    return matrix


def write_ari_matrix(matrix: np.ndarray, tags: list[str], path) -> None:
    with open(path, "w") as fh:
        fh.write("\t" + "\t".join(tags) + "\n")
        for tag, row in zip(tags, matrix):
            fh.write(tag + "\t" + "\t".join(repr(float(x)) for x in row) + "\n")


def average_linkage_merges(distance: np.ndarray) -> list[tuple[int, int, int, float]]:
    """Full average-linkage merge sequence on a symmetric distance matrix.

    Returns (step, left_id, right_id, height) rows; original items are ids
    0..n-1, the cluster created at step s gets id n+s. Ties are broken by
    the smallest (i, j) pair of cluster ids.
    """
    n = len(distance)
    dist = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = float(distance[i, j])
    active = {i: (i, 1) for i in range(n)}  # slot -> (cluster id, size)
    merges = []
    for step in range(n - 1):
        best = None
        for i in sorted(active):
            for j in sorted(active):
                if j <= i:
                    continue
                d = dist[(i, j)]
                if best is None or d < best[0] - 1e-15:
                    best = (d, i, j)
        d, i, j = best
        id_i, size_i = active[i]
        id_j, size_j = active[j]
        merges.append((step, id_i, id_j, d))
        # average linkage: distance to the merged cluster is the size-weighted mean
        for k in sorted(active):
            if k in (i, j):
                continue
            di = dist[tuple(sorted((i, k)))]
            dj = dist[tuple(sorted((j, k)))]
            dist[tuple(sorted((i, k)))] = (size_i * di + size_j * dj) / (
                size_i + size_j
            )
        del active[j]
        active[i] = (n + step, size_i + size_j)
    return merges


def agglomerative_meta_cluster(matrix: np.ndarray, k: int) -> np.ndarray:
    """Cut average-linkage clustering of distance 1 - ARI at exactly k groups."""
    n = len(matrix)
    if not 1 <= k <= n:
        raise GraphUsageError(f"k={k} out of range for {n} clusterings")
    merges = average_linkage_merges(1.0 - matrix)
    parent = list(range(2 * n - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step, left, right, _h in merges[: n - k]:
        parent[left] = parent[right] = n + step
    roots = {}
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        root = find(i)
        if root not in roots:
            roots[root] = len(roots)
        labels[i] = roots[root]
    return labels


def write_dendrogram(merges, path) -> None:
    """Merge-list text format: step, left, right, height per row."""
    with open(path, "w") as fh:
        fh.write("step\tleft\tright\theight\n")
        for step, left, right, height in merges:
            fh.write(f"{step}\t{left}\t{right}\t{height!r}\n")
