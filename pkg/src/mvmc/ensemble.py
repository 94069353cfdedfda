"""Consensus clustering of a set of daily clusterings.

Builds the bipartite object-by-cluster membership graph and partitions it
with the single-view modularity maximizer; an object's consensus label is
its community. Dummy-labeled groups (objects absent on a day) carry no
similarity signal and are excluded from cluster vertices.
"""
from __future__ import annotations

from collections import Counter

import numpy as np

from .compare import DUMMY_LABEL, LabeledClustering, adjusted_rand_index
from .graph import GraphUsageError, ViewGraph, densify_labels
from .modularity import maximize

MIN_CLUSTER_SIZE = 5


def filter_small_clusters(
    c: LabeledClustering, min_size: int = MIN_CLUSTER_SIZE
) -> LabeledClustering:
    """Drop objects whose cluster has fewer than min_size members."""
    sizes = Counter(c.assignments.values())
    kept = {o: l for o, l in c.assignments.items() if sizes[l] >= min_size}
    return LabeledClustering(kept, c.tag)


def build_object_cluster_graph(
    clusterings: list[LabeledClustering], universe: list[str]
) -> ViewGraph:
    """Bipartite membership graph over objects plus (day, cluster) vertices."""
    index = {obj: i for i, obj in enumerate(universe)}
    cluster_vertex: dict[tuple[int, object], int] = {}
    edges = []
    next_id = len(universe)
    for day, c in enumerate(clusterings):
        if not c.objects <= set(index):
            raise GraphUsageError("clusterings must be cross-leveled to the universe")
        for obj in sorted(c.assignments):
            label = c.assignments[obj]
            if label == DUMMY_LABEL:
                continue
            key = (day, label)
            if key not in cluster_vertex:
                cluster_vertex[key] = next_id
                next_id += 1
            edges.append((index[obj], cluster_vertex[key], 1.0))
    return ViewGraph.from_edges(next_id, edges)


def ensemble_cluster(
    clusterings: list[LabeledClustering],
    universe: list[str] | None = None,
    seed: int = 0,
) -> LabeledClustering:
    """Consensus clustering of >= 2 cross-leveled clusterings."""
    if len(clusterings) < 2:
        raise GraphUsageError("ensembling needs at least two clusterings")
    if universe is None:
        objs: set = set()
        for c in clusterings:
            objs |= c.objects
        universe = sorted(objs)
    graph = build_object_cluster_graph(clusterings, universe)
    partition = maximize([graph], seed=seed)
    labels = densify_labels(partition.labels[: len(universe)])
    return LabeledClustering(
        {obj: int(lab) for obj, lab in zip(universe, labels)}, tag="consensus"
    )


def average_internal_ari(clusterings: list[LabeledClustering]) -> float:
    """Mean off-diagonal pairwise ARI among a period's daily clusterings."""
    k = len(clusterings)
    if k < 2:
        raise GraphUsageError("need at least two clusterings")
    vals = [
        adjusted_rand_index(clusterings[i], clusterings[j])
        for i in range(k)
        for j in range(i + 1, k)
    ]
    return float(np.mean(vals))
