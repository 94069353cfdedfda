"""Per-cluster and per-hashtag user-base metrics."""
from __future__ import annotations

import math
from collections import Counter

from .graph import GraphUsageError


def top_users(usage: dict[str, float], fraction: float = 1 / 3) -> frozenset:
    """The ceil(fraction * U) heaviest users of one hashtag.

    Ties on count are broken by user id ordering.
    """
    if not 0 < fraction <= 1:
        raise GraphUsageError("fraction must be in (0, 1]")
    if not usage:
        return frozenset()
    take = math.ceil(fraction * len(usage))
    ranked = sorted(usage, key=lambda u: (-usage[u], u))
    return frozenset(ranked[:take])


def top_user_score(
    cluster: list[str], top_user_sets: dict[str, frozenset]
) -> float:
    """Distinct top users across the cluster over the sum of per-hashtag
    top-user set sizes; 1 means fully disjoint user bases."""
    if not cluster:
        raise GraphUsageError("cluster must be nonempty")
    union: set = set()
    denom = 0
    for h in cluster:
        s = top_user_sets[h]
        union |= s
        denom += len(s)
    if denom == 0:
        return 1.0
    return len(union) / denom


def unique_user_ratio(usage: dict[str, float]) -> float:
    """Distinct users over total uses for one hashtag."""
    total = sum(usage.values())
    if total <= 0:
        raise GraphUsageError("hashtag has no uses")
    return len(usage) / total


def cluster_report_rows(
    clusters: dict[int, list[str]],
    usage: dict[str, dict[str, float]],
    fraction: float = 1 / 3,
) -> list[tuple[int, int, int, float]]:
    """(cluster, size, unique top users, top_user_score) per cluster."""
    tops = {h: top_users(usage.get(h, {}), fraction) for hs in clusters.values() for h in hs}
    rows = []
    for label in sorted(clusters):
        hashtags = clusters[label]
        union = set().union(*(tops[h] for h in hashtags)) if hashtags else set()
        rows.append(
            (label, len(hashtags), len(union), top_user_score(hashtags, tops))
        )
    return rows


def hashtag_report_rows(
    usage: dict[str, dict[str, float]]
) -> list[tuple[str, float, int, float]]:
    """(hashtag, uses, unique users, unique_user_ratio) per hashtag."""
    rows = []
    for h in sorted(usage):
        counts = usage[h]
        total = sum(counts.values())
        if total <= 0:
            continue
        rows.append((h, total, len(counts), unique_user_ratio(counts)))
    return rows


def token_frequencies(
    hashtags: list[str], token_counts: dict[str, Counter], top_n: int = 20
) -> list[tuple[str, float]]:
    """Most frequent text tokens across a cluster's hashtags.

    Plain-text substitute for word-map figures.
    """
    total: Counter = Counter()
    for h in hashtags:
        total.update(token_counts.get(h, Counter()))
    ranked = sorted(total.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_n]
