"""Weighted, resolution-parameterized multi-view modularity and its maximizer.

The quality function is the normalized Reichardt-Bornholdt modularity summed
over views with per-view weights w_v and resolutions gamma_v:

    Q = sum_v w_v / (2 m_v) * sum_ij [A^v_ij - gamma_v d_i d_j / (2 m_v)]
        * delta(c_i, c_j)

with the pair sum running over ordered pairs (each undirected edge twice)
and including the diagonal null-model terms. Views with no edges contribute
nothing. The maximizer is Louvain-style: sweeps of greedy single-node moves
whose gains are aggregated across all views, followed by graph aggregation,
repeated until no gain remains.
"""
from __future__ import annotations

import numpy as np
from scipy import sparse

from ._kernels import move_pass
from .graph import Clustering, GraphUsageError, ViewGraph, densify_labels

GAIN_EPSILON = 1e-9
MAX_LEVELS = 100


def _check_views(graphs: list[ViewGraph]) -> int:
    if not graphs:
        raise GraphUsageError("need at least one view graph")
    n = graphs[0].n
    if any(g.n != n for g in graphs):
        raise GraphUsageError("all view graphs must share the node count")
    return n


def _as_params(graphs, weights, resolutions):
    m = len(graphs)
    w = np.full(m, 1.0) if weights is None else np.asarray(weights, dtype=np.float64)
    g = (
        np.full(m, 1.0)
        if resolutions is None
        else np.asarray(resolutions, dtype=np.float64)
    )
    if len(w) != m or len(g) != m:
        raise GraphUsageError("parameter arrays must have one entry per view")
    if np.any(g <= 0):
        raise GraphUsageError("resolutions must be positive")
    return w, g


def rb_modularity(
    graphs: list[ViewGraph],
    clustering: Clustering,
    weights=None,
    resolutions=None,
) -> float:
    """Multi-view RB modularity of a shared partition."""
    n = _check_views(graphs)
    labels = clustering.labels
    if len(labels) != n:
        raise GraphUsageError("clustering does not cover the node set")
    w, gamma = _as_params(graphs, weights, resolutions)
    total = 0.0
    for v, g in enumerate(graphs):
        m2 = 2.0 * g.total_edge_weight()
        if m2 == 0.0:
            continue
        same = labels[g.edge_u] == labels[g.edge_v]
        intra = 2.0 * float(g.edge_w[same].sum())
        deg = g.degrees()
        tot = np.bincount(labels, weights=deg)
        null = float((tot * tot).sum())
        total += w[v] / m2 * (intra - gamma[v] * null / m2)
    return total


def _combined_csr(adjs, coeffs, n):
    """Sum of per-view adjacencies scaled by w_v/(2 m_v)."""
    acc = sparse.csr_matrix((n, n))
    for adj, c in zip(adjs, coeffs):
        if c != 0.0:
            acc = acc + adj * c
    return acc.tocsr()


def _sweep_to_fixpoint(adj, deg, alpha, comm, rng, gain_epsilon):
    """Repeat local-move sweeps on one graph until no node wants to move.

    `comm` is updated in place and may start from any partition; community
    ids must lie below adj.shape[0]. Returns True if any move happened.
    """
    size = adj.shape[0]
    nviews = deg.shape[1]
    comm_tot = np.zeros((size, nviews), dtype=np.float64)
    np.add.at(comm_tot, comm, deg)
    comm_size = np.bincount(comm, minlength=size).astype(np.int64)
    empty_stack = np.empty(size, dtype=np.int64)
    unused = np.flatnonzero(comm_size == 0)
    n_empty = len(unused)
    empty_stack[:n_empty] = unused
    indices = adj.indices.astype(np.int64)
    moved_any = False
    while True:
        order = rng.permutation(size).astype(np.int64)
        gain, n_moves, n_empty = move_pass(
            adj.indptr,
            indices,
            adj.data,
            deg,
            alpha,
            comm,
            comm_tot,
            comm_size,
            empty_stack,
            n_empty,
            order,
            gain_epsilon,
        )
        if n_moves == 0 or gain <= gain_epsilon:
            break
        moved_any = True
    return moved_any


DEFAULT_RESTARTS = 16


def maximize(
    graphs: list[ViewGraph],
    weights=None,
    resolutions=None,
    seed: int = 0,
    gain_epsilon: float = GAIN_EPSILON,
    restarts: int = DEFAULT_RESTARTS,
) -> Clustering:
    """Best of `restarts` Louvain-style runs, deterministic per seed.

    Each run alternates multi-level aggregation with a refinement phase that
    replays local moves on the original graph, so the returned partition is
    stable against every single-node move (including splitting off a
    singleton). Restarts differ only in sweep order; the highest-modularity
    partition wins, earliest run on ties.
    """
    if restarts < 1:
        raise GraphUsageError("restarts must be positive")
    n = _check_views(graphs)
    w, gamma = _as_params(graphs, weights, resolutions)
    best = None
    best_q = -np.inf
    for r in range(restarts):
        labels = _maximize_once(graphs, w, gamma, [seed, r], gain_epsilon)
        q = rb_modularity(graphs, Clustering(labels), w, gamma)
        if q > best_q + gain_epsilon:
            best, best_q = labels, q
    meta = {"weights": w.tolist(), "resolutions": gamma.tolist(), "seed": seed}
    return Clustering(best, meta=meta)


def _maximize_once(graphs, w, gamma, seed, gain_epsilon):
    n = graphs[0].n
    nviews = len(graphs)
    if n == 0:
        return np.empty(0, dtype=np.int64)

    m2 = np.array([2.0 * g.total_edge_weight() for g in graphs])
    edge_coeff = np.where(m2 > 0.0, w / np.where(m2 > 0.0, m2, 1.0), 0.0)
    alpha = np.where(m2 > 0.0, w * gamma / np.where(m2 > 0.0, m2 * m2, 1.0), 0.0)

    adj0 = _combined_csr([g.adjacency() for g in graphs], edge_coeff, n)
    deg0 = np.zeros((n, nviews), dtype=np.float64)
    for v, g in enumerate(graphs):
        deg0[:, v] = g.degrees()

    rng = np.random.default_rng(seed)
    assignment = np.arange(n, dtype=np.int64)  # original node -> community

    for _round in range(MAX_LEVELS):
        # refinement: single-node moves on the original graph, starting from
        # the current assignment (the identity partition on the first round)
        comm = assignment.copy()
        if not _sweep_to_fixpoint(adj0, deg0, alpha, comm, rng, gain_epsilon):
            break
        assignment = densify_labels(comm)
        # multi-level coarsening until moves dry up at every scale
        adj, deg = adj0, deg0
        dense = assignment
        for _level in range(MAX_LEVELS):
            size = adj.shape[0]
            k = int(dense.max()) + 1
            if k == size:
                break
            sel = sparse.csr_matrix(
                (np.ones(size), (dense, np.arange(size))), shape=(k, size)
            )
            adj = (sel @ adj @ sel.T).tocsr()
            deg = np.asarray(sel @ deg)
            comm = np.arange(k, dtype=np.int64)
            if not _sweep_to_fixpoint(adj, deg, alpha, comm, rng, gain_epsilon):
                break
            dense = densify_labels(comm)
            assignment = dense[assignment]

    return densify_labels(assignment)
