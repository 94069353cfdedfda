"""Hot inner loops for the modularity maximizer.

The move pass is plain nested-loop code compiled with numba when available.
Set MVMC_NUMBA=0 to force the pure-Python fallback (same function, not
compiled); benchmarks/bench_kernels.py compares the two paths.
"""
from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("MVMC_NUMBA", "1") != "0"


def _move_pass(
    indptr,
    indices,
    data,
    deg,
    alpha,
    comm,
    comm_tot,
    comm_size,
    empty_stack,
    n_empty,
    order,
    eps,
):
    """One sweep of local moves over nodes in `order`.

    indptr/indices/data: combined CSR adjacency, both directions, with
        per-view coefficients w_v/(2 m_v) already folded into the weights;
        diagonal entries (aggregated intra weight) are skipped.
    deg: (n, V) per-view weighted degrees of the current super-nodes.
    alpha: (V,) null-model coefficients w_v * gamma_v / (2 m_v)^2.
    comm: (n,) current community of each node, updated in place.
    comm_tot: (n, V) per-community sums of deg, updated in place.
    comm_size: (n,) member counts per community, updated in place.
    empty_stack/n_empty: pool of currently unused community ids, so a node
        can split off into a singleton when leaving beats every neighbour.

    Returns (total modularity gain, number of moves, new n_empty).
    """
    n = comm.shape[0]
    nviews = alpha.shape[0]
    link = np.zeros(n, dtype=np.float64)
    touched = np.empty(n, dtype=np.int64)
    total_gain = 0.0
    n_moves = 0
    for oi in range(n):
        i = order[oi]
        ci = comm[i]
        # detach i from its community
        for v in range(nviews):
            comm_tot[ci, v] -= deg[i, v]
        comm_size[ci] -= 1
        n_touched = 0
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j == i:
                continue
            cj = comm[j]
            if link[cj] == 0.0:
                touched[n_touched] = cj
                n_touched += 1
            link[cj] += data[p]
        # score of joining community c: 2*link - 2*sum_v alpha_v*deg_iv*tot_cv
        best_c = ci
        null_i = 0.0
        for v in range(nviews):
            null_i += alpha[v] * deg[i, v] * comm_tot[ci, v]
        best_score = 2.0 * link[ci] - 2.0 * null_i
        stay_score = best_score
        for t in range(n_touched):
            c = touched[t]
            if c == ci:
                continue
            null_c = 0.0
            for v in range(nviews):
                null_c += alpha[v] * deg[i, v] * comm_tot[c, v]
            score = 2.0 * link[c] - 2.0 * null_c
            if score > best_score + eps:
                best_score = score
                best_c = c
        # splitting off as a singleton scores exactly zero
        if n_empty > 0 and comm_size[ci] > 0 and 0.0 > best_score + eps:
            best_c = empty_stack[n_empty - 1]
            best_score = 0.0
        for t in range(n_touched):
            link[touched[t]] = 0.0
        link[ci] = 0.0
        if best_c != ci:
            if comm_size[best_c] == 0:
                n_empty -= 1
            if comm_size[ci] == 0:
                empty_stack[n_empty] = ci
                n_empty += 1
            total_gain += best_score - stay_score
            n_moves += 1
        comm[i] = best_c
        comm_size[best_c] += 1
        for v in range(nviews):
            comm_tot[best_c, v] += deg[i, v]
    return total_gain, n_moves, n_empty


if USE_NUMBA:
    try:
        import numba

        move_pass = numba.njit(cache=True)(_move_pass)
    except ImportError:  # pragma: no cover
        move_pass = _move_pass
else:
    move_pass = _move_pass
