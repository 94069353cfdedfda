"""Compare the numba-compiled move pass against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--n 2000] [--views 2] [--repeat 5]

Times both a raw single sweep over a planted-partition graph and a full
maximize() call, and checks that the two paths land on identical partitions.
"""
import argparse
import time

import numpy as np

from mvmc import ViewGraph, rb_modularity
from mvmc._kernels import USE_NUMBA, _move_pass, move_pass
from mvmc.modularity import maximize
from mvmc.synth import planted_partition_views


def sweep_args(graphs, seed):
    n = graphs[0].n
    nviews = len(graphs)
    m2 = np.array([2.0 * g.total_edge_weight() for g in graphs])
    adj = sum((g.adjacency() * (1.0 / m) for g, m in zip(graphs, m2))).tocsr()
    deg = np.stack([g.degrees() for g in graphs], axis=1)
    alpha = 1.0 / (m2 * m2)
    order = np.random.default_rng(seed).permutation(n).astype(np.int64)
    return adj, deg, alpha, order


def run_sweep(kernel, adj, deg, alpha, order):
    n = deg.shape[0]
    comm = np.arange(n, dtype=np.int64)
    comm_tot = deg.copy()
    comm_size = np.ones(n, dtype=np.int64)
    empty_stack = np.empty(n, dtype=np.int64)
    t0 = time.perf_counter()
    gain, moves, _ = kernel(
        adj.indptr,
        adj.indices.astype(np.int64),
        adj.data,
        deg,
        alpha,
        comm,
        comm_tot,
        comm_size,
        empty_stack,
        0,
        order,
        1e-9,
    )
    return time.perf_counter() - t0, gain, moves, comm


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--views", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    graphs, _ = planted_partition_views(
        args.n, 8, 20.0 / args.n, 2.0 / args.n, n_views=args.views, seed=0
    )
    edges = sum(len(g.edge_u) for g in graphs)
    print(f"n={args.n}, views={args.views}, total edges={edges}")
    if not USE_NUMBA:
        print("note: MVMC_NUMBA=0, 'compiled' path is the fallback too")

    adj, deg, alpha, order = sweep_args(graphs, seed=1)
    run_sweep(move_pass, adj, deg, alpha, order)  # trigger JIT compilation

    for label, kernel in (("numba", move_pass), ("python", _move_pass)):
        times = []
        for _ in range(args.repeat):
            dt, gain, moves, comm = run_sweep(kernel, adj, deg, alpha, order)
            times.append(dt)
        print(
            f"single sweep [{label:6}] best {min(times) * 1e3:8.2f} ms"
            f"  (gain={gain:.6f}, moves={moves})"
        )

    results = {}
    for label, flag in (("numba", True), ("python", False)):
        import mvmc._kernels as kmod

        kmod_orig = kmod.move_pass
        kmod.move_pass = move_pass if flag else _move_pass
        import mvmc.modularity as mmod

        mmod.move_pass = kmod.move_pass
        t0 = time.perf_counter()
        part = maximize(graphs, seed=0)
        dt = time.perf_counter() - t0
        results[label] = part
        print(
            f"maximize     [{label:6}] {dt:8.2f} s"
            f"  (clusters={part.n_clusters}, Q={rb_modularity(graphs, part):.4f})"
        )
        kmod.move_pass = kmod_orig
        mmod.move_pass = kmod_orig

    same = np.array_equal(results["numba"].labels, results["python"].labels)
    print(f"paths agree on the final partition: {same}")


if __name__ == "__main__":
    main()
