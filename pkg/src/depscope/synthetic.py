"""Generator for distribution-scale synthetic dependency graphs.

Real exports of a full Linux distribution run to tens of thousands of
packages and are too large to ship as fixtures, so scale and performance
tests build one on the fly.  The generated graph is acyclic (edges always
point from a higher node index to a lower one, the way applications point
at libraries) with in-degrees skewed toward the low-index "core library"
nodes, which reproduces the hub-dominated shape of real repositories.
"""

from __future__ import annotations

import numpy as np

from .depgraph import DependencyGraph, PackageNode

DEFAULT_NODES = 82_011
DEFAULT_EDGES = 273_681


def generate_scale_graph(
    n_nodes: int = DEFAULT_NODES,
    n_edges: int = DEFAULT_EDGES,
    seed: int = 20240318,
    skew: float = 3.0,
) -> DependencyGraph:
    """Random DAG with ``n_nodes`` nodes and exactly ``n_edges`` distinct edges.

    ``skew`` > 1 biases edge targets toward low indices (hubs).  The edge
    count must be achievable, i.e. at most n*(n-1)/2.
    """
    if n_edges > n_nodes * (n_nodes - 1) // 2:
        raise ValueError("n_edges exceeds the maximum for an acyclic simple graph")
    rng = np.random.default_rng(seed)
    chosen: set[int] = set()
    pairs: list[tuple[int, int]] = []
    while len(pairs) < n_edges:
        batch = (n_edges - len(pairs)) * 2 + 16
        src = rng.integers(1, n_nodes, size=batch)
        tgt = np.floor(src * rng.random(batch) ** skew).astype(np.int64)
        for s, t in zip(src.tolist(), tgt.tolist()):
            if t >= s:
                continue
            key = s * n_nodes + t
            if key in chosen:
                continue
            chosen.add(key)
            pairs.append((s, t))
            if len(pairs) == n_edges:
                break

    nodes = [PackageNode(id=f"pkg{i:06d}", name=f"pkg{i:06d}", version="1.0") for i in range(n_nodes)]
    edges = [(f"pkg{s:06d}", f"pkg{t:06d}") for s, t in pairs]
    return DependencyGraph(nodes, edges)
