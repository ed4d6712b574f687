"""Katz centrality over the dependency graph.

The score of a package accumulates attenuated contributions from every
package that (directly or transitively) depends on it:

    x_i = alpha * sum over edges (j, i) of x_j  +  beta

so widely depended-upon packages such as a compression library end up at
the top of the ranking.  Katz centrality is used instead of eigenvector
centrality because a distribution dependency graph is not strongly
connected; the additive beta term gives every node a positive score even
in isolated components.

The fixed point is computed by power iteration starting from the zero
vector, so iterate t equals the truncated walk series up to length t.
Convergence requires alpha below the reciprocal spectral radius of the
adjacency structure; ``spectral_radius_upper_bound`` gives the standard
max-in-degree bound used for an advisory pre-check.  Actual divergence is
detected from the iteration itself and raised as DivergenceError.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .depgraph import DependencyGraph
from .errors import DivergenceError, DomainError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CentralityParams:
    """Knobs of the Katz computation.

    Defaults follow the conventions of common graph-analysis tooling
    (alpha 0.1, beta 1.0, tolerance 1e-6, 1000 iterations, L2-normalized
    output).
    """

    alpha: float = 0.1
    beta: float = 1.0
    tolerance: float = 1e-6
    max_iterations: int = 1000
    normalize: bool = True

    def __post_init__(self):
        if self.alpha <= 0:
            raise DomainError("alpha must be > 0")
        if self.beta <= 0:
            raise DomainError("beta must be > 0")
        if self.tolerance <= 0:
            raise DomainError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")


@dataclass(frozen=True)
class CentralityScores:
    """Per-node scores plus the parameters that produced them."""

    scores: dict[str, float]
    params: CentralityParams
    iterations: int
    converged: bool


class RankedPackage(NamedTuple):
    id: str
    score: float
    rank: int


def spectral_radius_upper_bound(graph: DependencyGraph) -> int:
    """Max in-degree: a cheap upper bound on the adjacency spectral radius."""
    if graph.edge_count == 0:
        return 0
    return max(len(graph.reverse_dependencies(nid)) for nid in graph.nodes)


def katz_centrality(graph: DependencyGraph, params: CentralityParams | None = None) -> CentralityScores:
    """Iterate x(t+1) = alpha * A^T x(t) + beta * 1 to its fixed point.

    Stops when the L1 change drops below n * tolerance (size-independent
    stopping).  Raises DivergenceError when the budget is exhausted or the
    iterate blows up, which signals alpha >= 1/spectral radius.
    """
    if params is None:
        params = CentralityParams()
    n = graph.node_count
    if n == 0:
        raise DomainError("cannot compute centrality of an empty graph")

    bound = spectral_radius_upper_bound(graph)
    if bound and params.alpha * bound >= 1.0:
        log.warning(
            "alpha=%g times max in-degree %d is >= 1; convergence is not guaranteed "
            "(the bound is loose for mostly-acyclic graphs)",
            params.alpha,
            bound,
        )

    index = graph.node_index
    edges = graph.edges
    src = np.fromiter((index[s] for s, _ in edges), dtype=np.intp, count=len(edges))
    dst = np.fromiter((index[d] for _, d in edges), dtype=np.intp, count=len(edges))

    x = np.zeros(n, dtype=np.float64)
    threshold = n * params.tolerance
    residual = float("inf")
    iterations = 0
    converged = False
    for iterations in range(1, params.max_iterations + 1):
        incoming = np.bincount(dst, weights=x[src], minlength=n) if len(edges) else np.zeros(n)
        x_next = params.alpha * incoming + params.beta
        residual = float(np.abs(x_next - x).sum())
        x = x_next
        if not np.isfinite(residual):
            raise DivergenceError(
                f"Katz iteration diverged after {iterations} iterations (non-finite residual); "
                "alpha is at or above the reciprocal spectral radius",
                residual=residual,
                iterations=iterations,
            )
        if residual < threshold:
            converged = True
            break
    if not converged:
        raise DivergenceError(
            f"Katz iteration did not converge within {params.max_iterations} iterations "
            f"(residual {residual:g} >= {threshold:g})",
            residual=residual,
            iterations=iterations,
        )

    if params.normalize:
        x = x / np.linalg.norm(x)

    scores = {nid: float(x[i]) for nid, i in index.items()}
    return CentralityScores(scores=scores, params=params, iterations=iterations, converged=True)


def rank(scores: CentralityScores, k: int) -> list[RankedPackage]:
    """Top ``k`` nodes by score, descending; ties broken by id ascending.

    Ranks are 1-based positions in the returned list, so tied scores still
    get distinct ranks (required for deterministic golden outputs).
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    ordered = sorted(scores.scores.items(), key=lambda item: (-item[1], item[0]))
    return [RankedPackage(nid, score, pos + 1) for pos, (nid, score) in enumerate(ordered[:k])]


def ranking_to_csv(ranking: list[RankedPackage]) -> str:
    """CSV artifact: header ``id,score,rank``; scores in shortest round-trip form."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "score", "rank"])
    for entry in ranking:
        writer.writerow([entry.id, repr(entry.score), entry.rank])
    return buf.getvalue()


def ranking_to_document(scores: CentralityScores, ranking: list[RankedPackage], graph: DependencyGraph) -> dict:
    """JSON artifact with the full parameter set embedded for provenance."""
    return {
        "schema": "depscope/ranking/v1",
        "params": {
            "alpha": scores.params.alpha,
            "beta": scores.params.beta,
            "tolerance": scores.params.tolerance,
            "max_iterations": scores.params.max_iterations,
            "normalize": scores.params.normalize,
        },
        "iterations": scores.iterations,
        "converged": scores.converged,
        "graph_summary": {"node_count": graph.node_count, "edge_count": graph.edge_count},
        "ranking": [{"id": e.id, "score": e.score, "rank": e.rank} for e in ranking],
    }
