"""depscope: supply-chain criticality analysis for software distributions.

Ranks every package of a distribution by Katz centrality over the full
dependency graph, then enriches the ranking with vulnerability-tracker
status and git maintenance metrics to surface high-impact, poorly
maintained packages.
"""

__version__ = "0.1.0"

from .centrality import CentralityParams, CentralityScores, katz_centrality, rank
from .depgraph import DependencyGraph, PackageNode, load_graph, load_graph_file, to_document
from .errors import DepscopeError

__all__ = [
    "CentralityParams",
    "CentralityScores",
    "DependencyGraph",
    "DepscopeError",
    "PackageNode",
    "__version__",
    "katz_centrality",
    "load_graph",
    "load_graph_file",
    "rank",
    "to_document",
]
