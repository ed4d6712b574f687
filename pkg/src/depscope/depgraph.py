"""Distribution-wide package dependency graph.

Nodes are packages, directed edges mean "from DEPENDS_ON to".  The graph is
ingested from a single JSON export document of the shape

    {"nodes": [{"id": "...", "name": "...", "version": "...",
                "licenses": ["MIT", ...], ...extra fields...}, ...],
     "edges": [{"from": "<id>", "to": "<id>", "label": "DEPENDS_ON"}, ...]}

Ingestion rules:

* duplicate (from, to) edges collapse to one and are counted,
* self-loops are rejected outright (a package cannot depend on itself),
* edges whose endpoints are unknown ("dangling") are an error in strict
  mode and are dropped with a count otherwise,
* edges with a label other than DEPENDS_ON are ignored with a count,
* unknown node fields are preserved verbatim in ``PackageNode.attributes``.

A DependencyGraph is immutable after construction and safe to share across
threads for concurrent reads.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from .errors import DomainError, NotFoundError, ParseError, ValidationError

DEPENDS_ON = "DEPENDS_ON"

# Node fields with dedicated PackageNode attributes; everything else is kept
# in the open attributes map.
_KNOWN_NODE_FIELDS = ("id", "name", "version", "licenses")


@dataclass(frozen=True)
class PackageNode:
    """One package of the distribution, as found in the export."""

    id: str
    name: str
    version: str = ""
    licenses: tuple[str, ...] = ()
    attributes: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("package node id must be a non-empty string")
        if not isinstance(self.name, str) or not self.name:
            raise ValidationError(f"package node {self.id!r} has an empty name")


@dataclass(frozen=True)
class IngestReport:
    """Counts of the cleanups applied while loading an export document."""

    duplicate_edges: int = 0
    dropped_dangling: int = 0
    ignored_edge_labels: int = 0


class DependencyGraph:
    """Directed dependency graph over PackageNode objects.

    Construction validates edges (self-loops, dangling endpoints, duplicate
    collapse); afterwards the instance is read-only by convention.  Node
    insertion order is preserved for deterministic serialization, but no
    query result depends on it.
    """

    def __init__(
        self,
        nodes: Iterable[PackageNode],
        edges: Iterable[tuple[str, str]],
        *,
        strict: bool = False,
        ignored_edge_labels: int = 0,
    ):
        self._nodes: dict[str, PackageNode] = {}
        for node in nodes:
            if node.id in self._nodes:
                raise ValidationError(f"duplicate node id {node.id!r} in export")
            self._nodes[node.id] = node

        seen: set[tuple[str, str]] = set()
        kept: list[tuple[str, str]] = []
        dangling: list[tuple[str, str]] = []
        duplicates = 0
        for src, dst in edges:
            if src == dst:
                raise ValidationError(f"self-loop on node {src!r}: a package cannot depend on itself")
            if src not in self._nodes or dst not in self._nodes:
                dangling.append((src, dst))
                continue
            if (src, dst) in seen:
                duplicates += 1
                continue
            seen.add((src, dst))
            kept.append((src, dst))
        if dangling and strict:
            offenders = ", ".join(f"{s!r}->{d!r}" for s, d in dangling)
            raise ValidationError(f"{len(dangling)} dangling edge(s): {offenders}")

        self._edges: tuple[tuple[str, str], ...] = tuple(kept)
        self._index: dict[str, int] = {nid: i for i, nid in enumerate(self._nodes)}
        self._succ: dict[str, list[str]] = {nid: [] for nid in self._nodes}
        self._pred: dict[str, list[str]] = {nid: [] for nid in self._nodes}
        for src, dst in self._edges:
            self._succ[src].append(dst)
            self._pred[dst].append(src)
        self.ingest = IngestReport(
            duplicate_edges=duplicates,
            dropped_dangling=len(dangling),
            ignored_edge_labels=ignored_edge_labels,
        )

    # ---- basic accessors ---------------------------------------------------

    @property
    def nodes(self) -> dict[str, PackageNode]:
        """Mapping id -> PackageNode. Treat as read-only."""
        return self._nodes

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return self._edges

    @property
    def node_index(self) -> dict[str, int]:
        """Dense integer index per node id, in insertion order."""
        return self._index

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DependencyGraph):
            return NotImplemented
        return self._nodes == other._nodes and set(self._edges) == set(other._edges)

    def __repr__(self) -> str:
        return f"DependencyGraph(nodes={self.node_count}, edges={self.edge_count})"

    def _require(self, node_id: str) -> None:
        if node_id not in self._nodes:
            raise NotFoundError(f"unknown node id {node_id!r}")

    # ---- queries -----------------------------------------------------------

    def in_degree(self, node_id: str) -> int:
        self._require(node_id)
        return len(self._pred[node_id])

    def dependencies(self, node_id: str) -> set[str]:
        """Direct dependencies: all v with an edge (node, v)."""
        self._require(node_id)
        return set(self._succ[node_id])

    def reverse_dependencies(self, node_id: str) -> set[str]:
        """Direct dependents: all u with an edge (u, node)."""
        self._require(node_id)
        return set(self._pred[node_id])

    def transitive_reverse_dependencies(self, node_id: str) -> set[str]:
        """Every node with a directed path to ``node_id``, excluding itself.

        Reverse breadth-first traversal; cycles are handled by the visited
        set.
        """
        self._require(node_id)
        visited: set[str] = set()
        queue = deque(self._pred[node_id])
        while queue:
            current = queue.popleft()
            if current in visited:
                continue
            visited.add(current)
            queue.extend(p for p in self._pred[current] if p not in visited)
        visited.discard(node_id)
        return visited

    def subgraph(self, roots: Iterable[str], direction: str = "forward", depth: int = 0) -> "DependencyGraph":
        """Induced subgraph of nodes within ``depth`` hops of ``roots``.

        ``direction`` selects whether hops follow dependency edges
        ("forward") or dependent edges ("reverse").  Depth 0 keeps the
        roots only.
        """
        if direction not in ("forward", "reverse"):
            raise DomainError(f"direction must be 'forward' or 'reverse', got {direction!r}")
        if depth < 0:
            raise DomainError("depth must be non-negative")
        roots = list(roots)
        for r in roots:
            self._require(r)
        neighbors = self._succ if direction == "forward" else self._pred
        selected: set[str] = set(roots)
        frontier = set(roots)
        for _ in range(depth):
            nxt: set[str] = set()
            for nid in frontier:
                nxt.update(n for n in neighbors[nid] if n not in selected)
            if not nxt:
                break
            selected.update(nxt)
            frontier = nxt
        nodes = [self._nodes[nid] for nid in self._nodes if nid in selected]
        edges = [(s, d) for s, d in self._edges if s in selected and d in selected]
        return DependencyGraph(nodes, edges)


# ---- ingestion and serialization ---------------------------------------------


def _parse_json(document: str | bytes) -> Any:
    try:
        return json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed graph export: {exc.msg}", line=exc.lineno, column=exc.colno) from exc


def _parse_node(position: int, obj: Any) -> PackageNode:
    if not isinstance(obj, Mapping):
        raise ValidationError(f"node #{position} is not an object")
    node_id = obj.get("id")
    name = obj.get("name")
    version = obj.get("version", "")
    licenses = obj.get("licenses", [])
    if not isinstance(version, str):
        raise ValidationError(f"node #{position} ({node_id!r}): version must be a string")
    if not isinstance(licenses, list) or not all(isinstance(x, str) for x in licenses):
        raise ValidationError(f"node #{position} ({node_id!r}): licenses must be a list of strings")
    attributes = {k: v for k, v in obj.items() if k not in _KNOWN_NODE_FIELDS}
    if not isinstance(node_id, str) or not node_id:
        raise ValidationError(f"node #{position} has a missing or empty id")
    if not isinstance(name, str) or not name:
        raise ValidationError(f"node #{position} ({node_id!r}) has a missing or empty name")
    return PackageNode(id=node_id, name=name, version=version, licenses=tuple(licenses), attributes=attributes)


def load_graph(document: str | bytes | Mapping[str, Any], *, strict: bool = False) -> DependencyGraph:
    """Load a graph export document.

    ``document`` may be JSON text (str or bytes) or the already-parsed
    top-level mapping.  See the module docstring for ingestion rules; the
    resulting graph carries the cleanup counts in ``graph.ingest``.
    """
    data = _parse_json(document) if isinstance(document, (str, bytes)) else document
    if not isinstance(data, Mapping):
        raise ValidationError("graph export must be a JSON object")
    nodes_raw = data.get("nodes")
    edges_raw = data.get("edges")
    if not isinstance(nodes_raw, list):
        raise ValidationError("graph export is missing the 'nodes' array")
    if not isinstance(edges_raw, list):
        raise ValidationError("graph export is missing the 'edges' array")

    nodes = [_parse_node(i, obj) for i, obj in enumerate(nodes_raw)]

    edges: list[tuple[str, str]] = []
    ignored_labels = 0
    for i, obj in enumerate(edges_raw):
        if not isinstance(obj, Mapping):
            raise ValidationError(f"edge #{i} is not an object")
        label = obj.get("label", DEPENDS_ON)
        if label != DEPENDS_ON:
            ignored_labels += 1
            continue
        src = obj.get("from")
        dst = obj.get("to")
        if not isinstance(src, str) or not isinstance(dst, str):
            raise ValidationError(f"edge #{i} is missing 'from' or 'to'")
        edges.append((src, dst))

    return DependencyGraph(nodes, edges, strict=strict, ignored_edge_labels=ignored_labels)


def load_graph_file(path: str | Path, *, strict: bool = False) -> DependencyGraph:
    """Read and load a graph export from ``path``."""
    text = Path(path).read_text(encoding="utf-8")
    return load_graph(text, strict=strict)


def to_document(graph: DependencyGraph) -> dict[str, Any]:
    """Serialize back to the export shape.

    Round-trip stable: ``load_graph(to_document(g)) == g``.  Preserved
    attributes are merged back as top-level node fields.
    """
    nodes = []
    for node in graph.nodes.values():
        obj: dict[str, Any] = {
            "id": node.id,
            "name": node.name,
            "version": node.version,
            "licenses": list(node.licenses),
        }
        obj.update(node.attributes)
        nodes.append(obj)
    edges = [{"from": s, "to": d, "label": DEPENDS_ON} for s, d in graph.edges]
    return {"nodes": nodes, "edges": edges}
