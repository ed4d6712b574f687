"""Shared fixtures and the independent oracles used across the suite."""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from depscope import cli
from depscope.depgraph import DependencyGraph, load_graph

DATA_DIR = Path(__file__).resolve().parent / "data"
MINI_DIR = DATA_DIR / "mini"

TRACKER_URL = "https://tracker.test/json"
SNAPSHOT_TS = "2024-03-18T00:00:00+00:00"


def make_document(node_ids, edge_pairs, extra_node_fields=None):
    """Build a graph export document from bare ids and (from, to) pairs."""
    extra = extra_node_fields or {}
    nodes = [{"id": nid, "name": nid, "version": "1.0", "licenses": [], **extra.get(nid, {})} for nid in node_ids]
    edges = [{"from": s, "to": d, "label": "DEPENDS_ON"} for s, d in edge_pairs]
    return {"nodes": nodes, "edges": edges}


def make_graph(node_ids, edge_pairs) -> DependencyGraph:
    return load_graph(make_document(node_ids, edge_pairs))


def katz_dense_oracle(graph: DependencyGraph, alpha: float, beta: float) -> dict[str, float]:
    """Closed-form Katz scores: x = beta * (I - alpha A^T)^-1 1.

    Independent of the power-iteration implementation; dense linear solve
    on the explicit adjacency matrix.
    """
    n = graph.node_count
    index = graph.node_index
    a = np.zeros((n, n))
    for src, dst in graph.edges:
        a[index[src], index[dst]] = 1.0
    x = np.linalg.solve(np.eye(n) - alpha * a.T, beta * np.ones(n))
    return {nid: float(x[i]) for nid, i in index.items()}


def seed_tracker_cache(cache_dir: Path, tracker_path: Path, fetched_at: str = SNAPSHOT_TS, url: str = TRACKER_URL):
    """Pre-warm a vuln cache directory from a fixture snapshot."""
    cache_dir.mkdir(parents=True, exist_ok=True)
    shutil.copy(tracker_path, cache_dir / "tracker.json")
    (cache_dir / "tracker.meta.json").write_text(
        json.dumps({"fetched_at": fetched_at, "url": url}, indent=2) + "\n", encoding="utf-8"
    )


def run_mini_pipeline(work_dir: Path, mini_dir: Path = MINI_DIR) -> Path:
    """Drive all four CLI stages over the mini ecosystem; returns the report path."""
    graph = str(mini_dir / "graph.json")
    curated = str(mini_dir / "curated.csv")
    ranking = work_dir / "ranking.json"
    vuln = work_dir / "vuln.json"
    metrics = work_dir / "metrics.json"
    report = work_dir / "report.json"
    cache = work_dir / "cache"
    seed_tracker_cache(cache, mini_dir / "tracker.json")

    assert cli.main(["rank", "--graph", graph, "--output", str(ranking)]) == 0
    assert (
        cli.main(
            ["vuln", "--curated", curated, "--cache-dir", str(cache), "--offline", "--output", str(vuln)]
        )
        == 0
    )
    assert (
        cli.main(
            [
                "metrics",
                "--curated", curated,
                "--repos-dir", str(mini_dir / "repos"),
                "--baseline-date",
                "--output", str(metrics),
            ]
        )
        == 0
    )
    assert (
        cli.main(
            [
                "report",
                "--graph", graph,
                "--ranking", str(ranking),
                "--curated", curated,
                "--vuln", str(vuln),
                "--metrics", str(metrics),
                "--baseline-date",
                "--output", str(report),
            ]
        )
        == 0
    )
    return report


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def mini_dir() -> Path:
    return MINI_DIR
