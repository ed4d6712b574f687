import json
import random

import pytest

from depscope.centrality import (
    CentralityParams,
    katz_centrality,
    rank,
    ranking_to_csv,
    ranking_to_document,
    spectral_radius_upper_bound,
)
from depscope.depgraph import load_graph
from depscope.errors import DivergenceError, DomainError

from conftest import katz_dense_oracle, make_document, make_graph

UNNORMALIZED = CentralityParams(alpha=0.1, beta=1.0, normalize=False)


def test_isolated_nodes_score_beta():
    g = make_graph(["a", "b", "c", "d"], [])
    scores = katz_centrality(g, UNNORMALIZED)
    assert all(abs(s - 1.0) < 1e-12 for s in scores.scores.values())


def test_isolated_nodes_normalized():
    g = make_graph(["a", "b", "c", "d"], [])
    scores = katz_centrality(g, CentralityParams(alpha=0.1, beta=1.0, normalize=True))
    assert all(abs(s - 0.5) < 1e-12 for s in scores.scores.values())


def test_single_edge_hand_case():
    g = make_graph(["a", "b"], [("a", "b")])
    scores = katz_centrality(g, UNNORMALIZED)
    assert scores.scores["a"] == pytest.approx(1.0, abs=1e-12)
    assert scores.scores["b"] == pytest.approx(1.1, abs=1e-12)


def test_chain_hand_case():
    g = make_graph(["a", "b", "c"], [("a", "b"), ("b", "c")])
    scores = katz_centrality(g, UNNORMALIZED)
    assert scores.scores["a"] == pytest.approx(1.0, abs=1e-12)
    assert scores.scores["b"] == pytest.approx(1.1, abs=1e-12)
    assert scores.scores["c"] == pytest.approx(1.11, abs=1e-12)


def test_empty_graph_rejected():
    g = make_graph([], [])
    with pytest.raises(DomainError):
        katz_centrality(g, UNNORMALIZED)


def test_divergence_raises_with_residual():
    g = make_graph(["a", "b"], [("a", "b"), ("b", "a")])
    params = CentralityParams(alpha=1.0, beta=1.0, max_iterations=60, normalize=False)
    with pytest.raises(DivergenceError) as excinfo:
        katz_centrality(g, params)
    assert excinfo.value.iterations <= 60
    assert excinfo.value.residual > 0


def test_bound_warns_but_converges_on_dag(caplog):
    # a DAG has spectral radius zero, so the loose in-degree bound over-warns
    leaves = [f"l{i}" for i in range(12)]
    g = make_graph(leaves + ["hub"], [(leaf, "hub") for leaf in leaves])
    with caplog.at_level("WARNING"):
        scores = katz_centrality(g, UNNORMALIZED)
    assert scores.converged
    assert any("convergence is not guaranteed" in r.message for r in caplog.records)


def test_spectral_radius_upper_bound_cases():
    chain = make_graph(["a", "b", "c"], [("a", "b"), ("b", "c")])
    assert spectral_radius_upper_bound(chain) == 1
    leaves = [f"l{i}" for i in range(1, 6)]
    star = make_graph(leaves + ["hub"], [(leaf, "hub") for leaf in leaves])
    assert spectral_radius_upper_bound(star) == 5
    empty = make_graph(["a", "b"], [])
    assert spectral_radius_upper_bound(empty) == 0


def _random_graph(rng: random.Random, n: int, density: float = 0.2):
    ids = [f"n{i}" for i in range(n)]
    pairs = set()
    for s in ids:
        for d in ids:
            if s != d and rng.random() < density:
                pairs.add((s, d))
    return make_graph(ids, sorted(pairs))


def test_power_iteration_matches_dense_oracle():
    rng = random.Random(42)
    for _ in range(10):
        n = rng.randint(2, 50)
        g = _random_graph(rng, n)
        alpha = 0.5 / (spectral_radius_upper_bound(g) + 1)
        params = CentralityParams(alpha=alpha, beta=1.0, tolerance=1e-13, max_iterations=10_000, normalize=False)
        got = katz_centrality(g, params).scores
        want = katz_dense_oracle(g, alpha, 1.0)
        for nid in g.nodes:
            assert got[nid] == pytest.approx(want[nid], abs=1e-8)


def test_scores_cover_every_node_and_are_positive():
    g = make_graph(["a", "b", "c", "d", "e"], [("a", "b"), ("c", "d")])
    scores = katz_centrality(g, UNNORMALIZED)
    assert set(scores.scores) == set(g.nodes)
    assert all(s >= 1.0 - 1e-12 for s in scores.scores.values())  # disconnected support: >= beta


def test_adding_edge_never_decreases_scores():
    rng = random.Random(5)
    for _ in range(10):
        g = _random_graph(rng, 10, density=0.15)
        ids = list(g.nodes)
        u, w = rng.sample(ids, 2)
        if (u, w) in set(g.edges):
            continue
        before = katz_centrality(g, UNNORMALIZED).scores
        augmented = make_graph(ids, list(g.edges) + [(u, w)])
        after = katz_centrality(augmented, UNNORMALIZED).scores
        for nid in ids:
            assert after[nid] >= before[nid] - 1e-9
        assert after[w] > before[w]


def test_beta_scaling_preserves_ranking():
    rng = random.Random(9)
    g = _random_graph(rng, 20)
    base = rank(katz_centrality(g, UNNORMALIZED), 20)
    scaled = rank(katz_centrality(g, CentralityParams(alpha=0.1, beta=7.5, normalize=False)), 20)
    assert [e.id for e in base] == [e.id for e in scaled]


def test_rank_top_k_and_tie_break():
    g = make_graph(["a", "b"], [("a", "b")])
    scores = katz_centrality(g, UNNORMALIZED)
    top = rank(scores, 1)
    assert [(e.id, e.rank) for e in top] == [("b", 1)]

    tied = katz_centrality(make_graph(["b", "a"], []), UNNORMALIZED)
    both = rank(tied, 2)
    assert [(e.id, e.rank) for e in both] == [("a", 1), ("b", 2)]


def test_rank_k_larger_than_n_and_invalid_k():
    scores = katz_centrality(make_graph(["a", "b"], []), UNNORMALIZED)
    assert len(rank(scores, 200)) == 2
    with pytest.raises(DomainError):
        rank(scores, 0)


def test_ranking_order_stable_under_input_shuffle():
    rng = random.Random(21)
    doc = make_document([f"n{i}" for i in range(30)], [(f"n{i}", f"n{i % 5}") for i in range(5, 30)])
    reference = None
    for _ in range(5):
        rng.shuffle(doc["nodes"])
        rng.shuffle(doc["edges"])
        g = load_graph(doc)
        ordering = [e.id for e in rank(katz_centrality(g, UNNORMALIZED), 30)]
        if reference is None:
            reference = ordering
        assert ordering == reference


def test_normalized_vector_has_unit_l2_norm():
    rng = random.Random(51)
    g = _random_graph(rng, 25)
    scores = katz_centrality(g, CentralityParams(alpha=0.05, beta=2.0, normalize=True))
    norm = sum(v * v for v in scores.scores.values()) ** 0.5
    assert norm == pytest.approx(1.0, abs=1e-9)


def test_invalid_params_rejected():
    with pytest.raises(DomainError):
        CentralityParams(alpha=0.0)
    with pytest.raises(DomainError):
        CentralityParams(beta=-1.0)
    with pytest.raises(DomainError):
        CentralityParams(tolerance=0.0)
    with pytest.raises(DomainError):
        CentralityParams(max_iterations=0)


def test_csv_and_json_exports():
    g = make_graph(["a", "b"], [("a", "b")])
    scores = katz_centrality(g, UNNORMALIZED)
    ranking = rank(scores, 2)
    csv_text = ranking_to_csv(ranking)
    assert csv_text.splitlines()[0] == "id,score,rank"
    assert csv_text.splitlines()[1].startswith("b,1.1")

    doc = ranking_to_document(scores, ranking, g)
    parsed = json.loads(json.dumps(doc))
    assert parsed["params"]["alpha"] == 0.1
    assert parsed["ranking"][0]["id"] == "b"
    assert parsed["graph_summary"] == {"node_count": 2, "edge_count": 1}
