import json

import numpy as np
import pytest

from markov_order.corpus import PathCorpus, generate_uniform_corpus
from markov_order.counts import count_transitions
from markov_order.likelihood import fit_mle
from markov_order.structure import (global_heatmap, heatmap_csv, local_graph,
                                    self_transition_profile, split_by_endpoints)
from conftest import cycle_corpus, random_corpus, sticky_corpus


def test_heatmap_ab(ab_corpus):
    mat = global_heatmap(count_transitions(ab_corpus, 1))
    expected = np.zeros((3, 3))
    expected[0, 1] = expected[1, 2] = expected[2, 0] = 1 / 3
    assert np.allclose(mat, expected)


def test_heatmap_sums_to_one(rng):
    for _ in range(10):
        mat = global_heatmap(count_transitions(random_corpus(rng), 1))
        assert mat.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(mat >= 0)


def test_heatmap_needs_order_one(ab_corpus):
    with pytest.raises(ValueError):
        global_heatmap(count_transitions(ab_corpus, 2))


def test_heatmap_sticky_diagonal():
    mat = global_heatmap(count_transitions(sticky_corpus(clicks=20_000), 1))
    inner = mat[1:, 1:]
    assert np.trace(inner) > 0.8 * inner.sum()


def test_heatmap_csv(ab_corpus):
    text = heatmap_csv(global_heatmap(count_transitions(ab_corpus, 1)), ["RESET", "A", "B"])
    lines = text.splitlines()
    assert lines[0] == "from\\to,RESET,A,B"
    assert lines[1].startswith("RESET,0.0,0.333")


def test_local_graph_cycle():
    graph = local_graph(count_transitions(cycle_corpus(20, 31), 1), 4, 4)
    assert len(graph.nodes) == 3
    assert {(e["src"], e["dst"]) for e in graph.edges} == {(1, 2), (2, 3), (3, 1)}
    # the only leak is the path end, 1 in 10 visits for the end state
    for e in graph.edges:
        assert e["weight"] >= 0.9


def test_local_graph_weights_match_mle(rng):
    for centrality in ("incoming", "outgoing"):
        corpus = random_corpus(rng, n_labels=5, n_paths=40)
        counts = count_transitions(corpus, 1)
        model = fit_mle(counts)
        graph = local_graph(counts, 6, 6, centrality=centrality)
        listed = {n["state"] for n in graph.nodes}
        for e in graph.edges:
            assert e["weight"] == model.row((e["src"],))[e["dst"]]
            assert 0 <= e["weight"] <= 1
            assert e["dst"] in listed
        out = {}
        for e in graph.edges:
            out[e["src"]] = out.get(e["src"], 0) + e["weight"]
        assert all(v <= 1 + 1e-12 for v in out.values())


def test_local_graph_full_listing_sums_to_one():
    corpus = PathCorpus.from_label_paths([["A", "B", "A", "C"], ["B", "C", "A"]])
    graph = local_graph(count_transitions(corpus, 1), 4, 4, include_reset=True)
    out = {}
    for e in graph.edges:
        out[e["src"]] = out.get(e["src"], 0) + e["weight"]
    assert all(v == pytest.approx(1.0) for v in out.values())


def test_local_graph_anchor():
    corpus = sticky_corpus(clicks=30_000)
    counts = count_transitions(corpus, 2)
    graph = local_graph(counts, 4, 4, anchor=(2,))
    heaviest = max((e for e in graph.edges if e["src"] == 2), key=lambda e: e["weight"])
    assert heaviest["dst"] == 2


def test_local_graph_unobserved_anchor():
    graph = local_graph(count_transitions(cycle_corpus(), 2), anchor=(2,))
    assert graph.anchor_found
    graph = local_graph(count_transitions(cycle_corpus(), 3), anchor=(1, 1))
    assert not graph.anchor_found and graph.nodes == [] and graph.edges == []
    with pytest.raises(ValueError):
        local_graph(count_transitions(cycle_corpus(), 2), anchor=())


def test_local_graph_json():
    graph = local_graph(count_transitions(cycle_corpus(), 1))
    doc = json.loads(graph.to_json(["RESET", "A", "B", "C"]))
    assert {n["label"] for n in doc["nodes"]} == {"A", "B", "C"}
    assert set(doc["edges"][0]) == {"src", "dst", "weight"}


def test_profile_cycle_never_stays():
    profile = self_transition_profile(cycle_corpus(), 3)
    assert [p.stay for p in profile.points] == [0.0] * 3
    assert all(p.k == 1 for p in profile.points)
    assert len(profile.missing) == 6


def test_profile_repeated_symbol():
    length = 10
    corpus = PathCorpus.from_label_paths([["A"] * length] * 4)
    profile = self_transition_profile(corpus, 5, top_states=1)
    for p in profile.points:
        assert p.stay == pytest.approx((length - p.k) / (length - p.k + 1))


def test_profile_stay_plus_switch_exact(rng):
    corpus = random_corpus(rng, n_labels=3, n_paths=30)
    for p in self_transition_profile(corpus, 4, top_states=3).points:
        assert p.stay + p.switch == 1.0


def test_profile_sticky():
    profile = self_transition_profile(sticky_corpus(clicks=50_000), 1, top_states=5)
    assert all(abs(p.stay - 0.9) < 0.02 for p in profile.points)


def test_profile_csv():
    profile = self_transition_profile(cycle_corpus(), 1)
    lines = profile.to_csv(["RESET", "A", "B", "C"]).splitlines()
    assert lines[0] == "state,k,stay,switch,n"
    assert lines[1].split(",")[:4] == ["A", "1", "0.0", "1.0"]


def test_split_by_endpoints():
    corpus = PathCorpus.from_label_paths([["A", "B", "A"], ["A", "B"]])
    same, diff = split_by_endpoints(corpus)
    assert same.label_paths() == [["A", "B", "A"]]
    assert diff.label_paths() == [["A", "B"]]
    assert same.vocabulary == diff.vocabulary == corpus.vocabulary


def test_split_is_partition(rng):
    corpus = random_corpus(rng, n_paths=40)
    same, diff = split_by_endpoints(corpus)
    assert sorted(same.paths + diff.paths) == sorted(corpus.paths)


def test_split_heatmaps_similar():
    corpus = generate_uniform_corpus(5, 200_000, seed=2)
    same, diff = split_by_endpoints(corpus)
    a = global_heatmap(count_transitions(same, 1))
    b = global_heatmap(count_transitions(diff, 1))
    assert a.sum() == pytest.approx(1.0) and b.sum() == pytest.approx(1.0)
    assert np.abs(a - b).max() < 0.02
