import math

import numpy as np
import pytest

import nprox


def small_graph():
    rng = np.random.default_rng(0)
    i, j = np.triu_indices(30, k=1)
    keep = rng.random(i.size) < 0.2
    return nprox.SparseSymmetricMatrix(30, i[keep], j[keep], rng.uniform(0.1, 1.0, keep.sum()))


def test_matrix_round_trip():
    m = small_graph()
    i, j, w = m.triplets()
    assert (i < j).all()
    assert nprox.SparseSymmetricMatrix(30, j, i, w) == m
    assert m.edge_count == i.size
    with pytest.raises(ValueError):
        nprox.SparseSymmetricMatrix(2, [0], [1], [-1.0])


def test_cooccurrence_and_ppmi():
    groups = [["a", "b", "c"], ["a", "b"], ["c", "d"], ["c", "d"], ["b", "d"]]
    counts, vocab = nprox.cooccurrence(groups, min_count=2)
    assert vocab == ["a", "b", "c", "d"]
    assert counts.at(0, 1) == 2.0
    assert counts.at(0, 2) == 0.0
    s = nprox.ppmi(counts)
    assert s.dimension == 4
    # Both surviving pairs are disjoint, so each is 1 bit above independence.
    assert s.at(0, 1) == pytest.approx(1.0)


def test_stack_and_embeddings():
    g = small_graph()
    stack = nprox.build_stack(g)
    assert stack.S == g
    e = nprox.svd_embed(g, 8, seed=1)
    assert e.shape == (30, 8)
    vectors, losses = nprox.walk_embed(g, dim=8, walk_length=10, walks_per_node=4, epochs=3, seed=2)
    assert vectors.shape == (30, 8)
    assert len(losses) == 3
    r = nprox.random_embedding(30, 8, seed=3)
    rec = nprox.attraction(r, stack, seed=4)
    assert rec["null_delta"] > 0
    valid = rec["valid"]
    assert ((rec["delta"][valid] > 0) & (rec["delta"][valid] < 12)).all()


def test_scalar_helpers():
    assert nprox.delta_integral(1.0, 0.0) == pytest.approx(6.0)
    assert nprox.normalize_delta(3.7, 5.1) == pytest.approx(math.log2(3.7 / 5.1))
    x = np.linspace(-6, 6, 101)
    fit = nprox.fit_sigmoid(1 / (1 + np.exp(-2 * (x - 1))))
    assert fit["converged"]
    assert fit["g"] == pytest.approx(2, abs=1e-6)
    assignment, centroids, sse = nprox.kmeans_1d([1, 2, 10, 11, 20, 21, 30, 31], 4)
    assert assignment == [1, 1, 2, 2, 3, 3, 4, 4]
    assert sse == pytest.approx(2.0)
    assert nprox.js_distance([1, 0], [0, 1]) == pytest.approx(1.0)


def test_run_from_text(tmp_path):
    text = f"""
seed: 3
output_dir: {tmp_path / 'out'}
dataset:
  source: synth
  synth: {{communities: 3, nodes_per_community: 30, groups: 2000, min_group_size: 3, max_group_size: 6}}
models:
  - {{kind: svd, dim: 16}}
  - {{kind: random, dim: 16}}
"""
    report = nprox.run(text=text)
    assert [m["name"] for m in report["models"]] == ["svd", "random"]
    assert (tmp_path / "out" / "report.json").exists()
    assert nprox.run(text=text) == report
    with pytest.raises(nprox.ConfigError):
        nprox.run(text="models: [{kind: svd}]")
    with pytest.raises(nprox.ConfigError):
        nprox.run(tmp_path / "missing.yaml")
