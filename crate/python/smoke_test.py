"""Smoke test for the gnnseed Python bindings.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/gnnseed-*.whl
"""

import json
import math

import gnnseed


def cliques(count, size):
    edges = [
        (c * size + i, c * size + j)
        for c in range(count)
        for i in range(size)
        for j in range(i + 1, size)
    ]
    return gnnseed.Graph(edges, count * size), [i // size for i in range(count * size)]


def check_graph():
    g = gnnseed.Graph([(0, 1), (1, 2), (2, 0), (2, 0), (1, 1)], 4)
    assert (g.n, g.m) == (4, 3), repr(g)
    assert g.degrees() == [2, 2, 2, 0]
    assert g.has_edge(0, 2) and not g.has_edge(1, 1)
    s = g.propagate([[1.0], [1.0], [1.0], [1.0]])
    assert all(math.isclose(row[0], 1.0) for row in s)


def check_gee_and_metrics():
    g = gnnseed.Graph([(0, 1), (1, 2), (2, 3)], 4)
    z = gnnseed.supervised_gee(g, [0, 0, 1, 1])
    assert z == [[0.5, 0.0], [0.5, 0.5], [0.5, 0.5], [0.0, 0.5]], z
    assert gnnseed.ari([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert math.isclose(gnnseed.ari([0, 0, 1, 1], [0, 1, 0, 1]), -0.5)
    assert math.isclose(gnnseed.accuracy([0, 1, 1], [0, 1, 0], [0, 1, 2]), 2 / 3)
    labels, inertia = gnnseed.kmeans([[0.0], [0.1], [5.0], [5.1]], 2, seed=1)
    assert labels[0] == labels[1] != labels[2] == labels[3]
    assert math.isclose(inertia, 0.01)


def check_pipelines():
    g, y = cliques(2, 6)
    train, val, test = gnnseed.split_nodes(y, 50.0, seed=3)
    assert sorted(train + val + test) == list(range(12))
    for method in ["gee", "gg", "gg-c"]:
        res = gnnseed.classify(method, g, y, [0, 1, 6, 7], [2, 8], [3, 4, 5, 9, 10, 11], seed=3)
        assert res["metric"] == 1.0, (method, res["metric"])
    res = gnnseed.cluster("gg", g, 2, truth=y, seed=0)
    assert len(res["predictions"]) == 12 and res["epochs_run"] > 0

    graph, labels = gnnseed.load_fixture("karate")
    assert (graph.n, graph.m, max(labels) + 1) == (34, 78, 4)
    res = gnnseed.cluster("gee", graph, 4, truth=labels, seed=1)
    assert -0.5 <= res["metric"] <= 1.0
    emb, lab, iters = gnnseed.unsupervised_gee(graph, 4, seed=1)
    assert len(emb) == 34 and len(emb[0]) == 4 and 1 <= iters <= 30
    assert lab == res["predictions"]

    g2, y2, theta = gnnseed.sample_dcsbm(200, [[0.3, 0.05], [0.05, 0.3]], [1, 3], seed=5)
    assert g2.n == 200 and len(theta) == 200 and y2.count(0) == 50

    try:
        gnnseed.cluster("gg-c", graph, 4)
    except ValueError:
        pass
    else:
        raise AssertionError("gg-c clustering should be rejected")


def check_experiment():
    config = """
task = "cluster"
methods = ["gee", "gg"]
trials = 3
base_seed = 4

[source]
kind = "fixture"
name = "karate"

[train.clustering]
max_epochs = 30
"""
    report = json.loads(gnnseed.run_experiment(config))
    assert report["schema_version"] == 1
    assert len(report["rows"]) == 6 and len(report["aggregates"]) == 2


if __name__ == "__main__":
    check_graph()
    check_gee_and_metrics()
    check_pipelines()
    check_experiment()
    print("python smoke test: ok")
