import itertools

import numpy as np
import pytest

from maglearn.graph import MixedGraph


def random_pair_state_graph(d, rng, p_dir=0.15, p_bi=0.15):
    """Random mixed graph with one state per unordered pair (no bows)."""
    e = np.zeros((d, d), dtype=np.int8)
    b = np.zeros((d, d), dtype=np.int8)
    for j, k in itertools.combinations(range(d), 2):
        r = rng.random()
        if r < p_dir:
            e[j, k] = 1
        elif r < 2 * p_dir:
            e[k, j] = 1
        elif r < 2 * p_dir + p_bi:
            b[j, k] = 1
            b[k, j] = 1
    return MixedGraph(e, b)


def random_digraph(d, rng, p=0.25):
    """Random directed graph; 2-cycles allowed, no bidirected edges."""
    e = (rng.random((d, d)) < p).astype(np.int8)
    np.fill_diagonal(e, 0)
    return MixedGraph(e, np.zeros((d, d), dtype=np.int8))


def simple_directed_paths(graph, src, dst):
    """All simple directed paths src -> dst as vertex tuples."""
    out = []

    def walk(v, path):
        if v == dst:
            out.append(tuple(path))
            return
        for w in np.nonzero(graph.directed[v])[0]:
            if w not in path:
                walk(int(w), path + [int(w)])

    walk(src, [src])
    return out


def edges_on_simple_paths(graph, src, dst):
    edges = set()
    for path in simple_directed_paths(graph, src, dst):
        edges.update(zip(path, path[1:]))
    return edges


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
