"""Structure-recovery metrics: per-pair edge types, weight thresholding,
structural Hamming distance with 0 / 0.5 / 1 contributions, F1 in typed
and skeleton flavors, and best-over-threshold selection."""
from __future__ import annotations

import itertools
from enum import Enum

import numpy as np

from .graph import MixedGraph


class EdgeType(Enum):
    RIGHT = "->"
    LEFT = "<-"
    BIDIRECTED = "<->"
    NONE = "none"


def edge_type(graph: MixedGraph, j: int, k: int) -> EdgeType:
    """Type of the unordered pair (j, k), j < k, as seen from j."""
    if j >= k:
        raise ValueError("expects j < k")
    if graph.bidirected[j, k]:
        return EdgeType.BIDIRECTED
    if graph.directed[j, k]:
        return EdgeType.RIGHT
    if graph.directed[k, j]:
        return EdgeType.LEFT
    return EdgeType.NONE


def threshold(weights: np.ndarray, support: MixedGraph, delta: float) -> MixedGraph:
    """Drop support edges whose weight magnitude falls below delta;
    bidirected edges use the larger of their two weight entries."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    weights = np.asarray(weights, dtype=float)
    e = np.zeros_like(support.directed)
    b = np.zeros_like(support.bidirected)
    for j, k in support.directed_edges():
        if abs(weights[j, k]) >= delta:
            e[j, k] = 1
    for j, k in support.bidirected_pairs():
        if max(abs(weights[j, k]), abs(weights[k, j])) >= delta:
            b[j, k] = 1
            b[k, j] = 1
    return MixedGraph(e, b)


def _check_same_size(gt: MixedGraph, pr: MixedGraph) -> None:
    if gt.d != pr.d:
        raise ValueError("graphs must share the vertex count")


def shd(gt: MixedGraph, pr: MixedGraph) -> float:
    """Sum over unordered pairs: 0 when the edge types agree, 0.5 when
    both graphs have an edge but of different type, 1 otherwise."""
    _check_same_size(gt, pr)
    total = 0.0
    for j, k in itertools.combinations(range(gt.d), 2):
        t_gt = edge_type(gt, j, k)
        t_pr = edge_type(pr, j, k)
        if t_gt == t_pr:
            continue
        if t_gt != EdgeType.NONE and t_pr != EdgeType.NONE:
            total += 0.5
        else:
            total += 1.0
    return total


def f1(gt: MixedGraph, pr: MixedGraph, mode: str = "typed") -> float:
    """Harmonic mean of precision and recall over unordered pairs.

    typed: a predicted edge is a true positive only when its type matches
    the ground truth exactly.  skeleton: any edge against any edge.
    """
    if mode not in ("typed", "skeleton"):
        raise ValueError("mode must be 'typed' or 'skeleton'")
    _check_same_size(gt, pr)
    tp = 0
    predicted = 0
    actual = 0
    for j, k in itertools.combinations(range(gt.d), 2):
        t_gt = edge_type(gt, j, k)
        t_pr = edge_type(pr, j, k)
        if t_pr != EdgeType.NONE:
            predicted += 1
        if t_gt != EdgeType.NONE:
            actual += 1
        if t_pr != EdgeType.NONE and t_gt != EdgeType.NONE:
            if mode == "skeleton" or t_gt == t_pr:
                tp += 1
    precision = tp / predicted if predicted else 0.0
    recall = tp / actual if actual else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def default_delta_grid() -> np.ndarray:
    """0 plus 21 logarithmically spaced thresholds from 1e-3 to 1."""
    return np.concatenate([[0.0], np.logspace(-3.0, 0.0, 21)])


def best_over_thresholds(weights: np.ndarray, support: MixedGraph, gt: MixedGraph, delta_grid=None):
    """Threshold sweep keeping the structurally closest result; ties go
    to the smallest threshold.  Returns (graph, shd, delta)."""
    grid = default_delta_grid() if delta_grid is None else np.asarray(delta_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("threshold grid must be non-empty")
    best = None
    for delta in sorted(float(v) for v in grid):
        candidate = threshold(weights, support, delta)
        score = shd(gt, candidate)
        if best is None or score < best[1]:
            best = (candidate, score, delta)
    return best
