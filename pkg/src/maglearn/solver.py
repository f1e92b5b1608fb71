"""Exact branch-and-cut minimization of the penalized least-squares /
least-absolute-deviation score over maximal ancestral graph structures.

Search space: every unordered vertex pair is assigned one of
{no edge, j->k, k->j, j<->k}, restricted by the forbidden matrix
(directed edges only where f = 0, bidirected only where f = 1).  The
relaxation at a partial assignment fits each column on every still
permitted parent/spouse, which is a valid lower bound because supports
only shrink and penalties only grow toward the leaves.  Fully assigned
candidates are run through the separation routine; violated structures
are rejected and their cuts pooled, MAG structures become incumbents.
"""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from scipy.optimize import linprog, lsq_linear

from .graph import MixedGraph, is_mag
from .separation import DEFAULT_CONFIG, LazyCut, SeparationConfig, separate

_EXACT_LAD_MAX_COLS = 10
_IRLS_TOL = 1e-8
_IRLS_MAX_ITER = 200


class PairState(IntEnum):
    UNDECIDED = 0
    NONE = 1
    J_TO_K = 2  # low-index vertex -> high-index vertex
    K_TO_J = 3
    BIDIRECTED = 4


@dataclass(frozen=True)
class Instance:
    """One learning problem: data, structural side information, and knobs."""

    x: np.ndarray
    forbidden: np.ndarray
    lam: float = 1.0
    q: int = 2
    weight_bound: float = 100.0
    time_limit: float = 900.0
    gap_tol: float = 0.0
    seed: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("data must be a nonempty 2-d array")
        forbidden = np.asarray(self.forbidden, dtype=np.int8)
        if forbidden.shape != (x.shape[1], x.shape[1]):
            raise ValueError("forbidden matrix must be d x d")
        if forbidden.diagonal().any() or not (forbidden == forbidden.T).all():
            raise ValueError("forbidden matrix must be symmetric with zero diagonal")
        if self.q not in (1, 2):
            raise ValueError("q must be 1 or 2")
        if self.weight_bound <= 0:
            raise ValueError("weight bound must be positive")
        if self.lam < 0:
            raise ValueError("edge penalty must be nonnegative")
        x.setflags(write=False)
        forbidden.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "forbidden", forbidden)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


def _lad_exact(a: np.ndarray, y: np.ndarray, bound: float) -> np.ndarray:
    """Least absolute deviations via the standard LP epigraph form."""
    n, p = a.shape
    cost = np.concatenate([np.zeros(p), np.ones(n)])
    a_ub = np.block([[a, -np.eye(n)], [-a, -np.eye(n)]])
    b_ub = np.concatenate([y, -y])
    bounds = [(-bound, bound)] * p + [(0, None)] * n
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:  # pragma: no cover - highs is robust on these LPs
        raise RuntimeError(f"LAD subproblem failed: {res.message}")
    return res.x[:p]


def _lad_irls(a: np.ndarray, y: np.ndarray, bound: float) -> np.ndarray:
    """Iteratively reweighted least squares for the l1 fit, weights
    clipped into the box after each reweighted solve."""
    w = np.clip(np.linalg.lstsq(a, y, rcond=None)[0], -bound, bound)
    for _ in range(_IRLS_MAX_ITER):
        r = y - a @ w
        scale = 1.0 / np.sqrt(np.maximum(np.abs(r), _IRLS_TOL))
        w_new = np.linalg.lstsq(a * scale[:, None], y * scale, rcond=None)[0]
        w_new = np.clip(w_new, -bound, bound)
        if np.max(np.abs(w_new - w)) < _IRLS_TOL:
            return w_new
        w = w_new
    return w


def column_fit(x: np.ndarray, j: int, support, q: int, c: float):
    """Best weights for predicting column j from the support columns.

    q = 2: least squares (minimum-norm on rank-deficient designs),
    re-solved with box constraints whenever the unconstrained optimum
    leaves [-c, c].  q = 1: exact LP solve up to 10 support columns,
    IRLS beyond.  Returns (weights over the support, attained loss).
    """
    support = tuple(sorted(int(k) for k in support))
    if j in support:
        raise ValueError("a column cannot predict itself")
    y = np.asarray(x, dtype=float)[:, j]
    if not support:
        return np.zeros(0), float(np.sum(np.abs(y) ** q))
    a = np.asarray(x, dtype=float)[:, support]
    if q == 2:
        w = np.linalg.lstsq(a, y, rcond=None)[0]
        if np.max(np.abs(w)) > c + 1e-12:
            w = lsq_linear(a, y, bounds=(-c, c), method="trf", tol=1e-12).x
        loss = float(np.sum((y - a @ w) ** 2))
    else:
        if len(support) <= _EXACT_LAD_MAX_COLS:
            w = _lad_exact(a, y, c)
        else:
            w = _lad_irls(a, y, c)
        loss = float(np.sum(np.abs(y - a @ w)))
    return w, loss


class ColumnFitCache:
    """Memoizes column fits per (column, support) within one problem."""

    def __init__(self, x: np.ndarray, q: int, c: float):
        self.x = np.asarray(x, dtype=float)
        self.q = q
        self.c = c
        self._cache: dict[tuple[int, tuple[int, ...]], tuple[np.ndarray, float]] = {}

    def fit(self, j: int, support) -> tuple[np.ndarray, float]:
        key = (j, tuple(sorted(int(k) for k in support)))
        hit = self._cache.get(key)
        if hit is None:
            w, loss = column_fit(self.x, j, key[1], self.q, self.c)
            w.setflags(write=False)
            hit = self._cache[key] = (w, loss)
        return hit


def assemble_weights(graph: MixedGraph, fits: ColumnFitCache) -> np.ndarray:
    """Weight matrix for a structure: column j holds the fitted
    coefficients of j's parents and spouses; everything else is zero."""
    d = graph.d
    weights = np.zeros((d, d))
    for j in range(d):
        support = tuple(int(k) for k in np.nonzero(graph.directed[:, j] | graph.bidirected[:, j])[0])
        w, _ = fits.fit(j, support)
        for k, val in zip(support, w):
            weights[k, j] = val
    return weights


def objective(
    weights: np.ndarray,
    graph: MixedGraph,
    x: np.ndarray,
    lam: float,
    q: int,
    weight_bound: float | None = None,
) -> float:
    """Residual score plus lam per edge variable.

    The penalty follows the double sum over ordered entries, so each
    bidirected edge (a symmetric pair of variables) contributes 2 * lam
    while a directed edge contributes lam.  Rejects weight matrices with
    mass (beyond 1e-9) outside the union of edge supports, or above the
    bound when one is given.
    """
    weights = np.asarray(weights, dtype=float)
    x = np.asarray(x, dtype=float)
    support = (graph.directed + graph.bidirected) > 0
    if np.any(np.abs(weights[~support]) > 1e-9):
        raise ValueError("weights present outside the edge support")
    if weight_bound is not None and np.any(np.abs(weights) > weight_bound + 1e-9):
        raise ValueError("weights exceed the weight bound")
    resid = x - x @ weights
    loss = float(np.sum(np.abs(resid) ** q))
    penalty = lam * (int(graph.directed.sum()) + int(graph.bidirected.sum()))
    return loss + penalty


def mip_gap(incumbent_objective: float, best_bound: float) -> float:
    """Relative optimality gap |incumbent - bound| / |incumbent|; zero gap
    certifies global optimality."""
    if incumbent_objective == best_bound:
        return 0.0
    if incumbent_objective == 0.0:
        return 0.0 if best_bound == 0.0 else float("inf")
    return abs(incumbent_objective - best_bound) / abs(incumbent_objective)


def vertex_pairs(d: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(d), 2))


def allowed_pair_states(forbidden: np.ndarray, pair: tuple[int, int]) -> tuple[PairState, ...]:
    a, b = pair
    if forbidden[a, b]:
        return (PairState.NONE, PairState.BIDIRECTED)
    return (PairState.NONE, PairState.J_TO_K, PairState.K_TO_J)


@dataclass(frozen=True)
class SearchNode:
    assignment: tuple[int, ...]
    depth: int
    bound: float


@dataclass(frozen=True)
class Solution:
    weights: np.ndarray
    graph: MixedGraph
    objective: float
    best_bound: float
    mip_gap: float
    status: str  # OPTIMAL | GAP_LIMIT | TIME_LIMIT | INFEASIBLE
    cuts_added: dict[str, int]
    nodes_explored: int

    def to_json_dict(self, names=None) -> dict:
        doc = self.graph.to_json_dict(names)
        doc.update(
            {
                "W": [[float(v) for v in row] for row in self.weights],
                "objective": float(self.objective),
                "gap": float(self.mip_gap),
                "status": self.status,
                "best_bound": float(self.best_bound),
                "cuts": dict(self.cuts_added),
                "nodes": int(self.nodes_explored),
            }
        )
        return doc


def _supports(d: int, pairs, assignment) -> list[tuple[int, ...]]:
    """Per-column permitted parents/spouses; UNDECIDED counts as permitted."""
    sup: list[list[int]] = [[] for _ in range(d)]
    for (a, b), st in zip(pairs, assignment):
        if st == PairState.UNDECIDED or st == PairState.BIDIRECTED:
            sup[a].append(b)
            sup[b].append(a)
        elif st == PairState.J_TO_K:
            sup[b].append(a)
        elif st == PairState.K_TO_J:
            sup[a].append(b)
    return [tuple(s) for s in sup]


def _fixed_penalty(lam: float, assignment) -> float:
    count = 0
    for st in assignment:
        if st == PairState.J_TO_K or st == PairState.K_TO_J:
            count += 1
        elif st == PairState.BIDIRECTED:
            count += 2
    return lam * count


def _bound_from_assignment(instance: Instance, pairs, assignment, fits: ColumnFitCache):
    sups = _supports(instance.d, pairs, assignment)
    loss = 0.0
    for j in range(instance.d):
        loss += fits.fit(j, sups[j])[1]
    return loss + _fixed_penalty(instance.lam, assignment), sups


def node_bound(node: SearchNode, instance: Instance, fits: ColumnFitCache | None = None) -> float:
    """Lower bound on the objective of every completion of the node."""
    fits = fits or ColumnFitCache(instance.x, instance.q, instance.weight_bound)
    pairs = vertex_pairs(instance.d)
    return _bound_from_assignment(instance, pairs, node.assignment, fits)[0]


def _graph_from_assignment(d: int, pairs, assignment) -> MixedGraph:
    e = np.zeros((d, d), dtype=np.int8)
    b = np.zeros((d, d), dtype=np.int8)
    for (j, k), st in zip(pairs, assignment):
        if st == PairState.J_TO_K:
            e[j, k] = 1
        elif st == PairState.K_TO_J:
            e[k, j] = 1
        elif st == PairState.BIDIRECTED:
            b[j, k] = 1
            b[k, j] = 1
    return MixedGraph(e, b)


def _cut_forced_on(cut: LazyCut, pair_index, assignment) -> bool:
    """True when every completion of the assignment violates the cut."""
    for j, k in cut.directed_terms:
        a, b = (j, k) if j < k else (k, j)
        want = PairState.J_TO_K if j < k else PairState.K_TO_J
        if assignment[pair_index[(a, b)]] != want:
            return False
    for term in cut.bidirected_terms:
        if assignment[pair_index[term]] != PairState.BIDIRECTED:
            return False
    for term in cut.guard_bidirected:
        st = assignment[pair_index[term]]
        if st == PairState.UNDECIDED or st == PairState.BIDIRECTED:
            return False
    return True


def _pick_branch_pair(pairs, assignment, sups, fits: ColumnFitCache) -> int:
    """Branch on the undecided pair carrying the largest fitted weight in
    the relaxation; ties go to the lowest pair index."""
    weight_of: dict[tuple[int, int], float] = {}
    for j, sup in enumerate(sups):
        w, _ = fits.fit(j, sup)
        for k, val in zip(sorted(sup), w):
            weight_of[(k, j)] = abs(float(val))
    best_p, best_score = -1, -1.0
    for p, ((a, b), st) in enumerate(zip(pairs, assignment)):
        if st != PairState.UNDECIDED:
            continue
        score = max(weight_of.get((a, b), 0.0), weight_of.get((b, a), 0.0))
        if score > best_score:
            best_p, best_score = p, score
    return best_p


def _repair_candidate(
    graph: MixedGraph,
    fits: ColumnFitCache,
    lam: float,
    config: SeparationConfig,
    max_rounds: int = 1000,
):
    """Greedy repair of a rejected candidate: per violated cut drop the
    present term with the smallest fitted weight, refit, repeat until the
    graph is a MAG (the empty graph is, so this terminates)."""
    g = graph
    for _ in range(max_rounds):
        cuts = separate(g, config)
        if not cuts:
            break
        weights = assemble_weights(g, fits)
        for cut in sorted(cuts, key=LazyCut.canonical_key):
            if not cut.violated_by(g):
                continue
            candidates: list[tuple[float, int, tuple[int, int]]] = []
            for j, k in sorted(cut.directed_terms):
                if g.directed[j, k]:
                    candidates.append((abs(weights[j, k]), 0, (j, k)))
            for j, k in sorted(cut.bidirected_terms):
                if g.bidirected[j, k]:
                    mag = max(abs(weights[j, k]), abs(weights[k, j]))
                    candidates.append((mag, 1, (j, k)))
            if not candidates:
                continue
            _, kind, edge = min(candidates)
            if kind == 0:
                g = g.remove_edges(directed=[edge])
            else:
                g = g.remove_edges(bidirected=[edge])
    obj = 0.0
    for j in range(g.d):
        support = tuple(int(k) for k in np.nonzero(g.directed[:, j] | g.bidirected[:, j])[0])
        obj += fits.fit(j, support)[1]
    obj += lam * (int(g.directed.sum()) + int(g.bidirected.sum()))
    return g, obj


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def solve(
    instance: Instance,
    log=None,
    separation_config: SeparationConfig = DEFAULT_CONFIG,
) -> Solution:
    """Best-bound-first branch and cut; deterministic for a fixed instance.

    The incumbent starts at the empty graph (always a MAG), so a feasible
    solution exists at every point and INFEASIBLE cannot occur.  Writes
    one ``node=.. bound=.. incumbent=.. gap=.. cuts=c,a,i`` record per
    explored node when ``log`` is a file-like object or a path.
    """
    t0 = time.monotonic()
    close_log = False
    if isinstance(log, (str, bytes)) or hasattr(log, "__fspath__"):
        log = open(log, "w")
        close_log = True

    d = instance.d
    pairs = vertex_pairs(d)
    pair_index = {pair: p for p, pair in enumerate(pairs)}
    allowed = [allowed_pair_states(instance.forbidden, pair) for pair in pairs]
    fits = ColumnFitCache(instance.x, instance.q, instance.weight_bound)

    inc_graph = MixedGraph.empty(d)
    inc_obj, _ = _bound_from_assignment(
        instance, pairs, tuple([PairState.NONE] * len(pairs)), fits
    )

    pool: dict = {}
    cuts_added = {"cycle": 0, "almost": 0, "inducing": 0}
    nodes_explored = 0
    counter = itertools.count()

    root = tuple([PairState.UNDECIDED] * len(pairs))
    root_bound, _ = _bound_from_assignment(instance, pairs, root, fits)
    heap = [(root_bound, 0, next(counter), root)]

    status = "OPTIMAL"
    best_bound = inc_obj
    slack = 1e-9

    def prune_level() -> float:
        return inc_obj - slack * max(1.0, abs(inc_obj))

    while heap:
        if time.monotonic() - t0 > instance.time_limit:
            status = "TIME_LIMIT"
            best_bound = min(heap[0][0], inc_obj)
            break
        bound, neg_depth, _, assignment = heapq.heappop(heap)
        if bound >= prune_level():
            # best-first: every remaining node is at least as bad
            best_bound = inc_obj
            status = "OPTIMAL"
            heap.clear()
            break
        nodes_explored += 1
        best_bound = min(bound, inc_obj)
        assert bound <= inc_obj + slack * max(1.0, abs(inc_obj))
        gap_now = mip_gap(inc_obj, best_bound)
        if log is not None:
            log.write(
                f"node={nodes_explored} bound={_fmt(best_bound)} "
                f"incumbent={_fmt(inc_obj)} gap={_fmt(gap_now)} "
                f"cuts={cuts_added['cycle']},{cuts_added['almost']},{cuts_added['inducing']}\n"
            )
        if gap_now <= instance.gap_tol:
            status = "OPTIMAL" if gap_now == 0.0 else "GAP_LIMIT"
            break

        depth = -neg_depth
        if depth == len(pairs):
            candidate = _graph_from_assignment(d, pairs, assignment)
            if any(cut.violated_by(candidate) for cut in pool.values()):
                continue
            cuts = separate(candidate, separation_config)
            if cuts:
                fresh = False
                for cut in cuts:
                    key = cut.canonical_key()
                    if key not in pool:
                        pool[key] = cut
                        cuts_added[cut.family] += 1
                        fresh = True
                if fresh:
                    repaired, rep_obj = _repair_candidate(
                        candidate, fits, instance.lam, separation_config
                    )
                    if rep_obj < inc_obj:
                        inc_graph, inc_obj = repaired, rep_obj
                continue
            if bound < inc_obj:
                inc_graph, inc_obj = candidate, bound
            continue

        if any(_cut_forced_on(cut, pair_index, assignment) for cut in pool.values()):
            continue
        _, sups = _bound_from_assignment(instance, pairs, assignment, fits)
        p = _pick_branch_pair(pairs, assignment, sups, fits)
        for state in allowed[p]:
            child = list(assignment)
            child[p] = state
            child = tuple(child)
            child_bound, _ = _bound_from_assignment(instance, pairs, child, fits)
            if child_bound >= prune_level():
                continue
            heapq.heappush(heap, (child_bound, neg_depth - 1, next(counter), child))
    else:
        best_bound = inc_obj
        status = "OPTIMAL"

    if status != "TIME_LIMIT" and status != "GAP_LIMIT":
        best_bound = inc_obj

    weights = assemble_weights(inc_graph, fits)
    gap = mip_gap(inc_obj, best_bound)
    if close_log:
        log.close()

    check = is_mag(inc_graph)
    assert check.ok, "solver produced a structure that is not a MAG"
    recomputed = objective(weights, inc_graph, instance.x, instance.lam, instance.q)
    assert abs(recomputed - inc_obj) <= 1e-8 * max(1.0, abs(inc_obj))

    return Solution(
        weights=weights,
        graph=inc_graph,
        objective=inc_obj,
        best_bound=best_bound,
        mip_gap=gap,
        status=status,
        cuts_added=cuts_added,
        nodes_explored=nodes_explored,
    )
