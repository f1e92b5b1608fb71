"""Synthetic ground truths and training data.

Three graph families (random-order DAGs with a fixed edge budget,
bow-free mixed graphs, and their degree-capped variant), linear-Gaussian
sampling with correlated noise for bidirected edges, latent hiding with
a marginal ground truth, forbidden-matrix construction, and the
graduate-admissions confounding demo.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .graph import MixedGraph, is_mag


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2 or x.shape[1] != len(self.names):
            raise ValueError("data shape does not match the variable names")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


def default_names(d: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(d))


def write_csv(dataset: Dataset, path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(dataset.names) + "\n")
        for row in dataset.x:
            fh.write(",".join(f"{v:.9g}" for v in row) + "\n")


def read_csv(path) -> Dataset:
    with open(path) as fh:
        names = tuple(fh.readline().strip().split(","))
        rows = [[float(v) for v in line.strip().split(",")] for line in fh if line.strip()]
    return Dataset(np.asarray(rows, dtype=float), names)


@dataclass(frozen=True)
class WeightedGraph:
    """A mixed graph together with the linear weights of its directed
    edges; ``weights[j, k]`` belongs to the edge j -> k."""

    graph: MixedGraph
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.graph.d, self.graph.d):
            raise ValueError("weight matrix shape mismatch")
        if np.any((w != 0) & (self.graph.directed == 0)):
            raise ValueError("weights present off the directed support")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return self.graph.d


@dataclass(frozen=True)
class GroundTruth:
    """Full generating model plus the marginal structure left after
    hiding the latent vertices."""

    full: WeightedGraph
    full_names: tuple[str, ...]
    latents: tuple[int, ...]
    observed: MixedGraph
    observed_names: tuple[str, ...]
    forbidden: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        doc = self.observed.to_json_dict(list(self.observed_names))
        doc["latents"] = [self.full_names[i] for i in self.latents]
        forb = []
        if self.forbidden is not None:
            for j in range(self.observed.d):
                for k in range(j + 1, self.observed.d):
                    if self.forbidden[j, k]:
                        forb.append([j, k])
        doc["F"] = forb
        return doc


def _sample_weights(rng: np.random.Generator, count: int) -> np.ndarray:
    signs = rng.integers(0, 2, size=count) * 2 - 1
    return signs * rng.uniform(0.5, 2.0, size=count)


def sample_weights(edge_count: int, seed: int) -> np.ndarray:
    """Edge weights drawn uniformly from (-2, -0.5) union (0.5, 2),
    each sign with probability one half."""
    if edge_count < 0:
        raise ValueError("edge count must be nonnegative")
    return _sample_weights(np.random.default_rng(seed), edge_count)


def gen_er(d: int, edges_per_vertex: int, seed: int) -> WeightedGraph:
    """Random DAG: a uniform vertex ordering plus ``edges_per_vertex * d``
    distinct order-respecting edges chosen uniformly."""
    m = edges_per_vertex * d
    capacity = d * (d - 1) // 2
    if m > capacity:
        raise ValueError(f"cannot place {m} edges in a DAG on {d} vertices (max {capacity})")
    rng = np.random.default_rng(seed)
    order = rng.permutation(d)
    candidates = [(int(order[i]), int(order[j])) for i in range(d) for j in range(i + 1, d)]
    chosen = rng.choice(len(candidates), size=m, replace=False) if m else np.zeros(0, dtype=int)
    e = np.zeros((d, d), dtype=np.int8)
    w = np.zeros((d, d))
    vals = _sample_weights(rng, m)
    for idx, val in zip(chosen, vals):
        u, v = candidates[int(idx)]
        e[u, v] = 1
        w[u, v] = val
    return WeightedGraph(MixedGraph(e, np.zeros((d, d), dtype=np.int8)), w)


def _draw_bow_free(rng: np.random.Generator, d: int, p_directed: float, p_bidirected: float) -> MixedGraph:
    order = rng.permutation(d)
    rank = np.empty(d, dtype=int)
    rank[order] = np.arange(d)
    e = np.zeros((d, d), dtype=np.int8)
    b = np.zeros((d, d), dtype=np.int8)
    for a, c in itertools.combinations(range(d), 2):
        want_dir = rng.random() < p_directed
        want_bi = rng.random() < p_bidirected
        if want_dir:
            u, v = (a, c) if rank[a] < rank[c] else (c, a)
            e[u, v] = 1
        elif want_bi:
            b[a, c] = 1
            b[c, a] = 1
    return MixedGraph(e, b)


def _attach_weights(rng: np.random.Generator, graph: MixedGraph) -> WeightedGraph:
    w = np.zeros((graph.d, graph.d))
    edges = graph.directed_edges()
    for (u, v), val in zip(edges, _sample_weights(rng, len(edges))):
        w[u, v] = val
    return WeightedGraph(graph, w)


def gen_bf(d: int, p_directed: float, p_bidirected: float, seed: int, max_attempts: int = 1000) -> WeightedGraph:
    """Random bow-free maximal ancestral mixed graph.

    Per unordered pair a directed edge (oriented along a random vertex
    order) and a bidirected edge are proposed independently; a pair
    proposing both keeps only the directed edge.  Draws are rejected and
    repeated until the result passes the full MAG check (no almost
    directed cycles, no inducing paths).
    """
    if not (0 <= p_directed <= 1 and 0 <= p_bidirected <= 1):
        raise ValueError("edge probabilities must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        graph = _draw_bow_free(rng, d, p_directed, p_bidirected)
        if not is_mag(graph).ok:
            continue
        return _attach_weights(rng, graph)
    raise RuntimeError(f"no bow-free MAG found in {max_attempts} attempts")


def _total_degrees(graph: MixedGraph) -> np.ndarray:
    return (
        graph.directed.sum(axis=0)
        + graph.directed.sum(axis=1)
        + graph.bidirected.sum(axis=1)
    )


def gen_3bf(d: int, p_directed: float, p_bidirected: float, seed: int, max_attempts: int = 1000) -> WeightedGraph:
    """Bow-free graph post-processed so every vertex has total degree at
    most three, removing uniformly random incident edges.  Edge removal
    can break maximality, so trimmed draws failing the MAG check are
    rejected and regenerated."""
    if not (0 <= p_directed <= 1 and 0 <= p_bidirected <= 1):
        raise ValueError("edge probabilities must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        graph = _draw_bow_free(rng, d, p_directed, p_bidirected)
        if not is_mag(graph).ok:
            continue
        for v in range(d):
            while _total_degrees(graph)[v] > 3:
                incident = [("d", v, int(k)) for k in np.nonzero(graph.directed[v])[0]]
                incident += [("d", int(k), v) for k in np.nonzero(graph.directed[:, v])[0]]
                incident += [
                    ("b", min(v, int(k)), max(v, int(k)))
                    for k in np.nonzero(graph.bidirected[v])[0]
                ]
                kind, a, c = incident[int(rng.integers(len(incident)))]
                if kind == "d":
                    graph = graph.remove_edges(directed=[(a, c)])
                else:
                    graph = graph.remove_edges(bidirected=[(a, c)])
        if not is_mag(graph).ok:
            continue
        return _attach_weights(rng, graph)
    raise RuntimeError(f"no degree-capped bow-free MAG found in {max_attempts} attempts")


def topological_order(directed: np.ndarray) -> list[int]:
    d = directed.shape[0]
    indeg = directed.sum(axis=0).astype(int).tolist()
    queue = [v for v in range(d) if indeg[v] == 0]
    order = []
    while queue:
        v = queue.pop(0)
        order.append(v)
        for w in np.nonzero(directed[v])[0]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(int(w))
    if len(order) != d:
        raise ValueError("directed part contains a cycle")
    return order


def noise_covariance(graph: MixedGraph) -> np.ndarray:
    """Identity plus the bidirected adjacency, rescaled so the matrix is
    positive definite while keeping the adjacency as the off-diagonal
    support: sigma = I + rho * A with rho = 0.9 / (1 + lambda_max(A))."""
    a = graph.bidirected.astype(float)
    if not a.any():
        return np.eye(graph.d)
    lam_max = float(np.max(np.linalg.eigvalsh(a)))
    rho = 0.9 / (1.0 + max(lam_max, 0.0))
    return np.eye(graph.d) + rho * a


def sem_sample(
    truth: WeightedGraph,
    n: int,
    seed: int,
    names: tuple[str, ...] | None = None,
    noise_override: np.ndarray | None = None,
) -> Dataset:
    """Draw n rows from the linear additive-noise model: correlated
    Gaussian noise whose covariance carries the bidirected adjacency,
    then propagation along the directed edges in topological order."""
    d = truth.d
    order = topological_order(truth.graph.directed)
    if noise_override is not None:
        eps = np.asarray(noise_override, dtype=float)
        if eps.shape != (n, d):
            raise ValueError("noise override must be an n x d array")
    else:
        rng = np.random.default_rng(seed)
        chol = np.linalg.cholesky(noise_covariance(truth.graph))
        eps = rng.standard_normal((n, d)) @ chol.T
    x = np.zeros((n, d))
    for j in order:
        parents = np.nonzero(truth.graph.directed[:, j])[0]
        x[:, j] = eps[:, j]
        if parents.size:
            x[:, j] += x[:, parents] @ truth.weights[parents, j]
    return Dataset(x, names or default_names(d))


def _bool_closure_with_identity(a: np.ndarray) -> np.ndarray:
    reach = a.astype(bool) | np.eye(a.shape[0], dtype=bool)
    for _ in range(max(1, int(np.ceil(np.log2(max(a.shape[0], 2)))))):
        reach = reach | (reach @ reach)
    return reach


def hide_latents(
    truth: WeightedGraph,
    data: Dataset,
    fraction: float,
    seed: int,
    latents: tuple[int, ...] | None = None,
) -> tuple[GroundTruth, Dataset]:
    """Hide ``round(fraction * d)`` uniformly chosen vertices (or an
    explicit set) and build the marginal ground truth over the rest.

    Marginal rules: an observed pair u, v gets a directed edge when u
    reaches v through hidden-only intermediates, and a bidirected edge
    when it already had one or some hidden vertex reaches both through
    hidden-only paths.  A pair qualifying for both keeps the directed
    edge, mirroring the bow resolution of the generators.
    """
    if not 0 <= fraction < 1:
        raise ValueError("fraction must lie in [0, 1)")
    d = truth.d
    rng = np.random.default_rng(seed)
    if latents is None:
        count = round_half_up(fraction * d)
        latents = tuple(sorted(int(v) for v in rng.choice(d, size=count, replace=False)))
    else:
        latents = tuple(sorted(latents))
    observed = [v for v in range(d) if v not in latents]

    a = truth.graph.directed.astype(bool)
    hid = list(latents)
    closure_hidden = _bool_closure_with_identity(a[np.ix_(hid, hid)]) if hid else np.zeros((0, 0), bool)

    # u -> v through hidden-only intermediates (direct edges included)
    through = a.copy()
    if hid:
        through |= a[:, hid] @ closure_hidden @ a[hid, :]
    e_obs = through[np.ix_(observed, observed)].astype(np.int8)

    b_obs = truth.graph.bidirected[np.ix_(observed, observed)].astype(bool)
    if hid:
        hid_to_obs = closure_hidden @ a[np.ix_(hid, observed)]
        b_obs |= hid_to_obs.T @ hid_to_obs
    np.fill_diagonal(b_obs, False)
    bow = (e_obs.astype(bool) | e_obs.astype(bool).T) & b_obs
    b_obs &= ~bow
    marginal = MixedGraph(e_obs, b_obs.astype(np.int8))

    names_obs = tuple(data.names[v] for v in observed)
    reduced = Dataset(data.x[:, observed], names_obs)
    gt = GroundTruth(
        full=truth,
        full_names=data.names,
        latents=latents,
        observed=marginal,
        observed_names=names_obs,
    )
    return gt, reduced


def gen_forbidden(observed: MixedGraph, fraction: float, seed: int) -> np.ndarray:
    """Mark ``round(fraction * count)`` uniformly chosen nonadjacent pairs
    as having no direct causal relationship; never marks a pair that
    carries an edge in the marginal truth."""
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must lie in [0, 1]")
    d = observed.d
    free = [(j, k) for j, k in itertools.combinations(range(d), 2) if not observed.adjacent(j, k)]
    rng = np.random.default_rng(seed)
    count = round_half_up(fraction * len(free))
    forbidden = np.zeros((d, d), dtype=np.int8)
    if count:
        for idx in rng.choice(len(free), size=count, replace=False):
            j, k = free[int(idx)]
            forbidden[j, k] = 1
            forbidden[k, j] = 1
    return forbidden


@dataclass(frozen=True)
class DemoScenario:
    dataset: Dataset
    expected: MixedGraph
    forbidden: np.ndarray
    truth: WeightedGraph
    truth_names: tuple[str, ...]
    latents: tuple[int, ...]


def berkeley_demo(n: int, seed: int, hide: bool = True) -> DemoScenario:
    """Graduate-admissions confounding scenario.

    The generating model: ability and gender drive department choice,
    and ability, department and gender all drive admission.  With
    ``hide=True`` the department and ability columns are dropped (two
    noisy department indicators stay observable) and the forbidden
    matrix asserts no direct causal link between gender and admission;
    the expected learned structure is then a single bidirected edge
    gender <-> admit.  With ``hide=False`` everything is observed and the
    expected structure is the generating DAG itself.
    """
    if n < 100:
        raise ValueError("need at least 100 samples for the demo")
    rng = np.random.default_rng(seed)

    if not hide:
        names = ("gender", "ability", "department", "admit")
        gender, ability, department, admit = range(4)
        edges = [
            (ability, department),
            (ability, admit),
            (department, admit),
            (gender, department),
            (gender, admit),
        ]
        e = np.zeros((4, 4), dtype=np.int8)
        w = np.zeros((4, 4))
        for (u, v), val in zip(edges, _sample_weights(rng, len(edges))):
            e[u, v] = 1
            w[u, v] = val
        truth = WeightedGraph(MixedGraph(e, np.zeros((4, 4), dtype=np.int8)), w)
        data = sem_sample(truth, n, seed + 1, names=names)
        return DemoScenario(data, truth.graph, np.zeros((4, 4), dtype=np.int8), truth, names, ())

    names = ("gender", "ability", "department", "dept_a", "dept_b", "admit")
    gender, ability, department, dept_a, dept_b, admit = range(6)
    edges = [
        (ability, department),
        (ability, admit),
        (department, admit),
        (gender, department),
        (gender, admit),
        (department, dept_a),
        (department, dept_b),
    ]
    e = np.zeros((6, 6), dtype=np.int8)
    w = np.zeros((6, 6))
    for (u, v), val in zip(edges, _sample_weights(rng, len(edges))):
        e[u, v] = 1
        w[u, v] = val
    truth = WeightedGraph(MixedGraph(e, np.zeros((6, 6), dtype=np.int8)), w)
    data = sem_sample(truth, n, seed + 1, names=names)
    # the two observable department columns are membership dummies of the
    # hidden department; standardized columns keep the least-squares score
    # from preferring structures that merely chase large raw variances
    x = data.x.copy()
    x[:, dept_a] = (x[:, department] > 0).astype(float)
    x[:, dept_b] = 1.0 - x[:, dept_a]
    std = x.std(axis=0)
    x = (x - x.mean(axis=0)) / np.where(std == 0, 1.0, std)
    data = Dataset(x, names)
    gt, reduced = hide_latents(truth, data, 0.0, seed, latents=(ability, department))

    d_obs = reduced.d
    forbidden = np.zeros((d_obs, d_obs), dtype=np.int8)
    g_idx = reduced.names.index("gender")
    a_idx = reduced.names.index("admit")
    forbidden[g_idx, a_idx] = forbidden[a_idx, g_idx] = 1
    expected = MixedGraph.from_edges(d_obs, bidirected=[(g_idx, a_idx)])
    return DemoScenario(reduced, expected, forbidden, truth, names, gt.latents)
