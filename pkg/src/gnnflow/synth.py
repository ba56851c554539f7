"""Synthetic graph generation spanning the density / clustering feature space.

Three classic families are mixed: uniform random (Erdos-Renyi style),
preferential attachment, and small-world ring rewiring. Each graph draws its
own RNG stream from (seed, index), so a dataset is reproducible and
order-independent regardless of how generation is parallelized.
"""

from dataclasses import dataclass, field

import numpy as np

from ._util import GenerationError
from .graphs import Graph

FAMILIES = ("uniform", "pref-attach", "small-world")

_MAX_RETRIES = 64


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for one synthetic dataset."""

    count: int
    node_range: tuple = (20, 400)
    weights: tuple = (1 / 3, 1 / 3, 1 / 3)  # uniform, pref-attach, small-world
    edge_prob_range: tuple = (0.02, 0.5)  # uniform family
    attach_range: tuple = (1, 8)  # pref-attach family: edges per new node
    ring_neighbor_range: tuple = (1, 6)  # small-world family: neighbors per side
    rewire_prob_range: tuple = (0.05, 0.6)
    seed: int = 0

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be non-negative")
        lo, hi = self.node_range
        if lo < 2 or hi < lo:
            raise ValueError("node_range must satisfy 2 <= min <= max")
        if len(self.weights) != len(FAMILIES):
            raise ValueError(f"need {len(FAMILIES)} mix weights")
        if any(w < 0 for w in self.weights):
            raise ValueError("mix weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("mix weights must sum to 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def _uniform_in(rng, bounds) -> float:
    lo, hi = bounds
    return lo + (hi - lo) * rng.random()


def _int_in(rng, bounds) -> int:
    lo, hi = bounds
    return int(rng.integers(lo, hi + 1))


def _pick_family(rng, weights) -> str:
    x = rng.random()
    acc = 0.0
    for name, w in zip(FAMILIES, weights):
        acc += w
        if x < acc:
            return name
    return FAMILIES[-1]


def _gen_uniform(rng, n, spec) -> Graph:
    p = _uniform_in(rng, spec.edge_prob_range)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    edges = np.stack([iu[mask], ju[mask]], axis=1)
    return Graph.from_edges(edges, node_count=n)


def _gen_pref_attach(rng, n, spec) -> Graph:
    m = _int_in(rng, spec.attach_range)
    if m >= n:
        raise GenerationError(f"attachment degree {m} >= node count {n}")
    edges = []
    targets = list(range(m))
    endpoint_pool = []  # one entry per edge endpoint: degree-proportional sampling
    for v in range(m, n):
        edges.extend((v, t) for t in targets)
        endpoint_pool.extend(targets)
        endpoint_pool.extend([v] * m)
        chosen = set()
        while len(chosen) < m:
            chosen.add(endpoint_pool[int(rng.integers(len(endpoint_pool)))])
        targets = sorted(chosen)
    return Graph.from_edges(edges, node_count=n)


def _gen_small_world(rng, n, spec) -> Graph:
    r = _int_in(rng, spec.ring_neighbor_range)
    if n <= 2 * r:
        raise GenerationError(f"ring radius {r} too large for {n} nodes")
    beta = _uniform_in(rng, spec.rewire_prob_range)
    adjacency = {v: set() for v in range(n)}
    for j in range(1, r + 1):
        for v in range(n):
            w = (v + j) % n
            adjacency[v].add(w)
            adjacency[w].add(v)
    for j in range(1, r + 1):
        for v in range(n):
            w = (v + j) % n
            if w not in adjacency[v]:
                continue  # already rewired away from this slot
            if rng.random() >= beta:
                continue
            if len(adjacency[v]) >= n - 1:
                continue  # saturated node: nothing valid to rewire to
            x = int(rng.integers(n))
            while x == v or x in adjacency[v]:
                x = int(rng.integers(n))
            adjacency[v].discard(w)
            adjacency[w].discard(v)
            adjacency[v].add(x)
            adjacency[x].add(v)
    edges = [(v, w) for v in range(n) for w in adjacency[v] if v < w]
    return Graph.from_edges(edges, node_count=n)


_GENERATORS = {
    "uniform": _gen_uniform,
    "pref-attach": _gen_pref_attach,
    "small-world": _gen_small_world,
}


def generate_one(spec: SyntheticSpec, index: int) -> Graph:
    """Generate the index-th graph of the dataset described by ``spec``."""
    rng = np.random.default_rng([spec.seed, index])
    last_error = None
    for _ in range(_MAX_RETRIES):
        family = _pick_family(rng, spec.weights)
        n = _int_in(rng, spec.node_range)
        try:
            return _GENERATORS[family](rng, n, spec)
        except GenerationError as exc:
            last_error = exc
    raise GenerationError(
        f"graph {index}: no feasible parameters after {_MAX_RETRIES} attempts "
        f"(last: {last_error})"
    )


def generate_synthetic(spec: SyntheticSpec) -> list:
    """Generate ``spec.count`` canonical graphs, deterministic under the seed."""
    return [generate_one(spec, i) for i in range(spec.count)]
