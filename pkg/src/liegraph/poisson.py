"""Rooted Poisson Boolean model, rooted neighbourhoods and local-limit comparisons."""

from __future__ import annotations

import hashlib
import math
from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import poisson as poisson_law

from .geometry import (
    SpaceSpec,
    haar_sample,
    poisson_level,
    sample_unit_vectors,
    sparse_geometric_edges,
    unit_vector_pairs,
)
from .util import as_rng

__all__ = [
    "ball_volume",
    "BooleanModelSample",
    "sample_boolean_model",
    "boolean_edges",
    "RootedNeighborhood",
    "adjacency_lists",
    "rooted_neighborhood",
    "canonical_form",
    "tv_distance",
    "GraphBatch",
    "simulate_sparse_graphs",
    "root_neighborhood_samples",
    "bs_compare",
    "degree_tv_poisson",
    "joint_neighborhood_tv",
    "PatternGraph",
    "count_embeddings",
    "embedding_count_estimate",
    "MAX_NEIGHBORHOOD",
]

MAX_NEIGHBORHOOD = 64


def ball_volume(d: int, r: float = 1.0) -> float:
    """Volume c(d) r^d of the Euclidean ball, c(d) = pi^{d/2} / Gamma(1 + d/2)."""
    if d < 1 or r < 0:
        raise ValueError("need d >= 1 and r >= 0")
    return math.pi ** (d / 2) / math.gamma(1 + d / 2) * r**d


@dataclass(frozen=True)
class BooleanModelSample:
    d: int
    intensity: float
    R: float
    points: np.ndarray  # row 0 is the root at the origin


def sample_boolean_model(d: int, intensity: float, R: float, rng=None) -> BooleanModelSample:
    """Poisson points of the given intensity in the ball of radius R, plus the root at 0 (index 0)."""
    rng = as_rng(rng)
    count = rng.poisson(intensity * ball_volume(d, R)) if intensity > 0 else 0
    if count:
        direction = sample_unit_vectors(rng, count, d)
        radius = R * rng.random(count) ** (1.0 / d)
        pts = direction * radius[:, None]
    else:
        pts = np.zeros((0, d))
    return BooleanModelSample(d, float(intensity), float(R), np.vstack([np.zeros((1, d)), pts]))


def boolean_edges(sample: BooleanModelSample) -> tuple[np.ndarray, np.ndarray]:
    """Pairs i < j at Euclidean distance at most 1."""
    if len(sample.points) < 2:
        return np.zeros(0, np.intp), np.zeros(0, np.intp)
    pairs = cKDTree(sample.points).query_pairs(1.0, output_type="ndarray")
    if len(pairs) == 0:
        return np.zeros(0, np.intp), np.zeros(0, np.intp)
    return pairs[:, 0], pairs[:, 1]


def adjacency_lists(n: int, i: Iterable[int], j: Iterable[int]) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in zip(i, j):
        a, b = int(a), int(b)
        adj[a].append(b)
        adj[b].append(a)
    return adj


# canonical labelling: colour refinement plus individualization, smallest certificate wins

def _refine(adj: list[list[int]], colors: list[int]) -> list[int]:
    n = len(adj)
    while True:
        sig = [(colors[v], tuple(sorted(colors[u] for u in adj[v]))) for v in range(n)]
        ranks = {s: r for r, s in enumerate(sorted(set(sig)))}
        new = [ranks[s] for s in sig]
        if len(set(new)) == len(set(colors)):
            return new
        colors = new


def _certificate(adj: list[list[int]], colors: list[int]) -> tuple:
    label = colors
    edges = sorted(tuple(sorted((label[a], label[b]))) for a in range(len(adj)) for b in adj[a] if a < b)
    return tuple(edges)


def _search(adj: list[list[int]], colors: list[int]) -> tuple:
    n = len(adj)
    if len(set(colors)) == n:
        return _certificate(adj, colors)
    counts = Counter(colors)
    target = min(c for c, k in counts.items() if k > 1)
    best = None
    seen_orbits: set[tuple] = set()
    for v in range(n):
        if colors[v] != target:
            continue
        # vertices with identical neighbourhoods are interchangeable
        twin_key = tuple(sorted(adj[v]))
        if twin_key in seen_orbits:
            continue
        seen_orbits.add(twin_key)
        indiv = [2 * c + (0 if (c != target or u == v) else 1) for u, c in enumerate(colors)]
        cert = _search(adj, _refine(adj, indiv))
        if best is None or cert < best:
            best = cert
    return best


def canonical_form(adj: list[list[int]], root: int) -> tuple:
    """Isomorphism-invariant certificate of a rooted graph (root receives label 0)."""
    n = len(adj)
    if n > MAX_NEIGHBORHOOD:
        raise ValueError(f"rooted graph has {n} vertices; limit is {MAX_NEIGHBORHOOD}")
    dist = _bfs(adj, root)
    # vertices the root cannot reach share one colour after every reachable shell
    colors = _refine(adj, [dist.get(v, n) for v in range(n)])
    return (n, _search(adj, colors))


def _bfs(adj: list[list[int]], root: int, limit: int | None = None) -> dict[int, int]:
    dist = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        if limit is not None and dist[v] >= limit:
            continue
        for u in adj[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


@dataclass(frozen=True)
class RootedNeighborhood:
    canonical: tuple
    radius: int

    @property
    def num_vertices(self) -> int:
        return self.canonical[0]

    @property
    def edges(self) -> tuple:
        return self.canonical[1]

    @property
    def root_degree(self) -> int:
        return sum(1 for a, b in self.edges if a == 0 or b == 0)

    def key(self) -> str:
        return hashlib.sha1(repr(self.canonical).encode()).hexdigest()[:12]


def rooted_neighborhood(graph, root: int, n: int) -> RootedNeighborhood:
    """pi_n: the subgraph induced on vertices within graph distance n of the root, canonically labelled.

    ``graph`` is a list of adjacency lists or a dense boolean matrix.
    """
    if n < 0:
        raise ValueError("radius must be non-negative")
    if isinstance(graph, np.ndarray):
        graph = [list(np.nonzero(row)[0]) for row in graph]
    dist = _bfs(graph, root, n)
    verts = sorted(dist, key=lambda v: (dist[v], v))
    if len(verts) > MAX_NEIGHBORHOOD:
        raise ValueError(f"neighbourhood has {len(verts)} vertices; limit is {MAX_NEIGHBORHOOD}")
    index = {v: k for k, v in enumerate(verts)}
    sub = [[index[u] for u in graph[v] if u in index] for v in verts]
    return RootedNeighborhood(canonical_form(sub, 0), n)


def tv_distance(p: dict, q: dict) -> float:
    """Total variation between two distributions given as counts or probabilities (union support)."""
    sp, sq = float(sum(p.values())), float(sum(q.values()))
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0) / sp - q.get(k, 0) / sq) for k in keys)


@dataclass
class GraphBatch:
    """Many independent geometric graphs on N vertices, edges in local indices."""

    N: int
    count: int
    group: np.ndarray
    i: np.ndarray
    j: np.ndarray
    L: float

    def adjacency(self, g: int) -> list[list[int]]:
        sel = self.group == g
        return adjacency_lists(self.N, self.i[sel], self.j[sel])

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.count * self.N, np.int64)
        np.add.at(deg, self.group * self.N + self.i, 1)
        np.add.at(deg, self.group * self.N + self.j, 1)
        return deg.reshape(self.count, self.N)


def simulate_sparse_graphs(space: SpaceSpec, N: int, L: float, count: int, rng=None,
                           chunk_points: int = 1_000_000) -> GraphBatch:
    """``count`` independent Gamma_geom(N, L) graphs, sampled in chunks."""
    rng = as_rng(rng)
    per = max(1, chunk_points // N)
    gs, is_, js = [], [], []
    unit = space.kind == "sphere" or (space.kind == "su" and space.n == 2)
    done = 0
    while done < count:
        b = min(per, count - done)
        if unit:
            m = space.n + 1 if space.kind == "sphere" else 4
            v = sample_unit_vectors(rng, b * N, m)
            thr = math.cos(min(L if space.kind == "sphere" else L / (2 * math.sqrt(2)), math.pi))
            grp = np.repeat(np.arange(b), N)
            a, c = unit_vector_pairs(v, thr, grp)
            gs.append(grp[a] + done)
            is_.append(a % N)
            js.append(c % N)
        else:
            for g in range(b):
                pts = haar_sample(space, rng, N)
                a, c = sparse_geometric_edges(space, pts, L)
                gs.append(np.full(len(a), done + g))
                is_.append(a)
                js.append(c)
        done += b
    cat = lambda xs: np.concatenate(xs).astype(np.int64) if xs else np.zeros(0, np.int64)  # noqa: E731
    return GraphBatch(N, count, cat(gs), cat(is_), cat(js), float(L))


class _SparseAdjacency(dict):
    """Adjacency lists stored only for some vertices; the others read as empty."""

    def __missing__(self, key):
        return ()


def _local_adjacency(i: np.ndarray, j: np.ndarray, root: int, n: int) -> _SparseAdjacency:
    """Adjacency of the subgraph induced on the ball of radius n around the root."""
    ball = np.array([root])
    frontier = ball
    for _ in range(n):
        hit_i = np.isin(i, frontier)
        hit_j = np.isin(j, frontier)
        reached = np.union1d(j[hit_i], i[hit_j])
        frontier = np.setdiff1d(reached, ball)
        if frontier.size == 0:
            break
        ball = np.union1d(ball, frontier)
    keep = np.isin(i, ball) & np.isin(j, ball)
    adj = _SparseAdjacency()
    for a, b in zip(i[keep].tolist(), j[keep].tolist()):
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    return adj


def root_neighborhood_samples(batch: GraphBatch, n: int, rng=None, roots_per_graph: int = 1) -> list[list]:
    """For each graph, pi_n at ``roots_per_graph`` distinct uniformly chosen roots."""
    rng = as_rng(rng)
    order = np.argsort(batch.group, kind="stable")
    g_sorted = batch.group[order]
    bounds = np.searchsorted(g_sorted, np.arange(batch.count + 1))
    out = []
    for g in range(batch.count):
        sel = order[bounds[g]:bounds[g + 1]]
        gi, gj = batch.i[sel], batch.j[sel]
        roots = rng.choice(batch.N, size=roots_per_graph, replace=False)
        out.append([rooted_neighborhood(_local_adjacency(gi, gj, int(r), n), int(r), n) for r in roots])
    return out


def _boolean_neighborhoods(d: int, intensity: float, n: int, trials: int, rng) -> list[RootedNeighborhood]:
    out = []
    for _ in range(trials):
        smp = sample_boolean_model(d, intensity, n + 2, rng)
        a, b = boolean_edges(smp)
        adj = adjacency_lists(len(smp.points), a, b)
        out.append(rooted_neighborhood(adj, 0, n))
    return out


def bs_compare(space: SpaceSpec, N: int, ell: float, n: int, trials: int, rng=None) -> dict:
    """TV distance between pi_n of Gamma_geom(N, L_N) at a random root and pi_n of the Boolean model."""
    rng = as_rng(rng)
    L = poisson_level(space, N, ell)
    batch = simulate_sparse_graphs(space, N, L, trials, rng)
    geo = Counter(s[0].key() for s in root_neighborhood_samples(batch, n, rng))
    intensity = ell / space.vol
    boo = Counter(s.key() for s in _boolean_neighborhoods(space.dim, intensity, n, trials, rng))
    return {"tv_distance": tv_distance(geo, boo), "geometric": dict(geo), "boolean": dict(boo),
            "L": L, "intensity": intensity}


def degree_tv_poisson(degrees: Sequence[int], mean: float) -> float:
    """TV between the empirical law of ``degrees`` and Poisson(mean); unseen mass counted fully."""
    degrees = np.asarray(degrees, int)
    counts = np.bincount(degrees)
    emp = counts / counts.sum()
    ks = np.arange(len(emp))
    pmf = poisson_law.pmf(ks, mean)
    return 0.5 * (float(np.sum(np.abs(emp - pmf))) + float(poisson_law.sf(len(emp) - 1, mean)))


def joint_neighborhood_tv(pairs: Sequence[tuple[str, str]]) -> float:
    """TV between the empirical joint law of two rooted neighbourhoods and the product of its marginals."""
    joint = Counter(pairs)
    total = float(len(pairs))
    left = Counter(a for a, _ in pairs)
    right = Counter(b for _, b in pairs)
    tv = 0.0
    for a, pa in left.items():
        for b, pb in right.items():
            tv += abs(joint.get((a, b), 0) / total - pa * pb / total**2)
    return 0.5 * tv


@dataclass(frozen=True)
class PatternGraph:
    """A connected finite graph H with a marked root vertex."""

    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    root: int = 0

    def adjacency(self) -> list[list[int]]:
        return adjacency_lists(self.num_vertices, [a for a, _ in self.edges], [b for _, b in self.edges])

    def eccentricity(self) -> int:
        dist = _bfs(self.adjacency(), self.root)
        if len(dist) != self.num_vertices:
            raise ValueError("pattern graph must be connected")
        return max(dist.values())


def count_embeddings(pattern: PatternGraph, host: list[list[int]], host_root: int) -> int:
    """Injective graph morphisms H -> host sending the pattern root to ``host_root``."""
    hadj = pattern.adjacency()
    order = list(_bfs(hadj, pattern.root).keys())  # BFS order: every later vertex has an earlier neighbour
    pos = {v: k for k, v in enumerate(order)}
    back = [[u for u in hadj[v] if pos[u] < pos[v]] for v in order]
    host_sets = [set(x) for x in host]
    image = [-1] * len(order)
    used: set[int] = set()

    def rec(k: int) -> int:
        if k == len(order):
            return 1
        prev = back[k]
        anchor = image[pos[prev[0]]]
        total = 0
        for cand in host[anchor]:
            if cand in used:
                continue
            if all(cand in host_sets[image[pos[u]]] for u in prev[1:]):
                image[k] = cand
                used.add(cand)
                total += rec(k + 1)
                used.discard(cand)
        return total

    image[0] = host_root
    used.add(host_root)
    return rec(1)


def embedding_count_estimate(pattern: PatternGraph, d: int, intensity: float, trials: int,
                             rng=None, return_stderr: bool = False):
    """Monte Carlo mean number of root-anchored embeddings of the pattern into the Boolean model.

    The window radius equals the pattern eccentricity, which already contains
    every possible image, so there is no truncation error.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = as_rng(rng)
    if pattern.num_vertices == 1:
        return (1.0, 0.0) if return_stderr else 1.0
    R = max(1, pattern.eccentricity())
    counts = np.empty(trials)
    for t in range(trials):
        smp = sample_boolean_model(d, intensity, R, rng)
        a, b = boolean_edges(smp)
        host = adjacency_lists(len(smp.points), a, b)
        counts[t] = count_embeddings(pattern, host, 0)
    mean = float(counts.mean())
    if return_stderr:
        return mean, float(counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return mean
