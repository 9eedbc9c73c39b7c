"""Circuits of tr(A^s), their reduction, and the moment expansion tables.

A circuit of length s is the set partition of the cycle positions Z/sZ
induced by equal indices i_1, ..., i_s in the trace sum; no two cyclically
adjacent positions may share a block since the adjacency matrix has a zero
diagonal. The reduced circuit is an undirected labeled multigraph obtained
by forgetting orientations and multiplicities, cutting at cut vertices and
suppressing degree-2 vertices; its components are labeled loops or loopless
graphs with minimal degree 3.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError
from .poisson import PatternGraph
from .rankone import sin_power_integral
from .util import as_rng

__all__ = [
    "Circuit",
    "Component",
    "ReducedCircuit",
    "MAX_CIRCUIT_LENGTH",
    "MAX_TABLE_LENGTH",
    "TERM_ORDER",
    "enumerate_circuits",
    "circuit_from_identities",
    "reduce_circuit",
    "reduce_graph",
    "k_parameter",
    "expansion_table",
    "expansion_table_json",
    "component_pattern",
    "estimate_E_R",
]

MAX_CIRCUIT_LENGTH = 12
MAX_TABLE_LENGTH = 8


@dataclass(frozen=True)
class Circuit:
    """Index pattern of one term of tr(A^s): traversal[i] is the vertex visited at position i."""

    traversal: tuple[int, ...]

    def __post_init__(self):
        t = self.traversal
        if len(t) < 2:
            raise ValueError("a circuit has length at least 2")
        if any(t[i] == t[(i + 1) % len(t)] for i in range(len(t))):
            raise ValueError("consecutive positions of a circuit must carry distinct vertices")

    @property
    def s(self) -> int:
        return len(self.traversal)

    @property
    def k(self) -> int:
        return len(set(self.traversal))

    @property
    def partition(self) -> tuple[tuple[int, ...], ...]:
        blocks: dict[int, list[int]] = {}
        for pos, v in enumerate(self.traversal):
            blocks.setdefault(v, []).append(pos)
        return tuple(tuple(b) for _, b in sorted(blocks.items()))

    def directed_edges(self) -> list[tuple[int, int]]:
        t = self.traversal
        return [(t[i], t[(i + 1) % len(t)]) for i in range(len(t))]


def enumerate_circuits(s: int) -> list[Circuit]:
    """All circuits of length s, as restricted growth strings in lexicographic order."""
    if s < 2:
        raise ValueError("circuit length must be at least 2")
    if s > MAX_CIRCUIT_LENGTH:
        raise ConfigurationError(f"circuit length {s} exceeds the enumeration guard {MAX_CIRCUIT_LENGTH}")
    out: list[Circuit] = []
    word = [0] * s

    def rec(i: int, top: int):
        if i == s:
            if word[-1] != word[0]:
                out.append(Circuit(tuple(word)))
            return
        for v in range(top + 2):
            if v != word[i - 1]:
                word[i] = v
                rec(i + 1, max(top, v))

    rec(1, 0)
    return out


def circuit_from_identities(s: int, identities) -> Circuit:
    """Circuit of length s where each group of 1-based positions shares one index."""
    parent = list(range(s))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for group in identities:
        group = [p - 1 for p in group]
        for p in group[1:]:
            parent[find(p)] = find(group[0])
    labels: dict[int, int] = {}
    word = tuple(labels.setdefault(find(i), len(labels)) for i in range(s))
    return Circuit(word)


# ---------------------------------------------------------------- components

@dataclass(frozen=True, order=True)
class Component:
    """Connected labeled multigraph in canonical form; edges are (a, b, label) with a <= b."""

    num_vertices: int
    edges: tuple[tuple[int, int, int], ...]

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(sorted((e[2] for e in self.edges), reverse=True))

    @property
    def is_loop(self) -> bool:
        return self.num_vertices == 1 and len(self.edges) == 1

    @property
    def excess(self) -> int:
        return sum(l - 1 for l in self.labels)

    @property
    def descriptor(self) -> str:
        if self.is_loop:
            return f"loop{self.edges[0][2]}"
        if self.num_vertices == 2 and all(a != b for a, b, _ in self.edges):
            return "theta(" + ",".join(map(str, self.labels)) + ")"
        body = ",".join(f"{a}-{b}:{l}" for a, b, l in self.edges)
        return f"graph{self.num_vertices}[{body}]"

    def sort_key(self):
        return (-self.num_vertices, -sum(self.labels), tuple(-l for l in self.labels), self.edges)


def _canonical_component(num_vertices: int, edges) -> Component:
    """Lexicographically smallest edge list over all vertex relabelings."""
    best = None
    for perm in itertools.permutations(range(num_vertices)):
        relabeled = tuple(sorted((min(perm[a], perm[b]), max(perm[a], perm[b]), l) for a, b, l in edges))
        if best is None or relabeled < best:
            best = relabeled
    return Component(num_vertices, best)


@dataclass(frozen=True)
class ReducedCircuit:
    components: tuple[Component, ...]

    @classmethod
    def from_components(cls, comps) -> "ReducedCircuit":
        canon = [_canonical_component(c.num_vertices, c.edges) for c in comps]
        return cls(tuple(sorted(canon, key=Component.sort_key)))

    @property
    def num_vertices(self) -> int:
        return sum(c.num_vertices for c in self.components)

    @property
    def num_components(self) -> int:
        return len(self.components)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(l for c in self.components for l in c.labels)

    @property
    def descriptor(self) -> str:
        return " + ".join(c.descriptor for c in self.components)

    def to_dict(self) -> dict:
        return {
            "descriptor": self.descriptor,
            "components": [
                {"descriptor": c.descriptor, "vertices": c.num_vertices,
                 "edges": [list(e) for e in c.edges]}
                for c in self.components
            ],
        }


def k_parameter(r: ReducedCircuit) -> int:
    """Number of distinct indices: k - 1 = k' - c + sum_e (l_e - 1)."""
    return 1 + r.num_vertices - r.num_components + sum(c.excess for c in r.components)


# ---------------------------------------------------------------- reduction

def _blocks(n: int, adj: list[set[int]]) -> list[list[tuple[int, int]]]:
    """Biconnected components (as edge lists) by the low-link depth-first search."""
    disc = [-1] * n
    low = [0] * n
    stack: list[tuple[int, int]] = []
    out: list[list[tuple[int, int]]] = []
    counter = 0
    for start in range(n):
        if disc[start] != -1:
            continue
        disc[start] = low[start] = counter
        counter += 1
        frames = [(start, -1, iter(sorted(adj[start])))]
        while frames:
            v, parent, it = frames[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    stack.append((v, w))
                    disc[w] = low[w] = counter
                    counter += 1
                    frames.append((w, v, iter(sorted(adj[w]))))
                    advanced = True
                    break
                if w != parent and disc[w] < disc[v]:
                    stack.append((v, w))
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            frames.pop()
            if parent != -1:
                low[parent] = min(low[parent], low[v])
                if low[v] >= disc[parent]:
                    block = []
                    while True:
                        e = stack.pop()
                        block.append(e)
                        if e == (parent, v):
                            break
                    out.append(block)
    return out


def _suppress_degree_two(edges: list[list[int]]) -> tuple[int, list[tuple[int, int, int]]]:
    """Merge the two edges at each degree-2 vertex until none is left (or a single loop remains)."""
    edges = [list(e) for e in edges]
    while True:
        deg: Counter = Counter()
        for a, b, _ in edges:
            deg[a] += 1
            deg[b] += 1
        verts = sorted(deg)
        target = next((v for v in verts if deg[v] == 2 and len(verts) > 1), None)
        if target is None:
            break
        inc = [e for e in edges if target in (e[0], e[1])]
        if len(inc) != 2:  # a loop at a vertex of degree 2 with other vertices present cannot occur in a block
            raise RuntimeError("unexpected loop during degree-2 suppression")
        (a1, b1, l1), (a2, b2, l2) = inc
        u = b1 if a1 == target else a1
        w = b2 if a2 == target else a2
        edges = [e for e in edges if e is not inc[0] and e is not inc[1]]
        edges.append([min(u, w), max(u, w), l1 + l2])
    verts = sorted({v for a, b, _ in edges for v in (a, b)})
    relabel = {v: i for i, v in enumerate(verts)}
    return len(verts), [(relabel[a], relabel[b], l) for a, b, l in edges]


def reduce_graph(num_vertices: int, undirected_edges) -> ReducedCircuit:
    """Reduction of a connected simple graph given by its undirected edges."""
    adj = [set() for _ in range(num_vertices)]
    for a, b in undirected_edges:
        if a == b:
            raise ValueError("simple graph expected (no loops)")
        adj[a].add(b)
        adj[b].add(a)
    comps = []
    for block in _blocks(num_vertices, adj):
        if len(block) == 1:
            comps.append(Component(1, ((0, 0, 2),)))
            continue
        nv, edges = _suppress_degree_two([[min(a, b), max(a, b), 1] for a, b in block])
        comps.append(Component(nv, tuple(edges)))
    return ReducedCircuit.from_components(comps)


def reduce_circuit(c: Circuit) -> ReducedCircuit:
    undirected = {(min(a, b), max(a, b)) for a, b in c.directed_edges()}
    return reduce_graph(c.k, sorted(undirected))


# ---------------------------------------------------------------- tables

# Term order of the expansion tables: decreasing k, with ties in a fixed
# conventional order.
TERM_ORDER: dict[int, tuple[str, ...]] = {
    4: ("loop4", "loop2 + loop2", "loop2"),
    5: ("loop5", "loop3 + loop2", "loop3"),
    6: ("loop6", "loop4 + loop2", "loop3 + loop3", "loop4", "loop2 + loop2 + loop2",
        "theta(2,2,1)", "loop2 + loop2", "loop3", "loop2"),
    7: ("loop7", "loop5 + loop2", "loop4 + loop3", "loop5", "loop3 + loop2 + loop2",
        "theta(3,2,1)", "theta(2,2,2,1)", "theta(2,2,1)", "loop3 + loop2", "loop3"),
}


@dataclass(frozen=True)
class TableRow:
    reduced: ReducedCircuit
    multiplicity: int
    k: int

    @property
    def descriptor(self) -> str:
        return self.reduced.descriptor


@lru_cache(maxsize=None)
def _table(s: int) -> tuple[TableRow, ...]:
    counts: Counter = Counter()
    reps: dict[str, ReducedCircuit] = {}
    for c in enumerate_circuits(s):
        r = reduce_circuit(c)
        counts[r.descriptor] += 1
        reps.setdefault(r.descriptor, r)
    rows = [TableRow(reps[d], counts[d], k_parameter(reps[d])) for d in counts]
    order = TERM_ORDER.get(s)
    if order is not None and set(order) == set(counts):
        rank = {d: i for i, d in enumerate(order)}
        rows.sort(key=lambda row: rank[row.descriptor])
    else:
        rows.sort(key=lambda row: (-row.k, [comp.sort_key() for comp in row.reduced.components]))
    return tuple(rows)


def expansion_table(s: int) -> list[TableRow]:
    """Reduced circuits of length s with the number of circuits reducing to each."""
    if not 2 <= s <= MAX_TABLE_LENGTH:
        raise ConfigurationError(f"expansion tables are provided for 2 <= s <= {MAX_TABLE_LENGTH}, got {s}")
    return list(_table(s))


def expansion_table_json(s: int) -> str:
    rows = [
        {**row.reduced.to_dict(), "multiplicity": row.multiplicity, "k": row.k,
         "labels": list(row.reduced.labels)}
        for row in expansion_table(s)
    ]
    return json.dumps({"s": s, "total_circuits": sum(r["multiplicity"] for r in rows), "terms": rows}, indent=2)


# ---------------------------------------------------------------- realization

def component_pattern(comp: Component) -> PatternGraph:
    """Simple graph whose root-anchored embedding integral equals the component's contribution.

    An edge labeled l becomes a path with l edges and a loop labeled l at a
    vertex becomes a cycle of length l through it (a pendant edge for l = 2).
    """
    n = comp.num_vertices
    edges: set[tuple[int, int]] = set()
    for a, b, l in comp.edges:
        if a == b:
            chain = [a] + list(range(n, n + l - 1)) + [a]
            n += l - 1
        else:
            chain = [a] + list(range(n, n + l - 1)) + [b]
            n += l - 1
        for u, v in zip(chain[:-1], chain[1:]):
            if u != v:
                edges.add((min(u, v), max(u, v)))
    return PatternGraph(n, tuple(sorted(edges)), 0)


def _sphere_model(space) -> tuple[int, float]:
    """(ambient dimension m, scale) such that the space is S^{m-1} with distance scale * angle."""
    if space.kind == "sphere":
        return space.n + 1, 1.0
    if space.kind == "su" and space.n == 2:
        return 4, 2.0 * math.sqrt(2.0)
    raise ConfigurationError("estimate_E_R supports spheres and SU(2) (a round 3-sphere)")


def _cap_sample(centers: np.ndarray, angle: float, rng) -> np.ndarray:
    """Uniform points in the spherical caps of the given angular radius around each center."""
    size, m = centers.shape
    theta = np.empty(size)
    todo = np.arange(size)
    while todo.size:
        t = angle * rng.random(todo.size) ** (1.0 / (m - 1))
        ratio = np.where(t > 0, np.sin(t) / np.where(t > 0, t, 1.0), 1.0)
        ok = rng.random(todo.size) <= ratio ** (m - 2)
        theta[todo[ok]] = t[ok]
        todo = todo[~ok]
    g = rng.standard_normal((size, m))
    g -= np.sum(g * centers, axis=1, keepdims=True) * centers
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.cos(theta)[:, None] * centers + np.sin(theta)[:, None] * g


def _component_probability(pattern: PatternGraph, m: int, angle: float, trials: int, rng) -> tuple[float, float]:
    """P(all pattern edges present) for iid uniform points, by sampling along a BFS tree."""
    adj = pattern.adjacency()
    order, parent = [pattern.root], {pattern.root: -1}
    for v in order:
        for w in adj[v]:
            if w not in parent:
                parent[w] = v
                order.append(w)
    if len(order) != pattern.num_vertices:
        raise ValueError("pattern must be connected")
    frac = sin_power_integral(m - 2, angle) / sin_power_integral(m - 2, math.pi)
    tree = {(min(v, parent[v]), max(v, parent[v])) for v in order[1:]}
    extra = [e for e in pattern.edges if e not in tree]
    pts = np.empty((pattern.num_vertices, trials, m))
    g = rng.standard_normal((trials, m))
    pts[order[0]] = g / np.linalg.norm(g, axis=1, keepdims=True)
    for v in order[1:]:
        pts[v] = _cap_sample(pts[parent[v]], angle, rng)
    ok = np.ones(trials, bool)
    cos_thr = math.cos(angle)
    for a, b in extra:
        ok &= np.sum(pts[a] * pts[b], axis=1) >= cos_thr
    weight = frac ** len(tree)
    mean = ok.mean()
    return weight * mean, weight * math.sqrt(max(mean * (1 - mean), 0.0) / trials)


def estimate_E_R(space, r: ReducedCircuit, N: int, ell: float, trials: int, rng=None,
                 return_stderr: bool = False):
    """Monte Carlo estimate of E_{R,N} at the level L_N = (ell/N)^(1/dim).

    Each component is realized as a pattern graph; its vertices are drawn
    one at a time uniformly in the ball around a tree neighbour, so the
    estimate is (ball fraction)^(tree edges) times the frequency of the
    remaining edges. Components are independent and their estimates multiply.
    """
    if trials < 2:
        raise ValueError("at least two trials are needed")
    rng = as_rng(rng)
    m, scale = _sphere_model(space)
    L = (ell / N) ** (1.0 / space.dim)
    angle = L / scale
    if angle >= math.pi:
        raise ConfigurationError("level exceeds the diameter")
    value, rel_var = 1.0, 0.0
    for comp in r.components:
        p, se = _component_probability(component_pattern(comp), m, angle, trials, rng)
        value *= p
        rel_var += (se / p) ** 2 if p > 0 else float("inf")
    if return_stderr:
        return value, value * math.sqrt(rel_var)
    return value
