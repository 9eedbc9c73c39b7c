"""Haar sampling, geodesic distances and random geometric graphs.

Groups carry the bi-invariant metric given by the opposite Killing form;
for a matrix g with eigen-angles theta_j (taken over the defining
representation) the distance to the identity is sqrt(c * sum theta_j^2).
Spheres carry the round metric (distance arccos <x, y>).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigurationError
from .rootdata import build_root_system, volumes
from .util import as_rng

__all__ = [
    "SpaceSpec",
    "parse_space",
    "GeometricGraph",
    "haar_sample",
    "geodesic_distance",
    "pairwise_distances",
    "build_geometric_graph",
    "poisson_level",
    "su2_to_quaternion",
    "sample_unit_vectors",
    "unit_vector_pairs",
    "sparse_geometric_edges",
    "export_graph",
]

_MAX_REDRAW = 100


@dataclass(frozen=True)
class SpaceSpec:
    kind: str  # "su", "so", "usp", "sphere"
    n: int

    def __post_init__(self):
        low = {"su": 2, "so": 3, "usp": 1, "sphere": 1}
        if self.kind not in low:
            raise ConfigurationError(f"unknown space kind {self.kind!r}")
        if int(self.n) != self.n or self.n < low[self.kind]:
            raise ConfigurationError(f"{self.kind}({self.n}) unsupported; need n >= {low[self.kind]}")

    @property
    def name(self) -> str:
        return {"su": "SU", "so": "SO", "usp": "USp", "sphere": "S"}[self.kind] + f"({self.n})"

    @property
    def is_group(self) -> bool:
        return self.kind != "sphere"

    @property
    def dim(self) -> int:
        n = self.n
        return {"su": n * n - 1, "so": n * (n - 1) // 2, "usp": n * (2 * n + 1), "sphere": n}[self.kind]

    @property
    def matrix_size(self) -> int:
        return 2 * self.n if self.kind == "usp" else self.n

    @property
    def killing_constant(self) -> float:
        """c in d(e, g)^2 = c * sum over all eigen-angles of g."""
        n = self.n
        return {"su": 2.0 * n, "so": n - 2.0, "usp": 2.0 * n + 2.0}[self.kind]

    def root_system(self):
        """Root data of the simply connected cover (None for spheres)."""
        n = self.n
        if self.kind == "su":
            return build_root_system("A", n - 1)
        if self.kind == "usp":
            return build_root_system("A", 1) if n == 1 else build_root_system("C", n)
        if self.kind == "so":
            if n in (3, 4):
                return build_root_system("A", 1)
            return build_root_system("B", (n - 1) // 2) if n % 2 else build_root_system("D", n // 2)
        return None

    @cached_property
    def vol(self) -> float:
        n = self.n
        if self.kind == "sphere":
            return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)
        base = volumes(self.root_system())["vol_G_kp"]
        if self.kind == "so":
            # Spin(3) = SU(2), Spin(4) = SU(2) x SU(2); SO(n) = Spin(n)/{+-1}
            cover = base**2 if n == 4 else base
            return cover / 2.0
        return base

    @property
    def diameter(self) -> float:
        """Exact for spheres and SU(2); an upper bound otherwise."""
        if self.kind == "sphere":
            return math.pi
        if self.kind == "su" and self.n == 2:
            return 2.0 * math.sqrt(2.0) * math.pi
        return math.sqrt(self.killing_constant * self.matrix_size) * math.pi


def parse_space(text: str) -> SpaceSpec:
    """'su2', 'so3', 'usp2', 'sphere2' / 's2'."""
    t = text.strip().lower().replace("(", "").replace(")", "").replace("_", "")
    for prefix, kind in (("sphere", "sphere"), ("usp", "usp"), ("sp", "usp"), ("su", "su"),
                         ("so", "so"), ("s", "sphere")):
        if t.startswith(prefix) and t[len(prefix):].isdigit():
            return SpaceSpec(kind, int(t[len(prefix):]))
    raise ConfigurationError(f"cannot parse space {text!r}; try su2, so3, usp2 or sphere2")


def _haar_unitary(rng, size, n) -> np.ndarray:
    z = (rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    if np.any(np.abs(d) < 1e-300):
        raise FloatingPointError("degenerate Gaussian draw")
    return q * (d / np.abs(d))[:, None, :]


def _haar_su(rng, size, n) -> np.ndarray:
    u = _haar_unitary(rng, size, n)
    phase = np.angle(np.linalg.det(u))
    return u * np.exp(-1j * phase / n)[:, None, None]


def _haar_so(rng, size, n) -> np.ndarray:
    z = rng.standard_normal((size, n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    if np.any(d == 0):
        raise FloatingPointError("degenerate Gaussian draw")
    q = q * np.sign(d)[:, None, :]
    neg = np.linalg.det(q) < 0
    q[neg, :, 0] *= -1
    return q


def _haar_usp(rng, size, n) -> np.ndarray:
    m = 2 * n
    J = np.zeros((m, m))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    first, second = [], []
    basis: list[np.ndarray] = []
    for _ in range(n):
        v = rng.standard_normal((size, m)) + 1j * rng.standard_normal((size, m))
        for u in basis:
            v = v - u * np.sum(u.conj() * v, axis=1, keepdims=True)
        nv = np.linalg.norm(v, axis=1, keepdims=True)
        if np.any(nv < 1e-12):
            raise FloatingPointError("degenerate Gaussian draw")
        v = v / nv
        w = v.conj() @ J.T
        basis += [v, w]
        first.append(v)
        second.append(w)
    return np.stack(first + second, axis=-1)


def haar_sample(space: SpaceSpec, rng=None, size: int | None = None) -> np.ndarray:
    """Haar (uniform) points: matrices for groups, unit vectors for spheres."""
    rng = as_rng(rng)
    count = 1 if size is None else int(size)
    sampler = {
        "su": lambda: _haar_su(rng, count, space.n),
        "so": lambda: _haar_so(rng, count, space.n),
        "usp": lambda: _haar_usp(rng, count, space.n),
        "sphere": lambda: sample_unit_vectors(rng, count, space.n + 1),
    }[space.kind]
    for _ in range(_MAX_REDRAW):
        try:
            out = sampler()
            break
        except FloatingPointError:
            continue
    else:
        raise RuntimeError(f"{_MAX_REDRAW} degenerate Gaussian draws in a row")
    return out[0] if size is None else out


def sample_unit_vectors(rng, size: int, m: int) -> np.ndarray:
    for _ in range(_MAX_REDRAW):
        v = rng.standard_normal((size, m))
        nv = np.linalg.norm(v, axis=-1, keepdims=True)
        if np.all(nv > 1e-300):
            return v / nv
    raise RuntimeError("degenerate Gaussian draws")


def su2_to_quaternion(u: np.ndarray) -> np.ndarray:
    """[[a, -conj b], [b, conj a]] -> (Re a, Im a, Re b, Im b); <q1, q2> = Re tr(U1 U2^*)/2."""
    a, b = u[..., 0, 0], u[..., 1, 0]
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


def _check_member(space: SpaceSpec, p: np.ndarray):
    if space.kind == "sphere":
        if p.shape[-1] != space.n + 1 or np.any(np.abs(np.linalg.norm(p, axis=-1) - 1) > 1e-8):
            raise ValueError(f"point is not on the unit sphere S^{space.n}")
        return
    m = space.matrix_size
    if p.shape[-2:] != (m, m):
        raise ValueError(f"expected {m}x{m} matrices for {space.name}")
    res = np.abs(p @ np.conj(np.swapaxes(p, -1, -2)) - np.eye(m)).max()
    if res > 1e-8:
        raise ValueError(f"input is not unitary/orthogonal (residual {res:.2e})")


def _angles_to_distance(space: SpaceSpec, theta: np.ndarray) -> np.ndarray:
    if space.kind == "su":
        # principal angles may sum to 2 pi m; move the extreme ones across the cut
        shift = np.rint(theta.sum(axis=-1) / (2 * math.pi)).astype(int)
        theta = np.sort(theta, axis=-1)
        m = theta.shape[-1]
        for idx in np.nonzero(shift)[0]:
            s = int(shift[idx])
            if s > 0:
                theta[idx, m - s:] -= 2 * math.pi
            else:
                theta[idx, :(-s)] += 2 * math.pi
    return np.sqrt(space.killing_constant * np.sum(theta * theta, axis=-1))


def _group_distance_batch(space: SpaceSpec, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    prod = p @ np.conj(np.swapaxes(q, -1, -2))
    theta = np.angle(np.linalg.eigvals(prod)).reshape(-1, space.matrix_size)
    return _angles_to_distance(space, theta)


def geodesic_distance(space: SpaceSpec, p, q) -> float:
    p, q = np.asarray(p), np.asarray(q)
    _check_member(space, p)
    _check_member(space, q)
    if space.kind == "sphere":
        return float(np.arccos(np.clip(p @ q, -1.0, 1.0)))
    return float(_group_distance_batch(space, p[None], q[None])[0])


def _chord_angles(v: np.ndarray) -> np.ndarray:
    # 2 arcsin(|x - y| / 2) stays accurate for nearby points, unlike arccos <x, y>
    chord = cdist(v, v)
    return 2.0 * np.arcsin(np.minimum(0.5 * chord, 1.0))


def pairwise_distances(space: SpaceSpec, points, method: str = "auto", chunk: int = 20000) -> np.ndarray:
    """Full N x N distance matrix; SU(2) uses the quaternion Gram matrix unless method='eigen'."""
    pts = np.asarray(points)
    n_pts = pts.shape[0]
    if space.kind == "sphere":
        return _chord_angles(pts)
    if space.kind == "su" and space.n == 2 and method == "auto":
        return 2.0 * math.sqrt(2.0) * _chord_angles(su2_to_quaternion(pts))
    out = np.zeros((n_pts, n_pts))
    iu, ju = np.triu_indices(n_pts, 1)
    for start in range(0, len(iu), chunk):
        i, j = iu[start:start + chunk], ju[start:start + chunk]
        d = _group_distance_batch(space, pts[i], pts[j])
        out[i, j] = d
        out[j, i] = d
    return out


@dataclass
class GeometricGraph:
    space: SpaceSpec
    points: np.ndarray
    L: float
    adjacency: np.ndarray

    @property
    def N(self) -> int:
        return self.adjacency.shape[0]

    def edges(self) -> np.ndarray:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return np.stack([i, j], axis=1)


def build_geometric_graph(space: SpaceSpec, N: int, L: float, rng=None) -> GeometricGraph:
    if N < 1:
        raise ValueError("N must be at least 1")
    if L <= 0:
        raise ValueError("L must be positive")
    pts = haar_sample(space, rng, N)
    adj = pairwise_distances(space, pts) <= L
    np.fill_diagonal(adj, False)
    return GeometricGraph(space, pts, float(L), adj)


def poisson_level(space: SpaceSpec, N: int, ell: float) -> float:
    """L_N = (ell / N)^{1/dim}."""
    return (ell / N) ** (1.0 / space.dim)


def _all_pairs_by_group(v: np.ndarray, cos_threshold: float, group: np.ndarray):
    order = np.argsort(group, kind="stable")
    bounds = np.flatnonzero(np.diff(group[order])) + 1
    out_i, out_j = [], []
    for block in np.split(order, bounds):
        i, j = np.triu_indices(len(block), 1)
        keep = np.einsum("ij,ij->i", v[block[i]], v[block[j]]) >= cos_threshold
        out_i.append(block[i[keep]])
        out_j.append(block[j[keep]])
    i, j = np.concatenate(out_i), np.concatenate(out_j)
    return np.minimum(i, j), np.maximum(i, j)


def unit_vector_pairs(vectors: np.ndarray, cos_threshold: float, group: np.ndarray | None = None):
    """All pairs i < j (same group) with <v_i, v_j> >= cos_threshold.

    Cell list on the first two (or, when two-dimensional cells get crowded,
    three) coordinates with cell width equal to the chord length, so
    candidate partners lie in adjacent cells.
    """
    v = np.asarray(vectors, float)
    n, m = v.shape
    if n < 2:
        return np.zeros(0, np.intp), np.zeros(0, np.intp)
    group = np.zeros(n, np.int64) if group is None else np.asarray(group, np.int64)
    chord = math.sqrt(max(2.0 - 2.0 * cos_threshold, 0.0))
    if chord >= 0.5:
        return _all_pairs_by_group(v, cos_threshold, group)
    width = max(chord, 1e-9)
    side = int(math.ceil(2.0 / width)) + 3
    n_groups = int(group.max()) + 1
    per_group = n / n_groups
    dims = 3 if (m >= 4 and per_group * chord * chord > 4.0 and n_groups * side**3 < 50_000_000) else 2
    cell = np.floor((v[:, :dims] + 1.0) / width).astype(np.int64) + 1
    key = group.copy()
    for c in range(dims):
        key = key * side + cell[:, c]
    order = np.argsort(key, kind="stable")
    skey = key[order]
    # keys are bounded integers: a prefix-sum table replaces binary search
    reach = sum(side**c for c in range(dims))
    counts = np.bincount(skey, minlength=int(skey[-1]) + reach + 2)
    start = np.concatenate([[0], np.cumsum(counts)])
    rank = np.arange(n)
    # self cell plus the lexicographically positive half of the neighbour cells
    offsets = [off for off in itertools.product((-1, 0, 1), repeat=dims) if off >= (0,) * dims]
    out_i, out_j = [], []
    for off in offsets:
        delta = 0
        for o in off:
            delta = delta * side + o
        target = skey + delta
        lo = start[target]
        hi = start[target + 1]
        if delta == 0:
            lo = rank + 1
        cnt = np.maximum(hi - lo, 0)
        total = int(cnt.sum())
        if total == 0:
            continue
        cum = np.cumsum(cnt)
        a = np.repeat(rank, cnt)
        b = np.arange(total) + np.repeat(lo - (cum - cnt), cnt)
        ia, ib = order[a], order[b]
        keep = np.einsum("ij,ij->i", v[ia], v[ib]) >= cos_threshold
        out_i.append(ia[keep])
        out_j.append(ib[keep])
    if not out_i:
        return np.zeros(0, np.intp), np.zeros(0, np.intp)
    i = np.concatenate(out_i)
    j = np.concatenate(out_j)
    return np.minimum(i, j), np.maximum(i, j)


def sparse_geometric_edges(space: SpaceSpec, points: np.ndarray, L: float):
    """Edge list (i < j) of the geometric graph; sublinear search on SU(2) and spheres."""
    if space.kind == "sphere":
        return unit_vector_pairs(points, math.cos(min(L, math.pi)))
    if space.kind == "su" and space.n == 2:
        half = L / (2.0 * math.sqrt(2.0))
        return unit_vector_pairs(su2_to_quaternion(points), math.cos(min(half, math.pi)))
    d = pairwise_distances(space, points)
    i, j = np.nonzero(np.triu(d <= L, 1))
    return i, j


def export_graph(graph: GeometricGraph, path: str, seed: int | None = None) -> None:
    """Edge list 'i j' per line, preceded by a one-line JSON header."""
    header = {"space": graph.space.name, "N": graph.N, "L": graph.L, "seed": seed}
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for i, j in graph.edges():
            fh.write(f"{i} {j}\n")
