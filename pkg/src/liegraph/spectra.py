"""Dense symmetric eigenvalues, empirical spectral measures and the l2 spectral distance."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError

__all__ = [
    "SpectralMeasure",
    "eig_symmetric",
    "spectral_measure",
    "empirical_moments",
    "expand_lines",
    "gk_delta",
    "spectrum_csv",
    "histogram_json",
    "EIGHT_VERTEX_ADJACENCY",
]

# eight-vertex example graph (9 edges)
EIGHT_VERTEX_ADJACENCY = np.array(
    [
        [0, 1, 0, 0, 0, 0, 0, 0],
        [1, 0, 1, 0, 1, 1, 0, 0],
        [0, 1, 0, 1, 0, 0, 0, 0],
        [0, 0, 1, 0, 1, 0, 0, 0],
        [0, 1, 0, 1, 0, 1, 0, 0],
        [0, 1, 0, 0, 1, 0, 1, 0],
        [0, 0, 0, 0, 0, 1, 0, 1],
        [0, 0, 0, 0, 0, 0, 1, 0],
    ],
    dtype=float,
)


def _round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    size = m + (m % 2)
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        p, q = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a < m and b < m:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, np.intp), np.array(q, np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def eig_symmetric(matrix, tol: float = 1e-12, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, sorted descending.

    Each sweep visits all pairs in round-robin order; the rotations of one
    round act on disjoint index pairs and are applied together.
    """
    a = np.array(matrix, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    m = a.shape[0]
    if m == 0:
        return np.zeros(0)
    scale = np.linalg.norm(a)
    asym = np.abs(a - a.T).max()
    if asym > 1e-12 * max(scale, 1.0):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.2e})")
    a = 0.5 * (a + a.T)
    target = tol * scale
    rounds = _round_robin(m)

    mask = ~np.eye(m, dtype=bool)

    def off(x):
        return float(np.linalg.norm(x[mask]))

    for _ in range(max_sweeps + 1):
        if off(a) <= target:
            return np.sort(np.diag(a))[::-1].copy()
        for p, q in rounds:
            if p.size == 0:
                continue
            apq = a[p, q]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            th = np.where(big, 1.0, theta)
            t = np.where(th >= 0, 1.0, -1.0) / (np.abs(th) + np.sqrt(th * th + 1.0))
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp, rq = a[p, :], a[q, :]
            a[p, :] = c[:, None] * rp - s[:, None] * rq
            a[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = a[:, p], a[:, q]
            a[:, p] = cp * c - cq * s
            a[:, q] = cp * s + cq * c
    raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps (off-norm {off(a):.3e})")


@dataclass(frozen=True)
class SpectralMeasure:
    eigenvalues: np.ndarray  # descending
    N: int

    def scaled(self, factor: float) -> "SpectralMeasure":
        return SpectralMeasure(self.eigenvalues * factor, self.N)


def spectral_measure(matrix, solver=eig_symmetric) -> SpectralMeasure:
    ev = np.asarray(solver(matrix), float)
    return SpectralMeasure(np.sort(ev)[::-1], len(ev))


def empirical_moments(sm: SpectralMeasure, s_max: int) -> list[float]:
    """M_s = (1/N) sum_i c_i^s for s = 1..s_max."""
    if s_max < 1:
        raise ValueError("s_max must be at least 1")
    ev = np.asarray(sm.eigenvalues, float)
    return [float(np.sum(ev**s) / sm.N) for s in range(1, s_max + 1)]


def expand_lines(lines: Iterable) -> np.ndarray:
    """Limit lines (objects with .c and .multiplicity, or (c, mult) pairs) as a multiset."""
    vals = []
    for line in lines:
        c, mult = (line.c, line.multiplicity) if hasattr(line, "c") else line
        vals.append(np.full(int(mult), float(c)))
    return np.concatenate(vals) if vals else np.zeros(0)


def _aligned_sq(x: np.ndarray, y: np.ndarray) -> float:
    n = max(len(x), len(y))
    xx = np.zeros(n)
    yy = np.zeros(n)
    xx[: len(x)] = x
    yy[: len(y)] = y
    return float(np.sum((xx - yy) ** 2))


def gk_delta(empirical, limit) -> float:
    """l2 distance between spectra indexed by Z.

    Positive values are matched in decreasing order from the top, negative
    values in increasing order from the bottom, and zeros pad the middle.
    ``empirical`` is a SpectralMeasure (already scaled) or an array;
    ``limit`` is a sequence of spectral lines or an array of values.
    """
    e = np.asarray(empirical.eigenvalues if isinstance(empirical, SpectralMeasure) else empirical, float)
    if len(limit) and (hasattr(limit[0], "c") or isinstance(limit[0], tuple)):
        lim = expand_lines(limit)
    else:
        lim = np.asarray(limit, float)
    ep, lp = np.sort(e[e > 0])[::-1], np.sort(lim[lim > 0])[::-1]
    en, ln = np.sort(e[e < 0]), np.sort(lim[lim < 0])
    return float(np.sqrt(_aligned_sq(ep, lp) + _aligned_sq(en, ln)))


def spectrum_csv(sm: SpectralMeasure) -> str:
    return "".join(f"{v:.17g}\n" for v in sm.eigenvalues)


def histogram_json(sm: SpectralMeasure, edges: Sequence[float]) -> str:
    counts, _ = np.histogram(sm.eigenvalues, bins=np.asarray(edges, float))
    return json.dumps({"N": sm.N, "edges": [float(x) for x in edges], "counts": counts.tolist()})
