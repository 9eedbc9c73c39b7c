"""Limiting eigenvalues on rank-one symmetric spaces.

Spheres RS^n and the projective spaces RP^n, CP^n, HP^n, OP^2 with their
classical arccos distances. The zonal spherical functions are Legendre
polynomials P^{n,k}(x) in the coordinate x = cos d (spheres) and Jacobi
polynomials J^{(a,b),k}(s) in s = cos^2 d (projective spaces), both
normalized to 1 at the base point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import ConfigurationError, OutOfRangeError

__all__ = [
    "RankOneSpace",
    "rank_one_space",
    "legendre_p",
    "jacobi_j",
    "orthopoly_eval",
    "sin_power_integral",
    "rankone_eigenvalue",
    "rankone_eigenvalue_quadrature",
    "rankone_multiplicity",
    "rankone_table",
    "sample_spherical_coordinate",
]

_KINDS = ("sphere", "rp", "cp", "hp", "op2")
_BETA = {
    "rp": lambda n: (Fraction(1, 2), Fraction(n, 2)),
    "cp": lambda n: (Fraction(1), Fraction(n)),
    "hp": lambda n: (Fraction(2), Fraction(2 * n)),
    "op2": lambda n: (Fraction(4), Fraction(8)),
}


@dataclass(frozen=True)
class RankOneSpace:
    kind: str
    n: int

    @property
    def beta_params(self) -> tuple[Fraction, Fraction] | None:
        return None if self.kind == "sphere" else _BETA[self.kind](self.n)

    @property
    def dimension(self) -> int:
        return {"sphere": self.n, "rp": self.n, "cp": 2 * self.n, "hp": 4 * self.n, "op2": 16}[self.kind]

    @property
    def max_level(self) -> float:
        return math.pi if self.kind == "sphere" else math.pi / 2

    @property
    def name(self) -> str:
        return {"sphere": "RS", "rp": "RP", "cp": "CP", "hp": "HP", "op2": "OP"}[self.kind] + str(self.n)


def rank_one_space(kind: str, n: int = 2) -> RankOneSpace:
    kind = kind.lower()
    aliases = {"s": "sphere", "rs": "sphere", "sphere": "sphere", "rp": "rp", "cp": "cp", "hp": "hp",
               "op": "op2", "op2": "op2"}
    if kind not in aliases:
        raise ConfigurationError(f"unknown rank-one space {kind!r}; expected one of {_KINDS}")
    kind = aliases[kind]
    if kind == "op2":
        if n != 2:
            raise ConfigurationError("the octonionic projective space exists only for n = 2")
    elif int(n) != n or n < (2 if kind in ("sphere", "rp") else 1):
        raise ConfigurationError(f"invalid dimension parameter n={n} for {kind}")
    return RankOneSpace(kind, int(n))


def legendre_p(n: float, k: int, x):
    """P^{n,k}(x): degree-k zonal polynomial for the law (1-x^2)^{n/2-1} dx, with P(1) = 1."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 + 1e-12):
        raise ValueError("Legendre argument must lie in [-1, 1]")
    p_prev = np.ones_like(x)
    if k == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for j in range(1, k):
        p, p_prev = ((2 * j + n - 1) * x * p - j * p_prev) / (j + n - 1), p
    return p if p.ndim else float(p)


def jacobi_j(a: float, b: float, k: int, s):
    """J^{(a,b),k}(s): degree-k orthogonal polynomial for s^{a-1}(1-s)^{b-1} ds, with J(1) = 1.

    Evaluated as k!/(b)_k * P_k^{(b-1, a-1)}(2s - 1) through the three-term
    recurrence of the classical Jacobi polynomials.
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    s = np.asarray(s, dtype=float)
    if np.any((s < -1e-12) | (s > 1 + 1e-12)):
        raise ValueError("Jacobi argument must lie in [0, 1]")
    al, be = float(b) - 1.0, float(a) - 1.0
    x = 2.0 * s - 1.0
    p_prev = np.ones_like(x)
    if k == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = (al + 1.0) + 0.5 * (al + be + 2.0) * (x - 1.0)
    for m in range(1, k):
        t = 2 * m + al + be
        c1 = 2.0 * (m + 1) * (m + al + be + 1) * t
        c2 = (t + 1) * ((t + 2) * t * x + al * al - be * be)
        c3 = 2.0 * (m + al) * (m + be) * (t + 2)
        p, p_prev = (c2 * p - c3 * p_prev) / c1, p
    # P_k^{(al,be)}(1) = (al+1)_k / k!
    norm = math.exp(math.lgamma(al + 1 + k) - math.lgamma(al + 1) - math.lgamma(k + 1))
    out = p / norm
    return out if out.ndim else float(out)


def orthopoly_eval(space: RankOneSpace, k: int, t):
    """Zonal polynomial of degree k in the spherical coordinate of the space."""
    if space.kind == "sphere":
        return legendre_p(space.n, k, t)
    a, b = space.beta_params
    return jacobi_j(float(a), float(b), k, t)


def sin_power_integral(m: int, L: float) -> float:
    """int_0^L sin^m(t) dt by the reduction formula."""
    if m < 0:
        raise ValueError("m must be non-negative")
    lo, hi = L, 1.0 - math.cos(L)
    if m == 0:
        return lo
    if m == 1:
        return hi
    vals = [lo, hi]
    s, c = math.sin(L), math.cos(L)
    for j in range(2, m + 1):
        vals.append(-(s ** (j - 1)) * c / j + (j - 1) / j * vals[j - 2])
    return vals[m]


def _check_level(space: RankOneSpace, L: float):
    if not (0.0 < L < space.max_level):
        raise OutOfRangeError(f"{space.name}: level must lie in (0, {space.max_level:.6g}), got {L}")


def rankone_eigenvalue(space: RankOneSpace, k: int, L: float) -> float:
    """Limiting eigenvalue c_k of A(N, L)/N (k = 0 gives the normalized ball volume)."""
    _check_level(space, L)
    if k < 0:
        raise ValueError("k must be non-negative")
    n = space.n
    s, c = math.sin(L), math.cos(L)
    if space.kind == "sphere":
        total = sin_power_integral(n - 1, math.pi)
        if k == 0:
            return sin_power_integral(n - 1, L) / total
        return s**n / (n * total) * float(legendre_p(n + 2, k - 1, c))
    if space.kind == "rp" and k == 0:
        return sin_power_integral(n - 1, L) / sin_power_integral(n - 1, math.pi / 2)
    if space.kind == "cp" and k == 0:
        return s ** (2 * n)
    if space.kind == "hp" and k == 0:
        return s ** (4 * n) * (1 + 2 * n * c * c)
    if space.kind == "op2" and k == 0:
        c2 = c * c
        return s**16 * (1 + 8 * c2 + 36 * c2**2 + 120 * c2**3)
    a, b = (float(v) for v in space.beta_params)
    pref = math.exp(math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b + 1))
    return pref * c ** (2 * a) * s ** (2 * b) * float(jacobi_j(a + 1, b + 1, k - 1, c * c))


def rankone_eigenvalue_quadrature(space: RankOneSpace, k: int, L: float, nodes: int = 200) -> float:
    """Direct integral of 1_{d <= L} times the zonal polynomial against the coordinate law."""
    _check_level(space, L)
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    if space.kind == "sphere":
        # x = cos(theta), theta in [0, L]; law of x is (1-x^2)^{n/2-1} dx / B(1/2, n/2)
        n = space.n
        theta = 0.5 * L * (gx + 1.0)
        w = 0.5 * L * gw
        x = np.cos(theta)
        dens = np.sin(theta) ** (n - 1) / sin_power_integral(n - 1, math.pi)
        return float(np.sum(w * dens * legendre_p(n, k, x)))
    a, b = (float(v) for v in space.beta_params)
    # s = 1 - u^2 removes the (1-s)^{b-1} endpoint singularity
    umax = math.sin(L)
    u = 0.5 * umax * (gx + 1.0)
    w = 0.5 * umax * gw
    sv = 1.0 - u * u
    logc = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    dens = np.exp(logc) * sv ** (a - 1) * u ** (2 * b - 2) * 2.0 * u
    return float(np.sum(w * dens * jacobi_j(a, b, k, sv)))


def rankone_multiplicity(space: RankOneSpace, k: int) -> int:
    """Dimension of the k-th spherical representation."""
    if k < 0:
        raise ValueError("k must be non-negative")
    n, F = space.n, Fraction
    if space.kind == "sphere":
        val = F(2 * k + n - 1, k + n - 1) * comb(k + n - 1, n - 1)
    elif space.kind == "rp":
        val = F(4 * k + n - 1, 2 * k + n - 1) * comb(2 * k + n - 1, n - 1)
    elif space.kind == "cp":
        val = F(2 * k + n, n) * comb(k + n - 1, n - 1) ** 2
    elif space.kind == "hp":
        val = F(2 * k + 2 * n + 1, (2 * n + 1) * (k + 1)) * comb(k + 2 * n, 2 * n) * comb(k + 2 * n - 1, 2 * n - 1)
    else:
        val = F(2 * k + 11, 385) * comb(k + 7, 4) * comb(k + 10, 10)
    if val.denominator != 1:
        raise ArithmeticError(f"non-integral multiplicity {val}")
    return int(val)


def rankone_table(space: RankOneSpace, L: float, k_max: int) -> list[dict]:
    return [
        {"k": k, "c": rankone_eigenvalue(space, k, L), "multiplicity": rankone_multiplicity(space, k)}
        for k in range(k_max + 1)
    ]


def sample_spherical_coordinate(space: RankOneSpace, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draws of the spherical coordinate (x on spheres, s on projective spaces) under the uniform law."""
    if space.kind == "sphere":
        half = space.n / 2.0
        return 2.0 * rng.beta(half, half, size) - 1.0
    a, b = (float(v) for v in space.beta_params)
    return rng.beta(a, b, size)
