"""Cartan-Weyl data for the classical root systems A_n, B_n, C_n, D_n.

Weights are stored in the orthogonal e-basis. For A_n the ambient space is
R^{n+1} and weights live on the sum-zero hyperplane; for B, C, D it is R^n.
The inner product is the dual of the (opposite) Killing form, which in the
e-basis is a multiple of the Euclidean one: <e_i, e_j> = e_norm_sq * delta_ij.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "ConfigurationError",
    "DominantWeight",
    "RootSystem",
    "WeylElement",
    "build_root_system",
    "weight_norm",
    "weyl_dimension",
    "weyl_dimension_closed_form",
    "enumerate_dominant_weights",
    "volumes",
    "torus_covolume_table",
    "exponents",
    "MAX_MATERIALIZED_WEYL",
]

MAX_MATERIALIZED_WEYL = math.factorial(10)
_MIN_N = {"A": 1, "B": 2, "C": 2, "D": 3}


@dataclass(frozen=True)
class WeylElement:
    """Signed permutation acting on e-coordinates: (w x)_i = signs[i] * x[perm[i]]."""

    perm: tuple[int, ...]
    signs: tuple[int, ...]
    sign: int

    def __call__(self, x):
        x = np.asarray(x)
        return np.asarray(self.signs) * x[..., list(self.perm)]

    def matrix(self) -> np.ndarray:
        m = np.zeros((len(self.perm), len(self.perm)))
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            m[i, p] = s
        return m


@dataclass(frozen=True, order=True)
class DominantWeight:
    """Dominant weight given by its fundamental-weight coordinates.

    ``coords[i]`` is the coefficient of omega_{i+1}. These are non-negative
    integers for every dominant weight; the half-integral e-basis partition
    (spin weights of B_n and D_n) is exposed doubled by :meth:`doubled_partition`.
    """

    coords: tuple[int, ...]
    family: str = ""
    n: int = 0

    def __post_init__(self):
        if any(int(c) != c or c < 0 for c in self.coords):
            raise ValueError(f"dominant weight coordinates must be non-negative integers: {self.coords}")
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    def doubled_partition(self, rs: "RootSystem | None" = None) -> tuple[int, ...]:
        rs = rs if rs is not None else build_root_system(self.family, self.n)
        return tuple(int(2 * v) for v in rs.partition(self))

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coords) + ")"


def _parity(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class RootSystem:
    family: str
    n: int
    rank: int
    ambient: int
    positive_roots_exact: tuple[tuple[Fraction, ...], ...]
    simple_roots_exact: tuple[tuple[Fraction, ...], ...]
    fundamental_weights_exact: tuple[tuple[Fraction, ...], ...]
    e_norm_sq: Fraction
    weyl_order: int
    integral_only: bool = False
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    # float views
    @property
    def positive_roots(self) -> np.ndarray:
        return _as_float(self.positive_roots_exact)

    @property
    def simple_roots(self) -> np.ndarray:
        return _as_float(self.simple_roots_exact)

    @property
    def fundamental_weights(self) -> np.ndarray:
        return _as_float(self.fundamental_weights_exact)

    @property
    def rho_exact(self) -> tuple[Fraction, ...]:
        return tuple(sum(col, Fraction(0)) for col in zip(*self.fundamental_weights_exact))

    @property
    def rho(self) -> np.ndarray:
        return np.array([float(v) for v in self.rho_exact])

    @property
    def num_positive_roots(self) -> int:
        return len(self.positive_roots_exact)

    @property
    def dim_group(self) -> int:
        return self.rank + 2 * self.num_positive_roots

    @property
    def name(self) -> str:
        return f"{self.family}{self.n}"

    def inner(self, x, y) -> np.ndarray:
        return float(self.e_norm_sq) * np.sum(np.asarray(x, float) * np.asarray(y, float), axis=-1)

    def norm(self, x) -> np.ndarray:
        return np.sqrt(np.maximum(self.inner(x, x), 0.0))

    def gram_fundamental(self) -> np.ndarray:
        w = self.fundamental_weights
        return float(self.e_norm_sq) * (w @ w.T)

    def to_vector(self, coords) -> np.ndarray:
        """Fundamental coordinates (or a DominantWeight) -> e-basis vector."""
        if isinstance(coords, DominantWeight):
            coords = coords.coords
        coords = np.asarray(coords, float)
        if coords.shape[-1] != self.rank:
            raise ConfigurationError(f"expected {self.rank} fundamental coordinates, got {coords.shape[-1]}")
        return coords @ self.fundamental_weights

    def to_vector_exact(self, coords) -> tuple[Fraction, ...]:
        if isinstance(coords, DominantWeight):
            coords = coords.coords
        if len(coords) != self.rank:
            raise ConfigurationError(f"expected {self.rank} fundamental coordinates, got {len(coords)}")
        out = [Fraction(0)] * self.ambient
        for a, w in zip(coords, self.fundamental_weights_exact):
            for i, v in enumerate(w):
                out[i] += a * v
        return tuple(out)

    def to_fundamental(self, x) -> np.ndarray:
        """e-basis vector -> fundamental coordinates, via the coroot pairing."""
        x = np.asarray(x, float)
        a = self.simple_roots
        return 2.0 * (x @ a.T) / np.sum(a * a, axis=1)

    def coroot_pairing(self, x, alpha) -> float:
        x = np.asarray(x, float)
        alpha = np.asarray(alpha, float)
        return 2.0 * float(x @ alpha) / float(alpha @ alpha)

    def partition(self, lam) -> tuple[Fraction, ...]:
        """e-basis partition of a dominant weight (for A_n normalized with last part 0)."""
        v = self.to_vector_exact(lam)
        if self.family == "A":
            shift = v[-1]
            return tuple(x - shift for x in v)
        return v

    def is_dominant(self, coords) -> bool:
        if isinstance(coords, DominantWeight):
            coords = coords.coords
        return len(coords) == self.rank and all(int(c) == c and c >= 0 for c in coords)

    def is_integral_partition(self, lam) -> bool:
        return all(v.denominator == 1 for v in self.partition(lam))

    # Weyl group
    def weyl_elements(self) -> Iterator[WeylElement]:
        m = self.ambient
        for perm in itertools.permutations(range(m)):
            p = _parity(perm)
            if self.family == "A":
                yield WeylElement(perm, (1,) * m, p)
                continue
            for signs in itertools.product((1, -1), repeat=m):
                neg = sum(1 for s in signs if s < 0)
                if self.family == "D" and neg % 2:
                    continue
                yield WeylElement(perm, signs, p * (-1) ** neg)

    def weyl_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(perms, signs, eps) arrays for the whole group; refused for very large groups."""
        if "weyl" not in self._cache:
            if self.weyl_order > MAX_MATERIALIZED_WEYL:
                raise ConfigurationError(
                    f"Weyl group of {self.name} has {self.weyl_order} elements; use weyl_elements()"
                )
            elems = list(self.weyl_elements())
            perms = np.array([e.perm for e in elems], dtype=np.intp)
            signs = np.array([e.signs for e in elems], dtype=float)
            eps = np.array([e.sign for e in elems], dtype=float)
            self._cache["weyl"] = (perms, signs, eps)
        return self._cache["weyl"]

    def weyl_orbit(self, x) -> np.ndarray:
        """All w(x), shape (|W|, ambient), in the order of weyl_arrays."""
        perms, signs, _ = self.weyl_arrays()
        x = np.asarray(x, float)
        return signs * x[perms]

    def descriptor(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "rank": self.rank,
            "e_norm_sq": str(self.e_norm_sq),
            "positive_roots": [[str(v) for v in r] for r in self.positive_roots_exact],
            "simple_roots": [[str(v) for v in r] for r in self.simple_roots_exact],
            "fundamental_weights": [[str(v) for v in w] for w in self.fundamental_weights_exact],
            "rho": [str(v) for v in self.rho_exact],
            "fundamental_norms": [float(v) for v in np.sqrt(np.diag(self.gram_fundamental()))],
            "weyl_order": self.weyl_order,
            "integral_only": self.integral_only,
        }


def _as_float(rows) -> np.ndarray:
    return np.array([[float(v) for v in r] for r in rows], dtype=float)


def _unit(m: int, i: int, scale=1) -> list[Fraction]:
    v = [Fraction(0)] * m
    v[i] = Fraction(scale)
    return v


def build_root_system(family: str, n: int, integral_only: bool = False) -> RootSystem:
    """Root data of type A_n, B_n, C_n or D_n.

    ``integral_only`` marks the system as describing SO(n) rather than Spin(n):
    weight enumeration is then restricted to integer e-partitions.
    """
    family = str(family).upper()
    if family not in _MIN_N:
        raise ConfigurationError(f"unsupported family {family!r}; expected one of A, B, C, D")
    if int(n) != n or n < _MIN_N[family]:
        raise ConfigurationError(f"{family}_n requires n >= {_MIN_N[family]}, got n={n}")
    n = int(n)
    m = n + 1 if family == "A" else n
    F = Fraction

    pos: list[list[Fraction]] = []
    for i in range(m):
        for j in range(i + 1, m):
            r = _unit(m, i)
            r[j] = F(-1)
            pos.append(r)
    if family in "BCD":
        for i in range(n):
            for j in range(i + 1, n):
                r = _unit(m, i)
                r[j] = F(1)
                pos.append(r)
    if family == "B":
        pos.extend(_unit(m, i) for i in range(n))
    if family == "C":
        pos.extend(_unit(m, i, 2) for i in range(n))

    simple: list[list[Fraction]] = []
    for i in range(n - 1):
        r = _unit(m, i)
        r[i + 1] = F(-1)
        simple.append(r)
    if family == "A":
        r = _unit(m, n - 1)
        r[n] = F(-1)
        simple.append(r)
    elif family == "B":
        simple.append(_unit(m, n - 1))
    elif family == "C":
        simple.append(_unit(m, n - 1, 2))
    else:
        # alpha_{n-1} = e_{n-1} + e_n and alpha_n = e_{n-1} - e_n, dual to the
        # spin weights 1/2(e_1+...+e_{n-1} +- e_n) in that order
        simple = simple[: n - 2]
        a = _unit(m, n - 2)
        a[n - 1] = F(1)
        b = _unit(m, n - 2)
        b[n - 1] = F(-1)
        simple += [a, b]

    fund: list[list[Fraction]] = []
    for i in range(1, n + 1):
        w = [F(1) if j < i else F(0) for j in range(m)]
        if family == "A":
            w = [x - F(i, n + 1) for x in w]
        elif family == "B" and i == n:
            w = [F(1, 2)] * n
        elif family == "D" and i == n - 1:
            w = [F(1, 2)] * n
        elif family == "D" and i == n:
            w = [F(1, 2)] * (n - 1) + [F(-1, 2)]
        fund.append(w)

    e_norm_sq = F(1, {"A": 2 * n + 2, "B": 4 * n - 2, "C": 4 * n + 4, "D": 4 * n - 4}[family])
    weyl_order = {
        "A": math.factorial(n + 1),
        "B": 2**n * math.factorial(n),
        "C": 2**n * math.factorial(n),
        "D": 2 ** (n - 1) * math.factorial(n),
    }[family]
    return RootSystem(
        family=family,
        n=n,
        rank=n,
        ambient=m,
        positive_roots_exact=tuple(tuple(r) for r in pos),
        simple_roots_exact=tuple(tuple(r) for r in simple),
        fundamental_weights_exact=tuple(tuple(w) for w in fund),
        e_norm_sq=e_norm_sq,
        weyl_order=weyl_order,
        integral_only=bool(integral_only),
    )


def _as_e_vector(rs: RootSystem, x, basis: str) -> np.ndarray:
    if isinstance(x, DominantWeight):
        return rs.to_vector(x.coords)
    x = np.asarray(x, float)
    if basis == "fundamental":
        return rs.to_vector(x)
    if basis != "e":
        raise ConfigurationError(f"unknown basis {basis!r}")
    if x.shape[-1] != rs.ambient:
        raise ConfigurationError(f"{rs.name} weights have {rs.ambient} e-coordinates, got {x.shape[-1]}")
    return x


def weight_norm(rs: RootSystem, x, basis: str = "e") -> float:
    """Norm of a weight for the Killing-dual inner product."""
    return float(rs.norm(_as_e_vector(rs, x, basis)))


def _dot_exact(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def weyl_dimension(rs: RootSystem, lam) -> int:
    """dim V^lambda = prod_{alpha>0} <alpha, lambda+rho> / <alpha, rho>, exactly."""
    coords = lam.coords if isinstance(lam, DominantWeight) else tuple(lam)
    if not rs.is_dominant(coords):
        raise ValueError(f"{coords} is not a dominant weight of {rs.name}")
    v = rs.to_vector_exact(coords)
    rho = rs.rho_exact
    num, den = Fraction(1), Fraction(1)
    for alpha in rs.positive_roots_exact:
        num *= _dot_exact(alpha, [a + b for a, b in zip(v, rho)])
        den *= _dot_exact(alpha, rho)
    out = num / den
    if out.denominator != 1:
        raise ArithmeticError(f"non-integral dimension {out}")
    return int(out)


def weyl_dimension_closed_form(rs: RootSystem, lam) -> int:
    """Partition-product form of the Weyl dimension for A, B, C, D."""
    coords = lam.coords if isinstance(lam, DominantWeight) else tuple(lam)
    if not rs.is_dominant(coords):
        raise ValueError(f"{coords} is not a dominant weight of {rs.name}")
    p = rs.partition(coords)
    n, F = rs.n, Fraction
    out = F(1)
    m = len(p)
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            out *= F(p[i - 1] - p[j - 1] + j - i) / (j - i)
    if rs.family == "A":
        pass
    elif rs.family in "BC":
        top = 2 * n + 1 if rs.family == "B" else 2 * n + 2
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                out *= F(p[i - 1] + p[j - 1] + top - i - j) / (top - i - j)
    else:
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                out *= F(p[i - 1] + p[j - 1] + 2 * n - i - j) / (2 * n - i - j)
    if out.denominator != 1:
        raise ArithmeticError(f"non-integral dimension {out}")
    return int(out)


def enumerate_dominant_weights(rs: RootSystem, norm_cutoff: float) -> list[DominantWeight]:
    """Dominant weights with ||lambda + rho|| <= cutoff, lexicographic in fundamental coordinates.

    All pairwise inner products of fundamental weights are non-negative for
    the classical types, so the norm increases in every coordinate and a
    depth-first scan can stop each coordinate at the first overshoot.
    """
    if norm_cutoff <= 0:
        return []
    gram = rs.gram_fundamental()
    if np.any(gram < -1e-15):
        raise ArithmeticError("fundamental weights with negative inner products")
    d = rs.rank
    limit = norm_cutoff**2 * (1 + 1e-12) + 1e-300
    out: list[DominantWeight] = []
    coords = [0] * d

    def sq(c) -> float:
        v = np.asarray(c, float) + 1.0
        return float(v @ gram @ v)

    def rec(j: int):
        if j == d:
            if sq(coords) <= limit:
                lam = DominantWeight(tuple(coords), rs.family, rs.n)
                if not rs.integral_only or rs.is_integral_partition(lam):
                    out.append(lam)
            return
        a = 0
        while True:
            coords[j] = a
            for t in range(j + 1, d):
                coords[t] = 0
            if sq(coords) > limit:
                break
            rec(j + 1)
            a += 1
        coords[j] = 0

    rec(0)
    return out


def exponents(rs: RootSystem) -> list[int]:
    """Exponents m_i read off the height distribution of the positive roots."""
    a = rs.simple_roots
    coeffs = np.linalg.lstsq(a.T, rs.positive_roots.T, rcond=None)[0]
    heights = np.rint(coeffs.sum(axis=0)).astype(int)
    top = int(heights.max())
    counts = [int(np.sum(heights == h)) for h in range(1, top + 2)]
    out: list[int] = []
    for h in range(1, top + 1):
        out.extend([h] * (counts[h - 1] - counts[h]))
    return sorted(out)


def torus_covolume_table(family: str, n: int) -> float:
    """Closed-form vol(t / t_Z) per family."""
    family = family.upper()
    if family == "A":
        return 2 ** (n / 2) * (n + 1) ** ((n + 1) / 2)
    if family == "B":
        return 2 ** (n / 2 + 1) * (2 * n - 1) ** (n / 2)
    if family == "C":
        return 2**n * (n + 1) ** (n / 2)
    if family == "D":
        return 2 ** (n + 1) * (n - 1) ** (n / 2)
    raise ConfigurationError(family)


def volumes(rs: RootSystem) -> dict:
    """Covolume of the coroot lattice and two independent evaluations of vol(G).

    vol(t/t_Z) is computed from the Gram matrix of the fundamental weights
    (the coroot lattice is dual to the weight lattice). vol(G) is evaluated by
    the Macdonald product over exponents and by the sinc product over roots.
    """
    gram = rs.gram_fundamental()
    vol_t = 1.0 / math.sqrt(float(np.linalg.det(gram)))
    dim = rs.dim_group
    roots = rs.positive_roots
    inv_norms = 1.0 / rs.inner(roots, roots)
    log_mac = math.log(vol_t) + dim * math.log(2.0) + float(np.sum(np.log(inv_norms)))
    for m in exponents(rs):
        log_mac += (m + 1) * math.log(math.pi) - math.lgamma(m + 1)
    rho_dot = rs.inner(roots, rs.rho)
    # np.sinc(t) = sin(pi t)/(pi t), so this is sin(2 pi u)/(2 pi u)
    sincs = np.sinc(2.0 * rho_dot)
    log_kp = dim * math.log(2.0 * math.sqrt(2.0) * math.pi) + float(np.sum(np.log(sincs)))
    return {
        "vol_t_mod_tZ": vol_t,
        "vol_G_macdonald": math.exp(log_mac),
        "vol_G_kp": math.exp(log_kp),
    }
