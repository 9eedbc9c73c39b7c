"""String polytopes and Littlewood-Richardson coefficients for A1 and A2.

Weights are integer vectors of fundamental-weight coordinates. For A2 the
reduced word of the longest Weyl element is s1 s2 s1; a string point
u = (u1, u2, u3) of V^lambda has weight lambda - (u1 + u3) alpha_1 - u2 alpha_2.
"""

from __future__ import annotations

import io
import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.signal import convolve

from .errors import ConfigurationError
from .rootdata import DominantWeight

__all__ = [
    "StringPolytope",
    "RelativePolytope",
    "CharacterElement",
    "string_polytope_points",
    "weight_multiplicity",
    "lr_polytope",
    "lr_polytope_table",
    "lr_oracle",
    "lr_oracle_table",
    "lr_scaling_check",
    "lr_table_csv",
    "character",
]

# simple roots in fundamental coordinates (rows of the Cartan matrix)
_SIMPLE = {"A1": np.array([[2]]), "A2": np.array([[2, -1], [-1, 2]])}
# reduced word of the longest element, as indices of simple roots
_WORD = {"A1": (0,), "A2": (0, 1, 0)}


def _family(family: str) -> str:
    fam = family.upper().replace("_", "")
    if fam in ("A1", "SU2"):
        return "A1"
    if fam in ("A2", "SU3"):
        return "A2"
    raise ConfigurationError(f"crystal computations support A1 and A2 only, got {family!r}")


def _coords(lam, fam: str) -> tuple[int, ...]:
    c = lam.coords if isinstance(lam, DominantWeight) else tuple(int(v) for v in np.atleast_1d(lam))
    rank = 1 if fam == "A1" else 2
    if len(c) != rank:
        raise ConfigurationError(f"{fam} weights have {rank} coordinate(s), got {c}")
    return c


def _dominant(c: tuple[int, ...]) -> tuple[int, ...]:
    if any(v < 0 for v in c):
        raise ConfigurationError(f"weight {c} is not dominant")
    return c


@dataclass(frozen=True)
class StringPolytope:
    """P(lambda): string cone intersected with the nested bounds of lambda."""

    family: str
    lam: tuple[int, ...]

    def contains(self, u) -> bool:
        u = tuple(u)
        if self.family == "A1":
            return 0 <= u[0] <= self.lam[0]
        u1, u2, u3 = u
        n1, n2 = self.lam
        return min(u) >= 0 and u2 >= u3 and u3 <= n1 and u2 <= u3 + n2 and u1 <= n1 - 2 * u3 + u2

    def points(self) -> np.ndarray:
        return _string_points(self.family, self.lam)

    def weight(self, u) -> tuple[int, ...]:
        u = np.asarray(u)
        simple = _SIMPLE[self.family]
        shift = sum(u[..., j, None] * simple[i] for j, i in enumerate(_WORD[self.family]))
        return np.asarray(self.lam) - shift


@dataclass(frozen=True)
class RelativePolytope:
    """P(lambda, mu): P(mu) cut by the lambda-dependent inequalities."""

    family: str
    lam: tuple[int, ...]
    mu: tuple[int, ...]

    def contains(self, u) -> bool:
        if not StringPolytope(self.family, self.mu).contains(u):
            return False
        if self.family == "A1":
            return u[0] <= self.lam[0]
        u1, u2, u3 = u
        x1, x2 = self.lam
        return u1 <= x1 and u2 <= u1 + x2 and u3 <= x2

    def points(self) -> np.ndarray:
        pts = _string_points(self.family, self.mu)
        if self.family == "A1":
            return pts[pts[:, 0] <= self.lam[0]]
        x1, x2 = self.lam
        keep = (pts[:, 0] <= x1) & (pts[:, 1] <= pts[:, 0] + x2) & (pts[:, 2] <= x2)
        return pts[keep]


@lru_cache(maxsize=256)
def _string_points(fam: str, lam: tuple[int, ...]) -> np.ndarray:
    if fam == "A1":
        return np.arange(lam[0] + 1)[:, None]
    n1, n2 = lam
    chunks = []
    for u3 in range(n1 + 1):
        for u2 in range(u3, u3 + n2 + 1):
            top = n1 - 2 * u3 + u2
            if top < 0:
                continue
            u1 = np.arange(top + 1)
            chunks.append(np.column_stack([u1, np.full_like(u1, u2), np.full_like(u1, u3)]))
    out = np.concatenate(chunks) if chunks else np.zeros((0, 3), int)
    out.setflags(write=False)
    return out


def string_polytope_points(family: str, lam) -> np.ndarray:
    """All integer points of P(lambda), one row per crystal element."""
    fam = _family(family)
    return _string_points(fam, _dominant(_coords(lam, fam))).copy()


def _weights_of(fam: str, lam: tuple[int, ...], pts: np.ndarray) -> np.ndarray:
    return StringPolytope(fam, lam).weight(pts)


def weight_multiplicity(family: str, lam, omega) -> int:
    """Kostka number K_{lambda, omega}: string points of weight omega."""
    fam = _family(family)
    lam = _dominant(_coords(lam, fam))
    omega = np.asarray(_coords(omega, fam))
    w = _weights_of(fam, lam, _string_points(fam, lam))
    return int(np.sum(np.all(w == omega, axis=1)))


def lr_polytope_table(family: str, lam, mu) -> dict[tuple[int, ...], int]:
    """All nonzero c^{lambda, mu}_nu counted as integer points of the relative polytope."""
    fam = _family(family)
    lam = _dominant(_coords(lam, fam))
    mu = _dominant(_coords(mu, fam))
    pts = RelativePolytope(fam, lam, mu).points()
    nus = np.asarray(lam) + _weights_of(fam, mu, pts)
    keys, counts = np.unique(nus, axis=0, return_counts=True)
    return {tuple(int(v) for v in k): int(c) for k, c in zip(keys, counts)}


def lr_polytope(family: str, lam, mu, nu) -> int:
    """c^{lambda, mu}_nu as the number of integer points in a weight slice of P(lambda, mu)."""
    fam = _family(family)
    nu = _dominant(_coords(nu, fam))
    return lr_polytope_table(fam, lam, mu).get(nu, 0)


# ---------------------------------------------------------------- characters

class CharacterElement:
    """Finite integer combination of weights, stored densely on a box of the weight lattice."""

    def __init__(self, origin: Sequence[int], array: np.ndarray):
        self.origin = np.asarray(origin, np.int64)
        self.array = np.asarray(array, np.int64)

    @classmethod
    def from_dict(cls, d: dict) -> "CharacterElement":
        keys = np.array(list(d.keys()), np.int64)
        lo = keys.min(axis=0)
        hi = keys.max(axis=0)
        arr = np.zeros(tuple(hi - lo + 1), np.int64)
        for k, v in d.items():
            arr[tuple(np.asarray(k) - lo)] += v
        return cls(lo, arr)

    def to_dict(self) -> dict[tuple[int, ...], int]:
        idx = np.argwhere(self.array != 0)
        return {tuple(int(v) for v in i + self.origin): int(self.array[tuple(i)]) for i in idx}

    def __mul__(self, other: "CharacterElement") -> "CharacterElement":
        prod = convolve(self.array, other.array, method="direct")
        return CharacterElement(self.origin + other.origin, np.rint(prod).astype(np.int64))

    def coefficient(self, weight) -> int:
        i = np.asarray(weight) - self.origin
        if np.any(i < 0) or np.any(i >= self.array.shape):
            return 0
        return int(self.array[tuple(i)])

    def subtract(self, other: "CharacterElement", times: int = 1):
        """In-place self -= times * other (other must fit inside self's box)."""
        off = other.origin - self.origin
        if np.any(off < 0) or np.any(off + other.array.shape > self.array.shape):
            raise ArithmeticError("character outside the support of the product")
        sl = tuple(slice(o, o + s) for o, s in zip(off, other.array.shape))
        self.array[sl] -= times * other.array


@lru_cache(maxsize=512)
def _character(fam: str, lam: tuple[int, ...]) -> CharacterElement:
    pts = _string_points(fam, lam)
    w = _weights_of(fam, lam, pts)
    keys, counts = np.unique(w, axis=0, return_counts=True)
    return CharacterElement.from_dict({tuple(k): int(c) for k, c in zip(keys, counts)})


def character(family: str, lam) -> CharacterElement:
    """ch^lambda from the weight multiplicities of the string polytope."""
    fam = _family(family)
    return _character(fam, _dominant(_coords(lam, fam)))


def _norm_sq(fam: str, c) -> float:
    if fam == "A1":
        return c[0] ** 2 / 2.0
    a, b = c
    return (a * a + a * b + b * b) / 3.0


def lr_oracle_table(family: str, lam, mu) -> dict[tuple[int, ...], int]:
    """Decomposition of ch^lambda * ch^mu by peeling off the largest dominant term."""
    fam = _family(family)
    lam = _dominant(_coords(lam, fam))
    mu = _dominant(_coords(mu, fam))
    prod = _character(fam, lam) * _character(fam, mu)
    prod = CharacterElement(prod.origin, prod.array.copy())
    out: dict[tuple[int, ...], int] = {}
    while True:
        idx = np.argwhere(prod.array != 0)
        if idx.size == 0:
            break
        weights = idx + prod.origin
        dom = weights[np.all(weights >= 0, axis=1)]
        if dom.size == 0:
            raise ArithmeticError("non-zero remainder without dominant weights")
        top = max((tuple(int(v) for v in w) for w in dom), key=lambda c: (_norm_sq(fam, c), c))
        coef = prod.coefficient(top)
        if coef < 0:
            raise ArithmeticError(f"negative multiplicity {coef} at {top} during decomposition")
        out[top] = coef
        prod.subtract(_character(fam, top), coef)
    return out


def lr_oracle(family: str, lam, mu, nu) -> int:
    fam = _family(family)
    nu = _dominant(_coords(nu, fam))
    return lr_oracle_table(fam, lam, mu).get(nu, 0)


# ---------------------------------------------------------------- asymptotics

def lr_scaling_check(family: str, x, y, t_list: Iterable[int],
                     functionals: dict[str, Callable[[np.ndarray], np.ndarray]] | None = None) -> list[dict]:
    """(1/t^l) sum_nu c^{tx,ty}_nu f(nu/t) for each t and each test function f.

    The default test functions are the constant 1 and the coordinates of nu/t.
    """
    fam = _family(family)
    x = np.asarray(_coords(x, fam))
    y = np.asarray(_coords(y, fam))
    l = len(_WORD[fam])
    if functionals is None:
        functionals = {"one": lambda z: np.ones(len(z))}
        for i in range(len(x)):
            functionals[f"z{i + 1}"] = (lambda i: lambda z: z[:, i])(i)
    rows = []
    for t in t_list:
        t = int(t)
        table = lr_polytope_table(fam, tuple(int(v) for v in t * x), tuple(int(v) for v in t * y))
        nus = np.array(list(table.keys()), float) / t
        cs = np.array(list(table.values()), float)
        row = {"t": t}
        for name, f in functionals.items():
            row[name] = float(np.sum(cs * f(nus)) / t**l)
        rows.append(row)
    return rows


def lr_table_csv(family: str, pairs: Iterable[tuple]) -> str:
    """CSV lines lambda, mu, nu, c for each (lambda, mu) pair."""
    fam = _family(family)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda", "mu", "nu", "c"])
    for lam, mu in pairs:
        table = lr_polytope_table(fam, lam, mu)
        for nu in sorted(table):
            w.writerow([" ".join(map(str, _coords(lam, fam))), " ".join(map(str, _coords(mu, fam))),
                        " ".join(map(str, nu)), table[nu]])
    return buf.getvalue()
