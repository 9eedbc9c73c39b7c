"""Limit moments of sparse geometric graphs on compact Lie groups.

Quadrature of the one-vertex integrals I_k, of the SU(2) two-vertex
integrals driven by the Clebsch-Gordan density, assembly of the limit
moments M_2..M_7 from the circuit expansion, and Monte Carlo estimators
(embedding counts, graph functionals, empirical moments of simulated graphs).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .bessel import bessel_g, delta_polynomial, partial_phi_minus
from .circuits import Component, component_pattern, expansion_table
from .errors import ConfigurationError, NumericalError, OutOfRangeError
from .gaussian import limiting_eigenvalue
from .geometry import SpaceSpec, haar_sample, poisson_level, su2_to_quaternion
from .poisson import ball_volume, embedding_count_estimate, simulate_sparse_graphs
from .rootdata import RootSystem, build_root_system, volumes, weyl_dimension
from .util import as_rng

__all__ = [
    "LimitMomentTable",
    "c_coeff",
    "radial_profile",
    "one_vertex_integral",
    "two_vertex_integral_su2",
    "clebsch_gordan_density",
    "component_integral",
    "limiting_moments",
    "moment_polynomial",
    "moment_upper_bound",
    "graph_functional_estimate",
    "su2_character",
    "trace_moments",
    "empirical_limit_moments",
    "embedding_exponent",
]

_GL_NODES = 16
_PANEL = math.pi / 4


def c_coeff(rs: RootSystem, lam, L: float) -> float:
    """C_{lambda, L} = d_lambda * c_lambda."""
    return weyl_dimension(rs, lam) * limiting_eigenvalue(rs, lam, L)


# ---------------------------------------------------------------- one vertex

def _check_rank(rs: RootSystem):
    if rs.rank > 2:
        raise ConfigurationError(f"limit integrals are implemented for rank <= 2, got {rs.name}")


def _chamber_frame(rs: RootSystem):
    """Unit vector along omega_1 and its orthonormal complement towards omega_2, and the chamber angle."""
    w = rs.fundamental_weights
    u1 = w[0] / rs.norm(w[0])
    if rs.rank == 1:
        return u1, None, 0.0
    v = w[1] - rs.inner(w[1], u1) * u1
    u2 = v / rs.norm(v)
    angle = math.atan2(float(rs.inner(w[1], u2)), float(rs.inner(w[1], u1)))
    return u1, u2, angle


def radial_profile(rs: RootSystem, k: int, r: np.ndarray, n_angle: int = 48) -> np.ndarray:
    """Integral over the sphere of radius r inside the chamber of (dJ/(2pi)^{d/2})^k / delta^{k-2}."""
    _check_rank(rs)
    r = np.asarray(r, float)
    u1, u2, angle = _chamber_frame(rs)
    norm = (2.0 * math.pi) ** (rs.rank / 2.0)
    if rs.rank == 1:
        x = r[:, None] * u1
        f = partial_phi_minus(rs, x, method="analytic") / norm
        return f**k / delta_polynomial(rs, x) ** (k - 2)
    t, wt = np.polynomial.legendre.leggauss(n_angle)
    phi = 0.5 * angle * (t + 1.0)
    wphi = 0.5 * angle * wt
    dirs = np.cos(phi)[:, None] * u1 + np.sin(phi)[:, None] * u2
    x = r[:, None, None] * dirs[None]
    f = partial_phi_minus(rs, x, method="analytic") / norm
    vals = f**k / delta_polynomial(rs, x) ** (k - 2)
    return (vals @ wphi) * r


def _tail_exponent(rs: RootSystem, k: int) -> float:
    # the integrand decays like |x|^{-(k(d+1)/2 + (k-2)l)}; the tail integral loses one power per dimension
    d, l = rs.rank, rs.num_positive_roots
    return k * (d + 1) / 2.0 + (k - 2) * l - d


def _richardson(values: list[float], q: float) -> tuple[float, float]:
    """Eliminate tail terms R^-q, R^-(q+1), ... from integrals truncated at doubling radii.

    Returns the extrapolated value and its change against the previous column.
    """
    table = [list(values)]
    for j in range(1, len(values)):
        prev = table[-1]
        ratio = 2.0 ** (q + j - 1)
        table.append([(ratio * prev[i + 1] - prev[i]) / (ratio - 1.0) for i in range(len(prev) - 1)])
    best = table[-1][0]
    change = abs(best - table[-2][-1]) if len(table) > 1 else float("inf")
    return best, change


@lru_cache(maxsize=None)
def _one_vertex_cached(family: str, n: int, k: int, base_periods: int, levels: int, rtol: float) -> tuple[float, float]:
    rs = build_root_system(family, n)
    t, w = np.polynomial.legendre.leggauss(_GL_NODES)
    radii = [2.0 * math.pi * base_periods * 2**j for j in range(levels)]
    n_panels = int(round(radii[-1] / _PANEL))
    edges = np.arange(n_panels + 1) * _PANEL
    mids = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mids[:, None] + 0.5 * _PANEL * t[None, :]).ravel()
    weights = np.tile(0.5 * _PANEL * w, n_panels)
    vals = np.empty_like(nodes)
    chunk = 4096
    for s in range(0, len(nodes), chunk):
        vals[s:s + chunk] = radial_profile(rs, k, nodes[s:s + chunk])
    panel_sums = (vals * weights).reshape(n_panels, _GL_NODES).sum(axis=1)
    cum = np.cumsum(panel_sums)
    partial = [float(cum[int(round(R / _PANEL)) - 1]) for R in radii]
    q = _tail_exponent(rs, k)
    value, change = _richardson(partial, q)
    scale = max(abs(value), abs(partial[-1]), 1e-300)
    if change > rtol * scale:
        raise NumericalError(f"I_{k} for {rs.name}: tail extrapolation unsettled (change {change:.2e})")
    return value, change


def one_vertex_integral(rs: RootSystem, k: int, base_periods: int = 4, levels: int = 6,
                        rtol: float = 1e-7, return_error: bool = False):
    """I_k = int_C ((d_{Phi-} J~)(x) / (2pi)^{d/2})^k dx / delta(x)^{k-2}.

    Gauss-Legendre panels in the radius (and in the chamber angle for rank 2)
    up to R_j = 2 pi * base_periods * 2^j; the truncated values are
    extrapolated in R to remove the algebraic tail R^-q, R^-q-1, ...
    """
    _check_rank(rs)
    if k < 2:
        raise ValueError("k must be at least 2")
    fam, n = rs.name[0], rs.rank
    value, change = _one_vertex_cached(fam, n, int(k), int(base_periods), int(levels), float(rtol))
    return (value, change) if return_error else value


# ---------------------------------------------------------------- two vertices (SU(2))

def _su2_profile(x: np.ndarray) -> np.ndarray:
    """F(x) = d_{Phi-} J~ (x omega_hat) / sqrt(2 pi) on the SU(2) chamber, x >= 0 in metric units."""
    rs = build_root_system("A", 1)
    u1, _, _ = _chamber_frame(rs)
    return partial_phi_minus(rs, np.asarray(x, float)[..., None] * u1, method="analytic") / math.sqrt(2.0 * math.pi)


def _su2_profile_antiderivative(x: np.ndarray) -> np.ndarray:
    # d/dr g_{1/2}(r) = -r g_{3/2}(r) and F(x) = <u, alpha> x g_{3/2}(x) / sqrt(2 pi)
    rs = build_root_system("A", 1)
    u1, _, _ = _chamber_frame(rs)
    ua = float(rs.inner(u1, rs.positive_roots[0]))
    g0 = 1.0 / (math.sqrt(2.0) * math.gamma(1.5))
    return ua * (g0 - bessel_g(0.5, np.asarray(x, float))) / math.sqrt(2.0 * math.pi)


def _su2_delta(x: np.ndarray) -> np.ndarray:
    rs = build_root_system("A", 1)
    u1, _, _ = _chamber_frame(rs)
    return delta_polynomial(rs, np.asarray(x, float)[..., None] * u1)


def clebsch_gordan_density() -> float:
    """Constant value of q_{x,y}(z) on |x - y| <= z <= x + y in metric units.

    In units of the fundamental weight the density is 1/2 (allowed highest
    weights have spacing 2); the metric length of the fundamental weight
    is 1/vol(t/t_Z) for SU(2), hence vol(t/t_Z)/2.
    """
    rs = build_root_system("A", 1)
    return 0.5 / float(rs.norm(rs.fundamental_weights[0]))


@lru_cache(maxsize=None)
def _two_vertex_cached(a1: int, a2: int, base_periods: int, levels: int, rtol: float) -> tuple[float, float]:
    t, w = np.polynomial.legendre.leggauss(_GL_NODES)
    radii = [2.0 * math.pi * base_periods * 2**j for j in range(levels)]
    n_panels = int(round(radii[-1] / _PANEL))
    mids = (np.arange(n_panels) + 0.5) * _PANEL
    nodes = (mids[:, None] + 0.5 * _PANEL * t[None, :]).ravel()
    weights = np.tile(0.5 * _PANEL * w, n_panels)
    f = _su2_profile(nodes)
    dl = _su2_delta(nodes)
    h1 = weights * f**a1 / dl ** (a1 - 1)
    h2 = weights * f**a2 / dl ** (a2 - 1)
    # panel sums of the double integral, accumulated over growing squares
    n = len(nodes)
    block = np.zeros((n_panels, n_panels))
    rows = 256
    for s in range(0, n, rows):
        x = nodes[s:s + rows, None]
        inner = _su2_profile_antiderivative(x + nodes[None, :]) - _su2_profile_antiderivative(np.abs(x - nodes[None, :]))
        vals = h1[s:s + rows, None] * inner * h2[None, :]
        per_col = vals.reshape(vals.shape[0], n_panels, _GL_NODES).sum(axis=2)
        pr = np.arange(s, s + vals.shape[0]) // _GL_NODES
        np.add.at(block, pr, per_col)
    partial = []
    for R in radii:
        m = int(round(R / _PANEL))
        partial.append(float(block[:m, :m].sum()))
    q_den = clebsch_gordan_density()
    partial = [p * q_den for p in partial]
    # slowest tail: one variable large, decay x^{-(a(d+1)/2 + (a-1))} integrated once
    q = min(a1, a2) * 2.0 + (min(a1, a2) - 1) - 1.0
    value, change = _richardson(partial, q)
    if change > rtol * max(abs(value), 1e-300):
        raise NumericalError(f"two-vertex integral ({a1},{a2},1): tail extrapolation unsettled (change {change:.2e})")
    return value, change


def two_vertex_integral_su2(a_labels, base_periods: int = 2, levels: int = 5, rtol: float = 1e-6,
                            return_error: bool = False):
    """I_(a1,a2,a3) for SU(2): the triple integral against the Clebsch-Gordan density.

    The density is an indicator of the triangle inequalities between x, y
    and z, hence symmetric in the three slots; the slot carrying the label 1
    is integrated in closed form through the antiderivative of the profile,
    leaving a 2-D Gauss-Legendre quadrature with the same tail extrapolation
    as the one-vertex integrals.
    """
    a = tuple(int(v) for v in a_labels)
    if len(a) != 3:
        raise ConfigurationError("two-vertex integrals are implemented for r = 3 edges")
    if min(a) < 1:
        raise ValueError("labels must be positive")
    if sorted(a)[1] < 2:
        raise ValueError("at most one label may equal 1")
    if 1 not in a:
        raise ConfigurationError("only label triples containing a 1 are implemented (closed-form inner integral)")
    rest = sorted(a, reverse=True)[:2]
    value, change = _two_vertex_cached(rest[0], rest[1], int(base_periods), int(levels), float(rtol))
    return (value, change) if return_error else value


# ---------------------------------------------------------------- moment tables

def _su2_constants() -> dict:
    rs = build_root_system("A", 1)
    vols = volumes(rs)
    space = SpaceSpec("su", 2)
    return {"rs": rs, "vol_t": vols["vol_t_mod_tZ"], "vol_G": vols["vol_G_kp"], "dim": space.dim}


def component_integral(comp: Component, simulate_trials: int = 20000, rng=None) -> tuple[float, str, float]:
    """(I_component, provenance, standard error) for SU(2), normalized so e = I * ell'^(k_c - 1)."""
    rs = build_root_system("A", 1)
    if comp.is_loop:
        return one_vertex_integral(rs, comp.labels[0]), "quadrature", 0.0
    labels = comp.labels
    if comp.num_vertices == 2 and len(labels) == 3 and labels[-1] == 1:
        return two_vertex_integral_su2(labels), "quadrature", 0.0
    c = _su2_constants()
    k_c = comp.num_vertices + comp.excess
    pattern = component_pattern(comp)
    est, se = embedding_count_estimate(pattern, c["dim"], 1.0, simulate_trials, as_rng(rng), return_stderr=True)
    conv = (c["vol_t"] / c["vol_G"]) ** (k_c - 1)
    return est * conv, "simulated", se * conv


@dataclass
class LimitMomentTable:
    ell: float
    ell_prime: float
    I: dict = field(default_factory=dict)  # descriptor -> value
    M: dict = field(default_factory=dict)  # s -> value
    terms: dict = field(default_factory=dict)  # s -> list of term records

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=float)


def limiting_moments(ell: float, s_max: int = 7, rs: RootSystem | None = None, simulate_trials: int = 20000,
                     rng=None) -> LimitMomentTable:
    """M_2..M_s_max for SU(2) from the circuit expansion; each term records its provenance."""
    if rs is not None and (rs.name[0] != "A" or rs.rank != 1):
        raise ConfigurationError("limit moments are assembled for SU(2) only")
    if not 2 <= s_max <= 7:
        raise ConfigurationError("s_max must lie in 2..7")
    if ell <= 0:
        raise OutOfRangeError("ell must be positive")
    rng = as_rng(rng)
    c = _su2_constants()
    ellp = ell / c["vol_t"]
    table = LimitMomentTable(ell=float(ell), ell_prime=ellp)
    cache: dict[str, tuple[float, str, float]] = {}
    for s in range(2, s_max + 1):
        total, records = 0.0, []
        for row in expansion_table(s):
            value, prov, var = 1.0, "quadrature", 0.0
            for comp in row.reduced.components:
                if comp.descriptor not in cache:
                    cache[comp.descriptor] = component_integral(comp, simulate_trials, rng)
                iv, p, se = cache[comp.descriptor]
                value *= iv
                var += (se / iv) ** 2 if iv else 0.0
                if p == "simulated":
                    prov = "simulated"
            term = row.multiplicity * value * ellp ** (row.k - 1)
            total += term
            records.append({"reduced": row.descriptor, "multiplicity": row.multiplicity, "k": row.k,
                            "value": term, "provenance": prov, "stderr": abs(term) * math.sqrt(var)})
        table.M[s] = total
        table.terms[s] = records
    table.I = {d: v[0] for d, v in cache.items()}
    return table


def moment_polynomial(s: int, simulate_trials: int = 20000, rng=None) -> list[float]:
    """Coefficients a_j of M_s = sum_j a_j ell'^j (j = 0..s-1) for SU(2)."""
    tab = limiting_moments(1.0, s, simulate_trials=simulate_trials, rng=rng)
    ellp = tab.ell_prime
    coeffs = [0.0] * s
    for rec in tab.terms[s]:
        coeffs[rec["k"] - 1] += rec["value"] / ellp ** (rec["k"] - 1)
    return coeffs


def moment_upper_bound(s2: int, ell: float, dim: int = 3, vol_G: float | None = None) -> float:
    """prod_{t=0}^{s2-2} (t + c(dim) ell / vol(G)) bounding the even moment M_{s2}."""
    if s2 % 2:
        raise ValueError("the bound is stated for even moments")
    if vol_G is None:
        vol_G = _su2_constants()["vol_G"]
    lam = ball_volume(dim) * ell / vol_G
    return float(np.prod([t + lam for t in range(s2 - 1)]))


# ---------------------------------------------------------------- Monte Carlo

def su2_character(k: int, theta) -> np.ndarray:
    """chi_k(theta) = sin((k+1) theta) / sin(theta), with the limit k+1 at theta = 0, pi."""
    theta = np.asarray(theta, float)
    s = np.sin(theta)
    small = np.abs(s) < 1e-12
    safe = np.where(small, 1.0, s)
    val = np.sin((k + 1) * theta) / safe
    limit = (k + 1) * np.where(np.cos(theta) > 0, 1.0, (-1.0) ** k)
    return np.where(small, limit, val)


def graph_functional_estimate(edges, weights, samples: int, rng=None, num_vertices: int | None = None):
    """Monte Carlo GF_S for SU(2): mean over Haar tuples of prod_e chi_{lambda_e}(g_a g_b^{-1}).

    ``edges`` are (a, b) pairs (a == b is a loop); returns (estimate, standard error).
    """
    rng = as_rng(rng)
    edges = [tuple(int(v) for v in e) for e in edges]
    weights = [int(w) for w in weights]
    if len(edges) != len(weights):
        raise ValueError("one weight per edge")
    if samples < 2:
        raise ValueError("at least two samples are needed")
    nv = num_vertices if num_vertices is not None else 1 + max(max(e) for e in edges)
    q = [su2_to_quaternion(haar_sample(SpaceSpec("su", 2), rng, samples)) for _ in range(nv)]
    prod = np.ones(samples)
    for (a, b), lam in zip(edges, weights):
        # the half-angle of g_a g_b^{-1} is the angle between the unit quaternions
        cosang = np.clip(np.sum(q[a] * q[b], axis=1), -1.0, 1.0)
        prod *= su2_character(lam, np.arccos(cosang))
    return float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(samples))


def trace_moments(batch, s_max: int) -> np.ndarray:
    """Per-graph (1/N) tr A^s for s = 1..s_max from a sparse batch of graphs."""
    n_tot = batch.N * batch.count
    rows = batch.group * batch.N + batch.i
    cols = batch.group * batch.N + batch.j
    data = np.ones(2 * len(rows))
    A = sp.csr_matrix((data, (np.concatenate([rows, cols]), np.concatenate([cols, rows]))), shape=(n_tot, n_tot))
    out = np.zeros((batch.count, s_max))
    P = sp.identity(n_tot, format="csr")
    powers = [P]
    for _ in range(s_max):
        powers.append(powers[-1] @ A)
    for s in range(1, s_max + 1):
        lo, hi = powers[s // 2], powers[s - s // 2]
        # tr(B C) = sum of the entrywise product of B and C^T; A^j is symmetric
        diag = np.asarray(lo.multiply(hi).sum(axis=1)).ravel()
        out[:, s - 1] = diag.reshape(batch.count, batch.N).sum(axis=1) / batch.N
    return out


def empirical_limit_moments(space: SpaceSpec, N: int, ell: float, graphs: int, s_max: int = 5, rng=None,
                            batch_graphs: int = 2000) -> dict:
    """Mean and standard error of M_{s,N} over simulated graphs at the level L_N."""
    rng = as_rng(rng)
    L = poisson_level(space, N, ell)
    sums = np.zeros(s_max)
    sq = np.zeros(s_max)
    done = 0
    while done < graphs:
        b = min(batch_graphs, graphs - done)
        batch = simulate_sparse_graphs(space, N, L, b, rng)
        m = trace_moments(batch, s_max)
        sums += m.sum(axis=0)
        sq += (m**2).sum(axis=0)
        done += b
    mean = sums / graphs
    var = np.maximum(sq / graphs - mean**2, 0.0)
    return {"mean": mean.tolist(), "stderr": (np.sqrt(var / graphs)).tolist(), "graphs": graphs, "L": L}


def embedding_exponent(pattern, d: int, intensities, trials: int, rng=None) -> float:
    """Least-squares slope of log(embedding count) against log(intensity)."""
    rng = as_rng(rng)
    xs, ys = [], []
    for lam in intensities:
        est = embedding_count_estimate(pattern, d, lam, trials, rng)
        if est <= 0:
            raise NumericalError(f"no embeddings observed at intensity {lam}")
        xs.append(math.log(lam))
        ys.append(math.log(est))
    return float(np.polyfit(xs, ys, 1)[0])
