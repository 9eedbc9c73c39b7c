"""Limiting eigenvalues of geometric graphs at fixed level L (Gaussian regime).

The adjacency operator of the graph, divided by N, converges to convolution
by the indicator of the ball of radius L. Each irreducible representation
lambda contributes one eigenvalue c_lambda with multiplicity d_lambda^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_g
from .errors import AdvisoryError, ConfigurationError, NumericalError, OutOfRangeError
from .rootdata import (
    DominantWeight,
    RootSystem,
    enumerate_dominant_weights,
    volumes,
    weyl_dimension,
)

__all__ = [
    "SpectralLine",
    "DEFAULT_RMAX",
    "limiting_eigenvalue",
    "limiting_eigenvalues",
    "limiting_eigenvalue_quadrature",
    "limiting_spectrum",
    "spectral_radius_gap",
    "su2_closed_form",
    "spectrum_rows",
]

DEFAULT_RMAX = 40.0
TIE_TOL = 1e-14


@dataclass(frozen=True)
class SpectralLine:
    lam: DominantWeight
    c: float
    multiplicity: int


def _check_level(L: float):
    if not (0.0 < L < math.pi):
        raise OutOfRangeError(f"level L must satisfy 0 < L < pi (torus reduction), got L={L}")


def _coords(lam) -> tuple[int, ...]:
    return lam.coords if isinstance(lam, DominantWeight) else tuple(int(c) for c in lam)


def limiting_eigenvalues(rs: RootSystem, lams, L: float) -> np.ndarray:
    """Vectorized c_lambda for a list of dominant weights."""
    _check_level(L)
    coords = [_coords(lam) for lam in lams]
    if not coords:
        return np.zeros(0)
    dims = np.array([weyl_dimension(rs, c) for c in coords], dtype=float)
    vol_t = volumes(rs)["vol_t_mod_tZ"]
    _, _, eps = rs.weyl_arrays()
    orbit = rs.weyl_orbit(rs.rho)
    shifted = rs.to_vector(np.array(coords, float)) + rs.rho
    args = L * (shifted[:, None, :] - orbit[None, :, :])
    vals = bessel_g(rs.rank / 2.0, rs.norm(args))
    alt = vals @ eps
    d = rs.rank
    return (L / math.sqrt(2.0 * math.pi)) ** d * alt / (dims * vol_t)


def limiting_eigenvalue(rs: RootSystem, lam, L: float) -> float:
    """c_lambda = (L/sqrt(2pi))^d / (d_lambda vol_t) * sum_w eps(w) J~(L(lambda+rho-w rho))."""
    return float(limiting_eigenvalues(rs, [lam], L)[0])


def su2_closed_form(k: int, L: float) -> float:
    """Elementary form of c_k for SU(2)."""
    s = 2.0 * math.sqrt(2.0)
    if k == 0:
        return (L / math.sqrt(2.0) - math.sin(L / math.sqrt(2.0))) / (2.0 * math.pi)
    return (math.sin(k * L / s) / k - math.sin((k + 2) * L / s) / (k + 2)) / (math.pi * (k + 1))


def _torus_frame(rs: RootSystem) -> np.ndarray:
    """Euclidean orthonormal basis (ambient x d) of the span of the roots."""
    q, _ = np.linalg.qr(rs.simple_roots.T)
    return q


def _quadrature_value(rs, lam_vec, L, n_r, n_phi) -> float:
    d = rs.rank
    inv = 1.0 / float(rs.e_norm_sq)
    radius = L / math.sqrt(inv)  # Euclidean radius of the Killing ball of radius L
    frame = _torus_frame(rs)
    _, _, eps = rs.weyl_arrays()
    top = rs.weyl_orbit(lam_vec + rs.rho)
    bottom = rs.weyl_orbit(rs.rho)
    if d == 1:
        nodes, weights = np.polynomial.legendre.leggauss(n_r)
        a = radius * nodes[:, None]
        w = radius * weights
    elif d == 2:
        nodes, weights = np.polynomial.legendre.leggauss(n_r)
        r = 0.5 * radius * (nodes + 1.0)
        wr = 0.5 * radius * weights * r
        phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
        a = (r[:, None, None] * np.stack([np.cos(phi), np.sin(phi)], axis=-1)[None]).reshape(-1, 2)
        w = (wr[:, None] * np.full(n_phi, 2.0 * math.pi / n_phi)[None]).ravel()
    else:
        raise ConfigurationError("quadrature oracle limited to rank <= 2")
    theta = a @ frame.T
    ph_top = np.exp(1j * theta @ top.T) @ eps
    ph_bot = np.exp(1j * theta @ bottom.T) @ eps
    integrand = np.real(ph_top * np.conj(ph_bot))
    # Killing volume element is inv^{d/2} da
    return float(np.sum(w * integrand)) * inv ** (d / 2.0)


def limiting_eigenvalue_quadrature(rs: RootSystem, lam, L: float, tol: float = 1e-11,
                                   n_start: int = 32, n_max: int = 1024) -> float:
    """Independent oracle: integrate chi_lambda |Delta|^2 over the Killing ball in t.

    Uses the character ratio A_{lambda+rho}/A_rho, so the integrand is
    Re[A_{lambda+rho}(X) conj A_rho(X)]; Gauss-Legendre in the radius and the
    trapezoid rule in the angle (exact for trigonometric polynomials).
    """
    _check_level(L)
    if rs.rank > 2:
        raise ConfigurationError("quadrature oracle limited to rank <= 2")
    coords = _coords(lam)
    lam_vec = rs.to_vector(np.array(coords, float))
    vol_t = volumes(rs)["vol_t_mod_tZ"]
    norm = 1.0 / (weyl_dimension(rs, coords) * rs.weyl_order * (2.0 * math.pi) ** rs.rank * vol_t)
    n = n_start
    prev = None
    while n <= n_max:
        val = _quadrature_value(rs, lam_vec, L, n, 2 * n) * norm
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        prev = val
        n *= 2
    raise NumericalError(f"quadrature did not converge for {coords} at L={L} (last change {abs(val - prev):.2e})")


def _sort_lines(lines: list[SpectralLine]) -> list[SpectralLine]:
    lines = sorted(lines, key=lambda s: (-s.c, s.lam.coords))
    out: list[SpectralLine] = []
    i = 0
    while i < len(lines):
        j = i + 1
        while j < len(lines) and abs(lines[j].c - lines[i].c) <= TIE_TOL:
            j += 1
        out.extend(sorted(lines[i:j], key=lambda s: s.lam.coords))
        i = j
    return out


def limiting_spectrum(rs: RootSystem, L: float, cutoff: float = DEFAULT_RMAX) -> list[SpectralLine]:
    """One line per dominant weight with L * ||lambda + rho|| <= cutoff, sorted by c descending."""
    _check_level(L)
    if cutoff <= 0:
        return []
    lams = enumerate_dominant_weights(rs, cutoff / L)
    cs = limiting_eigenvalues(rs, lams, L)
    lines = [SpectralLine(lam, float(c), weyl_dimension(rs, lam) ** 2) for lam, c in zip(lams, cs)]
    return _sort_lines(lines)


def spectral_radius_gap(rs: RootSystem, L: float, cutoff: float = DEFAULT_RMAX) -> dict:
    """c_0 and c_0 - max_{lambda != 0} c_lambda over the cutoff window."""
    lines = limiting_spectrum(rs, L, cutoff)
    if len(lines) < 2:
        raise AdvisoryError(f"cutoff {cutoff} leaves {len(lines)} spectral line(s); need at least 2")
    zero = next((s for s in lines if not any(s.lam.coords)), None)
    if zero is None:
        raise AdvisoryError("trivial representation outside the cutoff window")
    rest = [s for s in lines if any(s.lam.coords)]
    best = max(rest, key=lambda s: (s.c, tuple(-c for c in s.lam.coords)))
    return {
        "radius_coeff": zero.c,
        "gap_coeff": zero.c - best.c,
        "maximizer": best.lam.coords,
    }


def spectrum_rows(lines: list[SpectralLine]) -> list[dict]:
    return [
        {"lambda_coords": " ".join(str(c) for c in s.lam.coords), "c": s.c, "multiplicity": s.multiplicity}
        for s in lines
    ]
