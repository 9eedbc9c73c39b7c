import math

import numpy as np
import pytest

from liegraph.errors import AdvisoryError, OutOfRangeError
from liegraph.gaussian import (
    TIE_TOL,
    limiting_eigenvalue,
    limiting_eigenvalue_quadrature,
    limiting_spectrum,
    spectral_radius_gap,
    spectrum_rows,
    su2_closed_form,
)
from liegraph.geometry import SpaceSpec, haar_sample
from liegraph.rootdata import build_root_system, weyl_dimension

A1 = build_root_system("A", 1)
A2 = build_root_system("A", 2)
S2 = math.sqrt(2)


def su2_by_hand(k, L):
    if k == 0:
        return (L / S2 - math.sin(L / S2)) / (2 * math.pi)
    a = L / (2 * S2)
    return (math.sin(k * a) / k - math.sin((k + 2) * a) / (k + 2)) / (math.pi * (k + 1))


@pytest.mark.parametrize("L", [math.pi / 4, math.pi / 2, 1.0, 3.0])
def test_su2_bessel_sum_matches_closed_form(L):
    for k in range(21):
        want = su2_by_hand(k, L)
        assert limiting_eigenvalue(A1, [k], L) == pytest.approx(want, abs=1e-10)
        assert su2_closed_form(k, L) == pytest.approx(want, abs=1e-14)


def test_su2_quadrature_k3():
    assert limiting_eigenvalue_quadrature(A1, [3], 1.0) == pytest.approx(limiting_eigenvalue(A1, [3], 1.0), abs=1e-8)


def test_su3_adjoint_quadrature():
    assert limiting_eigenvalue_quadrature(A2, [1, 1], 0.8) == pytest.approx(
        limiting_eigenvalue(A2, [1, 1], 0.8), abs=1e-6 * limiting_eigenvalue(A2, [0, 0], 0.8))


@pytest.mark.parametrize("L", [0.5, 1.0, 2.0])
def test_bessel_sum_and_quadrature_agree(L):
    for k in range(6):
        assert limiting_eigenvalue_quadrature(A1, [k], L) == pytest.approx(limiting_eigenvalue(A1, [k], L), abs=1e-8)
    c0 = limiting_eigenvalue(A2, [0, 0], L)
    for a in range(6):
        for b in range(6):
            q = limiting_eigenvalue_quadrature(A2, [a, b], L)
            assert q == pytest.approx(limiting_eigenvalue(A2, [a, b], L), abs=1e-6 * c0)


def test_trivial_line_is_ball_fraction_su2():
    # c_0 is the Haar measure of the ball of radius L; on S^3 of radius 2 sqrt 2 this is (t - sin t)/pi, t = L/sqrt 2
    L = 1.3
    t = L / S2
    assert limiting_eigenvalue(A1, [0], L) == pytest.approx((t - math.sin(t)) / (2 * math.pi), rel=1e-12)


def test_level_outside_valid_range():
    with pytest.raises(OutOfRangeError):
        limiting_eigenvalue(A1, [0], math.pi)
    with pytest.raises(OutOfRangeError):
        limiting_spectrum(A2, 4.0)


def test_su2_spectrum_head():
    lines = limiting_spectrum(A1, math.pi / 2)
    assert lines[0].lam.coords == (0,) and lines[0].multiplicity == 1
    assert lines[1].lam.coords == (1,) and lines[1].multiplicity == 4
    assert lines[0].c > lines[1].c


@pytest.mark.parametrize("rs", [A1, A2, build_root_system("B", 2), build_root_system("C", 2)], ids=lambda r: r.name)
def test_trivial_line_dominates(rs):
    for L in (0.4, 1.0, 2.5):
        lines = limiting_spectrum(rs, L, cutoff=15.0)
        c0 = next(s.c for s in lines if not any(s.lam.coords))
        assert all(abs(s.c) <= c0 * (1 + 1e-12) for s in lines)
        assert all(s.multiplicity == weyl_dimension(rs, s.lam) ** 2 for s in lines)


def test_spectrum_sorted_and_deterministic():
    a = limiting_spectrum(A2, 1.0, 20.0)
    b = limiting_spectrum(A2, 1.0, 20.0)
    assert a == b
    cs = np.array([s.c for s in a])
    # values within the absolute tie tolerance are ordered lexicographically instead
    assert np.all(np.diff(cs) <= TIE_TOL)


def test_empty_when_cutoff_zero():
    assert limiting_spectrum(A1, 1.0, 0.0) == []


def test_su2_gap_closed_form():
    L = math.pi / 2
    g = spectral_radius_gap(A1, L)
    assert g["radius_coeff"] == pytest.approx(su2_by_hand(0, L), rel=1e-10)
    assert g["gap_coeff"] == pytest.approx(su2_by_hand(0, L) - su2_by_hand(1, L), rel=1e-8)
    assert g["maximizer"] == (1,)


def test_su3_gap_maximizer_is_fundamental():
    for L in (0.5, 1.0, 1.5):
        assert spectral_radius_gap(A2, L, cutoff=15.0)["maximizer"] in {(1, 0), (0, 1)}


def test_gap_vanishes_as_level_shrinks():
    gaps = [spectral_radius_gap(A1, L)["gap_coeff"] for L in (0.4, 0.1, 0.025)]
    assert gaps[0] > gaps[1] > gaps[2] > 0
    assert gaps[2] < 1e-6


def test_gap_needs_two_lines():
    with pytest.raises(AdvisoryError):
        spectral_radius_gap(A1, 1.0, cutoff=0.6)


def test_parseval_bound_su2():
    L = 1.2
    lines = limiting_spectrum(A1, L, cutoff=200.0)
    total = sum(s.multiplicity * s.c**2 for s in lines)
    # ||Z_L||^2 = Haar measure of the ball, estimated by Monte Carlo
    space = SpaceSpec("su", 2)
    rng = np.random.default_rng(5)
    pts = haar_sample(space, rng, 20001)
    from liegraph.geometry import su2_to_quaternion

    q = su2_to_quaternion(pts)
    dist = 2 * S2 * np.arccos(np.clip(q[1:] @ q[0], -1, 1))
    hits = (dist <= L).astype(float)
    mc, se = hits.mean(), hits.std() / math.sqrt(len(hits))
    assert total <= mc + 3 * se
    # the truncated sum approaches ||Z_L||^2 = c_0 from below
    c0 = limiting_eigenvalue(A1, [0], L)
    assert 0.99 * c0 < total <= c0


def test_parseval_bound_su3():
    L = 1.0
    lines = limiting_spectrum(A2, L, cutoff=40.0)
    total = sum(s.multiplicity * s.c**2 for s in lines)
    assert total <= limiting_eigenvalue(A2, [0, 0], L) * (1 + 1e-9)


def test_rows_format():
    rows = spectrum_rows(limiting_spectrum(A2, 1.0, 8.0))
    assert set(rows[0]) == {"lambda_coords", "c", "multiplicity"}
    assert rows[0]["lambda_coords"] == "0 0"


def test_top_eigenvalue_bias_shrinks_with_N():
    # finite-N top eigenvalue / N overshoots c_0; numpy's eigvalsh keeps the larger sizes cheap
    from liegraph.geometry import build_geometric_graph
    from liegraph.util import make_rng

    L = math.pi / 2
    c0 = limiting_eigenvalue(A1, [0], L)
    space = SpaceSpec("su", 2)
    bias = []
    for N in (100, 400, 1600):
        tops = [np.linalg.eigvalsh(build_geometric_graph(space, N, L, make_rng(9, N, k)).adjacency.astype(float))[-1] / N
                for k in range(8)]
        bias.append(np.mean(tops) / c0 - 1)
    assert bias[0] > bias[1] > bias[2] > 0
    assert bias[2] < 0.10
