import math

import numpy as np
import pytest
from scipy.integrate import quad

from liegraph.crystal import lr_polytope
from liegraph.errors import ConfigurationError, OutOfRangeError
from liegraph.gaussian import limiting_eigenvalue, su2_closed_form
from liegraph.geometry import SpaceSpec, poisson_level
from liegraph.moments import (
    _su2_profile,
    _su2_profile_antiderivative,
    c_coeff,
    clebsch_gordan_density,
    graph_functional_estimate,
    limiting_moments,
    moment_polynomial,
    moment_upper_bound,
    one_vertex_integral,
    su2_character,
    trace_moments,
    two_vertex_integral_su2,
)
from liegraph.poisson import ball_volume, simulate_sparse_graphs
from liegraph.rootdata import build_root_system, volumes, weyl_dimension
from liegraph.util import make_rng

A1 = build_root_system("A", 1)
A2 = build_root_system("A", 2)
VOL_T = volumes(A1)["vol_t_mod_tZ"]
VOL_G = volumes(A1)["vol_G_kp"]

# frozen quadrature values (SU(2), metric units)
I2 = 1 / (12 * math.pi)
I3 = 5 / (1536 * math.pi**2)
I221 = 4.407029e-6


@pytest.fixture(scope="module")
def table():
    return limiting_moments(1.0, 7, rng=make_rng(0))


def test_c_coeff_trivial_weight():
    assert c_coeff(A2, (0, 0), 1.0) == pytest.approx(limiting_eigenvalue(A2, (0, 0), 1.0))


def test_c_coeff_su2():
    for k in range(6):
        assert c_coeff(A1, (k,), 1.2) == pytest.approx((k + 1) * su2_closed_form(k, 1.2), rel=1e-10, abs=1e-15)


def test_c_coeff_parseval_bound():
    L = 1.0
    total = sum(c_coeff(A1, (k,), L) ** 2 for k in range(60))
    assert total <= limiting_eigenvalue(A1, (0,), L) * (1 + 1e-12)


def test_I2_matches_mean_degree():
    lhs = one_vertex_integral(A1, 2) / VOL_T
    rhs = ball_volume(3) / VOL_G
    assert lhs == pytest.approx(rhs, rel=1e-4)
    assert one_vertex_integral(A1, 2) == pytest.approx(I2, rel=1e-6)


def test_I3_closed_value():
    assert one_vertex_integral(A1, 3) == pytest.approx(I3, rel=1e-6)


def test_I3_stable_under_radius_doubling():
    a = one_vertex_integral(A1, 3, base_periods=4)
    b = one_vertex_integral(A1, 3, base_periods=8)
    assert abs(a - b) <= 1e-6 * abs(a)


@pytest.mark.parametrize("k", [2, 4, 6])
def test_even_I_positive(k):
    assert one_vertex_integral(A1, k) > 0


def test_A2_I2_positive_and_rank_guard():
    assert one_vertex_integral(A2, 2) > 0
    with pytest.raises(ConfigurationError):
        one_vertex_integral(build_root_system("A", 3), 2)
    with pytest.raises(ValueError):
        one_vertex_integral(A1, 1)


def test_profile_antiderivative_matches_quadrature():
    for a, b in ((0.0, 1.0), (0.3, 4.2), (2.0, 15.0)):
        ref = quad(lambda x: float(_su2_profile(np.array(x))), a, b, epsabs=1e-13)[0]
        got = float(_su2_profile_antiderivative(np.array(b)) - _su2_profile_antiderivative(np.array(a)))
        assert got == pytest.approx(ref, rel=1e-9, abs=1e-13)


def test_clebsch_gordan_mass():
    q = clebsch_gordan_density()
    assert q == pytest.approx(VOL_T / 2)
    for x, y in ((1.0, 2.5), (3.0, 0.4), (2.0, 2.0)):
        mass = quad(lambda z: q * (abs(x - y) <= z <= x + y), 0, x + y + 1, points=[abs(x - y), x + y])[0]
        assert mass == pytest.approx(2 * min(x, y) * q, rel=1e-8)


def test_two_vertex_value_and_symmetry():
    val = two_vertex_integral_su2((2, 2, 1))
    assert val == pytest.approx(I221, rel=1e-5)
    assert two_vertex_integral_su2((1, 2, 2)) == val
    assert two_vertex_integral_su2((3, 2, 1)) == two_vertex_integral_su2((2, 1, 3))


def test_two_vertex_guards():
    with pytest.raises(ConfigurationError):
        two_vertex_integral_su2((2, 2, 2, 1))
    with pytest.raises(ConfigurationError):
        two_vertex_integral_su2((2, 2, 2))
    with pytest.raises(ValueError):
        two_vertex_integral_su2((2, 1, 1))


def test_low_moments(table):
    lp = 1.0 / VOL_T
    assert table.ell_prime == pytest.approx(lp)
    assert table.M[2] == pytest.approx(I2 * lp, rel=1e-6)
    assert table.M[3] == pytest.approx(I3 * lp**2, rel=1e-6)
    I4 = table.I["loop4"]
    assert table.M[4] == pytest.approx(I4 * lp**3 + 2 * I2**2 * lp**2 + I2 * lp, rel=1e-6)
    I5 = table.I["loop5"]
    assert table.M[5] == pytest.approx(I5 * lp**4 + 5 * I3 * I2 * lp**3 + 5 * I3 * lp**2, rel=1e-6)


def test_M6_contains_theta_term(table):
    rec = next(r for r in table.terms[6] if r["reduced"] == "theta(2,2,1)")
    assert rec["multiplicity"] == 9
    assert rec["value"] == pytest.approx(9 * I221 * table.ell_prime**3, rel=1e-5)
    assert all(r["provenance"] == "quadrature" for r in table.terms[6])


def test_M7_provenance(table):
    prov = {r["reduced"]: r["provenance"] for r in table.terms[7]}
    assert prov["theta(2,2,2,1)"] == "simulated"
    assert prov["theta(2,2,1)"] == "quadrature"
    sim = [r for r in table.terms[7] if r["provenance"] == "simulated"]
    assert all(r["stderr"] > 0 for r in sim)


def test_table_json(table):
    import json

    data = json.loads(table.to_json())
    assert set(data) == {"ell", "ell_prime", "I", "M", "terms"}
    assert data["M"]["2"] == pytest.approx(table.M[2])


def test_limiting_moments_guards():
    with pytest.raises(ConfigurationError):
        limiting_moments(1.0, 8)
    with pytest.raises(OutOfRangeError):
        limiting_moments(0.0, 4)
    with pytest.raises(ConfigurationError):
        limiting_moments(1.0, 4, rs=A2)


def test_moments_polynomial_in_ell(table):
    ells = (0.5, 1.0, 2.0, 4.0)
    tabs = [limiting_moments(e, 7, simulate_trials=4000, rng=make_rng(0)) for e in ells]
    x = np.array([t.ell_prime for t in tabs])
    for s in range(2, 8):
        coeffs = moment_polynomial(s, simulate_trials=4000, rng=make_rng(0))
        assert len(coeffs) == s
        assert min(coeffs) >= 0 and coeffs[0] == 0 and coeffs[-1] > 0
        ys = np.array([t.M[s] for t in tabs])
        assert np.allclose(np.polyval(coeffs[::-1], x), ys, rtol=1e-10)
        if s <= 4:
            # four levels determine a cubic: the fit recovers the coefficients
            fit = np.polyfit(x, ys, s - 1)[::-1]
            assert np.allclose(fit, coeffs, rtol=1e-6, atol=1e-12 * max(coeffs))


def test_moment_upper_bound(table):
    for s2 in (2, 4, 6):
        assert table.M[s2] <= moment_upper_bound(s2, 1.0)
    assert moment_upper_bound(2, 1.0) == pytest.approx(ball_volume(3) / VOL_G)
    with pytest.raises(ValueError):
        moment_upper_bound(3, 1.0)


def test_su2_character_values():
    assert su2_character(0, 0.7) == pytest.approx(1.0)
    assert su2_character(2, 0.0) == pytest.approx(3.0)
    assert su2_character(3, math.pi) == pytest.approx(-4.0)
    t = 0.4
    assert su2_character(2, t) == pytest.approx(1 + 2 * math.cos(2 * t))


def test_graph_functional_loop_is_dimension():
    for k in (0, 1, 4):
        est, se = graph_functional_estimate([(0, 0)], [k], 50, make_rng(1))
        assert est == pytest.approx(weyl_dimension(A1, (k,)))
        assert se == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("w", [(1, 1, 1), (2, 2, 2), (1, 1, 2), (2, 1, 1), (3, 2, 1)])
def test_graph_functional_theta_is_lr(w):
    est, se = graph_functional_estimate([(0, 1), (0, 1), (0, 1)], w, 100_000, make_rng(2, *w))
    target = lr_polytope("A1", (w[0],), (w[1],), (w[2],))
    assert abs(est - target) < 3 * se + 1e-12


def test_graph_functional_spin_one_triple():
    # three spin-1 representations (highest weight 2) contain the trivial one once
    est, se = graph_functional_estimate([(0, 1)] * 3, (2, 2, 2), 100_000, make_rng(3))
    assert abs(est - 1) < 3 * se


def test_trace_moments_against_dense():
    space = SpaceSpec("su", 2)
    batch = simulate_sparse_graphs(space, 120, poisson_level(space, 120, 3.0), 3, make_rng(4))
    got = trace_moments(batch, 5)
    for g in range(3):
        A = np.zeros((120, 120))
        for v, nbrs in enumerate(batch.adjacency(g)):
            A[v, list(nbrs)] = 1
        ref = [np.trace(np.linalg.matrix_power(A, s)) / 120 for s in range(1, 6)]
        assert np.allclose(got[g], ref)
    assert np.allclose(got[:, 0], 0)
