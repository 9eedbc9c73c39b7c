import itertools

import numpy as np
import pytest

from liegraph.crystal import (
    CharacterElement,
    RelativePolytope,
    StringPolytope,
    character,
    lr_oracle,
    lr_oracle_table,
    lr_polytope,
    lr_polytope_table,
    lr_scaling_check,
    lr_table_csv,
    string_polytope_points,
    weight_multiplicity,
)
from liegraph.errors import ConfigurationError
from liegraph.rootdata import DominantWeight, build_root_system, weyl_dimension

A1 = build_root_system("A", 1)
A2 = build_root_system("A", 2)
ROOTS_A2 = [(2, -1), (-1, 2), (1, 1), (-2, 1), (1, -2), (-1, -1)]


def test_adjoint_has_eight_points():
    pts = string_polytope_points("A2", (1, 1))
    assert len(pts) == 8
    for z in range(2):
        for y in range(3):
            for x in range(4):
                inside = z <= 1 and z <= y <= 1 + z and x <= 1 - 2 * z + y
                assert StringPolytope("A2", (1, 1)).contains((x, y, z)) == inside
                assert (any(np.array_equal(p, (x, y, z)) for p in pts)) == inside


def test_a1_points():
    for k in range(8):
        assert string_polytope_points("A1", (k,))[:, 0].tolist() == list(range(k + 1))


def test_a2_point_count_formula():
    for n1, n2 in itertools.product(range(7), repeat=2):
        count = len(string_polytope_points("A2", (n1, n2)))
        assert count == (n1 + 1) * (n2 + 1) * (n1 + n2 + 2) // 2
        assert count == weyl_dimension(A2, (n1, n2))


def test_a1_point_count_is_dimension():
    for k in range(21):
        assert len(string_polytope_points("A1", (k,))) == weyl_dimension(A1, (k,))


def test_adjoint_multiplicities():
    assert weight_multiplicity("A2", (1, 1), (0, 0)) == 2
    for root in ROOTS_A2:
        assert weight_multiplicity("A2", (1, 1), root) == 1
    assert weight_multiplicity("A2", (1, 1), (3, 0)) == 0


def test_highest_weight_multiplicity_one():
    for lam in [(0, 0), (2, 1), (3, 3), (0, 5)]:
        assert weight_multiplicity("A2", lam, lam) == 1
    assert weight_multiplicity("A2", DominantWeight((2, 1)), DominantWeight((2, 1))) == 1


def test_character_weyl_symmetric():
    ch = character("A2", (2, 1)).to_dict()
    # s1 (a, b) = (-a, a + b), s2 (a, b) = (a + b, -b)
    for (a, b), m in ch.items():
        assert ch.get((-a, a + b)) == m
        assert ch.get((a + b, -b)) == m
    assert sum(ch.values()) == weyl_dimension(A2, (2, 1))


def test_eleven_example():
    lam, mu, nu = (10, 10), (20, 10), (20, 10)
    assert lr_polytope("A2", lam, mu, nu) == 11
    assert lr_oracle("A2", lam, mu, nu) == 11
    # the slice points are (k, 10, 10 - k)
    rel = RelativePolytope("A2", lam, mu)
    pts = rel.points()
    shift = np.asarray(StringPolytope("A2", mu).weight(pts))
    sl = pts[np.all(np.asarray(lam) + shift == np.asarray(nu), axis=1)]
    assert sorted(map(tuple, sl.tolist())) == [(k, 10, 10 - k) for k in range(11)]
    assert all(rel.contains(tuple(p)) for p in sl)


def test_clebsch_gordan_rule():
    for k, l, m in itertools.product(range(7), repeat=3):
        expected = int(abs(k - l) <= m <= k + l and (k + l - m) % 2 == 0)
        assert lr_polytope("A1", (k,), (l,), (m,)) == expected


def test_trivial_factor():
    for lam in [(0, 0), (1, 2), (4, 3)]:
        assert lr_polytope("A2", lam, (0, 0), lam) == 1
        assert lr_polytope_table("A2", lam, (0, 0)) == {lam: 1}


def test_polytope_equals_oracle_exhaustive():
    box = list(itertools.product(range(5), repeat=2))
    for lam in box:
        for mu in box:
            assert lr_polytope_table("A2", lam, mu) == lr_oracle_table("A2", lam, mu), (lam, mu)
    for k, l in itertools.product(range(13), repeat=2):
        assert lr_polytope_table("A1", (k,), (l,)) == lr_oracle_table("A1", (k,), (l,))


def test_dimension_count_and_commutativity():
    rng = np.random.default_rng(0)
    for _ in range(20):
        lam = tuple(int(v) for v in rng.integers(0, 6, 2))
        mu = tuple(int(v) for v in rng.integers(0, 6, 2))
        table = lr_polytope_table("A2", lam, mu)
        assert sum(c * weyl_dimension(A2, nu) for nu, c in table.items()) == weyl_dimension(A2, lam) * weyl_dimension(A2, mu)
        assert table == lr_polytope_table("A2", mu, lam)


def test_lr_support_in_root_lattice():
    # in fundamental coordinates the A2 root lattice is {(a, b): a + 2b = 0 mod 3}
    for lam, mu in itertools.product(itertools.product(range(4), repeat=2), repeat=2):
        for nu in lr_polytope_table("A2", lam, mu):
            d = np.asarray(lam) + np.asarray(mu) - np.asarray(nu)
            assert (d[0] + 2 * d[1]) % 3 == 0
    assert lr_polytope("A2", (1, 0), (1, 0), (1, 0)) == 0


def test_character_product_and_peel():
    a = CharacterElement.from_dict({(0,): 1, (1,): 2})
    b = CharacterElement.from_dict({(-1,): 1, (1,): 1})
    assert (a * b).to_dict() == {(-1,): 1, (0,): 2, (1,): 1, (2,): 2}
    c = CharacterElement.from_dict({(0,): 3, (1,): 1})
    c.subtract(CharacterElement.from_dict({(0,): 1}), 3)
    assert c.to_dict() == {(1,): 1}
    assert c.coefficient((5,)) == 0
    with pytest.raises(ArithmeticError):
        c.subtract(CharacterElement.from_dict({(7,): 1}))


def test_scaling_a1_constant():
    rows = lr_scaling_check("A1", (1,), (1,), [10, 20, 40])
    for row in rows:
        assert row["one"] == pytest.approx((row["t"] + 1) / row["t"])
    diffs = [abs(rows[i + 1]["one"] - rows[i]["one"]) for i in range(2)]
    assert diffs[1] <= diffs[0] / 1.9


def test_scaling_a2_cauchy():
    rows = lr_scaling_check("A2", (1, 1), (2, 1), [10, 20, 40])
    for key in ("one", "z1", "z2"):
        d1 = abs(rows[1][key] - rows[0][key])
        d2 = abs(rows[2][key] - rows[1][key])
        C = d1 * 20
        assert d2 <= C / 40 * 1.05


def test_scaling_support_a1():
    # a test function living outside [|x - y|, x + y] sees no mass
    x, y = (3,), (1,)
    f = {"out": lambda z: ((z[:, 0] > 4.5) | (z[:, 0] < 1.5)).astype(float)}
    for row in lr_scaling_check("A1", x, y, [10, 20, 40], functionals=f):
        assert row["out"] == 0.0


def test_family_and_dominance_guards():
    with pytest.raises(ConfigurationError):
        string_polytope_points("B2", (1, 1))
    with pytest.raises(ConfigurationError):
        string_polytope_points("A2", (1, -1))
    with pytest.raises(ConfigurationError):
        lr_polytope("A2", (1,), (1, 1), (1, 1))


def test_lr_table_csv():
    text = lr_table_csv("A1", [((1,), (1,))])
    assert text.splitlines() == ["lambda,mu,nu,c", "1,1,0,1", "1,1,2,1"]
