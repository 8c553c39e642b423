from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from l96gen.gmap import (
    G0, G1, G2, G3, G5, G6, G7, G8,
    GMap, GMapSyntaxError, basis, bilinear, energy_constraint_matrix, evaluate,
    is_energy_preserving, linearization_kernel_dim, linearize_at, named, parse, tilde,
)

ALL_NAMED = [named(f"G{i}") for i in range(9)]


def l96_loop(x):
    n = len(x)
    return np.array([x[(i - 1) % n] * (x[(i + 1) % n] - x[(i - 2) % n]) for i in range(n)])


@st.composite
def combos(draw, k=3):
    """Random integer combination of the k-basis (exact coefficients)."""
    maps = basis(k)
    cs = draw(st.lists(st.integers(-3, 3), min_size=len(maps), max_size=len(maps)))
    g = GMap()
    for c, m in zip(cs, maps):
        g = g + c * m
    return g


@st.composite
def states(draw, n_min=8, n_max=24):
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    return np.random.default_rng(seed).uniform(-10, 10, n)


def test_g3_component_zero_by_hand():
    x = np.arange(1.0, 7.0)
    assert evaluate(G3, x)[0] == -18.0


def test_g3_matches_scalar_loop(rng):
    x = rng.normal(size=13)
    np.testing.assert_allclose(evaluate(G3, x), l96_loop(x), atol=1e-13)


@pytest.mark.parametrize("g", ALL_NAMED[1:], ids=lambda g: g.name)
def test_constant_input_vanishes(g):
    assert np.allclose(evaluate(g, 2.5 * np.ones(10)), 0)


def test_period_three_data_is_stationary_for_g3():
    x = np.array([1.0, -2.0, 0.5] * 2)
    assert np.allclose(evaluate(G3, x), 0)


def test_size_check_names_minimum():
    with pytest.raises(ValueError, match="N >= 6"):
        evaluate(G3, np.ones(5))
    evaluate(G7, np.ones(4), allow_aliasing=True)


def test_bilinear_against_difference_oracle(rng):
    x, y = rng.normal(size=(2, 12))
    for g in (G3, G5, G8):
        # polarization with G = B(x, x) / 2
        np.testing.assert_allclose(bilinear(g, x, y), (evaluate(g, x + y) - evaluate(g, x - y)) / 2, atol=1e-12)
        np.testing.assert_allclose(bilinear(g, x, x), 2 * evaluate(g, x), atol=1e-12)


def test_bilinear_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        bilinear(G3, np.ones(8), np.ones(9))


def test_linearization_first_row_and_fd(rng):
    n = 11
    a = linearize_at(G3, np.ones(n))
    row = np.zeros(n)
    row[1], row[n - 2] = 1, -1
    np.testing.assert_array_equal(a[0], row)
    assert not linearize_at(G3, np.zeros(n)).any()
    x0 = rng.normal(size=n)
    h = 1e-5
    fd = np.column_stack([(evaluate(G3, x0 + h * e) - evaluate(G3, x0 - h * e)) / (2 * h) for e in np.eye(n)])
    np.testing.assert_allclose(fd, linearize_at(G3, x0), rtol=1e-6, atol=1e-9)


def test_basis_sizes_and_first_element():
    assert [len(basis(k)) for k in (1, 2, 3)] == [2, 6, 12]
    assert basis(1)[0] == GMap.from_terms([(1, 1, 1), (0, -1, -1)])
    for k in (1, 2, 3):
        assert all(is_energy_preserving(g).ok and is_energy_preserving(g).exact for g in basis(k))
    with pytest.raises(ValueError):
        basis(4)


def test_basis_independent():
    maps = basis(3)
    keys = sorted({(t.a, t.b) for g in maps for t in g.terms})
    m = np.array([[float(dict(((t.a, t.b), t.coeff) for t in g.terms).get(key, 0)) for key in keys] for g in maps])
    assert np.linalg.matrix_rank(m) == 12


@pytest.mark.parametrize("k,n,want", [(1, 5, 2), (2, 7, 6), (3, 9, 12), (3, 11, 12)])
def test_constraint_nullity(k, n, want):
    m = energy_constraint_matrix(k, n)
    assert m.shape[1] - np.linalg.matrix_rank(m) == want


def test_violation_certificate():
    bad = GMap.from_terms([(1, 1, 1)])
    cert = is_energy_preserving(bad)
    assert not cert and cert.violations[0] == ((0, 1, 1), Fraction(1))


def test_tilde_examples(rng):
    assert tilde(G1) == GMap.from_terms([(-1, -1, 1), (0, 1, -1)])
    assert tilde(G7) == -G7
    x = rng.normal(size=10)
    tau = lambda v: np.roll(v[::-1], 1)
    for g in (G1, G3, G5, G6):
        np.testing.assert_allclose(evaluate(tilde(g), x), tau(evaluate(g, tau(x))), atol=1e-12)
        assert tilde(tilde(g)) == g


def test_parse_examples():
    assert parse("G3").resolved == G3
    assert parse(" G3 - ~G3 ").resolved == G7
    g0 = parse("G3 - 2*~G3 + ~G1 - G2").resolved
    assert g0 == G0
    assert not linearize_at(g0, np.ones(10)).any()
    assert parse("0.5*G5 + 1.5*~G6").resolved == Fraction(1, 2) * G5 + Fraction(3, 2) * tilde(G6)


@pytest.mark.parametrize("src,pos", [("", 0), ("G9", 0), ("G3 +", 4), ("2 G3", 2), ("G3 * G1", 3), ("G3 $ G1", 3)])
def test_parse_errors_carry_position(src, pos):
    with pytest.raises(GMapSyntaxError) as err:
        parse(src)
    assert err.value.position == pos


def test_kernel_dims():
    assert [linearization_kernel_dim(k) for k in (1, 2, 3)] == [0, 2, 6]


def test_json_round_trip():
    for g in (G3, G8, 0.3 * G5):
        assert GMap.from_json(g.to_json()) == g


# properties

@given(combos(), st.integers(0, 2**32 - 1))
def test_energy_preservation_property(g, seed):
    assert is_energy_preserving(g).ok
    x = np.random.default_rng(seed).uniform(-10, 10, (20, 14))
    val = np.abs(np.sum(x * evaluate(g, x), axis=-1))
    assert np.all(val <= 1e-9 * np.linalg.norm(x, axis=-1) ** 3)


@given(combos(), states(), st.integers(1, 7))
def test_equivariance_property(g, x, m):
    np.testing.assert_allclose(evaluate(g, np.roll(x, m)), np.roll(evaluate(g, x), m), atol=1e-12)


@given(combos(), states(), st.floats(-5, 5))
def test_quadratic_homogeneity_property(g, x, lam):
    np.testing.assert_allclose(evaluate(g, lam * x), lam**2 * evaluate(g, x), rtol=1e-12, atol=1e-9)


@given(combos(), states(), st.integers(0, 2**32 - 1))
def test_taylor_identity_property(g, x0, seed):
    y = np.random.default_rng(seed).uniform(-10, 10, x0.size)
    lhs = evaluate(g, x0 + y)
    rhs = evaluate(g, x0) + linearize_at(g, x0) @ y + evaluate(g, y)
    scale = max(1.0, np.abs(lhs).max())
    assert np.abs(lhs - rhs).max() <= 1e-10 * scale


@given(combos(k=2), states(), st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_bilinearity_property(g, x, seed, a):
    y, z = np.random.default_rng(seed).normal(size=(2, x.size))
    lhs = bilinear(g, x, a * y + z)
    np.testing.assert_allclose(lhs, a * bilinear(g, x, y) + bilinear(g, x, z), atol=1e-9)


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-8, 8)), max_size=6))
def test_certificate_agrees_with_monte_carlo(terms):
    g = GMap.from_terms([(a, b, 0.25 * c) for a, b, c in terms])
    x = np.random.default_rng(0).uniform(-10, 10, (100, 9))
    mc = np.abs(np.sum(x * evaluate(g, x), axis=-1)).max() <= 1e-10 * np.linalg.norm(x, axis=-1).max() ** 3
    assert is_energy_preserving(g).ok == mc
