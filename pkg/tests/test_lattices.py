import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from latticecast.lattices import (
    DimensionMismatch,
    DimensionTooLarge,
    LatticeSpec,
    brute_force_nearest,
    count_points_in_ball,
    geometry,
    mod_lattice,
    quantize,
    scale_to_covering,
    unit_ball_volume,
)


def _roots(n: int) -> np.ndarray:
    """The 2n(n-1) vectors +-e_i +- e_j."""
    out = []
    for i, j in itertools.combinations(range(n), 2):
        for si, sj in itertools.product((1, -1), repeat=2):
            v = np.zeros(n)
            v[i], v[j] = si, sj
            out.append(v)
    return np.array(out)


def _e8_minimal_vectors() -> np.ndarray:
    half = np.array([s for s in itertools.product((0.5, -0.5), repeat=8) if sum(x < 0 for x in s) % 2 == 0])
    return np.vstack([_roots(8), half])


def _in_e8(v) -> bool:
    v = np.asarray(v)
    ints = np.allclose(v, np.round(v))
    halves = np.allclose(v - 0.5, np.round(v - 0.5))
    return (ints or halves) and abs(round(v.sum()) - v.sum()) < 1e-9 and round(v.sum()) % 2 == 0


def _in_dn(v) -> bool:
    v = np.asarray(v)
    return np.allclose(v, np.round(v)) and round(v.sum()) % 2 == 0


# --- generators and geometry -----------------------------------------------


def test_e8_minimal_vectors_count_and_membership():
    mv = _e8_minimal_vectors()
    assert len(mv) == 240
    assert all(_in_e8(v) for v in mv)
    assert np.allclose(np.sum(mv**2, axis=1), 2.0)


def test_e8_generator_spans_e8():
    e8 = LatticeSpec("E8", 8)
    assert abs(np.linalg.det(e8.generator)) == pytest.approx(1.0)
    assert all(_in_e8(col) for col in e8.generator.T)
    # every minimal vector has integer coordinates in the basis
    coeffs = _e8_minimal_vectors() @ e8.inverse.T
    assert np.allclose(coeffs, np.round(coeffs))


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_dn_generator_spans_dn(n):
    d = LatticeSpec("Dn", n)
    assert abs(np.linalg.det(d.generator)) == pytest.approx(2.0)
    assert all(_in_dn(col) for col in d.generator.T)
    coeffs = _roots(n) @ d.inverse.T
    assert np.allclose(coeffs, np.round(coeffs))


@pytest.mark.parametrize(
    "family, n, scale, volume, r_cov, r_eff",
    [
        ("Zn", 1, 1.0, 1.0, 0.5, 0.5),
        ("Zn", 2, 1.0, 1.0, math.sqrt(2) / 2, 1 / math.sqrt(math.pi)),
        ("E8", 8, 1.0, 1.0, 1.0, (1 / (math.pi**4 / 24)) ** (1 / 8)),
        ("Dn", 2, 1.0, 2.0, 1.0, math.sqrt(2 / math.pi)),
        ("Zn", 3, 2.0, 8.0, math.sqrt(3), 2 * (3 / (4 * math.pi)) ** (1 / 3)),
    ],
)
def test_geometry_values(family, n, scale, volume, r_cov, r_eff):
    g = geometry(LatticeSpec(family, n, scale))
    assert g.volume == pytest.approx(volume, rel=1e-12)
    assert g.r_cov == pytest.approx(r_cov, rel=1e-12)
    assert g.r_eff == pytest.approx(r_eff, rel=1e-12)
    assert g.r_eff <= g.r_cov + 1e-12


def test_unit_ball_volume_closed_forms():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert unit_ball_volume(8) == pytest.approx(math.pi**4 / 24)


@pytest.mark.parametrize("family, n", [("Zn", 2), ("Zn", 3), ("Dn", 2), ("Dn", 3), ("Dn", 4)])
def test_covering_radius_by_deep_hole_search(family, n):
    lat = LatticeSpec(family, n)
    rng = np.random.default_rng(5)
    pts = rng.uniform(-2, 2, size=(20_000, n))
    worst = np.max(np.linalg.norm(mod_lattice(lat, pts), axis=1))
    r_cov = geometry(lat).r_cov
    assert worst <= r_cov + 1e-9
    assert worst >= 0.93 * r_cov


def test_e8_covering_radius_deep_hole():
    e8 = LatticeSpec("E8", 8)
    hole = np.array([1.0] + [0.0] * 7)
    assert np.linalg.norm(mod_lattice(e8, hole)) == pytest.approx(1.0)
    pts = np.random.default_rng(2).uniform(-2, 2, size=(20_000, 8))
    assert np.max(np.linalg.norm(mod_lattice(e8, pts), axis=1)) <= 1.0 + 1e-9


@pytest.mark.parametrize("n", [1, 4, 7])
def test_scale_to_covering_zn(n):
    lat = scale_to_covering("Zn", n)
    assert lat.scale == pytest.approx(2.0)
    assert geometry(lat).r_cov == pytest.approx(math.sqrt(n))


def test_scale_to_covering_e8_and_dn():
    assert scale_to_covering("E8", 8).scale == pytest.approx(math.sqrt(8))
    for n in (2, 3, 4, 6):
        assert geometry(scale_to_covering("Dn", n)).r_cov == pytest.approx(math.sqrt(n))


def test_invalid_specs():
    with pytest.raises(ValueError):
        LatticeSpec("E8", 7)
    with pytest.raises(ValueError):
        LatticeSpec("Dn", 1)
    with pytest.raises(ValueError):
        LatticeSpec("Zn", 2, 0.0)
    with pytest.raises(ValueError):
        LatticeSpec("A2", 2)


# --- quantize / mod -----------------------------------------------------------


def test_quantize_examples():
    assert quantize(LatticeSpec("Zn", 2), [1.3, -0.6]).tolist() == [1.0, -1.0]
    assert quantize(LatticeSpec("Zn", 2, 5.0), [3, 1]).tolist() == [5.0, 0.0]
    assert np.allclose(mod_lattice(LatticeSpec("Zn", 2), [1.3, -0.6]), [0.3, 0.4])


def test_quantize_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        quantize(LatticeSpec("Zn", 3), [1.0, 2.0])


def test_tie_breaks_are_deterministic():
    assert quantize(LatticeSpec("Zn", 3), [0.5, 1.5, -0.5]).tolist() == [0.0, 2.0, -0.0]
    # Dn parity repair on equal rounding errors moves the lowest index
    assert quantize(LatticeSpec("Dn", 2), [0.4, 0.6]).tolist() == [1.0, 1.0]
    # E8 prefers the integer coset when both cosets are equally close
    x = np.full(8, 0.25)
    q = quantize(LatticeSpec("E8", 8), x)
    assert np.allclose(q, 0.0)


@pytest.mark.parametrize("family, n", [("Zn", 1), ("Zn", 2), ("Zn", 3), ("Dn", 2), ("Dn", 3)])
def test_quantizer_matches_exhaustive_search(family, n):
    lat = scale_to_covering(family, n)
    rng = np.random.default_rng([ord(family[0]), n])
    xs = rng.uniform(-5 * lat.scale, 5 * lat.scale, size=(1000, n))
    fast = quantize(lat, xs)
    for x, q in zip(xs, fast):
        assert np.allclose(q, brute_force_nearest(lat, x), atol=1e-9)


@pytest.mark.parametrize("family, n, relevant", [("Dn", 4, _roots(4)), ("E8", 8, _e8_minimal_vectors())])
def test_quantizer_locally_optimal_against_relevant_vectors(family, n, relevant):
    lat = LatticeSpec(family, n)
    member = _in_e8 if family == "E8" else _in_dn
    xs = np.random.default_rng(3).normal(scale=3, size=(2000, n))
    qs = quantize(lat, xs)
    for x, q in zip(xs, qs):
        assert member(q)
        d0 = np.sum((x - q) ** 2)
        assert np.all(np.sum((x - q - relevant) ** 2, axis=1) >= d0 - 1e-9)


finite = st.floats(-50, 50, allow_nan=False)
lattices = st.sampled_from(
    [LatticeSpec("Zn", 3, 2.0), LatticeSpec("Dn", 3, 1.5), LatticeSpec("Dn", 4), scale_to_covering("E8", 8)]
)


@settings(max_examples=300, deadline=None)
@given(lattices, st.data())
def test_mod_properties(lat, data):
    a = data.draw(arrays(float, lat.n, elements=finite))
    b = data.draw(arrays(float, lat.n, elements=finite))
    ma = mod_lattice(lat, a)
    assert np.linalg.norm(ma) <= geometry(lat).r_cov + 1e-9
    assert lat.contains(a - ma)
    assert np.allclose(mod_lattice(lat, ma + b), mod_lattice(lat, a + b), atol=1e-9) or lat.contains(
        mod_lattice(lat, ma + b) - mod_lattice(lat, a + b)
    )


@settings(max_examples=200, deadline=None)
@given(lattices, st.data())
def test_lattice_points_fixed_and_mod_zero(lat, data):
    k = np.array(data.draw(st.lists(st.integers(-20, 20), min_size=lat.n, max_size=lat.n)), dtype=float)
    pt = lat.generator @ k
    assert np.allclose(quantize(lat, pt), pt, atol=1e-9)
    assert np.allclose(mod_lattice(lat, pt), 0, atol=1e-9)
    assert lat.contains(pt)


def test_mod_distributes_over_sums_zn():
    lat = LatticeSpec("Zn", 2)
    rng = np.random.default_rng(7)
    a = rng.normal(scale=4, size=(100, 2))
    b = rng.normal(scale=4, size=(100, 2))
    assert np.allclose(mod_lattice(lat, mod_lattice(lat, a) + b), mod_lattice(lat, a + b), atol=1e-12)


# --- counting ---------------------------------------------------------------


def test_ball_count_examples():
    z2 = LatticeSpec("Zn", 2)
    assert count_points_in_ball(z2, [0, 0], 1.2) == 5
    assert count_points_in_ball(z2, [0, 0], 0.5) == 1
    assert count_points_in_ball(LatticeSpec("Zn", 1), [0.5], 0.5) == 2
    assert count_points_in_ball(LatticeSpec("Dn", 2), [0, 0], 1.5) == 5


def test_ball_count_against_gauss_circle():
    # number of integer pairs with a^2 + b^2 <= r^2
    z2 = LatticeSpec("Zn", 2)
    for r in (0, 1, 2, 3.5, 7):
        expected = sum(a * a + b * b <= r * r for a in range(-8, 9) for b in range(-8, 9))
        assert count_points_in_ball(z2, [0, 0], r) == expected


def test_ball_count_bound():
    rng = np.random.default_rng(9)
    for lat in (LatticeSpec("Zn", 2), LatticeSpec("Dn", 2)):
        g = geometry(lat)
        for _ in range(100):
            c, r = rng.uniform(-10, 10, 2), rng.uniform(0, 5)
            bound = unit_ball_volume(2) / g.volume * (g.r_cov + r) ** 2
            assert count_points_in_ball(lat, c, r) <= bound


def test_ball_count_dimension_limit():
    with pytest.raises(DimensionTooLarge):
        count_points_in_ball(LatticeSpec("Zn", 5), np.zeros(5), 1.0)
    with pytest.raises(ValueError):
        count_points_in_ball(LatticeSpec("Zn", 2), [0, 0], -1.0)
