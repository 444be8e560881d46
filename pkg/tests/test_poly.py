import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from henon_rigidity import BiPoly, CoefficientOverflow, Polynomial, PolyMap2, map_compose, map_equal_within

OMEGA = cmath.exp(2j * cmath.pi / 3)

coeff = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
polys = st.lists(coeff, min_size=1, max_size=5).map(Polynomial)


def monomial_sum(coeffs, y):
    return sum(complex(a) * y**k for k, a in enumerate(coeffs))


def test_eval_examples():
    assert Polynomial([0, 0, 1])(3) == 9
    assert Polynomial([])(1.5 + 2j) == 0
    p = Polynomial([1, -2, 0, 1])
    y = 1 + 1j
    assert abs(p(y) - monomial_sum([1, -2, 0, 1], y)) < 1e-14


def test_eval_vectorized_matches_scalar(rng):
    p = Polynomial(rng.normal(size=4) + 1j * rng.normal(size=4))
    ys = rng.normal(size=20) + 1j * rng.normal(size=20)
    np.testing.assert_allclose(p(ys), [p(complex(y)) for y in ys], rtol=1e-14)


def test_mul_examples():
    assert Polynomial([1, 1]) * Polynomial([-1, 1]) == Polynomial([-1, 0, 1])
    assert (Polynomial([1, 2, 3]) * Polynomial([])).is_zero()
    assert Polynomial([]).degree() == -1


def test_compose_examples(rng):
    assert Polynomial([0, 0, 1]).compose(Polynomial([1, 1])) == Polynomial([1, 2, 1])
    p = Polynomial([2, -1, 0.5j])
    assert p.compose(Polynomial([0, 1])) == p
    outer, inner = Polynomial([0, 0, 0, 1]), Polynomial([-1, 2])
    c = outer.compose(inner)
    for y in rng.normal(size=10) + 1j * rng.normal(size=10):
        assert abs(c(y) - (2 * y - 1) ** 3) <= 1e-12 * (1 + abs(y) ** 3)


def test_trimming_and_degree():
    p = Polynomial([1, 2, 1e-20])
    assert p.degree() == 1
    assert p.leading() == 2


def test_overflow_is_reported():
    with pytest.raises(CoefficientOverflow):
        Polynomial([1e200, 1]) * Polynomial([1e200, 1])


@settings(max_examples=60, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    scale = 1 + max(abs(a.coeffs).max(initial=0), 1) * max(abs(b.coeffs).max(initial=0), 1) * max(abs(c.coeffs).max(initial=0), 1)
    assert ((a + b) * c).max_abs_diff(a * c + b * c) <= 1e-12 * scale
    assert ((a * b) * c).max_abs_diff(a * (b * c)) <= 1e-12 * scale
    assert (a * b).max_abs_diff(b * a) <= 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(polys, polys, coeff)
def test_evaluation_homomorphism(a, b, y):
    scale = (1 + abs(a.coeffs).sum()) * (1 + abs(b.coeffs).sum()) * (1 + abs(y)) ** 8
    assert abs((a * b)(y) - a(y) * b(y)) <= 1e-12 * scale
    assert abs((a + b)(y) - (a(y) + b(y))) <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(polys, polys)
def test_composition_degree_law(a, b):
    if a.degree() < 1 or b.degree() < 1:
        return
    assert a.compose(b).degree() == a.degree() * b.degree()


def test_bipoly_substitute_h_squared():
    x, y = BiPoly.x(), BiPoly.y()
    H = PolyMap2(y, y * y - x)
    H2 = map_compose(H, H)
    assert map_equal_within(H2, PolyMap2(y * y - x, (y * y - x) ** 2 - y), 0)[0]


def test_map_compose_identity():
    x, y = BiPoly.x(), BiPoly.y()
    H = PolyMap2(y, y * y - x)
    assert map_equal_within(map_compose(H, PolyMap2.identity()), H, 0) == (True, 0.0)
    assert map_equal_within(map_compose(PolyMap2.identity(), H), H, 0) == (True, 0.0)


def test_twist_after_h_matches_reference_map():
    x, y = BiPoly.x(), BiPoly.y()
    H = PolyMap2(y, y * y - x)
    F = map_compose(PolyMap2.twist(OMEGA), H)
    expected = PolyMap2(y * OMEGA, y * y * OMEGA**2 - x * OMEGA**2)
    ok, res = map_equal_within(F, expected, 1e-12)
    assert ok and res < 1e-15


def test_map_equal_within_perturbation():
    x, y = BiPoly.x(), BiPoly.y()
    H = PolyMap2(y, y * y - x)
    H2 = map_compose(H, H)
    bumped = PolyMap2(H2.first, H2.second + BiPoly({(0, 2): 1e-3}))
    ok, res = map_equal_within(H2, bumped, 1e-9)
    assert not ok
    assert res == pytest.approx(1e-3, rel=1e-9)
    assert map_equal_within(H2, H2, 0) == (True, 0.0)


def test_bipoly_eval_against_terms(rng):
    p = BiPoly({(0, 0): 1, (2, 1): -3j, (0, 4): 0.5})
    for _ in range(5):
        x, y = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        assert abs(p(x, y) - (1 - 3j * x**2 * y + 0.5 * y**4)) < 1e-13
