import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aglerkit.errors import DegenerateInput, InputError
from aglerkit.poly2 import (
    BiPoly,
    StabilityVerdict,
    evaluate,
    factor_rank1,
    is_stable_bidisk,
    mul,
    partial_evaluate,
    reflect,
)

TOL = 1e-12


def poly(terms, degree=None):
    return BiPoly.from_terms(terms, degree)


complexes = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


@st.composite
def bipolys(draw):
    m = draw(st.integers(0, 3))
    n = draw(st.integers(0, 3))
    vals = draw(st.lists(complexes, min_size=(m + 1) * (n + 1), max_size=(m + 1) * (n + 1)))
    return BiPoly(np.array(vals).reshape(m + 1, n + 1), (m, n))


def test_reflect_examples():
    p = poly({(0, 0): 2, (1, 0): -1, (0, 1): -1})
    expected = poly({(1, 1): 2, (0, 1): -1, (1, 0): -1})
    assert reflect(p).allclose(expected)
    assert reflect(BiPoly.const(1.0)).allclose(BiPoly.const(1.0))
    assert reflect(BiPoly.const(1.0, (1, 1))).allclose(BiPoly.monomial(1, 1))


@given(bipolys())
@settings(max_examples=50, deadline=None)
def test_reflect_is_an_involution(p):
    assert reflect(reflect(p)).allclose(p, atol=0)


@given(bipolys(), bipolys())
@settings(max_examples=50, deadline=None)
def test_mul_matches_pointwise_product(p, q):
    z1, z2 = 0.3 - 0.2j, -0.5 + 0.1j
    assert abs(evaluate(mul(p, q), z1, z2) - evaluate(p, z1, z2) * evaluate(q, z1, z2)) <= 1e-9 * (
        1 + abs(evaluate(p, z1, z2) * evaluate(q, z1, z2))
    )


def test_reflection_on_torus_has_same_modulus():
    p = poly({(0, 0): 3, (1, 0): 1 - 1j, (0, 1): 0.5, (1, 1): 0.2j})
    t = np.exp(2j * np.pi * np.array([0.1, 0.37, 0.81]))
    a, b = np.meshgrid(t, t)
    assert np.allclose(np.abs(evaluate(reflect(p), a, b)), np.abs(evaluate(p, a, b)), atol=TOL)


def test_stability_examples():
    assert is_stable_bidisk(poly({(0, 0): 4, (1, 0): -1, (0, 1): -1})) is StabilityVerdict.STRICTLY_STABLE
    assert is_stable_bidisk(poly({(0, 0): 2, (1, 0): -1, (0, 1): -1})) is StabilityVerdict.BOUNDARY_ZERO
    assert is_stable_bidisk(poly({(1, 0): 1})) is StabilityVerdict.UNSTABLE


def test_stability_detects_off_grid_boundary_zero():
    a = np.exp(2j * np.pi * 0.123456)
    p = poly({(0, 0): 2, (1, 0): -np.conj(a), (0, 1): -1})
    assert is_stable_bidisk(p) is StabilityVerdict.BOUNDARY_ZERO


def test_stability_rejects_interior_zero():
    # zero at (0.5, 0.5)
    assert is_stable_bidisk(poly({(0, 0): 1, (1, 0): -1, (0, 1): -1})) is StabilityVerdict.UNSTABLE


def test_stability_of_zero_polynomial_raises():
    with pytest.raises(DegenerateInput):
        is_stable_bidisk(BiPoly.const(0.0, (1, 1)))


def test_factor_rank1_examples():
    p = poly({(0, 0): 6, (1, 0): -3, (0, 1): -2, (1, 1): 1})
    split = factor_rank1(p)
    assert split is not None
    p1, p2 = split
    assert mul(p1, p2).allclose(p, atol=1e-12)
    assert p1.degree == (1, 0) and p2.degree == (0, 1)
    assert abs(p2.coeffs[0, 0].imag) < TOL and p2.coeffs[0, 0].real >= 0
    # roots recovered up to scalar reallocation
    assert np.isclose(-p1.coeffs[0, 0] / p1.coeffs[1, 0], 2)
    assert np.isclose(-p2.coeffs[0, 0] / p2.coeffs[0, 1], 3)
    assert factor_rank1(poly({(0, 0): 4, (1, 0): -1, (0, 1): -1})) is None


def test_partial_evaluate():
    p = poly({(0, 0): 4, (1, 0): -1, (0, 1): -1})
    assert partial_evaluate(p, 1, 1.0).allclose(poly({(0, 0): 3, (0, 1): -1}))


def test_json_round_trip_and_errors():
    p = poly({(0, 0): 4, (1, 1): 0.5 - 2j})
    assert BiPoly.from_json(p.to_json()).allclose(p, atol=0)
    with pytest.raises(InputError):
        BiPoly.from_json({"degree": [1, 1], "coeffs": [[[1, 0]]]})
    with pytest.raises(InputError):
        BiPoly.from_json({"coeffs": []})
