import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aglerkit import hardy
from aglerkit.errors import GridMismatch, UnstableDenominator
from aglerkit.innerfn import make_rational_inner
from aglerkit.poly2 import BiPoly, RationalFn

from conftest import p4

TOL = 1e-12
PROJ_TOL = 1e-10


def grid_of(terms, N=32):
    return hardy.sample(BiPoly.from_terms(terms), N)


def test_sample_examples():
    assert np.allclose(hardy.sample(BiPoly.const(1.0), 8).samples, 1)
    g = hardy.sample(BiPoly.monomial(1, 0), 4)
    w = np.exp(2j * np.pi * np.arange(4) / 4)
    assert np.allclose(g.samples, w[:, None] * np.ones(4))
    f = RationalFn(BiPoly.const(1.0), BiPoly.from_terms({(0, 0): 4, (1, 0): -1, (0, 1): -1}))
    s = hardy.sample(f, 256)
    assert abs(np.abs(s.samples).max() - 0.5) < TOL
    assert abs(s.samples[0, 0] - 0.5) < TOL


def test_sample_rejects_unstable_denominator():
    f = RationalFn(BiPoly.const(1.0), BiPoly.from_terms({(0, 0): 2, (1, 0): -1, (0, 1): -1}))
    with pytest.raises(UnstableDenominator):
        hardy.sample(f, 16)


def test_inner_product_examples():
    a = grid_of({(1, 1): 1})
    assert abs(hardy.inner_product(a, a) - 1) < TOL
    assert abs(hardy.inner_product(grid_of({(1, 0): 1}), grid_of({(0, 1): 1}))) < TOL
    f = hardy.sample(RationalFn(BiPoly.const(1.0), BiPoly.from_terms({(0, 0): 4, (1, 0): -1})), 64)
    assert abs(hardy.inner_product(f, hardy.sample(BiPoly.const(1.0), 64)) - 0.25) < TOL


def test_inner_product_grid_mismatch():
    with pytest.raises(GridMismatch):
        hardy.inner_product(grid_of({(0, 0): 1}, 8), grid_of({(0, 0): 1}, 16))


def test_project_plus_examples():
    N = 16
    Z1, Z2 = hardy.torus_points(N)
    assert np.abs(hardy.project_plus(hardy.TorusGrid.from_samples(np.conj(Z1))).samples).max() < TOL
    g = hardy.project_plus(hardy.TorusGrid.from_samples(2 + np.conj(Z1) * Z2))
    assert np.allclose(g.samples, 2, atol=TOL)
    h = hardy.project_plus(hardy.TorusGrid.from_samples(np.abs(4 - Z1) ** 2))
    assert np.allclose(h.samples, 17 - 4 * Z1, atol=TOL)


def test_project_model_examples():
    theta = make_rational_inner(BiPoly.const(1.0, (1, 1)))
    for terms, expect_zero in (({(0, 0): 1}, False), ({(1, 1): 1}, True), ({(1, 0): 1}, False)):
        f = grid_of(terms)
        out = hardy.project_model(f, theta)
        ref = 0 * f.samples if expect_zero else f.samples
        assert np.abs(out.samples - ref).max() < TOL


def random_poly_grid(rng, N=32, deg=4):
    c = rng.standard_normal((deg + 1, deg + 1)) + 1j * rng.standard_normal((deg + 1, deg + 1))
    return hardy.TorusGrid.from_coeffs(c, N)


def test_project_model_is_idempotent_and_self_adjoint(rng):
    theta = p4()
    # theta's Fourier coefficients decay like 2**-k, so the grid must be fine enough
    f, g = random_poly_grid(rng, 128), random_poly_grid(rng, 128)
    pf = hardy.project_model(f, theta)
    assert (hardy.project_model(pf, theta) - pf).norm() < PROJ_TOL
    lhs = hardy.inner_product(pf, g)
    rhs = hardy.inner_product(f, hardy.project_model(g, theta))
    assert abs(lhs - rhs) < PROJ_TOL


def test_project_model_output_is_orthogonal_to_theta_multiples(rng):
    N = 64
    theta = p4()
    pf = hardy.project_model(random_poly_grid(rng, N), theta)
    tv = theta.grid_values(N)
    prod = hardy.to_spectrum(np.conj(tv) * pf.samples)
    assert np.abs(prod[: N // 2, : N // 2]).max() < PROJ_TOL


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_parseval_for_polynomials(seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    f = hardy.TorusGrid.from_coeffs(c, 16)
    assert abs(hardy.inner_product(f, f) - np.sum(np.abs(c) ** 2)) < 1e-12 * np.sum(np.abs(c) ** 2)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_project_plus_idempotent(seed):
    rng = np.random.default_rng(seed)
    g = hardy.TorusGrid.from_samples(rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
    once = hardy.project_plus(g)
    assert np.abs(hardy.project_plus(once).spectrum - once.spectrum).max() < TOL


def test_backshift_examples():
    one = RationalFn.from_poly(BiPoly.const(1.0))
    assert hardy.backshift(one, 1).numerator.is_zero(1e-14)
    b = hardy.backshift(RationalFn.from_poly(BiPoly.monomial(1, 1)), 1)
    z = (0.3 + 0.2j, -0.4j)
    assert abs(b(*z) - z[1]) < TOL


def test_backshift_of_rational_inner_matches_grid_quotient():
    theta = p4()
    b = hardy.backshift(theta.as_rational, 1)
    N = 64
    Z1, Z2 = hardy.torus_points(N)
    quotient = (theta(Z1, Z2) - theta(0 * Z1, Z2)) / Z1
    assert np.abs(b(Z1, Z2) - quotient).max() < 1e-10


def test_grid_doubling_convergence():
    theta = p4()
    f = RationalFn(BiPoly.const(1.0), theta.p)
    a = hardy.sample(f, 128).spectrum[:8, :8]
    b = hardy.sample(f, 256).spectrum[:8, :8]
    assert np.abs(a - b).max() < 1e-9
