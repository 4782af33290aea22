import numpy as np
import pytest
from scipy import linalg

from conftest import corpus_specs, load, p4, product
from aglerkit import agler, hardy, shiftop
from aglerkit.errors import DegenerateFrame, NotInModelSpace
from aglerkit.innerfn import BlaschkeProduct, ProductInner

ORTHO_TOL = 1e-9
ADJOINT_TOL = 1e-8
LEMMA_TOL = 1e-8
EQ6_TOL = 1e-7
EQ3_TOL = 1e-6
NORM_SLACK = 1e-8
N = 128


def blocks_of(g: hardy.TorusGrid) -> np.ndarray:
    h = g.size // 2
    return g.spectrum[:h, :h]


def test_frame_examples():
    z1z2 = load("01_z1z2")
    fr = shiftop.build_frame(z1z2, 1, 1, 64)
    assert fr.dim == 3 and set(fr.labels) == {(0, 0), (1, 0), (0, 1)}
    fr = shiftop.build_frame(load("02_z2"), 2, 2, 64)
    assert fr.dim == 3 and set(fr.labels) == {(0, 0), (1, 0), (2, 0)}
    assert shiftop.build_frame(z1z2, 0, 0, 64).dim == 1


def test_constant_theta_has_trivial_frame():
    const = ProductInner(BlaschkeProduct((), -1.0), BlaschkeProduct(()))
    with pytest.raises(DegenerateFrame):
        shiftop.build_frame(const, 2, 2, 64)


def test_frame_too_large_for_grid():
    with pytest.raises(ValueError):
        shiftop.build_frame(load("01_z1z2"), 40, 2, 64)


@pytest.mark.parametrize("name", [n for n, _ in corpus_specs()])
def test_frame_is_orthonormal_and_in_model_space(name):
    theta = load(name)
    D = 5
    fr = shiftop.build_frame(theta, D, D, N)
    assert fr.dim == shiftop.expected_dim(theta.degree, D, D)
    assert np.abs(shiftop.gram(fr.basis) - np.eye(fr.dim)).max() < ORTHO_TOL
    tv = shiftop.theta_grid(theta, N)
    Z1, Z2 = hardy.torus_points(N)
    for a in range(0, 2 * D + 1, 3):
        for b in range(0, 2 * D + 1, 3):
            tb = blocks_of(hardy.TorusGrid.from_samples(tv * Z1**a * Z2**b))
            assert np.abs(shiftop.gram(tb[None], fr.basis)).max() < ORTHO_TOL


def test_compress_shift_examples():
    z1z2 = load("01_z1z2")
    fr = shiftop.build_frame(z1z2, 1, 1, 64)
    S = shiftop.compress_shift(z1z2, fr, 1)
    idx = {lab: k for k, lab in enumerate(fr.labels)}
    # basis vectors are monomials up to phase
    image = np.abs(S.entries)
    assert image[idx[(1, 0)], idx[(0, 0)]] == pytest.approx(1.0)
    assert image[:, idx[(1, 0)]].max() < 1e-12 and S.leakage[idx[(1, 0)]] == pytest.approx(1.0)
    assert image[:, idx[(0, 1)]].max() < 1e-12 and S.leakage[idx[(0, 1)]] < 1e-12

    z2cube = load("04_z2_3")
    fr = shiftop.build_frame(z2cube, 2, 4, 64)
    S = np.abs(shiftop.compress_shift(z2cube, fr, 2).entries)
    idx = {lab: k for k, lab in enumerate(fr.labels)}
    chain = [idx[(0, j)] for j in range(3)]
    assert S[chain[1], chain[0]] == pytest.approx(1.0)
    assert S[chain[2], chain[1]] == pytest.approx(1.0)
    assert S[:, chain[2]].max() < 1e-12


@pytest.mark.parametrize("name", [n for n, _ in corpus_specs()])
@pytest.mark.parametrize("var", [1, 2])
def test_compressed_shift_is_contraction(name, var):
    theta = load(name)
    fr = shiftop.build_frame(theta, 4, 4, N)
    S = shiftop.compress_shift(theta, fr, var)
    assert linalg.norm(S.entries, 2) <= 1 + NORM_SLACK


@pytest.mark.parametrize("theta", [p4(), product([0.3, -0.4], [0.5])], ids=["p4", "product"])
def test_adjoint_agrees_with_backshift(theta):
    D = 6
    fr = shiftop.build_frame(theta, D, D, N)
    S = shiftop.compress_shift(theta, fr, 1)
    B = shiftop.gram(shiftop.backshift_blocks(fr.basis, 1), fr.basis)
    # the backward shift preserves the model space, so the compressions agree on every pair
    assert np.abs(S.adjoint().entries - B).max() < ADJOINT_TOL


def test_kernel_at_examples():
    z1z2 = load("01_z1z2")
    fr = shiftop.build_frame(z1z2, 3, 3, 64)
    c = shiftop.kernel_at(z1z2, fr, (0.0, 0.0))
    kw = np.tensordot(c.conj(), fr.basis, axes=1).conj()  # sum <K_w, e_k> e_k
    assert abs(kw[0, 0] - 1) < 1e-12 and np.abs(kw).sum() == pytest.approx(1.0)

    z2 = load("02_z2")
    K = blocks_of(shiftop.kernel_grid(z2, (0.5, 0.0), 64))
    assert np.allclose(K[:8, 0], 0.5 ** np.arange(8), atol=1e-14)
    assert np.abs(K[:, 1:]).max() < 1e-14

    fr = shiftop.build_frame(z1z2, 8, 8, 64)
    c = shiftop.kernel_at(z1z2, fr, (0.3, 0.2))
    vals = np.array([fr.evaluate(k, 0.3, 0.2) for k in range(fr.dim)])
    assert np.abs(np.conj(c) - vals).max() < 1e-6


def test_shift_via_lemma_examples():
    z1z2 = load("01_z1z2")
    Z1, Z2 = hardy.torus_points(64)
    one = hardy.TorusGrid.from_samples(np.ones((64, 64), complex))
    assert np.abs(shiftop.shift_via_lemma(z1z2, one).samples - Z1).max() < 1e-12
    g = hardy.TorusGrid.from_samples(Z2.astype(complex))
    assert shiftop.shift_via_lemma(z1z2, g).norm() < 1e-12
    with pytest.raises(NotInModelSpace):
        shiftop.shift_via_lemma(z1z2, hardy.TorusGrid.from_samples(Z1 * Z2))


@pytest.mark.parametrize("name", [n for n, _ in corpus_specs()])
def test_shift_via_lemma_matches_projection(name, rng):
    theta = load(name)
    fr = shiftop.build_frame(theta, 6, 6, N)
    tv = shiftop.theta_grid(theta, N)
    for _ in range(20):
        coef = rng.standard_normal(fr.dim) + 1j * rng.standard_normal(fr.dim)
        f = hardy.TorusGrid.from_spectrum(shiftop._embed(np.tensordot(coef, fr.basis, axes=1), N))
        lemma = shiftop.shift_via_lemma(theta, f)
        direct = hardy.project_model(hardy.shift_grid(f, 1), hardy.TorusGrid(np.asarray(tv), None))
        assert (lemma - direct).norm() <= LEMMA_TOL * max(f.norm(), 1.0)


@pytest.mark.parametrize("phi, psi", [([0.3, -0.4], [0.5, 0.2j]), ([0.5], [0.0]), ([0.0], [0.3, -0.2 + 0.4j])])
def test_commutator_on_max_subspace_is_projection_of_slice(phi, psi):
    f = product(phi, psi)
    a, _ = agler.closed_form_product(f)
    v1, _ = shiftop.split_vectors(a, 4, N)
    lhs = shiftop.commutator_apply(f, v1, N, 1)
    slice0 = np.zeros_like(v1)
    slice0[:, 0, :] = v1[:, 0, :]
    assert np.abs(lhs - shiftop.project_blocks(slice0, f, N)).max() < EQ6_TOL


@pytest.mark.parametrize("theta", [p4(), load("07_p_2_minus_z1_times_3_minus_z2"), load("10_blaschke_deg1_times_deg2")], ids=["p4", "rational_product", "blaschke_1x2"])
def test_commutator_on_max_kernels(theta, rng):
    pair = agler.agler_decompose(theta)
    Z1, Z2 = hardy.torus_points(N)
    z = np.stack([Z1, Z2], -1)
    z0 = np.stack([np.zeros_like(Z1), Z2], -1)
    for w in agler.random_points(rng, 10, 0.7):
        k_w = agler.kernel_eval(pair.k1, z, w) / (1 - Z1 * np.conj(w[0]))
        lhs = shiftop.commutator_apply(theta, blocks_of(hardy.TorusGrid.from_samples(k_w)), N, 1)
        rhs = blocks_of(hardy.TorusGrid.from_samples(agler.kernel_eval(pair.k1, z0, w)))
        rhs = shiftop.project_blocks(rhs[None], theta, N)[0]
        assert np.abs(lhs - rhs).max() < EQ3_TOL


@pytest.mark.parametrize(
    "f", [product([0.0], [0.0]), product([0.5], [0.0]), product([0.3, -0.4], [0.5, 0.2j])], ids=["z1z2", "b_half", "b2x2"]
)
def test_block_structure_products(f):
    rep = shiftop.block_structure_check(f, 5, N)
    assert rep.passed
    assert rep.off_diagonal <= 1e-8


def test_block_structure_z1z2_is_exact():
    assert shiftop.block_structure_check(product([0.0], [0.0]), 5, N).off_diagonal <= 1e-12


def test_block_structure_non_product_leaks():
    rep = shiftop.block_structure_check(p4(), 5, N)
    assert rep.off_diagonal > 1e-3
    assert not rep.passed


def test_one_variable_compression_spectrum():
    phi = BlaschkeProduct((0.3, -0.4, 0.5j))
    ev = np.sort_complex(linalg.eigvals(shiftop.one_variable_compression(phi)))
    assert np.abs(ev - np.sort_complex(np.array(phi.zeros))).max() < 1e-12
