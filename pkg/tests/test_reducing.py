import numpy as np
import pytest

from conftest import corpus_specs, load, p4, product
from aglerkit import agler, innerfn, reducing
from aglerkit.agler import GramKernel
from aglerkit.errors import InconsistentWithTheorem
from aglerkit.poly2 import BiPoly, factor_rank1

Z_ONLY_TOL = 1e-10
FACTOR_TOL = 1e-9


def test_depends_only_z2_examples():
    one = GramKernel(BiPoly.const(1.0), (0, 0), np.ones((1, 1)))
    assert reducing.depends_only_z2(one) == 0.0
    a, _ = agler.closed_form_product(product([0.0], [0.0]))
    assert reducing.depends_only_z2(a.k1) <= 1e-12
    assert reducing.depends_only_z2(agler.agler_decompose(p4()).k1) > 1e-3


def test_depends_only_z1_mirror():
    _, b = agler.closed_form_product(product([0.3, -0.4], [0.5]))
    assert reducing.depends_only_z1(b.k2) <= Z_ONLY_TOL
    assert reducing.depends_only_z2(b.k2) > 1e-3


def test_radial_limit_examples():
    a, _ = agler.closed_form_product(product([0.5], [0.0]))
    table = reducing.radial_limit_check(a.k2)
    assert table.passed
    r = np.array(table.r_ladder)
    tau = table.taus[0]
    want = (1 - r**2) * 0.75 / np.abs(1 - 0.5 * r * tau) ** 2 * abs(0.5 + 0.1j) * abs(-0.3 + 0.4j)
    assert np.allclose(table.values[0], want, rtol=1e-9)

    zero = agler.agler_decompose(load("03_z2_2")).k2
    table = reducing.radial_limit_check(zero)
    assert table.passed and np.all(table.values == 0)

    table = reducing.radial_limit_check(agler.agler_decompose(p4()).k2)
    assert table.passed and table.values[:, -1].max() <= reducing.RADIAL_FINAL


def test_radial_limit_short_ladder_fails_final_threshold():
    a, _ = agler.closed_form_product(product([0.5], [0.0]))
    table = reducing.radial_limit_check(a.k2, r_ladder=(0.9, 0.99, 0.999, 0.9999))
    assert not table.passed


def test_extract_factors_examples():
    f = reducing.extract_factors(load("01_z1z2"))
    assert f.phi.zeros == (0,) and f.psi.zeros == (0,)

    theta = load("07_p_2_minus_z1_times_3_minus_z2")
    f = reducing.extract_factors(theta)
    assert np.allclose(f.phi.zeros, [0.5]) and np.allclose(f.psi.zeros, [1 / 3])
    pts = agler.random_points(np.random.default_rng(4), 100, 0.95)
    assert np.abs(theta(pts[:, 0], pts[:, 1]) - f(pts[:, 0], pts[:, 1])).max() <= FACTOR_TOL

    assert reducing.extract_factors(p4()) is None


def test_extract_factors_from_converted_product():
    g = product([0.3, -0.4], [0.5, 0.2j], np.exp(0.9j))
    f = reducing.extract_factors(innerfn.product_to_rational(g))
    assert f is not None
    assert np.allclose(np.sort_complex(np.array(f.phi.zeros)), np.sort_complex(np.array(g.phi.zeros)))
    assert np.allclose(np.sort_complex(np.array(f.psi.zeros)), np.sort_complex(np.array(g.psi.zeros)))


def test_theorem2_examples():
    assert reducing.theorem2_harness(load("01_z1z2")).verdict == "reducing_product"
    assert reducing.theorem2_harness(p4()).verdict == "non_reducing"


def test_theorem2_random_products():
    rng = np.random.default_rng(77)
    for _ in range(3):
        phi, psi = (agler.random_points(rng, rng.integers(1, 3))[:, 0] for _ in range(2))
        f = product(phi, psi, np.exp(2j * np.pi * rng.uniform()))
        rep = reducing.theorem2_harness(f, D=3, grid_N=128)
        assert rep.verdict == "reducing_product" and rep.consistent


def test_theorem2_strict_raises_on_contradiction(monkeypatch):
    # a witness that wrongly reports z1-dependence must surface as an error
    monkeypatch.setattr(reducing, "depends_only_z2", lambda k, *a, **kw: 1.0)
    with pytest.raises(InconsistentWithTheorem):
        reducing.theorem2_harness(load("01_z1z2"), D=3, grid_N=128)
    rep = reducing.theorem2_harness(load("01_z1z2"), D=3, grid_N=128, strict=False)
    assert not rep.consistent and rep.details


@pytest.mark.parametrize("name", [n for n, _ in corpus_specs()])
def test_equivalence_chain(name):
    theta = load(name)
    rat = innerfn.as_rational_inner(theta)
    rep = reducing.theorem2_harness(theta, D=4, grid_N=128)
    factored = factor_rank1(rat.p) is not None
    assert factored == (rep.verdict == "reducing_product")
    assert (rep.block_off_diagonal <= 1e-8) == factored
    assert rep.radial.passed
    if factored:
        assert rep.z1_dependence_of_K1 <= Z_ONLY_TOL and rep.z2_dependence_of_K2max <= Z_ONLY_TOL


def test_report_json_shape():
    rep = reducing.theorem2_harness(load("08_blaschke_half_times_z2"), D=3, grid_N=128)
    js = rep.to_json()
    assert js["verdict"] == "reducing_product" and js["factorization"]["phi"]["zeros"]
    assert len(js["radial"]["rows"]) == 8
