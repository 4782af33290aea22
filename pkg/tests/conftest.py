import json
from importlib import resources

import numpy as np
import pytest

from aglerkit import innerfn
from aglerkit.innerfn import BlaschkeProduct, ProductInner, make_rational_inner, product_to_rational
from aglerkit.poly2 import BiPoly


def corpus_specs():
    root = resources.files("aglerkit").joinpath("corpus")
    return sorted((p.name[:-5], json.loads(p.read_text())) for p in root.iterdir() if p.name.endswith(".json"))


def load(name):
    for n, spec in corpus_specs():
        if n == name:
            return innerfn.from_json(spec)
    raise KeyError(name)


def product(phi_zeros, psi_zeros, c=1.0):
    return ProductInner(BlaschkeProduct(tuple(phi_zeros), c), BlaschkeProduct(tuple(psi_zeros)))


def p4():
    return make_rational_inner(BiPoly.from_terms({(0, 0): 4, (1, 0): -1, (0, 1): -1}))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE: dict = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; the assertion keeps pytest's verdict in step with it."""

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
