"""Inner functions on the bidisk: finite Blaschke products and rational inner ``p~/p``."""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import hardy
from .errors import CommonFactor, InputError, UnstableDenominator
from .poly2 import BiPoly, RationalFn, StabilityVerdict, _parse_complex, evaluate, is_stable_bidisk, reflect

ZERO_MODULUS_MAX = 1 - 1e-12


@dataclass(frozen=True, eq=False)
class BlaschkeProduct:
    """``c * prod (z - a) / (1 - conj(a) z)``; an empty zero list is the constant ``c``."""

    zeros: tuple = ()
    unimodular_constant: complex = 1.0

    def __post_init__(self):
        zs = tuple(complex(a) for a in self.zeros)
        for a in zs:
            if abs(a) >= ZERO_MODULUS_MAX:
                raise ValueError(f"Blaschke zero {a} is not inside the open disk")
        c = complex(self.unimodular_constant)
        if abs(abs(c) - 1) > 1e-14:
            raise ValueError(f"constant {c} is not unimodular")
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "unimodular_constant", c)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.unimodular_constant, dtype=complex)
        for a in self.zeros:
            out = out * (z - a) / (1 - np.conj(a) * z)
        return out if out.ndim else complex(out)

    def denominator_coeffs(self) -> np.ndarray:
        """Ascending coefficients of ``prod (1 - conj(a) z)``."""
        c = np.array([1.0 + 0j])
        for a in self.zeros:
            c = np.convolve(c, [1.0, -np.conj(a)])
        return c

    def model_basis(self, z):
        """Takenaka-Malmquist orthonormal basis of ``H^2 - phi H^2`` evaluated at ``z``."""
        z = np.asarray(z, dtype=complex)
        out = []
        prefix = np.ones(z.shape, dtype=complex)
        for a in self.zeros:
            out.append(np.sqrt(1 - abs(a) ** 2) / (1 - np.conj(a) * z) * prefix)
            prefix = prefix * (z - a) / (1 - np.conj(a) * z)
        return out

    def backshift_at(self, z):
        """``(phi(z) - phi(0)) / z`` evaluated pointwise (``z != 0``)."""
        z = np.asarray(z, dtype=complex)
        return (self(z) - self(0.0)) / z

    def to_json(self) -> dict:
        c = self.unimodular_constant
        return {"zeros": [[a.real, a.imag] for a in self.zeros], "c": [c.real, c.imag]}


@dataclass(frozen=True, eq=False)
class ProductInner:
    """``phi(z1) * psi(z2)`` for finite Blaschke products ``phi``, ``psi``."""

    phi: BlaschkeProduct
    psi: BlaschkeProduct

    @property
    def degree(self) -> tuple[int, int]:
        return (self.phi.degree, self.psi.degree)

    def __call__(self, z1, z2):
        return self.phi(z1) * self.psi(z2)

    @functools.lru_cache(maxsize=8)
    def grid_values(self, N: int) -> np.ndarray:
        w = np.exp(2j * np.pi * np.arange(N) / N)
        vals = np.outer(self.phi(w), self.psi(w))
        vals.setflags(write=False)
        return vals

    def to_json(self) -> dict:
        return {"kind": "product", "phi": self.phi.to_json(), "psi": self.psi.to_json()}


@dataclass(frozen=True, eq=False)
class RationalInner:
    """``theta = p~ / p`` with ``p`` strictly stable on the closed bidisk."""

    p: BiPoly
    p_reflected: BiPoly = field(default=None)
    degree: tuple[int, int] = field(default=None)

    def __post_init__(self):
        if self.p_reflected is None:
            object.__setattr__(self, "p_reflected", reflect(self.p))
        if self.degree is None:
            object.__setattr__(self, "degree", self.p.degree)

    def __call__(self, z1, z2):
        return evaluate(self.p_reflected, z1, z2) / evaluate(self.p, z1, z2)

    @property
    def as_rational(self) -> RationalFn:
        return RationalFn(self.p_reflected, self.p)

    @functools.lru_cache(maxsize=8)
    def grid_values(self, N: int) -> np.ndarray:
        Z1, Z2 = hardy.torus_points(N)
        vals = evaluate(self.p_reflected, Z1, Z2) / evaluate(self.p, Z1, Z2)
        vals.setflags(write=False)
        return vals

    def to_json(self) -> dict:
        return {"kind": "rational", "p": self.p.to_json()}


def _sylvester_min_sv(a: np.ndarray, b: np.ndarray) -> float:
    """Smallest normalized singular value of the Sylvester matrix of two polynomials."""
    a = np.trim_zeros(a[::-1], "f")
    b = np.trim_zeros(b[::-1], "f")
    da, db = a.size - 1, b.size - 1
    if da <= 0 or db <= 0:
        return 1.0
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    S = np.zeros((da + db, da + db), dtype=complex)
    for i in range(db):
        S[i, i : i + da + 1] = a
    for i in range(da):
        S[db + i, i : i + db + 1] = b
    s = linalg.svdvals(S)
    return float(s[-1] / s[0])


def _shares_factor(p: BiPoly, q: BiPoly, tol: float, rng) -> bool:
    """Slice test: a common factor gives a common root on every generic slice."""
    for var in (1, 2):
        hits = 0
        for _ in range(3):
            t = complex(*rng.uniform(-0.7, 0.7, 2))
            if var == 1:
                a = p.coeffs @ (t ** np.arange(p.degree[1] + 1))
                b = q.coeffs @ (t ** np.arange(q.degree[1] + 1))
            else:
                a = (t ** np.arange(p.degree[0] + 1)) @ p.coeffs
                b = (t ** np.arange(q.degree[0] + 1)) @ q.coeffs
            if _sylvester_min_sv(a, b) <= tol:
                hits += 1
        if hits == 3:
            return True
    return False


def make_rational_inner(p: BiPoly, *, check_grid: int = 128) -> RationalInner:
    """Validate ``p`` and build ``theta = reflect(p) / p``.

    Raises :class:`UnstableDenominator` unless ``p`` is strictly stable and
    :class:`CommonFactor` when ``p`` and its reflection share a factor.
    """
    verdict = is_stable_bidisk(p)
    if verdict is not StabilityVerdict.STRICTLY_STABLE:
        raise UnstableDenominator(f"p is {verdict.value}")
    pr = reflect(p)
    if _shares_factor(p, pr, 1e-10, np.random.default_rng(7)):
        raise CommonFactor("p and its reflection share a common factor")
    theta = RationalInner(p, pr, p.degree)
    dev = verify_inner(theta, check_grid)
    if dev > 1e-10:
        raise UnstableDenominator(f"|p~/p| deviates from 1 by {dev:.3e} on the torus")
    return theta


def product_to_rational(f: ProductInner) -> RationalInner:
    """Rational form of ``phi(z1) psi(z2)`` with unimodular constants folded into ``p``."""
    p1 = f.phi.denominator_coeffs()
    p2 = f.psi.denominator_coeffs()
    m, n = f.degree
    p1 = np.concatenate([p1, np.zeros(m + 1 - p1.size)])
    p2 = np.concatenate([p2, np.zeros(n + 1 - p2.size)])
    c = f.phi.unimodular_constant * f.psi.unimodular_constant
    # reflect(lam * q) = conj(lam) * reflect(q): conj(lam)/lam = c
    lam = np.exp(-0.5j * np.angle(c))
    p = BiPoly(lam * np.outer(p1, p2), (m, n))
    return RationalInner(p, reflect(p), (m, n))


def verify_inner(theta, grid_N: int = 256) -> float:
    """``max | |theta| - 1 |`` over the torus grid."""
    if hasattr(theta, "grid_values"):
        vals = theta.grid_values(grid_N)
    else:
        Z1, Z2 = hardy.torus_points(grid_N)
        vals = theta(Z1, Z2)
    return float(np.max(np.abs(np.abs(vals) - 1.0)))


def backshift_theta(theta: RationalInner, var: int) -> RationalFn:
    """``T_{conj z_var} theta`` as a rational function."""
    return hardy.backshift(theta.as_rational, var)


def as_rational_inner(theta) -> RationalInner:
    if isinstance(theta, RationalInner):
        return theta
    if isinstance(theta, ProductInner):
        return product_to_rational(theta)
    raise TypeError(f"not an inner function: {type(theta).__name__}")


# -- JSON ----------------------------------------------------------------------

def _blaschke_from_json(d) -> BlaschkeProduct:
    zeros = [_parse_complex(a) for a in d.get("zeros", [])]
    c = _parse_complex(d.get("c", [1.0, 0.0]))
    return BlaschkeProduct(tuple(zeros), c)


def from_json(data: dict, *, allow_quotient: bool = False):
    """Parse an inner-function spec.

    Kinds are ``product`` and ``rational``; ``quotient`` (an arbitrary
    ``numerator / denominator`` that need not be inner) is accepted only when
    ``allow_quotient`` is set, for inner-ness checks.
    """
    if not isinstance(data, dict):
        raise InputError("inner-function spec must be a JSON object")
    kind = data.get("kind")
    try:
        if kind == "product":
            return ProductInner(_blaschke_from_json(data["phi"]), _blaschke_from_json(data["psi"]))
        if kind == "rational":
            return make_rational_inner(BiPoly.from_json(data["p"]))
        if kind == "quotient" and allow_quotient:
            return RationalFn(BiPoly.from_json(data["numerator"]), BiPoly.from_json(data["denominator"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed inner-function JSON: {exc}") from exc
    raise InputError(f"unknown inner-function kind {kind!r}")


def to_json(theta) -> dict:
    return theta.to_json()
