"""Reducing Agler subspaces: z2-only kernels, radial limits and product detection."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import agler, shiftop
from .errors import InconsistentWithTheorem
from .innerfn import BlaschkeProduct, ProductInner, RationalInner, as_rational_inner
from .poly2 import factor_rank1

# (1 - r^2) K2 only falls below 1e-5 once 1 - r is about 1e-6 for kernels of
# size O(1), so the ladder runs to 1 - 1e-7.
DEFAULT_R_LADDER = (0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999, 0.9999999)
DEFAULT_PROBE = (0.5 + 0.1j, -0.3 + 0.4j)
RADIAL_FINAL = 1e-5
RADIAL_SHRINK = 5.0
Z_ONLY_TOL = 1e-10
WITNESS_TOL = 1e-5


def _dependence(k: agler.GramKernel, var: int, n_samples: int, seed: int) -> float:
    """Max change of ``K(z, w)`` when only the ``var`` coordinates of ``z`` and ``w`` move."""
    rng = np.random.default_rng(seed)
    z = agler.random_points(rng, n_samples)
    w = agler.random_points(rng, n_samples)
    z2, w2 = z.copy(), w.copy()
    fresh = agler.random_points(rng, n_samples)
    z2[:, var - 1] = fresh[:, 0]
    w2[:, var - 1] = fresh[:, 1]
    return float(np.max(np.abs(agler.kernel_eval(k, z, w) - agler.kernel_eval(k, z2, w2)), initial=0.0))


def depends_only_z2(k: agler.GramKernel, n_samples: int = 50, seed: int = 0) -> float:
    """Zero (to rounding) when ``K(z, w)`` depends on ``z2, w2`` alone."""
    return _dependence(k, 1, n_samples, seed)


def depends_only_z1(k: agler.GramKernel, n_samples: int = 50, seed: int = 0) -> float:
    return _dependence(k, 2, n_samples, seed)


@dataclass
class RadialTable:
    taus: list
    r_ladder: list
    values: np.ndarray  # (len(taus), len(r_ladder))
    passed: bool

    def to_json(self) -> dict:
        return {
            "r": list(self.r_ladder),
            "rows": [
                {"tau": [t.real, t.imag], "values": [float(v) for v in row]}
                for t, row in zip(self.taus, self.values)
            ],
            "passed": self.passed,
        }


def radial_limit_check(k2: agler.GramKernel, taus=None, r_ladder=DEFAULT_R_LADDER, probe=DEFAULT_PROBE) -> RadialTable:
    """``(1 - r^2) |K2(r tau, z2, r tau, w2)|`` along a ladder of radii."""
    if taus is None:
        taus = np.exp(2j * np.pi * np.arange(8) / 8)
    taus = [complex(t) for t in taus]
    r = np.asarray(r_ladder, dtype=float)
    z2, w2 = complex(probe[0]), complex(probe[1])
    rows = []
    for t in taus:
        z = np.stack([r * t, np.full(r.size, z2)], axis=-1)
        w = np.stack([r * t, np.full(r.size, w2)], axis=-1)
        rows.append((1 - r) * (1 + r) * np.abs(agler.kernel_eval(k2, z, w)))
    vals = np.array(rows).reshape(len(taus), r.size)
    ok = True
    for row in vals:
        if row[-1] > RADIAL_FINAL:
            ok = False
        for a, b in zip(row, row[1:]):
            if a > 1e-300 and b > a / RADIAL_SHRINK:
                ok = False
    return RadialTable(taus, list(r_ladder), vals, ok)


def _one_variable(coeffs: np.ndarray) -> BlaschkeProduct:
    """Blaschke product whose zeros are those of the reflection of ``q`` at its declared degree.

    The reflection has ascending coefficients ``conj(q[::-1])``, so its descending
    coefficients are ``conj(q)``; a vanishing top coefficient of ``q`` gives a zero at 0.
    """
    q = np.asarray(coeffs, dtype=complex)
    if q.size <= 1:
        return BlaschkeProduct(())
    return BlaschkeProduct(tuple(np.roots(np.conj(q))))


def extract_factors(theta, tol: float = 1e-9, n_check: int = 100, seed: int = 0) -> ProductInner | None:
    """``theta = phi(z1) psi(z2)`` recovered from a rank-one coefficient matrix, else ``None``."""
    if isinstance(theta, ProductInner):
        return theta
    theta = as_rational_inner(theta)
    split = factor_rank1(theta.p)
    if split is None:
        return None
    p1, p2 = split
    phi0 = _one_variable(p1.coeffs[:, 0])
    psi0 = _one_variable(p2.coeffs[0, :])
    x = (0.31 + 0.17j, -0.23 + 0.29j)
    c = theta(*x) / (phi0(x[0]) * psi0(x[1]))
    c = c / abs(c)
    f = ProductInner(BlaschkeProduct(phi0.zeros, c), psi0)
    pts = agler.random_points(np.random.default_rng(seed), n_check, 0.95)
    err = np.max(np.abs(theta(pts[:, 0], pts[:, 1]) - f(pts[:, 0], pts[:, 1])))
    return f if err <= tol else None


@dataclass
class ReducingReport:
    z1_dependence_of_K1: float
    radial: RadialTable
    factorization: ProductInner | None
    verdict: str  # "reducing_product" | "non_reducing"
    block_off_diagonal: float | None = None
    z2_dependence_of_K2max: float | None = None
    feasible_scan_min: float | None = None
    consistent: bool = True
    details: list = field(default_factory=list)

    def to_json(self) -> dict:
        fac = None
        if self.factorization is not None:
            fac = {"phi": self.factorization.phi.to_json(), "psi": self.factorization.psi.to_json()}
        return {
            "verdict": self.verdict,
            "consistent": self.consistent,
            "z1_dependence_of_K1": self.z1_dependence_of_K1,
            "z2_dependence_of_K2max": self.z2_dependence_of_K2max,
            "feasible_scan_min": self.feasible_scan_min,
            "block_off_diagonal": self.block_off_diagonal,
            "radial": self.radial.to_json(),
            "factorization": fac,
            "details": self.details,
        }


def theorem2_harness(theta, *, D: int = 4, grid_N: int = 256, strict: bool = True, n_scan: int = 20) -> ReducingReport:
    """Product inner functions have reducing Agler pairs; other rational inner functions do not.

    For products the closed-form pair must depend on one variable per kernel, the
    radial limits must vanish and ``S_z1`` must be block diagonal.  For
    non-products the computed ``K1max`` (and a scan of random feasible ``K1``)
    must depend on ``z1``.  Sampling evidence only, not a certificate.
    """
    f = extract_factors(theta)
    details = []
    if f is not None:
        a, b = agler.closed_form_product(f)
        dep = depends_only_z2(a.k1)
        dep2 = depends_only_z1(b.k2)
        radial = radial_limit_check(a.k2)
        block = shiftop.block_structure_check(f, D, grid_N, pair=a)
        if dep > Z_ONLY_TOL:
            details.append(f"K1max depends on z1: {dep:.3e}")
        if dep2 > Z_ONLY_TOL:
            details.append(f"K2max depends on z2: {dep2:.3e}")
        if not radial.passed:
            details.append("radial limit ladder did not decrease to zero")
        if not block.passed:
            details.append(f"block structure failed: off-diagonal {block.off_diagonal:.3e}")
        rep = ReducingReport(dep, radial, f, "reducing_product", block.off_diagonal, dep2, None, not details, details)
    else:
        sys = agler.solve_constraints(theta)
        pair = agler.extremal_pair(sys, agler.Flavor.MAX1MIN2)
        dep = depends_only_z2(pair.k1)
        radial = radial_limit_check(pair.k2)
        scan = None
        if sys.dimension:
            pts = agler.random_feasible(sys, n_scan, seed=2)
            scan = min(depends_only_z2(sys.pair(y).k1) for y in pts)
        block = shiftop.block_structure_check(as_rational_inner(theta), D, grid_N, pair=pair)
        if dep <= WITNESS_TOL:
            details.append(f"K1max is numerically z2-only: {dep:.3e}")
        if scan is not None and scan <= WITNESS_TOL:
            details.append(f"a feasible K1 is numerically z2-only: {scan:.3e}")
        if not radial.passed:
            details.append("radial limit ladder did not decrease to zero")
        rep = ReducingReport(dep, radial, None, "non_reducing", block.off_diagonal, None, scan, not details, details)
    if strict and not rep.consistent:
        raise InconsistentWithTheorem("; ".join(details))
    return rep
