"""Dense bivariate polynomials: arithmetic, reflection and bidisk stability.

A :class:`BiPoly` stores ``coeffs[i, j]``, the coefficient of ``z1**i * z2**j``,
together with a declared bidegree ``(m, n)``.  The declared degree matters:
the reflection ``z1**m z2**n conj(p(1/conj z1, 1/conj z2))`` is taken relative
to it, so ``BiPoly.const(1, degree=(1, 1))`` reflects to ``z1*z2``.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import optimize, signal

from .errors import DegenerateInput, InputError

ZERO_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class BiPoly:
    coeffs: np.ndarray
    degree: tuple[int, int] = field(default=None)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex, copy=True)
        if c.ndim == 0:
            c = c.reshape(1, 1)
        elif c.ndim == 1:
            c = c.reshape(-1, 1)
        if self.degree is None:
            deg = (c.shape[0] - 1, c.shape[1] - 1)
        else:
            deg = (int(self.degree[0]), int(self.degree[1]))
            if min(deg) < 0:
                raise ValueError(f"negative degree {deg}")
            c = _fit(c, deg)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "degree", deg)

    # -- constructors -------------------------------------------------------
    @classmethod
    def const(cls, value=1.0, degree=(0, 0)) -> "BiPoly":
        c = np.zeros((degree[0] + 1, degree[1] + 1), dtype=complex)
        c[0, 0] = value
        return cls(c, degree)

    @classmethod
    def monomial(cls, a: int, b: int, coeff=1.0, degree=None) -> "BiPoly":
        degree = (a, b) if degree is None else degree
        c = np.zeros((degree[0] + 1, degree[1] + 1), dtype=complex)
        c[a, b] = coeff
        return cls(c, degree)

    @classmethod
    def from_terms(cls, terms: dict, degree=None) -> "BiPoly":
        """Build from ``{(i, j): coeff}``."""
        if not terms:
            return cls.const(0.0, degree or (0, 0))
        m = max(i for i, _ in terms)
        n = max(j for _, j in terms)
        c = np.zeros((m + 1, n + 1), dtype=complex)
        for (i, j), v in terms.items():
            c[i, j] += v
        return cls(c, degree)

    @classmethod
    def in_z1(cls, coeffs) -> "BiPoly":
        """One-variable polynomial in z1 from ascending coefficients."""
        return cls(np.asarray(coeffs, dtype=complex).reshape(-1, 1))

    @classmethod
    def in_z2(cls, coeffs) -> "BiPoly":
        return cls(np.asarray(coeffs, dtype=complex).reshape(1, -1))

    # -- basic queries ------------------------------------------------------
    @property
    def shape(self):
        return self.coeffs.shape

    def true_degree(self, tol: float = ZERO_TOL) -> tuple[int, int]:
        c = np.abs(self.coeffs)
        scale = max(c.max(), 1e-300)
        rows = np.nonzero(c.max(axis=1) > tol * scale)[0]
        cols = np.nonzero(c.max(axis=0) > tol * scale)[0]
        if rows.size == 0:
            return (0, 0)
        return (int(rows[-1]), int(cols[-1]))

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def __call__(self, z1, z2):
        return evaluate(self, z1, z2)

    def __add__(self, other):
        return add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, scale(_coerce(other), -1.0))

    def __rsub__(self, other):
        return add(_coerce(other), scale(self, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, BiPoly):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __repr__(self):
        terms = []
        for (i, j), v in np.ndenumerate(self.coeffs):
            if v != 0:
                terms.append(f"({v:.6g})z1^{i}z2^{j}")
        return f"BiPoly(deg={self.degree}: {' + '.join(terms) or '0'})"

    def allclose(self, other: "BiPoly", atol: float = 1e-12) -> bool:
        m = max(self.degree[0], other.degree[0])
        n = max(self.degree[1], other.degree[1])
        return bool(np.allclose(_fit(self.coeffs, (m, n)), _fit(other.coeffs, (m, n)), rtol=0, atol=atol))

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "degree": [self.degree[0], self.degree[1]],
            "coeffs": [[[float(v.real), float(v.imag)] for v in row] for row in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "BiPoly":
        try:
            degree = tuple(int(d) for d in data["degree"])
            rows = data["coeffs"]
            arr = np.array([[_parse_complex(v) for v in row] for row in rows], dtype=complex)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed polynomial JSON: {exc}") from exc
        if arr.shape != (degree[0] + 1, degree[1] + 1):
            raise InputError(f"coefficient array shape {arr.shape} does not match degree {degree}")
        return cls(arr, degree)


def _parse_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex entry must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def _fit(c: np.ndarray, deg) -> np.ndarray:
    """Pad or crop ``c`` to shape ``deg + 1``; cropping must only drop zeros."""
    out = np.zeros((deg[0] + 1, deg[1] + 1), dtype=complex)
    r = min(c.shape[0], deg[0] + 1)
    s = min(c.shape[1], deg[1] + 1)
    out[:r, :s] = c[:r, :s]
    dropped = np.abs(c).sum() - np.abs(c[:r, :s]).sum()
    if dropped > 0:
        raise ValueError(f"declared degree {tuple(deg)} is smaller than the coefficient support")
    return out


def _coerce(x) -> BiPoly:
    return x if isinstance(x, BiPoly) else BiPoly.const(x)


# -- ring operations ---------------------------------------------------------

def add(p: BiPoly, q: BiPoly) -> BiPoly:
    m = max(p.degree[0], q.degree[0])
    n = max(p.degree[1], q.degree[1])
    return BiPoly(_fit(p.coeffs, (m, n)) + _fit(q.coeffs, (m, n)), (m, n))


def mul(p: BiPoly, q: BiPoly) -> BiPoly:
    deg = (p.degree[0] + q.degree[0], p.degree[1] + q.degree[1])
    return BiPoly(signal.convolve2d(p.coeffs, q.coeffs), deg)


def scale(p: BiPoly, s) -> BiPoly:
    return BiPoly(p.coeffs * s, p.degree)


def evaluate(p: BiPoly, z1, z2):
    """Evaluate by nested Horner; ``z1`` and ``z2`` broadcast against each other."""
    z1, z2 = np.broadcast_arrays(np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex))
    out = npoly.polyval2d(z1, z2, p.coeffs)
    return out if out.ndim else complex(out)


def partial_evaluate(p: BiPoly, var: int, value) -> BiPoly:
    """Fix ``z_var = value``; the result is a polynomial in the other variable.

    For ``var=1`` the result has degree ``(0, n)``, for ``var=2`` degree ``(m, 0)``.
    """
    if var == 1:
        powers = value ** np.arange(p.degree[0] + 1)
        return BiPoly((powers @ p.coeffs).reshape(1, -1), (0, p.degree[1]))
    if var == 2:
        powers = value ** np.arange(p.degree[1] + 1)
        return BiPoly((p.coeffs @ powers).reshape(-1, 1), (p.degree[0], 0))
    raise ValueError(f"var must be 1 or 2, got {var}")


def reflect(p: BiPoly) -> BiPoly:
    """``z1**m z2**n * conj(p(1/conj(z1), 1/conj(z2)))`` for the declared degree."""
    return BiPoly(np.conj(p.coeffs[::-1, ::-1]), p.degree)


def conj_coeffs(p: BiPoly) -> BiPoly:
    """The polynomial whose coefficients are conjugated, ``conj(p(conj z))``."""
    return BiPoly(np.conj(p.coeffs), p.degree)


# -- stability ---------------------------------------------------------------

class StabilityVerdict(enum.Enum):
    STRICTLY_STABLE = "strictly_stable"
    BOUNDARY_ZERO = "boundary_zero"
    UNSTABLE = "unstable"


def _min_root_modulus(poly_desc: np.ndarray) -> float:
    """Smallest root modulus of a one-variable polynomial (ascending coeffs)."""
    c = np.trim_zeros(poly_desc[::-1], "f")
    if c.size == 0:
        return 0.0
    if c.size == 1:
        return np.inf
    return float(np.abs(np.roots(c)).min())


def _slice_min_moduli(c: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """For each angle t, smallest |root| of z2 -> p(e^{it}, z2)."""
    tau = np.exp(1j * angles)
    slices = npoly.polyval(tau, c).T if c.shape[0] > 1 else np.broadcast_to(c[0], (len(angles), c.shape[1]))
    slices = np.atleast_2d(slices)
    if slices.shape[1] == 1:
        return np.where(np.abs(slices[:, 0]) > 0, np.inf, 0.0)
    scale_ = np.abs(slices).max(axis=1, keepdims=True)
    lead = np.abs(slices[:, -1]) > 1e-12 * np.maximum(scale_[:, 0], 1e-300)
    out = np.empty(len(angles))
    if np.any(lead):
        s = slices[lead]
        deg = s.shape[1] - 1
        comp = np.zeros((s.shape[0], deg, deg), dtype=complex)
        comp[:, 0, :] = -s[:, -2::-1] / s[:, -1:]
        if deg > 1:
            comp[:, np.arange(1, deg), np.arange(deg - 1)] = 1.0
        out[lead] = np.abs(np.linalg.eigvals(comp)).min(axis=1)
    for k in np.nonzero(~lead)[0]:
        out[k] = _min_root_modulus(slices[k])
    return out


def _refined_min(c: np.ndarray, n_points: int) -> float:
    angles = 2 * np.pi * np.arange(n_points) / n_points
    vals = _slice_min_moduli(c, angles)
    k = int(np.argmin(vals))
    best = float(vals[k])
    if not np.isfinite(best) or best == 0.0:
        return best
    h = 2 * np.pi / n_points
    res = optimize.minimize_scalar(
        lambda t: float(_slice_min_moduli(c, np.array([t]))[0]),
        bounds=(angles[k] - h, angles[k] + h),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return min(best, float(res.fun))


@functools.lru_cache(maxsize=512)
def _stability_cached(key: bytes, shape: tuple, margin: float, n_points: int) -> StabilityVerdict:
    c = np.frombuffer(key, dtype=complex).reshape(shape)
    if abs(c[0, 0]) <= ZERO_TOL * np.abs(c).max():
        return StabilityVerdict.UNSTABLE
    moduli = [
        _refined_min(c, n_points),      # z1 on T, roots in z2
        _refined_min(c.T, n_points),    # z2 on T, roots in z1
        _min_root_modulus(c[0, :]),     # z1 = 0
        _min_root_modulus(c[:, 0]),     # z2 = 0
    ]
    lo = min(moduli)
    if lo > 1.0 + margin:
        return StabilityVerdict.STRICTLY_STABLE
    if lo >= 1.0 - margin:
        return StabilityVerdict.BOUNDARY_ZERO
    return StabilityVerdict.UNSTABLE


def is_stable_bidisk(p: BiPoly, margin: float = 1e-9, n_points: int = 512) -> StabilityVerdict:
    """Classify the zero set of ``p`` relative to the closed bidisk.

    Roots of one-variable slices are computed for every point of an
    ``n_points`` torus grid in each variable (with a local refinement around
    the worst slice), plus the interior slices ``z1 = 0`` and ``z2 = 0``.
    """
    if p.is_zero():
        raise DegenerateInput("polynomial is identically zero")
    c = np.ascontiguousarray(p.coeffs)
    return _stability_cached(c.tobytes(), c.shape, float(margin), int(n_points))


# -- factorization -----------------------------------------------------------

def factor_rank1(p: BiPoly, tol: float = 1e-10):
    """Split ``p = p1(z1) * p2(z2)`` when the coefficient matrix has rank one.

    Returns ``(p1, p2)`` with degrees ``(m, 0)`` and ``(0, n)``, scaled so that
    ``p2(0)`` is real and nonnegative where possible, or ``None``.
    """
    c = p.coeffs
    if not np.any(c):
        return None
    u, s, vh = np.linalg.svd(c)
    if s.size > 1 and s[1] > tol * s[0]:
        return None
    a = u[:, 0] * np.sqrt(s[0])
    b = vh[0, :] * np.sqrt(s[0])
    if abs(b[0]) > 0:
        phase = b[0] / abs(b[0])
        b = b / phase
        a = a * phase
    return BiPoly(a.reshape(-1, 1), (p.degree[0], 0)), BiPoly(b.reshape(1, -1), (0, p.degree[1]))


@dataclass(frozen=True, eq=False)
class RationalFn:
    """Quotient ``numerator / denominator`` of two bivariate polynomials."""

    numerator: BiPoly
    denominator: BiPoly

    def __call__(self, z1, z2):
        return evaluate(self.numerator, z1, z2) / evaluate(self.denominator, z1, z2)

    @classmethod
    def from_poly(cls, p: BiPoly) -> "RationalFn":
        return cls(p, BiPoly.const(1.0))
