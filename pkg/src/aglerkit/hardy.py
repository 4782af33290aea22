"""Hardy space H^2(D^2) on torus grids.

Functions are sampled at ``(w**j, w**k)`` with ``w = exp(2*pi*i/N)``; the
discrete spectrum ``c[a, b]`` is the coefficient of ``z1**a z2**b`` with
negative frequencies stored at indices ``>= N/2``.  For functions holomorphic
near the closed bidisk the coefficients decay geometrically, so aliasing is
negligible once ``N`` is a few times the effective degree.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import GridMismatch, NonDivisible, UnstableDenominator
from .poly2 import BiPoly, RationalFn, StabilityVerdict, evaluate, is_stable_bidisk, mul, partial_evaluate

DEFAULT_N = 256


def torus_points(N: int):
    """Meshgrid ``(Z1, Z2)`` of the N x N torus grid, indexed ``[j, k]``."""
    w = np.exp(2j * np.pi * np.arange(N) / N)
    return np.meshgrid(w, w, indexing="ij")


def to_spectrum(samples: np.ndarray) -> np.ndarray:
    N = samples.shape[-1]
    return sfft.fft2(samples, axes=(-2, -1), workers=-1) / (N * N)


def to_samples(spectrum: np.ndarray) -> np.ndarray:
    N = spectrum.shape[-1]
    return sfft.ifft2(spectrum, axes=(-2, -1), workers=-1) * (N * N)


def analytic_mask(N: int) -> np.ndarray:
    m = np.zeros((N, N), dtype=bool)
    m[: N // 2, : N // 2] = True
    return m


@dataclass(frozen=True, eq=False)
class TorusGrid:
    samples: np.ndarray
    spectrum: np.ndarray

    @property
    def size(self) -> int:
        return self.samples.shape[-1]

    @classmethod
    def from_samples(cls, samples) -> "TorusGrid":
        samples = np.asarray(samples, dtype=complex)
        return cls(samples, to_spectrum(samples))

    @classmethod
    def from_spectrum(cls, spectrum) -> "TorusGrid":
        spectrum = np.asarray(spectrum, dtype=complex)
        return cls(to_samples(spectrum), spectrum)

    @classmethod
    def from_coeffs(cls, coeffs, N: int) -> "TorusGrid":
        """Place an analytic coefficient block ``coeffs[a, b]`` on an N-grid."""
        coeffs = np.asarray(coeffs, dtype=complex)
        a, b = coeffs.shape
        if a > N // 2 or b > N // 2:
            raise GridMismatch(f"coefficient block {coeffs.shape} does not fit grid N={N}")
        spec = np.zeros((N, N), dtype=complex)
        spec[:a, :b] = coeffs
        return cls.from_spectrum(spec)

    def coeffs(self, a: int, b: int) -> np.ndarray:
        """Leading analytic coefficient block of shape ``(a, b)``."""
        return self.spectrum[:a, :b]

    def __add__(self, other: "TorusGrid") -> "TorusGrid":
        _check(self, other)
        return TorusGrid(self.samples + other.samples, self.spectrum + other.spectrum)

    def __sub__(self, other: "TorusGrid") -> "TorusGrid":
        _check(self, other)
        return TorusGrid(self.samples - other.samples, self.spectrum - other.spectrum)

    def scaled(self, s) -> "TorusGrid":
        return TorusGrid(self.samples * s, self.spectrum * s)

    def times(self, other: "TorusGrid") -> "TorusGrid":
        """Pointwise product on the grid."""
        _check(self, other)
        return TorusGrid.from_samples(self.samples * other.samples)

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))

    def evaluate(self, z1, z2):
        """Evaluate the analytic part of the spectrum at points of the bidisk."""
        return eval_coeffs(self.spectrum[: self.size // 2, : self.size // 2], z1, z2)


def _check(f: TorusGrid, g: TorusGrid):
    if f.samples.shape != g.samples.shape:
        raise GridMismatch(f"grid sizes differ: {f.samples.shape} vs {g.samples.shape}")


def eval_coeffs(c: np.ndarray, z1, z2):
    from numpy.polynomial import polynomial as npoly

    z1, z2 = np.broadcast_arrays(np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex))
    out = npoly.polyval2d(z1, z2, c)
    return out if out.ndim else complex(out)


def _stable_or_raise(den: BiPoly):
    if den.true_degree() == (0, 0):
        if abs(den.coeffs[0, 0]) == 0:
            raise UnstableDenominator("denominator is zero")
        return
    verdict = is_stable_bidisk(den)
    if verdict is not StabilityVerdict.STRICTLY_STABLE:
        raise UnstableDenominator(f"denominator is {verdict.value}")


def sample(f, N: int = DEFAULT_N) -> TorusGrid:
    """Sample a polynomial, rational function or callable on the N x N torus."""
    Z1, Z2 = torus_points(N)
    if isinstance(f, BiPoly):
        vals = evaluate(f, Z1, Z2)
    elif isinstance(f, RationalFn):
        _stable_or_raise(f.denominator)
        vals = evaluate(f.numerator, Z1, Z2) / evaluate(f.denominator, Z1, Z2)
    elif hasattr(f, "grid_values"):
        vals = f.grid_values(N)
    elif callable(f):
        vals = f(Z1, Z2)
    else:
        vals = np.broadcast_to(np.asarray(f, dtype=complex), (N, N))
    return TorusGrid.from_samples(np.array(vals, dtype=complex))


def inner_product(f: TorusGrid, g: TorusGrid) -> complex:
    """``(1/N^2) sum f * conj(g)`` over the grid (computed through Parseval)."""
    _check(f, g)
    return complex(np.vdot(g.spectrum.ravel(), f.spectrum.ravel()))


def project_plus(g: TorusGrid) -> TorusGrid:
    """Zero every Fourier coefficient with a negative index in either variable."""
    spec = g.spectrum * analytic_mask(g.size)
    return TorusGrid.from_spectrum(spec)


def _theta_values(theta, N: int) -> np.ndarray:
    if isinstance(theta, TorusGrid):
        return theta.samples
    return theta.grid_values(N)


def project_model_spectra(spec: np.ndarray, theta_vals: np.ndarray) -> np.ndarray:
    """Batched ``P_theta`` on spectra of shape ``(..., N, N)``."""
    N = spec.shape[-1]
    mask = analytic_mask(N)
    vals = to_samples(spec * mask)
    inner = to_spectrum(np.conj(theta_vals) * vals) * mask
    return spec * mask - to_spectrum(theta_vals * to_samples(inner))


def project_model(f: TorusGrid, theta) -> TorusGrid:
    """``P_theta f = f - theta * P_+(conj(theta) f)`` using ``|theta| = 1`` on T^2."""
    spec = project_model_spectra(f.spectrum, _theta_values(theta, f.size))
    return TorusGrid.from_spectrum(spec)


def shift_spectra(spec: np.ndarray, var: int) -> np.ndarray:
    """Multiplication by ``z_var`` (exact on the grid, cyclic in frequency)."""
    return np.roll(spec, 1, axis=spec.ndim - 3 + var)


def backshift_spectra(spec: np.ndarray, var: int) -> np.ndarray:
    """``T_{conj z_var}`` on analytic spectra: drop the ``z_var**0`` slice and shift down."""
    out = np.roll(spec, -1, axis=spec.ndim - 3 + var)
    return out * analytic_mask(spec.shape[-1])


def backshift_grid(g: TorusGrid, var: int) -> TorusGrid:
    return TorusGrid.from_spectrum(backshift_spectra(g.spectrum, var))


def shift_grid(g: TorusGrid, var: int) -> TorusGrid:
    return TorusGrid.from_spectrum(shift_spectra(g.spectrum, var))


def backshift(f: RationalFn, var: int, tol: float = 1e-10) -> RationalFn:
    """``(f - f|_{z_var=0}) / z_var`` as a rational function.

    With ``f = q / p`` the result is ``(q * p0 - q0 * p) / z_var`` over
    ``p * p0`` where ``p0, q0`` are ``p, q`` with ``z_var = 0``.
    """
    if var not in (1, 2):
        raise ValueError(f"var must be 1 or 2, got {var}")
    q, p = f.numerator, f.denominator
    q0 = partial_evaluate(q, var, 0.0)
    p0 = partial_evaluate(p, var, 0.0)
    top = mul(q, p0) - mul(q0, p)
    c = top.coeffs
    lead = c[0, :] if var == 1 else c[:, 0]
    if np.abs(lead).max(initial=0.0) > tol * max(np.abs(c).max(), 1.0):
        raise NonDivisible(f"numerator slice z{var}=0 does not vanish: {np.abs(lead).max():.3e}")
    if var == 1:
        if top.degree[0] == 0:
            reduced = BiPoly.const(0.0, (0, top.degree[1]))
        else:
            reduced = BiPoly(c[1:, :], (top.degree[0] - 1, top.degree[1]))
    else:
        if top.degree[1] == 0:
            reduced = BiPoly.const(0.0, (top.degree[0], 0))
        else:
            reduced = BiPoly(c[:, 1:], (top.degree[0], top.degree[1] - 1))
    return RationalFn(reduced, mul(p, p0))


def restrict_slice(f: TorusGrid, var: int, t: complex, n1: int | None = None) -> np.ndarray:
    """Samples of ``z_other -> f`` on a circle grid with ``z_var = t`` fixed."""
    N = f.size
    n1 = n1 or N
    h = N // 2
    c = f.spectrum[:h, :h]
    w = np.exp(2j * np.pi * np.arange(n1) / n1)
    if var == 2:
        return eval_coeffs(c, w, np.full(n1, t))
    return eval_coeffs(c, np.full(n1, t), w)
