"""A small dense log-barrier solver for block spectrahedra.

The feasible set is ``{y : F_j(y) = F0_j + sum_k y_k F_jk  >= 0  for every block j}``
with Hermitian blocks.  Problems here have at most a few dozen parameters, so
Newton steps use dense Hessians built from ``B_k = L^-1 F_k L^-H``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg


@dataclass(frozen=True)
class Blocks:
    """Affine Hermitian block map ``y -> [F0_j + sum_k y_k F_jk]``."""

    F0: tuple
    F: tuple  # each of shape (d, s_j, s_j)

    @property
    def dim(self) -> int:
        for f in self.F:
            return f.shape[0]
        return 0

    def at(self, y) -> list[np.ndarray]:
        return [f0 + np.tensordot(y, f, axes=1) for f0, f in zip(self.F0, self.F)]

    def nonempty(self) -> "Blocks":
        keep = [j for j, f0 in enumerate(self.F0) if f0.shape[0] > 0]
        return Blocks(tuple(self.F0[j] for j in keep), tuple(self.F[j] for j in keep))


def _chol(M):
    try:
        return linalg.cholesky(M, lower=True)
    except linalg.LinAlgError:
        return None


def _barrier_terms(blocks: Blocks, y):
    """Value, gradient and Hessian of ``-sum logdet F_j(y)`` (``None`` if infeasible)."""
    d = blocks.dim
    val = 0.0
    g = np.zeros(d)
    H = np.zeros((d, d))
    for M, Fj in zip(blocks.at(y), blocks.F):
        L = _chol(M)
        if L is None:
            return None
        val -= 2 * np.sum(np.log(np.diag(L).real))
        Li = linalg.solve_triangular(L, np.eye(M.shape[0]), lower=True)
        B = Li[None] @ Fj @ Li.conj().T[None]
        g -= np.trace(B, axis1=1, axis2=2).real
        Bf = B.reshape(d, -1)
        H += (Bf @ Bf.conj().T).real
    return val, g, H


def feasible(blocks: Blocks, y) -> bool:
    return all(_chol(M) is not None for M in blocks.at(y))


def center(blocks: Blocks, c, y, t: float, tol: float = 1e-11, max_iter: int = 200):
    """Minimize ``-t c.y - sum logdet F_j(y)`` from a strictly feasible ``y`` by damped Newton."""
    y = np.array(y, dtype=float)
    c = np.asarray(c, dtype=float)
    for _ in range(max_iter):
        val, g, H = _barrier_terms(blocks, y)
        g = g - t * c
        try:
            step = -linalg.solve(H, g, assume_a="pos")
        except linalg.LinAlgError:
            step = -linalg.lstsq(H, g)[0]
        dec = float(-g @ step)
        if dec / 2 <= tol:
            break
        f0 = val - t * c @ y
        s = 1.0
        while s > 1e-14:
            yn = y + s * step
            terms = _barrier_terms(blocks, yn)
            if terms is not None and terms[0] - t * c @ yn <= f0 - 0.25 * s * dec:
                break
            s *= 0.5
        else:
            break
        y = yn
    return y


def maximize(blocks: Blocks, c, y0, t0: float = 1.0, t_max: float = 1e8, factor: float = 10.0):
    """Barrier path for ``max c.y`` over the spectrahedron, ``t`` ladder ``t0 .. t_max``."""
    blocks = blocks.nonempty()
    c = np.asarray(c, dtype=float)
    nc = np.linalg.norm(c)
    c = c / nc if nc > 0 else c
    y = np.array(y0, dtype=float)
    t = t0
    while True:
        y = center(blocks, c, y, t)
        if t >= t_max:
            return y
        t = min(t * factor, t_max)


def analytic_center(blocks: Blocks, y0):
    return center(blocks.nonempty(), np.zeros(blocks.dim), y0, 0.0)


def phase_one(blocks: Blocks, y0=None, t_max: float = 1e8):
    """Maximize ``s`` with ``F_j(y) >= s I``; returns ``(y, s)``.

    ``s > 0`` certifies a strictly feasible point.  The feasible set must be
    bounded for the problem to be bounded; callers supply such spectrahedra.
    """
    blocks = blocks.nonempty()
    d = blocks.dim
    y0 = np.zeros(d) if y0 is None else np.asarray(y0, dtype=float)
    lam_min = min((linalg.eigvalsh(M)[0] for M in blocks.at(y0)), default=1.0)
    s0 = lam_min - 1.0
    F = tuple(
        np.concatenate([f, -np.eye(f.shape[1], dtype=complex)[None]], axis=0) for f in blocks.F
    )
    ext = Blocks(blocks.F0, F)
    c = np.zeros(d + 1)
    c[-1] = 1.0
    x = np.concatenate([y0, [s0]])
    t = 1.0
    while True:
        x = center(ext, c, x, t)
        if x[-1] > 0 or t >= t_max:
            return x[:-1], float(x[-1])
        t *= 10.0


def ray_range(blocks: Blocks, y, direction) -> tuple[float, float]:
    """Interval of ``a`` with ``F(y + a * direction) >= 0`` given ``F(y) > 0``."""
    lo, hi = -np.inf, np.inf
    for M, Fj in zip(blocks.at(y), blocks.F):
        if M.shape[0] == 0:
            continue
        D = np.tensordot(direction, Fj, axes=1)
        L = linalg.cholesky(M, lower=True)
        Li = linalg.solve_triangular(L, np.eye(L.shape[0]), lower=True)
        ev = linalg.eigvalsh(Li @ D @ Li.conj().T)
        # 1 + a * ev >= 0 for every eigenvalue
        pos, neg = ev[ev > 1e-15], ev[ev < -1e-15]
        if neg.size:
            hi = min(hi, float(np.min(-1.0 / neg)))
        if pos.size:
            lo = max(lo, float(np.max(-1.0 / pos)))
    return lo, hi
