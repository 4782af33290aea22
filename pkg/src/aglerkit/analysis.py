"""Commutator ranks, truncation ladders, spectra and the finite-rank harness."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import hardy, shiftop
from .errors import NotHermitian
from .innerfn import ProductInner, RationalInner, as_rational_inner

DEFAULT_LADDER = (4, 6, 8, 10, 12)
RANK_TOL = 1e-7
MIN_GAP = 1e4
CLUSTER_TOL = 1e-6


@dataclass
class Rung:
    D: int
    singular_values: np.ndarray
    rank: int

    def to_json(self) -> dict:
        return {"D": self.D, "sv": [float(s) for s in self.singular_values], "rank": self.rank}


@dataclass
class RankReport:
    ladder: list
    verdict: str  # "stabilized" | "growing" | "inconclusive"
    rank: int | None
    tol: float
    gap: float | None = None

    def to_json(self) -> dict:
        return {
            "ladder": [r.to_json() for r in self.ladder],
            "verdict": self.verdict,
            "rank": self.rank,
            "tol": self.tol,
            "gap": self.gap,
        }


def commutator(A) -> "shiftop.OperatorMatrix | np.ndarray":
    """``A* A - A A*``, returned Hermitian."""
    M = A.entries if isinstance(A, shiftop.OperatorMatrix) else np.asarray(A)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("commutator needs a square matrix")
    C = M.conj().T @ M - M @ M.conj().T
    C = 0.5 * (C + C.conj().T)
    if isinstance(A, shiftop.OperatorMatrix):
        return shiftop.OperatorMatrix(C, A.frame_id, "commutator")
    return C


def numerical_rank(sv: np.ndarray, tol: float = RANK_TOL) -> int:
    if sv.size == 0 or sv[0] <= 0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def spectral_gap(sv: np.ndarray, r: int) -> float:
    """``sigma_r / sigma_{r+1}`` (1-based), infinite when ``sigma_{r+1}`` is zero or absent."""
    if r == 0:
        return np.inf
    nxt = sv[r] if r < sv.size else 0.0
    return np.inf if nxt <= 0 else float(sv[r - 1] / nxt)


def _rung(theta, D: int, var: int, grid_N: int, tol: float) -> Rung:
    frame = shiftop.build_frame(theta, D, D, grid_N)
    C = shiftop.exact_commutator(theta, frame, var).entries
    sv = linalg.svdvals(C)
    return Rung(D, sv, numerical_rank(sv, tol))


def classify(ladder: list, tol: float) -> tuple[str, int | None, float | None]:
    ranks = [r.rank for r in ladder]
    if len(ladder) >= 2 and ranks[-1] == ranks[-2]:
        r = ranks[-1]
        gap = min(spectral_gap(rung.singular_values, r) for rung in ladder[-2:])
        if gap >= MIN_GAP:
            return "stabilized", r, gap
    if len(ladder) >= 4 and all(b > a for a, b in zip(ranks, ranks[1:])):
        return "growing", None, None
    return "inconclusive", None, None


def rank_ladder(theta, var: int = 1, ladder_degrees=DEFAULT_LADDER, tol: float = RANK_TOL, grid_N: int = hardy.DEFAULT_N, workers: int | None = None) -> RankReport:
    """Singular values of the compressed self-commutator along a ladder of square truncations."""
    degrees = list(ladder_degrees)
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rungs = list(pool.map(lambda D: _rung(theta, D, var, grid_N, tol), degrees))
    else:
        rungs = [_rung(theta, D, var, grid_N, tol) for D in degrees]
    verdict, rank, gap = classify(rungs, tol)
    return RankReport(rungs, verdict, rank, tol, gap)


def default_sample_points(n_expected: int, seed: int = 0, radius: float = 0.8, grid_N: int = hardy.DEFAULT_N) -> np.ndarray:
    """Sample points for kernel images; the radius shrinks on coarse grids so that the
    kernel's geometric tail ``|w|^(N/2)`` stays below ``1e-12``."""
    from .agler import random_points

    count = max(8, 2 * (n_expected + 2))
    radius = min(radius, 1e-12 ** (2.0 / grid_N))
    return random_points(np.random.default_rng(seed), count, radius)


def _backshift_kernel(theta, w, K: hardy.TorusGrid, bt: hardy.TorusGrid) -> hardy.TorusGrid:
    """``T_conj(z1) K_w = conj(w1) K_w - conj(theta(w)) (T_conj(z1) theta) / (1 - z2 conj(w2))``."""
    N = K.size
    _, Z2 = hardy.torus_points(N)
    tw = complex(theta(complex(w[0]), complex(w[1])))
    vals = np.conj(w[0]) * K.samples - np.conj(tw) * bt.samples / (1 - Z2 * np.conj(w[1]))
    return hardy.TorusGrid.from_samples(vals)


def kernel_commutator_images(theta, points, grid_N: int = hardy.DEFAULT_N) -> list:
    """``[S*_z1, S_z1] K_w`` for each ``w`` as torus grids, without any frame."""
    bt = shiftop._backshift_theta_grid(theta, grid_N, 1)
    out = []
    for w in np.asarray(points, dtype=complex):
        K = shiftop.kernel_grid(theta, w, grid_N)
        ssK = hardy.backshift_grid(shiftop.shift_via_lemma(theta, K), 1)
        sbK = shiftop.shift_via_lemma(theta, _backshift_kernel(theta, w, K, bt))
        out.append(ssK - sbK)
    return out


def kernel_sampling_rank(theta, sample_points=None, grid_N: int = hardy.DEFAULT_N, tol: float = RANK_TOL, expected: int | None = None) -> int:
    """Numerical rank of the Gram of ``[S*_z1, S_z1] K_w`` over sample points ``w``."""
    if sample_points is None:
        n = expected if expected is not None else as_rational_inner(theta).degree[1]
        sample_points = default_sample_points(n, grid_N=grid_N)
    hs = kernel_commutator_images(theta, sample_points, grid_N)
    G = np.array([[hardy.inner_product(a, b) for a in hs] for b in hs])
    lam = np.clip(linalg.eigvalsh(0.5 * (G + G.conj().T))[::-1], 0.0, None)
    return numerical_rank(np.sqrt(lam), tol)


def eigen_multiplicities(A, cluster_tol: float = CLUSTER_TOL) -> list[tuple[float, int]]:
    """Clusters of eigenvalues of a Hermitian matrix, zero cluster excluded.

    Eigenvalues are normalized by the largest modulus before clustering with an
    absolute tolerance; reported values are in the original scale.  An eigenvalue
    counts as zero when it is below ``cluster_tol`` relative to ``max(1, |A|)``, so a
    numerically vanishing matrix reports no clusters.
    """
    M = A.entries if isinstance(A, shiftop.OperatorMatrix) else np.asarray(A)
    scale = max(np.abs(M).max(initial=0.0), 1e-300)
    if np.abs(M - M.conj().T).max(initial=0.0) > 1e-10 * scale:
        raise NotHermitian("matrix is not Hermitian")
    lam = linalg.eigvalsh(0.5 * (M + M.conj().T)) if M.size else np.zeros(0)
    top = np.abs(lam).max(initial=0.0)
    if top <= cluster_tol:
        return []
    x = lam / top
    out = []
    start = 0
    for i in range(1, x.size + 1):
        if i == x.size or x[i] - x[i - 1] > cluster_tol:
            group = lam[start:i]
            if np.abs(group).max() > cluster_tol * max(top, 1.0):
                out.append((float(group.mean()), int(group.size)))
            start = i
    return out


def split_blocks(f, D: int, grid_N: int = hardy.DEFAULT_N, pair=None):
    """``(S_z1, [S*_z1, S_z1])`` over the split frame, with the size of the first block."""
    from . import agler

    if pair is None:
        pair = agler.agler_decompose(f, agler.Flavor.MAX1MIN2)
    sf = shiftop.build_split_frame(f, pair, D, grid_N)
    return shiftop.split_operator(sf, 1), shiftop.split_commutator(sf, 1), sf.s1.shape[0]


def block_commutator_clusters(f: ProductInner, D: int, grid_N: int = hardy.DEFAULT_N, cluster_tol: float = CLUSTER_TOL) -> dict:
    """Eigenvalue clusters of the commutator restricted to each Agler block."""
    _, C, r1 = split_blocks(f, D, grid_N)
    c1, c2 = C[:r1, :r1], C[r1:, r1:]
    return {
        "s1": eigen_multiplicities(c1, cluster_tol) if c1.size else [],
        "s2": eigen_multiplicities(c2, cluster_tol) if c2.size else [],
        "s2_norm": float(np.abs(linalg.eigvalsh(c2)).max(initial=0.0)) if c2.size else 0.0,
        "off_block": float(np.abs(C[:r1, r1:]).max(initial=0.0)),
    }


@dataclass
class PointSpectrumReport:
    zeros: list
    eigenvalues: list
    max_distance: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "zeros": [[z.real, z.imag] for z in self.zeros],
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "max_distance": self.max_distance,
            "passed": self.passed,
        }


def point_spectrum_check(f: ProductInner, D: int = 4, grid_N: int = hardy.DEFAULT_N, tol: float = 1e-7) -> PointSpectrumReport:
    """Every zero of ``phi`` is an eigenvalue of the ``S2`` diagonal block of ``S_z1``."""
    if f.phi.degree == 0:
        raise ValueError("phi must be nonconstant")
    M, _, r1 = split_blocks(f, D, grid_N)
    ev = linalg.eigvals(M[r1:, r1:])
    zeros = list(f.phi.zeros)
    dist = max(float(np.min(np.abs(ev - a))) for a in zeros)
    return PointSpectrumReport(zeros, list(ev), dist, dist <= tol)


@dataclass
class Theorem1Verdict:
    degree: tuple
    predicted: str
    ladder: RankReport
    sampling_rank: int | None
    consistent: bool
    details: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "degree": list(self.degree),
            "predicted": self.predicted,
            "ladder": self.ladder.to_json(),
            "sampling_rank": self.sampling_rank,
            "verdict": "consistent" if self.consistent else "violation",
            "details": self.details,
        }


def theorem1_harness(theta, ladder_degrees=DEFAULT_LADDER, tol: float = RANK_TOL, grid_N: int = hardy.DEFAULT_N, workers: int | None = None) -> Theorem1Verdict:
    """Finite rank ``n`` exactly for degrees ``(1, n)`` and ``(0, n)``; growing ranks otherwise."""
    m, n = theta.degree if isinstance(theta, ProductInner) else as_rational_inner(theta).degree
    report = rank_ladder(theta, 1, ladder_degrees, tol, grid_N, workers)
    details = []
    if m <= 1:
        predicted = f"stabilized({n})"
        ksr = kernel_sampling_rank(theta, grid_N=grid_N, tol=tol, expected=n)
        if report.verdict != "stabilized" or report.rank != n:
            details.append(f"ladder verdict {report.verdict} rank {report.rank}, expected {n}")
        if ksr != n:
            details.append(f"kernel sampling rank {ksr}, expected {n}")
        for r in report.ladder:
            if r.rank > n:
                details.append(f"rung D={r.D} has rank {r.rank} > {n}")
    else:
        predicted = "growing"
        ksr = None
        if report.verdict != "growing":
            details.append(f"ladder verdict {report.verdict}, expected growing")
    return Theorem1Verdict((m, n), predicted, report, ksr, not details, details)
