"""Compressed shifts on truncations of the model space ``K_theta``.

Frame vectors are stored as analytic coefficient blocks of shape ``(N/2, N/2)``;
every inner product is Parseval on those blocks.  Vectors are projected in
chunks so that a (12, 12) frame on a 256 grid stays well under a gigabyte.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import hardy
from .errors import DegenerateFrame, NotInModelSpace
from .innerfn import ProductInner, RationalInner, backshift_theta

DROP_TOL = 1e-8
CHUNK = 24
_frame_ids = itertools.count()


def theta_grid(theta, N: int) -> np.ndarray:
    return theta.grid_values(N)


def _embed(c: np.ndarray, N: int) -> np.ndarray:
    """Analytic blocks ``(..., N/2, N/2)`` -> full spectra ``(..., N, N)``."""
    h = N // 2
    out = np.zeros(c.shape[:-2] + (N, N), dtype=complex)
    out[..., :h, :h] = c
    return out


def project_blocks(c: np.ndarray, theta, N: int) -> np.ndarray:
    """``P_theta`` applied to a stack of analytic coefficient blocks."""
    h = N // 2
    tv = theta_grid(theta, N)
    out = np.empty_like(c)
    for s in range(0, c.shape[0], CHUNK):
        spec = hardy.project_model_spectra(_embed(c[s : s + CHUNK], N), tv)
        out[s : s + CHUNK] = spec[..., :h, :h]
    return out


def shift_blocks(c: np.ndarray, var: int) -> np.ndarray:
    """Multiplication by ``z_var`` on coefficient blocks (the top coefficient is dropped)."""
    out = np.zeros_like(c)
    if var == 1:
        out[..., 1:, :] = c[..., :-1, :]
    else:
        out[..., :, 1:] = c[..., :, :-1]
    return out


def backshift_blocks(c: np.ndarray, var: int) -> np.ndarray:
    out = np.zeros_like(c)
    if var == 1:
        out[..., :-1, :] = c[..., 1:, :]
    else:
        out[..., :, :-1] = c[..., :, 1:]
    return out


def gram(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """``G[j, k] = <a_k, b_j>`` for stacks of coefficient blocks."""
    b = a if b is None else b
    return b.reshape(b.shape[0], -1).conj() @ a.reshape(a.shape[0], -1).T


def orthonormalize(raw: np.ndarray, drop_tol: float = DROP_TOL):
    """Column-pivoted QR on coefficient vectors.

    Returns ``(basis, transform, kept)`` with ``basis = transform^T raw`` stacked,
    ``transform`` of shape ``(len(raw), dim)``.  Columns whose pivoted residual is
    at most ``drop_tol`` are dropped.
    """
    V = raw.reshape(raw.shape[0], -1).T
    if V.shape[1] == 0:
        return raw[:0], np.zeros((0, 0), complex), np.zeros(0, int)
    Q, R, piv = linalg.qr(V, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    r = int(np.sum(diag > drop_tol))
    T = np.zeros((V.shape[1], r), dtype=complex)
    T[piv[:r]] = linalg.solve_triangular(R[:r, :r], np.eye(r), lower=False)
    basis = Q[:, :r].T.reshape((r,) + raw.shape[1:])
    return basis, T, np.sort(piv[:r])


@dataclass(frozen=True, eq=False)
class ModelSpaceFrame:
    theta: object
    trunc_degree: tuple[int, int]
    grid_N: int
    raw: np.ndarray  # projected raw vectors, coefficient blocks
    basis: np.ndarray  # orthonormal e_k, coefficient blocks
    transform: np.ndarray
    drop_tol: float = DROP_TOL
    labels: tuple = ()
    frame_id: int = field(default_factory=lambda: next(_frame_ids))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def grid(self, k: int) -> hardy.TorusGrid:
        return hardy.TorusGrid.from_spectrum(_embed(self.basis[k], self.grid_N))

    def coefficients_of(self, c: np.ndarray) -> np.ndarray:
        """``<f, e_k>`` for a coefficient block ``c``."""
        return gram(c[None], self.basis)[:, 0]

    def evaluate(self, k: int, z1, z2):
        return hardy.eval_coeffs(self.basis[k], z1, z2)


def expected_dim(degree, D1: int, D2: int) -> int:
    """``(D1+1)(D2+1)`` minus the monomials of the box lying in ``theta H^2``."""
    m, n = degree
    return (D1 + 1) * (D2 + 1) - max(D1 - m + 1, 0) * max(D2 - n + 1, 0)


def build_frame(theta, D1: int, D2: int, grid_N: int = hardy.DEFAULT_N, drop_tol: float = DROP_TOL) -> ModelSpaceFrame:
    if D1 < 0 or D2 < 0:
        raise ValueError("truncation degrees must be nonnegative")
    h = grid_N // 2
    if D1 >= h or D2 >= h:
        raise ValueError(f"grid N={grid_N} too small for truncation {(D1, D2)}")
    labels = [(a, b) for a in range(D1 + 1) for b in range(D2 + 1)]
    c = np.zeros((len(labels), h, h), dtype=complex)
    for k, (a, b) in enumerate(labels):
        c[k, a, b] = 1.0
    raw = project_blocks(c, theta, grid_N)
    basis, T, kept = orthonormalize(raw, drop_tol)
    if basis.shape[0] == 0:
        raise DegenerateFrame("model space truncation is trivial")
    return ModelSpaceFrame(theta, (D1, D2), grid_N, raw, basis, T, drop_tol, tuple(labels[k] for k in kept))


def frame_from_vectors(theta, vectors: np.ndarray, grid_N: int, drop_tol: float = DROP_TOL, trunc=(0, 0), labels=()) -> ModelSpaceFrame:
    """Orthonormal frame spanned by given members of ``K_theta`` (coefficient blocks)."""
    basis, T, kept = orthonormalize(vectors, drop_tol)
    if basis.shape[0] == 0:
        raise DegenerateFrame("no independent vectors")
    return ModelSpaceFrame(theta, tuple(trunc), grid_N, vectors, basis, T, drop_tol, tuple(labels))


# -- operators ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    frame_id: int
    label: str = "custom"
    leakage: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.frame_id, self.label + "*")


def compress_shift(theta, frame: ModelSpaceFrame, var: int = 1) -> OperatorMatrix:
    """``M[j, k] = <P_theta(z_var e_k), e_j> = <z_var e_k, e_j>``.

    The leakage of column ``k`` is the squared norm of ``P_theta(z_var e_k)`` outside
    the frame span (nonzero only through truncation).
    """
    ze = shift_blocks(frame.basis, var)
    M = gram(ze, frame.basis)
    pz = project_blocks(ze, theta, frame.grid_N)
    norms = np.real(np.einsum("kab,kab->k", pz.conj(), pz))
    leak = np.maximum(norms - np.sum(np.abs(M) ** 2, axis=0), 0.0)
    return OperatorMatrix(M, frame.frame_id, f"S_z{var}", leak)


def exact_commutator(theta, frame: ModelSpaceFrame, var: int = 1) -> OperatorMatrix:
    """Compression of the true ``[S*, S]`` to the frame span.

    ``<[S*,S] e_k, e_j> = <S e_k, S e_j> - <S* e_k, S* e_j>`` with ``S = P_theta z``
    applied in the full space and ``S*`` the backward shift (which preserves ``K_theta``).
    Unlike ``A*A - AA*`` of the truncated matrix this has no artificial edge terms.
    """
    pz = project_blocks(shift_blocks(frame.basis, var), theta, frame.grid_N)
    bs = backshift_blocks(frame.basis, var)
    C = gram(pz) - gram(bs)
    C = 0.5 * (C + C.conj().T)
    return OperatorMatrix(C, frame.frame_id, f"commutator_z{var}")


def commutator_apply(theta, c: np.ndarray, N: int, var: int = 1) -> np.ndarray:
    """``[S*, S] f = T_conj(z) P_theta(z f) - P_theta(z T_conj(z) f)`` on coefficient blocks."""
    c = np.asarray(c)
    single = c.ndim == 2
    c = c[None] if single else c
    left = backshift_blocks(project_blocks(shift_blocks(c, var), theta, N), var)
    right = project_blocks(shift_blocks(backshift_blocks(c, var), var), theta, N)
    out = left - right
    return out[0] if single else out


def kernel_grid(theta, w, N: int) -> hardy.TorusGrid:
    """The reproducing kernel ``K_w`` of ``K_theta`` sampled on the torus."""
    w1, w2 = complex(w[0]), complex(w[1])
    Z1, Z2 = hardy.torus_points(N)
    tw = complex(theta(w1, w2))
    vals = (1 - theta_grid(theta, N) * np.conj(tw)) / ((1 - Z1 * np.conj(w1)) * (1 - Z2 * np.conj(w2)))
    return hardy.TorusGrid.from_samples(vals)


def kernel_at(theta, frame: ModelSpaceFrame, w) -> np.ndarray:
    """Frame coefficients ``<K_w, e_k> = conj(e_k(w))`` computed by quadrature."""
    h = frame.grid_N // 2
    K = kernel_grid(theta, w, frame.grid_N)
    return frame.coefficients_of(K.spectrum[:h, :h])


def _backshift_theta_grid(theta, N: int, var: int = 1) -> hardy.TorusGrid:
    if isinstance(theta, RationalInner):
        return hardy.sample(backshift_theta(theta, var), N)
    return hardy.backshift_grid(hardy.TorusGrid.from_samples(np.array(theta_grid(theta, N))), var)


def shift_via_lemma(theta, f: hardy.TorusGrid, check_tol: float = 1e-8) -> hardy.TorusGrid:
    """``S_z1 f = z1 f - g(z2) theta`` with ``g_j = <f, w2^j T_conj(z1) theta>``."""
    N = f.size
    tv = theta_grid(theta, N)
    pf = hardy.project_model(f, hardy.TorusGrid(np.asarray(tv), None))
    if (pf - f).norm() > check_tol * max(f.norm(), 1.0):
        raise NotInModelSpace(f"|P_theta f - f| = {(pf - f).norm():.3e}")
    bt = _backshift_theta_grid(theta, N, 1)
    prod = hardy.to_spectrum(f.samples * np.conj(bt.samples))
    g = np.zeros(N, dtype=complex)
    g[: N // 2] = prod[0, : N // 2]
    Z1, Z2 = hardy.torus_points(N)
    g_vals = np.fft.ifft(g)[None, :] * N
    return hardy.TorusGrid.from_samples(Z1 * f.samples - g_vals * tv)


# -- Agler split frames and block structure ------------------------------------------

def _rational_blocks(num_coeffs: np.ndarray, denom, N: int) -> np.ndarray:
    """Analytic coefficient block of ``q / p`` for a polynomial coefficient array ``q``."""
    from .poly2 import evaluate

    Z1, Z2 = hardy.torus_points(N)
    num = np.polynomial.polynomial.polyval2d(Z1, Z2, num_coeffs)
    spec = hardy.to_spectrum(num / evaluate(denom, Z1, Z2))
    return spec[: N // 2, : N // 2]


def split_vectors(pair, D: int, N: int):
    """Coefficient blocks spanning the two Agler subspaces of a pair, truncated at ``D``.

    ``S1 = span z1^a f_i / p`` (``f_i`` numerators of ``K1``), ``S2 = span z2^b g_j / p``.
    Ordering is level-major: all ``i`` for ``a = 0``, then ``a = 1``, and so on.
    """
    out = []
    for k, var in ((pair.k1, 1), (pair.k2, 2)):
        funcs = k.column_functions()
        base = np.array([_rational_blocks(q.coeffs, p, N) for q, p in funcs]).reshape(-1, N // 2, N // 2)
        levels = [base]
        for _ in range(D):
            levels.append(shift_blocks(levels[-1], var))
        out.append(np.concatenate(levels, axis=0) if base.size else base)
    return out[0], out[1]


@dataclass
class SplitFrame:
    theta: object
    grid_N: int
    s1: np.ndarray  # orthonormal blocks of S1
    s2: np.ndarray
    n1: int  # functions per level in S1
    n2: int

    @property
    def basis(self) -> np.ndarray:
        return np.concatenate([self.s1, self.s2], axis=0)


def _levelwise_orthonormal(v: np.ndarray, per_level: int) -> np.ndarray:
    """Gram-Schmidt in level-major order without pivoting (keeps tensor structure)."""
    if v.shape[0] == 0:
        return v
    V = v.reshape(v.shape[0], -1).T
    Q, R = linalg.qr(V, mode="economic")
    keep = np.abs(np.diag(R)) > DROP_TOL
    # fix phases so that diag(R) > 0
    ph = np.sign(np.diag(R))
    ph[ph == 0] = 1
    Q = Q * ph
    return Q[:, keep].T.reshape((int(keep.sum()),) + v.shape[1:])


def build_split_frame(theta, pair, D: int, N: int = hardy.DEFAULT_N) -> SplitFrame:
    v1, v2 = split_vectors(pair, D, N)
    n1 = v1.shape[0] // (D + 1) if v1.size else 0
    n2 = v2.shape[0] // (D + 1) if v2.size else 0
    return SplitFrame(theta, N, _levelwise_orthonormal(v1, n1), _levelwise_orthonormal(v2, n2), n1, n2)


def split_operator(sf: SplitFrame, var: int = 1) -> np.ndarray:
    """``<z_var x_k, x_j>`` over the concatenated split basis."""
    B = sf.basis
    return gram(shift_blocks(B, var), B)


def split_commutator(sf: SplitFrame, var: int = 1) -> np.ndarray:
    B = sf.basis
    pz = project_blocks(shift_blocks(B, var), sf.theta, sf.grid_N)
    bs = backshift_blocks(B, var)
    C = gram(pz) - gram(bs)
    return 0.5 * (C + C.conj().T)


def one_variable_compression(phi) -> np.ndarray:
    """Matrix of ``P_{K_phi} T_z`` in the Takenaka-Malmquist basis (by 1-D quadrature)."""
    M = 512
    w = np.exp(2j * np.pi * np.arange(M) / M)
    E = np.array(phi.model_basis(w))
    if E.size == 0:
        return np.zeros((0, 0), dtype=complex)
    return (E.conj() @ (w * E).T) / M


@dataclass
class BlockReport:
    off_diagonal: float
    s1_block_error: float | None
    s2_block_error: float | None
    s2_tensor_error: float | None
    dims: tuple[int, int]
    passed: bool

    def to_json(self) -> dict:
        return {
            "off_diagonal": self.off_diagonal,
            "s1_block_error": self.s1_block_error,
            "s2_block_error": self.s2_block_error,
            "s2_tensor_error": self.s2_tensor_error,
            "dims": list(self.dims),
            "passed": self.passed,
        }


def block_structure_check(f, D: int = 6, grid_N: int = hardy.DEFAULT_N, pair=None, tol: float = 1e-8) -> BlockReport:
    """Off-diagonal mass of ``S_z1`` between the two Agler subspaces.

    For a product the diagonal blocks are compared with ``T_z1 (x) I`` on ``S1``
    and with ``P_{K_phi} T_z1 (x) I`` on ``S2`` (up to unitary equivalence of the
    one-variable factor).  Non-product inputs use the given (or computed) pair.
    """
    from . import agler

    if pair is None:
        pair = agler.agler_decompose(f, agler.Flavor.MAX1MIN2)
    sf = build_split_frame(f, pair, D, grid_N)
    M = split_operator(sf, 1)
    r1 = sf.s1.shape[0]
    off = max(np.abs(M[:r1, r1:]).max(initial=0.0), np.abs(M[r1:, :r1]).max(initial=0.0))
    e1 = e2 = et = None
    if isinstance(f, ProductInner):
        n1, n2 = sf.n1, sf.n2
        shift = np.eye(D + 1, k=-1)
        if r1:
            e1 = float(np.abs(M[:r1, :r1] - np.kron(shift, np.eye(n1))).max())
        if n2:
            A = M[r1:, r1:]
            lvl = A[:n2, :n2]
            et = float(np.abs(A - np.kron(np.eye(D + 1), lvl)).max())
            C1 = one_variable_compression(f.phi)
            sv = np.abs(linalg.svdvals(lvl) - linalg.svdvals(C1)).max()
            ev = np.abs(np.sort_complex(linalg.eigvals(lvl)) - np.sort_complex(linalg.eigvals(C1))).max()
            e2 = float(max(sv, ev))
    checks = [off <= tol] + [e <= 1e-8 for e in (e1, e2, et) if e is not None]
    return BlockReport(float(off), e1, e2, et, (r1, sf.s2.shape[0]), all(checks))
