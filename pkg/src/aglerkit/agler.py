"""Agler kernel pairs for rational inner functions.

An Agler pair ``(K1, K2)`` satisfies

    1 - theta(z) conj(theta(w)) = (1 - z1 w1*) K2(z, w) + (1 - z2 w2*) K1(z, w).

With ``theta = p~/p`` both kernels are ``v(z)^T G conj(v(w)) / (p(z) conj(p(w)))``
for Gram matrices ``G1`` over monomials ``z1^i z2^j`` (i <= m, j < n) and ``G2``
over ``i < m, j <= n``.  Clearing denominators turns the identity into linear
equations on ``(G1, G2)``; the PSD solutions form a compact spectrahedron.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from . import sdp
from .errors import InfeasibleIdentity, InputError, NotLoewnerMaximal
from .innerfn import ProductInner, RationalInner, as_rational_inner, product_to_rational
from .poly2 import BiPoly, evaluate

RESIDUAL_TOL = 1e-10
SAMPLE_SEED = 20240611
N_FUNCTIONAL_POINTS = 32
SAMPLE_RADIUS = 0.8


class Flavor(str, enum.Enum):
    MAX1MIN2 = "max1min2"
    MIN1MAX2 = "min1max2"
    GENERIC = "generic"


def monomials(d1: int, d2: int) -> list[tuple[int, int]]:
    """Monomial exponents ``(i, j)`` with ``i <= d1``, ``j <= d2``, row-major in ``i``."""
    return [(i, j) for i in range(d1 + 1) for j in range(d2 + 1)]


def monomial_vector(basis_degree, z1, z2) -> np.ndarray:
    """``v(z)`` with shape ``(..., len(basis))``."""
    d1, d2 = basis_degree
    z1 = np.asarray(z1, dtype=complex)[..., None]
    z2 = np.asarray(z2, dtype=complex)[..., None]
    e = np.array(monomials(d1, d2), dtype=int).reshape(-1, 2)
    return z1 ** e[:, 0] * z2 ** e[:, 1]


@dataclass(frozen=True, eq=False)
class GramKernel:
    denom: BiPoly
    basis_degree: tuple[int, int]
    gram: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=complex)
        size = _basis_size(self.basis_degree)
        if g.shape != (size, size):
            raise ValueError(f"gram shape {g.shape} does not match basis degree {self.basis_degree}")
        g = 0.5 * (g + g.conj().T)
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)
        object.__setattr__(self, "basis_degree", tuple(int(d) for d in self.basis_degree))

    @property
    def size(self) -> int:
        return self.gram.shape[0]

    def __call__(self, z, w):
        return kernel_eval(self, z, w)

    def numerators(self, tol: float = 1e-8) -> np.ndarray:
        """Coefficient vectors ``q_k`` with ``G = sum q_k q_k^H`` (columns)."""
        if self.size == 0:
            return np.zeros((0, 0), dtype=complex)
        lam, U = linalg.eigh(self.gram)
        keep = lam > tol * max(lam.max(), 0.0)
        return U[:, keep] * np.sqrt(lam[keep])

    def column_functions(self, tol: float = 1e-8) -> list[tuple[BiPoly, BiPoly]]:
        """Numerator/denominator pairs ``(q_k, p)`` spanning the kernel's space."""
        d1, d2 = self.basis_degree
        Q = self.numerators(tol)
        return [(BiPoly(Q[:, k].reshape(d1 + 1, d2 + 1), (d1, d2)), self.denom) for k in range(Q.shape[1])]

    def to_json(self) -> dict:
        return {
            "denom": self.denom.to_json(),
            "basis_degree": list(self.basis_degree),
            "gram": [[[v.real, v.imag] for v in row] for row in self.gram],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GramKernel":
        from .poly2 import _parse_complex

        try:
            gram = np.array([[_parse_complex(v) for v in row] for row in data["gram"]], dtype=complex)
            d = tuple(data["basis_degree"])
            size = _basis_size(d)
            return cls(BiPoly.from_json(data["denom"]), d, gram.reshape(size, size))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed GramKernel JSON: {exc}") from exc


def _basis_size(d) -> int:
    d1, d2 = d
    if d1 < 0 or d2 < 0:
        return 0
    return (d1 + 1) * (d2 + 1)


def kernel_eval(k: GramKernel, z, w):
    """``v(z)^T G conj(v(w)) / (p(z) conj(p(w)))``; broadcasts over leading axes."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if k.size == 0:
        out = np.zeros(np.broadcast_shapes(z.shape[:-1], w.shape[:-1]), dtype=complex)
        return out if out.ndim else complex(out)
    vz = monomial_vector(k.basis_degree, z[..., 0], z[..., 1])
    vw = monomial_vector(k.basis_degree, w[..., 0], w[..., 1])
    num = np.einsum("...i,ij,...j->...", vz, k.gram, vw.conj())
    den = evaluate(k.denom, z[..., 0], z[..., 1]) * np.conj(evaluate(k.denom, w[..., 0], w[..., 1]))
    out = num / den
    return out if np.ndim(out) else complex(out)


def kernel_matrix(k: GramKernel, points: np.ndarray) -> np.ndarray:
    """Sampled Gram ``[K(x_a, x_b)]`` for points of shape ``(M, 2)``."""
    pts = np.asarray(points, dtype=complex)
    return kernel_eval(k, pts[:, None, :], pts[None, :, :])


def kernel_rank(k: GramKernel, tol: float = 1e-8) -> int:
    if k.size == 0:
        return 0
    lam = linalg.eigvalsh(k.gram)
    top = lam.max()
    if top <= 0:
        return 0
    return int(np.sum(lam > tol * top))


@dataclass(frozen=True, eq=False)
class AglerPair:
    k1: GramKernel
    k2: GramKernel
    flavor: Flavor = Flavor.GENERIC

    def to_json(self) -> dict:
        return {"flavor": Flavor(self.flavor).value, "k1": self.k1.to_json(), "k2": self.k2.to_json()}


def pair_residual(theta, pair: AglerPair, n_points: int = 100, seed: int = 0) -> float:
    """Max violation of the Agler identity at random ``(z, w)`` in the bidisk."""
    rng = np.random.default_rng(seed)
    z = random_points(rng, n_points, 0.95)
    w = random_points(rng, n_points, 0.95)
    lhs = 1 - theta(z[:, 0], z[:, 1]) * np.conj(theta(w[:, 0], w[:, 1]))
    rhs = (1 - z[:, 0] * w[:, 0].conj()) * kernel_eval(pair.k2, z, w) + (
        1 - z[:, 1] * w[:, 1].conj()
    ) * kernel_eval(pair.k1, z, w)
    return float(np.max(np.abs(lhs - rhs)))


def random_points(rng, count: int, radius: float = SAMPLE_RADIUS) -> np.ndarray:
    """``count`` points of the bidisk with coordinate moduli at most ``radius``."""
    r = radius * np.sqrt(rng.uniform(0, 1, (count, 2)))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, (count, 2)))


# -- closed forms for products ----------------------------------------------

def christoffel_darboux(q: np.ndarray) -> np.ndarray:
    """Gram ``H`` with ``(q q* - q~ q~*)(z, w) / (1 - z w*) = sum H[i,i'] z^i w*^i'``.

    ``q`` holds ascending coefficients of a one-variable polynomial of degree
    ``len(q) - 1`` whose reflection is ``z^deg conj(q(1/conj z))``.
    """
    q = np.asarray(q, dtype=complex)
    m = q.size - 1
    if m <= 0:
        return np.zeros((0, 0), dtype=complex)
    qr = np.conj(q[::-1])
    L = np.outer(q, q.conj()) - np.outer(qr, qr.conj())
    # dividing by 1 - z w* sums L along diagonals: H[j, j'] = sum_k L[j-k, j'-k]
    H = np.zeros((m, m), dtype=complex)
    for k in range(m):
        H[k:, k:] += L[: m - k, : m - k]
    return H


def _product_factors(f: ProductInner):
    theta = product_to_rational(f)
    m, n = f.degree
    p1 = f.phi.denominator_coeffs()
    p2 = f.psi.denominator_coeffs()
    # product_to_rational scales the outer product by a unimodular lambda; absorb it into p1
    lam = theta.p.coeffs[0, 0] / (p1[0] * p2[0])
    return theta, lam * p1, p2


def closed_form_product(f: ProductInner) -> tuple[AglerPair, AglerPair]:
    """The two canonical pairs of ``phi(z1) psi(z2)`` as Gram kernels over ``p = p1 p2``."""
    theta, p1, p2 = _product_factors(f)
    m, n = f.degree
    p1r = np.conj(p1[::-1])
    p2r = np.conj(p2[::-1])
    H1 = christoffel_darboux(p1)
    H2 = christoffel_darboux(p2)
    k1_max = GramKernel(theta.p, (m, n - 1), np.kron(np.outer(p1, p1.conj()), H2))
    k2_min = GramKernel(theta.p, (m - 1, n), np.kron(H1, np.outer(p2r, p2r.conj())))
    k1_min = GramKernel(theta.p, (m, n - 1), np.kron(np.outer(p1r, p1r.conj()), H2))
    k2_max = GramKernel(theta.p, (m - 1, n), np.kron(H1, np.outer(p2, p2.conj())))
    return AglerPair(k1_max, k2_min, Flavor.MAX1MIN2), AglerPair(k1_min, k2_max, Flavor.MIN1MAX2)


# -- the linear constraint system -------------------------------------------

def hermitian_basis(s: int) -> np.ndarray:
    """Frobenius-orthonormal basis of ``s x s`` Hermitian matrices, shape ``(s*s, s, s)``."""
    out = np.zeros((s * s, s, s), dtype=complex)
    k = 0
    for i in range(s):
        out[k, i, i] = 1.0
        k += 1
    r = 1 / np.sqrt(2)
    for i in range(s):
        for j in range(i + 1, s):
            out[k, i, j] = out[k, j, i] = r
            out[k + 1, i, j] = -1j * r
            out[k + 1, j, i] = 1j * r
            k += 2
    return out


def _embedding(m: int, n: int, d1: int, d2: int, shift: tuple[int, int]) -> np.ndarray:
    """Matrix sending a monomial of the ``(d1, d2)`` box, shifted, into the ``(m, n)`` box."""
    E = np.zeros(((m + 1) * (n + 1), _basis_size((d1, d2))))
    for k, (i, j) in enumerate(monomials(d1, d2) if d1 >= 0 and d2 >= 0 else []):
        a, b = i + shift[0], j + shift[1]
        E[a * (n + 1) + b, k] = 1.0
    return E


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """All Hermitian ``(G1, G2)`` solving the cleared identity: ``G = offset + sum_k y_k basis_k``."""

    theta: RationalInner
    offset: tuple[np.ndarray, np.ndarray]
    basis: tuple[np.ndarray, np.ndarray]
    residual: float

    @property
    def dimension(self) -> int:
        return self.basis[0].shape[0]

    @property
    def degree(self) -> tuple[int, int]:
        return self.theta.degree

    def point(self, y) -> tuple[np.ndarray, np.ndarray]:
        y = np.asarray(y, dtype=float)
        return tuple(o + np.tensordot(y, b, axes=1) for o, b in zip(self.offset, self.basis))

    def pair(self, y, flavor=Flavor.GENERIC) -> AglerPair:
        m, n = self.degree
        G1, G2 = self.point(y)
        p = self.theta.p
        return AglerPair(GramKernel(p, (m, n - 1), G1), GramKernel(p, (m - 1, n), G2), Flavor(flavor))


def identity_operator(m: int, n: int):
    """Linear maps ``G1 -> coeffs``, ``G2 -> coeffs`` of the right-hand side, and box embeddings."""
    P1 = _embedding(m, n, m, n - 1, (0, 0))
    S1 = _embedding(m, n, m, n - 1, (0, 1))
    P2 = _embedding(m, n, m - 1, n, (0, 0))
    S2 = _embedding(m, n, m - 1, n, (1, 0))

    def apply(G1, G2):
        out = np.zeros(((m + 1) * (n + 1),) * 2, dtype=complex)
        if G1.size:
            out += P1 @ G1 @ P1.T - S1 @ G1 @ S1.T
        if G2.size:
            out += P2 @ G2 @ P2.T - S2 @ G2 @ S2.T
        return out

    return apply


def _realify(M: np.ndarray) -> np.ndarray:
    return np.concatenate([M.real.ravel(), M.imag.ravel()])


def solve_constraints(theta) -> ConstraintSystem:
    theta = as_rational_inner(theta)
    m, n = theta.degree
    if m < 0 or n < 0 or (m == 0 and n == 0):
        raise InputError(f"degree {theta.degree} has no Agler system")
    s1, s2 = _basis_size((m, n - 1)), _basis_size((m - 1, n))
    B1, B2 = hermitian_basis(s1), hermitian_basis(s2)
    apply = identity_operator(m, n)
    z1 = np.zeros((s1, s1), dtype=complex)
    z2 = np.zeros((s2, s2), dtype=complex)
    cols = [_realify(apply(b, z2)) for b in B1] + [_realify(apply(z1, b)) for b in B2]
    A = np.stack(cols, axis=1)
    pv = theta.p.coeffs.ravel()
    pr = theta.p_reflected.coeffs.ravel()
    target = np.outer(pv, pv.conj()) - np.outer(pr, pr.conj())
    b = _realify(target)

    U, s, Vt = linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > 1e-10 * s[0]))
    x0 = Vt[:rank].T @ ((U[:, :rank].T @ b) / s[:rank])
    resid = float(np.max(np.abs(A @ x0 - b)))
    if resid > RESIDUAL_TOL * max(1.0, np.abs(b).max()):
        raise InfeasibleIdentity(f"coefficient-matching residual {resid:.3e}")
    null = Vt[rank:]

    def split(x):
        g1 = np.tensordot(x[: s1 * s1], B1, axes=1) if s1 else np.zeros((0, 0), complex)
        g2 = np.tensordot(x[s1 * s1 :], B2, axes=1) if s2 else np.zeros((0, 0), complex)
        return g1, g2

    off = split(x0)
    basis1 = np.stack([split(v)[0] for v in null]) if len(null) else np.zeros((0, s1, s1), complex)
    basis2 = np.stack([split(v)[1] for v in null]) if len(null) else np.zeros((0, s2, s2), complex)
    return ConstraintSystem(theta, off, (basis1, basis2), resid)


# -- extremal pairs ---------------------------------------------------------

NULL_REL_TOL = 1e-4
NULL_MIN_GAP = 1e2
PSD_TOL = 1e-7


def functional_points(seed: int = SAMPLE_SEED) -> np.ndarray:
    return random_points(np.random.default_rng(seed), N_FUNCTIONAL_POINTS, SAMPLE_RADIUS)


def _functional_matrix(theta: RationalInner, basis_degree, points, var: int) -> np.ndarray:
    """``W`` with ``tr(G W) = sum_i K(x_i, x_i) / (1 - |x_i,var|^2)``."""
    V = monomial_vector(basis_degree, points[:, 0], points[:, 1])
    wts = 1.0 / (np.abs(evaluate(theta.p, points[:, 0], points[:, 1])) ** 2 * (1 - np.abs(points[:, var - 1]) ** 2))
    return np.einsum("i,ia,ib->ab", wts, V.conj(), V)


@dataclass
class _Face:
    """Affine slice ``y = a + Z u`` with block compressions ``R_j`` (orthonormal columns)."""

    a: np.ndarray
    Z: np.ndarray
    R: list

    def blocks(self, sys: ConstraintSystem) -> sdp.Blocks:
        F0 = sys.point(self.a)
        F0r, Fr = [], []
        for G0, B, R in zip(F0, sys.basis, self.R):
            BZ = np.tensordot(self.Z.T, B, axes=1)
            F0r.append(R.conj().T @ G0 @ R)
            Fr.append(R.conj().T[None] @ BZ @ R[None])
        return sdp.Blocks(tuple(F0r), tuple(Fr))

    def y(self, u) -> np.ndarray:
        return self.a + self.Z @ u


def _null_vectors(M: np.ndarray) -> np.ndarray:
    """Eigenvectors of the cluster of eigenvalues separated from the rest by a large gap near zero."""
    s = M.shape[0]
    if s == 0:
        return np.zeros((0, 0), dtype=complex)
    lam, U = linalg.eigh(M)
    top = max(lam[-1], 1e-300)
    best, cut = 0, 0
    for r in range(1, s + 1):
        if lam[r - 1] > NULL_REL_TOL * top:
            break
        nxt = lam[r] if r < s else top
        gap = nxt / max(lam[r - 1], 1e-16 * top)
        if gap >= NULL_MIN_GAP and gap > best:
            best, cut = gap, r
    return U[:, :cut]


def _tighten(sys: ConstraintSystem, face: _Face, nulls: list) -> _Face:
    """Restrict the face to ``G_j N_j = 0`` for the given (face-compressed) null vectors."""
    rows, rhs = [], []
    G0 = sys.point(face.a)
    new_R = []
    for G, B, R, N in zip(G0, sys.basis, face.R, nulls):
        if N.shape[1] == 0:
            new_R.append(R)
            continue
        Nf = R @ N
        rhs.append(_realify(G @ Nf))
        BZ = np.tensordot(face.Z.T, B, axes=1)
        rows.append(np.stack([_realify(b @ Nf) for b in BZ], axis=1))
        keep = linalg.null_space(Nf.conj().T)
        new_R.append(keep)
    if not rows:
        return face
    A = np.concatenate(rows, axis=0)
    b = -np.concatenate(rhs)
    u_p = linalg.lstsq(A, b)[0]
    W = linalg.null_space(A, rcond=1e-9)
    return _Face(face.a + face.Z @ u_p, face.Z @ W, new_R)


def _refine(sys: ConstraintSystem, y, ranks, rounds: int = 4):
    """Project ``y`` onto ``{G_j(y) N_j = 0}`` with ``N_j`` spanning the smallest eigenvectors."""
    for _ in range(rounds):
        rows, rhs = [], []
        for G, B, r in zip(sys.point(y), sys.basis, ranks):
            if r == 0:
                continue
            N = linalg.eigh(G)[1][:, :r]
            rhs.append(_realify(G @ N))
            rows.append(np.stack([_realify(b @ N) for b in B], axis=1))
        if not rows:
            break
        A = np.concatenate(rows, axis=0)
        y = y - linalg.lstsq(A, np.concatenate(rhs))[0]
    return y


def _initial_face(sys: ConstraintSystem, max_rounds: int = 10):
    """Face of the spectrahedron with nonempty relative interior, plus an interior point."""
    d = sys.dimension
    face = _Face(np.zeros(d), np.eye(d), [np.eye(G.shape[0], dtype=complex) for G in sys.offset])
    for _ in range(max_rounds):
        blocks = face.blocks(sys)
        if face.Z.shape[1] == 0:
            return face, np.zeros(0)
        u, s = sdp.phase_one(blocks)
        scale = max((np.abs(M).max() for M in blocks.at(u) if M.size), default=1.0)
        if s > 1e-8 * scale:
            return face, u
        face = _tighten(sys, face, [_null_vectors(M) for M in blocks.at(u)])
    raise InfeasibleIdentity("facial reduction did not reach a face with interior points")


def _maximize_on_faces(sys: ConstraintSystem, c: np.ndarray, face: _Face, u0, max_rounds: int = 10):
    u = u0
    for _ in range(max_rounds):
        if face.Z.shape[1] == 0:
            return face.y(np.zeros(0)), face
        blocks = face.blocks(sys)
        cz = face.Z.T @ c
        if np.linalg.norm(cz) <= 1e-14 * max(np.linalg.norm(c), 1.0):
            return face.y(sdp.analytic_center(blocks, u)), face
        u = sdp.maximize(blocks, cz, u)
        nulls = [_null_vectors(M) for M in blocks.at(u)]
        if all(N.shape[1] == 0 for N in nulls):
            return face.y(u), face
        face = _tighten(sys, face, nulls)
        if face.Z.shape[1]:
            u, s = sdp.phase_one(face.blocks(sys))
            if s <= 0:
                face, u = _reduce_until_interior(sys, face)
        else:
            u = np.zeros(0)
    return face.y(u), face


def _reduce_until_interior(sys, face, max_rounds: int = 10):
    for _ in range(max_rounds):
        if face.Z.shape[1] == 0:
            return face, np.zeros(0)
        blocks = face.blocks(sys)
        u, s = sdp.phase_one(blocks)
        if s > 0:
            return face, u
        face = _tighten(sys, face, [_null_vectors(M) for M in blocks.at(u)])
    raise InfeasibleIdentity("facial reduction did not converge")


def random_feasible(sys: ConstraintSystem, count: int, seed: int = 0, steps: int = 5) -> list[np.ndarray]:
    """Hit-and-run samples of the spectrahedron (parameters ``y``)."""
    face, u = _initial_face(sys)
    if face.Z.shape[1] == 0:
        return [face.y(u)] * count
    blocks = face.blocks(sys).nonempty()
    u = sdp.analytic_center(blocks, u)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        for _ in range(steps):
            direction = rng.standard_normal(u.size)
            lo, hi = sdp.ray_range(blocks, u, direction)
            lo, hi = max(lo, -1e6), min(hi, 1e6)
            u = u + rng.uniform(0.05, 0.95) * (hi - lo) * direction + lo * direction
        out.append(face.y(u))
    return out


def _quotient_min_eig(theta, extremal: GramKernel, other: GramKernel, var: int, points) -> float:
    """Min eigenvalue of the sampled Gram of ``(other - extremal) / (1 - z_var w_var*)``."""
    pts = np.asarray(points, dtype=complex)
    z, w = pts[:, None, :], pts[None, :, :]
    Q = (kernel_eval(other, z, w) - kernel_eval(extremal, z, w)) / (1 - z[..., var - 1] * w[..., var - 1].conj())
    Q = 0.5 * (Q + Q.conj().T)
    return float(linalg.eigvalsh(Q)[0])


def verify_extremal(sys: ConstraintSystem, pair: AglerPair, n_feasible: int = 20, n_points: int = 40, seed: int = 1) -> float:
    """Smallest sampled quotient-kernel eigenvalue over random feasible pairs (should be >= 0)."""
    rng = np.random.default_rng(seed)
    pts = random_points(rng, n_points)
    worst = np.inf
    for y in random_feasible(sys, n_feasible, seed=seed):
        other = sys.pair(y)
        if pair.flavor == Flavor.MAX1MIN2:
            e = _quotient_min_eig(sys.theta, pair.k2, other.k2, 2, pts)
        else:
            e = _quotient_min_eig(sys.theta, pair.k1, other.k1, 1, pts)
        worst = min(worst, e)
    return float(worst)


def extremal_pair(sys: ConstraintSystem, flavor=Flavor.MAX1MIN2, *, verify: bool = True) -> AglerPair:
    """Canonical pair by maximizing a strictly monotone functional over the spectrahedron.

    ``max1min2`` maximizes ``sum K1(x,x)/(1-|x1|^2)``; ``min1max2`` the mirror
    functional on ``K2``.  A face-polishing stage pins the boundary point to
    machine precision, then the quotient-kernel order is checked on samples.
    """
    flavor = Flavor(flavor)
    if flavor is Flavor.GENERIC:
        raise ValueError("extremal pairs are max1min2 or min1max2")
    m, n = sys.degree
    if sys.dimension == 0:
        return sys.pair(np.zeros(0), flavor)
    pts = functional_points()
    block = 0 if flavor is Flavor.MAX1MIN2 else 1
    bdeg = (m, n - 1) if block == 0 else (m - 1, n)
    W = _functional_matrix(sys.theta, bdeg, pts, 1 if block == 0 else 2)
    c = np.array([np.trace(B @ W).real for B in sys.basis[block]])
    face, u0 = _initial_face(sys)
    y, face = _maximize_on_faces(sys, c, face, u0)
    ranks = [G.shape[0] - R.shape[1] for G, R in zip(sys.offset, face.R)]
    y = _refine(sys, y, ranks)
    pair = sys.pair(y, flavor)
    if verify:
        worst = verify_extremal(sys, pair)
        if worst < -PSD_TOL:
            raise NotLoewnerMaximal(f"quotient kernel has sampled eigenvalue {worst:.3e}")
    return pair


def agler_decompose(theta, flavor=Flavor.MAX1MIN2) -> AglerPair:
    """Canonical pair: closed form for products, solver otherwise."""
    if isinstance(theta, ProductInner):
        a, b = closed_form_product(theta)
        return a if Flavor(flavor) is Flavor.MAX1MIN2 else b
    return extremal_pair(solve_constraints(theta), flavor)


# -- restriction to slices --------------------------------------------------

def column_grids(k: GramKernel, N: int) -> np.ndarray:
    """Torus samples of the column functions ``q_i / p``, shape ``(r, N, N)``."""
    w = np.exp(2j * np.pi * np.arange(N) / N)
    Z1, Z2 = np.meshgrid(w, w, indexing="ij")
    den = evaluate(k.denom, Z1, Z2)
    out = [evaluate(q, Z1, Z2) / den for q, _ in k.column_functions()]
    return np.array(out).reshape(-1, N, N)


def h2_gram(k: GramKernel, N: int = 256) -> np.ndarray:
    """``<f_j, f_i>`` in ``H^2(D^2)`` for the column functions (torus quadrature)."""
    F = column_grids(k, N).reshape(-1, N * N)
    return F.conj() @ F.T / (N * N)


def restriction_gram(k: GramKernel, t: complex, var: int = 2, n_points: int = 512) -> np.ndarray:
    """``<f_j(., t), f_i(., t)>`` over the circle with ``z_var = t`` held fixed."""
    w = np.exp(2j * np.pi * np.arange(n_points) / n_points)
    tt = np.full(n_points, complex(t))
    z1, z2 = (w, tt) if var == 2 else (tt, w)
    den = evaluate(k.denom, z1, z2)
    F = np.array([evaluate(q, z1, z2) / den for q, _ in k.column_functions()]).reshape(-1, n_points)
    return F.conj() @ F.T / n_points
