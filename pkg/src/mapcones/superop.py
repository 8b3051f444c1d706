"""Linear maps B(K) -> B(H) stored through their Choi matrix.

A map Phi between operator algebras on K (dim m) and H (dim n) is canonically
represented by the (m n) x (m n) Choi matrix whose (k, l) block of size n x n
is Phi(f_kl).  Row index k*n + i, column l*n + j holds the coefficient of e_ij
in Phi(f_kl).  Vectorization is K-index major: vec(V)[j*n + i] = V[i, j], so
the Choi matrix of the conjugation rho -> V rho V^dagger is the outer product
of vec(V) with itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import DimensionError, as_matrix, hs_inner


def vec(v) -> np.ndarray:
    """K-major vectorization of an n x m operator."""
    return as_matrix(v).T.reshape(-1)


def unvec(w, m: int, n: int) -> np.ndarray:
    """Inverse of :func:`vec`: reshape an m*n vector into an n x m operator."""
    w = np.asarray(w, dtype=np.complex128).reshape(-1)
    if w.size != m * n:
        raise DimensionError(f"vector of length {w.size} cannot unvec to {n}x{m}")
    return w.reshape(m, n).T


@dataclass(frozen=True)
class SuperOperator:
    """A linear map B(K) -> B(H), K of dimension m, H of dimension n."""

    m: int
    n: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise DimensionError("map dimensions must be positive")
        c = as_matrix(self.choi)
        d = self.m * self.n
        if c.shape != (d, d):
            raise DimensionError(f"Choi matrix must be {d}x{d}, got {c.shape}")
        object.__setattr__(self, "choi", c)
        self.choi.setflags(write=False)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.m, self.n)

    def _choi4(self) -> np.ndarray:
        return self.choi.reshape(self.m, self.n, self.m, self.n)

    def coefficient(self, i: int, j: int, k: int, l: int) -> complex:
        """Coefficient Phi_{ij,kl} of e_ij in Phi(f_kl) (zero-based indices)."""
        return complex(self.choi[k * self.n + i, l * self.n + j])

    def apply(self, x) -> np.ndarray:
        """Evaluate the map on an m x m operator."""
        x = as_matrix(x)
        if x.shape != (self.m, self.m):
            raise DimensionError(f"apply expects a {self.m}x{self.m} operator, got {x.shape}")
        return np.einsum("kl,kilj->ij", x, self._choi4())

    def adjoint(self) -> "SuperOperator":
        """Adjoint map B(H) -> B(K) for the Hilbert-Schmidt pairing.

        Built from the coefficient conjugation rule: the adjoint sends e_ij to
        sum_kl conj(Phi_{ij,kl}) f_kl, which on the Choi matrix is a conjugate
        plus a swap of the K/H index roles.
        """
        c4 = self._choi4()
        adj = np.conj(c4.transpose(1, 0, 3, 2)).reshape(self.m * self.n, self.m * self.n)
        return SuperOperator(self.n, self.m, adj)

    def compose(self, other: "SuperOperator") -> "SuperOperator":
        """self after other: (self . other)(X) = self(other(X))."""
        if self.m != other.n:
            raise DimensionError(
                f"cannot compose: inner dimensions {self.m} and {other.n} differ"
            )
        c = np.einsum("kilj,iajb->kalb", other._choi4(), self._choi4())
        return SuperOperator(other.m, self.n, c.reshape(other.m * self.n, other.m * self.n))

    def transpose_twirl(self) -> "SuperOperator":
        """The two-sided twirl t . Phi . t; on the Choi matrix a full transpose."""
        return SuperOperator(self.m, self.n, self.choi.T.copy())

    def right_transpose(self) -> "SuperOperator":
        """Phi . t, transposition applied on the input side."""
        c4 = self._choi4().transpose(2, 1, 0, 3)
        return SuperOperator(self.m, self.n, c4.reshape(self.choi.shape))

    def tensor_with_identity(self, k: int) -> "SuperOperator":
        """Phi tensor id_k as a map B(K x C^k) -> B(H x C^k)."""
        if k < 1:
            raise DimensionError("tensor factor dimension must be positive")
        eye = np.eye(k)
        c = np.einsum("kilj,ca,db->kaiclbjd", self._choi4(), eye, eye)
        d = self.m * self.n * k * k
        return SuperOperator(self.m * k, self.n * k, c.reshape(d, d))

    def is_hermiticity_preserving(self, tol: float = linalg.DEFAULT_TOL) -> bool:
        return linalg.hermiticity_defect(self.choi) <= tol

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SuperOperator)
            and self.dims == other.dims
            and np.array_equal(self.choi, other.choi)
        )

    def isclose(self, other: "SuperOperator", tol: float = linalg.DEFAULT_TOL) -> bool:
        return self.dims == other.dims and np.max(np.abs(self.choi - other.choi)) <= tol


def from_choi(c, m: int, n: int) -> SuperOperator:
    return SuperOperator(m, n, np.array(c, dtype=np.complex128))


def from_kraus(ops) -> SuperOperator:
    """Map sum_i Ad_{V_i} from a nonempty list of n x m Kraus operators."""
    ops = [as_matrix(v) for v in ops]
    if not ops:
        raise ValueError("Kraus operator list must be nonempty")
    n, m = ops[0].shape
    choi = np.zeros((m * n, m * n), dtype=np.complex128)
    for v in ops:
        if v.shape != (n, m):
            raise DimensionError(f"inconsistent Kraus shapes: {v.shape} vs {(n, m)}")
        w = vec(v)
        choi += np.outer(w, w.conj())
    return SuperOperator(m, n, choi)


def ad_map(v) -> SuperOperator:
    """The conjugation map rho -> V rho V^dagger for an n x m operator V."""
    return from_kraus([v])


def identity_map(d: int) -> SuperOperator:
    w = vec(np.eye(d))
    return SuperOperator(d, d, np.outer(w, w.conj()))


def trace_map(m: int, n: int | None = None) -> SuperOperator:
    """The map rho -> Tr(rho) * I_n; its Choi matrix is the identity."""
    n = m if n is None else n
    return SuperOperator(m, n, np.eye(m * n, dtype=np.complex128))


def transpose_map(d: int) -> SuperOperator:
    """Transposition f_kl -> f_lk on B(C^d); the Choi matrix is the swap operator."""
    c = np.zeros((d, d, d, d), dtype=np.complex128)
    for k in range(d):
        for l in range(d):
            c[k, l, l, k] = 1.0
    return SuperOperator(d, d, c.reshape(d * d, d * d))


def map_inner(phi: SuperOperator, psi: SuperOperator, tol: float = linalg.DEFAULT_TOL) -> complex:
    """Inner product of maps, sum_kl <Phi(f_kl), Psi(f_kl)>.

    Computed both by the defining sum over basis elements and as the
    Hilbert-Schmidt product of the Choi matrices; the two routes must agree
    within ``tol`` (the Choi isomorphism is an isometry).
    """
    if phi.dims != psi.dims:
        raise DimensionError(f"map_inner needs equal dims, got {phi.dims} and {psi.dims}")
    by_sum = 0.0 + 0.0j
    basis = np.zeros((phi.m, phi.m), dtype=np.complex128)
    for k in range(phi.m):
        for l in range(phi.m):
            basis[k, l] = 1.0
            by_sum += hs_inner(phi.apply(basis), psi.apply(basis))
            basis[k, l] = 0.0
    by_choi = hs_inner(phi.choi, psi.choi)
    scale = max(1.0, abs(by_choi))
    if abs(by_sum - by_choi) > tol * scale:
        raise ArithmeticError(
            f"isometry violation: sum route {by_sum} vs Choi route {by_choi}"
        )
    return by_choi


def random_map(m: int, n: int, rng) -> SuperOperator:
    """A generic (not necessarily positive) map with Gaussian Choi entries."""
    return SuperOperator(m, n, linalg.random_complex((m * n, m * n), rng))


def random_hp_map(m: int, n: int, rng) -> SuperOperator:
    """A random Hermiticity-preserving map (Hermitian Choi matrix)."""
    return SuperOperator(m, n, linalg.random_hermitian(m * n, rng))


def random_cp_map(m: int, n: int, rng, kraus_count: int = 3) -> SuperOperator:
    rng = np.random.default_rng(rng)
    return from_kraus([linalg.random_complex((n, m), rng) for _ in range(kraus_count)])


def superop_to_json(phi: SuperOperator) -> dict:
    return {"m": phi.m, "n": phi.n, "choi": linalg.matrix_to_json(phi.choi)}


def superop_from_json(obj) -> SuperOperator:
    if not isinstance(obj, dict) or not {"m", "n", "choi"} <= set(obj):
        raise ValueError("superoperator JSON must carry m, n and choi")
    return SuperOperator(int(obj["m"]), int(obj["n"]), linalg.matrix_from_json(obj["choi"]))
