"""Dense complex linear algebra substrate.

Matrices are plain ``numpy.ndarray`` objects with dtype complex128.  The JSON
wire form carries explicit dimensions and row-major ``[re, im]`` entry pairs;
parsing validates shape consistency and rejects non-finite values.
"""

from __future__ import annotations

import math

import numpy as np

DEFAULT_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when operand dimensions are incompatible."""


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr(A B^dagger) of two square matrices."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionError(f"hs_inner needs equal square matrices, got {a.shape} and {b.shape}")
    return complex(np.vdot(b, a))


def hermiticity_defect(m) -> float:
    m = as_matrix(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def hermitian_eigen(m, tol: float = DEFAULT_TOL):
    """Eigendecomposition of a self-adjoint matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as orthonormal columns.  Inputs farther than ``tol`` from
    self-adjointness are rejected.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"hermitian_eigen needs a square matrix, got {m.shape}")
    defect = hermiticity_defect(m)
    if defect > tol:
        raise ValueError(f"matrix is not self-adjoint within {tol} (defect {defect:.3e})")
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    return vals, vecs


def singular_values(m) -> np.ndarray:
    """Singular values of an arbitrary matrix, descending."""
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def kron(a, b) -> np.ndarray:
    """Tensor product with the left factor index-major (f_kl x e_ij order)."""
    return np.kron(as_matrix(a), as_matrix(b))


def matrix_unit(dim: int, k: int, l: int) -> np.ndarray:
    """The basis matrix with a single 1 at row k, column l."""
    u = np.zeros((dim, dim), dtype=np.complex128)
    u[k, l] = 1.0
    return u


def random_complex(shape, rng) -> np.ndarray:
    rng = np.random.default_rng(rng)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def random_unitary(dim: int, rng) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    g = random_complex((dim, dim), rng)
    q, r = np.linalg.qr(g)
    # fix the phase ambiguity of QR so the distribution is Haar
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(dim: int, rng) -> np.ndarray:
    g = random_complex((dim, dim), rng)
    return (g + g.conj().T) / 2


def random_projection(dim: int, rank: int, seed) -> np.ndarray:
    """Random rank-``rank`` orthogonal projection on C^dim, deterministic in ``seed``."""
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must satisfy 1 <= rank <= {dim}, got {rank}")
    rng = np.random.default_rng(seed)
    g = random_complex((dim, rank), rng)
    q, _ = np.linalg.qr(g)
    return q @ q.conj().T


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    entries = [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "entries": entries}


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict):
        raise ValueError("matrix JSON must be an object")
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
        entries = obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    if len(entries) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
    flat = np.empty(rows * cols, dtype=np.complex128)
    for idx, pair in enumerate(entries):
        if len(pair) != 2:
            raise ValueError("entries must be [re, im] pairs")
        re, im = float(pair[0]), float(pair[1])
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ValueError("matrix entries must be finite")
        flat[idx] = complex(re, im)
    return flat.reshape(rows, cols)
