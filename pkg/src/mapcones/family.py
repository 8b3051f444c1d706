"""The one-parameter family Tr - lambda * Ad_V and its positivity thresholds.

For V: K -> H the map rho -> Tr(rho) I - lambda V rho V^dagger has Choi
matrix I - lambda |v><v| with v = vec(V).  It is completely positive iff
lambda * Tr(V V^dagger) <= 1 and k-positive iff lambda times the sum of the
k largest eigenvalues of V V^dagger is at most 1 (the maximum of
Tr(E V V^dagger) over rank-k projections E).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import as_matrix
from .superop import SuperOperator, ad_map, vec


@dataclass(frozen=True)
class PhiLambdaSpec:
    v: np.ndarray  # n x m operator
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "v", as_matrix(self.v))
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if not np.any(self.v):
            raise ValueError("V must be nonzero")

    @property
    def dims(self) -> tuple[int, int]:
        n, m = self.v.shape
        return (m, n)


def build(spec: PhiLambdaSpec) -> SuperOperator:
    """The superoperator rho -> Tr(rho) I_n - lambda V rho V^dagger."""
    m, n = spec.dims
    w = vec(spec.v)
    choi = np.eye(m * n, dtype=np.complex128) - spec.lam * np.outer(w, w.conj())
    return SuperOperator(m, n, choi)


def cp_threshold(v) -> float:
    """Largest lambda keeping Tr - lambda Ad_V completely positive: 1 / Tr(V V^dagger)."""
    v = as_matrix(v)
    if not np.any(v):
        raise ValueError("V must be nonzero")
    return 1.0 / float(np.real(np.trace(v @ v.conj().T)))


def k_positivity_threshold(v, k: int) -> float:
    """Largest lambda keeping the family k-positive: inverse of the sum of the
    k largest eigenvalues of V V^dagger."""
    v = as_matrix(v)
    n, m = v.shape
    if not 1 <= k <= min(m, n):
        raise ValueError(f"k must satisfy 1 <= k <= {min(m, n)}, got {k}")
    gram = v @ v.conj().T
    vals, _ = linalg.hermitian_eigen(gram)
    top = float(np.sum(vals[::-1][:k]))
    if top <= 0:
        raise ValueError("V must be nonzero")
    return 1.0 / top


def _best_projection_ascent(gram, k: int, start, rng, iters: int = 200):
    """Hill-climb Tr(E S E) over rank-k projections by random local rotations."""
    dim = gram.shape[0]
    q = start  # dim x k isometry
    best = float(np.real(np.trace(q.conj().T @ gram @ q)))
    step = 0.5
    for _ in range(iters):
        g = linalg.random_complex((dim, k), rng)
        cand, _ = np.linalg.qr(q + step * g)
        val = float(np.real(np.trace(cand.conj().T @ gram @ cand)))
        if val > best:
            best, q = val, cand
        else:
            step = max(step * 0.93, 1e-4)
    return best, q


def brute_force_k_positivity(spec: PhiLambdaSpec, k: int, trials: int, seed,
                             tol: float = 1e-9, refine: bool = True):
    """Sampled check of k-positivity via rank-k projection compositions.

    Ad_E . Phi_lambda restricted to the range of E is again of family form
    with EV in place of V, so the CP criterion applies blockwise; we test
    positivity of the composed Choi matrix directly.  Returns
    ``(is_k_positive, witness_projection_or_None)``.
    """
    m, n = spec.dims
    if not 1 <= k <= min(m, n):
        raise ValueError(f"k must satisfy 1 <= k <= {min(m, n)}, got {k}")
    rng = np.random.default_rng(seed)
    phi = build(spec)
    gram = spec.v @ spec.v.conj().T

    def violates(e) -> bool:
        comp = ad_map(e).compose(phi)
        vals = np.linalg.eigvalsh((comp.choi + comp.choi.conj().T) / 2)
        return bool(vals[0] < -tol)

    best_q = None
    best_val = -np.inf
    for _ in range(trials):
        g = linalg.random_complex((n, k), rng)
        q, _ = np.linalg.qr(g)
        e = q @ q.conj().T
        if violates(e):
            return False, e
        val = float(np.real(np.trace(q.conj().T @ gram @ q)))
        if val > best_val:
            best_val, best_q = val, q
    if refine and best_q is not None:
        _, q = _best_projection_ascent(gram, k, best_q, rng)
        e = q @ q.conj().T
        if violates(e):
            return False, e
    return True, None
