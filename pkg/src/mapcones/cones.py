"""Symbolic cone algebra and membership/witness decision procedures.

Cone expressions are trees over the base cones Pk(k) (k-positive maps),
SPk(k) (k-superpositive maps) and CP, closed under the transpose twirl
``t(C)`` = {Phi . t}, intersection ``meet``, convex hull ``join`` and the
dual.  ``P``/``SP`` are aliases for k = 1 and CP coincides with both Pk and
SPk at k = min(m, n); normalization resolves the aliases, after which duals
rewrite mechanically (Pk <-> SPk, CP self-dual, meet <-> join, twirl
commutes) and never remain in the tree.

Membership verdicts are certified: a Member carries a certificate and a
NotMember carries a witness, each of which :func:`recheck` re-verifies from
scratch.  Complete positivity is decided exactly via the Choi spectrum;
k-positivity has a sound refuter (projection-pair search) plus an exact
certifier for maps whose Choi matrix has the ``a*I - b|w><w|`` spectral
pattern; k-superpositivity is certified by explicit Kraus decompositions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, asdict
from typing import Optional, Union

import numpy as np
import scipy.linalg

from . import linalg
from .linalg import DimensionError
from . import superop
from .superop import SuperOperator, ad_map, from_kraus, map_inner, unvec, vec


# ---------------------------------------------------------------------------
# Cone expression trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Base:
    kind: str  # "Pk" | "SPk" | "CP"
    k: int = 0


@dataclass(frozen=True)
class Twirl:
    child: "ConeExpr"


@dataclass(frozen=True)
class Meet:
    left: "ConeExpr"
    right: "ConeExpr"


@dataclass(frozen=True)
class Join:
    left: "ConeExpr"
    right: "ConeExpr"


@dataclass(frozen=True)
class Dual:
    child: "ConeExpr"


ConeExpr = Union[Base, Twirl, Meet, Join, Dual]


class ConeGrammarError(ValueError):
    """Raised on unparseable or out-of-range cone expressions."""


_TOKEN = re.compile(r"\s*(Pk|SPk|CP|P|SP|t|meet|join|dual|\(|\)|,|\d+)")


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ConeGrammarError(f"unexpected input at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def parse_cone(text: str) -> ConeExpr:
    """Parse the grammar ``P | SP | CP | Pk(k) | SPk(k) | t(e) | meet(e,e) | join(e,e) | dual(e)``."""
    tokens = _tokenize(text)
    pos = 0

    def expect(tok):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            got = tokens[pos] if pos < len(tokens) else "<end>"
            raise ConeGrammarError(f"expected {tok!r}, got {got!r}")
        pos += 1

    def expr() -> ConeExpr:
        nonlocal pos
        if pos >= len(tokens):
            raise ConeGrammarError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == "P":
            return Base("Pk", 1)
        if tok == "SP":
            return Base("SPk", 1)
        if tok == "CP":
            return Base("CP")
        if tok in ("Pk", "SPk"):
            expect("(")
            if pos >= len(tokens) or not tokens[pos].isdigit():
                raise ConeGrammarError(f"{tok} needs an integer argument")
            k = int(tokens[pos])
            if k < 1:
                raise ConeGrammarError(f"{tok} index must be >= 1, got {k}")
            pos += 1
            expect(")")
            return Base(tok, k)
        if tok == "t":
            expect("(")
            child = expr()
            expect(")")
            return Twirl(child)
        if tok == "dual":
            expect("(")
            child = expr()
            expect(")")
            return Dual(child)
        if tok in ("meet", "join"):
            expect("(")
            left = expr()
            expect(",")
            right = expr()
            expect(")")
            return (Meet if tok == "meet" else Join)(left, right)
        raise ConeGrammarError(f"unexpected token {tok!r}")

    result = expr()
    if pos != len(tokens):
        raise ConeGrammarError(f"trailing input {tokens[pos:]!r}")
    return result


def format_cone(expr: ConeExpr) -> str:
    if isinstance(expr, Base):
        if expr.kind == "CP":
            return "CP"
        if expr.k == 1:
            return "P" if expr.kind == "Pk" else "SP"
        return f"{expr.kind}({expr.k})"
    if isinstance(expr, Twirl):
        return f"t({format_cone(expr.child)})"
    if isinstance(expr, Meet):
        return f"meet({format_cone(expr.left)},{format_cone(expr.right)})"
    if isinstance(expr, Join):
        return f"join({format_cone(expr.left)},{format_cone(expr.right)})"
    if isinstance(expr, Dual):
        return f"dual({format_cone(expr.child)})"
    raise TypeError(f"not a cone expression: {expr!r}")


def _dual_of(expr: ConeExpr) -> ConeExpr:
    # expr must already be normalized (no Dual nodes, aliases resolved)
    if isinstance(expr, Base):
        if expr.kind == "CP":
            return expr
        return Base("SPk" if expr.kind == "Pk" else "Pk", expr.k)
    if isinstance(expr, Twirl):
        return _collapse_twirl(Twirl(_dual_of(expr.child)))
    if isinstance(expr, Meet):
        return Join(_dual_of(expr.left), _dual_of(expr.right))
    if isinstance(expr, Join):
        return Meet(_dual_of(expr.left), _dual_of(expr.right))
    raise TypeError(f"dual of unnormalized expression: {expr!r}")


def _collapse_twirl(expr: Twirl) -> ConeExpr:
    child = expr.child
    if isinstance(child, Twirl):
        return child.child
    # P and SP are invariant under composition with transposition
    if isinstance(child, Base) and child.kind in ("Pk", "SPk") and child.k == 1:
        return child
    return expr


def normalize(expr: ConeExpr, m: int, n: int) -> ConeExpr:
    """Resolve aliases against dims, validate k-ranges and eliminate duals."""
    kmax = min(m, n)
    if isinstance(expr, Base):
        if expr.kind == "CP":
            return expr
        if not 1 <= expr.k <= kmax:
            raise ConeGrammarError(
                f"index k={expr.k} out of range 1..{kmax} for dims ({m},{n})"
            )
        if expr.k == kmax:
            return Base("CP")
        return expr
    if isinstance(expr, Twirl):
        return _collapse_twirl(Twirl(normalize(expr.child, m, n)))
    if isinstance(expr, Meet):
        return Meet(normalize(expr.left, m, n), normalize(expr.right, m, n))
    if isinstance(expr, Join):
        return Join(normalize(expr.left, m, n), normalize(expr.right, m, n))
    if isinstance(expr, Dual):
        return _dual_of(normalize(expr.child, m, n))
    raise TypeError(f"not a cone expression: {expr!r}")


def dual_expr(expr: ConeExpr) -> ConeExpr:
    """Dual of a normalized cone expression; the result contains no Dual nodes."""
    return _dual_of(expr)


def includes(outer: ConeExpr, inner: ConeExpr) -> bool:
    """Conservative structural inclusion check: True implies inner is a subset.

    Every normalized expression denotes an mcs-cone and therefore contains
    all rank-one conjugations, so SP is included in everything.
    """
    if outer == inner:
        return True
    if inner == Base("SPk", 1):
        return True
    if isinstance(inner, Meet):
        if includes(outer, inner.left) or includes(outer, inner.right):
            return True
    if isinstance(outer, Join):
        if includes(outer.left, inner) or includes(outer.right, inner):
            return True
    if isinstance(outer, Meet):
        return includes(outer.left, inner) and includes(outer.right, inner)
    if isinstance(inner, Join):
        return includes(outer, inner.left) and includes(outer, inner.right)
    if isinstance(outer, Base) and isinstance(inner, Base):
        if inner.kind == "SPk":
            return outer.kind in ("CP", "Pk") or (outer.kind == "SPk" and inner.k <= outer.k)
        if inner.kind == "CP":
            return outer.kind == "Pk"
        if inner.kind == "Pk":
            return outer.kind == "Pk" and outer.k <= inner.k
    if isinstance(outer, Twirl) and isinstance(inner, Twirl):
        return includes(outer.child, inner.child)
    return False


# ---------------------------------------------------------------------------
# Verdicts and configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MemberConfig:
    tol: float = 1e-9
    samples: int = 500
    seed: int = 0
    max_iters: int = 60

    def as_dict(self) -> dict:
        return asdict(self)


MEMBER = "member"
NOT_MEMBER = "not_member"
UNKNOWN = "unknown"


@dataclass
class Verdict:
    status: str
    certificate: Optional[dict] = None
    witness: Optional[dict] = None
    diagnostics: dict = field(default_factory=dict)


def _min_eig(choi, tol):
    h = (np.asarray(choi) + np.asarray(choi).conj().T) / 2
    vals, vecs = np.linalg.eigh(h)
    return float(vals[0]), vecs[:, 0], vals, vecs


def pair(psi: SuperOperator, phi: SuperOperator, tol: float = 1e-9) -> float:
    """Real pairing of two Hermiticity-preserving maps."""
    for name, x in (("first", psi), ("second", phi)):
        if not x.is_hermiticity_preserving(tol):
            raise ValueError(f"{name} argument is not Hermiticity-preserving within {tol}")
    val = map_inner(psi, phi)
    scale = max(1.0, abs(val))
    if abs(val.imag) > tol * scale:
        raise ArithmeticError(f"pairing has imaginary residue {val.imag}")
    return float(val.real)


# ---------------------------------------------------------------------------
# Family-pattern recognition (Choi = a*I - b |w><w|)
# ---------------------------------------------------------------------------

def _spectral_family_pattern(phi: SuperOperator, tol: float):
    """Detect Choi = a*I - b*|w><w| with b > 0; returns (a, b, w) or None."""
    d = phi.m * phi.n
    if d < 2:
        return None
    vals, vecs = np.linalg.eigh((phi.choi + phi.choi.conj().T) / 2)
    a = float(np.median(vals[1:]))
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.max(np.abs(vals[1:] - a)) > 100 * tol * scale:
        return None
    b = a - float(vals[0])
    if b <= 100 * tol * scale:
        return None
    w = vecs[:, 0]
    residual = np.max(np.abs(phi.choi - (a * np.eye(d) - b * np.outer(w, w.conj()))))
    if residual > 100 * tol * scale:
        return None
    return a, b, w


def _family_kfan(w, m: int, n: int, k: int) -> float:
    """Sum of the k largest eigenvalues of W W^dagger for W = unvec(w)."""
    sv = linalg.singular_values(unvec(w, m, n))
    return float(np.sum(sv[:k] ** 2))


# ---------------------------------------------------------------------------
# Generator sampling
# ---------------------------------------------------------------------------

def _sample_with_certs(expr: ConeExpr, m: int, n: int, count: int, rng, diagnostics=None):
    """Sample maps provably inside the cone, each with a provenance certificate."""
    rng = np.random.default_rng(rng)
    kmax = min(m, n)
    out = []
    if isinstance(expr, Base) and expr.kind == "SPk":
        for _ in range(count):
            v = linalg.random_complex((n, expr.k), rng) @ linalg.random_complex((expr.k, m), rng)
            out.append((ad_map(v), {"type": "kraus", "ops": [v], "rank_bound": expr.k}))
        return out
    if isinstance(expr, Base) and expr.kind == "CP":
        for _ in range(count):
            ops = [linalg.random_complex((n, m), rng) for _ in range(int(rng.integers(1, 4)))]
            out.append((from_kraus(ops), {"type": "kraus", "ops": ops, "rank_bound": kmax}))
        return out
    if isinstance(expr, Base) and expr.kind == "Pk":
        k = expr.k
        i = 0
        while len(out) < count:
            mode = i % 3 if k == 1 else i % 2
            i += 1
            if mode == 0:
                # boundary member of the Tr - lambda Ad_V family, k-positive by
                # the analytic threshold
                w = linalg.random_complex((n, m), rng)
                w = w / np.linalg.norm(vec(w))
                lam = (1.0 - 1e-12) / _family_kfan(vec(w), m, n, k)
                d = m * n
                choi = np.eye(d) - lam * np.outer(vec(w), vec(w).conj())
                gen = SuperOperator(m, n, choi)
                out.append((gen, {"type": "family", "a": 1.0, "b": lam, "w": vec(w), "k": k}))
            elif mode == 1:
                ops = [linalg.random_complex((n, m), rng) for _ in range(2)]
                out.append((from_kraus(ops), {"type": "kraus", "ops": ops, "rank_bound": kmax}))
            else:
                # completely co-positive maps are positive (k = 1 only)
                ops = [linalg.random_complex((n, m), rng) for _ in range(2)]
                gen = from_kraus(ops).right_transpose()
                out.append((gen, {"type": "twirled_kraus", "ops": ops}))
        return out
    if isinstance(expr, Twirl):
        inner = _sample_with_certs(expr.child, m, n, count, rng, diagnostics)
        return [
            (g.right_transpose(), {"type": "twirled", "inner": cert}) for g, cert in inner
        ]
    if isinstance(expr, Join):
        left = _sample_with_certs(expr.left, m, n, count, rng, diagnostics)
        right = _sample_with_certs(expr.right, m, n, count, rng, diagnostics)
        out = []
        for (g1, c1), (g2, c2) in zip(left, right):
            w1, w2 = rng.dirichlet((1.0, 1.0))
            gen = SuperOperator(m, n, w1 * g1.choi + w2 * g2.choi)
            out.append((gen, {"type": "hull", "weights": (float(w1), float(w2)),
                              "parts": [c1, c2]}))
        return out
    if isinstance(expr, Meet):
        cfg = MemberConfig(samples=50, seed=int(rng.integers(2**31)))
        fallback = 0
        for side, other in ((expr.left, expr.right), (expr.right, expr.left)):
            for g, cert in _sample_with_certs(side, m, n, count, rng, diagnostics):
                if len(out) >= count:
                    break
                if includes(other, side):
                    out.append((g, {"type": "meet", "part": cert, "via": "inclusion"}))
                else:
                    verdict = member(g, other, cfg)
                    if verdict.status == MEMBER:
                        out.append((g, {"type": "meet", "part": cert,
                                        "via": "verified", "other_cert": verdict.certificate}))
        while len(out) < count:
            # rank-one conjugations lie in every mcs-cone
            v = linalg.random_complex((n, 1), rng) @ linalg.random_complex((1, m), rng)
            out.append((ad_map(v), {"type": "kraus", "ops": [v], "rank_bound": 1}))
            fallback += 1
        if diagnostics is not None and fallback:
            diagnostics["meet_fallback_samples"] = fallback
        return out
    raise TypeError(f"cannot sample from unnormalized expression: {expr!r}")


def sample_generators(expr: ConeExpr, m: int, n: int, count: int, seed) -> list[SuperOperator]:
    """Sample ``count`` maps that verifiably lie in the (normalized) cone."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return [g for g, _ in _sample_with_certs(expr, m, n, count, np.random.default_rng(seed))]


# ---------------------------------------------------------------------------
# Refutation searches
# ---------------------------------------------------------------------------

def _positivity_refute(phi: SuperOperator, cfg: MemberConfig):
    """Minimize <omega, Phi(upsilon upsilon*) omega> over unit vectors.

    Alternating exact eigenvector updates; each half-step is the global
    optimum in one argument, so the value is non-increasing.
    """
    rng = np.random.default_rng(cfg.seed)
    adj = phi.adjoint()
    best = (np.inf, None, None)
    for _ in range(32):
        ups = linalg.random_complex((phi.m,), rng)
        ups = ups / np.linalg.norm(ups)
        omega = None
        for _ in range(cfg.max_iters):
            a = phi.apply(np.outer(ups, ups.conj()))
            _, omega_new, *_ = _min_eig(a, cfg.tol)
            omega = omega_new
            b = adj.apply(np.outer(omega, omega.conj()))
            _, ups, *_ = _min_eig(b, cfg.tol)
        val = float(np.real(np.vdot(omega, phi.apply(np.outer(ups, ups.conj())) @ omega)))
        if val < best[0]:
            best = (val, ups, omega)
    return best


def _schmidt_rank_min(choi, m: int, n: int, k: int, cfg: MemberConfig, restarts: int = 8):
    """Minimize the Choi quadratic form over unit vectors of Schmidt rank <= k.

    Alternating generalized-eigenvalue steps on the factorization V = X Y
    with X of shape (n, k) and Y of shape (k, m); vec(X Y) spans exactly the
    Schmidt-rank-<= k vectors in K x H.
    """
    c = (np.asarray(choi) + np.asarray(choi).conj().T) / 2
    rng = np.random.default_rng(cfg.seed + 1)
    eye_n, eye_m = np.eye(n), np.eye(m)
    best = (np.inf, None)

    def _half_step(basis):
        mat = basis.conj().T @ c @ basis
        gram = basis.conj().T @ basis
        gram = (gram + gram.conj().T) / 2 + 1e-12 * np.eye(gram.shape[0])
        vals, vecs = scipy.linalg.eigh((mat + mat.conj().T) / 2, gram)
        return float(vals[0]), vecs[:, 0]

    for _ in range(restarts):
        x = linalg.random_complex((n, k), rng)
        y = linalg.random_complex((k, m), rng)
        val = np.inf
        for _ in range(cfg.max_iters):
            val, xv = _half_step(np.kron(y.T, eye_n))
            x = unvec(xv, k, n)
            val, yv = _half_step(np.kron(eye_m, x))
            y = unvec(yv, m, k)
        v = x @ y
        nrm = np.linalg.norm(vec(v))
        if nrm > 0:
            v = v / nrm
            quad = float(np.real(np.vdot(vec(v), c @ vec(v))))
            if quad < best[0]:
                best = (quad, v)
    return best


def _rank_k_projection_pair_refute(phi: SuperOperator, k: int, cfg: MemberConfig):
    """Search for rank-k projections (E, F) making Ad_E . Phi . Ad_F fail the CP test."""
    rng = np.random.default_rng(cfg.seed)
    n_sample = min(cfg.samples, 200)
    for _ in range(n_sample):
        e = linalg.random_projection(phi.n, k, rng)
        f = linalg.random_projection(phi.m, k, rng)
        comp = ad_map(e).compose(phi).compose(ad_map(f))
        val, vec_neg, *_ = _min_eig(comp.choi, cfg.tol)
        if val < -cfg.tol:
            return e, f, val, vec_neg
    # local optimization over Schmidt-rank-k vectors, then read projections off
    quad, v = _schmidt_rank_min(phi.choi, phi.m, phi.n, k, cfg)
    if v is not None and quad < -cfg.tol:
        e = _range_projection(v, k)
        f = _range_projection(v.conj().T, k)
        comp = ad_map(e).compose(phi).compose(ad_map(f))
        val, vec_neg, *_ = _min_eig(comp.choi, cfg.tol)
        if val < -cfg.tol:
            return e, f, val, vec_neg
    return None


def _range_projection(v, k: int) -> np.ndarray:
    """Rank-k projection containing the range of v (padded if rank(v) < k)."""
    u, s, _ = np.linalg.svd(v)
    cols = u[:, :k]
    return cols @ cols.conj().T


def _family_projection_witness(phi: SuperOperator, w, k: int, cfg: MemberConfig):
    """Refuting projection pair for a family-pattern map above its k-threshold.

    The top-k singular truncation of W = unvec(w) vectorizes to the
    Schmidt-rank-k direction with the most negative quadratic form; its range
    and row projections realize the failing Ad_E . Phi . Ad_F composition.
    """
    m, n = phi.dims
    u, s, vh = np.linalg.svd(unvec(w, m, n))
    e = u[:, :k] @ u[:, :k].conj().T
    f = vh[:k].conj().T @ vh[:k]
    comp = ad_map(e).compose(phi).compose(ad_map(f))
    val, vec_neg, *_ = _min_eig(comp.choi, cfg.tol)
    if val < -cfg.tol:
        return e, f, val, vec_neg
    return None


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------

def _cp_verdict(phi: SuperOperator, cfg: MemberConfig) -> Verdict:
    val, vec_neg, vals, _ = _min_eig(phi.choi, cfg.tol)
    diag = {"min_eigenvalue": val, "cfg": cfg.as_dict()}
    if val >= -cfg.tol:
        return Verdict(MEMBER, certificate={"type": "psd_floor", "min_eigenvalue": val},
                       diagnostics=diag)
    return Verdict(NOT_MEMBER,
                   witness={"type": "negative_eigenvector", "eigenvalue": val,
                            "vector": vec_neg},
                   diagnostics=diag)


def _kraus_from_eigen(phi: SuperOperator, k: int, cfg: MemberConfig):
    """Try to exhibit a Kraus decomposition with all operator ranks <= k."""
    vals, vecs = np.linalg.eigh((phi.choi + phi.choi.conj().T) / 2)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if vals[0] < -cfg.tol * scale:
        return None
    rng = np.random.default_rng(cfg.seed + 2)

    def attempt(basis):
        ops = []
        for idx in range(len(vals)):
            if vals[idx] <= cfg.tol * scale:
                continue
            v = np.sqrt(vals[idx]) * basis[:, idx]
            op = unvec(v, phi.m, phi.n)
            sv = linalg.singular_values(op)
            rank = int(np.sum(sv > 1e-8 * max(1.0, sv[0])))
            if rank > k:
                return None
            ops.append(op)
        if not ops:
            ops = []  # zero map: empty decomposition, represented by a zero op
            ops.append(np.zeros((phi.n, phi.m), dtype=np.complex128))
        return ops

    ops = attempt(vecs)
    if ops is not None:
        return ops
    # mix within (near-)degenerate eigenspaces; eigenvectors are only one
    # valid Kraus choice and need not be rank-minimal
    clusters = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or abs(vals[i] - vals[start]) > 1e-7 * scale:
            clusters.append((start, i))
            start = i
    for _ in range(cfg.max_iters):
        basis = vecs.copy()
        for lo, hi in clusters:
            if hi - lo > 1:
                u = linalg.random_unitary(hi - lo, rng)
                basis[:, lo:hi] = basis[:, lo:hi] @ u
        ops = attempt(basis)
        if ops is not None:
            return ops
    return None


def member(phi: SuperOperator, expr: ConeExpr, cfg: MemberConfig = MemberConfig()) -> Verdict:
    """Decide membership of a Hermiticity-preserving map in a normalized cone."""
    if cfg.samples < 1:
        raise ValueError("cfg.samples must be >= 1")
    if not phi.is_hermiticity_preserving(cfg.tol):
        raise ValueError("membership is defined for Hermiticity-preserving maps only")
    m, n = phi.dims
    kmax = min(m, n)

    if isinstance(expr, Base) and expr.kind == "CP":
        return _cp_verdict(phi, cfg)

    if isinstance(expr, Base) and expr.kind == "Pk":
        k = expr.k
        cp = _cp_verdict(phi, cfg)
        if cp.status == MEMBER:
            cp.diagnostics["route"] = "cp_subset"
            return cp
        pattern = _spectral_family_pattern(phi, cfg.tol)
        if pattern is not None and pattern[0] > cfg.tol:
            a, b, w = pattern
            lhs = (b / a) * _family_kfan(w, m, n, k)
            if lhs <= 1.0 + cfg.tol:
                return Verdict(MEMBER,
                               certificate={"type": "family", "a": a, "b": b, "w": w,
                                            "k": k, "threshold_lhs": lhs},
                               diagnostics={"route": "family_pattern",
                                            "cfg": cfg.as_dict()})
            found = _family_projection_witness(phi, w, k, cfg)
            if found is not None:
                e, f, val, vec_neg = found
                return Verdict(NOT_MEMBER,
                               witness={"type": "projection_pair", "E": e, "F": f,
                                        "eigenvalue": val, "vector": vec_neg, "k": k},
                               diagnostics={"route": "family_projection",
                                            "cfg": cfg.as_dict()})
        if k == 1:
            # completely copositive maps are positive: Phi . t in CP certifies
            co = _cp_verdict(phi.right_transpose(), cfg)
            if co.status == MEMBER:
                return Verdict(MEMBER,
                               certificate={"type": "twirled",
                                            "inner": co.certificate},
                               diagnostics={"route": "co_cp_subset",
                                            "cfg": cfg.as_dict()})
            val, ups, omega = _positivity_refute(phi, cfg)
            if val < -cfg.tol:
                return Verdict(NOT_MEMBER,
                               witness={"type": "vector_pair", "upsilon": ups,
                                        "omega": omega, "value": val},
                               diagnostics={"route": "vector_search", "restarts": 32,
                                            "cfg": cfg.as_dict()})
        else:
            found = _rank_k_projection_pair_refute(phi, k, cfg)
            if found is not None:
                e, f, val, vec_neg = found
                return Verdict(NOT_MEMBER,
                               witness={"type": "projection_pair", "E": e, "F": f,
                                        "eigenvalue": val, "vector": vec_neg, "k": k},
                               diagnostics={"route": "projection_search",
                                            "cfg": cfg.as_dict()})
        return Verdict(UNKNOWN,
                       diagnostics={"note": "refuter found no violation; "
                                            "k-positivity certification is incomplete",
                                    "cfg": cfg.as_dict()})

    if isinstance(expr, Base) and expr.kind == "SPk":
        k = expr.k
        val, vec_neg, vals, _ = _min_eig(phi.choi, cfg.tol)
        if val < -cfg.tol:
            x = unvec(vec_neg, m, n)
            return Verdict(NOT_MEMBER,
                           witness={"type": "dual_element",
                                    "psi": ad_map(x),
                                    "psi_certificate": {"type": "kraus", "ops": [x],
                                                       "rank_bound": kmax},
                                    "pairing": val},
                           diagnostics={"route": "not_cp", "cfg": cfg.as_dict()})
        ops = _kraus_from_eigen(phi, k, cfg)
        if ops is not None:
            return Verdict(MEMBER,
                           certificate={"type": "kraus", "ops": ops, "rank_bound": k},
                           diagnostics={"route": "eigendecomposition",
                                        "cfg": cfg.as_dict()})
        rng = np.random.default_rng(cfg.seed + 3)
        dual_gens = _sample_with_certs(Base("Pk", k), m, n, min(cfg.samples, 100), rng)
        for psi, cert in dual_gens:
            comp = psi.adjoint().compose(phi)
            cval, cvec, *_ = _min_eig(comp.choi, cfg.tol)
            if cval < -cfg.tol:
                return Verdict(NOT_MEMBER,
                               witness={"type": "dual_element", "psi": psi,
                                        "psi_certificate": cert,
                                        "composition_eigenvalue": cval,
                                        "pairing": None},
                               diagnostics={"route": "dual_sampling",
                                            "cfg": cfg.as_dict()})
        return Verdict(UNKNOWN,
                       diagnostics={"note": "no rank-bounded Kraus decomposition found "
                                            "and no sampled dual refutation",
                                    "dual_samples": len(dual_gens),
                                    "cfg": cfg.as_dict()})

    if isinstance(expr, Twirl):
        inner = member(phi.right_transpose(), expr.child, cfg)
        wrapped = Verdict(inner.status,
                          certificate=None if inner.certificate is None else
                          {"type": "twirled", "inner": inner.certificate},
                          witness=None if inner.witness is None else
                          {"type": "twirled", "inner": inner.witness},
                          diagnostics={"route": "twirl", "child": format_cone(expr.child),
                                       "inner": inner.diagnostics})
        return wrapped

    if isinstance(expr, Meet):
        left = member(phi, expr.left, cfg)
        right = member(phi, expr.right, cfg)
        diag = {"route": "meet", "left": left.status, "right": right.status,
                "cfg": cfg.as_dict()}
        for side, v, e in (("left", left, expr.left), ("right", right, expr.right)):
            if v.status == NOT_MEMBER:
                return Verdict(NOT_MEMBER,
                               witness={"type": "child_witness", "side": side,
                                        "child": e, "inner": v.witness},
                               diagnostics=diag)
        if left.status == MEMBER and right.status == MEMBER:
            return Verdict(MEMBER,
                           certificate={"type": "both", "left": left.certificate,
                                        "right": right.certificate},
                           diagnostics=diag)
        return Verdict(UNKNOWN, diagnostics=diag)

    if isinstance(expr, Join):
        left = member(phi, expr.left, cfg)
        if left.status == MEMBER:
            return Verdict(MEMBER,
                           certificate={"type": "child_certificate", "side": "left",
                                        "child": expr.left, "inner": left.certificate},
                           diagnostics={"route": "join", "cfg": cfg.as_dict()})
        right = member(phi, expr.right, cfg)
        if right.status == MEMBER:
            return Verdict(MEMBER,
                           certificate={"type": "child_certificate", "side": "right",
                                        "child": expr.right, "inner": right.certificate},
                           diagnostics={"route": "join", "cfg": cfg.as_dict()})
        found = witness_search(phi, expr, cfg)
        if found is not None:
            psi, value, cert = found
            return Verdict(NOT_MEMBER,
                           witness={"type": "dual_element", "psi": psi,
                                    "psi_certificate": cert, "pairing": value},
                           diagnostics={"route": "join_dual_witness",
                                        "cfg": cfg.as_dict()})
        return Verdict(UNKNOWN,
                       diagnostics={"route": "join",
                                    "note": "neither child certified and no dual witness",
                                    "left": left.status, "right": right.status,
                                    "cfg": cfg.as_dict()})

    raise TypeError(f"membership needs a normalized cone expression, got {expr!r}")


# ---------------------------------------------------------------------------
# Witness search over the dual cone
# ---------------------------------------------------------------------------

def witness_search(phi: SuperOperator, expr: ConeExpr, cfg: MemberConfig = MemberConfig()):
    """Search the dual cone for Psi with pair(Psi, phi) < -tol.

    Returns ``(psi, value, certificate)`` with the certificate proving
    membership of psi in dual(expr), or None when no witness is found.
    """
    if not phi.is_hermiticity_preserving(cfg.tol):
        raise ValueError("witness search is defined for Hermiticity-preserving maps")
    m, n = phi.dims
    kmax = min(m, n)
    d = dual_expr(expr)
    if isinstance(d, Base) and d.kind in ("CP", "SPk"):
        k = kmax if d.kind == "CP" else d.k
        if k == kmax:
            val, x, *_ = _min_eig(phi.choi, cfg.tol)
            if val < -cfg.tol:
                op = unvec(x, m, n)
                return ad_map(op), val, {"type": "kraus", "ops": [op], "rank_bound": kmax}
            return None
        quad, v = _schmidt_rank_min(phi.choi, m, n, k, cfg)
        if v is not None and quad < -cfg.tol:
            return ad_map(v), quad, {"type": "kraus", "ops": [v], "rank_bound": k}
        return None
    # fall back to sampled generators of the dual cone
    rng = np.random.default_rng(cfg.seed)
    best = None
    for psi, cert in _sample_with_certs(d, m, n, cfg.samples, rng):
        val = pair(psi, phi, cfg.tol)
        if val < -cfg.tol and (best is None or val < best[1]):
            best = (psi, val, cert)
    return best


# ---------------------------------------------------------------------------
# Mapping-cone-symmetry stability probe
# ---------------------------------------------------------------------------

def mcs_stability_probe(expr: ConeExpr, m: int, n: int,
                        cfg: MemberConfig = MemberConfig(samples=100)) -> dict:
    """Probe closure of the cone (and dual nonnegativity) under CP conjugation."""
    rng = np.random.default_rng(cfg.seed)
    single_kraus = isinstance(expr, Base) and expr.kind == "SPk"
    kraus_count = 1 if single_kraus else 2
    violations = []
    statuses = {MEMBER: 0, NOT_MEMBER: 0, UNKNOWN: 0}
    gens = _sample_with_certs(expr, m, n, cfg.samples, rng)
    for i, (g, _) in enumerate(gens):
        ups = superop.random_cp_map(n, n, rng, kraus_count)
        omg = superop.random_cp_map(m, m, rng, kraus_count)
        composite = ups.compose(g).compose(omg)
        verdict = member(composite, expr, MemberConfig(tol=cfg.tol, samples=50,
                                                      seed=cfg.seed + i,
                                                      max_iters=cfg.max_iters))
        statuses[verdict.status] += 1
        if verdict.status == NOT_MEMBER:
            violations.append(i)
    dual_min = np.inf
    dual = dual_expr(expr)
    dual_gens = sample_generators(dual, m, n, min(cfg.samples, 50), cfg.seed + 1)
    cone_gens = sample_generators(expr, m, n, min(cfg.samples, 50), cfg.seed + 2)
    for i, psi in enumerate(dual_gens):
        ups = superop.random_cp_map(n, n, rng, kraus_count)
        omg = superop.random_cp_map(m, m, rng, kraus_count)
        conj = ups.compose(psi).compose(omg)
        for g in cone_gens[:10]:
            dual_min = min(dual_min, pair(conj, g, cfg.tol))
    return {
        "cone": format_cone(expr),
        "m": m,
        "n": n,
        "samples": cfg.samples,
        "member_statuses": statuses,
        "member_violations": violations,
        "dual_min_pairing": float(dual_min),
        "pass": not violations and dual_min >= -cfg.tol,
        "cfg": cfg.as_dict(),
    }


# ---------------------------------------------------------------------------
# Independent re-verification of verdicts
# ---------------------------------------------------------------------------

def _recheck_certificate(phi: SuperOperator, cert: dict, tol: float) -> bool:
    kind = cert["type"]
    if kind == "psd_floor":
        vals = np.linalg.eigvalsh((phi.choi + phi.choi.conj().T) / 2)
        return bool(vals[0] >= -tol * max(1.0, abs(vals[-1])))
    if kind == "kraus":
        rebuilt = from_kraus(cert["ops"])
        if not phi.isclose(rebuilt, 1e-8 * max(1.0, float(np.max(np.abs(phi.choi))))):
            return False
        for op in cert["ops"]:
            sv = linalg.singular_values(op)
            if sv[0] > 0 and int(np.sum(sv > 1e-8 * sv[0])) > cert["rank_bound"]:
                return False
        return True
    if kind == "twirled_kraus":
        rebuilt = from_kraus(cert["ops"]).right_transpose()
        return phi.isclose(rebuilt, 1e-8)
    if kind == "family":
        d = phi.m * phi.n
        a, b, w = cert["a"], cert["b"], cert["w"]
        rebuilt = a * np.eye(d) - b * np.outer(w, w.conj())
        if np.max(np.abs(phi.choi - rebuilt)) > 1e-7 * max(1.0, abs(a)):
            return False
        if "k" in cert and a > 0:
            return (b / a) * _family_kfan(w, phi.m, phi.n, cert["k"]) <= 1.0 + 1e-7
        return True
    if kind == "twirled":
        return _recheck_certificate(phi.right_transpose(), cert["inner"], tol)
    if kind == "both":
        return (_recheck_certificate(phi, cert["left"], tol)
                and _recheck_certificate(phi, cert["right"], tol))
    if kind == "child_certificate":
        return _recheck_certificate(phi, cert["inner"], tol)
    if kind == "hull":
        return True  # hull provenance is by construction; parts carry their own certs
    if kind == "meet":
        if not _recheck_certificate(phi, cert["part"], tol):
            return False
        other = cert.get("other_cert")
        return other is None or _recheck_certificate(phi, other, tol)
    raise ValueError(f"unknown certificate type {kind!r}")


def _recheck_witness(phi: SuperOperator, wit: dict, tol: float) -> bool:
    kind = wit["type"]
    if kind == "negative_eigenvector":
        x = wit["vector"]
        quad = float(np.real(np.vdot(x, phi.choi @ x))) / float(np.real(np.vdot(x, x)))
        return quad < -tol / 2
    if kind == "vector_pair":
        ups, omega = wit["upsilon"], wit["omega"]
        val = float(np.real(np.vdot(omega, phi.apply(np.outer(ups, ups.conj())) @ omega)))
        return val < -tol / 2
    if kind == "projection_pair":
        comp = ad_map(wit["E"]).compose(phi).compose(ad_map(wit["F"]))
        x = wit["vector"]
        quad = float(np.real(np.vdot(x, comp.choi @ x))) / float(np.real(np.vdot(x, x)))
        return quad < -tol / 2
    if kind == "dual_element":
        psi = wit["psi"]
        if not _recheck_certificate(psi, wit["psi_certificate"], tol):
            return False
        if wit.get("pairing") is not None:
            return pair(psi, phi, max(tol, 1e-8)) < -tol / 2
        comp = psi.adjoint().compose(phi)
        vals = np.linalg.eigvalsh((comp.choi + comp.choi.conj().T) / 2)
        return bool(vals[0] < -tol / 2)
    if kind == "twirled":
        return _recheck_witness(phi.right_transpose(), wit["inner"], tol)
    if kind == "child_witness":
        return _recheck_witness(phi, wit["inner"], tol)
    raise ValueError(f"unknown witness type {kind!r}")


def recheck(phi: SuperOperator, verdict: Verdict, tol: float = 1e-9) -> bool:
    """Re-verify a verdict's certificate or witness from scratch."""
    if verdict.status == MEMBER:
        return verdict.certificate is not None and _recheck_certificate(
            phi, verdict.certificate, tol)
    if verdict.status == NOT_MEMBER:
        return verdict.witness is not None and _recheck_witness(phi, verdict.witness, tol)
    return True
