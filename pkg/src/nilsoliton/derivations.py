"""Derivation algebras of 2-step nilpotent algebras.

Der(n) is computed as the nullspace of the Leibniz system, then split by blocks
into the block-diagonal part (inside gl(v) + gl(z)) and the part mapping v into z.
Matrices act on column vectors in adapted coordinates, v first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import TwoStepAlgebra
from .kernel import (
    DEFAULT_RANK_TOL,
    Mode,
    SubspaceBasis,
    nullspace,
    project,
    span,
    subspace_equal,
    to_float,
    to_fraction_array,
)

MEMBERSHIP_TOL = 1e-9


def leibniz_system(a: TwoStepAlgebra, mode: Mode = "float") -> np.ndarray:
    """Matrix of E -> (E[b_i, b_j] - [E b_i, b_j] - [b_i, E b_j]) over i < j, all outputs.

    Columns index vec(E) in row-major order (column r*n + s is E[r, s]).
    """
    n = a.n
    B = a.full_structure
    if mode == "rational":
        B = to_fraction_array(B)
        eye = np.empty((n, n), dtype=object)
        eye[...] = Fraction(0)
        for i in range(n):
            eye[i, i] = Fraction(1)
    else:
        B = to_float(B)
        eye = np.eye(n)
    # indices [a, b, k, r, s]
    t1 = eye[None, None, :, :, None] * B[:, :, None, None, :]
    # -[E b_a, b_b]_k = -sum_r E[r, a] B[r, b, k]  ->  coefficient delta_{s a} B[r, b, k]
    t2 = eye[:, None, None, None, :] * np.transpose(B, (1, 2, 0))[None, :, :, :, None]
    # -[b_a, E b_b]_k = -sum_r E[r, b] B[a, r, k]  ->  coefficient delta_{s b} B[a, r, k]
    t3 = eye[None, :, None, None, :] * np.transpose(B, (0, 2, 1))[:, None, :, :, None]
    M = t1 - t2 - t3
    iu, ju = np.triu_indices(n, 1)
    return M[iu, ju].reshape(-1, n * n)


def leibniz_residual(a: TwoStepAlgebra, E) -> float:
    """Largest entry of the Leibniz defect of E on all basis pairs."""
    L = leibniz_system(a)
    return float(np.max(np.abs(L @ to_float(E).reshape(-1)), initial=0.0))


def one_two_derivation(a: TwoStepAlgebra) -> np.ndarray:
    return np.diag([1.0] * a.q + [2.0] * a.p)


def vz_elementary(a: TwoStepAlgebra) -> list[np.ndarray]:
    """The pq elementary maps e_i -> z_k."""
    out = []
    for k in range(a.p):
        for i in range(a.q):
            E = np.zeros((a.n, a.n))
            E[a.q + k, i] = 1.0
            out.append(E)
    return out


def _blocks(E: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split E into (block-diagonal, lower-left v->z, upper-right z->v)."""
    zero = E * 0
    bd = zero.copy()
    bd[:q, :q] = E[:q, :q]
    bd[q:, q:] = E[q:, q:]
    lo = zero.copy()
    lo[q:, :q] = E[q:, :q]
    up = zero.copy()
    up[:q, q:] = E[:q, q:]
    return bd, lo, up


@dataclass(frozen=True, eq=False)
class DerivationBasis:
    algebra: TwoStepAlgebra
    basis: SubspaceBasis
    vz_part: SubspaceBasis
    blockdiag_part: SubspaceBasis
    mode: Mode
    split_ok: bool
    split_residual: float
    tol: float = DEFAULT_RANK_TOL
    minimal: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "minimal", is_minimal_der(self))

    @property
    def dim(self) -> int:
        return self.basis.rank

    def matrices(self) -> list[np.ndarray]:
        n = self.algebra.n
        return [v.reshape(n, n) for v in self.basis.vectors]


def derivation_algebra(a: TwoStepAlgebra, mode: Mode = "float", tol: float = DEFAULT_RANK_TOL) -> DerivationBasis:
    n, q = a.n, a.q
    L = leibniz_system(a, mode)
    basis = nullspace(L, mode, tol)
    bd_vecs, lo_vecs = [], []
    worst = 0.0
    split_ok = True
    for v in basis.vectors:
        bd, lo, up = _blocks(v.reshape(n, n), q)
        bd_vecs.append(bd.reshape(-1))
        lo_vecs.append(lo.reshape(-1))
        for part in (bd, lo):
            r = L @ part.reshape(-1)
            if mode == "rational":
                if any(x != 0 for x in r):
                    split_ok = False
                    worst = max(worst, float(np.max(np.abs(to_float(r)))))
            else:
                worst = max(worst, float(np.max(np.abs(r), initial=0.0)))
        if mode == "rational":
            if any(x != 0 for x in up.reshape(-1)):
                split_ok = False
        else:
            worst = max(worst, float(np.max(np.abs(up), initial=0.0)))
    if mode == "float":
        scale = 1.0 + float(np.linalg.norm(to_float(a.structure)))
        split_ok = worst <= MEMBERSHIP_TOL * scale
    blockdiag = span(np.array(bd_vecs).reshape(-1, n * n), n * n, mode, tol)
    vz = span(np.array(lo_vecs).reshape(-1, n * n), n * n, mode, tol)
    return DerivationBasis(a, basis, vz, blockdiag, mode, split_ok, worst, tol)


def is_minimal_der(d: DerivationBasis) -> bool:
    """Der = R(D) + Der_{v->z}: dimension 1 + pq with block-diagonal part the line of D."""
    a = d.algebra
    pq = a.p * a.q
    if d.dim != 1 + pq or d.vz_part.rank != pq or d.blockdiag_part.rank != 1:
        return False
    D = one_two_derivation(a).reshape(1, -1)
    line = span(D if d.mode == "float" else to_fraction_array(D.astype(int)), a.n * a.n, d.mode)
    return subspace_equal(d.blockdiag_part, line, tol=MEMBERSHIP_TOL)


def _lie(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def _member(v: np.ndarray, B: SubspaceBasis, tol: float) -> float:
    """Relative projection residual of v against span(B)."""
    res = project(v, B)[1]
    return res / max(1.0, float(np.linalg.norm(v)))


def check_ideal_structure(d: DerivationBasis, trials: int = 5, seed: int = 0, tol: float = MEMBERSHIP_TOL) -> dict:
    """Bracket-closure checks for R(D) + Der_{v->z} inside Der(n) and Der(n) inside block-lower matrices.

    (a) R(D) + Der_{v->z} is a subalgebra; (b) it is an ideal of Der(n);
    (c) for minimal Der(n), [T, Der(n)] lies in Der(n) for random block-lower-triangular T
    (v block first, so Der_{v->z} is strictly lower). (c) is None when Der(n) is not minimal.
    """
    a = d.algebra
    n, q = a.n, a.q
    der = d.basis.as_float()
    vz = d.vz_part.as_float()
    S = span(np.vstack([one_two_derivation(a).reshape(1, -1), vz.vectors]), n * n)
    S_mats = [v.reshape(n, n) for v in S.vectors]
    der_mats = [v.reshape(n, n) for v in der.vectors]

    worst = {"subalg": 0.0, "ideal_in_der": 0.0, "ideal_in_borel": 0.0}
    for i, X in enumerate(S_mats):
        for Y in S_mats[i + 1:]:
            worst["subalg"] = max(worst["subalg"], _member(_lie(X, Y).reshape(-1), S, tol))
    for X in der_mats:
        for Y in S_mats:
            worst["ideal_in_der"] = max(worst["ideal_in_der"], _member(_lie(X, Y).reshape(-1), S, tol))

    borel_ok = None
    if d.minimal:
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            T = rng.standard_normal((n, n))
            T[:q, q:] = 0.0
            for X in der_mats:
                worst["ideal_in_borel"] = max(worst["ideal_in_borel"], _member(_lie(T, X).reshape(-1), der, tol))
        borel_ok = worst["ideal_in_borel"] < tol

    return {
        "subalg_ok": worst["subalg"] < tol,
        "ideal_in_der_ok": worst["ideal_in_der"] < tol,
        "ideal_in_borel_ok": borel_ok,
        "max_residual": max(worst.values()),
    }
