"""Stabilizers of the gl(q) + gl(p) action at a tuple and their link to derivations."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import SkewTuple, TwoStepAlgebra, lie_act_raw
from .derivations import MEMBERSHIP_TOL, derivation_algebra, DerivationBasis
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


@dataclass(frozen=True, eq=False)
class StabilizerReport:
    C: SkewTuple
    gl_basis: SubspaceBasis  # vectors are (vec X, vec Y) of length q^2 + p^2
    sl_basis: SubspaceBasis
    mode: Mode

    @property
    def gl_dim(self) -> int:
        return self.gl_basis.rank

    @property
    def sl_dim(self) -> int:
        return self.sl_basis.rank

    @property
    def contains_D_line(self) -> bool:
        v = d_line_vector(self.C.p, self.C.q)
        if self.mode == "rational":
            return project(to_fraction_array(v.astype(int)), self.gl_basis)[1] == 0.0
        return project(v, self.gl_basis)[1] <= MEMBERSHIP_TOL * np.linalg.norm(v)

    def pairs(self, which: str = "gl") -> list[tuple[np.ndarray, np.ndarray]]:
        B = self.gl_basis if which == "gl" else self.sl_basis
        return [split_pair(v, self.C.p, self.C.q) for v in B.vectors]


def d_line_vector(p: int, q: int) -> np.ndarray:
    """(X, Y) = (-I_q, 2 I_p) flattened."""
    return np.concatenate([-np.eye(q).reshape(-1), 2 * np.eye(p).reshape(-1)])


def split_pair(v: np.ndarray, p: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    return v[: q * q].reshape(q, q), v[q * q:].reshape(p, p)


def action_matrix(C: SkewTuple, mode: Mode = "float") -> np.ndarray:
    """Matrix of (X, Y) -> lie_act(X, Y, C), restricted to strictly-lower output entries."""
    p, q = C.p, C.q
    mats = to_fraction_array(C.mats) if mode == "rational" else to_float(C.mats)
    zero = Fraction(0) if mode == "rational" else 0.0
    one = Fraction(1) if mode == "rational" else 1.0
    dtype = object if mode == "rational" else float
    rows, cols = np.tril_indices(q, -1)
    columns = []
    for k in range(q * q + p * p):
        X = np.full((q, q), zero, dtype=dtype)
        Y = np.full((p, p), zero, dtype=dtype)
        if k < q * q:
            X[k // q, k % q] = one
        else:
            j = k - q * q
            Y[j // p, j % p] = one
        out = lie_act_raw(X, Y, mats)
        columns.append(out[:, rows, cols].reshape(-1))
    return np.array(columns, dtype=dtype).T


def _trace_rows(p: int, q: int, mode: Mode) -> np.ndarray:
    rows = np.zeros((2, q * q + p * p), dtype=int)
    rows[0, [i * q + i for i in range(q)]] = 1
    rows[1, [q * q + i * p + i for i in range(p)]] = 1
    return to_fraction_array(rows) if mode == "rational" else rows.astype(float)


def stabilizer(C: SkewTuple, mode: Mode = "float", tol: float = DEFAULT_RANK_TOL) -> StabilizerReport:
    A = action_matrix(C, mode)
    gl = nullspace(A, mode, tol)
    if mode == "float":
        # trace rows scaled to the action's magnitude so both blocks share conditioning
        scale = max(float(np.linalg.norm(A, 2)), 1.0)
        sl = nullspace(np.vstack([A, scale * _trace_rows(C.p, C.q, mode)]), mode, tol)
    else:
        sl = nullspace(np.vstack([A, _trace_rows(C.p, C.q, mode)]), mode, tol)
    return StabilizerReport(C, gl, sl, mode)


def _pair_to_derivation(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    q, p = X.shape[0], Y.shape[0]
    E = np.zeros((q + p, q + p), dtype=X.dtype)
    if X.dtype == object:
        E[...] = Fraction(0)
    E[:q, :q] = -X.T
    E[q:, q:] = Y
    return E


def correspondence_check(
    C: SkewTuple,
    a: TwoStepAlgebra,
    tol: float = MEMBERSHIP_TOL,
    stab: StabilizerReport | None = None,
    der: DerivationBasis | None = None,
) -> bool:
    """(X, Y) -> blockdiag(-X^T, Y) maps the gl-stabilizer onto the block-diagonal derivations."""
    stab = stab or stabilizer(C)
    der = der or derivation_algebra(a)
    n = a.n
    if stab.gl_dim != der.blockdiag_part.rank:
        return False
    images = [_pair_to_derivation(X, Y).reshape(-1) for X, Y in stab.pairs("gl")]
    mode = stab.mode if stab.mode == der.mode else "float"
    if mode == "float":
        images = [to_float(v) for v in images]
        target = der.blockdiag_part.as_float()
    else:
        target = der.blockdiag_part
    image_span = span(np.array(images, dtype=float if mode == "float" else object).reshape(-1, n * n), n * n, mode)
    if image_span.rank != stab.gl_dim:
        return False
    return subspace_equal(image_span, target, tol)


@dataclass(frozen=True)
class LemmaVerdict:
    verdict: bool
    vacuous: bool
    gl_dim: int
    sl_dim: int


def lemma_check(
    C: SkewTuple,
    closed_certified: bool,
    tol: float = MEMBERSHIP_TOL,
    stab: StabilizerReport | None = None,
) -> LemmaVerdict:
    """For a closed SL x SL orbit: gl-stabilizer = R(-I, 2I) + sl-stabilizer."""
    stab = stab or stabilizer(C)
    if not closed_certified:
        return LemmaVerdict(True, True, stab.gl_dim, stab.sl_dim)
    if stab.gl_dim != 1 + stab.sl_dim:
        return LemmaVerdict(False, False, stab.gl_dim, stab.sl_dim)
    dim = stab.gl_basis.ambient_dim
    dvec = d_line_vector(C.p, C.q)
    if stab.mode == "rational":
        dvec = to_fraction_array(dvec.astype(int))
        combined = span(np.vstack([dvec[None, :], stab.sl_basis.vectors]), dim, "rational")
    else:
        combined = span(np.vstack([dvec[None, :], stab.sl_basis.vectors]), dim)
    ok = combined.rank == 1 + stab.sl_dim and subspace_equal(combined, stab.gl_basis, tol)
    return LemmaVerdict(bool(ok), False, stab.gl_dim, stab.sl_dim)
