"""Nullspaces, subspace comparison and projection in float or exact rational arithmetic.

Float mode works on numpy float arrays and returns orthonormal bases.
Rational mode works on numpy object arrays of ``fractions.Fraction`` (or ints)
and uses fraction-free Gauss-Jordan elimination on integers, so every rank
and every basis vector is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Literal

import numpy as np

Mode = Literal["float", "rational"]

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class SubspaceBasis:
    ambient_dim: int
    vectors: np.ndarray  # shape (rank, ambient_dim)
    mode: Mode = "float"

    @property
    def rank(self) -> int:
        return int(self.vectors.shape[0])

    def as_float(self) -> "SubspaceBasis":
        if self.mode == "float":
            return self
        return orthonormalize(to_float(self.vectors), self.ambient_dim)


def to_float(a) -> np.ndarray:
    return np.asarray(a, dtype=object).astype(float) if np.asarray(a).dtype == object else np.asarray(a, dtype=float)


def to_fraction_array(a) -> np.ndarray:
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = Fraction(x)
    return out


def empty_basis(ambient_dim: int, mode: Mode = "float") -> SubspaceBasis:
    dtype = float if mode == "float" else object
    return SubspaceBasis(ambient_dim, np.zeros((0, ambient_dim), dtype=dtype), mode)


def orthonormalize(vectors: np.ndarray, ambient_dim: int, tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Orthonormal basis of the row span of ``vectors`` (numerical rank via SVD)."""
    vectors = np.asarray(vectors, dtype=float).reshape(-1, ambient_dim)
    if vectors.shape[0] == 0:
        return empty_basis(ambient_dim)
    _, s, vt = np.linalg.svd(vectors, full_matrices=False)
    r = _numerical_rank(s, tol)
    return SubspaceBasis(ambient_dim, vt[:r].copy(), "float")


def _numerical_rank(s: np.ndarray, tol: float) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


# -- exact elimination -------------------------------------------------------


def _integer_rows(A: np.ndarray) -> list[list[int]]:
    """Scale each row of a rational matrix by the lcm of its denominators."""
    rows = []
    for row in A:
        fr = [Fraction(x) for x in row]
        if not any(fr):
            continue
        m = 1
        for x in fr:
            m = lcm(m, x.denominator)
        rows.append([int(x * m) for x in fr])
    return rows


def fraction_free_rref(rows: list[list[int]], ncols: int) -> tuple[list[list[int]], list[int], int]:
    """Fraction-free Gauss-Jordan elimination (Bareiss style) on an integer matrix.

    Returns ``(R, pivots, d)`` where the first ``len(pivots)`` rows of ``R`` are in
    reduced echelon form with every pivot entry equal to ``d`` and all entries
    integral. Every division performed is exact.
    """
    M = [list(r) for r in rows]
    nrows = len(M)
    prev = 1
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv_row = next((i for i in range(r, nrows) if M[i][c] != 0), None)
        if piv_row is None:
            continue
        M[r], M[piv_row] = M[piv_row], M[r]
        piv = M[r][c]
        prow = M[r]
        for i in range(nrows):
            if i == r:
                continue
            row = M[i]
            f = row[c]
            if f == 0:
                # exact: entries of this row are multiplied by piv/prev
                if piv != prev:
                    M[i] = [(piv * x) // prev for x in row]
                continue
            M[i] = [(piv * x - f * y) // prev for x, y in zip(row, prow)]
        prev = piv
        pivots.append(c)
        r += 1
    return M[:r], pivots, (prev if pivots else 1)


def _rational_nullspace(A: np.ndarray, ncols: int) -> np.ndarray:
    rows = _integer_rows(A)
    if not rows:
        out = np.empty((ncols, ncols), dtype=object)
        for idx in np.ndindex(out.shape):
            out[idx] = Fraction(int(idx[0] == idx[1]))
        return out
    R, pivots, d = fraction_free_rref(rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    out = np.empty((len(free), ncols), dtype=object)
    out[...] = Fraction(0)
    for k, f in enumerate(free):
        out[k, f] = Fraction(1)
        for i, pc in enumerate(pivots):
            out[k, pc] = Fraction(-R[i][f], d)
    return out


def rational_rank(A) -> int:
    A = np.asarray(A, dtype=object)
    if A.size == 0:
        return 0
    rows = _integer_rows(A.reshape(A.shape[0], -1))
    if not rows:
        return 0
    _, pivots, _ = fraction_free_rref(rows, A.shape[1])
    return len(pivots)


def matrix_rank(A, mode: Mode = "float", tol: float = DEFAULT_RANK_TOL) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    if mode == "rational":
        return rational_rank(A)
    return _numerical_rank(np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False), tol)


# -- public operations -------------------------------------------------------


def nullspace(A, mode: Mode = "float", tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Basis of ``{x : A x = 0}``.

    In float mode the numerical rank counts singular values above
    ``tol * sigma_max`` and the basis is orthonormal. In rational mode the basis
    is exact (one vector per free column of the reduced echelon form).
    """
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("nullspace expects a 2-d matrix")
    n = A.shape[1]
    if mode == "rational":
        return SubspaceBasis(n, _rational_nullspace(A, n), "rational")
    if tol <= 0:
        raise ValueError("float mode requires tol > 0")
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        return SubspaceBasis(n, np.eye(n), "float")
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    r = _numerical_rank(s, tol)
    return SubspaceBasis(n, vt[r:].copy(), "float")


def project(v, B: SubspaceBasis) -> tuple[np.ndarray, float]:
    """Least-squares projection of ``v`` onto span(B) and the residual norm.

    In rational mode the projection is exact and the residual is returned as a
    float of the exact residual norm (zero iff ``v`` lies in the span).
    """
    v = np.asarray(v)
    if v.shape != (B.ambient_dim,):
        raise ValueError(f"vector of length {v.shape} does not match ambient dim {B.ambient_dim}")
    if B.rank == 0:
        proj = np.zeros_like(v, dtype=object if B.mode == "rational" else float)
        if B.mode == "rational":
            proj[...] = Fraction(0)
        return proj, float(np.linalg.norm(to_float(v)))
    if B.mode == "float":
        v = np.asarray(v, dtype=float)
        coeffs = B.vectors @ v
        proj = B.vectors.T @ coeffs
        return proj, float(np.linalg.norm(v - proj))
    V = B.vectors
    vv = to_fraction_array(v)
    gram = V @ V.T
    rhs = V @ vv
    coeffs = _solve_rational(gram, rhs)
    proj = V.T @ coeffs
    diff = vv - proj
    res2 = sum((x * x for x in diff), Fraction(0))
    return proj, float(res2) ** 0.5


def _solve_rational(G: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = G.shape[0]
    M = [[Fraction(x) for x in G[i]] + [Fraction(b[i])] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if M[i][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for i in range(n):
            if i != c and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    out = np.empty(n, dtype=object)
    for i in range(n):
        out[i] = M[i][n]
    return out


def subspace_equal(Ba: SubspaceBasis, Bb: SubspaceBasis, tol: float = 1e-9) -> bool:
    if Ba.ambient_dim != Bb.ambient_dim:
        raise ValueError("ambient dimensions differ")
    if Ba.rank != Bb.rank:
        return False
    if Ba.rank == 0:
        return True
    if Ba.mode == "rational" and Bb.mode == "rational":
        stacked = np.vstack([Ba.vectors, Bb.vectors])
        return rational_rank(stacked) == Ba.rank
    fa, fb = Ba.as_float(), Bb.as_float()
    if fa.rank != Ba.rank or fb.rank != Bb.rank:
        return False
    for src, dst in ((fa, fb), (fb, fa)):
        for v in src.vectors:
            if project(v, dst)[1] > tol * max(1.0, float(np.linalg.norm(v))):
                return False
    return True


def span(vectors, ambient_dim: int, mode: Mode = "float", tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Basis for the span of the given rows (independent rows only)."""
    vectors = np.asarray(vectors, dtype=float if mode == "float" else object).reshape(-1, ambient_dim)
    if mode == "float":
        return orthonormalize(vectors, ambient_dim, tol)
    if vectors.shape[0] == 0:
        return empty_basis(ambient_dim, "rational")
    rows = _integer_rows(vectors)
    if not rows:
        return empty_basis(ambient_dim, "rational")
    R, _, d = fraction_free_rref(rows, ambient_dim)
    out = np.empty((len(R), ambient_dim), dtype=object)
    for i, row in enumerate(R):
        for j, x in enumerate(row):
            out[i, j] = Fraction(x, d)
    return SubspaceBasis(ambient_dim, out, "rational")
