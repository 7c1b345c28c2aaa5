"""Skew tuples, the 2-step algebras they define, and the GL(q) x GL(p) action.

A tuple ``C = (C_1, ..., C_p)`` of skew q x q matrices defines the algebra
``n = v + z`` with adapted basis ``e_1..e_q`` of ``v`` and ``z_1..z_p`` of ``z``:

    [e_i, e_j] = sum_a (C_a)[i, j] z_a.

With the standard inner product this makes the matrix of ``j(z_a)`` equal to
``C_a^T = -C_a``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.linalg

from .kernel import DEFAULT_RANK_TOL, Mode, matrix_rank, to_float

SKEW_TOL = 1e-12
RATIONAL_DENOMINATOR = 4
RATIONAL_RANGE = 9


class RangeError(ValueError):
    """(p, q) outside 1 <= p <= q(q-1)/2, q >= 2."""


class NotTwoStepTypeError(ValueError):
    """Tuple is linearly dependent, so [n, n] is smaller than z."""


class SkewnessError(ValueError):
    pass


def dim_so(q: int) -> int:
    return q * (q - 1) // 2


def check_range(p: int, q: int) -> None:
    if q < 2 or not 1 <= p <= dim_so(q):
        raise RangeError(f"type (p={p}, q={q}) requires q >= 2 and 1 <= p <= {max(dim_so(q), 0)}")


# -- type classification -----------------------------------------------------


@dataclass(frozen=True)
class TypeClass:
    p: int
    q: int
    exceptional: bool
    reason: str


def _list_line(p: int, q: int) -> str | None:
    if p == 1:
        return "(1,q) for q>=2"
    if p == dim_so(q):
        return "(q(q-1)/2,q) for q>=2"
    if p == 2 and q >= 3:
        return "(2,k) for k>=3"
    if p == 3 and 4 <= q <= 6:
        return "(3,k) for 4<=k<=6"
    return None


def classify_type(p: int, q: int) -> TypeClass:
    check_range(p, q)
    line = _list_line(p, q)
    if line is not None:
        return TypeClass(p, q, True, line)
    comp = dim_so(q) - p
    if comp >= 1:
        line = _list_line(comp, q)
        if line is not None:
            return TypeClass(p, q, True, f"complement pair ({comp},{q}) with p'=q(q-1)/2-p matches {line}")
    return TypeClass(p, q, False, "non-exceptional")


# -- tuples ------------------------------------------------------------------


def _is_rational_array(a: np.ndarray) -> bool:
    return a.dtype == object


@dataclass(frozen=True, eq=False)
class SkewTuple:
    """A point of so(q)^p stored as an array of shape (p, q, q).

    ``mode == "rational"`` stores ``Fraction`` entries in an object array.
    """

    p: int
    q: int
    mats: np.ndarray
    mode: Mode = "float"

    def __post_init__(self):
        check_range(self.p, self.q)
        object.__setattr__(self, "mats", np.array(self.mats, copy=True))
        if self.mats.shape != (self.p, self.q, self.q):
            raise ValueError(f"expected matrices of shape {(self.p, self.q, self.q)}, got {self.mats.shape}")
        if self.mode == "rational":
            if not _is_rational_array(self.mats):
                raise ValueError("rational mode needs an object array of Fractions")
            if any((self.mats[a] + self.mats[a].T != 0).any() for a in range(self.p)):
                raise SkewnessError("matrices are not exactly skew-symmetric")
        else:
            for M in self.mats:
                if np.linalg.norm(M + M.T) > SKEW_TOL * (1 + np.linalg.norm(M)):
                    raise SkewnessError("matrices are not skew-symmetric within tolerance")
        self.mats.setflags(write=False)

    @classmethod
    def from_matrices(cls, mats, mode: Mode | None = None) -> "SkewTuple":
        arr = np.asarray(mats)
        if arr.ndim == 2:
            arr = arr[None]
        if mode is None:
            mode = "rational" if arr.dtype == object else "float"
        if mode == "rational":
            out = np.empty(arr.shape, dtype=object)
            for idx, x in np.ndenumerate(arr):
                out[idx] = Fraction(x)
            arr = out
        else:
            arr = np.array(arr, dtype=float)
        return cls(arr.shape[0], arr.shape[1], arr, mode)

    def to_float(self) -> "SkewTuple":
        if self.mode == "float":
            return self
        return SkewTuple(self.p, self.q, to_float(self.mats), "float")

    def flat(self) -> np.ndarray:
        """The p x q^2 flattening."""
        return self.mats.reshape(self.p, self.q * self.q)

    @cached_property
    def independent(self) -> bool:
        return matrix_rank(self.flat(), self.mode, DEFAULT_RANK_TOL) == self.p

    def norm(self) -> float:
        return float(np.linalg.norm(to_float(self.mats)))

    def __eq__(self, other):
        if not isinstance(other, SkewTuple):
            return NotImplemented
        return (self.p, self.q, self.mode) == (other.p, other.q, other.mode) and bool(
            np.array_equal(self.mats, other.mats)
        )

    def __hash__(self):
        return hash((self.p, self.q, self.mode, self.mats.tobytes() if self.mode == "float" else str(self.mats.tolist())))


def sample_tuple(p: int, q: int, seed: int, distribution: Literal["gaussian", "rational-lattice"] = "gaussian") -> SkewTuple:
    """Deterministic random tuple: i.i.d. strictly-lower entries mirrored with a sign.

    ``rational-lattice`` draws integers in [-9, 9] over denominator 4 and returns
    an exact rational tuple.
    """
    check_range(p, q)
    rng = np.random.default_rng(seed)
    rows, cols = np.tril_indices(q, -1)
    if distribution == "gaussian":
        vals = rng.standard_normal((p, rows.size))
        mats = np.zeros((p, q, q))
        mats[:, rows, cols] = vals
        mats[:, cols, rows] = -vals
        return SkewTuple(p, q, mats, "float")
    if distribution == "rational-lattice":
        vals = rng.integers(-RATIONAL_RANGE, RATIONAL_RANGE + 1, size=(p, rows.size))
        mats = np.empty((p, q, q), dtype=object)
        mats[...] = Fraction(0)
        for a in range(p):
            for k, (i, j) in enumerate(zip(rows, cols)):
                x = Fraction(int(vals[a, k]), RATIONAL_DENOMINATOR)
                mats[a, i, j] = x
                mats[a, j, i] = -x
        return SkewTuple(p, q, mats, "rational")
    raise ValueError(f"unknown distribution {distribution!r}")


# -- algebras ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TwoStepAlgebra:
    """Structure constants ``c[i, j, a]`` with ``[e_i, e_j] = sum_a c[i, j, a] z_a``."""

    C: SkewTuple

    @property
    def p(self) -> int:
        return self.C.p

    @property
    def q(self) -> int:
        return self.C.q

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def mode(self) -> Mode:
        return self.C.mode

    @cached_property
    def structure(self) -> np.ndarray:
        return np.transpose(self.C.mats, (1, 2, 0))

    @cached_property
    def full_structure(self) -> np.ndarray:
        """Tensor B[a, b, k]: coefficient of basis vector k in [b_a, b_b], all n basis vectors."""
        n, q = self.n, self.q
        if self.mode == "rational":
            B = np.empty((n, n, n), dtype=object)
            B[...] = Fraction(0)
        else:
            B = np.zeros((n, n, n))
        B[:q, :q, q:] = self.structure
        return B


def build_algebra(C: SkewTuple) -> TwoStepAlgebra:
    if not C.independent:
        raise NotTwoStepTypeError(
            f"tuple is linearly dependent: commutator is smaller than z, algebra is not of type ({C.p},{C.q})"
        )
    return TwoStepAlgebra(C)


def bracket(a: TwoStepAlgebra, x, y) -> np.ndarray:
    """Bracket of two vectors in adapted coordinates (v-coordinates first)."""
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != (a.n,) or y.shape != (a.n,):
        raise ValueError(f"vectors must have length {a.n}")
    xv, yv = x[: a.q], y[: a.q]
    zpart = np.einsum("i,j,ija->a", xv, yv, a.structure) if a.mode == "float" else _obj_bilinear(xv, yv, a.structure)
    zeros = np.zeros(a.q, dtype=zpart.dtype)
    return np.concatenate([zeros, zpart])


def _obj_bilinear(x, y, c):
    out = np.empty(c.shape[2], dtype=object)
    for k in range(c.shape[2]):
        out[k] = x @ c[:, :, k] @ y
    return out


def j_map(a: TwoStepAlgebra, z) -> np.ndarray:
    """Matrix of j(z) on v, defined by <j(z) v, w> = <[v, w], z>."""
    z = np.asarray(z)
    if z.shape != (a.p,):
        raise ValueError(f"z must have length {a.p}")
    # <J e_i, e_j> = J[j, i] = sum_a z_a C_a[i, j]
    return np.tensordot(z, a.C.mats, axes=(0, 0)).T


# -- actions -----------------------------------------------------------------


def _as_array(M, mode: Mode) -> np.ndarray:
    if mode == "rational":
        arr = np.asarray(M, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for idx, x in np.ndenumerate(arr):
            out[idx] = Fraction(x)
        return out
    return np.asarray(M, dtype=float)


def group_act(g, h, C: SkewTuple) -> SkewTuple:
    """(g, h) . C with result_a = sum_b h[a, b] g C_b g^T."""
    g, h = _as_array(g, C.mode), _as_array(h, C.mode)
    if g.shape != (C.q, C.q) or h.shape != (C.p, C.p):
        raise ValueError("group element has wrong shape")
    if matrix_rank(g, C.mode) < C.q or matrix_rank(h, C.mode) < C.p:
        raise ValueError("group element is singular")
    return SkewTuple(C.p, C.q, act_raw(g, h, C.mats), C.mode)


def act_raw(g: np.ndarray, h: np.ndarray, mats: np.ndarray) -> np.ndarray:
    conj = np.stack([g @ M @ g.T for M in mats])
    return np.tensordot(h, conj, axes=(1, 0))


def lie_act(X, Y, C: SkewTuple) -> np.ndarray:
    """(X, Y) . C with result_a = X C_a + C_a X^T + sum_b Y[a, b] C_b, shape (p, q, q)."""
    X, Y = _as_array(X, C.mode), _as_array(Y, C.mode)
    if X.shape != (C.q, C.q) or Y.shape != (C.p, C.p):
        raise ValueError("Lie algebra element has wrong shape")
    return lie_act_raw(X, Y, C.mats)


def lie_act_raw(X: np.ndarray, Y: np.ndarray, mats: np.ndarray) -> np.ndarray:
    out = np.stack([X @ M + M @ X.T for M in mats])
    return out + np.tensordot(Y, mats, axes=(1, 0))


def expm(A) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    return scipy.linalg.expm(np.asarray(A, dtype=float))
