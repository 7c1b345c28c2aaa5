"""Ricci tensors of metric nilpotent Lie algebras and the nilsoliton fit Ric = cI + D.

Sign convention: for 2-step algebras with an orthonormal adapted basis the Ricci
operator is blockdiag(1/2 sum_a C_a^2, 1/4 G) with G[a, b] = tr(C_a^T C_b), so it
is negative semidefinite on v and positive definite on z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SkewTuple, TwoStepAlgebra
from .derivations import DerivationBasis
from .kernel import to_float


class MetricError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MetricData:
    """Inner product ``<x, y> = x^T P y`` in the adapted basis and a factor L with L^T L = P."""

    P: np.ndarray
    L: np.ndarray

    @classmethod
    def from_matrix(cls, P) -> "MetricData":
        P = np.asarray(P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise MetricError("metric must be a square matrix")
        if not np.allclose(P, P.T, rtol=0, atol=1e-12 * max(1.0, np.abs(P).max())):
            raise MetricError("metric must be symmetric")
        try:
            K = np.linalg.cholesky(P)
        except np.linalg.LinAlgError as exc:
            raise MetricError("metric is not positive definite") from exc
        return cls(P, K.T)

    @classmethod
    def identity(cls, n: int) -> "MetricData":
        return cls(np.eye(n), np.eye(n))

    @property
    def n(self) -> int:
        return self.P.shape[0]


def ricci_from_structure(B: np.ndarray) -> np.ndarray:
    """Ricci form of a nilpotent algebra given structure constants B[a, b, k] in an orthonormal basis."""
    # -1/2 sum_{a,k} B[x,a,k] B[y,a,k] + 1/4 sum_{a,b} B[a,b,x] B[a,b,y]
    return -0.5 * np.einsum("xak,yak->xy", B, B) + 0.25 * np.einsum("abx,aby->xy", B, B)


def ricci_general(a: TwoStepAlgebra, m: MetricData) -> np.ndarray:
    """Ricci endomorphism of (n, m) in the adapted basis, via an orthonormal frame."""
    if m.n != a.n:
        raise ValueError(f"metric has dimension {m.n}, algebra has {a.n}")
    B = to_float(a.full_structure)
    Linv = np.linalg.inv(m.L)
    # frame f_a = Linv[:, a]; coordinates of w in the frame are L w
    Bf = np.einsum("ia,jb,ijk,lk->abl", Linv, Linv, B, m.L)
    R = ricci_from_structure(Bf)
    return Linv @ R @ m.L


def gram(C: SkewTuple) -> np.ndarray:
    M = to_float(C.flat())
    return M @ M.T


def ricci_2step(C: SkewTuple) -> np.ndarray:
    mats = to_float(C.mats)
    q, p = C.q, C.p
    out = np.zeros((q + p, q + p))
    out[:q, :q] = 0.5 * sum(M @ M for M in mats)
    out[q:, q:] = 0.25 * gram(C)
    return out


@dataclass(frozen=True, eq=False)
class SolitonCertificate:
    c: float
    D_matrix: np.ndarray
    residual: float
    metric: MetricData

    def to_json(self) -> dict:
        return {
            "c": self.c,
            "D": self.D_matrix.tolist(),
            "residual": self.residual,
            "metric": self.metric.P.tolist(),
        }


def soliton_defect(a: TwoStepAlgebra, m: MetricData, der: DerivationBasis) -> SolitonCertificate:
    """Least-squares fit of the Ricci endomorphism by cI + D with D in Der(n)."""
    n = a.n
    ric = ricci_general(a, m)
    der_vecs = der.basis.as_float().vectors
    A = np.column_stack([np.eye(n).reshape(-1), *der_vecs]) if len(der_vecs) else np.eye(n).reshape(-1, 1)
    coef, *_ = np.linalg.lstsq(A, ric.reshape(-1), rcond=None)
    c = float(coef[0])
    D = (der_vecs.T @ coef[1:]).reshape(n, n) if len(der_vecs) else np.zeros((n, n))
    residual = float(np.linalg.norm(ric - c * np.eye(n) - D)) / max(1.0, float(np.linalg.norm(ric)))
    return SolitonCertificate(c, D, residual, m)


def pullback_metric(g, h) -> MetricData:
    """Metric on n(C) isometric to the standard metric on n((g, h) . C)."""
    g, h = np.asarray(g, dtype=float), np.asarray(h, dtype=float)
    if abs(np.linalg.det(g)) == 0 or abs(np.linalg.det(h)) == 0:
        raise ValueError("singular group element")
    ginv = np.linalg.inv(g)
    q, p = g.shape[0], h.shape[0]
    P = np.zeros((q + p, q + p))
    P[:q, :q] = ginv @ ginv.T
    P[q:, q:] = h.T @ h
    P = 0.5 * (P + P.T)
    return MetricData.from_matrix(P)
