"""Moment map of the SL(q) x SL(p) action and a norm-minimizing flow along orbits.

Each step multiplies the accumulated group element by exponentials of the
(symmetric, traceless) moment-map components and renormalizes, so every iterate
is exactly ``scale * (g, h) . C`` for the original tuple ``C``. The step is the
gradient direction of ``|m_q|^2 + |m_p|^2`` on the unit sphere, which weights the
p-side by 2 relative to the q-side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .core import SkewTuple, act_raw
from .derivations import DerivationBasis
from .geometry import SolitonCertificate, pullback_metric, soliton_defect
from .kernel import to_float

DEFAULT_FLOW_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
HISTORY_KEEP = 100


class FlowNotCertifiedError(RuntimeError):
    pass


def moment_map(C: SkewTuple) -> tuple[np.ndarray, np.ndarray]:
    return moment_map_raw(to_float(C.mats))


def moment_map_raw(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p, q = mats.shape[0], mats.shape[1]
    norm2 = float(np.sum(mats * mats))
    if norm2 == 0.0:
        raise ValueError("moment map undefined at the zero tuple")
    S = np.einsum("aij,akj->ik", mats, mats)
    flat = mats.reshape(p, -1)
    G = flat @ flat.T
    mq = S - (norm2 / q) * np.eye(q)
    mp = G - (norm2 / p) * np.eye(p)
    return 0.5 * (mq + mq.T), 0.5 * (mp + mp.T)


def _moment_norm(mats: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    mq, mp = moment_map_raw(mats)
    return float(np.sqrt(np.sum(mq * mq) + np.sum(mp * mp))), mq, mp


def _expm_sym(A: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(A)
    return (V * np.exp(w)) @ V.T


def _unimodular(g: np.ndarray) -> np.ndarray:
    det = np.linalg.det(g)
    return g / det ** (1.0 / g.shape[0])


@dataclass(frozen=True, eq=False)
class FlowResult:
    C_original: SkewTuple
    C_final: SkewTuple
    g_acc: np.ndarray
    h_acc: np.ndarray
    scale: float
    iterations: int
    moment_norm_history: list[float] = field(repr=False)
    status: Literal["closed_certified", "inconclusive"]
    final_moment_norm: float

    @property
    def certified(self) -> bool:
        return self.status == "closed_certified"

    def orbit_residual(self) -> float:
        """Relative gap between C_final and scale * (g_acc, h_acc) . C_original."""
        rebuilt = self.scale * act_raw(self.g_acc, self.h_acc, to_float(self.C_original.mats))
        return float(np.linalg.norm(rebuilt - self.C_final.mats) / np.linalg.norm(self.C_final.mats))

    def to_json(self, keep: int = HISTORY_KEEP) -> dict:
        hist = self.moment_norm_history
        return {
            "status": self.status,
            "iterations": self.iterations,
            "final_moment_norm": self.final_moment_norm,
            "scale": self.scale,
            "g_acc": self.g_acc.tolist(),
            "h_acc": self.h_acc.tolist(),
            "C_final": self.C_final.mats.tolist(),
            "history_len": len(hist),
            "history_head": hist[:keep],
            "history_tail": hist[-keep:] if len(hist) > keep else [],
            "history_min": min(hist),
        }


def minimal_vector_flow(
    C: SkewTuple,
    step: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_FLOW_TOL,
) -> FlowResult:
    """Descend the moment-map norm along the SL(q) x SL(p) orbit of the ray through C.

    Stops with ``closed_certified`` once the moment norm of the unit-norm iterate is
    below ``tol``; otherwise ``inconclusive`` after ``max_iter`` iterations. The
    step starts at ``0.1 / (1 + |m(C0)|)`` unless given, is halved on every
    rejected step and doubled (capped at its start value) after 10 accepted steps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    p, q = C.p, C.q
    C0 = to_float(C.mats)
    g, h = np.eye(q), np.eye(p)
    scale = 1.0 / np.linalg.norm(C0)
    cur = C0 * scale
    norm, mq, mp = _moment_norm(cur)
    history = [norm]
    eta0 = 0.1 / (1.0 + norm) if step is None else float(step)
    if eta0 <= 0:
        raise ValueError("step must be positive")
    eta = eta0
    streak = 0
    it = 0
    while norm >= tol and it < max_iter:
        it += 1
        g_new = _unimodular(_expm_sym(-eta * mq) @ g)
        h_new = _unimodular(_expm_sym(-2.0 * eta * mp) @ h)
        raw = act_raw(g_new, h_new, C0)
        s_new = 1.0 / np.linalg.norm(raw)
        cand = raw * s_new
        new_norm, new_mq, new_mp = _moment_norm(cand)
        if new_norm < norm:
            g, h, scale, cur = g_new, h_new, s_new, cand
            norm, mq, mp = new_norm, new_mq, new_mp
            history.append(norm)
            streak += 1
            if streak >= 10:
                eta = min(2.0 * eta, eta0)
                streak = 0
        else:
            eta *= 0.5
            streak = 0
            if eta < 1e-300:
                break
    # exact skewness for the stored iterate
    cur = 0.5 * (cur - np.transpose(cur, (0, 2, 1)))
    status = "closed_certified" if norm < tol else "inconclusive"
    return FlowResult(
        C_original=C,
        C_final=SkewTuple(p, q, cur, "float"),
        g_acc=g,
        h_acc=h,
        scale=float(scale),
        iterations=it,
        moment_norm_history=history,
        status=status,
        final_moment_norm=norm,
    )


def certify_and_extract(C_original: SkewTuple, f: FlowResult, a, der: DerivationBasis) -> SolitonCertificate:
    """Soliton certificate on the original algebra from a certified flow.

    The metric is pulled back along (g_acc, scale * h_acc), which carries C_original
    to C_final exactly.
    """
    if not f.certified:
        raise FlowNotCertifiedError("flow did not certify a closed orbit; refusing to extract a soliton metric")
    m = pullback_metric(f.g_acc, f.scale * f.h_acc)
    return soliton_defect(a, m, der)
