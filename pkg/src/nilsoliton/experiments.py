"""Seeded batch runs: per-tuple analysis, genericity surveys and the (4,5) verification."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .core import SkewTuple, build_algebra, classify_type, sample_tuple
from .derivations import check_ideal_structure, derivation_algebra, leibniz_residual
from .fileio import tuple_to_json
from .flow import DEFAULT_FLOW_TOL, DEFAULT_MAX_ITER, certify_and_extract, minimal_vector_flow
from .kernel import DEFAULT_RANK_TOL
from .stabilizers import correspondence_check, lemma_check, stabilizer

SOLITON_TOL = 1e-6
MOMENT_TOL = 1e-8
PROPORTIONALITY_TOL = 1e-7
DET_TOL = 1e-9
ORBIT_TOL = 1e-8
LEIBNIZ_TOL = 1e-9
SURVEY_CSV_COLUMNS = (
    "p",
    "q",
    "exceptional",
    "samples",
    "seed",
    "frac_minimal_der",
    "frac_closed_certified",
    "frac_soliton_certified",
    "der_dim_histogram",
    "mean_flow_iterations",
)
SURVEY_CSV_VERSION = "survey-csv-v1"


def sample_seed(base_seed: int, index: int, stream: str = "") -> int:
    """Stable 64-bit seed for sample ``index`` of a run with ``base_seed``."""
    digest = hashlib.blake2b(f"{stream}:{base_seed}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("NILSOLITON_WORKERS", "1"))
    return max(1, workers)


def _map(fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


@dataclass(frozen=True)
class RunConfig:
    tol: float = DEFAULT_RANK_TOL
    flow_tol: float = DEFAULT_FLOW_TOL
    max_iter: int = DEFAULT_MAX_ITER
    ideal_trials: int = 5


# -- single tuple ------------------------------------------------------------


def analyze_tuple(C: SkewTuple, tol: float = DEFAULT_RANK_TOL, exact: bool = False, ideal_seed: int = 0) -> dict:
    """Derivation and stabilizer summary for one tuple (float mode, plus exact if asked)."""
    Cf = C.to_float()
    a = build_algebra(Cf)
    der = derivation_algebra(a, "float", tol)
    stab = stabilizer(Cf, "float", tol)
    ideal = check_ideal_structure(der, seed=ideal_seed)
    out = {
        "p": C.p,
        "q": C.q,
        "type": asdict(classify_type(C.p, C.q)),
        "der_dim": der.dim,
        "vz_dim": der.vz_part.rank,
        "blockdiag_dim": der.blockdiag_part.rank,
        "split_ok": der.split_ok,
        "minimal": der.minimal,
        "gl_dim": stab.gl_dim,
        "sl_dim": stab.sl_dim,
        "contains_D_line": bool(stab.contains_D_line),
        "correspondence_ok": correspondence_check(Cf, a, stab=stab, der=der),
        "ideal": ideal,
        "tol": tol,
    }
    if exact:
        out["exact"] = exact_dims(C)
        out["modes_agree"] = all(out["exact"][k] == out[k] for k in ("der_dim", "gl_dim", "sl_dim"))
    return out


def exact_dims(C: SkewTuple) -> dict:
    if C.mode != "rational":
        C = SkewTuple.from_matrices(C.mats, "rational")
    a = build_algebra(C)
    der = derivation_algebra(a, "rational")
    stab = stabilizer(C, "rational")
    return {
        "der_dim": der.dim,
        "minimal": der.minimal,
        "gl_dim": stab.gl_dim,
        "sl_dim": stab.sl_dim,
        "lemma_ok": lemma_check(C, True, stab=stab).verdict,
    }


def flow_checks(f, cert=None) -> dict:
    """Contract checks on a flow result (and its certificate, if any)."""
    hist = np.asarray(f.moment_norm_history)
    mats = f.C_final.mats
    p, q = f.C_final.p, f.C_final.q
    norm2 = float(np.sum(mats * mats))
    S = np.einsum("aij,akj->ik", mats, mats)
    flat = mats.reshape(p, -1)
    G = flat @ flat.T
    out = {
        "history_monotone": bool(np.all(np.diff(hist) <= 0)),
        "det_g_err": abs(float(np.linalg.det(f.g_acc)) - 1.0),
        "det_h_err": abs(float(np.linalg.det(f.h_acc)) - 1.0),
        "orbit_residual": f.orbit_residual(),
        "unit_norm_err": abs(np.sqrt(norm2) - 1.0),
        "proportionality_residual": max(
            float(np.abs(S - norm2 / q * np.eye(q)).max()), float(np.abs(G - norm2 / p * np.eye(p)).max())
        ),
    }
    if cert is not None:
        out["soliton_D_leibniz"] = leibniz_residual(build_algebra(f.C_original.to_float()), cert.D_matrix)
    return out


# -- survey ------------------------------------------------------------------


def _survey_one(task) -> dict:
    p, q, seed, cfg = task
    C = sample_tuple(p, q, seed)
    rec = {"seed": seed, "independent": C.independent}
    if not C.independent:
        rec.update(der_dim=None, minimal=False, flow_status="skipped", iterations=0, soliton=False)
        return rec
    a = build_algebra(C)
    der = derivation_algebra(a, "float", cfg.tol)
    f = minimal_vector_flow(C, max_iter=cfg.max_iter, tol=cfg.flow_tol)
    soliton = False
    residual = None
    if f.certified:
        cert = certify_and_extract(C, f, a, der)
        residual = cert.residual
        soliton = residual < SOLITON_TOL
    rec.update(
        der_dim=der.dim,
        minimal=der.minimal,
        flow_status=f.status,
        iterations=f.iterations,
        moment_norm=f.final_moment_norm,
        soliton_residual=residual,
        soliton=soliton,
        history_monotone=bool(np.all(np.diff(f.moment_norm_history) <= 0)),
    )
    return rec


def survey(p: int, q: int, samples: int, seed: int, cfg: RunConfig = RunConfig(), workers: int | None = None) -> dict:
    tc = classify_type(p, q)
    tasks = [(p, q, sample_seed(seed, i), cfg) for i in range(samples)]
    records = _map(_survey_one, tasks, resolve_workers(workers))
    hist: dict[str, int] = {}
    for r in records:
        key = str(r["der_dim"])
        hist[key] = hist.get(key, 0) + 1
    n = max(samples, 1)
    return {
        "p": p,
        "q": q,
        "exceptional": tc.exceptional,
        "type_reason": tc.reason,
        "samples": samples,
        "seed": seed,
        "frac_minimal_der": sum(r["minimal"] for r in records) / n,
        "frac_closed_certified": sum(r["flow_status"] == "closed_certified" for r in records) / n,
        "frac_soliton_certified": sum(r["soliton"] for r in records) / n,
        "der_dim_histogram": dict(sorted(hist.items(), key=lambda kv: (kv[0] == "None", kv[0].zfill(8)))),
        "mean_flow_iterations": sum(r["iterations"] for r in records) / n,
        "config": asdict(cfg),
        "records": records,
    }


def survey_csv_row(report: dict) -> dict:
    row = {k: report[k] for k in SURVEY_CSV_COLUMNS}
    row["der_dim_histogram"] = ";".join(f"{k}:{v}" for k, v in report["der_dim_histogram"].items())
    return row


# -- verification ------------------------------------------------------------


def _verify_one(task) -> dict:
    p, q, seed, cfg = task
    C = sample_tuple(p, q, seed)
    pq = p * q
    rec: dict = {"seed": seed}
    failures: list[str] = []
    if not C.independent:
        rec["failures"] = ["tuple not independent"]
        rec["passed"] = False
        rec["tuple"] = tuple_to_json(C)
        return rec
    a = build_algebra(C)
    der = derivation_algebra(a, "float", cfg.tol)
    stab = stabilizer(C, "float", cfg.tol)
    ideal = check_ideal_structure(der, trials=cfg.ideal_trials, seed=seed)
    f = minimal_vector_flow(C, max_iter=cfg.max_iter, tol=cfg.flow_tol)
    cert = certify_and_extract(C, f, a, der) if f.certified else None
    checks = flow_checks(f, cert)
    lemma = lemma_check(C, f.certified, stab=stab)
    n = a.n
    group_dim = der.dim + 1  # R^{>0} scaling plus Aut_0
    rec.update(
        der_dim=der.dim,
        minimal=der.minimal,
        split_ok=der.split_ok,
        gl_dim=stab.gl_dim,
        sl_dim=stab.sl_dim,
        correspondence_ok=correspondence_check(C, a, stab=stab, der=der),
        lemma_ok=lemma.verdict and not lemma.vacuous,
        ideal_ok=bool(ideal["subalg_ok"] and ideal["ideal_in_der_ok"] and ideal["ideal_in_borel_ok"]),
        ideal=ideal,
        flow_status=f.status,
        iterations=f.iterations,
        moment_norm=f.final_moment_norm,
        soliton_residual=None if cert is None else cert.residual,
        soliton_c=None if cert is None else cert.c,
        flow_checks=checks,
        group_dim=group_dim,
        symmetric_space_dim=n * (n + 1) // 2,
        block_triangular_dim=q * q + p * p + pq,
    )
    if f.certified:
        rec["der_dim_final"] = derivation_algebra(build_algebra(f.C_final), "float", cfg.tol).dim

    if der.dim != 1 + pq:
        failures.append(f"der_dim {der.dim} != {1 + pq}")
    if not der.minimal:
        failures.append("derivation algebra not minimal")
    if not der.split_ok:
        failures.append("block splitting of Der failed")
    if not f.certified or f.final_moment_norm >= MOMENT_TOL:
        failures.append(f"flow {f.status} with moment norm {f.final_moment_norm:.3e}")
    if cert is None or not cert.residual < SOLITON_TOL:
        failures.append("soliton residual not below threshold")
    elif checks["soliton_D_leibniz"] > LEIBNIZ_TOL:
        failures.append("fitted D is not a derivation")
    if stab.gl_dim != 1 or stab.sl_dim != 0:
        failures.append(f"stabilizer dims gl={stab.gl_dim} sl={stab.sl_dim}, expected 1 and 0")
    if lemma.vacuous:
        failures.append("lemma not applicable: orbit closedness not certified")
    elif not lemma.verdict:
        failures.append("lemma check failed")
    if not rec["correspondence_ok"]:
        failures.append("stabilizer/derivation correspondence failed")
    if not rec["ideal_ok"]:
        failures.append("ideal structure check failed")
    if not checks["history_monotone"]:
        failures.append("moment-norm history not monotone")
    if f.certified and checks["proportionality_residual"] > PROPORTIONALITY_TOL:
        failures.append("soliton conditions on C_final not met")
    if max(checks["det_g_err"], checks["det_h_err"]) > DET_TOL:
        failures.append("accumulated group factors not unimodular")
    if checks["orbit_residual"] > ORBIT_TOL:
        failures.append("C_final not reproduced from accumulated factors")
    if f.certified and rec.get("der_dim_final") != der.dim:
        failures.append("derivation dimension changed along the flow")
    if not group_dim < rec["symmetric_space_dim"]:
        failures.append("non-transitivity witness failed")
    rec["failures"] = failures
    rec["passed"] = not failures
    if failures:
        rec["tuple"] = tuple_to_json(C)
    return rec


def _exact_one(task) -> dict:
    p, q, seed, cfg = task
    C = sample_tuple(p, q, seed, "rational-lattice")
    rec: dict = {"seed": seed}
    if not C.independent:
        return {**rec, "passed": False, "failures": ["tuple not independent"], "tuple": tuple_to_json(C)}
    Cf = C.to_float()
    der_f = derivation_algebra(build_algebra(Cf), "float", cfg.tol)
    stab_f = stabilizer(Cf, "float", cfg.tol)
    ex = exact_dims(C)
    rec.update(
        float={"der_dim": der_f.dim, "gl_dim": stab_f.gl_dim, "sl_dim": stab_f.sl_dim},
        exact=ex,
    )
    failures = []
    for k in ("der_dim", "gl_dim", "sl_dim"):
        if rec["float"][k] != ex[k]:
            failures.append(f"{k} float {rec['float'][k]} != exact {ex[k]}")
    if ex["der_dim"] != 1 + p * q or not ex["minimal"]:
        failures.append("exact derivation algebra not minimal")
    if ex["gl_dim"] != 1 or ex["sl_dim"] != 0 or not ex["lemma_ok"]:
        failures.append(f"exact stabilizer dims gl={ex['gl_dim']} sl={ex['sl_dim']}")
    rec["failures"] = failures
    rec["passed"] = not failures
    if failures:
        rec["tuple"] = tuple_to_json(C)
    return rec


def verify_counterexample(
    samples: int = 100,
    seed: int = 42,
    p: int = 4,
    q: int = 5,
    exact_samples: int = 10,
    cfg: RunConfig = RunConfig(),
    workers: int | None = None,
) -> dict:
    """Run every mechanized check of the (4, 5) construction on seeded samples."""
    w = resolve_workers(workers)
    records = _map(_verify_one, [(p, q, sample_seed(seed, i), cfg) for i in range(samples)], w)
    exact = _map(_exact_one, [(p, q, sample_seed(seed, i, "exact"), cfg) for i in range(exact_samples)], w)
    n = p + q
    tc = classify_type(p, q)
    failures = [r for r in records if not r["passed"]] + [r for r in exact if not r["passed"]]
    return {
        "type": {"p": p, "q": q, "dim": n, "exceptional": tc.exceptional, "reason": tc.reason},
        "overall": "pass" if not failures else "fail",
        "samples": samples,
        "exact_samples": exact_samples,
        "passed_samples": sum(r["passed"] for r in records),
        "passed_exact_samples": sum(r["passed"] for r in exact),
        "config": {"seed": seed, **asdict(cfg), "soliton_tol": SOLITON_TOL, "moment_tol": MOMENT_TOL},
        "non_transitivity": {
            "group_dim": 1 + (1 + p * q),
            "symmetric_space_dim": n * (n + 1) // 2,
        },
        "records": records,
        "exact_records": exact,
        "failures": failures,
    }
