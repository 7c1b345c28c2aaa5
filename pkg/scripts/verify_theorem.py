"""Run the full (4,5) verification and write the report to results/verify_45.json."""

import json
import sys
import time
from pathlib import Path

from nilsoliton.experiments import verify_counterexample

if __name__ == "__main__":
    samples = int(sys.argv[1]) if len(sys.argv) > 1 else 100
    out = Path("results/verify_45.json")
    out.parent.mkdir(exist_ok=True)
    t0 = time.perf_counter()
    rep = verify_counterexample(samples=samples, seed=42)
    elapsed = time.perf_counter() - t0
    out.write_text(json.dumps(rep, indent=2) + "\n")
    res = [r["soliton_residual"] for r in rep["records"] if r["soliton_residual"] is not None]
    its = [r["iterations"] for r in rep["records"]]
    print(f"overall {rep['overall']}: {rep['passed_samples']}/{rep['samples']} float, "
          f"{rep['passed_exact_samples']}/{rep['exact_samples']} exact, {elapsed:.0f}s")
    print(f"soliton residual max {max(res):.2e}; flow iterations {min(its)}..{max(its)}")
    sys.exit(0 if rep["overall"] == "pass" else 1)
