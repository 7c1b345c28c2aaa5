"""Genericity survey over every type (p, q) with 2 <= q <= Q_MAX.

Appends one CSV row per type and prints a short table. Usage:

    python scripts/survey_grid.py --qmax 5 --samples 20 --csv results/survey.csv
"""

import argparse
import csv
from pathlib import Path

from nilsoliton.core import dim_so
from nilsoliton.experiments import SURVEY_CSV_COLUMNS, SURVEY_CSV_VERSION, RunConfig, survey, survey_csv_row


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--qmax", type=int, default=5)
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--max-iter", type=int, default=20_000)
    ap.add_argument("--csv", default="results/survey_grid.csv")
    args = ap.parse_args()

    path = Path(args.csv)
    path.parent.mkdir(parents=True, exist_ok=True)
    cfg = RunConfig(max_iter=args.max_iter)
    with path.open("w", newline="") as fh:
        fh.write(f"# {SURVEY_CSV_VERSION}\n")
        writer = csv.DictWriter(fh, fieldnames=SURVEY_CSV_COLUMNS)
        writer.writeheader()
        for q in range(2, args.qmax + 1):
            for p in range(1, dim_so(q) + 1):
                rep = survey(p, q, args.samples, args.seed, cfg, args.workers)
                writer.writerow(survey_csv_row(rep))
                fh.flush()
                flag = "exc" if rep["exceptional"] else "   "
                print(
                    f"({p:2d},{q:2d}) {flag}  minimal {rep['frac_minimal_der']:.2f}  "
                    f"closed {rep['frac_closed_certified']:.2f}  soliton {rep['frac_soliton_certified']:.2f}  "
                    f"der {rep['der_dim_histogram']}"
                )


if __name__ == "__main__":
    main()
