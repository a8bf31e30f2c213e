"""Regenerate the committed test fixtures.

The lung-style fixture mimics the public Veterans' Administration lung
cancer study layout (137 rows; four cell-type strata; Karnofsky
performance score as the continuous predictor; age, months since
diagnosis, prior-therapy and treatment-arm adjusters) with a seeded
generator, since the original table is not redistributable from this
environment.  Higher Karnofsky scores are generated to carry lower
hazard, so a correct stratified fit must recover a negative coefficient.

Usage: python scripts/make_fixtures.py [out_dir]
"""
from __future__ import annotations

import csv
import sys
from pathlib import Path

import numpy as np

CELL_TYPES = ("squamous", "smallcell", "adeno", "large")
CELL_COUNTS = (35, 48, 27, 27)
BASE_RATE = {"squamous": 0.006, "smallcell": 0.014, "adeno": 0.016, "large": 0.008}


def make_lung_style(seed: int = 20240811):
    rng = np.random.default_rng(seed)
    rows = []
    for cell, count in zip(CELL_TYPES, CELL_COUNTS):
        for _ in range(count):
            karno = float(rng.integers(1, 10) * 10 + rng.integers(0, 10))
            age = float(rng.integers(35, 82))
            diagtime = float(rng.integers(1, 30))
            prior = "yes" if rng.random() < 0.3 else "no"
            trt = "test" if rng.random() < 0.5 else "standard"
            lp = (
                -0.032 * (karno - 60.0)
                + 0.008 * (age - 60.0)
                + (0.15 if prior == "yes" else 0.0)
                + (0.10 if trt == "test" else 0.0)
            )
            rate = BASE_RATE[cell] * np.exp(lp)
            t = rng.exponential(1.0 / rate)
            admin = rng.uniform(500.0, 1000.0)
            status = 1 if t <= admin else 0
            time = min(t, admin)
            rows.append(
                {
                    "time": max(1, round(time)),
                    "status": status,
                    "karno": int(karno),
                    "age": int(age),
                    "diagtime": int(diagtime),
                    "prior": prior,
                    "trt": trt,
                    "celltype": cell,
                }
            )
    return rows


def write_csv(rows, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("tests/fixtures")
    write_csv(make_lung_style(), out / "lung_style.csv")
