#!/usr/bin/env python3
"""Walkthrough: a desk-scale single-DGA experiment.

Runs the single-DGA design for one family over a few observation counts
with the benign pool scaled to one tenth (1,400/300/300 train/val/test)
and prints the table row per count. The full-size design (all families,
counts 30..960, 14,000-benign pool) is the same call with scale 1.0 and
a 20,000-domain benign list.
"""

import time

from lexidga.experiment import ExperimentConfig, run_single_dga
from lexidga.metrics import REPORT_COLUMNS

cfg = ExperimentConfig(
    observation_counts=(30, 60, 120, 240),
    benign_scale=0.1,
    seed=1,
)

t0 = time.perf_counter()
result = run_single_dga(cfg, "suppobox")
elapsed = time.perf_counter() - t0

print(",".join(REPORT_COLUMNS))
for row in result.rows:
    print(",".join(str(v) for v in row))
print(f"\n4 models trained and evaluated in {elapsed:.1f}s")
print("run.log lines:")
for line in result.log_lines[:5]:
    print(" ", line)
