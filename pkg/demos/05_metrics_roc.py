#!/usr/bin/env python3
"""Walkthrough: the evaluation-metric suite on a synthetic scored set.

Builds an imbalanced scored set (mirroring 1,000 positives vs 3,000
negatives), then reports the quantities the experiment tables use:
precision/recall/F1 at threshold 0.5, AUC, McClish-standardized partial
AUC with the 1% FPR ceiling, and TPR at FPR caps. Saves the ROC to
/tmp/demo_roc.png when matplotlib is available.
"""

import numpy as np

from lexidga.metrics import auc, compute_report, partial_auc_std, roc, tpr_at_fpr

rng = np.random.default_rng(7)
pos_scores = np.clip(rng.normal(0.75, 0.18, 1000), 0, 1)
neg_scores = np.clip(rng.normal(0.25, 0.15, 3000), 0, 1)
scores = np.concatenate([pos_scores, neg_scores])
labels = np.concatenate([np.ones(1000, dtype=int), np.zeros(3000, dtype=int)])

report = compute_report(scores, labels, threshold=0.5)
print(f"precision          {report.precision:.4f}")
print(f"recall (TPR)       {report.recall:.4f}")
print(f"F1                 {report.f1:.4f}")
print(f"AUC                {report.auc:.4f}")
print(f"partial AUC (1%)   {report.partial_auc_std:.4f}   (0.5 = chance, 1.0 = perfect)")
print(f"TPR @ FPR<=1%      {report.tpr_at_fpr_01:.4f}")
print(f"TPR @ FPR<=0.1%    {report.tpr_at_fpr_001:.4f}")

# AUC really is the pairwise ranking probability
sample_pairs = rng.integers(0, 1000, 20000), rng.integers(0, 3000, 20000)
mc = np.mean(pos_scores[sample_pairs[0]] > neg_scores[sample_pairs[1]])
print(f"\nMonte-Carlo P(pos > neg) ~= {mc:.4f} vs auc() = {auc(scores, labels):.4f}")

curve = roc(scores, labels)
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(curve.fpr, curve.tpr, lw=1.5)
    ax.plot([0, 1], [0, 1], "k--", lw=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title("demo ROC")
    fig.tight_layout()
    fig.savefig("/tmp/demo_roc.png", dpi=120)
    print("ROC plot saved to /tmp/demo_roc.png")
except ImportError:
    print(f"(matplotlib not installed; ROC has {len(curve.fpr)} points)")
