#!/usr/bin/env python3
"""Walkthrough: train a single-family detector and score domains inline.

Trains a small suppobox model at desk scale (benign pool scaled to
1,400/300/300) and runs the full normalize -> segment -> embed ->
classify pipeline on a few inputs. Takes ~15 s on a laptop CPU.
"""

import time

from lexidga.experiment import ExperimentConfig, train_model
from lexidga.model import forward
from lexidga.preprocess import default_suffixes, normalize
from lexidga.segment import default_lexicon, segment

cfg = ExperimentConfig(benign_scale=0.1, seed=3)
print("training suppobox model on 120 observations (96 train / 24 val)...")
t0 = time.perf_counter()
weights, val_roc, info = train_model(cfg, "suppobox", observations=120)
print(f"done in {time.perf_counter() - t0:.1f}s: epochs={info['epochs']}, "
      f"best epoch={info['best_epoch']}, val loss={info['val_loss']:.4f}")

suffixes = default_suffixes()
lexicon = default_lexicon()
provider = cfg.make_provider()

print(f"\n{'domain':30s} {'score':>7s}  verdict  tokens")
for raw in ["middleapple.net", "familycabinet.com", "wikipedia.org",
            "github.com", "buttonwhisper.net", "techcrunch.com"]:
    dom = normalize(raw, suffixes)
    tokens = segment(dom.core, lexicon).tokens
    score = forward(provider.embed_tokens(tokens), weights)
    verdict = "dga" if score >= 0.5 else "benign"
    print(f"{raw:30s} {score:7.4f}  {verdict:7s}  {','.join(tokens)}")
