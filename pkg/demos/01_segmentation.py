#!/usr/bin/env python3
"""Walkthrough: hostname normalization and unigram word segmentation.

A wordlist DGA produces domains like middleapple.net that look harmless
character-wise; the word-level view is what exposes them. This demo
shows the two preprocessing stages the classifier depends on.
"""

from lexidga.preprocess import default_suffixes, normalize
from lexidga.segment import default_lexicon, segment

suffixes = default_suffixes()
lexicon = default_lexicon()

print("== suffix stripping ==")
for raw in ["middleapple.net", "dhlpcscshdrvpcpp.com", "shop.example.co.uk",
            "data-hub7.io", "mail.middleapple.net"]:
    dom = normalize(raw, suffixes)
    print(f"{raw:28s} -> core {dom.core!r}")

print("\n== word segmentation (Zipfian unigram DP) ==")
for core in ["middleapple", "sunshinefarmhouse", "dhlpcscshdrvpcpp",
             "cloudkitchen7", "data-stream42", "firesidestaircase"]:
    seq = segment(core, lexicon)
    print(f"{core:24s} -> {' | '.join(seq.tokens):34s} cost={seq.total_cost:.2f}")

print("\nNote how the random-looking ramnit-style string collapses into a")
print("single out-of-vocabulary token while dictionary concatenations split")
print("cleanly; the per-token costs come from ln((rank+1) * ln(N)).")
