#!/usr/bin/env python3
"""Walkthrough: the four bundled wordlist-DGA family generators.

Each family draws words from its own list with a portable splitmix64
stream, so the same (family, seed, count) always yields the same
domains on any platform.
"""

from lexidga.dga import default_family_specs, generate
from lexidga.segment import RankedLexicon, segment

specs = default_family_specs()

for name, spec in specs.items():
    examples = generate(spec, seed=2024, count=5)
    print(f"== {name}: {len(spec.wordlist)} words, "
          f"{spec.words_min}-{spec.words_max} per domain, "
          f"len {spec.min_len}-{spec.max_len} ==")
    lex = RankedLexicon.from_words(spec.wordlist)
    for ex in examples:
        tokens = segment(ex.domain.core, lex).tokens
        print(f"  {ex.domain.raw:32s} -> {' + '.join(tokens)}")
    print()

again = generate(specs["matsnu"], seed=2024, count=5)
first = generate(specs["matsnu"], seed=2024, count=5)
print("determinism:", "ok" if again == first else "BROKEN")
