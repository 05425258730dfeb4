#!/usr/bin/env python3
"""Walkthrough: frozen embedding providers.

The hash-ngram provider needs no model download: tokens map to unit
vectors built from hashed character 3-grams plus co-occurrence features,
so a word embeds differently depending on its neighbors (the polyseme
property that motivates contextual embeddings), and the whole domain is
the mean of its token vectors.
"""

import numpy as np

from lexidga.embed import EmbeddingCache, HashNgramProvider, hash_token, save_cache, load_cache

provider = HashNgramProvider(dimension=1024)

bow_arrow = hash_token("bow", ("bow", "arrow"), provider.dimension, provider.seed)
bow_crowd = hash_token("bow", ("bow", "audience"), provider.dimension, provider.seed)
print(f"'bow' with 'arrow' vs with 'audience': cosine = "
      f"{float(bow_arrow @ bow_crowd):.3f}  (same word, different context)")
print(f"unit norms: {np.linalg.norm(bow_arrow):.9f}, {np.linalg.norm(bow_crowd):.9f}")

tokens = ("middle", "apple")
pooled = provider.embed_tokens(tokens)
manual = (hash_token("middle", tokens, 1024, provider.seed)
          + hash_token("apple", tokens, 1024, provider.seed)) / 2
print(f"mean-pooling check: max |diff| = {np.abs(pooled - manual).max():.2e}")

print(f"provider fingerprint (frozen): {provider.state_fingerprint()[:16]}...")

# the cache provider round-trips pre-exported pooled vectors bit-for-bit
cache = EmbeddingCache(dimension=1024, entries={" ".join(tokens): pooled.astype(np.float32)})
save_cache(cache, "/tmp/demo_cache.bin")
loaded = load_cache("/tmp/demo_cache.bin")
entry = loaded.entries["middle apple"]
print(f"cache round-trip: {len(loaded)} entry, bit-identical = "
      f"{entry.tobytes() == pooled.astype(np.float32).tobytes()}")
