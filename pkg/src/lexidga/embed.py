"""Frozen embedding providers: mean-pooled vectors per token sequence.

Two providers share one interface.  The cache provider serves pooled
sequence vectors exported offline from a real pretrained model; the
hash-ngram provider is a deterministic stand-in that needs no model
download: each token hashes to a unit vector derived from its character
3-grams and from the multiset of co-occurring tokens, so the same word
still embeds differently in different contexts.

Nothing here is trainable.  Providers never change after construction,
and `state_fingerprint` exists so that freeze can be asserted around
classifier training.
"""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_DIMENSION",
    "EmbeddingError",
    "CacheMiss",
    "BadMagic",
    "DimensionMismatch",
    "TruncatedFile",
    "hash_token",
    "HashNgramProvider",
    "EmbeddingCache",
    "CacheProvider",
    "FallbackProvider",
    "embed",
    "load_cache",
    "save_cache",
    "CACHE_MAGIC",
]

DEFAULT_DIMENSION = 1024
DEFAULT_HASH_SEED = 0x1D6A
CACHE_MAGIC = b"LDGAEMB1"


class EmbeddingError(RuntimeError):
    pass


class CacheMiss(EmbeddingError, KeyError):
    pass


class BadMagic(EmbeddingError):
    pass


class DimensionMismatch(EmbeddingError):
    pass


class TruncatedFile(EmbeddingError):
    pass


@lru_cache(maxsize=32768)
def _feature_vector(feature: str, dimension: int, seed: int) -> np.ndarray:
    """Deterministic pseudorandom direction for one hashed feature."""
    digest = hashlib.blake2b(
        feature.encode("utf-8"), digest_size=16, salt=seed.to_bytes(8, "little")
    ).digest()
    gen = np.random.Generator(np.random.Philox(key=int.from_bytes(digest, "little")))
    vec = gen.standard_normal(dimension, dtype=np.float32)
    vec.flags.writeable = False
    return vec


def hash_token(
    token: str,
    context: tuple[str, ...] | list[str],
    dimension: int = DEFAULT_DIMENSION,
    seed: int = DEFAULT_HASH_SEED,
) -> np.ndarray:
    """Unit-norm vector for ``token`` as it appears among ``context`` tokens.

    Features are (a) boundary-padded character 3-grams of the token and
    (b) one co-occurrence feature per context token, with multiplicity.
    Their hashed directions are summed and the sum scaled to unit norm,
    so identical (token, context) pairs are bit-identical while the same
    token in a different context lands elsewhere on the sphere.
    """
    if not token:
        raise ValueError("token must be non-empty")
    acc = np.zeros(dimension, dtype=np.float64)
    padded = f"^{token}$"
    for i in range(len(padded) - 2):
        acc += _feature_vector("g:" + padded[i : i + 3], dimension, seed)
    counts: dict[str, int] = {}
    for other in context:
        counts[other] = counts.get(other, 0) + 1
    for other, n in counts.items():
        acc += n * _feature_vector("c:" + other, dimension, seed)
    norm = float(np.linalg.norm(acc))
    if norm == 0.0:  # unreachable with gaussian features; keep total anyway
        acc = _feature_vector("t:" + token, dimension, seed).astype(np.float64)
        norm = float(np.linalg.norm(acc))
    return acc / norm


class HashNgramProvider:
    """Deterministic n-gram/co-occurrence embedding, kind "hash-ngram"."""

    kind = "hash-ngram"

    def __init__(self, dimension: int = DEFAULT_DIMENSION, seed: int = DEFAULT_HASH_SEED):
        self.dimension = dimension
        self.seed = seed

    def embed_tokens(self, tokens) -> np.ndarray:
        tokens = tuple(tokens)
        if not tokens:
            raise ValueError("tokens must be non-empty")
        acc = np.zeros(self.dimension, dtype=np.float64)
        for tok in tokens:
            acc += hash_token(tok, tokens, self.dimension, self.seed)
        return acc / len(tokens)

    def state_fingerprint(self) -> str:
        blob = f"{self.kind}:{self.dimension}:{self.seed}".encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class EmbeddingCache:
    """Exact-match store of pooled sequence vectors, keyed by the tokens
    joined with single spaces."""

    dimension: int
    entries: dict[str, np.ndarray] = field(default_factory=dict)
    provenance: str = ""

    def lookup(self, key: str) -> np.ndarray:
        try:
            return self.entries[key]
        except KeyError:
            raise CacheMiss(key) from None

    def __len__(self) -> int:
        return len(self.entries)


class CacheProvider:
    """Serves pre-exported pooled vectors verbatim, kind "cache"."""

    kind = "cache"

    def __init__(self, cache: EmbeddingCache):
        self.cache = cache
        self.dimension = cache.dimension

    def embed_tokens(self, tokens) -> np.ndarray:
        return self.cache.lookup(" ".join(tokens))

    def state_fingerprint(self) -> str:
        h = hashlib.sha256(f"{self.kind}:{self.dimension}".encode())
        for key in sorted(self.cache.entries):
            h.update(key.encode("utf-8"))
            h.update(np.asarray(self.cache.entries[key], dtype=np.float32).tobytes())
        return h.hexdigest()


class FallbackProvider:
    """Cache lookups with hash-ngram fallback on miss (serving policy).

    Training code should use the bare CacheProvider and fail fast; inline
    classification prefers availability, so misses fall through to the
    hash provider and are counted.
    """

    kind = "cache+hash"

    def __init__(self, primary: CacheProvider, fallback: HashNgramProvider):
        if primary.dimension != fallback.dimension:
            raise DimensionMismatch(
                f"cache dimension {primary.dimension} != hash dimension {fallback.dimension}"
            )
        self.primary = primary
        self.fallback = fallback
        self.dimension = primary.dimension
        self.misses = 0

    def embed_tokens(self, tokens) -> np.ndarray:
        try:
            return self.primary.embed_tokens(tokens)
        except CacheMiss:
            self.misses += 1
            logger.warning("cache miss for %r; serving from hash provider",
                           " ".join(tokens))
            return self.fallback.embed_tokens(tokens)

    def state_fingerprint(self) -> str:
        blob = (self.primary.state_fingerprint() + self.fallback.state_fingerprint()).encode()
        return hashlib.sha256(blob).hexdigest()


def embed(tokens, provider) -> np.ndarray:
    """Pooled vector for one token sequence under any provider."""
    return provider.embed_tokens(tokens)


def save_cache(cache: EmbeddingCache, path) -> None:
    """Write the LDGAEMB1 binary format (little-endian).

    Layout: magic (8 bytes), u32 dimension, u64 entry count, then per
    entry u32 key byte-length, UTF-8 key, dimension f32 values.
    """
    validated = []
    for key, vec in cache.entries.items():
        vec = np.asarray(vec, dtype=np.float32)
        if vec.shape != (cache.dimension,):
            raise DimensionMismatch(
                f"entry {key!r} has length {vec.size}, expected {cache.dimension}"
            )
        validated.append((key.encode("utf-8"), vec))
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<IQ", cache.dimension, len(validated)))
        for raw, vec in validated:
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(vec.tobytes())


def load_cache(path, expect_dimension: int | None = None) -> EmbeddingCache:
    """Read an LDGAEMB1 file; validates header, framing, and dimension."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8 or data[:8] != CACHE_MAGIC:
        raise BadMagic(f"{path}: not an embedding cache")
    if len(data) < 20:
        raise TruncatedFile(f"{path}: header cut short")
    dimension, count = struct.unpack_from("<IQ", data, 8)
    if dimension == 0:
        raise DimensionMismatch(f"{path}: dimension 0 in header")
    if expect_dimension is not None and dimension != expect_dimension:
        raise DimensionMismatch(
            f"{path}: cache dimension {dimension}, expected {expect_dimension}"
        )
    entries: dict[str, np.ndarray] = {}
    offset = 20
    vec_bytes = 4 * dimension
    for _ in range(count):
        if offset + 4 > len(data):
            raise TruncatedFile(f"{path}: entry header past end of file")
        (key_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if offset + key_len + vec_bytes > len(data):
            raise TruncatedFile(f"{path}: entry data past end of file")
        key = data[offset : offset + key_len].decode("utf-8")
        offset += key_len
        vec = np.frombuffer(data[offset : offset + vec_bytes], dtype="<f4").copy()
        offset += vec_bytes
        entries[key] = vec
    if offset != len(data):
        raise TruncatedFile(f"{path}: {len(data) - offset} trailing bytes")
    return EmbeddingCache(dimension=dimension, entries=entries, provenance=str(path))
