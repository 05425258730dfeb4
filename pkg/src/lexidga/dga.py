"""Seed-deterministic generators for wordlist-concatenation DGA families.

Each family is a parameterized spec: draw k words from the family wordlist,
join, keep the result if it satisfies the length bounds, and append a TLD
from the family pool.  The bundled presets (matsnu, rovnix, pizd, suppobox)
capture the statistical character of the four families; replace the
wordlists through the preset file to mimic other variants.

All randomness comes from splitmix64 so datasets are reproducible
bit-for-bit across platforms and languages.
"""

from __future__ import annotations

import configparser
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .preprocess import Domain, SuffixSet, PreprocessError, normalize

__all__ = [
    "SplitMix64",
    "DgaFamilySpec",
    "LabeledExample",
    "GenerationError",
    "Unsatisfiable",
    "NotEnoughDomains",
    "generate",
    "load_benign",
    "load_family_specs",
    "default_family_specs",
]

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


class GenerationError(RuntimeError):
    pass


class Unsatisfiable(GenerationError):
    """The retry budget ran out before `count` distinct domains appeared."""


class NotEnoughDomains(GenerationError):
    pass


class SplitMix64:
    """Portable 64-bit PRNG (splitmix64).

    Update function, all arithmetic mod 2^64:

        state += 0x9E3779B97F4A7C15
        z = state
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        output = z ^ (z >> 31)

    Bounded draws use ``output % n``; any implementation following these
    two rules reproduces the exact same streams.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next_u64() % n


@dataclass(frozen=True)
class DgaFamilySpec:
    name: str
    wordlist: tuple[str, ...]
    words_min: int
    words_max: int
    min_len: int
    max_len: int
    joiner: str
    tld_pool: tuple[str, ...]
    domains_per_seed: int = 50

    def __post_init__(self):
        if not self.wordlist:
            raise ValueError(f"{self.name}: empty wordlist")
        if self.words_min < 2 or self.words_min > self.words_max:
            raise ValueError(f"{self.name}: bad words-per-domain range")
        if self.min_len > self.max_len:
            raise ValueError(f"{self.name}: min_len > max_len")
        if not self.tld_pool:
            raise ValueError(f"{self.name}: empty tld_pool")


@dataclass(frozen=True)
class LabeledExample:
    domain: Domain
    label: str  # "benign" or "dga"
    family: str | None = None

    def __post_init__(self):
        if (self.label == "dga") != (self.family is not None):
            raise ValueError("family must be present exactly for dga labels")


def generate(spec: DgaFamilySpec, seed: int, count: int) -> list[LabeledExample]:
    """Produce exactly ``count`` distinct domains for one family.

    The stream is chunked every ``domains_per_seed`` accepted domains
    (mirroring date-seeded batches): a master splitmix64 stream seeded
    with ``seed`` yields one sub-seed per chunk.  Candidates failing the
    length bounds or duplicating an earlier domain are rejected and
    retried; the budget is 10,000 consecutive rejections.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    master = SplitMix64(seed)
    rng = SplitMix64(master.next_u64())
    out: list[LabeledExample] = []
    seen: set[str] = set()
    rejects = 0
    while len(out) < count:
        if rejects >= 10_000:
            raise Unsatisfiable(
                f"{spec.name}: only {len(out)} of {count} domains "
                f"satisfiable under length/distinctness constraints"
            )
        k = spec.words_min + rng.below(spec.words_max - spec.words_min + 1)
        words = [spec.wordlist[rng.below(len(spec.wordlist))] for _ in range(k)]
        name = spec.joiner.join(words)
        if not spec.min_len <= len(name) <= spec.max_len:
            rejects += 1
            continue
        tld = spec.tld_pool[rng.below(len(spec.tld_pool))]
        raw = f"{name}.{tld}"
        if raw in seen:
            rejects += 1
            continue
        rejects = 0
        seen.add(raw)
        out.append(
            LabeledExample(Domain(raw=raw, core=name), label="dga", family=spec.name)
        )
        if len(out) % spec.domains_per_seed == 0:
            rng = SplitMix64(master.next_u64())
    return out


def load_benign(path, count: int, suffixes: SuffixSet | None = None) -> list[LabeledExample]:
    """First ``count`` valid hostnames from a newline-delimited file.

    Blank lines and ``#`` comments are ignored; lines that fail hostname
    normalization are skipped and counted.  Raises NotEnoughDomains if the
    file runs out first.
    """
    out: list[LabeledExample] = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if len(out) >= count:
                break
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                dom = normalize(line, suffixes)
            except PreprocessError:
                skipped += 1
                continue
            out.append(LabeledExample(dom, label="benign"))
    if skipped:
        logger.info("load_benign: skipped %d invalid lines in %s", skipped, path)
    if len(out) < count:
        raise NotEnoughDomains(f"{path}: {len(out)} valid domains, wanted {count}")
    return out


def _parse_spec(name: str, section, base: Path) -> DgaFamilySpec:
    wordlist_path = base / section["wordlist"]
    with open(wordlist_path, encoding="utf-8") as fh:
        words = tuple(w.strip() for w in fh if w.strip() and not w.startswith("#"))
    tlds = tuple(t.strip() for t in section["tld_pool"].split(",") if t.strip())
    return DgaFamilySpec(
        name=name,
        wordlist=words,
        words_min=section.getint("words_min"),
        words_max=section.getint("words_max"),
        min_len=section.getint("min_len"),
        max_len=section.getint("max_len"),
        joiner=section.get("joiner", "").strip(),
        tld_pool=tlds,
        domains_per_seed=section.getint("domains_per_seed", 50),
    )


def load_family_specs(path) -> dict[str, DgaFamilySpec]:
    """Parse a preset file (INI sections, key=value) into family specs."""
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    base = Path(path).parent
    return {name: _parse_spec(name, parser[name], base) for name in parser.sections()}


def default_family_specs() -> dict[str, DgaFamilySpec]:
    ref = resources.files("lexidga.data").joinpath("presets.ini")
    with resources.as_file(ref) as path:
        return load_family_specs(path)
