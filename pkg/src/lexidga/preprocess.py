"""Hostname normalization: lowercase, validate, strip the public suffix.

The classifier never sees the registry-controlled tail of a domain, so
"middleapple.net" and "middleapple.biz" map to the same core string
"middleapple".  Suffix matching follows a Public-Suffix-List-compatible
subset: longest match over whole labels, with ``*.`` wildcard and ``!``
exception rules.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

__all__ = [
    "Domain",
    "SuffixSet",
    "PreprocessError",
    "InvalidHostname",
    "EmptyCore",
    "load_suffixes",
    "default_suffixes",
    "normalize",
]


class PreprocessError(ValueError):
    pass


class InvalidHostname(PreprocessError):
    """Input is not a syntactically plausible hostname."""


class EmptyCore(PreprocessError):
    """Nothing remains once the public suffix is removed (e.g. "co.uk")."""


@dataclass(frozen=True)
class Domain:
    """A raw domain plus its suffix-stripped core.

    ``core`` is the non-suffix labels lowercased and concatenated without
    dots; it is always non-empty and drawn from ``[a-z0-9-]``.
    """

    raw: str
    core: str


_LABEL_RE = re.compile(r"^[a-z0-9-]{1,63}$")


@dataclass(frozen=True)
class SuffixSet:
    """Public-suffix rules: plain suffixes, wildcards, and exceptions.

    ``suffixes`` holds plain rules like "com" or "co.uk".  ``wildcards``
    holds the tail after "*." (a wildcard rule "*.ck" matches any single
    label followed by "ck").  ``exceptions`` holds rules that override a
    wildcard: "!www.ck" means "www.ck" is registrable, so its public
    suffix is just "ck".
    """

    suffixes: frozenset[str]
    wildcards: frozenset[str] = field(default_factory=frozenset)
    exceptions: frozenset[str] = field(default_factory=frozenset)

    def match_length(self, labels: list[str]) -> int:
        """Number of trailing labels covered by the best-matching rule.

        Returns 0 when no rule matches.  Matching is over whole labels
        only; an exception rule wins over everything, then the longest
        matching plain/wildcard rule.
        """
        n = len(labels)
        for k in range(n, 0, -1):
            tail = ".".join(labels[n - k:])
            if tail in self.exceptions:
                # The exception's own leftmost label is registrable.
                return k - 1
        best = 0
        for k in range(1, n + 1):
            tail = ".".join(labels[n - k:])
            if tail in self.suffixes:
                best = k
            if k >= 2 and ".".join(labels[n - k + 1:]) in self.wildcards:
                best = max(best, k)
        return best


def load_suffixes(path) -> SuffixSet:
    """Parse a suffix file: one rule per line, ``#`` comments.

    Lines starting with ``*.`` are wildcard rules, lines starting with
    ``!`` are exception rules, everything else is a plain suffix.
    """
    plain, wild, exc = set(), set(), set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip().lower()
            if not line or line.startswith("#"):
                continue
            if line.startswith("*."):
                wild.add(line[2:])
            elif line.startswith("!"):
                exc.add(line[1:])
            else:
                plain.add(line)
    return SuffixSet(frozenset(plain), frozenset(wild), frozenset(exc))


def default_suffixes() -> SuffixSet:
    """Bundled snapshot of ~200 common public suffixes."""
    ref = resources.files("lexidga.data").joinpath("suffixes.txt")
    with resources.as_file(ref) as path:
        return load_suffixes(path)


def normalize(raw: str, suffixes: SuffixSet | None = None) -> Domain:
    """Lowercase ``raw``, strip its public suffix, and drop remaining dots.

    If no rule in ``suffixes`` matches, the final label is dropped when the
    input has two or more labels (the unknown tail is still treated as a
    TLD); a single-label input is kept as-is.

    Raises InvalidHostname for malformed input and EmptyCore when the
    domain consists solely of a public suffix.
    """
    if suffixes is None:
        suffixes = default_suffixes()

    lowered = raw.strip().lower()
    if lowered.endswith("."):  # absolute FQDN form
        lowered = lowered[:-1]
    if not lowered or len(lowered) > 253:
        raise InvalidHostname(f"bad hostname length: {raw!r}")
    labels = lowered.split(".")
    for label in labels:
        if not _LABEL_RE.match(label):
            raise InvalidHostname(f"illegal label {label!r} in {raw!r}")

    matched = suffixes.match_length(labels)
    if matched == 0 and len(labels) >= 2:
        matched = 1
    kept = labels[: len(labels) - matched]
    if not kept:
        raise EmptyCore(f"{raw!r} is only a public suffix")
    return Domain(raw=raw, core="".join(kept))
