"""Zipfian unigram word segmentation by dynamic programming.

A domain core like "middleapple" is split into the token sequence with the
lowest total cost, where a word at frequency rank r (0-based) in a lexicon
of N words costs ln((r + 1) * ln(N)).  Characters not covered by any
lexicon word fall back to a fixed out-of-vocabulary penalty per character,
so segmentation never fails.

The split is deterministic: cost ties are broken by fewer tokens, then by
the lexicographically earlier token list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

__all__ = [
    "RankedLexicon",
    "TokenSeq",
    "DuplicateWord",
    "load_lexicon",
    "default_lexicon",
    "segment",
    "token_cost",
]


class DuplicateWord(ValueError):
    pass


@dataclass(frozen=True)
class RankedLexicon:
    """Words ordered by descending frequency with precomputed costs.

    cost(w_i) = ln((rank_i + 1) * ln(N)) with N = len(words); ln(N) is
    floored at ln(2) so a one-word lexicon stays finite.  The OOV penalty,
    ln((N + 1) * ln(max(N, 2))) + 10.0, is strictly worse than any word.
    """

    words: tuple[str, ...]
    costs: dict[str, float]
    max_word_len: int
    oov_penalty: float

    @classmethod
    def from_words(cls, words) -> "RankedLexicon":
        words = tuple(words)
        n = len(words)
        log_n = math.log(max(n, 2))
        costs: dict[str, float] = {}
        for rank, word in enumerate(words):
            if word in costs:
                raise DuplicateWord(word)
            costs[word] = math.log((rank + 1) * log_n)
        return cls(
            words=words,
            costs=costs,
            max_word_len=max((len(w) for w in words), default=0),
            oov_penalty=math.log((n + 1) * log_n) + 10.0,
        )

    def __contains__(self, word: str) -> bool:
        return word in self.costs

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class TokenSeq:
    """A segmentation: tokens concatenate back to the input exactly."""

    tokens: tuple[str, ...]
    total_cost: float


def load_lexicon(path) -> RankedLexicon:
    """Read a ranked wordlist, one word per line, best rank first."""
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip().lower()
            if word:
                words.append(word)
    return RankedLexicon.from_words(words)


@lru_cache(maxsize=1)
def default_lexicon() -> RankedLexicon:
    """Bundled English lexicon, frequency-ranked."""
    ref = resources.files("lexidga.data").joinpath("lexicon.txt")
    with resources.as_file(ref) as path:
        return load_lexicon(path)


def token_cost(piece: str, lex: RankedLexicon) -> float:
    """Cost of one candidate token; inf if not a legal token.

    Legal tokens are lexicon words, all-digit runs (one OOV penalty for
    the whole run), and single OOV characters (one penalty each).  This is
    the cost function both the DP and the exhaustive-split oracle use.
    """
    cost = lex.costs.get(piece)
    if cost is not None:
        return cost
    if piece.isdigit() or len(piece) == 1:
        return lex.oov_penalty
    return math.inf


def _segment_part(part: str, lex: RankedLexicon) -> tuple[list[str], float]:
    """DP over one hyphen-free chunk; returns (tokens, cost)."""
    n = len(part)
    # best[j] = (cost, token_count, tokens) for part[:j]; tuple comparison
    # encodes the tie-breaking order.
    best: list[tuple[float, int, tuple[str, ...]]] = [(math.inf, 0, ())] * (n + 1)
    best[0] = (0.0, 0, ())
    max_back = max(lex.max_word_len, 1)
    for j in range(1, n + 1):
        lo = j - max_back
        # digit runs may be longer than any lexicon word
        k = j
        while k > 0 and part[k - 1].isdigit():
            k -= 1
        lo = min(lo, k)
        for i in range(max(lo, 0), j):
            prev_cost, prev_cnt, prev_tokens = best[i]
            if prev_cost == math.inf:
                continue
            piece = part[i:j]
            cost = token_cost(piece, lex)
            if cost == math.inf:
                continue
            cand = (prev_cost + cost, prev_cnt + 1, prev_tokens + (piece,))
            if cand < best[j]:
                best[j] = cand
    cost, _, tokens = best[n]
    return list(tokens), cost


def _merge_oov_runs(tokens: list[str], lex: RankedLexicon) -> list[str]:
    """Collapse maximal runs of single-character OOV tokens.

    Digit-run tokens and in-lexicon single characters stay as they are;
    only loose OOV letters like "x","q" fuse into "xq".
    """
    merged: list[str] = []
    run: list[str] = []
    for tok in tokens:
        loose = len(tok) == 1 and tok not in lex and not tok.isdigit()
        if loose:
            run.append(tok)
        else:
            if run:
                merged.append("".join(run))
                run = []
            merged.append(tok)
    if run:
        merged.append("".join(run))
    return merged


def segment(core: str, lex: RankedLexicon | None = None) -> TokenSeq:
    """Minimum-cost split of ``core`` under the lexicon's unigram costs.

    Hyphens are zero-cost boundaries: they become their own tokens and
    the DP runs on the pieces between them.  The concatenation of the
    returned tokens always equals ``core``.
    """
    if not core:
        raise ValueError("core must be non-empty")
    if lex is None:
        lex = default_lexicon()

    tokens: list[str] = []
    total = 0.0
    for idx, part in enumerate(core.split("-")):
        if idx > 0:
            tokens.append("-")
        if part:
            part_tokens, part_cost = _segment_part(part, lex)
            tokens.extend(_merge_oov_runs(part_tokens, lex))
            total += part_cost
    return TokenSeq(tokens=tuple(tokens), total_cost=total)
