"""Glyph-pair encoding: byte-pair-style merges learned over glyph ids.

Merges operate on token ids, never on strings, so a merged token whose
surface happens to spell an existing glyph stays a distinct vocabulary
entry.  Merge rules never cross word boundaries; words are glyph runs
delimited by ring closures, parentheses, dots, and bracket-atom edges, with
each bracket atom forming one internally mergeable word.

Training recounts pair frequencies from scratch every iteration and breaks
frequency ties by the lowest (left, right) id pair, which makes the learned
rule list a pure function of the word multiset.  Word collection commutes
with concatenation, so corpora may be counted in shards and the counters
summed before training.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .glyphs import Glyph, PreToken, PreTokenClass, lex_groups
from .tokenizer import OOVError, Vocabulary, build_smirk_vocabulary

STOP_TARGET = "target-reached"
STOP_EXHAUSTED = "merges-exhausted"
STOP_FLOOR = "frequency-floor"

# Pre-token classes that always stand alone as words.
_SOLO_CLASSES = frozenset(
    {PreTokenClass.BRACKET_ATOM, PreTokenClass.RING_CLOSURE}
)
_SOLO_STRUCTURAL = frozenset({"(", ")", "."})


def split_words(
    groups: Iterable[tuple[PreToken, list[Glyph]]],
) -> list[list[Glyph] | PreToken]:
    """Partition lexed glyphs into merge words.

    Returns a list whose items are either glyph lists (words) or bare
    :class:`PreToken` markers for unmatched input that permissive encoders
    replace with a single unknown token.  A two-digit ring closure is one
    word of three glyphs; a bracket atom is one word spanning ``[`` to
    ``]``; parentheses and dots are single-glyph words; every other run of
    glyphs between such boundaries shares a word.
    """
    words: list[list[Glyph] | PreToken] = []
    run: list[Glyph] = []
    for pt, glyphs in groups:
        if not pt.matched:
            if run:
                words.append(run)
                run = []
            words.append(pt)
        elif pt.cls in _SOLO_CLASSES or (
            pt.cls == PreTokenClass.STRUCTURAL and pt.text in _SOLO_STRUCTURAL
        ):
            if run:
                words.append(run)
                run = []
            words.append(list(glyphs))
        else:
            run.extend(glyphs)
    if run:
        words.append(run)
    return words


def _merge_word(
    word: tuple[int, ...], pair: tuple[int, int], new_id: int
) -> tuple[int, ...]:
    """Replace non-overlapping occurrences of ``pair``, leftmost first."""
    out: list[int] = []
    i = 0
    while i < len(word):
        if i + 1 < len(word) and word[i] == pair[0] and word[i + 1] == pair[1]:
            out.append(new_id)
            i += 2
        else:
            out.append(word[i])
            i += 1
    return tuple(out)


@lru_cache(maxsize=32)
def _merge_ranks(merges: tuple[tuple[int, int], ...]) -> dict[tuple[int, int], int]:
    return {pair: rank for rank, pair in enumerate(merges)}


def apply_merges(
    ids: Iterable[int],
    merges: tuple[tuple[int, int], ...],
    base_size: int,
    offsets: Iterable[tuple[int, int]] | None = None,
) -> tuple[list[int], list[tuple[int, int]] | None]:
    """Apply ordered merge rules to one word of ids.

    Rule ``i`` rewrites pair ``merges[i]`` to id ``base_size + i``.  Rules
    are applied in rule order, each as a single leftmost, non-overlapping
    pass; because every rewrite introduces an id no earlier rule mentions,
    one ordered sweep reaches the fixed point.  Offsets, when given, are
    fused alongside (a merged token spans its constituents).
    """
    ranks = _merge_ranks(merges)
    word = list(ids)
    offs = list(offsets) if offsets is not None else None
    while len(word) >= 2:
        best_rank: int | None = None
        for left, right in zip(word, word[1:]):
            rank = ranks.get((left, right))
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank = rank
        if best_rank is None:
            break
        pair = merges[best_rank]
        new_id = base_size + best_rank
        out: list[int] = []
        out_offs: list[tuple[int, int]] = []
        i = 0
        while i < len(word):
            if i + 1 < len(word) and word[i] == pair[0] and word[i + 1] == pair[1]:
                out.append(new_id)
                if offs is not None:
                    out_offs.append((offs[i][0], offs[i + 1][1]))
                i += 2
            else:
                out.append(word[i])
                if offs is not None:
                    out_offs.append(offs[i])
                i += 1
        word = out
        if offs is not None:
            offs = out_offs
    return word, offs


def collect_words(molecules: Iterable[str], vocab: Vocabulary) -> Counter:
    """Count training words (id tuples) for one corpus shard.

    Lexing is strict: training data must be clean, so unmatched characters
    or out-of-roster glyphs raise rather than polluting the counts.
    Counters from different shards may be summed; the result equals a
    single-pass count of the concatenated corpus.
    """
    counts: Counter = Counter()
    for mol in molecules:
        for segment in split_words(lex_groups(mol, strict=True)):
            word = []
            for glyph in segment:
                token_id = vocab.id_of(glyph.text)
                if token_id is None:
                    raise OOVError(glyph.text, (glyph.start, glyph.end))
                word.append(token_id)
            counts[tuple(word)] += 1
    return counts


def merge_word_counts(*counters: Counter) -> Counter:
    total: Counter = Counter()
    for c in counters:
        total.update(c)
    return total


@dataclass(frozen=True)
class GpeResult:
    vocabulary: Vocabulary
    stop_reason: str
    merge_frequencies: tuple[int, ...]


def train_from_words(
    words: Counter,
    base: Vocabulary,
    target_size: int,
    min_pair_frequency: int = 2,
) -> GpeResult:
    """Learn merges until the vocabulary reaches ``target_size`` ids.

    Each iteration recounts all adjacent pairs over the current words,
    picks the most frequent (ties to the lowest id pair), and rewrites.
    Stops early when no pair remains (:data:`STOP_EXHAUSTED`) or the best
    pair drops below ``min_pair_frequency`` (:data:`STOP_FLOOR`).
    """
    rules: list[tuple[int, int]] = []
    freqs: list[int] = []
    words = Counter(words)
    reason = STOP_TARGET
    while base.base_size + len(rules) < target_size:
        pairs: Counter = Counter()
        for word, freq in words.items():
            for pair in zip(word, word[1:]):
                pairs[pair] += freq
        if not pairs:
            reason = STOP_EXHAUSTED
            break
        pair, count = min(pairs.items(), key=lambda kv: (-kv[1], kv[0]))
        if count < min_pair_frequency:
            reason = STOP_FLOOR
            break
        new_id = base.base_size + len(rules)
        rules.append(pair)
        freqs.append(count)
        rewritten: Counter = Counter()
        for word, freq in words.items():
            rewritten[_merge_word(word, pair, new_id)] += freq
        words = rewritten
    vocab = Vocabulary(
        scheme="gpe",
        tokens=base.tokens,
        specials=dict(base.specials),
        merges=tuple(rules),
    )
    return GpeResult(vocab, reason, tuple(freqs))


def train_gpe(
    molecules: Iterable[str],
    target_size: int,
    base: Vocabulary | None = None,
    min_pair_frequency: int = 2,
) -> GpeResult:
    """Collect words from ``molecules`` and train against ``base`` (the
    stock glyph vocabulary unless given)."""
    if base is None:
        base = build_smirk_vocabulary()
    return train_from_words(
        collect_words(molecules, base), base, target_size, min_pair_frequency
    )
