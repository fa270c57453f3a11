"""Tokenizer usage statistics: fertility, frequency entropy, rare-token
information, and the fertility-versus-loss regression.

All statistics are pure functions of token counts, and counting commutes
with corpus sharding: count shards with :func:`count_tokens`, sum the
counters, and feed the total to :func:`stats_from_counts`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from scipy import stats as _scipy_stats

from .tokenizer import Vocabulary, encode


@dataclass(frozen=True)
class TokenStats:
    """Frequency profile of a tokenizer over a corpus.

    ``frequencies`` and ``information`` cover ids with nonzero counts;
    information is the surprise -ln p.  ``normalized_entropy`` divides by
    ln V so vocabularies of different sizes compare on [0, 1].
    """

    counts: dict[int, int]
    total_tokens: int
    vocab_size: int
    frequencies: dict[int, float]
    information: dict[int, float]
    entropy: float
    normalized_entropy: float
    tokens_used: int


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    standard_error: float
    p_value: float
    n: int


def fertility(vocab: Vocabulary, corpus: Iterable[str]) -> float:
    """Mean tokens per molecule (unknown tokens counted like any other)."""
    molecules = 0
    tokens = 0
    for mol in corpus:
        molecules += 1
        tokens += len(encode(vocab, mol))
    if molecules == 0:
        raise ValueError("fertility is undefined on an empty corpus")
    return tokens / molecules


def count_tokens(vocab: Vocabulary, corpus: Iterable[str]) -> Counter:
    """Token-id counts for one corpus shard (permissive encoding)."""
    counts: Counter = Counter()
    for mol in corpus:
        counts.update(encode(vocab, mol).ids)
    return counts


def stats_from_counts(counts: Counter, vocab_size: int) -> TokenStats:
    total = sum(counts.values())
    if total == 0:
        raise ValueError("token statistics are undefined on an empty corpus")
    frequencies = {i: c / total for i, c in counts.items() if c > 0}
    information = {i: -math.log(p) for i, p in frequencies.items()}
    entropy = -math.fsum(p * math.log(p) for p in frequencies.values())
    normalized = entropy / math.log(vocab_size) if vocab_size > 1 else 0.0
    return TokenStats(
        counts=dict(counts),
        total_tokens=total,
        vocab_size=vocab_size,
        frequencies=frequencies,
        information=information,
        entropy=entropy,
        normalized_entropy=normalized,
        tokens_used=sum(1 for c in counts.values() if c > 0),
    )


def token_stats(vocab: Vocabulary, corpus: Iterable[str]) -> TokenStats:
    return stats_from_counts(count_tokens(vocab, corpus), vocab.size)


def rare_token_threshold(
    stats_or_total: TokenStats | int, min_occurrences: int
) -> float:
    """Surprise, in nats, of a token seen exactly ``min_occurrences`` times:
    -ln(min_occurrences / total).  A coverage floor like "every kept token
    occurs at least 100 times" translates to an information ceiling."""
    total = (
        stats_or_total.total_tokens
        if isinstance(stats_or_total, TokenStats)
        else stats_or_total
    )
    if min_occurrences <= 0 or total <= 0:
        raise ValueError("counts must be positive")
    return -math.log(min_occurrences / total)


def fit_fertility_loss(points: Sequence[tuple[float, float]]) -> RegressionFit:
    """Ordinary least squares of cross-entropy against fertility.

    Exactly collinear points recover the exact slope with zero standard
    error; constant-x input is degenerate and raises ValueError.
    """
    if len(points) < 3:
        raise ValueError("need at least 3 points for a regression")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    if max(xs) == min(xs):
        raise ValueError("degenerate regression: all fertilities identical")
    fit = _scipy_stats.linregress(xs, ys)
    return RegressionFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        standard_error=float(fit.stderr),
        p_value=float(fit.pvalue),
        n=len(points),
    )


def stats_to_csv(stats: TokenStats, vocab: Vocabulary) -> str:
    """Usage curve, most frequent first: rank, token, count, frequency,
    information_nats."""
    order = sorted(stats.counts, key=lambda i: (-stats.counts[i], i))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "token", "count", "frequency", "information_nats"])
    for rank, token_id in enumerate(order, start=1):
        writer.writerow(
            [
                rank,
                vocab.token_of(token_id),
                stats.counts[token_id],
                f"{stats.frequencies[token_id]:.10g}",
                f"{stats.information[token_id]:.10g}",
            ]
        )
    return buf.getvalue()


def stats_to_json(stats: TokenStats) -> str:
    doc = {
        "entropy": stats.entropy,
        "normalized_entropy": stats.normalized_entropy,
        "tokens_used": stats.tokens_used,
        "vocab_size": stats.vocab_size,
        "total_tokens": stats.total_tokens,
    }
    return json.dumps(doc, ensure_ascii=False, indent=1) + "\n"
