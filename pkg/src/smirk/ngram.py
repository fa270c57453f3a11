"""Add-one N-gram language models over token ids.

Counting pads each sequence with N-1 begin markers and one end marker, then
records every length-N window, so the end token is predicted but the begin
token never is.  Lower-order tables are derived from the top table by
trailing marginalization, which makes C(g) == sum_x C(g + (x,)) an identity
and the add-one conditional exactly normalized:

    P(x | ctx) = (C(ctx + (x,)) + 1) / (C(ctx) + V)

The bidirectional score of a token multiplies its forward factor by the
mirror-image backward factor and renormalizes over the vocabulary.  Masked
context positions are handled by wildcard counts: the count of a pattern
with holes is the sum of stored counts over every assignment of the holes,
substituted into the same add-one form.  The information lost by masking is
the KL divergence between the exact and the marginalized distributions,
summed over token positions; a position whose context windows contain no
masked neighbor contributes exactly zero.

On-disk format ``NGM1`` (little-endian): magic ``NGM1``, u32 version, u32
order, u64 vocab size, then for each order 1..N a u64 entry count followed
by entries of ``order`` u32 ids and a u64 count, sorted lexicographically.
A JSON mirror of the same tables is available for debugging.
"""

from __future__ import annotations

import json
import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from typing import Collection, Iterable, Sequence

from .tokenizer import Encoding, Vocabulary

MAGIC = b"NGM1"


class NgramFormatError(ValueError):
    """Malformed or inconsistent model file."""


@dataclass
class NGramModel:
    order: int
    vocab_size: int
    bos_id: int
    eos_id: int
    tables: dict[int, dict[tuple[int, ...], int]]
    total: int
    _scan_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def count(self, gram: tuple[int, ...]) -> int:
        """Observed count of a gram of any length 0..N."""
        if not gram:
            return self.total
        if len(gram) > self.order:
            raise ValueError(f"gram longer than model order {self.order}")
        return self.tables[len(gram)].get(gram, 0)

    def wildcard_count(self, pattern: tuple[int | None, ...]) -> int:
        """Count of a pattern where ``None`` matches any id.

        Trailing holes reduce to a stored lower-order count (the tables are
        trailing marginalizations of each other); interior or leading holes
        fall back to a cached scan of the stored table.
        """
        if not pattern:
            return self.total
        if len(pattern) > self.order:
            raise ValueError(f"pattern longer than model order {self.order}")
        cut = len(pattern)
        while cut > 0 and pattern[cut - 1] is None:
            cut -= 1
        head = pattern[:cut]
        if all(p is not None for p in head):
            return self.count(head)
        key = ("wc", pattern)
        hit = self._scan_cache.get(key)
        if hit is None:
            hit = 0
            for gram, c in self.tables[len(pattern)].items():
                if all(p is None or p == g for p, g in zip(pattern, gram)):
                    hit += c
            self._scan_cache[key] = hit
        return hit

    def slot_counts(
        self, pattern: tuple[int | None, ...], slot: int
    ) -> dict[int, int]:
        """Wildcard counts grouped by the id occupying ``slot``.

        ``pattern[slot]`` must be ``None``; the result maps each id that can
        fill the slot (under the other constraints) to its summed count.
        """
        key = ("slot", pattern, slot)
        hit = self._scan_cache.get(key)
        if hit is None:
            holes = [i for i, p in enumerate(pattern) if p is None and i != slot]
            if not holes:
                hit = {}
                for gram, c in self.tables[len(pattern)].items():
                    if all(
                        p == g for i, (p, g) in enumerate(zip(pattern, gram))
                        if i != slot
                    ):
                        hit[gram[slot]] = hit.get(gram[slot], 0) + c
            else:
                hit = {}
                for gram, c in self.tables[len(pattern)].items():
                    if all(
                        p is None or p == g
                        for i, (p, g) in enumerate(zip(pattern, gram))
                        if i != slot
                    ):
                        hit[gram[slot]] = hit.get(gram[slot], 0) + c
            self._scan_cache[key] = hit
        return hit


def _ids_of(seq: Encoding | Sequence[int]) -> tuple[int, ...]:
    return seq.ids if isinstance(seq, Encoding) else tuple(seq)


def count_grams(
    sequences: Iterable[Encoding | Sequence[int]],
    order: int,
    bos_id: int,
    eos_id: int,
) -> Counter:
    """Top-order window counts over padded sequences (one shard's worth)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    top: Counter = Counter()
    pad = (bos_id,) * (order - 1)
    for seq in sequences:
        padded = pad + _ids_of(seq) + (eos_id,)
        top.update(zip(*(padded[k:] for k in range(order))))
    return top


def merge_gram_counts(shards: Iterable[Counter]) -> Counter:
    """Exact merge of per-shard counts; order of shards is irrelevant."""
    merged: Counter = Counter()
    for shard in shards:
        merged.update(shard)
    return merged


def model_from_counts(
    top: Counter, order: int, vocab: Vocabulary
) -> NGramModel:
    """Assemble a model from top-order counts.

    Lower orders are trailing marginalizations of the level above, so the
    prefix-consistency identity holds by construction.
    """
    tables: dict[int, dict[tuple[int, ...], int]] = {order: dict(top)}
    for k in range(order - 1, 0, -1):
        lower: dict[tuple[int, ...], int] = {}
        for gram, c in tables[k + 1].items():
            head = gram[:-1]
            lower[head] = lower.get(head, 0) + c
        tables[k] = lower
    total = sum(tables[1].values())
    return NGramModel(order, vocab.size, vocab.bos_id, vocab.eos_id, tables, total)


def fit(
    sequences: Iterable[Encoding | Sequence[int]],
    order: int,
    vocab: Vocabulary,
) -> NGramModel:
    """Count an order-N model over encoded sequences.

    ``V`` is the full vocabulary size (merged ids included), so add-one
    smoothing spreads mass over every id the tokenizer can emit.
    """
    top = count_grams(sequences, order, vocab.bos_id, vocab.eos_id)
    return model_from_counts(top, order, vocab)


def _context(model: NGramModel, context: Sequence[int]) -> tuple[int, ...]:
    """Normalize to exactly N-1 ids: truncate from the left, pad with BOS."""
    need = model.order - 1
    ctx = tuple(context)[-need:] if need else ()
    if len(ctx) < need:
        ctx = (model.bos_id,) * (need - len(ctx)) + ctx
    return ctx


def prob_next(model: NGramModel, context: Sequence[int], token_id: int) -> float:
    """Add-one conditional probability of ``token_id`` after ``context``."""
    ctx = _context(model, context)
    num = model.count(ctx + (token_id,)) + 1
    den = model.count(ctx) + model.vocab_size
    return num / den


def sequence_nats(model: NGramModel, seq: Encoding | Sequence[int]) -> float:
    """Total information of a sequence in nats, end marker included."""
    ids = _ids_of(seq)
    padded = (model.bos_id,) * (model.order - 1) + ids + (model.eos_id,)
    nats = 0.0
    for i in range(len(ids) + 1):
        window = padded[i : i + model.order]
        num = model.tables[model.order].get(window, 0) + 1
        den = model.count(window[:-1]) + model.vocab_size
        nats -= math.log(num / den)
    return nats


@dataclass(frozen=True)
class EvalSummary:
    molecules: int
    predicted_tokens: int
    total_nats: float
    nats_per_molecule: float
    nats_per_token: float


def evaluate(
    model: NGramModel, sequences: Iterable[Encoding | Sequence[int]]
) -> EvalSummary:
    molecules = 0
    tokens = 0
    total = 0.0
    for seq in sequences:
        ids = _ids_of(seq)
        molecules += 1
        tokens += len(ids) + 1
        total += sequence_nats(model, ids)
    if molecules == 0:
        return EvalSummary(0, 0, 0.0, 0.0, 0.0)
    return EvalSummary(molecules, tokens, total, total / molecules, total / tokens)


def _bidirectional_contexts(
    model: NGramModel, ids: Sequence[int], position: int
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(left, right) contexts of length N-1 around ``position``; begin and
    end markers stand in beyond the sequence edges."""
    need = model.order - 1
    size = len(ids)
    left = tuple(
        model.bos_id if j < 0 else ids[j] for j in range(position - need, position)
    )
    right = tuple(
        model.eos_id if j >= size else ids[j]
        for j in range(position + 1, position + 1 + need)
    )
    return left, right


def _halved_distribution(
    model: NGramModel,
    left: tuple[int | None, ...],
    right: tuple[int | None, ...],
) -> list[float]:
    """Normalized product of forward and backward add-one factors.

    ``None`` entries are marginalized with wildcard counts before the
    add-one substitution, per factor.
    """
    V = model.vocab_size
    fwd_den = model.wildcard_count(left) + V
    bwd_den = model.wildcard_count(right) + V
    if any(p is None for p in left):
        fwd_hits = model.slot_counts(left + (None,), len(left))
    else:
        table = model.tables[model.order]
        fwd_hits = {}
        for x in range(V):
            c = table.get(left + (x,), 0)
            if c:
                fwd_hits[x] = c
    if any(p is None for p in right):
        bwd_hits = model.slot_counts((None,) + right, 0)
    else:
        table = model.tables[model.order]
        bwd_hits = {}
        for x in range(V):
            c = table.get((x,) + right, 0)
            if c:
                bwd_hits[x] = c
    weights = [
        (fwd_hits.get(x, 0) + 1) / fwd_den * ((bwd_hits.get(x, 0) + 1) / bwd_den)
        for x in range(V)
    ]
    z = math.fsum(weights)
    return [w / z for w in weights]


def bidirectional_distribution(
    model: NGramModel,
    seq: Encoding | Sequence[int],
    position: int,
    masked: Collection[int] = (),
) -> list[float]:
    """Distribution over the token at ``position`` given both contexts.

    ``masked`` lists sequence positions (same indexing as ``seq``) whose
    identities are hidden; masked positions inside the context windows are
    marginalized.  Masking ``position`` itself is a no-op, since the
    distribution already ranges over that slot.
    """
    ids = _ids_of(seq)
    left, right = _bidirectional_contexts(model, ids, position)
    if masked:
        need = model.order - 1
        hidden = set(masked)
        left = tuple(
            None if (position - need + k) in hidden else v
            for k, v in enumerate(left)
        )
        right = tuple(
            None if (position + 1 + k) in hidden else v
            for k, v in enumerate(right)
        )
    return _halved_distribution(model, left, right)


def _window_mask(
    model: NGramModel, position: int, mask: Collection[int]
) -> set[int]:
    """Masked sequence positions that fall inside ``position``'s windows."""
    need = model.order - 1
    lo, hi = position - need, position + need
    return {p for p in mask if lo <= p <= hi and p != position}


def info_loss(
    model: NGramModel, seq: Encoding | Sequence[int], mask: Collection[int]
) -> float:
    """Nats of information lost when the masked positions are hidden.

    Sum over every token position of KL(exact || marginalized) between the
    bidirectional distributions with and without the mask.  Positions whose
    context windows contain no masked neighbor contribute exactly zero.
    """
    ids = _ids_of(seq)
    mask = set(mask)
    loss = 0.0
    for i in range(len(ids)):
        local = _window_mask(model, i, mask)
        if not local:
            continue
        exact = bidirectional_distribution(model, ids, i)
        approx = bidirectional_distribution(model, ids, i, local)
        loss += math.fsum(
            b * math.log(b / a) for b, a in zip(exact, approx) if b > 0.0
        )
    return loss


def log_odds(
    model: NGramModel,
    seq: Encoding | Sequence[int],
    mask: Collection[int],
    position: int,
    candidate: int,
) -> float:
    """Log-odds shift ln[B(1-B') / (B'(1-B))] of ``candidate`` at ``position``.

    B is the exact bidirectional probability and B' the one with masked
    window positions marginalized; exactly zero when the mask misses the
    position's context windows.
    """
    ids = _ids_of(seq)
    local = _window_mask(model, position, set(mask))
    if not local:
        return 0.0
    b = bidirectional_distribution(model, ids, position)[candidate]
    a = bidirectional_distribution(model, ids, position, local)[candidate]
    return math.log(b * (1.0 - a)) - math.log(a * (1.0 - b))


def log_odds_grid(
    model: NGramModel, seq: Encoding | Sequence[int], mask: Collection[int]
) -> list[list[float]]:
    """Log-odds of every candidate at every position, as plot data.

    Row i holds the per-candidate shifts for position i; rows whose context
    windows the mask never reaches are all zero.
    """
    ids = _ids_of(seq)
    mask = set(mask)
    grid: list[list[float]] = []
    for i in range(len(ids)):
        local = _window_mask(model, i, mask)
        if not local:
            grid.append([0.0] * model.vocab_size)
            continue
        exact = bidirectional_distribution(model, ids, i)
        approx = bidirectional_distribution(model, ids, i, local)
        grid.append(
            [
                math.log(b * (1.0 - a)) - math.log(a * (1.0 - b))
                for b, a in zip(exact, approx)
            ]
        )
    return grid


def mask_positions(
    reference: Encoding, unk_spans: Iterable[tuple[int, int]]
) -> set[int]:
    """Reference token positions whose character span overlaps any of the
    given unknown spans (typically another tokenizer's ``unk_spans``)."""
    spans = list(unk_spans)
    masked: set[int] = set()
    for i, (start, end) in enumerate(reference.offsets):
        for lo, hi in spans:
            if start < hi and lo < end:
                masked.add(i)
                break
    return masked


def save_ngram(model: NGramModel, path: str) -> None:
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<II", 1, model.order))
        handle.write(struct.pack("<Q", model.vocab_size))
        for k in range(1, model.order + 1):
            entries = sorted(model.tables[k].items())
            handle.write(struct.pack("<Q", len(entries)))
            for gram, count in entries:
                handle.write(struct.pack(f"<{k}IQ", *gram, count))


def save_ngram_json(model: NGramModel, path: str) -> None:
    """Human-readable mirror of the binary tables, same sort order."""
    doc = {
        "version": 1,
        "order": model.order,
        "vocab_size": model.vocab_size,
        "tables": {
            str(k): [[list(g), c] for g, c in sorted(model.tables[k].items())]
            for k in range(1, model.order + 1)
        },
    }
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(doc, handle, separators=(",", ":"))
        handle.write("\n")


def load_ngram(path: str, bos_id: int = 2, eos_id: int = 3) -> NGramModel:
    """Read an ``NGM1`` file and re-check table consistency.

    The format does not store marker ids; the defaults match the stock
    vocabularies (specials lead the roster).
    """
    with open(path, "rb") as handle:
        blob = handle.read()
    if blob[:4] != MAGIC:
        raise NgramFormatError(f"{path}: bad magic")
    try:
        version, order = struct.unpack_from("<II", blob, 4)
        (vocab_size,) = struct.unpack_from("<Q", blob, 12)
        pos = 20
        if version != 1:
            raise NgramFormatError(f"{path}: unsupported version {version}")
        tables: dict[int, dict[tuple[int, ...], int]] = {}
        for k in range(1, order + 1):
            (n_entries,) = struct.unpack_from("<Q", blob, pos)
            pos += 8
            table: dict[tuple[int, ...], int] = {}
            fmt = struct.Struct(f"<{k}IQ")
            for _ in range(n_entries):
                fields = fmt.unpack_from(blob, pos)
                pos += fmt.size
                table[fields[:-1]] = fields[-1]
            tables[k] = table
    except struct.error as exc:
        raise NgramFormatError(f"{path}: truncated file ({exc})") from exc
    if pos != len(blob):
        raise NgramFormatError(f"{path}: {len(blob) - pos} trailing bytes")
    for k in range(1, order):
        derived: dict[tuple[int, ...], int] = {}
        for gram, c in tables[k + 1].items():
            head = gram[:-1]
            derived[head] = derived.get(head, 0) + c
        if derived != tables[k]:
            raise NgramFormatError(f"{path}: order-{k} table is not the "
                                   f"marginal of order {k + 1}")
    total = sum(tables[1].values())
    return NGramModel(order, vocab_size, bos_id, eos_id, tables, total)
