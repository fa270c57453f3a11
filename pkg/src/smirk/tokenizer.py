"""Vocabularies and the four tokenization schemes built on them.

Schemes
-------
``smirk``
    Glyph-level tokens from the two-stage lexer; the stock vocabulary covers
    the whole bracket grammar, so any molecule written in OpenSMILES glyphs
    encodes without unknowns.
``atomwise``
    One token per pre-token (whole bracket atoms kept intact), the classic
    regex tokenization.  Vocabularies for this scheme are closed lists, so
    unseen bracket atoms map to the unknown token.
``char``
    One token per character.
``gpe``
    Glyph tokens plus learned pair merges (see :mod:`smirk.gpe`).  Merged
    tokens get fresh ids above the base roster; a merged token's surface may
    collide with a base glyph's spelling (the pair C+n is a different token
    than the copernicium glyph ``Cn``), so merges are stored as id pairs and
    never re-enter the string-to-id map.

The vocabulary file format is JSON with keys ``version``, ``scheme``,
``tokens``, ``specials``, ``merges`` in that order, serialized with
``indent=1`` and a trailing newline.  Serialization is canonical: saving a
loaded vocabulary reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable

from .alphabet import AROMATIC_SYMBOLS, DIGITS, ELEMENTS
from .glyphs import Glyph, PreToken, PreTokenClass, lex_groups, pretokenize_atomwise

SCHEMES = ("smirk", "atomwise", "char", "gpe")

UNK, PAD, BOS, EOS, MASK = "[UNK]", "[PAD]", "[BOS]", "[EOS]", "[MASK]"
SPECIAL_NAMES: tuple[str, ...] = ("UNK", "PAD", "BOS", "EOS", "MASK")
SPECIAL_TOKENS: tuple[str, ...] = (UNK, PAD, BOS, EOS, MASK)
DEFAULT_SPECIALS: dict[str, str] = dict(zip(SPECIAL_NAMES, SPECIAL_TOKENS))

# Single-glyph punctuation in roster order: parens, brackets, dot, bonds,
# ring marker, wildcard, charge sign, chirality markers.
_PUNCTUATION = (
    "(", ")", "[", "]", ".",
    "-", "=", "#", "$", ":", "/", "\\", "~",
    "%", "*", "+",
    "@", "@@", "@TH", "@AL", "@SP", "@TB", "@OH",
)

# The 26-token atomwise vocabulary used by several published generators,
# reproduced here as a coverage baseline.  Note the absence of ".", ":",
# "$", charged or isotopic bracket atoms, and most elements.
MOSES_LIKE_TOKENS: tuple[str, ...] = (
    "#", "(", ")", "-", "1", "2", "3", "4", "5", "6", "=",
    "B", "Br", "C", "Cl", "F", "I", "N", "O", "S",
    "[H]", "[nH]", "c", "n", "o", "s",
)


class VocabularyError(ValueError):
    """Malformed vocabulary contents or file."""


class OOVError(ValueError):
    """Strict-mode encode hit a unit outside the vocabulary."""

    def __init__(self, unit: str, span: tuple[int, int]):
        super().__init__(f"out-of-vocabulary unit {unit!r} at {span[0]}:{span[1]}")
        self.unit = unit
        self.span = span

    def __reduce__(self):  # keep picklable across worker processes
        return type(self), (self.unit, self.span)


@dataclass(frozen=True)
class Vocabulary:
    """Immutable token roster plus optional merge rules.

    ``tokens`` maps id -> surface for the base roster and is bijective.
    ``specials`` names the five reserved tokens (UNK/PAD/BOS/EOS/MASK ->
    surface form); all five must be enrolled.  Merge rule ``i`` defines id
    ``len(tokens) + i`` whose surface is the concatenation of its
    constituents' surfaces (computed, not stored).
    """

    scheme: str
    tokens: tuple[str, ...]
    specials: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_SPECIALS))
    merges: tuple[tuple[int, int], ...] = ()
    _index: dict[str, int] = field(init=False, repr=False, compare=False)
    _surfaces: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise VocabularyError(f"unknown scheme {self.scheme!r}")
        seen: set[str] = set()
        for token in self.tokens:
            if token in seen:
                raise VocabularyError(f"duplicate token {token!r} in roster")
            seen.add(token)
        missing = [n for n in SPECIAL_NAMES if n not in self.specials]
        if missing:
            raise VocabularyError(f"special names missing: {missing}")
        unenrolled = [s for s in self.specials.values() if s not in seen]
        if unenrolled:
            raise VocabularyError(
                f"special tokens missing from roster: {unenrolled}"
            )
        surfaces = list(self.tokens)
        for n, (left, right) in enumerate(self.merges):
            limit = len(self.tokens) + n
            if not (0 <= left < limit and 0 <= right < limit):
                raise VocabularyError(f"merge {n} references id out of range")
            surfaces.append(surfaces[left] + surfaces[right])
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})
        object.__setattr__(self, "_surfaces", tuple(surfaces))

    @property
    def size(self) -> int:
        """Total id count, merged tokens included."""
        return len(self._surfaces)

    @property
    def base_size(self) -> int:
        return len(self.tokens)

    @property
    def unk_token(self) -> str:
        return self.specials["UNK"]

    @property
    def unk_id(self) -> int:
        return self._index[self.specials["UNK"]]

    @property
    def pad_id(self) -> int:
        return self._index[self.specials["PAD"]]

    @property
    def bos_id(self) -> int:
        return self._index[self.specials["BOS"]]

    @property
    def eos_id(self) -> int:
        return self._index[self.specials["EOS"]]

    @property
    def mask_id(self) -> int:
        return self._index[self.specials["MASK"]]

    def id_of(self, token: str) -> int | None:
        """Base-roster lookup; merged tokens are only reachable by id."""
        return self._index.get(token)

    def token_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self._surfaces):
            raise VocabularyError(f"id {token_id} out of range")
        return self._surfaces[token_id]


@dataclass(frozen=True)
class Encoding:
    """Result of encoding one molecule.

    ``offsets[i]`` is the half-open character span of token ``i`` in
    ``text``; ``unk_spans`` lists the spans that were replaced by the
    unknown token, in order.
    """

    text: str
    ids: tuple[int, ...]
    tokens: tuple[str, ...]
    offsets: tuple[tuple[int, int], ...]
    unk_spans: tuple[tuple[int, int], ...] = ()

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def has_unknown(self) -> bool:
        return bool(self.unk_spans)


def build_smirk_vocabulary() -> Vocabulary:
    """The stock 164-token glyph vocabulary.

    Roster order: 5 specials, 10 digits, 23 punctuation and chirality
    glyphs, 8 aromatic symbols, 118 element symbols by atomic number.
    """
    tokens = SPECIAL_TOKENS + DIGITS + _PUNCTUATION + AROMATIC_SYMBOLS + ELEMENTS
    return Vocabulary("smirk", tokens)


def build_char_vocabulary() -> Vocabulary:
    """Character roster: specials plus every character the glyph alphabet
    can produce, in codepoint order."""
    chars = sorted({ch for t in DIGITS + _PUNCTUATION + AROMATIC_SYMBOLS + ELEMENTS for ch in t})
    return Vocabulary("char", SPECIAL_TOKENS + tuple(chars))


def moses_like_vocabulary() -> Vocabulary:
    """Closed 26-token atomwise vocabulary (plus specials)."""
    return Vocabulary("atomwise", SPECIAL_TOKENS + MOSES_LIKE_TOKENS)


def vocabulary_from_corpus(scheme: str, molecules: Iterable[str]) -> Vocabulary:
    """Closed vocabulary of the units observed in ``molecules``.

    Units follow the scheme (pre-tokens, characters, or glyphs); unmatched
    characters are skipped rather than enrolled.  Tokens are sorted
    lexicographically after the specials.
    """
    units: set[str] = set()
    if scheme == "atomwise":
        for mol in molecules:
            units.update(
                pt.text
                for pt in pretokenize_atomwise(mol, strict=False)
                if pt.matched
            )
    elif scheme == "char":
        for mol in molecules:
            units.update(mol)
    elif scheme in ("smirk", "gpe"):
        for mol in molecules:
            for _, glyphs in lex_groups(mol, strict=False):
                units.update(g.text for g in glyphs)
    else:
        raise VocabularyError(f"unknown scheme {scheme!r}")
    units.difference_update(SPECIAL_TOKENS)
    return Vocabulary(scheme, SPECIAL_TOKENS + tuple(sorted(units)))


def builtin_vocabulary(name: str) -> Vocabulary:
    """Named stock vocabularies accepted by the command-line tools."""
    builders = {
        "smirk": build_smirk_vocabulary,
        "char": build_char_vocabulary,
        "moses-like": moses_like_vocabulary,
    }
    if name not in builders:
        raise VocabularyError(
            f"unknown builtin vocabulary {name!r} (choose from {sorted(builders)})"
        )
    return builders[name]()


def dumps_vocabulary(vocab: Vocabulary) -> str:
    """Canonical file form: keys in pinned order, ``merges`` only for gpe,
    LF newlines.  Loading and re-saving reproduces the bytes exactly."""
    doc = {
        "version": 1,
        "scheme": vocab.scheme,
        "tokens": list(vocab.tokens),
        "specials": {name: vocab.specials[name] for name in SPECIAL_NAMES},
    }
    if vocab.scheme == "gpe":
        doc["merges"] = [list(pair) for pair in vocab.merges]
    elif vocab.merges:
        raise VocabularyError(
            f"scheme {vocab.scheme!r} cannot carry merge rules in the file format"
        )
    return json.dumps(doc, ensure_ascii=False, indent=1) + "\n"


def save_vocabulary(vocab: Vocabulary, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps_vocabulary(vocab))


def load_vocabulary(path: str) -> Vocabulary:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise VocabularyError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("version") != 1:
        raise VocabularyError(f"{path}: unsupported vocabulary file version")
    try:
        scheme = doc["scheme"]
        merges = tuple((int(l), int(r)) for l, r in doc.get("merges", []))
        if merges and scheme != "gpe":
            warnings.warn(
                f"{path}: ignoring {len(merges)} merge rules on scheme "
                f"{scheme!r}"
            )
            merges = ()
        return Vocabulary(
            scheme=scheme,
            tokens=tuple(doc["tokens"]),
            specials=dict(doc["specials"]),
            merges=merges,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, VocabularyError):
            raise
        raise VocabularyError(f"{path}: malformed vocabulary ({exc})") from exc


def _unk_unit(
    vocab: Vocabulary,
    unit: str,
    span: tuple[int, int],
    strict: bool,
    ids: list[int],
    tokens: list[str],
    offsets: list[tuple[int, int]],
    unk_spans: list[tuple[int, int]],
) -> None:
    if strict:
        raise OOVError(unit, span)
    ids.append(vocab.unk_id)
    tokens.append(vocab.unk_token)
    offsets.append(span)
    unk_spans.append(span)


def _encode_char(vocab: Vocabulary, smiles: str, strict: bool) -> Encoding:
    ids: list[int] = []
    tokens: list[str] = []
    offsets: list[tuple[int, int]] = []
    unk_spans: list[tuple[int, int]] = []
    for pos, ch in enumerate(smiles):
        token_id = vocab.id_of(ch)
        if token_id is None:
            _unk_unit(vocab, ch, (pos, pos + 1), strict, ids, tokens, offsets, unk_spans)
        else:
            ids.append(token_id)
            tokens.append(ch)
            offsets.append((pos, pos + 1))
    return Encoding(smiles, tuple(ids), tuple(tokens), tuple(offsets), tuple(unk_spans))


def _encode_atomwise(vocab: Vocabulary, smiles: str, strict: bool) -> Encoding:
    ids: list[int] = []
    tokens: list[str] = []
    offsets: list[tuple[int, int]] = []
    unk_spans: list[tuple[int, int]] = []
    for pt in pretokenize_atomwise(smiles, strict=strict):
        token_id = vocab.id_of(pt.text) if pt.matched else None
        span = (pt.start, pt.end)
        if token_id is None:
            _unk_unit(vocab, pt.text, span, strict, ids, tokens, offsets, unk_spans)
        else:
            ids.append(token_id)
            tokens.append(pt.text)
            offsets.append(span)
    return Encoding(smiles, tuple(ids), tuple(tokens), tuple(offsets), tuple(unk_spans))


def _glyph_words(
    vocab: Vocabulary, smiles: str, strict: bool
) -> tuple[list[list[int]], list[list[tuple[int, int]]], list[tuple[int, int]]]:
    """Per-word glyph ids and offsets for the smirk and gpe schemes.

    Words are the merge domains: bracket atoms, ring closures, parentheses,
    and dots stand alone; runs of everything else share a word.  One unknown
    token (its own word) stands in for each unmatched pre-token.
    """
    from .gpe import split_words

    word_ids: list[list[int]] = []
    word_offsets: list[list[tuple[int, int]]] = []
    unk_spans: list[tuple[int, int]] = []
    for segment in split_words(lex_groups(smiles, strict=strict)):
        if isinstance(segment, PreToken):
            if strict:
                raise OOVError(segment.text, (segment.start, segment.end))
            word_ids.append([vocab.unk_id])
            word_offsets.append([(segment.start, segment.end)])
            unk_spans.append((segment.start, segment.end))
            continue
        ids: list[int] = []
        offsets: list[tuple[int, int]] = []
        for glyph in segment:
            token_id = vocab.id_of(glyph.text)
            if token_id is None:
                if strict:
                    raise OOVError(glyph.text, (glyph.start, glyph.end))
                token_id = vocab.unk_id
                unk_spans.append((glyph.start, glyph.end))
            ids.append(token_id)
            offsets.append((glyph.start, glyph.end))
        word_ids.append(ids)
        word_offsets.append(offsets)
    return word_ids, word_offsets, unk_spans


def _encode_glyphs(vocab: Vocabulary, smiles: str, strict: bool) -> Encoding:
    from .gpe import apply_merges

    word_ids, word_offsets, unk_spans = _glyph_words(vocab, smiles, strict)
    ids: list[int] = []
    offsets: list[tuple[int, int]] = []
    if vocab.scheme == "gpe" and vocab.merges:
        for wids, woffs in zip(word_ids, word_offsets):
            merged_ids, merged_offsets = apply_merges(
                wids, vocab.merges, vocab.base_size, woffs
            )
            ids.extend(merged_ids)
            offsets.extend(merged_offsets)
    else:
        for wids, woffs in zip(word_ids, word_offsets):
            ids.extend(wids)
            offsets.extend(woffs)
    tokens = tuple(vocab.token_of(i) for i in ids)
    return Encoding(smiles, tuple(ids), tokens, tuple(offsets), tuple(unk_spans))


def encode(vocab: Vocabulary, smiles: str, strict: bool = False) -> Encoding:
    """Tokenize one molecule under the vocabulary's scheme.

    Permissive mode (default) emits one unknown token per unit it cannot
    place: per unmatched pre-token or undecomposable bracket atom, per
    out-of-roster unit otherwise.  Strict mode raises :class:`OOVError`
    (or a lexing error) instead.  Special tokens are never matched inside
    molecule text.
    """
    if vocab.scheme == "char":
        return _encode_char(vocab, smiles, strict)
    if vocab.scheme == "atomwise":
        return _encode_atomwise(vocab, smiles, strict)
    return _encode_glyphs(vocab, smiles, strict)


def decode(vocab: Vocabulary, ids: Iterable[int]) -> str:
    """Concatenate token surfaces.  Unknown ids render as the unknown
    token's literal spelling, so decode is exact only for encodings without
    unknowns."""
    return "".join(vocab.token_of(i) for i in ids)
