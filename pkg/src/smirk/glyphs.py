"""Two-stage SMILES lexer: atom-wise pre-tokenization, then glyph decomposition.

Stage one scans a molecule into pre-tokens (bracket atoms, organic-subset
atoms, bonds, ring closures, structural punctuation) with a single regex
alternation.  Stage two splits each pre-token into glyphs: bracket atoms are
decomposed positionally against the bracket grammar, two-digit ring closures
become ``%`` plus digits, everything else passes through whole.

Context decides meaning, so the same spelling can lex differently: ``[Cn]``
is one copernicium glyph while bare ``Cn`` is a carbon followed by an
aromatic nitrogen, and ``se`` outside brackets is a sulfur followed by an
unmatched ``e``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .alphabet import (
    AROMATIC_SYMBOLS,
    BOND_GLYPHS,
    BRACKET_SYMBOLS,
    CHIRALITY_CLASSES,
    ORGANIC_SUBSET,
    WILDCARD,
)


class GlyphKind:
    """Glyph categories; values double as serialization labels."""

    ELEMENT = "element"
    AROMATIC = "aromatic-element"
    DIGIT = "digit"
    BOND = "bond"
    RING_MARKER = "ring-marker"
    BRACKET_OPEN = "bracket-open"
    BRACKET_CLOSE = "bracket-close"
    PAREN_OPEN = "paren-open"
    PAREN_CLOSE = "paren-close"
    CHIRALITY = "chirality"
    CHARGE_SIGN = "charge-sign"
    HYDROGEN = "hydrogen"
    WILDCARD = "wildcard"
    DOT = "dot"
    SPECIAL = "special"


class PreTokenClass:
    BRACKET_ATOM = "bracket-atom"
    ORGANIC_ATOM = "organic-atom"
    BOND = "bond"
    RING_CLOSURE = "ring-closure"
    STRUCTURAL = "structural"


@dataclass(frozen=True, slots=True)
class Glyph:
    """Smallest lexical unit; ``start``/``end`` index the source string."""

    text: str
    kind: str
    start: int
    end: int


@dataclass(frozen=True, slots=True)
class PreToken:
    """Atom-wise unit.  ``matched`` is False for characters the scanner
    could not place; permissive callers turn those into unknown tokens."""

    text: str
    cls: str
    start: int
    end: int
    matched: bool = True


class LexError(ValueError):
    """Raised in strict mode; ``span`` locates the offending characters."""

    def __init__(self, message: str, span: tuple[int, int]):
        super().__init__(f"{message} at {span[0]}:{span[1]}")
        self.message = message
        self.span = span

    def __reduce__(self):  # plain (message, span) args survive pickling
        return type(self), (self.message, self.span)


class DecompositionError(LexError):
    """A bracket atom whose interior does not fit the bracket grammar."""


# Atom-wise alternation.  Bracket atoms first, then two-letter halogens ahead
# of their one-letter prefixes, then bare aromatics, punctuation, bonds,
# two-digit ring closures, single digits.
_ATOMWISE_RE = re.compile(
    r"\[[^\]]+\]"
    r"|Br?|Cl?|N|O|S|P|F|I"
    r"|b|c|n|o|s|p"
    r"|\(|\)|\."
    r"|=|#|-|\+|\\|/|:|~|@|\?|>|\*|\$"
    r"|%[0-9]{2}"
    r"|[0-9]"
)

_BRACKET_SYMBOL_RE = re.compile("|".join(re.escape(s) for s in BRACKET_SYMBOLS))
_CHIRAL_RE = re.compile("|".join(re.escape(s) for s in CHIRALITY_CLASSES) + "|@@|@")

_ORGANIC = frozenset(ORGANIC_SUBSET)
_BONDS = frozenset(BOND_GLYPHS)
_AROMATIC = frozenset(AROMATIC_SYMBOLS)

# Kinds for matched single-glyph structural pre-tokens.
_STRUCTURAL_KINDS = {
    "(": GlyphKind.PAREN_OPEN,
    ")": GlyphKind.PAREN_CLOSE,
    ".": GlyphKind.DOT,
    "*": GlyphKind.WILDCARD,
    "@": GlyphKind.CHIRALITY,
    "+": GlyphKind.CHARGE_SIGN,
    "?": GlyphKind.SPECIAL,
    ">": GlyphKind.SPECIAL,
}


def _classify(text: str) -> str:
    if text[0] == "[":
        return PreTokenClass.BRACKET_ATOM
    if text in _ORGANIC:
        return PreTokenClass.ORGANIC_ATOM
    if text in _BONDS:
        return PreTokenClass.BOND
    if text[0] == "%" or text.isdigit():
        return PreTokenClass.RING_CLOSURE
    return PreTokenClass.STRUCTURAL


def pretokenize_atomwise(smiles: str, strict: bool = True) -> list[PreToken]:
    """Scan a molecule into atom-wise pre-tokens.

    Strict mode (the default) raises :class:`LexError` on anything the
    grammar cannot place; permissive mode emits those characters as
    pre-tokens flagged ``matched=False`` so encoders can substitute unknown
    tokens.  An unterminated or empty bracket consumes through the end of
    the bracket text so downstream unknown-token spans stay accurate.
    """
    out: list[PreToken] = []
    i, size = 0, len(smiles)
    while i < size:
        m = _ATOMWISE_RE.match(smiles, i)
        if m is not None:
            text = m.group(0)
            out.append(PreToken(text, _classify(text), i, m.end()))
            i = m.end()
            continue
        if smiles[i] == "[":
            close = smiles.find("]", i)
            if close == -1:
                if strict:
                    raise LexError("unterminated '['", (i, size))
                out.append(
                    PreToken(smiles[i:], PreTokenClass.BRACKET_ATOM, i, size, False)
                )
                i = size
            else:  # "[]": the alternation requires non-empty content
                if strict:
                    raise LexError("empty bracket atom", (i, close + 1))
                out.append(
                    PreToken(
                        smiles[i : close + 1],
                        PreTokenClass.BRACKET_ATOM,
                        i,
                        close + 1,
                        False,
                    )
                )
                i = close + 1
        else:
            if strict:
                raise LexError(f"unexpected character {smiles[i]!r}", (i, i + 1))
            out.append(PreToken(smiles[i], PreTokenClass.STRUCTURAL, i, i + 1, False))
            i += 1
    return out


def decompose_bracket(text: str, offset: int = 0) -> list[Glyph]:
    """Split one bracket atom (brackets included) into glyphs.

    Layout follows the bracket grammar: optional isotope digits, a mandatory
    atomic symbol (longest match over elements, aromatics, and ``*``), then
    any run of chirality markers, hydrogen counts, charge signs, digits, and
    atom-class colons.  Slot order beyond the symbol is not enforced; this
    lexer splits spellings, it does not validate chemistry.  Raises
    :class:`DecompositionError` with a source span when the interior cannot
    be glyphed.
    """
    if len(text) < 3 or text[0] != "[" or text[-1] != "]":
        raise DecompositionError(
            f"not a bracket atom: {text!r}", (offset, offset + len(text))
        )
    last = len(text) - 1
    glyphs = [Glyph("[", GlyphKind.BRACKET_OPEN, offset, offset + 1)]
    i = 1
    while i < last and text[i].isdigit():
        glyphs.append(Glyph(text[i], GlyphKind.DIGIT, offset + i, offset + i + 1))
        i += 1
    m = _BRACKET_SYMBOL_RE.match(text, i)
    if m is None or m.start() >= last:
        raise DecompositionError(
            f"no atomic symbol in {text!r}", (offset + i, offset + last)
        )
    symbol = m.group(0)
    if symbol == WILDCARD:
        kind = GlyphKind.WILDCARD
    elif symbol in _AROMATIC:
        kind = GlyphKind.AROMATIC
    else:
        kind = GlyphKind.ELEMENT
    glyphs.append(Glyph(symbol, kind, offset + i, offset + m.end()))
    i = m.end()
    while i < last:
        ch = text[i]
        if ch == "@":
            cm = _CHIRAL_RE.match(text, i)
            glyphs.append(
                Glyph(cm.group(0), GlyphKind.CHIRALITY, offset + i, offset + cm.end())
            )
            i = cm.end()
        elif ch == "H":
            glyphs.append(Glyph("H", GlyphKind.HYDROGEN, offset + i, offset + i + 1))
            i += 1
        elif ch in "+-":
            glyphs.append(Glyph(ch, GlyphKind.CHARGE_SIGN, offset + i, offset + i + 1))
            i += 1
        elif ch.isdigit():
            glyphs.append(Glyph(ch, GlyphKind.DIGIT, offset + i, offset + i + 1))
            i += 1
        elif ch == ":":
            glyphs.append(Glyph(":", GlyphKind.SPECIAL, offset + i, offset + i + 1))
            i += 1
        else:
            raise DecompositionError(
                f"unexpected {ch!r} in bracket atom", (offset + i, offset + i + 1)
            )
    glyphs.append(
        Glyph("]", GlyphKind.BRACKET_CLOSE, offset + last, offset + last + 1)
    )
    return glyphs


def _simple_glyphs(pt: PreToken) -> list[Glyph]:
    """Glyphs for a matched non-bracket pre-token."""
    if pt.cls == PreTokenClass.ORGANIC_ATOM:
        kind = GlyphKind.AROMATIC if pt.text.islower() else GlyphKind.ELEMENT
        return [Glyph(pt.text, kind, pt.start, pt.end)]
    if pt.cls == PreTokenClass.BOND:
        return [Glyph(pt.text, GlyphKind.BOND, pt.start, pt.end)]
    if pt.cls == PreTokenClass.RING_CLOSURE:
        if pt.text[0] == "%":
            return [
                Glyph("%", GlyphKind.RING_MARKER, pt.start, pt.start + 1),
                Glyph(pt.text[1], GlyphKind.DIGIT, pt.start + 1, pt.start + 2),
                Glyph(pt.text[2], GlyphKind.DIGIT, pt.start + 2, pt.start + 3),
            ]
        return [Glyph(pt.text, GlyphKind.DIGIT, pt.start, pt.end)]
    return [Glyph(pt.text, _STRUCTURAL_KINDS[pt.text], pt.start, pt.end)]


def lex_groups(
    smiles: str, strict: bool = True
) -> list[tuple[PreToken, list[Glyph]]]:
    """Lex a molecule, keeping glyphs grouped under their pre-tokens.

    In permissive mode a bracket atom that fails decomposition is downgraded
    to an unmatched pre-token with no glyphs, mirroring the unmatched-
    character sentinel from stage one.  Encoders map each unmatched group to
    a single unknown token.
    """
    groups: list[tuple[PreToken, list[Glyph]]] = []
    for pt in pretokenize_atomwise(smiles, strict=strict):
        if not pt.matched:
            groups.append((pt, []))
        elif pt.cls == PreTokenClass.BRACKET_ATOM:
            try:
                groups.append((pt, decompose_bracket(pt.text, pt.start)))
            except DecompositionError:
                if strict:
                    raise
                groups.append((replace(pt, matched=False), []))
        else:
            groups.append((pt, _simple_glyphs(pt)))
    return groups


def lex_smirk(smiles: str) -> list[Glyph]:
    """Full glyph lexing of one molecule; strict, raises :class:`LexError`."""
    return [g for _, glyphs in lex_groups(smiles, strict=True) for g in glyphs]
