"""Symbol tables shared by the lexer, vocabularies, and probe generators.

Everything here is a plain tuple or frozenset so the rest of the package can
treat the alphabet as immutable.  Element order follows atomic number; that
order is load-bearing because vocabulary ids are assigned from it.
"""

from __future__ import annotations

# 118 element symbols indexed by atomic number - 1.
ELEMENTS: tuple[str, ...] = (
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne",
    "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr",
    "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb",
    "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm",
    "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds",
    "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
)

ATOMIC_NUMBERS: dict[str, int] = {sym: z for z, sym in enumerate(ELEMENTS, start=1)}

# Aromatic atom symbols.  All eight are legal inside brackets; only the
# single-letter six may appear bare in the organic subset.
AROMATIC_SYMBOLS: tuple[str, ...] = ("b", "c", "n", "o", "p", "s", "se", "as")
AROMATIC_ORGANIC: frozenset[str] = frozenset({"b", "c", "n", "o", "s", "p"})
AROMATIC_BRACKET_ONLY: frozenset[str] = frozenset({"se", "as"})

# Organic-subset symbols writable without brackets, aliphatic then aromatic.
ORGANIC_SUBSET: tuple[str, ...] = (
    "B", "C", "N", "O", "S", "P", "F", "Cl", "Br", "I",
    "b", "c", "n", "o", "s", "p",
)

# Bond glyphs.  ":" is the aromatic bond, "$" the quadruple bond, "~" the
# wildcard bond; "/" and "\" carry cis/trans configuration.
BOND_GLYPHS: tuple[str, ...] = ("-", "=", "#", "$", ":", "/", "\\", "~")

# Chirality markers ordered longest-first so regex alternation prefers
# "@@" over "@" and class markers over both.
CHIRALITY_CLASSES: tuple[str, ...] = ("@TH", "@AL", "@SP", "@TB", "@OH")
CHIRALITY_GLYPHS: tuple[str, ...] = CHIRALITY_CLASSES + ("@@", "@")

DIGITS: tuple[str, ...] = tuple("0123456789")

# Structural glyphs that are neither atoms, bonds, nor digits.
OPEN_PAREN = "("
CLOSE_PAREN = ")"
DOT = "."
OPEN_BRACKET = "["
CLOSE_BRACKET = "]"
PERCENT = "%"
WILDCARD = "*"

# Symbols legal in the element slot of a bracket atom, longest-first.
BRACKET_SYMBOLS: tuple[str, ...] = tuple(
    sorted(ELEMENTS + AROMATIC_SYMBOLS + (WILDCARD,), key=lambda s: (-len(s), s))
)
