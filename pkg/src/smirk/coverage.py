"""Probe-set generation and out-of-vocabulary auditing.

Each generator enumerates a family of small, syntactically well-formed
molecules that exercise one axis of the bracket grammar (elements,
isotopes, charges, chirality, their product, ring closures, bonds).  The
audit encodes every probe with every tokenizer in permissive mode and
reports the percentage of probes whose encoding contains the unknown token.

Isotope mass ranges and oxidation states ship as pinned JSON tables under
``smirk/data``; they are reproducibility anchors, not authoritative
chemistry.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources

from .alphabet import AROMATIC_BRACKET_ONLY, AROMATIC_SYMBOLS, BOND_GLYPHS, ELEMENTS
from .tokenizer import Vocabulary, encode

FAILING_EXAMPLE_LIMIT = 20


@dataclass(frozen=True)
class ProbeSet:
    name: str
    molecules: tuple[str, ...]
    description: str = ""


@dataclass(frozen=True)
class AuditRow:
    tokenizer: str
    probe_set: str
    total: int
    oov_count: int
    oov_percent: float
    failing: tuple[str, ...] = ()


@dataclass(frozen=True)
class AuditReport:
    rows: tuple[AuditRow, ...]


def _data_table(filename: str, key: str) -> dict:
    path = resources.files("smirk").joinpath("data", filename)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise FileNotFoundError(f"missing data table {filename}") from exc
    return doc[key]


@lru_cache(maxsize=1)
def oxidation_states() -> dict[str, tuple[int, ...]]:
    """Pinned oxidation states per element symbol, ascending."""
    raw = _data_table("oxidation_states.json", "states")
    return {sym: tuple(sorted(states)) for sym, states in raw.items()}


@lru_cache(maxsize=1)
def isotope_ranges() -> dict[str, tuple[int, int]]:
    """Pinned inclusive mass-number range per element symbol."""
    raw = _data_table("isotope_ranges.json", "ranges")
    return {sym: (lo, hi) for sym, (lo, hi) in raw.items()}


def _charge_suffix(q: int) -> str:
    """SMILES charge spelling: bare sign at magnitude 1, sign+digits above."""
    if q == 0:
        return ""
    sign = "+" if q > 0 else "-"
    magnitude = abs(q)
    return sign if magnitude == 1 else f"{sign}{magnitude}"


def gen_elements() -> ProbeSet:
    """All 126 single-atom strings: bracketed elements plus the aromatics.

    Aromatic symbols appear bare where the organic subset allows, bracketed
    for the two that require it (se, as)."""
    probes = [f"[{sym}]" for sym in ELEMENTS]
    probes += [
        f"[{sym}]" if sym in AROMATIC_BRACKET_ONLY else sym
        for sym in AROMATIC_SYMBOLS
    ]
    return ProbeSet("elements", tuple(probes), "single atoms, every symbol")


def gen_isotopes() -> ProbeSet:
    """One bracketed probe per element per mass number in its pinned range."""
    ranges = isotope_ranges()
    probes = [
        f"[{mass}{sym}]"
        for sym in ELEMENTS
        for mass in range(ranges[sym][0], ranges[sym][1] + 1)
    ]
    return ProbeSet("isotopes", tuple(probes), "isotope-labelled single atoms")


def gen_charges() -> ProbeSet:
    """One probe per element per nonzero pinned oxidation state.

    Oxidation states stand in for plausible charges; the zero state carries
    no charge glyph and is already covered by the element probes."""
    states = oxidation_states()
    probes = [
        f"[{sym}{_charge_suffix(q)}]"
        for sym in ELEMENTS
        for q in states[sym]
        if q != 0
    ]
    return ProbeSet("charges", tuple(probes), "charged single atoms")


def gen_chiral() -> ProbeSet:
    """@ and @@ probes for every symbol; the rarer chirality classes are
    deliberately excluded."""
    symbols = ELEMENTS + AROMATIC_SYMBOLS
    probes = [f"[{sym}{mark}]" for sym in symbols for mark in ("@", "@@")]
    return ProbeSet("chirality", tuple(probes), "tetrahedral chirality marks")


def gen_combined() -> ProbeSet:
    """Cartesian product of isotope, chirality, and charge axes per element.

    Bracket slot order: isotope, symbol, chirality, charge.  The zero
    oxidation state contributes the no-charge spelling, so the axis sizes
    multiply exactly."""
    ranges = isotope_ranges()
    states = oxidation_states()
    probes = []
    for sym in ELEMENTS:
        lo, hi = ranges[sym]
        for mass in range(lo, hi + 1):
            for mark in ("@", "@@"):
                for q in states[sym]:
                    probes.append(f"[{mass}{sym}{mark}{_charge_suffix(q)}]")
    return ProbeSet("combined", tuple(probes), "isotope x chirality x charge")


def gen_rings() -> ProbeSet:
    """Benzene spelled with every ring-bond number: digits 1-9 and the
    two-digit forms %00-%99, 109 probes."""
    probes = [f"c{d}ccccc{d}" for d in "123456789"]
    probes += [f"c%{n:02d}ccccc%{n:02d}" for n in range(100)]
    return ProbeSet("rings", tuple(probes), "ring-closure numbering")


def gen_bonds() -> ProbeSet:
    """Two carbons joined by each bond symbol, plus the disconnection."""
    probes = [f"C{bond}C" for bond in BOND_GLYPHS] + ["C.C"]
    return ProbeSet("bonds", tuple(probes), "explicit bonds and dot")


def all_probe_sets() -> list[ProbeSet]:
    """Every generated set, in reporting order."""
    return [
        gen_elements(),
        gen_isotopes(),
        gen_charges(),
        gen_chiral(),
        gen_combined(),
        gen_rings(),
        gen_bonds(),
    ]


def bracket_combinations(
    isotopes: int,
    oxidation_states: int,
    aromaticity: int,
    chirality: int,
    hcounts: int,
) -> int:
    """Size of a closed vocabulary that spells every bracket-atom variant
    of one element as its own token: the plain product of the axis counts."""
    return isotopes * oxidation_states * aromaticity * chirality * hcounts


def audit(
    tokenizers: list[tuple[str, Vocabulary]],
    sets: list[ProbeSet],
) -> AuditReport:
    """Encode every probe with every tokenizer and count unknown emissions.

    Permissive encoding throughout; a probe fails when any token of its
    encoding is the unknown token.  Rows cover the full tokenizer-by-set
    grid in argument order.
    """
    rows = []
    for name, vocab in tokenizers:
        for probe_set in sets:
            failing: list[str] = []
            oov = 0
            for molecule in probe_set.molecules:
                if encode(vocab, molecule).has_unknown:
                    oov += 1
                    if len(failing) < FAILING_EXAMPLE_LIMIT:
                        failing.append(molecule)
            total = len(probe_set.molecules)
            percent = 100.0 * oov / total if total else 0.0
            rows.append(
                AuditRow(name, probe_set.name, total, oov, percent, tuple(failing))
            )
    return AuditReport(tuple(rows))


def report_to_csv(report: AuditReport) -> str:
    """Delimited form: tokenizer, probe_set, total, oov_count, oov_percent."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tokenizer", "probe_set", "total", "oov_count", "oov_percent"])
    for row in report.rows:
        writer.writerow(
            [row.tokenizer, row.probe_set, row.total, row.oov_count,
             f"{row.oov_percent:.6f}"]
        )
    return buf.getvalue()


def report_to_json(report: AuditReport) -> str:
    doc = {"rows": [asdict(row) | {"failing": list(row.failing)} for row in report.rows]}
    return json.dumps(doc, ensure_ascii=False, indent=1) + "\n"


def write_probes(probe_set: ProbeSet, path: str) -> None:
    """Plain SMILES line file, one probe per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for molecule in probe_set.molecules:
            handle.write(molecule + "\n")
