"""Open-vocabulary SMILES tokenization toolkit.

Four tokenization schemes (glyph-level ``smirk``, ``gpe`` merges on top of
it, atom-wise, character), OpenSMILES coverage auditing, add-one n-gram
language modelling with bidirectional masking analysis, and the usage
statistics that tie them together.
"""

from .alphabet import AROMATIC_SYMBOLS, ELEMENTS
from .corpus import (
    CorpusError,
    CorpusHandle,
    SplitSpec,
    open_corpus,
    split_corpus,
    write_splits,
)
from .coverage import (
    AuditReport,
    ProbeSet,
    all_probe_sets,
    audit,
    bracket_combinations,
    gen_bonds,
    gen_charges,
    gen_chiral,
    gen_combined,
    gen_elements,
    gen_isotopes,
    gen_rings,
)
from .glyphs import (
    DecompositionError,
    Glyph,
    GlyphKind,
    LexError,
    PreToken,
    PreTokenClass,
    decompose_bracket,
    lex_groups,
    lex_smirk,
    pretokenize_atomwise,
)
from .gpe import (
    GpeResult,
    apply_merges,
    collect_words,
    merge_word_counts,
    split_words,
    train_from_words,
    train_gpe,
)
from .metrics import (
    RegressionFit,
    TokenStats,
    fertility,
    fit_fertility_loss,
    rare_token_threshold,
    token_stats,
)
from .ngram import (
    NGramModel,
    bidirectional_distribution,
    count_grams,
    evaluate,
    fit,
    info_loss,
    load_ngram,
    log_odds,
    log_odds_grid,
    mask_positions,
    merge_gram_counts,
    model_from_counts,
    prob_next,
    save_ngram,
    sequence_nats,
)
from .tokenizer import (
    Encoding,
    OOVError,
    Vocabulary,
    VocabularyError,
    build_char_vocabulary,
    build_smirk_vocabulary,
    builtin_vocabulary,
    decode,
    encode,
    load_vocabulary,
    moses_like_vocabulary,
    save_vocabulary,
    vocabulary_from_corpus,
)

__version__ = "0.1.0"

__all__ = [
    "AROMATIC_SYMBOLS",
    "ELEMENTS",
    "AuditReport",
    "CorpusError",
    "CorpusHandle",
    "DecompositionError",
    "Encoding",
    "Glyph",
    "GlyphKind",
    "GpeResult",
    "LexError",
    "NGramModel",
    "OOVError",
    "PreToken",
    "PreTokenClass",
    "ProbeSet",
    "RegressionFit",
    "SplitSpec",
    "TokenStats",
    "Vocabulary",
    "VocabularyError",
    "all_probe_sets",
    "apply_merges",
    "audit",
    "bidirectional_distribution",
    "bracket_combinations",
    "build_char_vocabulary",
    "build_smirk_vocabulary",
    "builtin_vocabulary",
    "collect_words",
    "count_grams",
    "decode",
    "decompose_bracket",
    "encode",
    "evaluate",
    "fertility",
    "fit",
    "fit_fertility_loss",
    "gen_bonds",
    "gen_charges",
    "gen_chiral",
    "gen_combined",
    "gen_elements",
    "gen_isotopes",
    "gen_rings",
    "info_loss",
    "lex_groups",
    "lex_smirk",
    "load_ngram",
    "load_vocabulary",
    "log_odds",
    "log_odds_grid",
    "mask_positions",
    "merge_gram_counts",
    "merge_word_counts",
    "model_from_counts",
    "moses_like_vocabulary",
    "open_corpus",
    "pretokenize_atomwise",
    "prob_next",
    "rare_token_threshold",
    "save_ngram",
    "save_vocabulary",
    "sequence_nats",
    "split_corpus",
    "split_words",
    "token_stats",
    "train_from_words",
    "train_gpe",
    "vocabulary_from_corpus",
    "write_splits",
]
