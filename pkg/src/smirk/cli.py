"""Command-line front end.

Subcommands: tokenize, decode, vocab, train-gpe, audit, ngram
(train/eval/info-loss), stats, split.  Report-style subcommands write
delimited tables; when the table goes to a file, a JSON sibling and a
rendered PNG figure land next to it (suppress with --no-figures).

Exit codes: 0 success, 2 strict-mode out-of-vocabulary, 64 usage error,
74 unreadable or malformed input.  All outputs are deterministic functions
of flags and inputs; SMIRK_THREADS sets the --threads default.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import multiprocessing
import os
import sys
from collections import Counter
from pathlib import Path

from . import coverage as cov
from . import gpe as gpe_mod
from . import metrics as met
from . import ngram as ng
from .corpus import CorpusError, SplitSpec, open_corpus, write_manifest, write_splits
from .glyphs import LexError
from .tokenizer import (
    OOVError,
    Vocabulary,
    VocabularyError,
    build_char_vocabulary,
    build_smirk_vocabulary,
    builtin_vocabulary,
    decode,
    dumps_vocabulary,
    encode,
    load_vocabulary,
    save_vocabulary,
    vocabulary_from_corpus,
)

EXIT_OK = 0
EXIT_OOV = 2
EXIT_USAGE = 64
EXIT_IO = 74

BUILTIN_NAMES = ("smirk", "char", "moses-like")

PROBE_GENERATORS = {
    "elements": cov.gen_elements,
    "isotopes": cov.gen_isotopes,
    "charges": cov.gen_charges,
    "chirality": cov.gen_chiral,
    "combined": cov.gen_combined,
    "rings": cov.gen_rings,
    "bonds": cov.gen_bonds,
}

TOKENIZE_SCHEMA = (
    'JSONL schema (--json): {"smiles": str, "tokens": [str], "ids": [int], '
    '"offsets": [[start, end]], "unk_spans": [[start, end]]}'
)


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """argparse with the scriptable usage-error exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _resolve_vocab(vocab_arg: str | None, scheme_arg: str | None) -> Vocabulary:
    """Vocabulary from --vocab (path or builtin name) and/or --scheme."""
    if vocab_arg:
        if vocab_arg in BUILTIN_NAMES and not os.path.exists(vocab_arg):
            vocab = builtin_vocabulary(vocab_arg)
        else:
            vocab = load_vocabulary(vocab_arg)
        if scheme_arg and vocab.scheme != scheme_arg:
            raise UsageError(
                f"--scheme {scheme_arg} conflicts with vocabulary scheme "
                f"{vocab.scheme!r}"
            )
        return vocab
    scheme = scheme_arg or "smirk"
    if scheme == "smirk":
        return build_smirk_vocabulary()
    if scheme == "char":
        return build_char_vocabulary()
    raise UsageError(
        f"scheme {scheme!r} has no stock roster; pass --vocab "
        "(a file, or the builtin name 'moses-like')"
    )


def _input_lines(path: str | None):
    """Molecules from a corpus file, or stdin when path is absent or '-'."""
    if path in (None, "-"):
        return (line for raw in sys.stdin if (line := raw.strip()))
    return iter(open_corpus(path))


@contextlib.contextmanager
def _output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            yield handle


def _sibling(out: str | None, suffix: str) -> str | None:
    """Path next to a file output; None when writing to stdout."""
    if out in (None, "-"):
        return None
    return str(Path(out).with_suffix(suffix))


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        try:
            n = int(os.environ.get("SMIRK_THREADS", "1"))
        except ValueError:
            n = 1
    if n < 1:
        raise UsageError("--threads must be >= 1")
    return n


def _format_encoding(vocab: Vocabulary, mol: str, as_json: bool, strict: bool) -> str:
    enc = encode(vocab, mol, strict=strict)
    if not as_json:
        return "\t".join(enc.tokens)
    doc = {
        "smiles": enc.text,
        "tokens": list(enc.tokens),
        "ids": list(enc.ids),
        "offsets": [list(span) for span in enc.offsets],
        "unk_spans": [list(span) for span in enc.unk_spans],
    }
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":"))


_POOL_STATE: dict = {}


def _pool_init(vocab: Vocabulary, as_json: bool, strict: bool) -> None:
    _POOL_STATE["vocab"] = vocab
    _POOL_STATE["json"] = as_json
    _POOL_STATE["strict"] = strict


def _pool_encode(mol: str) -> str:
    return _format_encoding(
        _POOL_STATE["vocab"], mol, _POOL_STATE["json"], _POOL_STATE["strict"]
    )


def cmd_tokenize(args) -> int:
    vocab = _resolve_vocab(args.vocab, args.scheme)
    threads = _threads(args)
    lines = _input_lines(args.input)
    with _output(args.out) as sink:
        if threads > 1:
            with multiprocessing.Pool(
                threads, initializer=_pool_init,
                initargs=(vocab, args.json, args.strict),
            ) as pool:
                for rendered in pool.imap(_pool_encode, lines, chunksize=256):
                    sink.write(rendered + "\n")
        else:
            for mol in lines:
                sink.write(_format_encoding(vocab, mol, args.json, args.strict) + "\n")
    return EXIT_OK


def cmd_decode(args) -> int:
    vocab = _resolve_vocab(args.vocab, args.scheme)
    with _output(args.out) as sink:
        for lineno, line in enumerate(_input_lines(args.input), start=1):
            try:
                ids = [int(part) for part in line.split()]
            except ValueError as exc:
                raise CorpusError(f"line {lineno}: ids must be integers ({exc})")
            try:
                sink.write(decode(vocab, ids) + "\n")
            except VocabularyError as exc:
                raise CorpusError(f"line {lineno}: {exc}")
    return EXIT_OK


def cmd_vocab(args) -> int:
    if args.from_corpus:
        if not args.scheme:
            raise UsageError("--from-corpus requires --scheme")
        vocab = vocabulary_from_corpus(args.scheme, open_corpus(args.from_corpus))
    else:
        vocab = builtin_vocabulary(args.builtin)
    if args.out in (None, "-"):
        sys.stdout.write(dumps_vocabulary(vocab))
    else:
        save_vocabulary(vocab, args.out)
        print(f"wrote {vocab.scheme} vocabulary ({vocab.size} ids) to {args.out}")
    return EXIT_OK


def cmd_train_gpe(args) -> int:
    base = _resolve_vocab(args.base_vocab, None)
    if base.scheme not in ("smirk", "gpe") or base.merges:
        raise UsageError("--base-vocab must be a glyph vocabulary without merges")
    if args.target_size <= base.base_size:
        raise UsageError(
            f"--target-size {args.target_size} does not exceed the base "
            f"roster ({base.base_size})"
        )
    words = gpe_mod.collect_words(open_corpus(args.corpus), base)
    result = gpe_mod.train_from_words(words, base, args.target_size, args.min_freq)
    save_vocabulary(result.vocabulary, args.out)
    print(
        f"learned {len(result.vocabulary.merges)} merges "
        f"(stop: {result.stop_reason}); vocabulary size "
        f"{result.vocabulary.size}; wrote {args.out}"
    )
    return EXIT_OK


def _audit_tokenizers(specs: list[str]) -> list[tuple[str, Vocabulary]]:
    out: list[tuple[str, Vocabulary]] = []
    for spec in specs:
        if spec in BUILTIN_NAMES and not os.path.exists(spec):
            out.append((spec, builtin_vocabulary(spec)))
        elif os.path.isdir(spec):
            paths = sorted(Path(spec).glob("*.json"))
            if not paths:
                raise UsageError(f"no *.json vocabularies under {spec}")
            out.extend((p.stem, load_vocabulary(str(p))) for p in paths)
        else:
            out.append((Path(spec).stem, load_vocabulary(spec)))
    return out


def cmd_audit(args) -> int:
    tokenizers = _audit_tokenizers(args.vocabs)
    sets: list[cov.ProbeSet] = []
    selection = list(args.probe_sets)
    if "all" in selection:
        sets.extend(gen() for gen in PROBE_GENERATORS.values())
    else:
        for name in selection:
            if name == "none":
                continue
            if name not in PROBE_GENERATORS:
                raise UsageError(
                    f"unknown probe set {name!r} "
                    f"(choose from {', '.join(PROBE_GENERATORS)}, all, none)"
                )
            sets.append(PROBE_GENERATORS[name]())
    for extra in args.extra_set or []:
        molecules = tuple(open_corpus(extra))
        if not molecules:
            raise UsageError(f"probe file {extra} is empty")
        sets.append(cov.ProbeSet(Path(extra).stem, molecules, f"file {extra}"))
    if not sets:
        raise UsageError("empty probe selection")
    report = cov.audit(tokenizers, sets)
    with _output(args.out) as sink:
        sink.write(cov.report_to_csv(report))
    json_path = _sibling(args.out, ".json")
    if json_path:
        with open(json_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(cov.report_to_json(report))
    fig_path = _sibling(args.out, ".png")
    if fig_path and not args.no_figures:
        from .plotting import save_audit_figure

        save_audit_figure(report, fig_path)
    return EXIT_OK


def cmd_ngram_train(args) -> int:
    vocab = _resolve_vocab(args.vocab, args.scheme)
    encodings = (encode(vocab, mol) for mol in open_corpus(args.corpus))
    model = ng.fit(encodings, args.order, vocab)
    ng.save_ngram(model, args.model)
    if args.json_mirror:
        ng.save_ngram_json(model, args.json_mirror)
    print(
        f"order-{model.order} model: {model.total} windows, "
        f"{len(model.tables[model.order])} distinct {model.order}-grams, "
        f"V={model.vocab_size}; wrote {args.model}"
    )
    return EXIT_OK


def _load_model(path: str, vocab: Vocabulary) -> ng.NGramModel:
    model = ng.load_ngram(path, vocab.bos_id, vocab.eos_id)
    if model.vocab_size != vocab.size:
        raise UsageError(
            f"model {path} was trained with V={model.vocab_size}, but the "
            f"given vocabulary has V={vocab.size}"
        )
    return model


def cmd_ngram_eval(args) -> int:
    vocab = _resolve_vocab(args.vocab, args.scheme)
    rows = []
    for model_path in args.model:
        model = _load_model(model_path, vocab)
        summary = ng.evaluate(
            model, (encode(vocab, mol) for mol in open_corpus(args.corpus))
        )
        rows.append(
            {
                "model": Path(model_path).stem,
                "order": model.order,
                "molecules": summary.molecules,
                "predicted_tokens": summary.predicted_tokens,
                "total_nats": summary.total_nats,
                "nats_per_molecule": summary.nats_per_molecule,
                "nats_per_token": summary.nats_per_token,
            }
        )
    with _output(args.out) as sink:
        sink.write(
            "model,order,molecules,predicted_tokens,total_nats,"
            "nats_per_molecule,nats_per_token\n"
        )
        for r in rows:
            sink.write(
                f"{r['model']},{r['order']},{r['molecules']},"
                f"{r['predicted_tokens']},{r['total_nats']:.6f},"
                f"{r['nats_per_molecule']:.6f},{r['nats_per_token']:.6f}\n"
            )
    fig_path = _sibling(args.out, ".png")
    if fig_path and not args.no_figures:
        from .plotting import save_eval_figure

        save_eval_figure(rows, fig_path)
    return EXIT_OK


def cmd_ngram_info_loss(args) -> int:
    vocab = _resolve_vocab(args.vocab, args.scheme)
    mask_vocab = _resolve_vocab(args.mask_tokenizer, None)
    model = _load_model(args.model, vocab)
    want_odds = bool(args.log_odds) or not args.no_figures
    rows = []
    for mol in open_corpus(args.corpus):
        ref = encode(vocab, mol)
        mask = ng.mask_positions(ref, encode(mask_vocab, mol).unk_spans)
        row = {
            "smiles": mol,
            "tokens": len(ref),
            "masked": sorted(mask),
            "info_loss_nats": ng.info_loss(model, ref.ids, mask),
        }
        if want_odds:
            grid = ng.log_odds_grid(model, ref.ids, mask)
            row["log_odds"] = grid
            row["odds_track"] = [g[t] for g, t in zip(grid, ref.ids)]
        rows.append(row)
    with _output(args.out) as sink:
        sink.write("molecule,tokens,masked_count,info_loss_nats\n")
        for r in rows:
            sink.write(
                f"{r['smiles']},{r['tokens']},{len(r['masked'])},"
                f"{r['info_loss_nats']:.9f}\n"
            )
    if rows:
        mean = sum(r["info_loss_nats"] for r in rows) / len(rows)
        print(
            f"mean info loss {mean:.6f} nats over {len(rows)} molecule(s)",
            file=sys.stderr,
        )
    if args.log_odds:
        with open(args.log_odds, "w", encoding="utf-8", newline="\n") as handle:
            for r in rows:
                handle.write(
                    json.dumps(
                        {
                            "smiles": r["smiles"],
                            "mask": r["masked"],
                            "info_loss_nats": r["info_loss_nats"],
                            "log_odds": r["log_odds"],
                        },
                        ensure_ascii=False,
                        separators=(",", ":"),
                    )
                    + "\n"
                )
    fig_path = _sibling(args.out, ".png")
    if fig_path and not args.no_figures and rows:
        from .plotting import save_info_loss_figure

        save_info_loss_figure(rows, fig_path)
    return EXIT_OK


def cmd_stats(args) -> int:
    vocab = _resolve_vocab(args.vocab, args.scheme)
    molecules = 0
    counter: Counter = Counter()
    for mol in open_corpus(args.corpus):
        molecules += 1
        counter.update(encode(vocab, mol).ids)
    if molecules == 0:
        raise UsageError(f"corpus {args.corpus} is empty")
    stats = met.stats_from_counts(counter, vocab.size)
    with _output(args.out) as sink:
        sink.write(met.stats_to_csv(stats, vocab))
    json_path = _sibling(args.out, ".json")
    if json_path:
        with open(json_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(met.stats_to_json(stats))
    fig_path = _sibling(args.out, ".png")
    if fig_path and not args.no_figures:
        from .plotting import save_stats_figure

        save_stats_figure(stats, vocab, fig_path)
    print(
        f"molecules={molecules} tokens={stats.total_tokens} "
        f"fertility={stats.total_tokens / molecules:.4f} "
        f"entropy={stats.entropy:.4f} nats "
        f"({stats.tokens_used}/{stats.vocab_size} ids used)",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_split(args) -> int:
    try:
        fractions = tuple(float(f) for f in args.fractions.split(","))
        spec = SplitSpec(fractions, args.seed)  # type: ignore[arg-type]
    except ValueError as exc:
        raise UsageError(str(exc))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    suffix = ".smi.gz" if args.corpus.endswith(".gz") else ".smi"
    paths = {part: str(out_dir / f"{part}{suffix}")
             for part in ("train", "validation", "test")}
    manifest = write_splits(open_corpus(args.corpus), spec, paths)
    write_manifest(manifest, str(out_dir / "manifest.json"))
    counts = manifest["counts"]
    print(
        f"train={counts['train']} validation={counts['validation']} "
        f"test={counts['test']} → {out_dir}"
    )
    return EXIT_OK


def _add_vocab_flags(parser, schemes=("smirk", "atomwise", "char", "gpe")):
    parser.add_argument(
        "--vocab",
        help="vocabulary JSON file, or a builtin name: " + ", ".join(BUILTIN_NAMES),
    )
    parser.add_argument(
        "--scheme", choices=schemes,
        help="tokenization scheme (default smirk when --vocab is absent)",
    )


def build_parser() -> Parser:
    parser = Parser(
        prog="smirk",
        description="Open-vocabulary SMILES tokenization toolkit.",
        epilog="Exit codes: 0 ok, 2 strict-mode OOV, 64 usage, 74 I/O.",
    )
    try:
        from importlib.metadata import version

        pkg_version = version("smirk")
    except Exception:
        pkg_version = "unknown"
    parser.add_argument("--version", action="version", version=f"smirk {pkg_version}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser(
        "tokenize", help="encode molecules to tokens",
        description="Read SMILES lines, write one encoding per line "
                    "(tab-separated surfaces, or JSONL with --json).",
        epilog=TOKENIZE_SCHEMA,
    )
    _add_vocab_flags(p)
    p.add_argument("--input", help="corpus file (default stdin)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--json", action="store_true", help="JSONL with ids and offsets")
    p.add_argument("--strict", action="store_true",
                   help="exit 2 on the first out-of-vocabulary unit")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default $SMIRK_THREADS or 1); "
                        "output order is preserved")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser(
        "decode", help="token ids back to SMILES",
        description="Each input line is whitespace-separated token ids; "
                    "writes the concatenated surfaces.",
    )
    _add_vocab_flags(p)
    p.add_argument("--input", help="id file (default stdin)")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser(
        "vocab", help="export a vocabulary file",
        description="Write a builtin vocabulary, or enroll the units "
                    "observed in a corpus.",
    )
    group = p.add_mutually_exclusive_group()
    group.add_argument("--builtin", choices=BUILTIN_NAMES, default="smirk")
    group.add_argument("--from-corpus", metavar="FILE",
                       help="enroll units observed in FILE")
    p.add_argument("--scheme", choices=("smirk", "atomwise", "char"),
                   help="unit kind for --from-corpus")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser(
        "train-gpe", help="learn glyph-pair merges",
        description="Train merge rules over a corpus and write the merged "
                    "vocabulary file.",
    )
    p.add_argument("--corpus", required=True)
    p.add_argument("--base-vocab", default="smirk",
                   help="glyph vocabulary to merge over (default builtin smirk)")
    p.add_argument("--target-size", type=int, required=True,
                   help="stop when the vocabulary reaches this many ids")
    p.add_argument("--min-freq", type=int, default=2,
                   help="stop when the best pair occurs fewer times (default 2)")
    p.add_argument("--out", required=True, help="vocabulary file to write")
    p.set_defaults(func=cmd_train_gpe)

    p = sub.add_parser(
        "audit", help="out-of-vocabulary audit over probe sets",
        description="Encode every probe with every tokenizer; report the "
                    "percentage of probes containing the unknown token.",
        epilog="CSV columns: tokenizer, probe_set, total, oov_count, "
               "oov_percent.  A JSON report and a PNG figure are written "
               "next to --out.",
    )
    p.add_argument("--vocabs", nargs="+", required=True,
                   help="vocabulary files, directories of them, or builtin "
                        "names")
    p.add_argument("--probe-sets", nargs="+", default=["all"],
                   help=f"names from: {', '.join(PROBE_GENERATORS)} "
                        "(default all; 'none' selects nothing)")
    p.add_argument("--extra-set", action="append", metavar="FILE",
                   help="additional probe set from a SMILES line file")
    p.add_argument("--out", help="report CSV (default stdout)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("ngram", help="n-gram model training and evaluation")
    ngram_sub = p.add_subparsers(dest="ngram_command", required=True,
                                 parser_class=Parser)

    q = ngram_sub.add_parser(
        "train", help="count a model and write it",
        description="Encode the corpus and count an add-one n-gram model "
                    "(NGM1 binary; optional JSON mirror).",
    )
    _add_vocab_flags(q)
    q.add_argument("--corpus", required=True)
    q.add_argument("--order", type=int, required=True)
    q.add_argument("--model", required=True, help="NGM1 file to write")
    q.add_argument("--json-mirror", help="also write the tables as JSON")
    q.set_defaults(func=cmd_ngram_train)

    q = ngram_sub.add_parser(
        "eval", help="held-out cross-entropy",
        description="Evaluate one or more models on a corpus.",
        epilog="CSV columns: model, order, molecules, predicted_tokens, "
               "total_nats, nats_per_molecule, nats_per_token.",
    )
    _add_vocab_flags(q)
    q.add_argument("--model", nargs="+", required=True)
    q.add_argument("--corpus", required=True)
    q.add_argument("--out", help="report CSV (default stdout)")
    q.add_argument("--no-figures", action="store_true")
    q.set_defaults(func=cmd_ngram_eval)

    q = ngram_sub.add_parser(
        "info-loss", help="KL cost of masking unknown-token spans",
        description="Mask the reference tokens that another tokenizer "
                    "cannot represent and report the information lost "
                    "under the bidirectional model.",
        epilog="CSV columns: molecule, tokens, masked_count, "
               "info_loss_nats.  --log-odds writes JSONL rows "
               '{"smiles", "mask", "info_loss_nats", "log_odds"}.',
    )
    _add_vocab_flags(q)
    q.add_argument("--model", required=True)
    q.add_argument("--corpus", required=True)
    q.add_argument("--mask-tokenizer", required=True,
                   help="vocabulary whose unknown spans define the mask "
                        "(path or builtin name)")
    q.add_argument("--out", help="report CSV (default stdout)")
    q.add_argument("--log-odds", help="per-position log-odds JSONL file")
    q.add_argument("--no-figures", action="store_true")
    q.set_defaults(func=cmd_ngram_info_loss)

    p = sub.add_parser(
        "stats", help="token usage statistics",
        description="Frequency, information, and entropy of token usage "
                    "over a corpus.",
        epilog="CSV columns: rank, token, count, frequency, "
               "information_nats.  The JSON sibling holds entropy, "
               "normalized_entropy, tokens_used, vocab_size, total_tokens.",
    )
    _add_vocab_flags(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", help="report CSV (default stdout)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser(
        "split", help="deterministic train/validation/test split",
        description="Assign molecules by seeded hash and write the three "
                    "parts plus manifest.json {seed, fractions, counts}.",
    )
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fractions", default="0.8,0.1,0.1",
                   help="train,validation,test (default 0.8,0.1,0.1)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"smirk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OOVError, LexError) as exc:
        print(f"smirk: {exc}", file=sys.stderr)
        return EXIT_OOV
    except BrokenPipeError:
        return EXIT_OK
    except (VocabularyError, ng.NgramFormatError, CorpusError, OSError) as exc:
        print(f"smirk: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
