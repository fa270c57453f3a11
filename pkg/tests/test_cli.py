"""End-to-end command-line tests, driven in process through main()."""

import gzip
import io
import json
import sys

import pytest

from smirk.cli import EXIT_IO, EXIT_OK, EXIT_OOV, EXIT_USAGE, main
from smirk.tokenizer import load_vocabulary


def run(argv, capsys, monkeypatch=None, stdin=""):
    if monkeypatch is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_lines(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


class TestTokenize:
    def test_glyph_example(self, capsys, monkeypatch):
        code, out, _ = run(["tokenize", "--scheme", "smirk"], capsys,
                           monkeypatch, stdin="OC[C@@H][OH]\n")
        assert code == EXIT_OK
        assert out == "O\tC\t[\tC\t@@\tH\t]\t[\tO\tH\t]\n"

    def test_empty_stdin(self, capsys, monkeypatch):
        code, out, err = run(["tokenize"], capsys, monkeypatch, stdin="")
        assert code == EXIT_OK
        assert out == "" and err == ""

    def test_json_schema(self, capsys, monkeypatch):
        code, out, _ = run(
            ["tokenize", "--vocab", "moses-like", "--json"],
            capsys, monkeypatch, stdin="C[F-]\n",
        )
        assert code == EXIT_OK
        doc = json.loads(out)
        assert set(doc) == {"smiles", "tokens", "ids", "offsets", "unk_spans"}
        assert doc["smiles"] == "C[F-]"
        assert doc["tokens"][0] == "C"
        assert doc["unk_spans"] == [[1, 5]]
        assert doc["offsets"][0] == [0, 1]

    def test_file_roundtrip(self, tmp_path, capsys):
        src = write_lines(tmp_path, "in.smi", ["CCO", "c1ccccc1"])
        out_path = tmp_path / "out.txt"
        code, _, _ = run(
            ["tokenize", "--input", src, "--out", str(out_path)], capsys)
        assert code == EXIT_OK
        lines = out_path.read_text().splitlines()
        assert lines[0] == "C\tC\tO"
        assert lines[1] == "c\t1\tc\tc\tc\tc\tc\t1"

    def test_strict_oov_exits_two(self, capsys, monkeypatch):
        code, _, err = run(
            ["tokenize", "--vocab", "moses-like", "--strict"],
            capsys, monkeypatch, stdin="[Cu+3]\n",
        )
        assert code == EXIT_OOV
        assert "[Cu+3]" in err

    def test_strict_lex_error_exits_two(self, capsys, monkeypatch):
        code, _, err = run(["tokenize", "--strict"], capsys, monkeypatch,
                           stdin="C!C\n")
        assert code == EXIT_OOV
        assert "1" in err  # offending span reported

    def test_char_scheme(self, capsys, monkeypatch):
        code, out, _ = run(["tokenize", "--scheme", "char"], capsys,
                           monkeypatch, stdin="[Au]\n")
        assert code == EXIT_OK
        assert out == "[\tA\tu\t]\n"

    def test_scheme_vocab_conflict(self, capsys, monkeypatch):
        code, _, err = run(
            ["tokenize", "--vocab", "moses-like", "--scheme", "char"],
            capsys, monkeypatch, stdin="C\n",
        )
        assert code == EXIT_USAGE
        assert "conflicts" in err

    def test_threads_preserve_order(self, tmp_path, capsys):
        mols = [f"C{'C' * (i % 9)}O" for i in range(60)]
        src = write_lines(tmp_path, "in.smi", mols)
        one = tmp_path / "one.txt"
        two = tmp_path / "two.txt"
        assert run(["tokenize", "--input", src, "--out", str(one),
                    "--threads", "1"], capsys)[0] == EXIT_OK
        assert run(["tokenize", "--input", src, "--out", str(two),
                    "--threads", "2"], capsys)[0] == EXIT_OK
        assert one.read_text() == two.read_text()

    def test_threads_env_default(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("SMIRK_THREADS", "2")
        src = write_lines(tmp_path, "in.smi", ["CCO", "CNC"])
        out_path = tmp_path / "out.txt"
        code, _, _ = run(["tokenize", "--input", src, "--out", str(out_path)],
                         capsys)
        assert code == EXIT_OK
        assert out_path.read_text() == "C\tC\tO\nC\tN\tC\n"

    def test_threads_zero_rejected(self, capsys, monkeypatch):
        code, _, err = run(["tokenize", "--threads", "0"], capsys,
                           monkeypatch, stdin="C\n")
        assert code == EXIT_USAGE


class TestDecode:
    def test_ids_to_smiles(self, capsys, monkeypatch):
        # 53=O 51=C under the stock glyph roster
        code, out, _ = run(["decode"], capsys, monkeypatch, stdin="53 51\n")
        assert code == EXIT_OK
        assert out == "OC\n"

    def test_tokenize_decode_roundtrip(self, tmp_path, capsys):
        src = write_lines(tmp_path, "in.smi", ["c1ccccc1", "[13CH4]"])
        enc_path = tmp_path / "enc.jsonl"
        run(["tokenize", "--input", src, "--out", str(enc_path), "--json"],
            capsys)
        ids_path = write_lines(
            tmp_path, "ids.txt",
            [" ".join(map(str, json.loads(line)["ids"]))
             for line in enc_path.read_text().splitlines()],
        )
        code, out, _ = run(["decode", "--input", ids_path], capsys)
        assert code == EXIT_OK
        assert out.splitlines() == ["c1ccccc1", "[13CH4]"]

    def test_non_integer_ids(self, capsys, monkeypatch):
        code, _, err = run(["decode"], capsys, monkeypatch, stdin="53 potato\n")
        assert code == EXIT_IO

    def test_out_of_range_id(self, capsys, monkeypatch):
        code, _, err = run(["decode"], capsys, monkeypatch, stdin="99999\n")
        assert code == EXIT_IO


class TestVocab:
    def test_builtin_to_file(self, tmp_path, capsys):
        path = tmp_path / "smirk.json"
        code, out, _ = run(["vocab", "--builtin", "smirk", "--out", str(path)],
                           capsys)
        assert code == EXIT_OK
        assert "164" in out
        assert load_vocabulary(str(path)).size == 164

    def test_builtin_to_stdout(self, capsys):
        code, out, _ = run(["vocab", "--builtin", "moses-like"], capsys)
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["scheme"] == "atomwise"

    def test_from_corpus_requires_scheme(self, tmp_path, capsys):
        src = write_lines(tmp_path, "c.smi", ["C"])
        code, _, err = run(["vocab", "--from-corpus", src], capsys)
        assert code == EXIT_USAGE

    def test_from_corpus_atomwise(self, tmp_path, capsys):
        src = write_lines(tmp_path, "c.smi", ["[Au]C", "[Au]N"])
        path = tmp_path / "v.json"
        code, _, _ = run(
            ["vocab", "--from-corpus", src, "--scheme", "atomwise",
             "--out", str(path)], capsys)
        assert code == EXIT_OK
        vocab = load_vocabulary(str(path))
        assert vocab.id_of("[Au]") is not None


class TestTrainGpe:
    def test_training_run(self, tmp_path, capsys):
        src = write_lines(tmp_path, "c.smi", ["CCO"] * 6 + ["CCN"] * 4)
        out_path = tmp_path / "gpe.json"
        code, out, _ = run(
            ["train-gpe", "--corpus", src, "--target-size", "167",
             "--out", str(out_path)], capsys)
        assert code == EXIT_OK
        assert "stop:" in out
        vocab = load_vocabulary(str(out_path))
        assert vocab.scheme == "gpe" and len(vocab.merges) == 3

        enc_code, enc_out, _ = run(
            ["tokenize", "--vocab", str(out_path), "--input", src], capsys)
        assert enc_code == EXIT_OK
        assert enc_out.splitlines()[0] == "CCO"  # fused to one token

    def test_target_not_above_base(self, tmp_path, capsys):
        src = write_lines(tmp_path, "c.smi", ["CCO"])
        code, _, err = run(
            ["train-gpe", "--corpus", src, "--target-size", "10",
             "--out", str(tmp_path / "x.json")], capsys)
        assert code == EXIT_USAGE

    def test_merged_base_rejected(self, tmp_path, capsys):
        src = write_lines(tmp_path, "c.smi", ["CCO"] * 5)
        first = tmp_path / "gpe.json"
        run(["train-gpe", "--corpus", src, "--target-size", "166",
             "--out", str(first)], capsys)
        code, _, err = run(
            ["train-gpe", "--corpus", src, "--base-vocab", str(first),
             "--target-size", "170", "--out", str(tmp_path / "y.json")],
            capsys)
        assert code == EXIT_USAGE


class TestAudit:
    def test_report_with_siblings(self, tmp_path, capsys):
        out_path = tmp_path / "report.csv"
        code, _, _ = run(
            ["audit", "--vocabs", "smirk", "--probe-sets", "bonds",
             "--out", str(out_path)], capsys)
        assert code == EXIT_OK
        lines = out_path.read_text().splitlines()
        assert lines[0] == "tokenizer,probe_set,total,oov_count,oov_percent"
        assert lines[1] == "smirk,bonds,9,0,0.000000"
        assert (tmp_path / "report.json").exists()
        assert (tmp_path / "report.png").exists()

    def test_no_figures(self, tmp_path, capsys):
        out_path = tmp_path / "report.csv"
        code, _, _ = run(
            ["audit", "--vocabs", "smirk", "--probe-sets", "bonds",
             "--out", str(out_path), "--no-figures"], capsys)
        assert code == EXIT_OK
        assert not (tmp_path / "report.png").exists()

    def test_stdout_report(self, capsys):
        code, out, _ = run(
            ["audit", "--vocabs", "smirk", "moses-like",
             "--probe-sets", "bonds"], capsys)
        assert code == EXIT_OK
        assert out.startswith("tokenizer,probe_set,")
        assert "moses-like,bonds," in out

    def test_empty_selection(self, capsys):
        code, _, err = run(
            ["audit", "--vocabs", "smirk", "--probe-sets", "none"], capsys)
        assert code == EXIT_USAGE
        assert "empty probe selection" in err

    def test_unknown_probe_set(self, capsys):
        code, _, err = run(
            ["audit", "--vocabs", "smirk", "--probe-sets", "nope"], capsys)
        assert code == EXIT_USAGE

    def test_extra_set_file(self, tmp_path, capsys):
        probes = write_lines(tmp_path, "mine.smi", ["[F-]", "[OH-]"])
        code, out, _ = run(
            ["audit", "--vocabs", "moses-like", "--probe-sets", "none",
             "--extra-set", probes], capsys)
        assert code == EXIT_OK
        assert "moses-like,mine,2,2,100.000000" in out


@pytest.fixture(scope="class")
def ngram_setup(tmp_path_factory):
    """Corpus plus trained order-1/2 models shared by the ngram tests."""
    root = tmp_path_factory.mktemp("ngram_cli")
    # large enough that order-2 counts dominate the +V smoothing term
    train = root / "train.smi"
    train.write_text("\n".join(["CCO", "CCN", "CC", "OCC", "NCC"] * 300) + "\n")
    paths = {}
    for order in (1, 2):
        model = root / f"n{order}.ngm"
        code = main(["ngram", "train", "--corpus", str(train),
                     "--order", str(order), "--model", str(model)])
        assert code == EXIT_OK
        paths[order] = model
    return root, train, paths


class TestNgram:
    def test_train_reports_model(self, tmp_path, capsys):
        src = write_lines(tmp_path, "c.smi", ["CCO", "CNC"])
        model = tmp_path / "m.ngm"
        mirror = tmp_path / "m.json"
        code, out, _ = run(
            ["ngram", "train", "--corpus", src, "--order", "2",
             "--model", str(model), "--json-mirror", str(mirror)], capsys)
        assert code == EXIT_OK
        assert "order-2" in out
        assert model.exists()
        assert json.loads(mirror.read_text())["order"] == 2

    def test_eval_table(self, ngram_setup, tmp_path, capsys):
        root, train, models = ngram_setup
        out_path = tmp_path / "eval.csv"
        code, _, _ = run(
            ["ngram", "eval", "--model", str(models[1]), str(models[2]),
             "--corpus", str(train), "--out", str(out_path), "--no-figures"],
            capsys)
        assert code == EXIT_OK
        lines = out_path.read_text().splitlines()
        assert lines[0].startswith("model,order,molecules,")
        per_mol = [float(line.split(",")[5]) for line in lines[1:]]
        assert len(per_mol) == 2
        assert per_mol[1] < per_mol[0]  # order 2 fits the training set better

    def test_eval_figure_sibling(self, ngram_setup, tmp_path, capsys):
        root, train, models = ngram_setup
        out_path = tmp_path / "eval.csv"
        code, _, _ = run(
            ["ngram", "eval", "--model", str(models[2]),
             "--corpus", str(train), "--out", str(out_path)], capsys)
        assert code == EXIT_OK
        assert (tmp_path / "eval.png").exists()

    def test_info_loss_zero_when_mask_empty(self, ngram_setup, tmp_path, capsys):
        root, train, models = ngram_setup
        code, out, err = run(
            ["ngram", "info-loss", "--model", str(models[2]),
             "--corpus", str(train), "--mask-tokenizer", "smirk",
             "--no-figures"], capsys)
        assert code == EXIT_OK
        for line in out.splitlines()[1:]:
            _, _, masked, loss = line.rsplit(",", 3)
            assert masked == "0"
            assert float(loss) == 0.0
        assert "mean info loss 0.000000" in err

    def test_info_loss_masked_positions(self, ngram_setup, tmp_path, capsys):
        root, train, models = ngram_setup
        # atomwise vocab enrolled only on carbon chains: O and N become UNK
        vocab_path = tmp_path / "narrow.json"
        src = write_lines(tmp_path, "cc.smi", ["CC"])
        run(["vocab", "--from-corpus", src, "--scheme", "atomwise",
             "--out", str(vocab_path)], capsys)
        probe = write_lines(tmp_path, "probe.smi", ["CCO", "NCC"])
        odds_path = tmp_path / "odds.jsonl"
        out_path = tmp_path / "loss.csv"
        code, _, err = run(
            ["ngram", "info-loss", "--model", str(models[2]),
             "--corpus", probe, "--mask-tokenizer", str(vocab_path),
             "--out", str(out_path), "--log-odds", str(odds_path)], capsys)
        assert code == EXIT_OK
        rows = out_path.read_text().splitlines()[1:]
        for row in rows:
            _, _, masked, loss = row.rsplit(",", 3)
            assert masked == "1"
            assert float(loss) > 0.0
        docs = [json.loads(line) for line in odds_path.read_text().splitlines()]
        assert docs[0]["smiles"] == "CCO"
        assert docs[0]["mask"] == [2]
        assert len(docs[0]["log_odds"]) == 3  # one row per token position
        assert len(docs[0]["log_odds"][0]) == 164
        assert (tmp_path / "loss.png").exists()

    def test_vocab_size_mismatch(self, ngram_setup, tmp_path, capsys):
        root, train, models = ngram_setup
        code, _, err = run(
            ["ngram", "eval", "--model", str(models[2]), "--corpus",
             str(train), "--scheme", "char", "--no-figures"], capsys)
        assert code == EXIT_USAGE
        assert "V=" in err

    def test_corrupt_model_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.ngm"
        bad.write_bytes(b"not a model")
        src = write_lines(tmp_path, "c.smi", ["C"])
        code, _, err = run(
            ["ngram", "eval", "--model", str(bad), "--corpus", src,
             "--no-figures"], capsys)
        assert code == EXIT_IO


class TestStats:
    def test_report_with_siblings(self, tmp_path, capsys):
        src = write_lines(tmp_path, "c.smi", ["CCO", "CCN", "c1ccccc1"])
        out_path = tmp_path / "stats.csv"
        code, _, err = run(
            ["stats", "--corpus", src, "--out", str(out_path)], capsys)
        assert code == EXIT_OK
        lines = out_path.read_text().splitlines()
        assert lines[0] == "rank,token,count,frequency,information_nats"
        assert lines[1].startswith("1,")
        doc = json.loads((tmp_path / "stats.json").read_text())
        assert doc["total_tokens"] == 14
        assert (tmp_path / "stats.png").exists()
        assert "fertility=" in err

    def test_empty_corpus(self, tmp_path, capsys):
        src = tmp_path / "empty.smi"
        src.write_text("")
        code, _, err = run(["stats", "--corpus", str(src)], capsys)
        assert code == EXIT_USAGE


class TestSplit:
    def test_split_directory(self, tmp_path, capsys):
        src = write_lines(tmp_path, "c.smi",
                          [f"C{'N' * (i % 3)}" for i in range(50)])
        out_dir = tmp_path / "splits"
        code, out, _ = run(
            ["split", "--corpus", src, "--seed", "3",
             "--out-dir", str(out_dir)], capsys)
        assert code == EXIT_OK
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["seed"] == 3
        assert sum(manifest["counts"].values()) == 50
        for part in ("train", "validation", "test"):
            assert (out_dir / f"{part}.smi").exists()

    def test_gzip_suffix_carried(self, tmp_path, capsys):
        src = tmp_path / "c.smi.gz"
        src.write_bytes(gzip.compress(b"C\nCC\nCCC\n"))
        out_dir = tmp_path / "splits"
        code, _, _ = run(
            ["split", "--corpus", str(src), "--out-dir", str(out_dir)], capsys)
        assert code == EXIT_OK
        assert (out_dir / "train.smi.gz").exists()

    def test_bad_fractions(self, tmp_path, capsys):
        src = write_lines(tmp_path, "c.smi", ["C"])
        code, _, err = run(
            ["split", "--corpus", src, "--fractions", "0.5,0.1,0.1",
             "--out-dir", str(tmp_path / "s")], capsys)
        assert code == EXIT_USAGE


class TestExitCodes:
    def test_missing_corpus_is_io(self, tmp_path, capsys):
        code, _, err = run(
            ["stats", "--corpus", str(tmp_path / "nope.smi")], capsys)
        assert code == EXIT_IO

    def test_bad_vocab_file_is_io(self, tmp_path, capsys, monkeypatch):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        code, _, err = run(["tokenize", "--vocab", str(bad)], capsys,
                           monkeypatch, stdin="C\n")
        assert code == EXIT_IO

    def test_unknown_subcommand_usage(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == EXIT_USAGE

    def test_missing_required_flag_usage(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["train-gpe", "--corpus", "x"])
        assert exc.value.code == EXIT_USAGE
