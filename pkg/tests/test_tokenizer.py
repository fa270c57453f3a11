"""Vocabulary and encode/decode tests across the four schemes."""

import json
import random
import warnings

import pytest

from smiles_gen import corpus, random_smiles
from smirk.glyphs import LexError
from smirk.tokenizer import (
    MOSES_LIKE_TOKENS,
    SPECIAL_NAMES,
    SPECIAL_TOKENS,
    UNK,
    Encoding,
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
    moses_like_vocabulary,
    save_vocabulary,
    vocabulary_from_corpus,
)


@pytest.fixture(scope="module")
def smirk_vocab():
    return build_smirk_vocabulary()


@pytest.fixture(scope="module")
def char_vocab():
    return build_char_vocabulary()


@pytest.fixture(scope="module")
def moses_vocab():
    return moses_like_vocabulary()


class TestVocabularyType:
    def test_smirk_roster_pinned(self, smirk_vocab):
        # 5 specials + 10 digits + 23 punctuation/chirality + 8 aromatics
        # + 118 elements
        assert smirk_vocab.size == 164
        assert smirk_vocab.base_size == 164

    def test_contains_copernicium_and_parts(self, smirk_vocab):
        assert smirk_vocab.id_of("Cn") is not None
        assert smirk_vocab.id_of("C") is not None
        assert smirk_vocab.id_of("n") is not None

    def test_build_deterministic(self, smirk_vocab):
        assert build_smirk_vocabulary().tokens == smirk_vocab.tokens

    def test_bijection(self, smirk_vocab):
        for i, token in enumerate(smirk_vocab.tokens):
            assert smirk_vocab.id_of(token) == i
            assert smirk_vocab.token_of(i) == token

    def test_specials_enrolled(self, smirk_vocab):
        assert set(SPECIAL_NAMES) == set(smirk_vocab.specials)
        assert smirk_vocab.unk_token == UNK
        assert smirk_vocab.tokens[smirk_vocab.unk_id] == UNK
        assert [smirk_vocab.unk_id, smirk_vocab.pad_id, smirk_vocab.bos_id,
                smirk_vocab.eos_id, smirk_vocab.mask_id] == [0, 1, 2, 3, 4]

    def test_duplicate_token_rejected(self):
        with pytest.raises(VocabularyError, match="'C'"):
            Vocabulary("smirk", SPECIAL_TOKENS + ("C", "O", "C"))

    def test_missing_special_rejected(self):
        with pytest.raises(VocabularyError):
            Vocabulary("smirk", ("[UNK]", "C"), specials={"UNK": "[UNK]"})

    def test_unenrolled_special_rejected(self):
        with pytest.raises(VocabularyError):
            Vocabulary("smirk", ("C",))

    def test_unknown_scheme_rejected(self):
        with pytest.raises(VocabularyError):
            Vocabulary("wordpiece", SPECIAL_TOKENS)

    def test_merge_id_range_checked(self):
        with pytest.raises(VocabularyError):
            Vocabulary("gpe", SPECIAL_TOKENS + ("C",), merges=((5, 6),))

    def test_merged_surfaces_derived(self):
        vocab = Vocabulary(
            "gpe", SPECIAL_TOKENS + ("C", "O"), merges=((5, 5), (7, 6))
        )
        assert vocab.base_size == 7
        assert vocab.size == 9
        assert vocab.token_of(7) == "CC"
        assert vocab.token_of(8) == "CCO"
        # merged surfaces never join the string lookup
        assert vocab.id_of("CC") is None

    def test_moses_roster(self, moses_vocab):
        assert len(MOSES_LIKE_TOKENS) == 26
        assert moses_vocab.size == 31  # plus the five specials


class TestSmirkScheme:
    def test_paper_molecule(self, smirk_vocab):
        enc = encode(smirk_vocab, "OC[C@@H][OH]")
        assert enc.tokens == ("O", "C", "[", "C", "@@", "H", "]", "[", "O", "H", "]")
        assert not enc.has_unknown

    def test_gallium_arsenide_covered(self, smirk_vocab):
        enc = encode(smirk_vocab, "[Ga+]$[As-]")
        assert not enc.has_unknown
        assert decode(smirk_vocab, enc.ids) == "[Ga+]$[As-]"

    def test_bracket_vs_bare_copernicium(self, smirk_vocab):
        assert encode(smirk_vocab, "[Cn]").tokens == ("[", "Cn", "]")
        assert encode(smirk_vocab, "Cn").tokens == ("C", "n")

    def test_isotope_digits(self, smirk_vocab):
        assert encode(smirk_vocab, "[12C]").tokens == ("[", "1", "2", "C", "]")

    def test_two_digit_ring(self, smirk_vocab):
        enc = encode(smirk_vocab, "c%12ccccc%12")
        assert enc.tokens[:4] == ("c", "%", "1", "2")

    def test_empty_input(self, smirk_vocab):
        enc = encode(smirk_vocab, "")
        assert enc.ids == () and enc.offsets == ()
        assert decode(smirk_vocab, enc.ids) == ""

    def test_unknown_bracket_single_unk(self, smirk_vocab):
        enc = encode(smirk_vocab, "C[te]C")
        assert enc.tokens == ("C", UNK, "C")
        assert enc.unk_spans == ((1, 5),)

    def test_strict_raises(self, smirk_vocab):
        with pytest.raises(OOVError) as err:
            encode(smirk_vocab, "C?C", strict=True)
        assert err.value.span == (1, 2)
        with pytest.raises(LexError):
            encode(smirk_vocab, "C!C", strict=True)

    def test_offsets_cover_source(self, smirk_vocab):
        for mol in corpus(200, seed=21):
            enc = encode(smirk_vocab, mol)
            pos = 0
            for (start, end), token in zip(enc.offsets, enc.tokens):
                assert start == pos and end > start
                assert mol[start:end] == token
                pos = end
            assert pos == len(mol)

    def test_id_surface_consistency(self, smirk_vocab):
        for mol in corpus(100, seed=22):
            enc = encode(smirk_vocab, mol)
            assert tuple(smirk_vocab.token_of(i) for i in enc.ids) == enc.tokens


class TestAtomwiseScheme:
    def test_fluoride_goes_unknown(self, moses_vocab):
        enc = encode(moses_vocab, "[F-]")
        assert enc.tokens == (UNK,)
        assert enc.unk_spans == ((0, 4),)

    def test_one_unk_per_bracket_atom(self, moses_vocab):
        enc = encode(moses_vocab, "[Cu+3]C[O-]")
        assert enc.tokens == (UNK, "C", UNK)

    def test_covered_molecule(self, moses_vocab):
        enc = encode(moses_vocab, "c1ccccc1Br")
        assert not enc.has_unknown
        assert decode(moses_vocab, enc.ids) == "c1ccccc1Br"

    def test_strict_mode(self, moses_vocab):
        with pytest.raises(OOVError):
            encode(moses_vocab, "[F-]", strict=True)


class TestCharScheme:
    def test_one_token_per_character(self, char_vocab):
        mol = "N1CC[NH2+]CC1"
        enc = encode(char_vocab, mol)
        assert len(enc) == len(mol)
        assert "".join(enc.tokens) == mol

    def test_round_trip(self, char_vocab):
        for mol in corpus(200, seed=23):
            enc = encode(char_vocab, mol)
            assert not enc.has_unknown
            assert decode(char_vocab, enc.ids) == mol


class TestDecode:
    def test_round_trip_ester(self, smirk_vocab):
        assert decode(smirk_vocab, encode(smirk_vocab, "COC(=O)OC").ids) == "COC(=O)OC"

    def test_empty(self, smirk_vocab):
        assert decode(smirk_vocab, ()) == ""

    def test_single_unk_surface(self, smirk_vocab):
        assert decode(smirk_vocab, (smirk_vocab.unk_id,)) == UNK

    def test_id_out_of_range(self, smirk_vocab):
        with pytest.raises(VocabularyError):
            decode(smirk_vocab, (smirk_vocab.size,))

    def test_round_trip_property(self, smirk_vocab, char_vocab):
        rng = random.Random(31)
        for _ in range(300):
            mol = random_smiles(rng)
            for vocab in (smirk_vocab, char_vocab):
                enc = encode(vocab, mol)
                assert not enc.has_unknown
                assert decode(vocab, enc.ids) == mol


class TestUnkMonotonicity:
    def test_enlarging_vocabulary_never_adds_unks(self):
        mols = corpus(120, seed=41)
        small = vocabulary_from_corpus("atomwise", mols[:20])
        large = vocabulary_from_corpus("atomwise", mols)
        assert set(small.tokens) <= set(large.tokens)
        for mol in mols:
            n_small = len(encode(small, mol).unk_spans)
            n_large = len(encode(large, mol).unk_spans)
            assert n_large <= n_small


class TestVocabularyFromCorpus:
    def test_atomwise_units(self):
        vocab = vocabulary_from_corpus("atomwise", ["CCO", "[NH4+]", "C1CC1"])
        assert vocab.id_of("[NH4+]") is not None
        assert vocab.id_of("1") is not None
        assert vocab.scheme == "atomwise"

    def test_char_units(self):
        vocab = vocabulary_from_corpus("char", ["[NH4+]"])
        assert vocab.id_of("[") is not None and vocab.id_of("4") is not None

    def test_glyph_units(self):
        vocab = vocabulary_from_corpus("smirk", ["[NH4+]"])
        assert vocab.id_of("N") is not None
        assert vocab.id_of("[NH4+]") is None

    def test_unknown_scheme(self):
        with pytest.raises(VocabularyError):
            vocabulary_from_corpus("bpe", ["C"])


class TestPersistence:
    def test_round_trip_equal(self, tmp_path, smirk_vocab):
        path = tmp_path / "v.json"
        save_vocabulary(smirk_vocab, str(path))
        loaded = load_vocabulary(str(path))
        assert loaded == smirk_vocab

    def test_byte_exact_resave(self, tmp_path, smirk_vocab):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_vocabulary(smirk_vocab, str(p1))
        save_vocabulary(load_vocabulary(str(p1)), str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_file_shape(self, smirk_vocab):
        doc = json.loads(dumps_vocabulary(smirk_vocab))
        assert list(doc) == ["version", "scheme", "tokens", "specials"]
        assert doc["version"] == 1
        assert doc["specials"] == dict(zip(SPECIAL_NAMES, SPECIAL_TOKENS))

    def test_gpe_merges_key(self):
        vocab = Vocabulary("gpe", SPECIAL_TOKENS + ("C",), merges=((5, 5),))
        doc = json.loads(dumps_vocabulary(vocab))
        assert list(doc) == ["version", "scheme", "tokens", "specials", "merges"]
        assert doc["merges"] == [[5, 5]]

    def test_non_gpe_merges_rejected_on_save(self):
        vocab = Vocabulary("smirk", SPECIAL_TOKENS + ("C",), merges=((5, 5),))
        with pytest.raises(VocabularyError):
            dumps_vocabulary(vocab)

    def test_duplicate_token_file(self, tmp_path):
        path = tmp_path / "dup.json"
        doc = {
            "version": 1,
            "scheme": "atomwise",
            "tokens": list(SPECIAL_TOKENS) + ["C", "C"],
            "specials": dict(zip(SPECIAL_NAMES, SPECIAL_TOKENS)),
        }
        path.write_text(json.dumps(doc))
        with pytest.raises(VocabularyError, match="'C'"):
            load_vocabulary(str(path))

    def test_merges_on_smirk_warn_and_drop(self, tmp_path):
        path = tmp_path / "m.json"
        doc = {
            "version": 1,
            "scheme": "smirk",
            "tokens": list(SPECIAL_TOKENS) + ["C"],
            "specials": dict(zip(SPECIAL_NAMES, SPECIAL_TOKENS)),
            "merges": [[5, 5]],
        }
        path.write_text(json.dumps(doc))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            vocab = load_vocabulary(str(path))
        assert vocab.merges == ()
        assert any("merge" in str(w.message) for w in caught)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "v2.json"
        path.write_text('{"version": 2, "scheme": "smirk", "tokens": []}')
        with pytest.raises(VocabularyError):
            load_vocabulary(str(path))

    def test_not_json(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("not json")
        with pytest.raises(VocabularyError):
            load_vocabulary(str(path))

    def test_missing_unk_in_file(self, tmp_path):
        path = tmp_path / "nounk.json"
        doc = {
            "version": 1,
            "scheme": "atomwise",
            "tokens": ["C"],
            "specials": {},
        }
        path.write_text(json.dumps(doc))
        with pytest.raises(VocabularyError):
            load_vocabulary(str(path))


class TestBuiltins:
    def test_names(self):
        assert builtin_vocabulary("smirk").scheme == "smirk"
        assert builtin_vocabulary("char").scheme == "char"
        assert builtin_vocabulary("moses-like").scheme == "atomwise"
        with pytest.raises(VocabularyError):
            builtin_vocabulary("bert")
