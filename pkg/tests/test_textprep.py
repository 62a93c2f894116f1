"""Cleaning, lemmatization, phrase promotion, and corpus construction."""

from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from callsum.errors import EmptyCorpusError
from callsum.ingest import ChannelTranscript, Role
from callsum.textprep import (Corpus, Document, PhraseModel, PrepConfig,
                              build_corpus, clean_for_tagging,
                              expand_contractions, lemmatize,
                              load_contractions, load_lemma_exceptions,
                              prepare_document, prepare_documents,
                              prepare_tokens, strip_punctuation)

EXCEPTIONS = load_lemma_exceptions()
CONTRACTIONS = load_contractions()


def _tx(text, call_id="c1", role=Role.CUSTOMER):
    return ChannelTranscript(call_id, role, text)


class TestCleanForTagging:
    def test_lowercase_and_punctuation(self):
        assert clean_for_tagging("Hello, World!") == "hello world"

    def test_apostrophes_removed_in_place(self):
        assert clean_for_tagging("I don't know") == "i dont know"

    def test_unigram_stutter_collapsed(self):
        assert clean_for_tagging("i i i need help") == "i need help"

    def test_bigram_stutter_collapsed(self):
        assert clean_for_tagging("i need i need help") == "i need help"

    def test_nonadjacent_repeat_kept(self):
        assert clean_for_tagging("help me help") == "help me help"

    def test_collapse_runs_to_fixpoint(self):
        assert clean_for_tagging("a b a b a b c") == "a b c"
        # unigram collapse exposes a bigram repeat
        assert clean_for_tagging("x y y x y z") == "x y z"

    def test_digits_survive(self):
        assert clean_for_tagging("room 101 please") == "room 101 please"

    @given(st.text(alphabet="ab .,'?", max_size=40))
    def test_idempotent(self, raw):
        once = clean_for_tagging(raw)
        assert clean_for_tagging(once) == once

    @given(st.lists(st.sampled_from(["aa", "bb", "cc"]), max_size=12).map(" ".join))
    def test_no_new_tokens(self, raw):
        assert set(clean_for_tagging(raw).split()) <= set(raw.split())


class TestStripPunctuation:
    def test_marks_become_spaces(self):
        assert strip_punctuation("Hello, World!").split() == ["hello", "world"]

    def test_apostrophes_removed_in_place(self):
        assert strip_punctuation("I don't know").split() == ["i", "dont", "know"]

    def test_adjacent_repeats_preserved(self):
        assert strip_punctuation("one moment while. while.").split() == \
            ["one", "moment", "while", "while"]

    @given(st.text(alphabet="ab .,'?", max_size=40))
    def test_clean_for_tagging_refines_it(self, raw):
        # the tagger cleaner only ever removes tokens from the stripped form
        stripped = strip_punctuation(raw).split()
        cleaned = clean_for_tagging(raw).split()
        assert len(cleaned) <= len(stripped)
        assert set(cleaned) <= set(stripped)


class TestContractions:
    def test_bare_form_expanded(self):
        assert expand_contractions("i dont know", CONTRACTIONS) == "i do not know"

    def test_apostrophe_form_expanded(self):
        assert expand_contractions("i can't go", CONTRACTIONS) == "i cannot go"

    def test_edge_punctuation_preserved(self):
        assert expand_contractions("dont.", CONTRACTIONS) == "do not."
        assert expand_contractions("(dont)", CONTRACTIONS) == "(do not)"

    def test_unknown_tokens_untouched(self):
        assert expand_contractions("nothing here", CONTRACTIONS) == "nothing here"


class TestLemmatize:
    # expectations hand-traced from the suffix rule table
    @pytest.mark.parametrize("word,lemma", [
        ("services", "service"),     # -es after soft consonant
        ("classes", "class"),        # -sses -> -ss
        ("studies", "study"),        # -ies -> -y (len > 4)
        ("boxes", "box"),            # -xes
        ("churches", "church"),      # -ches
        ("wishes", "wish"),          # -shes
        ("payments", "payment"),     # plain -s
        ("running", "run"),          # -ing with doubling repair
        ("stopped", "stop"),         # -ed with doubling repair
        ("calling", "call"),         # -ing, no repair on -ll
        ("tried", "try"),            # -ied -> -y
        ("glass", "glass"),          # -ss kept
        ("status", "status"),        # -us kept
        ("analysis", "analysis"),    # -is kept
        ("string", "string"),        # stem would lose its vowel
        ("leaves", "leaf"),          # exception table
        ("children", "child"),       # exception table
        ("went", "go"),              # exception table
        ("being", "be"),             # exception table
    ])
    def test_rule_table(self, word, lemma):
        assert lemmatize(word, EXCEPTIONS) == lemma

    def test_runs_to_fixpoint(self):
        # two rule applications needed: -s then -ing
        assert lemmatize("recordings", EXCEPTIONS) == "record"

    @given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1,
                   max_size=12))
    def test_idempotent(self, word):
        once = lemmatize(word, EXCEPTIONS)
        assert lemmatize(once, EXCEPTIONS) == once

    def test_exception_targets_are_fixpoints(self):
        for lemma in set(EXCEPTIONS.values()):
            assert lemmatize(lemma, EXCEPTIONS) == lemma


class TestPrepareTokens:
    def test_stopwords_and_length_filter(self):
        cfg = PrepConfig()
        toks = prepare_tokens("the billing department is closed today", cfg)
        assert "the" not in toks and "is" not in toks
        assert all(len(t) >= 5 for t in toks)

    def test_contractions_expand_before_filtering(self):
        cfg = PrepConfig()
        # "dont" -> "do not": both halves are stop words and vanish
        assert prepare_tokens("dont refund", cfg) == ["refund"]

    def test_min_word_len_override(self):
        cfg = PrepConfig(min_word_len=3)
        assert "box" in prepare_tokens("box delivery", cfg)


class TestPhraseModel:
    def test_hand_computed_promotion(self):
        # 6 lists of (credit, card) plus 8 distinct noise tokens:
        # 10 distinct unigrams, 8 distinct pairs -> N = 18; pair count 6 with
        # min_count 5 scores (6-5)*18/(6*6) = 0.5 exactly
        lists = [["credit", "card"] for _ in range(6)]
        lists.append([f"noise{i}" for i in range(8)])
        model = PhraseModel.learn(lists, min_count=5, threshold=0.5)
        assert ("credit", "card") in model.promoted_pairs
        model = PhraseModel.learn(lists, min_count=5, threshold=0.51)
        assert ("credit", "card") not in model.promoted_pairs

    def test_below_min_count_never_promoted(self):
        lists = [["credit", "card"] for _ in range(4)]
        model = PhraseModel.learn(lists, min_count=5, threshold=0.0)
        assert model.promoted_pairs == frozenset()

    def test_apply_left_to_right_without_overlap(self):
        model = PhraseModel(min_count=1, threshold=0.0)
        model._promoted = {("a", "b"), ("b", "c")}
        assert model.apply(["a", "b", "c"]) == ["a_b", "c"]
        assert model.apply(["x", "b", "c"]) == ["x", "b_c"]

    def test_trigram_promotion_via_second_pass(self):
        base = "wireless router setup"
        transcripts = [_tx(base, call_id=f"c{i}") for i in range(8)]
        cfg = PrepConfig(ngram_min_count=2, ngram_threshold=0.01)
        docs, models = prepare_documents(transcripts, cfg)
        assert len(models) == 2
        assert docs[0].terms == ("wireless_router_setup",)


class TestPrepareDocument:
    def test_lemma_refilter_drops_shortened_terms(self):
        # "billing" lemmatizes to "bill" (4 chars) and must be dropped
        doc = prepare_document(_tx("billing invoice"), PrepConfig())
        assert doc.terms == ("invoice",)

    def test_prepared_terms_are_a_fixpoint(self):
        text = ("the payments department reviewed invoices and refunds "
                "before scheduling the router restarts")
        doc = prepare_document(_tx(text), PrepConfig())
        again = prepare_document(_tx(" ".join(doc.terms)), PrepConfig())
        assert again.terms == doc.terms

    def test_ngram_terms_are_a_fixpoint(self):
        transcripts = [_tx("wireless router setup", call_id=f"c{i}")
                       for i in range(8)]
        cfg = PrepConfig(ngram_min_count=2, ngram_threshold=0.01)
        docs, _ = prepare_documents(transcripts, cfg)
        joined = " ".join(docs[0].terms)
        assert prepare_document(_tx(joined), cfg).terms == docs[0].terms

    def test_pos_filter(self):
        cfg = PrepConfig(allowed_pos=frozenset({"NOUN"}))
        doc = prepare_document(_tx("quickly restarting router"), cfg)
        assert "quickly" not in doc.terms


class TestCorpus:
    def _docs(self):
        return [
            Document("c1", Role.CUSTOMER, ("alpha", "bravo", "alpha")),
            Document("c1", Role.AGENT, ("bravo", "charlie")),
            Document("c2", Role.CUSTOMER, ("alpha",)),
        ]

    def test_first_seen_vocabulary_order(self):
        corpus = build_corpus(self._docs())
        assert corpus.id_to_term == ("alpha", "bravo", "charlie")
        assert corpus.vocabulary == {"alpha": 0, "bravo": 1, "charlie": 2}

    def test_bows_sorted_with_counts(self):
        corpus = build_corpus(self._docs())
        assert corpus.bows[0] == ((0, 2), (1, 1))
        assert corpus.bows[1] == ((1, 1), (2, 1))
        assert corpus.token_total == 6

    def test_doc_index(self):
        corpus = build_corpus(self._docs())
        assert corpus.doc_index[("c1", Role.AGENT)] == 1
        assert corpus.doc_index[("c2", Role.CUSTOMER)] == 2

    def test_idf_matches_hand_computation(self):
        corpus = build_corpus(self._docs())
        # D=3: df(alpha)=2, df(bravo)=2, df(charlie)=1
        assert corpus.idf(0) == pytest.approx(math.log(3 / 2), abs=1e-12)
        assert corpus.idf(2) == pytest.approx(math.log(3 / 1), abs=1e-12)
        assert corpus.idf_table()["bravo"] == pytest.approx(math.log(1.5))

    def test_empty_docs_keep_positions(self):
        docs = [Document("c1", Role.CUSTOMER, ()),
                Document("c1", Role.AGENT, ("alpha",))]
        corpus = build_corpus(docs)
        assert corpus.bows[0] == ()
        assert corpus.doc_index[("c1", Role.AGENT)] == 1

    def test_all_empty_raises(self):
        with pytest.raises(EmptyCorpusError):
            build_corpus([Document("c1", Role.CUSTOMER, ())])

    def test_fingerprint_stable_and_sensitive(self):
        a = build_corpus(self._docs()).fingerprint()
        b = build_corpus(self._docs()).fingerprint()
        assert a == b
        changed = self._docs()
        changed[2] = Document("c2", Role.CUSTOMER, ("bravo",))
        assert build_corpus(changed).fingerprint() != a


class TestPrepConfigValidation:
    def test_bad_min_word_len(self):
        with pytest.raises(ValueError):
            PrepConfig(min_word_len=0)

    def test_bad_ngram_min_count(self):
        with pytest.raises(ValueError):
            PrepConfig(ngram_min_count=0)
