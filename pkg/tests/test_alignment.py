"""EM alignment against an independent oracle, projection semantics."""

from collections import defaultdict

import pytest
from hypothesis import given, settings, strategies as st

from xltag.alignment import (
    UNKNOWN_TAG,
    align,
    align_corpus,
    corpus_log_likelihood,
    extend_tagset_with_unknown,
    project_tags,
    read_alignment_links,
    train_ibm1,
    write_alignment_links,
)
from xltag.corpus import ParallelCorpus, TaggedSentence, TagSet
from xltag.errors import DataError


def oracle_em(pairs, iterations):
    """Straight dict-based EM, written independently of the implementation.

    Returns the table as {(source_or_None, target): prob} after each
    iteration.
    """
    tgt_vocab = sorted({w for _, t in pairs for w in t})
    t = defaultdict(float)
    for src, tgt in pairs:
        for f in tgt:
            for s in list(src) + [None]:
                t[(s, f)] = 1.0 / len(tgt_vocab)
    snapshots = []
    for _ in range(iterations):
        counts = defaultdict(float)
        totals = defaultdict(float)
        for src, tgt in pairs:
            slots = list(src) + [None]
            for f in tgt:
                z = sum(t[(s, f)] for s in slots)
                for s in slots:
                    d = t[(s, f)] / z
                    counts[(s, f)] += d
                    totals[s] += d
        t = defaultdict(
            float, {key: counts[key] / totals[key[0]] for key in counts}
        )
        snapshots.append(dict(t))
    return snapshots


TOY_PAIRS = ((("a", "b"), ("x", "y")), (("a",), ("x",)))


def table_prob(table, s, f):
    return table.null_probs.get(f, 0.0) if s is None else table.prob(s, f)


@pytest.mark.parametrize("iterations", [1, 2, 3, 5, 8])
def test_em_matches_oracle_per_iteration(iterations):
    corpus = ParallelCorpus(TOY_PAIRS)
    table = train_ibm1(corpus, iterations=iterations)
    expected = oracle_em(TOY_PAIRS, iterations)[-1]
    for (s, f), p in expected.items():
        assert table_prob(table, s, f) == pytest.approx(p, abs=1e-9)


def test_frozen_oracle_values():
    # values computed by oracle_em on the toy corpus and frozen here
    snapshots = oracle_em(TOY_PAIRS, 6)
    assert snapshots[0][("a", "x")] == pytest.approx(5 / 7, abs=1e-12)
    assert snapshots[4][("a", "x")] == pytest.approx(
        0.8775979370264828, abs=1e-12
    )
    # with the NULL slot, crossing 0.9 takes 6 iterations, not 5
    assert snapshots[4][("a", "x")] < 0.9 < snapshots[5][("a", "x")]

    table5 = train_ibm1(ParallelCorpus(TOY_PAIRS), iterations=5)
    assert table5.prob("a", "x") == pytest.approx(0.8775979370264828, abs=1e-11)
    table6 = train_ibm1(ParallelCorpus(TOY_PAIRS), iterations=6)
    assert table6.prob("a", "x") > 0.9


def test_first_iteration_closed_form():
    """From the uniform start, responsibilities are uniform per sentence:
    pair 1 gives each of {a, b, NULL} 1/3 per target token, pair 2 gives
    {a, NULL} 1/2, so t(x|a) = (1/3 + 1/2) / (1/3 + 1/3 + 1/2) = 5/7."""
    table = train_ibm1(ParallelCorpus(TOY_PAIRS), iterations=1)
    assert table.prob("a", "x") == pytest.approx(5 / 7, abs=1e-12)
    assert table.prob("a", "y") == pytest.approx(2 / 7, abs=1e-12)
    assert table.prob("b", "x") == pytest.approx(0.5, abs=1e-12)


def test_rows_normalized_single_pair():
    corpus = ParallelCorpus(((("a",), ("x",)),))
    table = train_ibm1(corpus, iterations=3)
    assert sum(table.probs["a"].values()) == pytest.approx(1.0, abs=1e-6)
    assert sum(table.null_probs.values()) == pytest.approx(1.0, abs=1e-6)


random_corpus = st.lists(
    st.tuples(
        st.lists(st.sampled_from("abcde"), min_size=1, max_size=4),
        st.lists(st.sampled_from("uvwxy"), min_size=1, max_size=4),
    ),
    min_size=1,
    max_size=6,
).map(lambda ps: ParallelCorpus(tuple((tuple(s), tuple(t)) for s, t in ps)))


@given(random_corpus, st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_rows_stay_normalized(corpus, iterations):
    table = train_ibm1(corpus, iterations=iterations)
    for s, row in table.probs.items():
        assert sum(row.values()) == pytest.approx(1.0, abs=1e-6)
    assert sum(table.null_probs.values()) == pytest.approx(1.0, abs=1e-6)


@given(random_corpus)
@settings(max_examples=25, deadline=None)
def test_log_likelihood_non_decreasing(corpus):
    previous = None
    for iterations in range(1, 7):
        table = train_ibm1(corpus, iterations=iterations)
        ll = corpus_log_likelihood(table, corpus)
        if previous is not None:
            assert ll >= previous - 1e-9
        previous = ll


def test_align_toy_corpus():
    corpus = ParallelCorpus(TOY_PAIRS)
    table = train_ibm1(corpus, iterations=5)
    links = align(table, corpus.pairs[0])
    assert links[0] == 0  # x -> a


def test_align_unknown_word_goes_to_null():
    corpus = ParallelCorpus(TOY_PAIRS)
    table = train_ibm1(corpus, iterations=2)
    links = align(table, (("a", "b"), ("zzz",)))
    assert links == (None,)


def test_align_tie_prefers_leftmost():
    corpus = ParallelCorpus(((("a", "a"), ("x",)),))
    table = train_ibm1(corpus, iterations=3)
    links = align(table, (("a", "a"), ("x",)))
    assert links == (0,)


@pytest.fixture
def projection_setup():
    corpus = ParallelCorpus(
        (
            (("the", "cat"), ("le", "chat")),
            (("the", "dog"), ("le", "chien")),
        )
    )
    tagset = TagSet("pos", ("DET", "NOUN"))
    tagged = [
        TaggedSentence(("the", "cat"), (0, 1)),
        TaggedSentence(("the", "dog"), (0, 1)),
    ]
    return corpus, tagset, tagged


def test_project_tags_definition(projection_setup):
    corpus, tagset, tagged = projection_setup
    links = [(0, 1), (0, 1)]
    projected, extended = project_tags(tagged, links, corpus, tagset)
    assert extended.labels == ("DET", "NOUN", UNKNOWN_TAG)
    assert projected[0].tokens == ("le", "chat")
    assert projected[0].tags == (0, 1)


def test_project_null_gets_marker(projection_setup):
    corpus, tagset, tagged = projection_setup
    links = [(0, None), (0, 1)]
    projected, extended = project_tags(tagged, links, corpus, tagset)
    unk = extended.index(UNKNOWN_TAG)
    assert projected[0].tags == (0, unk)


def test_project_drops_mostly_null_sentences(projection_setup):
    corpus, tagset, tagged = projection_setup
    links = [(None, None), (0, 1)]
    projected, _ = project_tags(tagged, links, corpus, tagset, 0.5)
    assert len(projected) == 1
    assert projected[0].tokens == ("le", "chien")


def test_project_never_invents_tags(projection_setup):
    corpus, tagset, tagged = projection_setup
    links = align_corpus(train_ibm1(corpus, 3), corpus)
    projected, extended = project_tags(tagged, links, corpus, tagset)
    allowed = set(range(len(extended)))
    for sent in projected:
        assert set(sent.tags) <= allowed


def test_project_length_mismatch_rejected(projection_setup):
    corpus, tagset, tagged = projection_setup
    with pytest.raises(DataError):
        project_tags(tagged, [(0, 1)], corpus, tagset)
    with pytest.raises(DataError):
        project_tags(tagged, [(0,), (0, 1)], corpus, tagset)


def test_extend_tagset_idempotent():
    tagset = TagSet("pos", ("A",))
    once = extend_tagset_with_unknown(tagset)
    assert extend_tagset_with_unknown(once) is once


def test_links_file_roundtrip(tmp_path):
    links = [(0, None, 2), (None,), (1, 0)]
    path = tmp_path / "links.txt"
    write_alignment_links(links, path)
    assert read_alignment_links(path) == links


def test_links_file_rejects_garbage(tmp_path):
    path = tmp_path / "links.txt"
    path.write_text("0-0 banana\n", encoding="utf-8")
    with pytest.raises(DataError):
        read_alignment_links(path)
