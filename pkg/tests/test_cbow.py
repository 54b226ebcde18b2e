import numpy as np
import pytest

from xltag.cbow import (
    context_window,
    load_cbow,
    resolve_oov,
    save_cbow,
    train_cbow,
)
from xltag.corpus import ParallelCorpus
from xltag.errors import DataError
from xltag.representation import build_representation
from xltag.synthetic import oov_context_task


def swappable_corpus(n=200, seed=0):
    """cat and dog share their context distribution; fish and bird do not."""
    rng = np.random.default_rng(seed)
    sents = []
    for _ in range(n):
        r = rng.integers(4)
        if r == 0:
            sents.append(["the", "cat", "sat", "down"])
        elif r == 1:
            sents.append(["the", "dog", "sat", "down"])
        elif r == 2:
            sents.append(["a", "fish", "swam", "away"])
        else:
            sents.append(["a", "bird", "flew", "away"])
    return sents


def test_swappable_pair_has_highest_similarity():
    model = train_cbow(
        swappable_corpus(), window=2, dim=24, negatives=5, epochs=10,
        lr=0.05, seed=1,
    )

    def cos(a, b):
        va = model.input_vecs[model.word_ids[a]]
        vb = model.input_vecs[model.word_ids[b]]
        return float(va @ vb / (np.linalg.norm(va) * np.linalg.norm(vb)))

    nouns = ["cat", "dog", "fish", "bird"]
    sims = {
        (a, b): cos(a, b)
        for i, a in enumerate(nouns)
        for b in nouns[i + 1 :]
    }
    assert max(sims, key=sims.get) == ("cat", "dog")


def test_zero_epochs_equals_seeded_init():
    model = train_cbow(swappable_corpus(), dim=16, epochs=0, seed=42)
    expected = np.random.default_rng(42).uniform(
        -0.5 / 16, 0.5 / 16, size=(len(model.words), 16)
    )
    assert np.array_equal(model.input_vecs, expected)
    assert not model.output_vecs.any()


def test_determinism():
    kwargs = dict(window=3, dim=12, negatives=4, epochs=3, lr=0.05, seed=9)
    a = train_cbow(swappable_corpus(), **kwargs)
    b = train_cbow(swappable_corpus(), **kwargs)
    assert np.array_equal(a.input_vecs, b.input_vecs)
    assert np.array_equal(a.output_vecs, b.output_vecs)


def test_empty_corpus_rejected():
    with pytest.raises(DataError):
        train_cbow([])
    with pytest.raises(DataError):
        train_cbow([[]])


def _loss(model, sents):
    """Negative-sampling objective with the model's own sampling stream."""
    from scipy.special import expit

    rng = np.random.default_rng(123)
    total = 0.0
    ids = model.word_ids
    noise = np.ones(len(model.words)) / len(model.words)
    for sent in sents:
        sids = [ids[w] for w in sent]
        for pos, center in enumerate(sids):
            lo = max(0, pos - model.window)
            hi = min(len(sids), pos + model.window + 1)
            ctx = sids[lo:pos] + sids[pos + 1 : hi]
            if not ctx:
                continue
            h = model.input_vecs[ctx].mean(axis=0)
            total -= np.log(expit(model.output_vecs[center] @ h) + 1e-12)
            for t in rng.choice(len(model.words), size=3, p=noise):
                if t == center:
                    continue
                total -= np.log(expit(-model.output_vecs[t] @ h) + 1e-12)
    return total


def test_loss_decreases_over_first_epoch():
    sents = swappable_corpus(60, seed=3)
    before = train_cbow(sents, window=2, dim=16, epochs=0, seed=5)
    after = train_cbow(sents, window=2, dim=16, epochs=1, lr=0.05, seed=5)
    assert _loss(after, sents) < _loss(before, sents)


def test_context_window_clipping():
    toks = ["a", "b", "c", "d"]
    assert context_window(toks, 0, 2) == ["b", "c"]
    assert context_window(toks, 2, 1) == ["b", "d"]
    assert context_window(toks, 3, 5) == ["a", "b", "c"]


@pytest.fixture
def resolution_setup():
    corpus = ParallelCorpus(
        (
            (("le", "chat"), ("the", "cat")),
            (("le", "chien"), ("the", "dog")),
        )
    )
    table = build_representation(corpus)
    model = train_cbow(
        [list(t) for t in corpus.side("target")],
        window=2, dim=8, epochs=3, seed=0,
    )
    return model, table


def test_resolve_known_word_returned_unchanged(resolution_setup):
    model, table = resolution_setup
    assert resolve_oov("cat", ["the"], model, table, "target") == "cat"


def test_resolve_fully_oov_context_unchanged(resolution_setup):
    model, table = resolution_setup
    out = resolve_oov("mouse", ["zzz", "qqq"], model, table, "target")
    assert out == "mouse"


def test_resolution_returns_known_word(resolution_setup):
    model, table = resolution_setup
    out = resolve_oov("mouse", ["the"], model, table, "target")
    assert out != "mouse"
    assert not table.get("target", out).is_empty


def test_resolved_word_class_on_synthetic_contexts():
    """Unseen content words in cue-bearing windows resolve to words of the
    cue's class (checked through the resolved word's gold tag)."""
    task = oov_context_task(n_pairs=300, n_test=60, seed=11)
    table = build_representation(task.corpus)
    target_sents = [list(p[1]) for p in task.corpus.pairs]
    model = train_cbow(
        target_sents, window=1, dim=32, negatives=5, epochs=10,
        lr=0.05, seed=6,
    )
    noun_idx = task.tagset.index("NOUN")
    verb_idx = task.tagset.index("VERB")
    checked = correct = 0
    for sent, flags in zip(task.test, task.test_oov_flags):
        for i, is_oov in enumerate(flags):
            if not is_oov:
                continue
            ctx = context_window(sent.tokens, i, model.window)
            out = resolve_oov(sent.tokens[i], ctx, model, table, "target")
            assert not table.get("target", out).is_empty
            resolved_class = noun_idx if out[1] == "n" else verb_idx
            checked += 1
            correct += int(resolved_class == sent.tags[i])
    assert checked > 20
    assert correct / checked >= 0.8


def test_serialization_roundtrip(tmp_path):
    model = train_cbow(swappable_corpus(40), dim=10, epochs=2, seed=2)
    path = tmp_path / "emb.xlcbw"
    save_cbow(model, path)
    loaded = load_cbow(path)
    assert loaded.words == model.words
    assert loaded.window == model.window
    assert loaded.negatives == model.negatives
    assert np.array_equal(loaded.input_vecs, model.input_vecs)
    assert np.array_equal(loaded.output_vecs, model.output_vecs)
