"""Synthetic corpora with controlled properties.

Real multilingual treebanks cannot ship with the repository, so
experiments and the acceptance suite run on generated bi- and tri-texts
whose difficulty is engineered: a mirror target language (word-for-word
translations, so a pair shares one occurrence vector), tasks whose tags
depend on the next token (only solvable with right context), test sets
with out-of-corpus tokens in class-revealing contexts, and tasks whose
tag is a function of (word identity, injected stream).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import ParallelCorpus, TaggedSentence, TagSet

MIRROR_PREFIXES = ("q", "z")


def mirror(tokens, prefix="q"):
    """Word-for-word translation: same order, prefixed surface forms."""
    return tuple(prefix + tok for tok in tokens)


@dataclass
class TaggingTask:
    corpus: ParallelCorpus
    tagset: TagSet
    train: list[TaggedSentence]       # source-side annotations
    validation: list[TaggedSentence]  # source-language held-out sentences
    test: list[TaggedSentence]        # gold-tagged sentences on test_side
    test_side: str = "target"
    pos_tagset: TagSet | None = None
    train_pos: list[tuple[int, ...]] | None = None
    validation_pos: list[tuple[int, ...]] | None = None
    test_pos: list[tuple[int, ...]] | None = None
    test_oov_flags: list[list[bool]] | None = None


def _split_tagged(sentences, n_validation):
    return sentences[:-n_validation], sentences[-n_validation:]


def word_class_task(
    n_pairs: int = 500,
    n_validation: int = 50,
    n_test: int = 100,
    seed: int = 0,
) -> TaggingTask:
    """Deterministic toy grammar; each word type has exactly one tag.

    Sentences are sampled from a handful of part-of-speech templates over
    a closed vocabulary, and the target side mirrors the source word for
    word, so a translation pair occupies exactly the same bi-sentences.
    """
    rng = np.random.default_rng(seed)
    tagset = TagSet("toy-pos", ("ADJ", "DET", "NOUN", "VERB"))
    vocab = {
        "DET": [f"det{i}" for i in range(4)],
        "ADJ": [f"adj{i}" for i in range(6)],
        "NOUN": [f"noun{i}" for i in range(10)],
        "VERB": [f"verb{i}" for i in range(6)],
    }
    templates = [
        ("DET", "NOUN", "VERB"),
        ("DET", "ADJ", "NOUN", "VERB"),
        ("DET", "NOUN", "VERB", "DET", "NOUN"),
        ("DET", "ADJ", "NOUN", "VERB", "DET", "ADJ", "NOUN"),
    ]

    def sample_sentence():
        template = templates[rng.integers(len(templates))]
        tokens = tuple(
            vocab[cls][rng.integers(len(vocab[cls]))] for cls in template
        )
        tags = tuple(tagset.index(cls) for cls in template)
        return TaggedSentence(tokens, tags)

    tagged = [sample_sentence() for _ in range(n_pairs)]
    pairs = tuple((s.tokens, mirror(s.tokens)) for s in tagged)
    train, validation = _split_tagged(tagged, n_validation)

    test = []
    for _ in range(n_test):
        s = sample_sentence()
        test.append(TaggedSentence(mirror(s.tokens), s.tags))
    return TaggingTask(
        corpus=ParallelCorpus(pairs),
        tagset=tagset,
        train=train,
        validation=validation,
        test=test,
    )


def next_token_task(
    n_pairs: int = 400,
    n_validation: int = 40,
    n_test: int = 80,
    n_per_class: int = 8,
    seed: int = 1,
    test_side: str = "source",
) -> TaggingTask:
    """Every token's tag names the class of the NEXT token (END at the end).

    Tokens are i.i.d. and sentence lengths vary, so left context carries
    no information about the tag: a causal tagger is stuck near chance
    while a bidirectional one can read the answer off the next token.
    Word types are numerous enough that occurrence vectors stay sparse
    and discriminative.
    """
    rng = np.random.default_rng(seed)
    tagset = TagSet("next-pos", ("END", "NEXT_A", "NEXT_P", "NEXT_Q"))
    words = [
        f"{cls}{i}" for cls in ("a", "p", "q") for i in range(n_per_class)
    ]
    next_tag = {
        "a": tagset.index("NEXT_A"),
        "p": tagset.index("NEXT_P"),
        "q": tagset.index("NEXT_Q"),
    }
    end = tagset.index("END")

    def sample_sentence():
        length = int(rng.integers(6, 11))
        tokens = tuple(words[rng.integers(len(words))] for _ in range(length))
        tags = tuple(
            next_tag[tokens[i + 1][0]] if i + 1 < length else end
            for i in range(length)
        )
        return TaggedSentence(tokens, tags)

    tagged = [sample_sentence() for _ in range(n_pairs)]
    pairs = tuple((s.tokens, mirror(s.tokens)) for s in tagged)
    train, validation = _split_tagged(tagged, n_validation)
    test = []
    for _ in range(n_test):
        s = sample_sentence()
        tokens = s.tokens if test_side == "source" else mirror(s.tokens)
        test.append(TaggedSentence(tokens, s.tags))
    return TaggingTask(
        corpus=ParallelCorpus(pairs),
        tagset=tagset,
        train=train,
        validation=validation,
        test=test,
        test_side=test_side,
    )


def oov_context_task(
    n_pairs: int = 400,
    n_validation: int = 40,
    n_test: int = 120,
    oov_fraction: float = 0.2,
    seed: int = 2,
) -> TaggingTask:
    """Content words with a class-revealing RIGHT cue, plus unseen tokens.

    Sentences are (content, cue, separator) units: the cue names the
    content word's class and the separator is neutral. In the target-side
    test set a fraction of content tokens is replaced with fresh surface
    forms: their vectors are empty, and their left context (a neutral
    separator) says nothing, so a causal tagger is stuck; distributional
    resolution over a one-word window sees the giveaway cue and can
    substitute a same-class known word.
    """
    rng = np.random.default_rng(seed)
    tagset = TagSet("oov-pos", ("MRK_N", "MRK_V", "NOUN", "SEP", "VERB"))
    nouns = [f"n{i}" for i in range(8)]
    verbs = [f"v{i}" for i in range(8)]
    noun_cues = [f"m{i}" for i in range(4)]
    verb_cues = [f"k{i}" for i in range(4)]
    separators = [f"s{i}" for i in range(3)]

    def sample_sentence():
        units = int(rng.integers(3, 6))
        tokens: list[str] = []
        tags: list[int] = []
        for _ in range(units):
            if rng.integers(2):
                tokens.append(nouns[rng.integers(len(nouns))])
                tags.append(tagset.index("NOUN"))
                tokens.append(noun_cues[rng.integers(len(noun_cues))])
                tags.append(tagset.index("MRK_N"))
            else:
                tokens.append(verbs[rng.integers(len(verbs))])
                tags.append(tagset.index("VERB"))
                tokens.append(verb_cues[rng.integers(len(verb_cues))])
                tags.append(tagset.index("MRK_V"))
            tokens.append(separators[rng.integers(len(separators))])
            tags.append(tagset.index("SEP"))
        return TaggedSentence(tuple(tokens), tuple(tags))

    tagged = [sample_sentence() for _ in range(n_pairs)]
    pairs = tuple((s.tokens, mirror(s.tokens)) for s in tagged)
    train, validation = _split_tagged(tagged, n_validation)

    content_tags = {tagset.index("NOUN"), tagset.index("VERB")}
    test = []
    oov_flags = []
    fresh = 0
    for _ in range(n_test):
        s = sample_sentence()
        tokens = list(mirror(s.tokens))
        flags = [False] * len(tokens)
        for i, tag in enumerate(s.tags):
            if tag in content_tags and rng.random() < oov_fraction:
                tokens[i] = f"unseen{fresh}"
                flags[i] = True
                fresh += 1
        test.append(TaggedSentence(tuple(tokens), s.tags))
        oov_flags.append(flags)
    return TaggingTask(
        corpus=ParallelCorpus(pairs),
        tagset=tagset,
        train=train,
        validation=validation,
        test=test,
        test_oov_flags=oov_flags,
    )


def injected_stream_task(
    n_pairs: int = 400,
    n_validation: int = 40,
    n_test: int = 80,
    seed: int = 3,
) -> TaggingTask:
    """Tag = (word class, external stream value) pair, stream i.i.d.

    The stream is unpredictable from the text, so a model without the
    injected stream can at best get the word-class half right (~50%),
    while any injection site can reach the full deterministic mapping.
    """
    rng = np.random.default_rng(seed)
    tagset = TagSet("super", ("T0", "T1", "T2", "T3"))
    pos_tagset = TagSet("coarse", ("P0", "P1"))
    class_a = [f"a{i}" for i in range(8)]
    class_b = [f"b{i}" for i in range(8)]

    def sample_sentence():
        length = int(rng.integers(5, 9))
        tokens = []
        classes = []
        for _ in range(length):
            if rng.integers(2):
                tokens.append(class_a[rng.integers(len(class_a))])
                classes.append(0)
            else:
                tokens.append(class_b[rng.integers(len(class_b))])
                classes.append(1)
        stream = [int(p) for p in rng.integers(0, 2, size=length)]
        tags = tuple(2 * c + p for c, p in zip(classes, stream))
        return TaggedSentence(tuple(tokens), tags), tuple(stream)

    tagged, streams = zip(*(sample_sentence() for _ in range(n_pairs)))
    tagged = list(tagged)
    pairs = tuple((s.tokens, mirror(s.tokens)) for s in tagged)
    train, validation = _split_tagged(tagged, n_validation)
    train_pos, validation_pos = _split_tagged(list(streams), n_validation)

    test, test_pos = [], []
    for _ in range(n_test):
        s, stream = sample_sentence()
        test.append(TaggedSentence(mirror(s.tokens), s.tags))
        test_pos.append(stream)
    return TaggingTask(
        corpus=ParallelCorpus(pairs),
        tagset=tagset,
        train=train,
        validation=validation,
        test=test,
        pos_tagset=pos_tagset,
        train_pos=train_pos,
        validation_pos=validation_pos,
        test_pos=test_pos,
    )


@dataclass
class TriParallelTask:
    """One source annotated, two mirror targets sharing pair indices."""

    corpora: tuple[ParallelCorpus, ParallelCorpus]
    tagset: TagSet
    train: list[TaggedSentence]
    validation: list[TaggedSentence]
    tests: tuple[list[TaggedSentence], list[TaggedSentence]]


def tri_parallel_task(
    n_pairs: int = 500,
    n_validation: int = 50,
    n_test: int = 80,
    seed: int = 4,
) -> TriParallelTask:
    base = word_class_task(
        n_pairs=n_pairs,
        n_validation=n_validation,
        n_test=n_test,
        seed=seed,
    )
    source_sides = base.corpus.side("source")
    corpora = tuple(
        ParallelCorpus(
            tuple((src, mirror(src, p)) for src in source_sides)
        )
        for p in MIRROR_PREFIXES
    )
    tests = ([], [])
    for sent in base.test:
        # base test tokens are already q-mirrored; recover source forms
        source_tokens = tuple(tok[1:] for tok in sent.tokens)
        tests[0].append(TaggedSentence(mirror(source_tokens, "q"), sent.tags))
        tests[1].append(TaggedSentence(mirror(source_tokens, "z"), sent.tags))
    return TriParallelTask(
        corpora=corpora,
        tagset=base.tagset,
        train=base.train,
        validation=base.validation,
        tests=tests,
    )
