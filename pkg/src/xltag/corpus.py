"""Parallel corpora, tagged corpora, tagsets and vocabularies.

File formats:
  * parallel corpus: two UTF-8 text files, one sentence per line, line i of
    each file forms bi-sentence i;
  * tagged corpus: token<TAB>tag per line, blank line terminates a sentence;
  * tagset: one label per line, order defines indices.

All types are immutable after construction. Tokenization is whitespace-only;
lowercasing is a flag (default on) applied to tokens, never to tag labels.
"""

from __future__ import annotations

import importlib.resources
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

from .errors import CorpusAlignmentError, CorpusFormatError, TagsetError

Side = Literal["source", "target"]
SIDES: tuple[Side, Side] = ("source", "target")


@dataclass(frozen=True)
class TagSet:
    """Ordered inventory of tag labels; a label's position is its index."""

    name: str
    labels: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.labels:
            raise TagsetError(f"tagset {self.name!r} has no labels")
        index = {}
        for i, label in enumerate(self.labels):
            if not label:
                raise TagsetError(f"tagset {self.name!r} has an empty label")
            if label in index:
                raise TagsetError(f"tagset {self.name!r} repeats label {label!r}")
            index[label] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise TagsetError(
                f"label {label!r} is not in tagset {self.name!r}"
            ) from None


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple[str, ...]
    tags: tuple[int, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise CorpusFormatError(
                f"{len(self.tokens)} tokens but {len(self.tags)} tags"
            )

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class ParallelCorpus:
    """Sentence-aligned bi-text; pair index i is bi-sentence i."""

    pairs: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]

    def __post_init__(self):
        for i, (src, tgt) in enumerate(self.pairs):
            if not src or not tgt:
                raise CorpusFormatError(f"bi-sentence {i} has an empty side")

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    def side(self, side: Side) -> tuple[tuple[str, ...], ...]:
        pos = 0 if side == "source" else 1
        return tuple(pair[pos] for pair in self.pairs)


@dataclass(frozen=True)
class Vocabulary:
    """Distinct tokens of one corpus side, with dense ids and frequencies."""

    side: Side
    words: tuple[str, ...]
    frequencies: tuple[int, ...]
    _ids: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_ids", {w: i for i, w in enumerate(self.words)}
        )

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._ids

    def id_of(self, word: str) -> int:
        return self._ids[word]

    def frequency(self, word: str) -> int:
        i = self._ids.get(word)
        return 0 if i is None else self.frequencies[i]


def _read_lines(path: str | Path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def load_parallel_corpus(
    source_path: str | Path,
    target_path: str | Path,
    lowercase: bool = True,
) -> ParallelCorpus:
    """Read two one-sentence-per-line files into a ParallelCorpus.

    Raises CorpusAlignmentError on a line-count mismatch and
    CorpusFormatError (with the 1-based line number) on empty lines.
    """
    src_lines = _read_lines(source_path)
    tgt_lines = _read_lines(target_path)
    if len(src_lines) != len(tgt_lines):
        raise CorpusAlignmentError(
            f"{source_path} has {len(src_lines)} lines but "
            f"{target_path} has {len(tgt_lines)}"
        )
    pairs = []
    for i, (src, tgt) in enumerate(zip(src_lines, tgt_lines)):
        if lowercase:
            src, tgt = src.lower(), tgt.lower()
        src_tokens = tuple(src.split())
        tgt_tokens = tuple(tgt.split())
        if not src_tokens:
            raise CorpusFormatError(f"{source_path}: line {i + 1} is empty")
        if not tgt_tokens:
            raise CorpusFormatError(f"{target_path}: line {i + 1} is empty")
        pairs.append((src_tokens, tgt_tokens))
    return ParallelCorpus(tuple(pairs))


def write_parallel_corpus(
    corpus: ParallelCorpus,
    source_path: str | Path,
    target_path: str | Path,
) -> None:
    for path, side in ((source_path, "source"), (target_path, "target")):
        lines = [" ".join(tokens) for tokens in corpus.side(side)]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_tagged_corpus(
    path: str | Path,
    tagset: TagSet,
    lowercase: bool = True,
) -> list[TaggedSentence]:
    """Read a token<TAB>tag file; blank lines separate sentences."""
    sentences: list[TaggedSentence] = []
    tokens: list[str] = []
    tags: list[int] = []

    def flush():
        if tokens:
            sentences.append(TaggedSentence(tuple(tokens), tuple(tags)))
            tokens.clear()
            tags.clear()

    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            flush()
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise CorpusFormatError(
                f"{path}: line {lineno} is not token<TAB>tag: {line!r}"
            )
        token, label = fields
        if label not in tagset:
            raise TagsetError(
                f"{path}: line {lineno}: label {label!r} "
                f"is not in tagset {tagset.name!r}"
            )
        tokens.append(token.lower() if lowercase else token)
        tags.append(tagset.index(label))
    flush()
    return sentences


def write_tagged_corpus(
    sentences: Iterable[TaggedSentence],
    tagset: TagSet,
    path: str | Path,
) -> None:
    blocks = []
    for sent in sentences:
        blocks.append(
            "\n".join(
                f"{tok}\t{tagset.labels[tag]}"
                for tok, tag in zip(sent.tokens, sent.tags)
            )
        )
    Path(path).write_text("\n\n".join(blocks) + "\n", encoding="utf-8")


def load_tagset(path: str | Path, name: str | None = None) -> TagSet:
    labels = [line.strip() for line in _read_lines(path) if line.strip()]
    return TagSet(name or Path(path).stem, tuple(labels))


def write_tagset(tagset: TagSet, path: str | Path) -> None:
    Path(path).write_text("\n".join(tagset.labels) + "\n", encoding="utf-8")


def universal_tagset() -> TagSet:
    """The packaged 12-label coarse POS tagset."""
    text = (
        importlib.resources.files("xltag")
        .joinpath("data/universal_pos.txt")
        .read_text(encoding="utf-8")
    )
    labels = tuple(line.strip() for line in text.splitlines() if line.strip())
    return TagSet("universal", labels)


def build_vocabulary(corpus: ParallelCorpus, side: Side) -> Vocabulary:
    """Distinct tokens of one side, ids in first-occurrence order."""
    counts: Counter[str] = Counter()
    order: list[str] = []
    for sentence in corpus.side(side):
        for token in sentence:
            if token not in counts:
                order.append(token)
            counts[token] += 1
    return Vocabulary(
        side=side,
        words=tuple(order),
        frequencies=tuple(counts[w] for w in order),
    )
