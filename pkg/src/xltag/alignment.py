"""Lexical-translation baseline: EM word alignment and tag projection.

A single lexical translation table t(target|source) is estimated by EM
from uniform start, every sentence carrying an extra NULL source slot.
Each target token is then linked to its most likely source token and
inherits that token's tag; unlinked tokens get the unknown-tag marker,
and sentences with too many unlinked tokens are dropped from the
projected training set.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import ParallelCorpus, TaggedSentence, TagSet
from .errors import DataError

UNKNOWN_TAG = "__UNK_TAG__"

# per-bi-sentence links: target position -> source position, None = NULL
AlignmentLinks = tuple[int | None, ...]


@dataclass
class TranslationTable:
    """t(target_word | source_word), with a separate NULL source row."""

    probs: dict[str, dict[str, float]]
    null_probs: dict[str, float]

    def prob(self, source: str | None, target: str) -> float:
        if source is None:
            return self.null_probs.get(target, 0.0)
        return self.probs.get(source, {}).get(target, 0.0)


def train_ibm1(corpus: ParallelCorpus, iterations: int = 5) -> TranslationTable:
    """EM for the lexical table, starting from a uniform distribution.

    Initialization gives every observed co-occurrence (including NULL)
    probability 1/|target vocabulary|, so the first expectation step
    spreads each target token uniformly over its sentence's source
    tokens plus NULL.
    """
    if iterations < 1:
        raise DataError("iterations must be >= 1")
    target_vocab = sorted({w for tgt in corpus.side("target") for w in tgt})
    uniform = 1.0 / len(target_vocab)

    probs: dict[str, dict[str, float]] = defaultdict(dict)
    null_probs: dict[str, float] = {}
    for src, tgt in corpus.pairs:
        for f in tgt:
            null_probs[f] = uniform
            for s in src:
                probs[s][f] = uniform
    table = TranslationTable(dict(probs), null_probs)

    for _ in range(iterations):
        counts: dict[str | None, dict[str, float]] = defaultdict(
            lambda: defaultdict(float)
        )
        for src, tgt in corpus.pairs:
            for f in tgt:
                denom = table.null_probs.get(f, 0.0) + sum(
                    table.probs[s].get(f, 0.0) for s in src
                )
                counts[None][f] += table.null_probs.get(f, 0.0) / denom
                for s in src:
                    counts[s][f] += table.probs[s].get(f, 0.0) / denom
        new_probs = {}
        for s, row in counts.items():
            total = sum(row.values())
            normalized = {f: v / total for f, v in row.items()}
            if s is None:
                table.null_probs = normalized
            else:
                new_probs[s] = normalized
        table.probs = new_probs
    return table


def corpus_log_likelihood(
    table: TranslationTable, corpus: ParallelCorpus
) -> float:
    """Log-likelihood of the target sides under uniform alignment."""
    total = 0.0
    for src, tgt in corpus.pairs:
        slots = len(src) + 1
        for f in tgt:
            p = (
                table.null_probs.get(f, 0.0)
                + sum(table.prob(s, f) for s in src)
            ) / slots
            total += math.log(p) if p > 0 else float("-inf")
    return total


def align(
    table: TranslationTable, pair: tuple[Sequence[str], Sequence[str]]
) -> AlignmentLinks:
    """Link each target token to its best source token, or NULL.

    Ties between source positions go to the leftmost; NULL wins only
    when strictly more likely than every source token (an entirely
    unknown target word therefore links to NULL).
    """
    src, tgt = pair
    links: list[int | None] = []
    for f in tgt:
        best_pos: int | None = None
        best = 0.0
        for j, s in enumerate(src):
            v = table.prob(s, f)
            if v > best:
                best = v
                best_pos = j
        if table.null_probs.get(f, 0.0) > best:
            best_pos = None
        links.append(best_pos)
    return tuple(links)


def align_corpus(
    table: TranslationTable, corpus: ParallelCorpus
) -> list[AlignmentLinks]:
    return [align(table, pair) for pair in corpus.pairs]


def extend_tagset_with_unknown(tagset: TagSet) -> TagSet:
    """Append the unknown-tag marker label (no-op when already present)."""
    if UNKNOWN_TAG in tagset:
        return tagset
    return TagSet(tagset.name, tagset.labels + (UNKNOWN_TAG,))


def project_tags(
    tagged_source: Sequence[TaggedSentence],
    links: Sequence[AlignmentLinks],
    corpus: ParallelCorpus,
    tagset: TagSet,
    null_drop_threshold: float = 0.5,
) -> tuple[list[TaggedSentence], TagSet]:
    """Copy each linked source token's tag onto its target token.

    NULL-linked tokens receive the unknown-tag marker; a sentence whose
    fraction of NULL links exceeds the threshold is dropped. Returns the
    projected target sentences and the marker-extended tagset they are
    indexed against.
    """
    if len(tagged_source) != corpus.n_pairs or len(links) != corpus.n_pairs:
        raise DataError(
            "tagged source, links and corpus disagree on sentence count"
        )
    extended = extend_tagset_with_unknown(tagset)
    unk = extended.index(UNKNOWN_TAG)
    projected = []
    for i, (pair, sent, sent_links) in enumerate(
        zip(corpus.pairs, tagged_source, links)
    ):
        src, tgt = pair
        if len(sent.tokens) != len(src):
            raise DataError(f"bi-sentence {i}: tagged source length differs")
        if len(sent_links) != len(tgt):
            raise DataError(f"bi-sentence {i}: links do not cover the target")
        tags = tuple(
            unk if link is None else sent.tags[link] for link in sent_links
        )
        n_null = sum(1 for link in sent_links if link is None)
        if n_null / len(tgt) > null_drop_threshold:
            continue
        projected.append(TaggedSentence(tuple(tgt), tags))
    return projected, extended


def write_alignment_links(
    links: Sequence[AlignmentLinks], path: str | Path
) -> None:
    """One line per bi-sentence of `tgtpos-srcpos` items, NULL spelled out."""
    lines = []
    for sent_links in links:
        items = [
            f"{t}-{'NULL' if s is None else s}"
            for t, s in enumerate(sent_links)
        ]
        lines.append(" ".join(items))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_alignment_links(path: str | Path) -> list[AlignmentLinks]:
    links: list[AlignmentLinks] = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        sent: list[int | None] = []
        for item in line.split():
            try:
                t, s = item.split("-", 1)
                if int(t) != len(sent):
                    raise ValueError
                sent.append(None if s == "NULL" else int(s))
            except ValueError:
                raise DataError(
                    f"{path}: line {lineno}: bad link item {item!r}"
                ) from None
        links.append(tuple(sent))
    return links
