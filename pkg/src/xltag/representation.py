"""Occurrence-based common word representation.

Every word (on either side of a parallel corpus) is represented by the set
of bi-sentence indices it occurs in: a sparse binary vector of length N.
A word and its translation occur in overlapping bi-sentences, so their
vectors are close, which is what lets one tagger serve all languages of
the corpus. Words never seen in the corpus get the empty (all-zero) vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import ParallelCorpus, Side, SIDES
from .errors import DataError
from .serialize import Reader, Writer

REPR_MAGIC = b"XLREP1"


@dataclass(frozen=True)
class CommonWordVector:
    """Sorted bi-sentence indices where the word occurs; dim is N."""

    indices: tuple[int, ...]
    dim: int

    def __post_init__(self):
        if any(not 0 <= i < self.dim for i in self.indices):
            raise DataError("occurrence index out of range")
        if any(a >= b for a, b in zip(self.indices, self.indices[1:])):
            raise DataError("occurrence indices must be sorted and unique")

    @property
    def is_empty(self) -> bool:
        return not self.indices


@dataclass
class ReprTable:
    """Map from (side, word) to its occurrence vector over N bi-sentences."""

    dim: int
    _vectors: dict[tuple[Side, str], CommonWordVector] = field(
        default_factory=dict
    )

    def get(self, side: Side, word: str) -> CommonWordVector:
        """The word's vector; the empty vector if the word is unknown."""
        vec = self._vectors.get((side, word))
        if vec is None:
            return CommonWordVector((), self.dim)
        return vec

    def __contains__(self, key: tuple[Side, str]) -> bool:
        return key in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def words(self, side: Side) -> list[str]:
        return [w for (s, w) in self._vectors if s == side]

    def items(self):
        return self._vectors.items()

    @classmethod
    def merged(cls, tables: Iterable["ReprTable"]) -> "ReprTable":
        """Union of tables over the same bi-sentence index space.

        Useful for multi-parallel corpora loaded as several two-sided
        corpora that share pair indices. Duplicate entries must agree.
        """
        tables = list(tables)
        if not tables:
            raise DataError("nothing to merge")
        dim = tables[0].dim
        merged: dict[tuple[Side, str], CommonWordVector] = {}
        for table in tables:
            if table.dim != dim:
                raise DataError(
                    f"cannot merge tables of dim {table.dim} and {dim}"
                )
            for key, vec in table.items():
                old = merged.get(key)
                if old is not None and old != vec:
                    raise DataError(
                        f"conflicting vectors for {key} while merging"
                    )
                merged[key] = vec
        return cls(dim, merged)


def build_representation(corpus: ParallelCorpus) -> ReprTable:
    """Index every word of both sides by the bi-sentences containing it."""
    occurrences: dict[tuple[Side, str], list[int]] = {}
    for i, (src, tgt) in enumerate(corpus.pairs):
        for side, tokens in (("source", src), ("target", tgt)):
            for word in set(tokens):
                occurrences.setdefault((side, word), []).append(i)
    n = corpus.n_pairs
    vectors = {
        key: CommonWordVector(tuple(idx), n)
        for key, idx in occurrences.items()
    }
    return ReprTable(n, vectors)


def save_repr_table(table: ReprTable, path: str | Path) -> None:
    entries = sorted(table.items(), key=lambda kv: (kv[0][0], kv[0][1]))
    with open(path, "wb") as fh:
        w = Writer(fh)
        w.magic(REPR_MAGIC)
        w.u32(table.dim)
        w.u32(len(entries))
        for (side, word), vec in entries:
            w.u8(SIDES.index(side))
            w.string(word)
            w.u32(len(vec.indices))
            for i in vec.indices:
                w.u32(i)


def load_repr_table(path: str | Path) -> ReprTable:
    with open(path, "rb") as fh:
        r = Reader(fh)
        r.magic(REPR_MAGIC)
        dim = r.u32()
        count = r.u32()
        vectors: dict[tuple[Side, str], CommonWordVector] = {}
        for _ in range(count):
            side = SIDES[r.u8()]
            word = r.string()
            size = r.u32()
            indices = tuple(r.u32() for _ in range(size))
            vectors[(side, word)] = CommonWordVector(indices, dim)
    return ReprTable(dim, vectors)
