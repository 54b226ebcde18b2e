"""CBOW embeddings with negative sampling, and OOV resolution.

A word with an all-zero occurrence vector carries no identity signal. At
test time such a word is replaced by the known word (nonempty occurrence
vector) that the CBOW model scores highest given the surrounding window,
and the replacement's vector is fed to the tagger instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import expit

from .corpus import Side
from .errors import DataError
from .representation import ReprTable
from .serialize import Reader, Writer

CBOW_MAGIC = b"XLCBW1"

# floor for the linearly decayed learning rate, as a fraction of lr_init
_MIN_LR_FRACTION = 1e-4
_NOISE_POWER = 0.75


@dataclass
class CbowModel:
    words: tuple[str, ...]
    input_vecs: np.ndarray   # (V, dim) context-side embeddings
    output_vecs: np.ndarray  # (V, dim) prediction-side embeddings
    window: int
    negatives: int

    def __post_init__(self):
        self.word_ids = {w: i for i, w in enumerate(self.words)}

    @property
    def dim(self) -> int:
        return self.input_vecs.shape[1]

    def __contains__(self, word: str) -> bool:
        return word in self.word_ids


def train_cbow(
    sentences: Sequence[Sequence[str]],
    window: int = 5,
    dim: int = 100,
    negatives: int = 5,
    epochs: int = 5,
    lr: float = 0.025,
    seed: int = 0,
) -> CbowModel:
    """Train CBOW with negative sampling; deterministic given the seed.

    The center word is predicted from the mean input embedding of its
    window; negatives are drawn from the unigram^0.75 distribution.
    The learning rate decays linearly over all epochs.
    """
    if window < 1 or dim < 1 or negatives < 0 or epochs < 0:
        raise DataError("invalid CBOW hyperparameters")
    sentences = [list(s) for s in sentences if len(s) > 0]
    if not sentences:
        raise DataError("cannot train CBOW on an empty corpus")

    counts: dict[str, int] = {}
    order: list[str] = []
    for sent in sentences:
        for w in sent:
            if w not in counts:
                order.append(w)
                counts[w] = 0
            counts[w] += 1
    words = tuple(order)
    ids = {w: i for i, w in enumerate(words)}
    vocab_size = len(words)

    rng = np.random.default_rng(seed)
    input_vecs = rng.uniform(-0.5 / dim, 0.5 / dim, size=(vocab_size, dim))
    output_vecs = np.zeros((vocab_size, dim))

    noise = np.array([counts[w] for w in words], dtype=float) ** _NOISE_POWER
    noise /= noise.sum()

    total_tokens = sum(len(s) for s in sentences)
    total_steps = max(1, total_tokens * max(1, epochs))
    processed = 0
    for _ in range(epochs):
        for sent in sentences:
            sent_ids = [ids[w] for w in sent]
            for pos, center in enumerate(sent_ids):
                step_lr = lr * max(
                    1.0 - processed / total_steps, _MIN_LR_FRACTION
                )
                processed += 1
                lo = max(0, pos - window)
                hi = min(len(sent_ids), pos + window + 1)
                context = sent_ids[lo:pos] + sent_ids[pos + 1 : hi]
                if not context:
                    continue
                h = input_vecs[context].mean(axis=0)
                targets = [center]
                if negatives:
                    targets.extend(
                        int(t)
                        for t in rng.choice(
                            vocab_size, size=negatives, p=noise
                        )
                        if int(t) != center
                    )
                grad_h = np.zeros(dim)
                for rank, t in enumerate(targets):
                    label = 1.0 if rank == 0 else 0.0
                    g = expit(output_vecs[t] @ h) - label
                    grad_h += g * output_vecs[t]
                    output_vecs[t] -= step_lr * g * h
                input_vecs[context] -= step_lr * grad_h / len(context)

    return CbowModel(words, input_vecs, output_vecs, window, negatives)


def context_window(
    tokens: Sequence[str], position: int, window: int
) -> list[str]:
    """Symmetric window around a position, clipped at sentence bounds."""
    lo = max(0, position - window)
    hi = min(len(tokens), position + window + 1)
    return list(tokens[lo:position]) + list(tokens[position + 1 : hi])


def resolve_oov(
    word: str,
    context: Sequence[str],
    cbow: CbowModel,
    table: ReprTable,
    side: Side,
) -> str:
    """Replace an unknown word by the known word its context predicts best.

    Candidates are CBOW-vocabulary words with a nonempty occurrence vector
    on the given side. Falls back to the word itself when it is already
    known or when no context word is in the CBOW vocabulary.
    """
    if not table.get(side, word).is_empty:
        return word
    context_ids = [cbow.word_ids[w] for w in context if w in cbow.word_ids]
    if not context_ids:
        return word
    candidates = [
        i
        for i, w in enumerate(cbow.words)
        if not table.get(side, w).is_empty
    ]
    if not candidates:
        return word
    h = cbow.input_vecs[context_ids].mean(axis=0)
    scores = cbow.output_vecs[candidates] @ h
    return cbow.words[candidates[int(np.argmax(scores))]]


def save_cbow(model: CbowModel, path: str | Path) -> None:
    with open(path, "wb") as fh:
        w = Writer(fh)
        w.magic(CBOW_MAGIC)
        w.u32(len(model.words))
        w.u32(model.dim)
        w.u32(model.window)
        w.u32(model.negatives)
        for word in model.words:
            w.string(word)
        w.array(model.input_vecs)
        w.array(model.output_vecs)


def load_cbow(path: str | Path) -> CbowModel:
    with open(path, "rb") as fh:
        r = Reader(fh)
        r.magic(CBOW_MAGIC)
        vocab_size = r.u32()
        dim = r.u32()
        window = r.u32()
        negatives = r.u32()
        words = tuple(r.string() for _ in range(vocab_size))
        input_vecs = r.array()
        output_vecs = r.array()
    if input_vecs.shape != (vocab_size, dim):
        raise DataError("CBOW matrix shape does not match header")
    return CbowModel(words, input_vecs, output_vecs, window, negatives)
