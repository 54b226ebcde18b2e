"""Linear interpolation of two taggers' distributions, tuning, metrics.

The two systems produce per-token tag distributions over the same tagset;
they are mixed pointwise with weight mu on the first system and the most
probable tag of the mixture is chosen. mu is tuned by two-fold
cross-validation on the test corpus: each half picks the grid value
maximizing per-token accuracy and tags the other half with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import TaggedSentence, TagSet
from .errors import DataError

# a TagDistribution is a 1-D probability vector over the tagset
TagDistribution = np.ndarray


def interpolate(
    p1: TagDistribution, p2: TagDistribution, mu: float
) -> TagDistribution:
    """Pointwise mu * p1 + (1 - mu) * p2; boundary values are exact."""
    if p1.shape != p2.shape:
        raise DataError(
            f"distribution sizes differ: {p1.shape} vs {p2.shape}"
        )
    if not 0.0 <= mu <= 1.0:
        raise DataError(f"interpolation weight {mu} outside [0, 1]")
    if mu == 1.0:
        return p1.copy()
    if mu == 0.0:
        return p2.copy()
    return mu * p1 + (1.0 - mu) * p2


def combined_tag(
    dists1: Sequence[TagDistribution],
    dists2: Sequence[TagDistribution],
    mu: float,
) -> list[int]:
    """Argmax of the interpolated distributions, lowest index on ties."""
    if len(dists1) != len(dists2):
        raise DataError("taggers produced different sentence lengths")
    return [
        int(np.argmax(interpolate(p1, p2, mu)))
        for p1, p2 in zip(dists1, dists2)
    ]


@dataclass
class EvalReport:
    """Per-token accuracy, OOV accuracy and confusion counts."""

    total_tokens: int
    correct_tokens: int
    oov_tokens: int
    oov_correct: int
    confusion: np.ndarray  # (gold, predicted) counts
    tagset: TagSet
    mu_per_fold: tuple[float, float] | None = None

    @property
    def accuracy_all(self) -> float:
        return self.correct_tokens / self.total_tokens

    @property
    def accuracy_oov(self) -> float | None:
        """None when the corpus has no OOV tokens (not reported as 0)."""
        if self.oov_tokens == 0:
            return None
        return self.oov_correct / self.oov_tokens

    def kv_lines(self) -> list[str]:
        lines = [
            f"accuracy_all={self.accuracy_all!r}",
            f"tokens_total={self.total_tokens}",
            f"tokens_correct={self.correct_tokens}",
            f"tokens_oov={self.oov_tokens}",
            f"tokens_oov_correct={self.oov_correct}",
        ]
        if self.accuracy_oov is not None:
            lines.insert(1, f"accuracy_oov={self.accuracy_oov!r}")
        if self.mu_per_fold is not None:
            lines.append(f"mu_fold0={self.mu_per_fold[0]!r}")
            lines.append(f"mu_fold1={self.mu_per_fold[1]!r}")
        return lines

    def to_text(self) -> str:
        out = [
            "tagging evaluation",
            "  OOV = token whose occurrence vector is empty "
            "(absent from the representation corpus)",
            f"  tokens:       {self.total_tokens}",
            f"  accuracy_all: {self.accuracy_all:.4f}",
        ]
        if self.accuracy_oov is None:
            out.append("  accuracy_oov: n/a (no OOV tokens)")
        else:
            out.append(
                f"  accuracy_oov: {self.accuracy_oov:.4f} "
                f"({self.oov_tokens} tokens)"
            )
        if self.mu_per_fold is not None:
            out.append(
                f"  mu per fold:  {self.mu_per_fold[0]:.2f} "
                f"{self.mu_per_fold[1]:.2f}"
            )
        out.append("  confusion (gold -> predicted, nonzero only):")
        for g in range(len(self.tagset)):
            for p in range(len(self.tagset)):
                n = int(self.confusion[g, p])
                if n:
                    out.append(
                        f"    {self.tagset.labels[g]:12s} -> "
                        f"{self.tagset.labels[p]:12s} {n}"
                    )
        return "\n".join(out) + "\n"

    def write(self, text_path: str | Path, kv_path: str | Path) -> None:
        Path(text_path).write_text(self.to_text(), encoding="utf-8")
        Path(kv_path).write_text(
            "\n".join(self.kv_lines()) + "\n", encoding="utf-8"
        )


def evaluate(
    gold: Sequence[TaggedSentence],
    predicted: Sequence[Sequence[int]],
    tagset: TagSet,
    oov_flags: Sequence[Sequence[bool]] | None = None,
) -> EvalReport:
    """Per-token accuracy over all tokens and over OOV tokens only."""
    if len(gold) != len(predicted):
        raise DataError("gold and predictions have different lengths")
    if oov_flags is not None and len(oov_flags) != len(gold):
        raise DataError("OOV flags do not cover the corpus")
    k = len(tagset)
    confusion = np.zeros((k, k), dtype=int)
    total = correct = oov_total = oov_correct = 0
    for i, (sent, pred) in enumerate(zip(gold, predicted)):
        if len(sent.tags) != len(pred):
            raise DataError(f"sentence {i}: prediction length differs")
        flags = oov_flags[i] if oov_flags is not None else [False] * len(pred)
        if len(flags) != len(pred):
            raise DataError(f"sentence {i}: OOV flag length differs")
        for g, p, is_oov in zip(sent.tags, pred, flags):
            confusion[g, p] += 1
            total += 1
            hit = int(g == p)
            correct += hit
            if is_oov:
                oov_total += 1
                oov_correct += hit
    if total == 0:
        raise DataError("empty evaluation corpus")
    return EvalReport(
        total_tokens=total,
        correct_tokens=correct,
        oov_tokens=oov_total,
        oov_correct=oov_correct,
        confusion=confusion,
        tagset=tagset,
    )


def _accuracy_at_mu(gold_sents, dists1, dists2, mu) -> float:
    correct = total = 0
    for sent, d1, d2 in zip(gold_sents, dists1, dists2):
        pred = combined_tag(d1, d2, mu)
        correct += sum(int(g == p) for g, p in zip(sent.tags, pred))
        total += len(pred)
    return correct / total if total else 0.0


def mu_grid(step: float) -> list[float]:
    if not 0.0 < step <= 1.0:
        raise DataError("grid step must be in (0, 1]")
    n = int(round(1.0 / step))
    return [round(i * step, 10) for i in range(n)] + [1.0]


def tune_mu(
    gold: Sequence[TaggedSentence],
    dists1: Sequence[Sequence[TagDistribution]],
    dists2: Sequence[Sequence[TagDistribution]],
    grid_step: float = 0.05,
    tagset: TagSet | None = None,
    oov_flags: Sequence[Sequence[bool]] | None = None,
) -> tuple[tuple[float, float], EvalReport]:
    """Two-fold cross-validated interpolation weight and pooled report.

    The corpus is split by order into first-ceil(S/2) / rest. Each half
    selects the grid mu maximizing its own accuracy (ties to the smaller
    mu, favoring the second system) and is then tagged with the mu tuned
    on the other half.
    """
    if len(gold) < 2:
        raise DataError("need at least 2 sentences to cross-validate")
    if not len(gold) == len(dists1) == len(dists2):
        raise DataError("distributions do not cover the corpus")
    if tagset is None:
        k = len(dists1[0][0])
        tagset = TagSet("anonymous", tuple(f"T{i}" for i in range(k)))

    cut = math.ceil(len(gold) / 2)
    folds = [slice(0, cut), slice(cut, len(gold))]
    grid = mu_grid(grid_step)

    tuned = []
    for fold in folds:
        best_mu, best_acc = 0.0, -1.0
        for mu in grid:
            acc = _accuracy_at_mu(gold[fold], dists1[fold], dists2[fold], mu)
            if acc > best_acc:
                best_mu, best_acc = mu, acc
        tuned.append(best_mu)

    # each half is tagged with the weight tuned on the other half
    predictions: list[list[int]] = []
    for fold, mu in ((folds[0], tuned[1]), (folds[1], tuned[0])):
        for d1, d2 in zip(dists1[fold], dists2[fold]):
            predictions.append(combined_tag(d1, d2, mu))
    report = evaluate(gold, predictions, tagset, oov_flags)
    report.mu_per_fold = (tuned[0], tuned[1])
    return (tuned[0], tuned[1]), report
