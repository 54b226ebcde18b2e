"""Trigram HMM tagger with deleted interpolation and a suffix model.

Transition probabilities interpolate unigram, bigram and trigram
maximum-likelihood estimates with weights set by deleted interpolation.
Sentences are padded with a boundary symbol (two at the start, one at the
end) and the end transition is scored during decoding. Emissions are
maximum likelihood for known words; unknown words are scored through a
suffix model smoothed by successive abstraction over shorter suffixes.
Decoding is exact (no beam) and runs in log space.

Sentences projected from alignments may carry the unknown-tag marker:
marker tokens contribute no emission counts and every tag n-gram touching
a marker position is skipped, so tags separated by an unprojected token
are never counted as adjacent. The marker never enters the model tagset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .alignment import UNKNOWN_TAG
from .corpus import TaggedSentence, TagSet
from .errors import DataError
from .serialize import Reader, Writer

HMM_MAGIC = b"XLHMM1"

NEG_INF = float("-inf")


@dataclass
class HmmModel:
    tagset: TagSet  # real tags only; boundary symbol has index len(tagset)
    lambdas: tuple[float, float, float]  # unigram, bigram, trigram weights
    # counts are over prediction events (every token plus the end boundary,
    # with their one- and two-symbol left contexts), so each order's rows
    # normalize to 1 over outcomes
    unigram: np.ndarray   # (S,) outcome counts, boundary last
    bigram: np.ndarray    # (S, S) context -> outcome
    trigram: np.ndarray   # (S, S, S)
    emission_counts: dict[str, np.ndarray]  # word -> (K,) tag counts
    word_freq: dict[str, int]
    suffix_dists: dict[str, np.ndarray]  # smoothed P(tag | suffix)
    theta: float
    rare_threshold: int
    max_suffix_len: int
    # derived
    tag_totals: np.ndarray = field(init=False)
    tag_dist: np.ndarray = field(init=False)
    trans: np.ndarray = field(init=False)

    def __post_init__(self):
        k = len(self.tagset)
        totals = np.zeros(k)
        for counts in self.emission_counts.values():
            totals += counts
        self.tag_totals = totals
        total = totals.sum()
        self.tag_dist = totals / total if total > 0 else np.zeros(k)
        self.trans = self._interpolated_transitions()

    @property
    def n_tags(self) -> int:
        return len(self.tagset)

    @property
    def boundary(self) -> int:
        return len(self.tagset)

    def _interpolated_transitions(self) -> np.ndarray:
        s = self.boundary + 1
        l1, l2, l3 = self.lambdas
        n = self.unigram.sum()
        p1 = self.unigram / n if n > 0 else np.zeros(s)
        ctx1 = self.bigram.sum(axis=1)
        ctx2 = self.trigram.sum(axis=2)
        p2 = np.divide(
            self.bigram,
            ctx1[:, None],
            out=np.zeros_like(self.bigram),
            where=ctx1[:, None] > 0,
        )
        p3 = np.divide(
            self.trigram,
            ctx2[:, :, None],
            out=np.zeros_like(self.trigram),
            where=ctx2[:, :, None] > 0,
        )
        return l1 * p1[None, None, :] + l2 * p2[None, :, :] + l3 * p3

    def transition_prob(self, a: int, b: int, t: int) -> float:
        """Interpolated P(t | a, b); symbols may include the boundary."""
        return float(self.trans[a, b, t])

    def emission_prob(self, word: str, tag: int) -> float:
        """P(word | tag) for known words, suffix-model score otherwise."""
        counts = self.emission_counts.get(word)
        if counts is not None:
            total = self.tag_totals[tag]
            return float(counts[tag] / total) if total > 0 else 0.0
        dist = self._suffix_dist(word)
        prior = self.tag_dist[tag]
        return float(dist[tag] / prior) if prior > 0 else 0.0

    def _suffix_dist(self, word: str) -> np.ndarray:
        for length in range(min(len(word), self.max_suffix_len), -1, -1):
            suffix = word[len(word) - length :] if length else ""
            dist = self.suffix_dists.get(suffix)
            if dist is not None:
                return dist
        raise DataError("suffix model has no base distribution")

    def emission_log_matrix(self, tokens: Sequence[str]) -> np.ndarray:
        k = self.n_tags
        out = np.full((len(tokens), k), NEG_INF)
        for i, word in enumerate(tokens):
            row = np.array([self.emission_prob(word, t) for t in range(k)])
            with np.errstate(divide="ignore"):
                out[i] = np.log(row)
        return out


def _deleted_interpolation(
    unigram: np.ndarray, bigram: np.ndarray, trigram: np.ndarray
) -> tuple[float, float, float]:
    """Distribute each trigram's count to the estimator that predicts it
    best when that trigram is deleted from the counts."""
    n = unigram.sum()
    ctx1 = bigram.sum(axis=1)
    ctx2 = trigram.sum(axis=2)
    l1 = l2 = l3 = 0.0
    for a, b, t in np.argwhere(trigram > 0):
        c3 = trigram[a, b, t]
        d3 = (c3 - 1) / (ctx2[a, b] - 1) if ctx2[a, b] > 1 else 0.0
        d2 = (bigram[b, t] - 1) / (ctx1[b] - 1) if ctx1[b] > 1 else 0.0
        d1 = (unigram[t] - 1) / (n - 1) if n > 1 else 0.0
        if d3 >= d2 and d3 >= d1:
            l3 += c3
        elif d2 >= d1:
            l2 += c3
        else:
            l1 += c3
    total = l1 + l2 + l3
    if total == 0:
        return (1 / 3, 1 / 3, 1 / 3)
    return (l1 / total, l2 / total, l3 / total)


def _build_suffix_dists(
    emission_counts: dict[str, np.ndarray],
    word_freq: dict[str, int],
    tag_dist: np.ndarray,
    rare_threshold: int,
    max_suffix_len: int,
) -> tuple[dict[str, np.ndarray], float]:
    k = len(tag_dist)
    mean = tag_dist.mean() if k else 0.0
    theta = (
        float(np.sqrt(((tag_dist - mean) ** 2).sum() / (k - 1)))
        if k > 1
        else 0.0
    )
    suffix_counts: dict[str, np.ndarray] = {}
    for word, counts in emission_counts.items():
        if word_freq[word] > rare_threshold:
            continue
        for length in range(0, min(len(word), max_suffix_len) + 1):
            suffix = word[len(word) - length :] if length else ""
            if suffix in suffix_counts:
                suffix_counts[suffix] += counts
            else:
                suffix_counts[suffix] = counts.copy()
    if not suffix_counts:
        return {"": tag_dist.copy()}, theta

    dists: dict[str, np.ndarray] = {}
    for suffix in sorted(suffix_counts, key=len):
        ml = suffix_counts[suffix] / suffix_counts[suffix].sum()
        parent = tag_dist if suffix == "" else dists[suffix[1:]]
        dists[suffix] = (ml + theta * parent) / (1.0 + theta)
    return dists, theta


def train_hmm(
    sentences: Sequence[TaggedSentence],
    tagset: TagSet,
    rare_threshold: int = 10,
    max_suffix_len: int = 4,
) -> HmmModel:
    """Collect padded n-gram and emission counts and fit the smoothing.

    The tagset may contain the unknown-tag marker (from projection); it
    is stripped from the model and its tokens are treated as unprojected.
    """
    if not sentences:
        raise DataError("cannot train an HMM on an empty corpus")

    labels = list(tagset.labels)
    marker = labels.index(UNKNOWN_TAG) if UNKNOWN_TAG in tagset else None
    real_labels = [lab for lab in labels if lab != UNKNOWN_TAG]
    model_tagset = TagSet(tagset.name, tuple(real_labels))
    remap = {}
    for old, lab in enumerate(labels):
        if lab != UNKNOWN_TAG:
            remap[old] = model_tagset.index(lab)

    k = len(model_tagset)
    boundary = k
    s = k + 1
    unigram = np.zeros(s)
    bigram = np.zeros((s, s))
    trigram = np.zeros((s, s, s))
    emission_counts: dict[str, np.ndarray] = {}
    word_freq: dict[str, int] = {}

    for sent in sentences:
        padded: list[int | None] = [boundary, boundary]
        for tok, tag in zip(sent.tokens, sent.tags):
            if tag == marker:
                padded.append(None)  # unprojected: blocks n-grams through it
                continue
            new_tag = remap[tag]
            padded.append(new_tag)
            if tok not in emission_counts:
                emission_counts[tok] = np.zeros(k)
                word_freq[tok] = 0
            emission_counts[tok][new_tag] += 1
            word_freq[tok] += 1
        padded.append(boundary)
        # prediction events: positions after the start padding; an event
        # touching an unprojected (None) symbol is skipped at that order
        for i in range(2, len(padded)):
            sym = padded[i]
            if sym is None:
                continue
            unigram[sym] += 1
            if padded[i - 1] is not None:
                bigram[padded[i - 1], sym] += 1
                if padded[i - 2] is not None:
                    trigram[padded[i - 2], padded[i - 1], sym] += 1

    if not emission_counts:
        raise DataError("corpus has no projected (non-marker) tokens")

    lambdas = _deleted_interpolation(unigram, bigram, trigram)
    totals = np.zeros(k)
    for counts in emission_counts.values():
        totals += counts
    tag_dist = totals / totals.sum()
    suffix_dists, theta = _build_suffix_dists(
        emission_counts, word_freq, tag_dist, rare_threshold, max_suffix_len
    )
    return HmmModel(
        tagset=model_tagset,
        lambdas=lambdas,
        unigram=unigram,
        bigram=bigram,
        trigram=trigram,
        emission_counts=emission_counts,
        word_freq=word_freq,
        suffix_dists=suffix_dists,
        theta=theta,
        rare_threshold=rare_threshold,
        max_suffix_len=max_suffix_len,
    )


def _log_trans(model: HmmModel) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(model.trans)


def viterbi(model: HmmModel, tokens: Sequence[str]) -> list[int]:
    """Best tag sequence incl. the end-boundary factor, exact decoding.

    Ties resolve to the lexicographically smallest tag-index sequence:
    suffix scores are tabled backward and tags picked greedily forward,
    taking the lowest index among optimal continuations.
    """
    n = len(tokens)
    if n == 0:
        return []
    k = model.n_tags
    boundary = model.boundary
    lt = _log_trans(model)
    emis = model.emission_log_matrix(tokens)

    # best[i][a, b]: best completion score for tokens i..n-1 given the
    # two previously assigned symbols (a, b)
    best = [None] * (n + 1)
    best[n] = lt[:, :, boundary]
    for i in range(n - 1, -1, -1):
        cont = emis[i][None, :] + best[i + 1][:, :k]  # (S, K) over (b, t)
        best[i] = np.max(lt[:, :, :k] + cont[None, :, :], axis=2)

    tags: list[int] = []
    a, b = boundary, boundary
    for i in range(n):
        scores = lt[a, b, :k] + emis[i] + best[i + 1][b, :k]
        t = int(np.argmax(scores))
        tags.append(t)
        a, b = b, t
    return tags


def posterior(model: HmmModel, tokens: Sequence[str]) -> list[np.ndarray]:
    """Per-position tag marginals by forward-backward in log space."""
    n = len(tokens)
    if n == 0:
        return []
    k = model.n_tags
    boundary = model.boundary
    s = boundary + 1
    lt = _log_trans(model)
    emis = model.emission_log_matrix(tokens)

    # state after position i is (t_{i-1}, t_i); rows cover all symbols so
    # the boundary can appear as t_0's predecessor
    alpha = np.full((n, s, k), NEG_INF)
    alpha[0, boundary, :] = lt[boundary, boundary, :k] + emis[0]
    for i in range(1, n):
        contrib = alpha[i - 1][:, :, None] + lt[:, :k, :k]
        alpha[i, :k, :] = logsumexp(contrib, axis=0) + emis[i][None, :]

    beta = np.full((n, s, k), NEG_INF)
    beta[n - 1] = lt[:, :k, boundary]
    for i in range(n - 2, -1, -1):
        nxt = emis[i + 1][None, :] + beta[i + 1][:k, :]  # (K, K) over (t, t')
        beta[i] = logsumexp(lt[:, :k, :k] + nxt[None, :, :], axis=2)

    log_z = logsumexp(alpha[0] + beta[0])
    if not np.isfinite(log_z):
        raise DataError("sentence has zero probability under the model")
    marginals = []
    for i in range(n):
        log_m = logsumexp(alpha[i] + beta[i], axis=0) - log_z
        m = np.exp(log_m)
        m /= m.sum()
        marginals.append(m)
    return marginals


def save_hmm(model: HmmModel, path: str | Path) -> None:
    s = model.boundary + 1
    with open(path, "wb") as fh:
        w = Writer(fh)
        w.magic(HMM_MAGIC)
        w.string(model.tagset.name)
        w.u32(model.n_tags)
        for label in model.tagset.labels:
            w.string(label)
        for lam in model.lambdas:
            w.f64(lam)
        w.u32(model.rare_threshold)
        w.u32(model.max_suffix_len)
        w.f64(model.theta)
        w.array(model.unigram.reshape(1, s))
        w.array(model.bigram)
        w.array(model.trigram.reshape(s * s, s))
        w.u32(len(model.emission_counts))
        for word in sorted(model.emission_counts):
            w.string(word)
            w.u32(model.word_freq[word])
            w.array(model.emission_counts[word].reshape(1, -1))
        w.u32(len(model.suffix_dists))
        for suffix in sorted(model.suffix_dists):
            w.string(suffix)
            w.array(model.suffix_dists[suffix].reshape(1, -1))


def load_hmm(path: str | Path) -> HmmModel:
    with open(path, "rb") as fh:
        r = Reader(fh)
        r.magic(HMM_MAGIC)
        name = r.string()
        k = r.u32()
        labels = tuple(r.string() for _ in range(k))
        lambdas = (r.f64(), r.f64(), r.f64())
        rare_threshold = r.u32()
        max_suffix_len = r.u32()
        theta = r.f64()
        s = k + 1
        unigram = r.array().reshape(s)
        bigram = r.array()
        trigram = r.array().reshape(s, s, s)
        emission_counts = {}
        word_freq = {}
        for _ in range(r.u32()):
            word = r.string()
            word_freq[word] = r.u32()
            emission_counts[word] = r.array().reshape(k)
        suffix_dists = {}
        for _ in range(r.u32()):
            suffix = r.string()
            suffix_dists[suffix] = r.array().reshape(k)
    return HmmModel(
        tagset=TagSet(name, labels),
        lambdas=lambdas,
        unigram=unigram,
        bigram=bigram,
        trigram=trigram,
        emission_counts=emission_counts,
        word_freq=word_freq,
        suffix_dists=suffix_dists,
        theta=theta,
        rare_threshold=rare_threshold,
        max_suffix_len=max_suffix_len,
    )
