"""Recurrent sequence taggers over the sparse occurrence representation.

Two architectures share one weight container: a causal tagger whose
forward layer carries left context, and a bidirectional variant with a
separate backward layer over the reversed sentence, merged by summing
both contributions inside the compression layer's pre-activation. An
external tag stream (e.g. coarse POS for supersense models) can be
injected additively into the input, the recurrent layer(s), or the
compression layer.

Input vectors are sparse binary sets of bi-sentence indices, so the
input-to-hidden product is a sum of weight rows. Input-site injection
adds a dense projection to the input vector and therefore cannot use the
sparse path. Training is plain SGD with exact backpropagation through
time over the whole sentence (a truncation horizon optionally cuts the
gradient carries at fixed block boundaries). All randomness comes from
the config seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import expit, softmax

from .cbow import CbowModel, context_window, resolve_oov
from .corpus import Side, TagSet
from .errors import ConfigError, DataError, DivergenceError
from .representation import CommonWordVector, ReprTable
from .serialize import Reader, Writer

RNN_MAGIC = b"XLRNN1"
RNN_VERSION = 1

INJECTION_SITES = ("none", "input", "recurrent", "compression")


@dataclass(frozen=True)
class RnnConfig:
    forward_size: int = 160
    compression_size: int = 160
    bidirectional: bool = False
    pos_injection: str = "none"
    pos_tagset_size: int = 0
    lr_init: float = 0.1
    max_epochs: int = 30
    bptt_horizon: int | None = None  # None = full-sentence gradients
    seed: int = 0

    def __post_init__(self):
        if self.forward_size < 1 or self.compression_size < 1:
            raise ConfigError("layer sizes must be >= 1")
        if self.lr_init <= 0:
            raise ConfigError("initial learning rate must be positive")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")
        if self.pos_injection not in INJECTION_SITES:
            raise ConfigError(
                f"pos_injection must be one of {INJECTION_SITES}"
            )
        if (self.pos_injection != "none") != (self.pos_tagset_size > 0):
            raise ConfigError(
                "pos_tagset_size must be positive exactly when "
                "pos_injection is enabled"
            )
        if self.bptt_horizon is not None and self.bptt_horizon < 1:
            raise ConfigError("bptt_horizon must be >= 1 or None")


@dataclass
class Activations:
    """Per-sentence layer values, time on axis 0."""

    forward: np.ndarray          # (T, F)
    backward: np.ndarray | None  # (T, F) when bidirectional
    compression: np.ndarray      # (T, C)
    output: np.ndarray           # (T, n_tags), rows sum to 1


@dataclass
class RnnModel:
    config: RnnConfig
    input_dim: int
    tagset: TagSet
    in_fwd: np.ndarray             # (N, F) input -> forward
    fwd_fwd: np.ndarray            # (F, F) forward recurrence
    fwd_comp: np.ndarray           # (F, C) forward -> compression
    comp_out: np.ndarray           # (C, n_tags) compression -> output
    in_bwd: np.ndarray | None = None   # (N, F) input -> backward
    bwd_bwd: np.ndarray | None = None  # (F, F) backward recurrence
    bwd_comp: np.ndarray | None = None  # (F, C) backward -> compression
    pos_proj: np.ndarray | None = None  # injected-stream projection

    @property
    def n_tags(self) -> int:
        return len(self.tagset)

    def named_matrices(self) -> list[tuple[str, np.ndarray]]:
        names = ["in_fwd", "fwd_fwd", "fwd_comp", "comp_out"]
        if self.config.bidirectional:
            names += ["in_bwd", "bwd_bwd", "bwd_comp"]
        if self.config.pos_injection != "none":
            names.append("pos_proj")
        return [(name, getattr(self, name)) for name in names]

    def copy(self) -> "RnnModel":
        kwargs = {
            name: getattr(self, name).copy()
            for name, _ in self.named_matrices()
        }
        return replace(self, **kwargs)


def init_model(
    config: RnnConfig, input_dim: int, tagset: TagSet
) -> RnnModel:
    """Seeded uniform(-0.1, 0.1) weights with config-determined shapes."""
    if input_dim < 1:
        raise ConfigError("input dimension must be >= 1")
    rng = np.random.default_rng(config.seed)
    f, c, k = config.forward_size, config.compression_size, len(tagset)

    def mat(rows, cols):
        return rng.uniform(-0.1, 0.1, size=(rows, cols))

    model = RnnModel(
        config=config,
        input_dim=input_dim,
        tagset=tagset,
        in_fwd=mat(input_dim, f),
        fwd_fwd=mat(f, f),
        fwd_comp=mat(f, c),
        comp_out=mat(c, k),
    )
    if config.bidirectional:
        model.in_bwd = mat(input_dim, f)
        model.bwd_bwd = mat(f, f)
        model.bwd_comp = mat(f, c)
    if config.pos_injection != "none":
        site_dim = {"input": input_dim, "recurrent": f, "compression": c}
        model.pos_proj = mat(
            config.pos_tagset_size, site_dim[config.pos_injection]
        )
    return model


@dataclass(frozen=True)
class EncodedSentence:
    """A sentence already mapped to occurrence vectors, ready to train on."""

    vectors: tuple[CommonWordVector, ...]
    tags: tuple[int, ...] | None = None
    pos: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.tags is not None and len(self.tags) != len(self.vectors):
            raise DataError("tags do not align with tokens")
        if self.pos is not None and len(self.pos) != len(self.vectors):
            raise DataError("injected stream does not align with tokens")


def encode_sentence(
    table: ReprTable,
    tokens: Sequence[str],
    side: Side,
    tags: Sequence[int] | None = None,
    pos: Sequence[int] | None = None,
) -> EncodedSentence:
    return EncodedSentence(
        vectors=tuple(table.get(side, tok) for tok in tokens),
        tags=None if tags is None else tuple(tags),
        pos=None if pos is None else tuple(pos),
    )


def _check_inputs(model, vectors, pos):
    inject = model.config.pos_injection
    if (pos is not None) != (inject != "none"):
        raise DataError(
            "injected tag stream must be supplied exactly when the model "
            f"was built with injection (site: {inject})"
        )
    if pos is not None:
        if len(pos) != len(vectors):
            raise DataError("injected stream does not align with sentence")
        if any(not 0 <= p < model.config.pos_tagset_size for p in pos):
            raise DataError("injected tag index out of range")
    for vec in vectors:
        if vec.dim != model.input_dim:
            raise DataError(
                f"input vector dim {vec.dim} does not match model "
                f"dim {model.input_dim}"
            )


def _input_prefix(model, matrix, vectors, pos):
    """Per-step input contribution x(t) @ matrix, exploiting sparsity."""
    T = len(vectors)
    pre = np.zeros((T, matrix.shape[1]))
    for t, vec in enumerate(vectors):
        if vec.indices:
            pre[t] = matrix[list(vec.indices)].sum(axis=0)
    if model.config.pos_injection == "input":
        pre += (model.pos_proj @ matrix)[list(pos)]
    return pre


def forward_pass(
    model: RnnModel,
    vectors: Sequence[CommonWordVector],
    pos: Sequence[int] | None = None,
) -> Activations:
    """Run the network over one sentence and return all layer values."""
    _check_inputs(model, vectors, pos)
    cfg = model.config
    T = len(vectors)
    F, C = cfg.forward_size, cfg.compression_size
    k = model.n_tags
    if T == 0:
        empty = np.zeros((0, F))
        return Activations(
            empty,
            empty.copy() if cfg.bidirectional else None,
            np.zeros((0, C)),
            np.zeros((0, k)),
        )

    fwd_in = _input_prefix(model, model.in_fwd, vectors, pos)
    if cfg.pos_injection == "recurrent":
        fwd_in += model.pos_proj[list(pos)]
    f = np.zeros((T, F))
    state = np.zeros(F)
    for t in range(T):
        state = expit(fwd_in[t] + state @ model.fwd_fwd)
        f[t] = state

    b = None
    if cfg.bidirectional:
        bwd_in = _input_prefix(model, model.in_bwd, vectors, pos)
        if cfg.pos_injection == "recurrent":
            bwd_in += model.pos_proj[list(pos)]
        b = np.zeros((T, F))
        state = np.zeros(F)
        for t in reversed(range(T)):
            state = expit(bwd_in[t] + state @ model.bwd_bwd)
            b[t] = state

    pre_c = f @ model.fwd_comp
    if b is not None:
        pre_c += b @ model.bwd_comp
    if cfg.pos_injection == "compression":
        pre_c += model.pos_proj[list(pos)]
    c = expit(pre_c)
    y = softmax(c @ model.comp_out, axis=1)
    return Activations(f, b, c, y)


class _Grads:
    """Gradient accumulator; input-matrix gradients stay row-sparse."""

    def __init__(self, model: RnnModel):
        self.dense: dict[str, np.ndarray] = {}
        self.input_rows: dict[str, dict[int, np.ndarray]] = {}
        self.input_dense: dict[str, np.ndarray] = {}
        self.model = model

    def as_dense(self, name: str) -> np.ndarray:
        """Materialize the full gradient of one matrix (for checking)."""
        shape = getattr(self.model, name).shape
        out = np.zeros(shape)
        if name in self.dense:
            out += self.dense[name]
        if name in self.input_dense:
            out += self.input_dense[name]
        for idx, row in self.input_rows.get(name, {}).items():
            out[idx] += row
        return out


def _sentence_loss(y: np.ndarray, tags: Sequence[int]) -> float:
    rows = y[np.arange(len(tags)), list(tags)]
    with np.errstate(divide="ignore"):
        return float(-np.log(rows).sum())


def _accumulate_input_rows(rows, vectors, dpre):
    for t, vec in enumerate(vectors):
        for idx in vec.indices:
            if idx in rows:
                rows[idx] = rows[idx] + dpre[t]
            else:
                rows[idx] = dpre[t].copy()


def _loss_and_grads(model, vectors, tags, pos):
    """Cross-entropy over the sentence and exact BPTT gradients."""
    cfg = model.config
    acts = forward_pass(model, vectors, pos)
    T = len(vectors)
    loss = _sentence_loss(acts.output, tags)
    grads = _Grads(model)
    if T == 0:
        return loss, grads
    horizon = cfg.bptt_horizon
    pos_list = list(pos) if pos is not None else None

    dlogits = acts.output.copy()
    dlogits[np.arange(T), list(tags)] -= 1.0
    grads.dense["comp_out"] = acts.compression.T @ dlogits
    dc = dlogits @ model.comp_out.T
    dpre_c = dc * acts.compression * (1.0 - acts.compression)

    if cfg.pos_injection == "compression":
        g_pos = np.zeros_like(model.pos_proj)
        np.add.at(g_pos, pos_list, dpre_c)
        grads.dense["pos_proj"] = g_pos

    grads.dense["fwd_comp"] = acts.forward.T @ dpre_c
    df_direct = dpre_c @ model.fwd_comp.T

    # forward layer, errors flowing right-to-left through the recurrence
    f = acts.forward
    dpre_f = np.zeros_like(f)
    carry = np.zeros(f.shape[1])
    for t in reversed(range(T)):
        dpre_f[t] = (df_direct[t] + carry) * f[t] * (1.0 - f[t])
        carry = dpre_f[t] @ model.fwd_fwd.T
        if horizon is not None and t % horizon == 0:
            carry = np.zeros_like(carry)
    grads.dense["fwd_fwd"] = f[:-1].T @ dpre_f[1:]
    grads.input_rows["in_fwd"] = {}
    _accumulate_input_rows(grads.input_rows["in_fwd"], vectors, dpre_f)

    dpre_b = None
    if cfg.bidirectional:
        b = acts.backward
        db_direct = dpre_c @ model.bwd_comp.T
        grads.dense["bwd_comp"] = b.T @ dpre_c
        dpre_b = np.zeros_like(b)
        carry = np.zeros(b.shape[1])
        for t in range(T):
            dpre_b[t] = (db_direct[t] + carry) * b[t] * (1.0 - b[t])
            carry = dpre_b[t] @ model.bwd_bwd.T
            if horizon is not None and (t + 1) % horizon == 0:
                carry = np.zeros_like(carry)
        grads.dense["bwd_bwd"] = b[1:].T @ dpre_b[:-1]
        grads.input_rows["in_bwd"] = {}
        _accumulate_input_rows(grads.input_rows["in_bwd"], vectors, dpre_b)

    if cfg.pos_injection == "recurrent":
        g_pos = np.zeros_like(model.pos_proj)
        np.add.at(g_pos, pos_list, dpre_f)
        if dpre_b is not None:
            np.add.at(g_pos, pos_list, dpre_b)
        grads.dense["pos_proj"] = g_pos
    elif cfg.pos_injection == "input":
        # sums of dpre over steps sharing an injected tag, per direction
        sums_f = np.zeros((cfg.pos_tagset_size, f.shape[1]))
        np.add.at(sums_f, pos_list, dpre_f)
        grads.input_dense["in_fwd"] = model.pos_proj.T @ sums_f
        g_pos = sums_f @ model.in_fwd.T
        if dpre_b is not None:
            sums_b = np.zeros_like(sums_f)
            np.add.at(sums_b, pos_list, dpre_b)
            grads.input_dense["in_bwd"] = model.pos_proj.T @ sums_b
            g_pos += sums_b @ model.in_bwd.T
        grads.dense["pos_proj"] = g_pos

    return loss, grads


def _apply_sgd(model: RnnModel, grads: _Grads, lr: float) -> None:
    for name, g in grads.dense.items():
        getattr(model, name)[...] -= lr * g
    for name, g in grads.input_dense.items():
        getattr(model, name)[...] -= lr * g
    for name, rows in grads.input_rows.items():
        matrix = getattr(model, name)
        for idx, row in rows.items():
            matrix[idx] -= lr * row


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    lr: float
    train_loss: float
    val_accuracy: float


def accuracy(model: RnnModel, data: Sequence[EncodedSentence]) -> float:
    """Per-token accuracy of argmax tagging over encoded sentences."""
    correct = 0
    total = 0
    for ex in data:
        y = forward_pass(model, ex.vectors, ex.pos).output
        pred = np.argmax(y, axis=1)
        correct += int(np.sum(pred == np.asarray(ex.tags)))
        total += len(ex.tags)
    return correct / total if total else 0.0


def _validate_examples(model, data, what):
    for i, ex in enumerate(data):
        if ex.tags is None:
            raise DataError(f"{what} sentence {i} has no tags")
        if any(not 0 <= t < model.n_tags for t in ex.tags):
            raise DataError(f"{what} sentence {i} has an out-of-range tag")
        _check_inputs(model, ex.vectors, ex.pos)


def train(
    model: RnnModel,
    train_data: Sequence[EncodedSentence],
    validation_data: Sequence[EncodedSentence],
    config: RnnConfig | None = None,
) -> tuple[RnnModel, list[EpochStats]]:
    """SGD over shuffled sentences with the halving learning-rate schedule.

    After each epoch the validation per-token accuracy is measured; when
    it fails to improve on the best seen, the learning rate is halved for
    the next epoch, and two consecutive non-improving epochs stop the
    run. Returns the snapshot with the best validation accuracy plus the
    per-epoch log.
    """
    cfg = config if config is not None else model.config
    if not train_data:
        raise DataError("training set is empty")
    if not validation_data:
        raise DataError("validation set is empty")
    _validate_examples(model, train_data, "training")
    _validate_examples(model, validation_data, "validation")

    work = model.copy()
    rng = np.random.default_rng(cfg.seed)
    lr = cfg.lr_init
    best_acc = -1.0
    best_model = work.copy()
    non_improving = 0
    log: list[EpochStats] = []

    for epoch in range(1, cfg.max_epochs + 1):
        epoch_loss = 0.0
        for si in rng.permutation(len(train_data)):
            ex = train_data[si]
            loss, grads = _loss_and_grads(work, ex.vectors, ex.tags, ex.pos)
            if not np.isfinite(loss):
                raise DivergenceError(epoch, int(si))
            _apply_sgd(work, grads, lr)
            epoch_loss += loss
        val_acc = accuracy(work, validation_data)
        log.append(EpochStats(epoch, lr, epoch_loss, val_acc))
        if val_acc > best_acc:
            best_acc = val_acc
            best_model = work.copy()
            non_improving = 0
        else:
            non_improving += 1
            lr *= 0.5
            if non_improving >= 2:
                break
    return best_model, log


def tag_sentence(
    model: RnnModel,
    table: ReprTable,
    tokens: Sequence[str],
    side: Side,
    pos: Sequence[int] | None = None,
    oov: tuple[CbowModel, ReprTable] | None = None,
) -> tuple[list[int], list[np.ndarray]]:
    """Tag tokens of either side; returns tags and output distributions.

    Tokens with empty vectors are tagged from context alone unless an
    (embeddings, table) pair is given, in which case they are first
    replaced by their best known stand-in.
    """
    vectors = []
    for i, tok in enumerate(tokens):
        vec = table.get(side, tok)
        if vec.is_empty and oov is not None:
            cbow, res_table = oov
            ctx = context_window(tokens, i, cbow.window)
            stand_in = resolve_oov(tok, ctx, cbow, res_table, side)
            if stand_in != tok:
                vec = res_table.get(side, stand_in)
        vectors.append(vec)
    acts = forward_pass(model, vectors, pos)
    tags = [int(t) for t in np.argmax(acts.output, axis=1)]
    dists = [row.copy() for row in acts.output]
    return tags, dists


def gradient_check(
    config: RnnConfig,
    epsilon: float = 1e-5,
    input_dim: int = 12,
    n_tags: int = 3,
    sentence_len: int = 3,
) -> float:
    """Max relative error of BPTT gradients vs central finite differences.

    Builds a small seeded model and a random sparse sentence, then
    perturbs every weight of every matrix in both directions. The
    denominator is floored at 1e-6 so near-zero gradients are compared
    absolutely (central differences carry ~1e-11 of rounding noise).
    """
    rng = np.random.default_rng(config.seed)
    tagset = TagSet("gradcheck", tuple(f"T{i}" for i in range(n_tags)))
    model = init_model(config, input_dim, tagset)
    vectors = []
    for _ in range(sentence_len):
        size = int(rng.integers(1, 4))
        idx = sorted(rng.choice(input_dim, size=size, replace=False).tolist())
        vectors.append(CommonWordVector(tuple(idx), input_dim))
    tags = [int(t) for t in rng.integers(0, n_tags, size=sentence_len)]
    pos = None
    if config.pos_injection != "none":
        pos = [
            int(p)
            for p in rng.integers(0, config.pos_tagset_size, size=sentence_len)
        ]

    _, grads = _loss_and_grads(model, vectors, tags, pos)

    def loss_only():
        y = forward_pass(model, vectors, pos).output
        return _sentence_loss(y, tags)

    max_rel = 0.0
    for name, matrix in model.named_matrices():
        analytic = grads.as_dense(name)
        for i in range(matrix.shape[0]):
            for j in range(matrix.shape[1]):
                orig = matrix[i, j]
                matrix[i, j] = orig + epsilon
                plus = loss_only()
                matrix[i, j] = orig - epsilon
                minus = loss_only()
                matrix[i, j] = orig
                numeric = (plus - minus) / (2.0 * epsilon)
                denom = max(1e-6, abs(numeric), abs(analytic[i, j]))
                max_rel = max(max_rel, abs(numeric - analytic[i, j]) / denom)
    return max_rel


def save_model(model: RnnModel, path: str | Path) -> None:
    cfg = model.config
    with open(path, "wb") as fh:
        w = Writer(fh)
        w.magic(RNN_MAGIC)
        w.u32(RNN_VERSION)
        w.u32(cfg.forward_size)
        w.u32(cfg.compression_size)
        w.u8(int(cfg.bidirectional))
        w.u8(INJECTION_SITES.index(cfg.pos_injection))
        w.u32(cfg.pos_tagset_size)
        w.f64(cfg.lr_init)
        w.u32(cfg.max_epochs)
        w.u32(cfg.bptt_horizon or 0)
        w.i64(cfg.seed)
        w.u32(model.input_dim)
        w.string(model.tagset.name)
        w.u32(len(model.tagset))
        for label in model.tagset.labels:
            w.string(label)
        matrices = model.named_matrices()
        w.u8(len(matrices))
        for name, matrix in matrices:
            w.string(name)
            w.array(matrix)
        w.checksum()


def load_model(path: str | Path) -> RnnModel:
    with open(path, "rb") as fh:
        r = Reader(fh)
        r.magic(RNN_MAGIC)
        version = r.u32()
        if version != RNN_VERSION:
            raise DataError(f"unsupported model file version {version}")
        config = RnnConfig(
            forward_size=r.u32(),
            compression_size=r.u32(),
            bidirectional=bool(r.u8()),
            pos_injection=INJECTION_SITES[r.u8()],
            pos_tagset_size=r.u32(),
            lr_init=r.f64(),
            max_epochs=r.u32(),
            bptt_horizon=r.u32() or None,
            seed=r.i64(),
        )
        input_dim = r.u32()
        name = r.string()
        labels = tuple(r.string() for _ in range(r.u32()))
        tagset = TagSet(name, labels)
        matrices = {}
        for _ in range(r.u8()):
            name_ = r.string()
            matrices[name_] = r.array()
        r.checksum()
    model = RnnModel(
        config=config,
        input_dim=input_dim,
        tagset=tagset,
        in_fwd=matrices["in_fwd"],
        fwd_fwd=matrices["fwd_fwd"],
        fwd_comp=matrices["fwd_comp"],
        comp_out=matrices["comp_out"],
        in_bwd=matrices.get("in_bwd"),
        bwd_bwd=matrices.get("bwd_bwd"),
        bwd_comp=matrices.get("bwd_comp"),
        pos_proj=matrices.get("pos_proj"),
    )
    for _, matrix in model.named_matrices():
        if not np.all(np.isfinite(matrix)):
            raise DataError("model file contains non-finite weights")
    return model
