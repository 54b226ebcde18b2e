"""Forward-pass semantics, checked against a scalar-by-scalar oracle."""

import math

import numpy as np
import pytest

from xltag.corpus import TagSet
from xltag.errors import DataError
from xltag.representation import CommonWordVector
from xltag.rnn import RnnConfig, forward_pass, init_model


def vec(indices, dim):
    return CommonWordVector(tuple(indices), dim)


def fill(matrix, scale):
    """Deterministic distinct entries for hand computations."""
    rows, cols = matrix.shape
    for i in range(rows):
        for j in range(cols):
            matrix[i, j] = scale * (i + 1) - 0.7 * scale * (j + 1)


def scalar_sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def scalar_oracle(model, sentences_indices):
    """Pure-Python recomputation of every layer, no numpy operations."""
    cfg = model.config
    F, C = cfg.forward_size, cfg.compression_size
    K = model.n_tags
    T = len(sentences_indices)
    in_fwd = model.in_fwd.tolist()
    fwd_fwd = model.fwd_fwd.tolist()
    fwd_comp = model.fwd_comp.tolist()
    comp_out = model.comp_out.tolist()

    f = [[0.0] * F for _ in range(T)]
    prev = [0.0] * F
    for t, active in enumerate(sentences_indices):
        for j in range(F):
            pre = 0.0
            for idx in active:
                pre += in_fwd[idx][j]
            for k in range(F):
                pre += prev[k] * fwd_fwd[k][j]
            f[t][j] = scalar_sigmoid(pre)
        prev = f[t]

    b = None
    if cfg.bidirectional:
        in_bwd = model.in_bwd.tolist()
        bwd_bwd = model.bwd_bwd.tolist()
        b = [[0.0] * F for _ in range(T)]
        nxt = [0.0] * F
        for t in range(T - 1, -1, -1):
            for j in range(F):
                pre = 0.0
                for idx in sentences_indices[t]:
                    pre += in_bwd[idx][j]
                for k in range(F):
                    pre += nxt[k] * bwd_bwd[k][j]
                b[t][j] = scalar_sigmoid(pre)
            nxt = b[t]

    c = [[0.0] * C for _ in range(T)]
    for t in range(T):
        for j in range(C):
            pre = 0.0
            for k in range(F):
                pre += f[t][k] * fwd_comp[k][j]
            if b is not None:
                bwd_comp = model.bwd_comp.tolist()
                for k in range(F):
                    pre += b[t][k] * bwd_comp[k][j]
            c[t][j] = scalar_sigmoid(pre)

    y = [[0.0] * K for _ in range(T)]
    for t in range(T):
        logits = [
            sum(c[t][k] * comp_out[k][j] for k in range(C)) for j in range(K)
        ]
        m = max(logits)
        exps = [math.exp(v - m) for v in logits]
        z = sum(exps)
        y[t] = [e / z for e in exps]
    return f, b, c, y


@pytest.fixture
def small_tagset():
    return TagSet("two", ("T0", "T1"))


def build_small(bidirectional, small_tagset, n=4):
    cfg = RnnConfig(
        forward_size=2,
        compression_size=2,
        bidirectional=bidirectional,
        lr_init=0.1,
        max_epochs=1,
        seed=0,
    )
    model = init_model(cfg, n, small_tagset)
    fill(model.in_fwd, 0.05)
    fill(model.fwd_fwd, -0.03)
    fill(model.fwd_comp, 0.11)
    fill(model.comp_out, 0.07)
    if bidirectional:
        fill(model.in_bwd, -0.04)
        fill(model.bwd_bwd, 0.06)
        fill(model.bwd_comp, 0.09)
    return model


@pytest.mark.parametrize("bidirectional", [False, True])
def test_three_token_hand_oracle(bidirectional, small_tagset):
    model = build_small(bidirectional, small_tagset)
    indices = [(0, 2), (1,), (0, 3)]
    sentence = [vec(i, 4) for i in indices]
    acts = forward_pass(model, sentence)
    f, b, c, y = scalar_oracle(model, indices)
    assert np.max(np.abs(acts.forward - np.array(f))) < 1e-12
    assert np.max(np.abs(acts.compression - np.array(c))) < 1e-12
    assert np.max(np.abs(acts.output - np.array(y))) < 1e-12
    if bidirectional:
        assert np.max(np.abs(acts.backward - np.array(b))) < 1e-12
    else:
        assert acts.backward is None


def test_zero_weights_give_half_activations_and_uniform_output(small_tagset):
    model = build_small(False, small_tagset)
    for _, matrix in model.named_matrices():
        matrix[...] = 0.0
    acts = forward_pass(model, [vec((), 4), vec((1, 2), 4)])
    assert np.all(acts.forward == 0.5)
    assert np.all(acts.compression == 0.5)
    assert np.allclose(acts.output, 0.5, atol=0)


def test_output_rows_are_distributions(small_tagset):
    model = build_small(True, small_tagset)
    acts = forward_pass(model, [vec((0,), 4), vec((1, 3), 4)])
    sums = acts.output.sum(axis=1)
    assert np.max(np.abs(sums - 1.0)) < 1e-9
    assert np.all(acts.output >= 0)
    assert np.all((acts.forward > 0) & (acts.forward < 1))
    assert np.all((acts.compression > 0) & (acts.compression < 1))


def test_brnn_with_zero_backward_merge_equals_srnn(small_tagset):
    srnn = build_small(False, small_tagset)
    brnn = build_small(True, small_tagset)
    brnn.bwd_comp[...] = 0.0
    for sentence in ([vec((2,), 4)], [vec((0, 1), 4), vec((3,), 4)]):
        ys = forward_pass(srnn, sentence).output
        yb = forward_pass(brnn, sentence).output
        assert np.max(np.abs(ys - yb)) < 1e-12


def test_srnn_is_causal(small_tagset):
    model = build_small(False, small_tagset)
    a = forward_pass(model, [vec((0,), 4), vec((1,), 4), vec((2,), 4)])
    b = forward_pass(model, [vec((0,), 4), vec((1,), 4), vec((3,), 4)])
    assert np.array_equal(a.output[:2], b.output[:2])
    assert not np.array_equal(a.output[2], b.output[2])


def test_brnn_is_anticausal(small_tagset):
    model = build_small(True, small_tagset)
    a = forward_pass(model, [vec((0,), 4), vec((1,), 4), vec((2,), 4)])
    b = forward_pass(model, [vec((0,), 4), vec((1,), 4), vec((3,), 4)])
    assert not np.array_equal(a.output[0], b.output[0])


def test_dimension_mismatch_rejected(small_tagset):
    model = build_small(False, small_tagset)
    with pytest.raises(DataError):
        forward_pass(model, [vec((0,), 7)])


def test_pos_stream_paths_never_mix(small_tagset):
    plain = build_small(False, small_tagset)
    with pytest.raises(DataError):
        forward_pass(plain, [vec((0,), 4)], pos=[0])

    cfg = RnnConfig(
        forward_size=2,
        compression_size=2,
        pos_injection="compression",
        pos_tagset_size=3,
        max_epochs=1,
        seed=1,
    )
    injected = init_model(cfg, 4, small_tagset)
    with pytest.raises(DataError):
        forward_pass(injected, [vec((0,), 4)])
    with pytest.raises(DataError):
        forward_pass(injected, [vec((0,), 4)], pos=[5])
    forward_pass(injected, [vec((0,), 4)], pos=[2])


@pytest.mark.parametrize("site", ["input", "recurrent", "compression"])
def test_injection_changes_output(site, small_tagset):
    cfg = RnnConfig(
        forward_size=3,
        compression_size=3,
        pos_injection=site,
        pos_tagset_size=2,
        max_epochs=1,
        seed=2,
    )
    model = init_model(cfg, 4, small_tagset)
    sentence = [vec((0,), 4), vec((1,), 4)]
    y0 = forward_pass(model, sentence, pos=[0, 0]).output
    y1 = forward_pass(model, sentence, pos=[1, 0]).output
    assert not np.array_equal(y0[0], y1[0])


def test_injection_sites_differ(small_tagset):
    """The three sites are genuinely different wirings."""
    sentence = [vec((0,), 4), vec((1, 2), 4)]
    outputs = {}
    for site in ("input", "recurrent", "compression"):
        cfg = RnnConfig(
            forward_size=3,
            compression_size=3,
            pos_injection=site,
            pos_tagset_size=2,
            max_epochs=1,
            seed=3,
        )
        model = init_model(cfg, 4, small_tagset)
        outputs[site] = forward_pass(model, sentence, pos=[1, 0]).output
    assert not np.array_equal(outputs["input"], outputs["recurrent"])
    assert not np.array_equal(outputs["recurrent"], outputs["compression"])


def test_argmax_tie_breaks_to_lowest_index():
    tagset = TagSet("three", ("A", "B", "C"))
    cfg = RnnConfig(forward_size=2, compression_size=2, max_epochs=1, seed=0)
    model = init_model(cfg, 3, tagset)
    for _, matrix in model.named_matrices():
        matrix[...] = 0.0
    from xltag.representation import ReprTable
    from xltag.rnn import tag_sentence

    table = ReprTable(3, {("source", "w"): CommonWordVector((0,), 3)})
    tags, dists = tag_sentence(model, table, ["w", "w"], "source")
    assert tags == [0, 0]
    assert np.allclose(dists[0], 1 / 3)
