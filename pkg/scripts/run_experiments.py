#!/usr/bin/env python3
"""Synthetic experiments showing the directional claims of the method.

Prints per-token accuracy for: cross-lingual transfer of a causal
tagger, bidirectional vs causal on a right-context task, the OOV
resolution gain, one model tagging two target languages, and the
injected-stream variants against a stream-free baseline.
"""

import argparse
import time

from xltag import build_representation, train_cbow
from xltag.representation import ReprTable
from xltag.rnn import (
    RnnConfig,
    encode_sentence,
    init_model,
    tag_sentence,
    train,
)
from xltag.synthetic import (
    injected_stream_task,
    next_token_task,
    oov_context_task,
    tri_parallel_task,
    word_class_task,
)


def fit(task, table, seed, bidirectional=False, site="none"):
    pos = site != "none"
    cfg = RnnConfig(
        forward_size=32,
        compression_size=32,
        bidirectional=bidirectional,
        pos_injection=site,
        pos_tagset_size=len(task.pos_tagset) if pos else 0,
        lr_init=0.1,
        max_epochs=25,
        seed=seed,
    )
    streams = task.train_pos if pos else None
    val_streams = task.validation_pos if pos else None
    enc = lambda sents, st_: [
        encode_sentence(
            table, s.tokens, "source", s.tags,
            st_[i] if st_ is not None else None,
        )
        for i, s in enumerate(sents)
    ]
    model = init_model(cfg, table.dim, task.tagset)
    best, log = train(
        model, enc(task.train, streams), enc(task.validation, val_streams)
    )
    return best, len(log)


def score(model, table, task, pos=False, oov=None):
    correct = total = oov_correct = oov_total = 0
    flags = task.test_oov_flags or [[False] * len(s) for s in task.test]
    for i, sent in enumerate(task.test):
        stream = task.test_pos[i] if pos else None
        tags, _ = tag_sentence(
            model, table, sent.tokens, task.test_side, stream, oov
        )
        for g, p, f in zip(sent.tags, tags, flags[i]):
            total += 1
            correct += int(g == p)
            if f:
                oov_total += 1
                oov_correct += int(g == p)
    return correct / total, (oov_correct / oov_total if oov_total else None)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    t0 = time.time()

    task = word_class_task(seed=args.seed)
    table = build_representation(task.corpus)
    model, epochs = fit(task, table, args.seed + 7)
    acc, _ = score(model, table, task)
    print(f"transfer to mirror language      {acc:6.1%}  ({epochs} epochs)")

    task = next_token_task(seed=args.seed + 1)
    table = build_representation(task.corpus)
    for bidi, label in ((False, "causal"), (True, "bidirectional")):
        model, epochs = fit(task, table, args.seed + 11 + bidi, bidi)
        acc, _ = score(model, table, task)
        print(f"next-token task, {label:13s}  {acc:6.1%}  ({epochs} epochs)")

    task = oov_context_task(seed=args.seed + 2)
    table = build_representation(task.corpus)
    model, _ = fit(task, table, args.seed + 21)
    embeddings = train_cbow(
        [list(p[1]) for p in task.corpus.pairs],
        window=1, dim=32, epochs=10, lr=0.05, seed=args.seed + 5,
    )
    _, oov_plain = score(model, table, task)
    _, oov_res = score(model, table, task, oov=(embeddings, table))
    print(f"OOV tokens, zero-vector          {oov_plain:6.1%}")
    print(f"OOV tokens, resolved             {oov_res:6.1%}")

    tri = tri_parallel_task(seed=args.seed + 4)
    merged = ReprTable.merged(build_representation(c) for c in tri.corpora)
    cfg = RnnConfig(
        forward_size=32, compression_size=32, max_epochs=25,
        seed=args.seed + 9,
    )
    model = init_model(cfg, merged.dim, tri.tagset)
    enc = lambda sents: [
        encode_sentence(merged, s.tokens, "source", s.tags) for s in sents
    ]
    best, _ = train(model, enc(tri.train), enc(tri.validation))
    for idx, test_set in enumerate(tri.tests):
        correct = total = 0
        for sent in test_set:
            tags, _ = tag_sentence(best, merged, sent.tokens, "target")
            correct += sum(int(a == b) for a, b in zip(tags, sent.tags))
            total += len(tags)
        print(f"multilingual model, language {idx}   {correct / total:6.1%}")

    task = injected_stream_task(n_pairs=800, n_validation=60,
                                seed=args.seed + 3)
    table = build_representation(task.corpus)
    for site in ("none", "input", "recurrent", "compression"):
        model, _ = fit(task, table, args.seed + 31, site=site)
        acc, _ = score(model, table, task, pos=site != "none")
        print(f"injected stream at {site:12s}  {acc:6.1%}")

    print(f"\ntotal time {time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
