"""Command-line pipeline driver.

Subcommands: build-repr, train-cbow, train-rnn, tag, align, project,
train-hmm, combine, evaluate. Every flag can also be given as a
key=value line in a config file (--config); explicit flags win. A global
--seed fans out to per-component seeds (CBOW: seed+1, tagger: seed+2) so
components stay independently reproducible.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
divergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import alignment, cbow, combine, hmm, representation, rnn
from .corpus import (
    TaggedSentence,
    load_parallel_corpus,
    load_tagged_corpus,
    load_tagset,
    write_tagged_corpus,
)
from .errors import ConfigError, DataError, DivergenceError


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


# how config-file values are converted, by destination name
_CONFIG_TYPES = {
    "source": str,
    "target": str,
    "extra": str,
    "out": str,
    "log": str,
    "input": str,
    "model": str,
    "repr": str,
    "tagset": str,
    "pos_tagset": str,
    "train": str,
    "validation": str,
    "train_pos": str,
    "validation_pos": str,
    "pos": str,
    "side": str,
    "links": str,
    "source_tagged": str,
    "gold": str,
    "pred": str,
    "hmm": str,
    "rnn": str,
    "oov_cbow": str,
    "report": str,
    "kv": str,
    "seed": int,
    "lowercase": _parse_bool,
    "bidirectional": _parse_bool,
    "window": int,
    "dim": int,
    "negatives": int,
    "epochs": int,
    "lr": float,
    "forward_size": int,
    "compression_size": int,
    "pos_injection": str,
    "max_epochs": int,
    "bptt_horizon": int,
    "iterations": int,
    "threshold": float,
    "rare_threshold": int,
    "max_suffix_len": int,
    "grid_step": float,
    "mu": float,
}


def _load_config_file(path: str) -> dict:
    values = {}
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}: line {lineno} is not key=value")
        key, _, value = stripped.partition("=")
        dest = key.strip().replace("-", "_")
        if dest not in _CONFIG_TYPES:
            raise ConfigError(f"{path}: unknown config key {key.strip()!r}")
        values[dest] = _CONFIG_TYPES[dest](value.strip())
    return values


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ConfigError(f"missing required option(s): {flags}")


def _require_files(args, *names):
    _require(args, *names)
    for name in names:
        path = getattr(args, name)
        if not Path(path).is_file():
            raise ConfigError(f"--{name.replace('_', '-')}: no such file: {path}")


def _read_sentences(path, lowercase):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    sentences = []
    for line in lines:
        if lowercase:
            line = line.lower()
        tokens = line.split()
        if tokens:
            sentences.append(tokens)
    return sentences


def _load_pos_stream(path, pos_tagset_path, expected, lowercase, what):
    """Read an injected tag stream (tagged-corpus format over the stream's
    own tagset) and check it lines up token-for-token with `expected`."""
    pos_tagset = load_tagset(pos_tagset_path)
    stream = load_tagged_corpus(path, pos_tagset, lowercase)
    if len(stream) != len(expected):
        raise DataError(
            f"{what}: stream has {len(stream)} sentences, "
            f"corpus has {len(expected)}"
        )
    for i, (s, e) in enumerate(zip(stream, expected)):
        if s.tokens != tuple(e):
            raise DataError(f"{what}: sentence {i} tokens differ from corpus")
    return [s.tags for s in stream], pos_tagset


def cmd_build_repr(args) -> int:
    _require_files(args, "source", "target")
    _require(args, "out")
    corpus = load_parallel_corpus(args.source, args.target, args.lowercase)
    table = representation.build_representation(corpus)
    representation.save_repr_table(table, args.out)
    print(f"indexed {len(table)} words over {table.dim} bi-sentences -> {args.out}")
    return 0


def cmd_train_cbow(args) -> int:
    _require_files(args, "target")
    _require(args, "out")
    if args.extra is not None and not Path(args.extra).is_file():
        raise ConfigError(f"--extra: no such file: {args.extra}")
    sentences = _read_sentences(args.target, args.lowercase)
    if args.extra:
        sentences += _read_sentences(args.extra, args.lowercase)
    model = cbow.train_cbow(
        sentences,
        window=args.window,
        dim=args.dim,
        negatives=args.negatives,
        epochs=args.epochs,
        lr=args.lr,
        seed=args.seed + 1,
    )
    cbow.save_cbow(model, args.out)
    print(f"trained {len(model.words)}x{model.dim} embeddings -> {args.out}")
    return 0


def _encode_corpus(table, sentences, side, streams=None):
    encoded = []
    for i, sent in enumerate(sentences):
        pos = streams[i] if streams is not None else None
        encoded.append(
            rnn.encode_sentence(table, sent.tokens, side, sent.tags, pos)
        )
    return encoded


def cmd_train_rnn(args) -> int:
    _require_files(args, "repr", "train", "validation", "tagset")
    _require(args, "out")
    if args.pos_injection != "none":
        _require_files(args, "train_pos", "validation_pos", "pos_tagset")
    table = representation.load_repr_table(args.repr)
    tagset = load_tagset(args.tagset)
    train_sents = load_tagged_corpus(args.train, tagset, args.lowercase)
    val_sents = load_tagged_corpus(args.validation, tagset, args.lowercase)
    if not train_sents or not val_sents:
        raise DataError("training and validation corpora must be nonempty")

    pos_size = 0
    train_streams = val_streams = None
    if args.pos_injection != "none":
        train_streams, pos_tagset = _load_pos_stream(
            args.train_pos,
            args.pos_tagset,
            [s.tokens for s in train_sents],
            args.lowercase,
            "--train-pos",
        )
        val_streams, _ = _load_pos_stream(
            args.validation_pos,
            args.pos_tagset,
            [s.tokens for s in val_sents],
            args.lowercase,
            "--validation-pos",
        )
        pos_size = len(pos_tagset)

    config = rnn.RnnConfig(
        forward_size=args.forward_size,
        compression_size=args.compression_size,
        bidirectional=args.bidirectional,
        pos_injection=args.pos_injection,
        pos_tagset_size=pos_size,
        lr_init=args.lr,
        max_epochs=args.max_epochs,
        bptt_horizon=args.bptt_horizon or None,
        seed=args.seed + 2,
    )
    model = rnn.init_model(config, table.dim, tagset)
    encoded_train = _encode_corpus(table, train_sents, args.side, train_streams)
    encoded_val = _encode_corpus(table, val_sents, args.side, val_streams)
    best, log = rnn.train(model, encoded_train, encoded_val)
    rnn.save_model(best, args.out)

    log_lines = [
        f"epoch={s.epoch} lr={s.lr!r} val_accuracy={s.val_accuracy!r} "
        f"train_loss={s.train_loss!r}"
        for s in log
    ]
    if args.log:
        Path(args.log).write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    for line in log_lines:
        print(line)
    print(f"best validation accuracy {max(s.val_accuracy for s in log)!r} -> {args.out}")
    return 0


def _oov_option(args, table):
    if not args.oov_cbow:
        return None
    embeddings = cbow.load_cbow(args.oov_cbow)
    return (embeddings, table)


def cmd_tag(args) -> int:
    _require_files(args, "model", "repr", "input")
    _require(args, "out")
    model = rnn.load_model(args.model)
    table = representation.load_repr_table(args.repr)
    sentences = _read_sentences(args.input, args.lowercase)
    streams = None
    if model.config.pos_injection != "none":
        _require_files(args, "pos", "pos_tagset")
        streams, _ = _load_pos_stream(
            args.pos, args.pos_tagset, sentences, args.lowercase, "--pos"
        )
    oov = _oov_option(args, table)
    tagged = []
    for i, tokens in enumerate(sentences):
        pos = streams[i] if streams is not None else None
        tags, _ = rnn.tag_sentence(model, table, tokens, args.side, pos, oov)
        tagged.append(TaggedSentence(tuple(tokens), tuple(tags)))
    write_tagged_corpus(tagged, model.tagset, args.out)
    print(f"tagged {len(tagged)} sentences -> {args.out}")
    return 0


def cmd_align(args) -> int:
    _require_files(args, "source", "target")
    _require(args, "out")
    corpus = load_parallel_corpus(args.source, args.target, args.lowercase)
    table = alignment.train_ibm1(corpus, iterations=args.iterations)
    links = alignment.align_corpus(table, corpus)
    alignment.write_alignment_links(links, args.out)
    print(f"aligned {corpus.n_pairs} bi-sentences -> {args.out}")
    return 0


def cmd_project(args) -> int:
    _require_files(args, "source_tagged", "links", "source", "target", "tagset")
    _require(args, "out")
    tagset = load_tagset(args.tagset)
    corpus = load_parallel_corpus(args.source, args.target, args.lowercase)
    tagged_source = load_tagged_corpus(args.source_tagged, tagset, args.lowercase)
    links = alignment.read_alignment_links(args.links)
    projected, extended = alignment.project_tags(
        tagged_source, links, corpus, tagset, args.threshold
    )
    if not projected:
        raise DataError("projection dropped every sentence")
    write_tagged_corpus(projected, extended, args.out)
    print(
        f"projected {len(projected)}/{corpus.n_pairs} sentences -> {args.out}"
    )
    return 0


def cmd_train_hmm(args) -> int:
    _require_files(args, "train", "tagset")
    _require(args, "out")
    tagset = alignment.extend_tagset_with_unknown(load_tagset(args.tagset))
    sentences = load_tagged_corpus(args.train, tagset, args.lowercase)
    model = hmm.train_hmm(
        sentences,
        tagset,
        rare_threshold=args.rare_threshold,
        max_suffix_len=args.max_suffix_len,
    )
    hmm.save_hmm(model, args.out)
    l1, l2, l3 = model.lambdas
    print(
        f"trained trigram tagger (lambdas {l1:.3f}/{l2:.3f}/{l3:.3f}) "
        f"-> {args.out}"
    )
    return 0


def cmd_combine(args) -> int:
    _require_files(args, "gold", "hmm", "rnn", "repr")
    _require(args, "report", "kv")
    if args.mu is not None and not 0.0 <= args.mu <= 1.0:
        raise ConfigError(f"--mu must be in [0, 1], got {args.mu}")
    if not 0.0 < args.grid_step <= 1.0:
        raise ConfigError(f"--grid-step must be in (0, 1], got {args.grid_step}")
    hmm_model = hmm.load_hmm(args.hmm)
    rnn_model = rnn.load_model(args.rnn)
    if hmm_model.tagset.labels != rnn_model.tagset.labels:
        raise DataError(
            "the two models were trained on different tagsets: "
            f"{hmm_model.tagset.labels} vs {rnn_model.tagset.labels}"
        )
    tagset = rnn_model.tagset
    table = representation.load_repr_table(args.repr)
    gold = load_tagged_corpus(args.gold, tagset, args.lowercase)
    if not gold:
        raise DataError("empty gold corpus")
    streams = None
    if rnn_model.config.pos_injection != "none":
        _require_files(args, "pos", "pos_tagset")
        streams, _ = _load_pos_stream(
            args.pos,
            args.pos_tagset,
            [s.tokens for s in gold],
            args.lowercase,
            "--pos",
        )
    oov = _oov_option(args, table)

    hmm_dists = []
    rnn_dists = []
    oov_flags = []
    for i, sent in enumerate(gold):
        tokens = list(sent.tokens)
        hmm_dists.append(hmm.posterior(hmm_model, tokens))
        pos = streams[i] if streams is not None else None
        _, dists = rnn.tag_sentence(
            rnn_model, table, tokens, args.side, pos, oov
        )
        rnn_dists.append(dists)
        oov_flags.append(
            [table.get(args.side, tok).is_empty for tok in tokens]
        )

    if args.mu is not None:
        predictions = [
            combine.combined_tag(d1, d2, args.mu)
            for d1, d2 in zip(hmm_dists, rnn_dists)
        ]
        report = combine.evaluate(gold, predictions, tagset, oov_flags)
        report.mu_per_fold = (args.mu, args.mu)
    else:
        _, report = combine.tune_mu(
            gold,
            hmm_dists,
            rnn_dists,
            grid_step=args.grid_step,
            tagset=tagset,
            oov_flags=oov_flags,
        )
    report.write(args.report, args.kv)
    print(report.to_text(), end="")
    return 0


def cmd_evaluate(args) -> int:
    _require_files(args, "gold", "pred", "tagset")
    _require(args, "report", "kv")
    tagset = load_tagset(args.tagset)
    gold = load_tagged_corpus(args.gold, tagset, args.lowercase)
    pred = load_tagged_corpus(args.pred, tagset, args.lowercase)
    oov_flags = None
    if args.repr:
        if not Path(args.repr).is_file():
            raise ConfigError(f"--repr: no such file: {args.repr}")
        table = representation.load_repr_table(args.repr)
        oov_flags = [
            [table.get(args.side, tok).is_empty for tok in s.tokens]
            for s in gold
        ]
    predictions = [s.tags for s in pred]
    report = combine.evaluate(gold, predictions, tagset, oov_flags)
    report.write(args.report, args.kv)
    print(report.to_text(), end="")
    return 0


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="xltag",
        description="multilingual taggers from sentence-aligned bi-text",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    by_name: dict[str, argparse.ArgumentParser] = {}

    def add(name, func, configure):
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument(
            "--lowercase",
            action=argparse.BooleanOptionalAction,
            default=True,
        )
        configure(p)
        p.set_defaults(func=func)
        by_name[name] = p
        return p

    def p_build_repr(p):
        p.add_argument("--source")
        p.add_argument("--target")
        p.add_argument("--out")

    def p_train_cbow(p):
        p.add_argument("--target", help="target side of the parallel corpus")
        p.add_argument("--extra", help="extra monolingual text")
        p.add_argument("--window", type=int, default=5)
        p.add_argument("--dim", type=int, default=100)
        p.add_argument("--negatives", type=int, default=5)
        p.add_argument("--epochs", type=int, default=5)
        p.add_argument("--lr", type=float, default=0.025)
        p.add_argument("--out")

    def p_train_rnn(p):
        p.add_argument("--repr")
        p.add_argument("--train")
        p.add_argument("--validation")
        p.add_argument("--tagset")
        p.add_argument("--side", default="source", choices=("source", "target"))
        p.add_argument("--forward-size", type=int, default=160)
        p.add_argument("--compression-size", type=int, default=160)
        p.add_argument(
            "--bidirectional",
            action=argparse.BooleanOptionalAction,
            default=False,
        )
        p.add_argument(
            "--pos-injection",
            default="none",
            choices=rnn.INJECTION_SITES,
        )
        p.add_argument("--pos-tagset")
        p.add_argument("--train-pos")
        p.add_argument("--validation-pos")
        p.add_argument("--lr", type=float, default=0.1)
        p.add_argument("--max-epochs", type=int, default=30)
        p.add_argument("--bptt-horizon", type=int, default=0,
                       help="0 = full-sentence gradients")
        p.add_argument("--out")
        p.add_argument("--log", help="epoch log file")

    def p_tag(p):
        p.add_argument("--model")
        p.add_argument("--repr")
        p.add_argument("--input", help="text file, one sentence per line")
        p.add_argument("--side", default="target", choices=("source", "target"))
        p.add_argument("--pos")
        p.add_argument("--pos-tagset")
        p.add_argument("--oov-cbow", help="embeddings file; enables resolution")
        p.add_argument("--out")

    def p_align(p):
        p.add_argument("--source")
        p.add_argument("--target")
        p.add_argument("--iterations", type=int, default=5)
        p.add_argument("--out")

    def p_project(p):
        p.add_argument("--source-tagged")
        p.add_argument("--links")
        p.add_argument("--source")
        p.add_argument("--target")
        p.add_argument("--tagset")
        p.add_argument("--threshold", type=float, default=0.5)
        p.add_argument("--out")

    def p_train_hmm(p):
        p.add_argument("--train")
        p.add_argument("--tagset")
        p.add_argument("--rare-threshold", type=int, default=10)
        p.add_argument("--max-suffix-len", type=int, default=4)
        p.add_argument("--out")

    def p_combine(p):
        p.add_argument("--gold")
        p.add_argument("--hmm")
        p.add_argument("--rnn")
        p.add_argument("--repr")
        p.add_argument("--side", default="target", choices=("source", "target"))
        p.add_argument("--oov-cbow")
        p.add_argument("--pos")
        p.add_argument("--pos-tagset")
        p.add_argument("--grid-step", type=float, default=0.05)
        p.add_argument("--mu", type=float, help="skip tuning, use this weight")
        p.add_argument("--report")
        p.add_argument("--kv")

    def p_evaluate(p):
        p.add_argument("--gold")
        p.add_argument("--pred")
        p.add_argument("--tagset")
        p.add_argument("--repr", help="enables OOV accuracy")
        p.add_argument("--side", default="target", choices=("source", "target"))
        p.add_argument("--report")
        p.add_argument("--kv")

    add("build-repr", cmd_build_repr, p_build_repr)
    add("train-cbow", cmd_train_cbow, p_train_cbow)
    add("train-rnn", cmd_train_rnn, p_train_rnn)
    add("tag", cmd_tag, p_tag)
    add("align", cmd_align, p_align)
    add("project", cmd_project, p_project)
    add("train-hmm", cmd_train_hmm, p_train_hmm)
    add("combine", cmd_combine, p_combine)
    add("evaluate", cmd_evaluate, p_evaluate)
    return parser, by_name


def main(argv=None) -> int:
    parser, subparsers = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)

    # --config is applied as defaults of the chosen subcommand, so a light
    # pre-scan finds the command name and config path before strict parsing
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)

    try:
        if known.config:
            if known.command not in subparsers:
                raise ConfigError(f"unknown command {known.command!r}")
            if not Path(known.config).is_file():
                raise ConfigError(f"--config: no such file: {known.config}")
            subparsers[known.command].set_defaults(
                **_load_config_file(known.config)
            )
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return 0 if exc.code in (0, None) else 1
        if getattr(args, "func", None) is None:
            parser.print_usage(sys.stderr)
            return 1
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
