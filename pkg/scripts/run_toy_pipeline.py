#!/usr/bin/env python3
"""Drive the whole pipeline on a generated toy corpus.

Runs: build-repr, train-cbow, train-rnn, tag, align, project, train-hmm,
combine, evaluate - and prints the combined report. Pass --data-dir to
reuse files from make_toy_corpus.py, otherwise a corpus is generated
under --work-dir/data.
"""

import argparse
import subprocess
import sys
from pathlib import Path

SCRIPTS = Path(__file__).parent


def run(argv):
    printable = " ".join(str(a) for a in argv)
    print(f"$ xltag {printable}")
    proc = subprocess.run(
        [sys.executable, "-m", "xltag.cli"] + [str(a) for a in argv]
    )
    if proc.returncode != 0:
        sys.exit(proc.returncode)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--work-dir", required=True)
    ap.add_argument("--data-dir", help="existing corpus directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--forward-size", type=int, default=32)
    ap.add_argument("--compression-size", type=int, default=32)
    ap.add_argument("--bidirectional", action="store_true")
    args = ap.parse_args()

    work = Path(args.work_dir)
    work.mkdir(parents=True, exist_ok=True)
    if args.data_dir:
        data = Path(args.data_dir)
    else:
        data = work / "data"
        subprocess.run(
            [
                sys.executable,
                str(SCRIPTS / "make_toy_corpus.py"),
                "--out-dir",
                str(data),
                "--seed",
                str(args.seed),
            ],
            check=True,
        )

    run(["build-repr", "--source", data / "source.txt", "--target",
         data / "target.txt", "--out", work / "table.xlrep"])
    run(["train-cbow", "--target", data / "target.txt", "--window", 2,
         "--dim", 32, "--epochs", 5, "--seed", args.seed,
         "--out", work / "embeddings.xlcbw"])
    rnn_args = ["--forward-size", args.forward_size,
                "--compression-size", args.compression_size]
    if args.bidirectional:
        rnn_args.append("--bidirectional")
    run(["train-rnn", "--repr", work / "table.xlrep",
         "--train", data / "train.tsv",
         "--validation", data / "validation.tsv",
         "--tagset", data / "tagset.txt", *rnn_args,
         "--max-epochs", 25, "--seed", args.seed,
         "--out", work / "model.xlrnn", "--log", work / "epochs.log"])
    run(["tag", "--model", work / "model.xlrnn", "--repr",
         work / "table.xlrep", "--input", data / "test.txt",
         "--side", "target", "--oov-cbow", work / "embeddings.xlcbw",
         "--out", work / "predicted.tsv"])
    run(["align", "--source", data / "source.txt", "--target",
         data / "target.txt", "--iterations", 5,
         "--out", work / "links.txt"])
    run(["project", "--source-tagged", data / "all_source.tsv",
         "--links", work / "links.txt", "--source", data / "source.txt",
         "--target", data / "target.txt", "--tagset", data / "tagset.txt",
         "--out", work / "projected.tsv"])
    run(["train-hmm", "--train", work / "projected.tsv",
         "--tagset", data / "tagset.txt", "--out", work / "model.xlhmm"])
    run(["combine", "--gold", data / "gold.tsv",
         "--hmm", work / "model.xlhmm", "--rnn", work / "model.xlrnn",
         "--repr", work / "table.xlrep", "--side", "target",
         "--oov-cbow", work / "embeddings.xlcbw",
         "--report", work / "combined.txt", "--kv", work / "combined.kv"])
    run(["evaluate", "--gold", data / "gold.tsv",
         "--pred", work / "predicted.tsv", "--tagset", data / "tagset.txt",
         "--repr", work / "table.xlrep", "--side", "target",
         "--report", work / "rnn_only.txt", "--kv", work / "rnn_only.kv"])
    print(f"\nartifacts in {work}")


if __name__ == "__main__":
    main()
