#!/usr/bin/env python3
"""Generate a synthetic mirror-language corpus as CLI-ready files.

Writes into --out-dir:
  source.txt / target.txt   sentence-aligned bi-text
  tagset.txt                tag inventory
  train.tsv / validation.tsv  source-side annotations
  all_source.tsv            every source sentence tagged (for projection)
  test.txt / gold.tsv       target-side test text and its gold tags
"""

import argparse
from pathlib import Path

from xltag.corpus import write_parallel_corpus, write_tagged_corpus, write_tagset
from xltag.synthetic import word_class_task


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", required=True)
    ap.add_argument("--pairs", type=int, default=500)
    ap.add_argument("--validation", type=int, default=50)
    ap.add_argument("--test", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    task = word_class_task(
        n_pairs=args.pairs,
        n_validation=args.validation,
        n_test=args.test,
        seed=args.seed,
    )
    write_parallel_corpus(task.corpus, out / "source.txt", out / "target.txt")
    write_tagset(task.tagset, out / "tagset.txt")
    write_tagged_corpus(task.train, task.tagset, out / "train.tsv")
    write_tagged_corpus(task.validation, task.tagset, out / "validation.tsv")
    write_tagged_corpus(
        task.train + task.validation, task.tagset, out / "all_source.tsv"
    )
    write_tagged_corpus(task.test, task.tagset, out / "gold.tsv")
    (out / "test.txt").write_text(
        "\n".join(" ".join(s.tokens) for s in task.test) + "\n",
        encoding="utf-8",
    )
    print(
        f"wrote {task.corpus.n_pairs} bi-sentences, "
        f"{len(task.train)}/{len(task.validation)} train/validation, "
        f"{len(task.test)} test sentences -> {out}"
    )


if __name__ == "__main__":
    main()
