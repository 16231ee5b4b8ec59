"""Write the bundled synthetic corpus to disk as JSONL train/test splits.

Usage:
    python scripts/make_synthetic_corpus.py --out-dir data/ [--n-train 5000]
"""

import argparse
import json
import os

from iws import make_synthetic_corpus, save_corpus


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", required=True)
    ap.add_argument("--n-train", type=int, default=5000)
    ap.add_argument("--n-test", type=int, default=1000)
    ap.add_argument("--vocab-size", type=int, default=400)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    ds = make_synthetic_corpus(
        n_train=args.n_train, n_test=args.n_test, vocab_size=args.vocab_size, seed=args.seed
    )
    os.makedirs(args.out_dir, exist_ok=True)
    train_path = os.path.join(args.out_dir, "train.jsonl")
    test_path = os.path.join(args.out_dir, "test.jsonl")
    save_corpus(ds.train, train_path)
    save_corpus(ds.test, test_path)
    print(json.dumps({"train": train_path, "n_train": ds.n_train, "test": test_path, "n_test": ds.n_test}))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
