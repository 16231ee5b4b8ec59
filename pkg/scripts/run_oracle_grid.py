"""Sweep acquisition modes x seeds with the simulated oracle; one combined CSV.

The context (LF pool, vote matrix, SVD features) is built once and shared
across every run. Mode "al" routes to the per-sample uncertainty-sampling
baseline instead of an LF session.

Usage:
    python scripts/run_oracle_grid.py --corpus data/train.jsonl --test data/test.jsonl \
        --modes lse_a random --seeds 0 1 2 3 4 --T 100 --out results.csv
"""

import argparse
import sys
import time

from iws import AcquisitionConfig, build_context, load_split
from iws.session import OracleConfig, active_learning_baseline, results_to_csv, run_with_oracle


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", required=True)
    ap.add_argument("--test", default=None)
    ap.add_argument("--format", default="jsonl-text")
    ap.add_argument("--modes", nargs="+", default=["lse_a", "random"])
    ap.add_argument("--seeds", nargs="+", type=int, default=[0, 1, 2, 3, 4])
    ap.add_argument("--T", type=int, default=100)
    ap.add_argument("--r", type=float, default=0.7)
    ap.add_argument("--mtilde", type=int, default=100)
    ap.add_argument("--threshold", type=float, default=0.7)
    ap.add_argument("--checkpoints", nargs="+", type=int, default=None)
    ap.add_argument("--refit-stride", type=int, default=1)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    ds = load_split(args.corpus, args.test, args.format)
    ctx = build_context(ds, refit_stride=args.refit_stride)
    checkpoints = tuple(args.checkpoints) if args.checkpoints else ctx.checkpoints
    oracle = OracleConfig(threshold=args.threshold)

    rows = []
    for mode in args.modes:
        for seed in args.seeds:
            t0 = time.time()
            if mode == "al":
                got = active_learning_baseline(ctx, T=args.T, seed=seed, checkpoints=checkpoints)
            else:
                config = AcquisitionConfig(mode=mode, r=args.r, m_tilde=args.mtilde, seed=seed)
                got = run_with_oracle(
                    ctx, config, T=args.T, oracle=oracle, checkpoints=checkpoints
                )
            rows.extend(got)
            last = got[-1]["auc"] if got and got[-1]["auc"] is not None else float("nan")
            print(
                f"{mode} seed={seed}: {len(got)} checkpoints, final auc {last:.4f}, "
                f"{time.time() - t0:.1f}s",
                file=sys.stderr,
            )

    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(results_to_csv(rows))
    print(args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
