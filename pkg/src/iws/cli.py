"""Command-line entry points: ingest, gen-lfs, run-oracle, baseline-al, serve, eval."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .acquisition import MODES, AcquisitionConfig
from .corpus import FORMATS, Dataset, build_vocab, embed_svd, load_corpus, load_split, save_corpus
from .errors import IWSError
from .lf import generate_keyword_lfs, generate_mknn_lfs, load_pool, save_pool
from .session import (
    DEFAULT_CHECKPOINTS,
    SCENARIOS,
    OracleConfig,
    active_learning_baseline,
    build_context,
    load_session,
    resume_session,
    results_to_csv,
    run_with_oracle,
)

_MODE_ALIASES = {"as": "active_search", **{m: m for m in MODES}}


def _add_corpus_args(p: argparse.ArgumentParser, with_test: bool = True) -> None:
    p.add_argument("--corpus", required=True, help="train-split JSONL path")
    if with_test:
        p.add_argument("--test", default=None, help="held-out test-split JSONL path")
    p.add_argument("--format", default="jsonl-text", choices=FORMATS)


def _add_pool_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pool", default=None, help="LF pool JSON (default: keyword LFs from the corpus)")
    p.add_argument("--min-coverage", type=float, default=0.002)
    p.add_argument("--df-min", type=int, default=10)
    p.add_argument("--df-max-frac", type=float, default=0.20)


def _dataset(args: argparse.Namespace) -> Dataset:
    return load_split(args.corpus, getattr(args, "test", None), args.format)


def _context(args: argparse.Namespace, ds: Dataset):
    pool = load_pool(args.pool) if args.pool else None
    vocab = None
    if ds.embeddings is None:
        vocab = build_vocab(ds, df_min=args.df_min, df_max_frac=args.df_max_frac)
    return build_context(
        ds,
        pool,
        vocab=vocab,
        min_coverage=args.min_coverage,
        refit_stride=getattr(args, "refit_stride", 1),
        checkpoints=tuple(getattr(args, "checkpoints", None) or DEFAULT_CHECKPOINTS),
        pool_ref=args.pool or "keyword:auto",
    )


def _cmd_ingest(args: argparse.Namespace) -> int:
    ds = load_corpus(args.input, args.format)
    labeled = sum(1 for d in ds.train if d.gold_label is not None)
    if args.out:
        save_corpus(ds.train, args.out, args.format)
    print(json.dumps({"documents": ds.n_train, "labeled": labeled, "format": args.format}))
    return 0


def _cmd_gen_lfs(args: argparse.Namespace) -> int:
    ds = load_corpus(args.corpus, args.format)
    if args.family == "keyword":
        vocab = build_vocab(ds, df_min=args.df_min, df_max_frac=args.df_max_frac)
        lfs = generate_keyword_lfs(ds, vocab, args.min_coverage)
    else:
        if ds.embeddings is None:
            vocab = build_vocab(ds, df_min=args.df_min, df_max_frac=args.df_max_frac)
            ds = Dataset(train=ds.train, embeddings=embed_svd(ds, vocab, args.svd_dim).train)
        labels = [1, -1] if args.target_label == "both" else [int(args.target_label)]
        lfs = []
        for lab in labels:
            for lf in generate_mknn_lfs(ds, k1=args.k1, k2=args.k2, target_label=lab):
                lfs.append(dataclasses.replace(lf, id=len(lfs)))
    save_pool(lfs, args.out)
    print(json.dumps({"n_lfs": len(lfs), "family": args.family, "out": args.out}))
    return 0


def _cmd_run_oracle(args: argparse.Namespace) -> int:
    ds = _dataset(args)
    ctx = _context(args, ds)
    config = AcquisitionConfig(
        mode=_MODE_ALIASES[args.mode], r=args.r, m_tilde=args.mtilde, seed=args.seed
    )
    rows = run_with_oracle(
        ctx,
        config,
        T=args.T,
        oracle=OracleConfig(threshold=args.threshold),
        scenario=args.scenario,
    )
    csv_text = results_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_baseline_al(args: argparse.Namespace) -> int:
    ds = _dataset(args)
    ctx = _context(args, ds)
    rows = active_learning_baseline(ctx, T=args.T, seed=args.seed)
    csv_text = results_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    ds = _dataset(args)
    ctx = _context(args, ds)
    app = create_app(ctx, sessions_dir=args.sessions_dir, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    ds = _dataset(args)
    ctx = _context(args, ds)
    state = load_session(args.session)
    if state.pool_ref and ctx.pool_ref and state.pool_ref != ctx.pool_ref:
        print(
            f"warning: session pool_ref {state.pool_ref!r} != current {ctx.pool_ref!r}",
            file=sys.stderr,
        )
    metrics = resume_session(ctx, state).finalize(args.scenario, store=False)
    print(json.dumps(metrics))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iws",
        description="Interactive weak supervision: annotate labeling functions, not samples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a JSONL corpus and print a summary")
    p.add_argument("--input", required=True)
    p.add_argument("--format", default="jsonl-text", choices=FORMATS)
    p.add_argument("--out", default=None, help="write a normalized copy here")
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("gen-lfs", help="generate a candidate LF pool")
    _add_corpus_args(p, with_test=False)
    p.add_argument("--family", required=True, choices=("keyword", "mknn"))
    p.add_argument("--min-coverage", type=float, default=0.002)
    p.add_argument("--k1", type=int, default=20)
    p.add_argument("--k2", type=int, default=1500)
    p.add_argument("--target-label", default="both", choices=("1", "-1", "both"))
    p.add_argument("--df-min", type=int, default=10)
    p.add_argument("--df-max-frac", type=float, default=0.20)
    p.add_argument("--svd-dim", type=int, default=300)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_lfs)

    p = sub.add_parser("run-oracle", help="run a simulated-expert session, emit AUC CSV")
    _add_corpus_args(p)
    _add_pool_args(p)
    p.add_argument("--mode", default="lse_a", choices=sorted(_MODE_ALIASES))
    p.add_argument("--r", type=float, default=0.7)
    p.add_argument("--mtilde", type=int, default=100)
    p.add_argument("--T", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.7)
    p.add_argument("--scenario", default=None, choices=SCENARIOS)
    p.add_argument("--refit-stride", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_run_oracle)

    p = sub.add_parser("baseline-al", help="uncertainty-sampling baseline, emit AUC CSV")
    _add_corpus_args(p)
    _add_pool_args(p)
    p.add_argument("--T", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_baseline_al)

    p = sub.add_parser("serve", help="serve the annotation API (and UI bundle if present)")
    _add_corpus_args(p)
    _add_pool_args(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--sessions-dir", default="./sessions")
    p.add_argument("--static-dir", default=None)
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("eval", help="re-finalize a saved session against its corpus")
    _add_corpus_args(p)
    _add_pool_args(p)
    p.add_argument("--session", required=True)
    p.add_argument("--scenario", default="a", choices=SCENARIOS)
    p.set_defaults(fn=_cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except IWSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
