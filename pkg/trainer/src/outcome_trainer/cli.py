"""Entry point: train / embed / tsne subcommands."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import TINY_RANDOM_ENCODER, TrainConfig
from .data import DataError
from .embed import embed
from .train import fine_tune
from .tsne import tsne_plot


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="outcome-trainer",
        description="Fine-tune a text encoder for trial-outcome prediction.",
    )
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune on a split manifest")
    p.add_argument("--manifest", required=True, help="split manifest JSON")
    p.add_argument("--corpus", required=True, nargs="+",
                   help="corpus JSON-lines files to resolve ids against")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--learning-rate", type=float, default=1e-5)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--epochs", type=int, default=7)
    p.add_argument("--seed", type=int, default=40)
    p.add_argument("--encoder", default=TINY_RANDOM_ENCODER)
    p.add_argument("--max-length", type=int, default=128)

    p = sub.add_parser("embed", help="write pooled embeddings for a corpus file")
    p.add_argument("--input", required=True, help="corpus or synthetic JSON-lines")
    p.add_argument("--out", required=True, help="output embeddings JSON-lines")
    p.add_argument("--encoder", default=TINY_RANDOM_ENCODER)
    p.add_argument("--max-length", type=int, default=128)
    p.add_argument("--seed", type=int, default=40)

    p = sub.add_parser("tsne", help="2-D projection of real vs synthetic embeddings")
    p.add_argument("--real", required=True)
    p.add_argument("--synthetic", required=True)
    p.add_argument("--out-coords", required=True)
    p.add_argument("--out-png", required=True)
    p.add_argument("--seed", type=int, default=40)
    p.add_argument("--perplexity", type=float, default=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(message)s")
    try:
        if args.command == "train":
            config = TrainConfig(
                manifest=Path(args.manifest),
                corpus_files=[Path(p) for p in args.corpus],
                out_dir=Path(args.out_dir),
                learning_rate=args.learning_rate,
                batch_size=args.batch_size,
                epochs=args.epochs,
                seed=args.seed,
                encoder=args.encoder,
                max_length=args.max_length,
            )
            fine_tune(config)
        elif args.command == "embed":
            embed(args.input, args.out, encoder=args.encoder,
                  max_length=args.max_length, seed=args.seed)
        else:
            tsne_plot(args.real, args.synthetic, args.seed,
                      args.out_coords, args.out_png, args.perplexity)
    except (DataError, ValueError, OSError) as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
