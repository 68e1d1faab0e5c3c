"""Command-line interface mirroring the analysis toolkit's flag conventions."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .sample import sample
from .train import TrainConfig, train


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gantrainer",
        description="Desk-scale conditional WGAN-GP for microstructure chips.",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=Path("."))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one GAN on a labeled chip manifest")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--condition", default="feed_rate", choices=("feed_rate", "uts"))
    p.add_argument("--image-size", type=int, default=128)
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--max-steps", type=int, default=None, help="generator steps; overrides epochs")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--critic-steps", type=int, default=5)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="sample chips from a checkpoint")
    p.add_argument("--checkpoint", required=True, type=Path)
    p.add_argument("--temper", required=True, choices=("T5", "T6"))
    p.add_argument("--bin-label", required=True, choices=("low", "mid", "hi"))
    p.add_argument("--count", type=int, default=16)
    p.set_defaults(func=cmd_sample)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def cmd_train(args) -> int:
    config = TrainConfig(
        condition_name=args.condition,
        image_size=args.image_size,
        epochs=args.epochs,
        max_steps=args.max_steps,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        critic_steps_per_gen_step=args.critic_steps,
        seed=args.seed,
    )
    result = train(config, args.manifest, args.out)
    last = result.history[-1]
    print(
        f"trained {last['step']} steps; final score gap {last['score_gap']:.4f}; "
        f"checkpoint at {result.checkpoint_dir}"
    )
    return 0


def cmd_sample(args) -> int:
    manifest = sample(
        args.checkpoint, args.temper, args.bin_label, args.count, args.seed, args.out
    )
    print(f"wrote {args.count} chips and {manifest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
