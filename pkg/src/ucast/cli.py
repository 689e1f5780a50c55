"""Batch entry points: ``train``, ``stylize``, ``video``, ``eval-temporal``.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import torch

from .backbone import check_weights, interpolate_styles
from .imageio import load_image, save_image, scan_images
from .style_codec import ConfigError
from .trainer import (NonFiniteLossError, Trainer, checkpoint_meta, load_config, load_dataset,
                      read_checkpoint_config, trainer_from_checkpoint)
from .video import FlowFormatError, read_flow, temporal_loss

log = logging.getLogger("ucast")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> Parser:
    parser = Parser(prog="ucast", description="Contrastive arbitrary style transfer (desk-scale).")
    parser.add_argument("--seed", type=int, default=None, help="seed for every RNG (default: config seed)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("train", help="train projector, generator and discriminators")
    p.add_argument("--config", help="key: value config file (optional with --resume)")
    p.add_argument("--content", required=True, help="directory of realistic images")
    p.add_argument("--style", required=True, help="directory of artistic images")
    p.add_argument("--out", required=True, help="run directory for checkpoints and metrics.jsonl")
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--log-every", type=int, default=100, help="log interval in iterations (with -v)")

    p = sub.add_parser("stylize", help="stylize images; several styles with --weights interpolate")
    p.add_argument("--ckpt", required=True, help="checkpoint file")
    p.add_argument("--content", required=True, nargs="+", help="content image path(s)")
    p.add_argument("--style", required=True, nargs="+", help="style image path(s)")
    p.add_argument("--weights", type=float, nargs="+", help="convex weights, one per style")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--size", type=int, default=None, help="square working size (default: checkpoint resolution)")

    p = sub.add_parser("video", help="stylize every frame of a directory")
    p.add_argument("--ckpt", required=True, help="checkpoint file")
    p.add_argument("--frames", required=True, help="directory of frames, processed in lexicographic order")
    p.add_argument("--style", required=True, help="style image path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--size", type=int, default=None, help="square working size (default: checkpoint resolution)")

    p = sub.add_parser("eval-temporal", help="temporal-consistency metric of stylized frames")
    p.add_argument("--frames", required=True, help="directory of stylized frames")
    p.add_argument("--flows", required=True, help="directory of UFLO files, one per consecutive frame pair")
    p.add_argument("--invert-mask", action="store_true", help="score pixels below the threshold instead")
    return parser


def _seed_all(seed):
    if seed is not None:
        torch.manual_seed(seed)
        np.random.seed(seed)


def cmd_train(args) -> int:
    if args.resume:
        config = read_checkpoint_config(args.resume)
    elif args.config:
        config = load_config(args.config)
    else:
        raise UsageError("train needs --config (or --resume)")
    if args.seed is not None and not args.resume:
        config.seed = args.seed
    _seed_all(config.seed)
    if args.resume:
        done = checkpoint_meta(args.resume)["iteration"]
        if done >= config.iterations:
            log.info("checkpoint %s already finished (%d iterations)", args.resume, done)
            return EXIT_OK
    for d in (args.content, args.style):
        if not Path(d).is_dir():
            raise UsageError(f"{d} is not a directory")
    content = load_dataset(args.content, "realistic", config.batch_size, config.resolution, config.seed + 1)
    style = load_dataset(args.style, "artistic", config.batch_size, config.resolution, config.seed + 2)
    if args.resume:
        trainer = trainer_from_checkpoint(args.resume, content, style)
    else:
        trainer = Trainer(config, content, style)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trainer.run(out, log_every=args.log_every if args.verbose else 0)
    return EXIT_OK


def _load_model(ckpt):
    trainer = trainer_from_checkpoint(ckpt)
    trainer.gen.eval()
    return trainer


def cmd_stylize(args) -> int:
    if args.weights is not None:
        try:
            check_weights(args.weights, len(args.style))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif len(args.style) > 1:
        raise UsageError("several --style images need --weights")
    trainer = _load_model(args.ckpt)
    size = args.size or trainer.config.resolution
    styles = [load_image(p, size)[None] for p in args.style]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with torch.no_grad():
        for path in args.content:
            content = load_image(path, size)[None]
            if args.weights is not None:
                result = interpolate_styles(content, styles, args.weights, trainer.gen, trainer.style_encoder)
            else:
                result = trainer.stylize(content, styles[0])
            save_image(result, out / f"{Path(path).stem}_stylized.png")
    return EXIT_OK


def cmd_video(args) -> int:
    trainer = _load_model(args.ckpt)
    size = args.size or trainer.config.resolution
    frames = scan_images(args.frames, size)
    if not frames:
        raise UsageError(f"no readable frames in {args.frames}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with torch.no_grad():
        style_code = trainer.encode(load_image(args.style, size)[None])
        for path, frame in frames:
            save_image(trainer.gen(frame[None], style_code), out / f"{path.stem}.png")
    return EXIT_OK


def cmd_eval_temporal(args) -> int:
    frames = scan_images(args.frames)
    flow_dir = Path(args.flows)
    if not flow_dir.is_dir():
        raise UsageError(f"{flow_dir} is not a directory")
    flow_paths = sorted(p for p in flow_dir.iterdir() if p.is_file() and not p.name.startswith("."))
    if len(flow_paths) != len(frames) - 1:
        raise UsageError(f"{len(frames)} frames need {max(len(frames) - 1, 0)} flow files, found {len(flow_paths)}")
    flows = [read_flow(p) for p in flow_paths]
    value = temporal_loss([f for _, f in frames], flows, invert_mask=args.invert_mask)
    print(f"temporal_loss: {value:.6f}")
    return EXIT_OK


COMMANDS = {"train": cmd_train, "stylize": cmd_stylize, "video": cmd_video, "eval-temporal": cmd_eval_temporal}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    _seed_all(args.seed)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"ucast {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonFiniteLossError, FlowFormatError, OSError, RuntimeError, ValueError) as exc:
        print(f"ucast {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
