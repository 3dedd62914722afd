"""``lulc`` command line: synth, extract, select, train, eval, pipeline."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import pipeline
from .config import PipelineConfig
from .errors import ConfigError, LulcError
from .synth import synth_dataset, write_png_tree

OPTIMIZERS = ("full", "hgo_off", "plain_pso")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--seed", type=int, help="global seed (propagates to every stage)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lulc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write the synthetic texture corpus as PNG folders")
    _common(p)
    p.add_argument("--per-class", type=int, default=200)
    p.add_argument("--size", type=int, default=28)
    p.add_argument("--channels", type=int, default=3)

    p = sub.add_parser("extract", help="preprocess images and write feature files")
    _common(p)
    p.add_argument("--data", help="dataset directory or raw tensor (overrides dataset.path)")

    p = sub.add_parser("select", help="run feature selection on the training split")
    _common(p)
    p.add_argument("--features", type=Path, help="input LULCF1 file (default <out>/features.lulcf)")
    p.add_argument("--optimizer", choices=OPTIMIZERS)

    p = sub.add_parser("train", help="train the recurrent classifier")
    _common(p)
    p.add_argument("--features", type=Path, help="input LULCF1 file (default <out>/selected.lulcf)")

    p = sub.add_parser("eval", help="evaluate a trained model")
    _common(p)
    p.add_argument("--features", type=Path, help="input LULCF1 file (default <out>/selected.lulcf)")
    p.add_argument("--model", type=Path, help="LULCM1 model (default <out>/model.lulcm)")
    p.add_argument("--subset", choices=("test", "train", "all"), default="test")

    p = sub.add_parser("pipeline", help="extract, select, train and eval in one run")
    _common(p)
    p.add_argument("--data", help="dataset directory or raw tensor (overrides dataset.path)")
    p.add_argument("--skip-select", action="store_true", help="train on the full feature set")
    p.add_argument("--optimizer", choices=OPTIMIZERS)
    return parser


def load_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    over = {}
    if args.seed is not None:
        over["run__seed"] = args.seed
    if args.out is not None:
        over["run__out"] = str(args.out)
    if getattr(args, "data", None):
        over["dataset__path"] = args.data
    if getattr(args, "skip_select", False):
        over["run__skip_select"] = True
    if getattr(args, "optimizer", None):
        over["swarm__optimizer"] = args.optimizer
    return cfg.with_overrides(**over) if over else cfg


def _print_report(rep) -> None:
    print(f"{'class':<16}{'accuracy':>10}{'precision':>11}{'recall':>9}")
    for name, s in list(zip(rep.class_names, rep.per_class)) + [("overall", rep.overall)]:
        print(f"{name:<16}{s.accuracy:>10.3f}{s.precision:>11.3f}{s.recall:>9.3f}")


def run(args: argparse.Namespace) -> int:
    cmd = args.command
    if cmd == "synth":
        out = args.out or Path("synth_data")
        try:
            ds = synth_dataset(args.per_class, args.size, args.channels, args.seed or 0)
            write_png_tree(ds, out)
        except (ValueError, OSError) as exc:
            raise pipeline.StageError("synth", str(exc)) from exc
        print(f"wrote {len(ds)} images to {out}")
        return 0

    try:
        cfg = load_config(args)
    except ConfigError as exc:
        raise pipeline.StageError("config", str(exc)) from exc

    if cmd == "extract":
        print(pipeline.cmd_extract(cfg))
    elif cmd == "select":
        print(pipeline.cmd_select(cfg, args.features))
    elif cmd == "train":
        print(pipeline.cmd_train(cfg, args.features))
    elif cmd == "eval":
        _print_report(pipeline.cmd_eval(cfg, args.features, args.model, args.subset))
    elif cmd == "pipeline":
        _print_report(pipeline.cmd_pipeline(cfg))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return run(args)
    except LulcError as exc:
        print(f"lulc: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
