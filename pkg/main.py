#!/usr/bin/env python3
# main.py
"""
Main application - GraphMerge command line

Subcommands: merge, train, eval, analyze-hops, synth.
Exit codes: 0 success, 1 usage error, 2 data/validation error.
"""

import argparse
import json
import os
import sys
from typing import List, Optional
import logging

from src.config import Config
from src.errors import ConfigError, DataError, NonFiniteError, TrainingDivergedError
from src.monitor import setup_logging
from src.pipeline import SPLITS, GraphMergePipeline, load_corpus
from src.synth import write_corpus

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

DEFAULT_CONFIG = "./configs/config.yaml"


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; usage errors here exit with 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv(value: str) -> List[str]:
    items = [item.strip() for item in value.split(',') if item.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def _hop_mode(value: str) -> str:
    if value in ('union', 'merge', 'intersect') or (value.startswith('single:') and len(value) > 7):
        return value
    raise argparse.ArgumentTypeError(f"mode must be union, intersect or single:ID, got '{value}'")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="graphmerge", description="Dependency-parse ensembling with relational graph attention")
    parser.add_argument('--log-level', default=None, help="Override log_level")
    sub = parser.add_subparsers(dest='command', metavar='COMMAND', parser_class=ArgumentParser)
    sub.required = True

    merge = sub.add_parser('merge', help="Build ensemble graphs and emit statistics/DOT")
    merge.add_argument('--dataset', required=True)
    merge.add_argument('--parses', required=True, type=_csv)
    merge.add_argument('--mode', default='union', choices=['union', 'intersect'])
    merge.add_argument('--dot', default=None, metavar='DIR', help="Write one DOT file per sentence")
    merge.add_argument('--stats', default=None, metavar='OUT.json')
    merge.add_argument('--gold', default=None, metavar='GOLD.conllu', help="Report gold head-edge recall")

    train = sub.add_parser('train', help="Train and write checkpoint + metrics JSONL")
    train.add_argument('--config', default=DEFAULT_CONFIG)
    train.add_argument('--override', action='append', default=[], metavar='KEY=VALUE')
    train.add_argument('--seed', type=int, default=None)

    evaluate = sub.add_parser('eval', help="Metrics report for a checkpoint")
    evaluate.add_argument('--checkpoint', default=None)
    evaluate.add_argument('--dataset', required=True)
    evaluate.add_argument('--parses', required=True, type=_csv)
    evaluate.add_argument('--report', default=None, metavar='OUT.json')
    evaluate.add_argument('--label-ensemble', default=None, type=_csv, metavar='CKPT1,CKPT2,...')
    evaluate.add_argument('--ars', action='store_true', help="Grouped aspect-robustness scoring")
    evaluate.add_argument('--split', default='all', choices=SPLITS)
    evaluate.add_argument('--predictions', default=None, metavar='OUT.json')
    evaluate.add_argument('--embeddings', default=None, help="Embedding file for file-mode checkpoints")

    hops = sub.add_parser('analyze-hops', help="Aspect-to-opinion hop histogram")
    hops.add_argument('--dataset', required=True)
    hops.add_argument('--parses', required=True, type=_csv)
    hops.add_argument('--mode', required=True, type=_hop_mode)
    hops.add_argument('--predictions', default=None, metavar='PRED.json')
    hops.add_argument('--skip-unannotated', action='store_true',
                      help="Leave out examples without opinion annotations")
    hops.add_argument('--report', default=None, metavar='OUT.json')

    synth = sub.add_parser('synth', help="Generate a synthetic corpus")
    synth.add_argument('--out', required=True, metavar='DIR')
    synth.add_argument('--n', type=int, default=1000)
    synth.add_argument('--rewire', type=float, default=0.2)
    synth.add_argument('--parsers', type=int, default=3)
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('--min-len', type=int, default=6)
    synth.add_argument('--max-len', type=int, default=12)
    synth.add_argument('--distractors', type=int, default=1)

    return parser


def _load_config(path: Optional[str]) -> Config:
    if path and os.path.exists(path):
        return Config.from_yaml(path)
    if path and path != DEFAULT_CONFIG:
        raise FileNotFoundError(f"config file not found: {path}")
    return Config()


def _emit(report: dict, path: Optional[str], pipeline: GraphMergePipeline):
    if path:
        pipeline.write_report(path, report)
    else:
        print(json.dumps(report, indent=2, ensure_ascii=False))


def cmd_merge(args, config: Config) -> int:
    pipeline = GraphMergePipeline(config)
    aligned = load_corpus(args.dataset, args.parses)
    report = pipeline.merge(aligned, args.mode, dot_dir=args.dot, gold_path=args.gold)
    _emit(report, args.stats, pipeline)
    return EXIT_OK


def cmd_train(args, config: Config) -> int:
    overrides = list(args.override)
    if args.seed is not None:
        overrides.append(f"train.seed={args.seed}")
    config.apply_overrides(overrides).validate()

    pipeline = GraphMergePipeline(config)
    _, history = pipeline.train()
    print(json.dumps(pipeline.monitor.summarize(), indent=2))
    return EXIT_OK


def cmd_eval(args, config: Config) -> int:
    checkpoints = [args.checkpoint] if args.checkpoint else []
    for path in args.label_ensemble or []:
        if path not in checkpoints:
            checkpoints.append(path)
    if not checkpoints:
        raise UsageError("eval needs --checkpoint or --label-ensemble")

    if args.embeddings:
        config.data.embeddings_path = args.embeddings

    pipeline = GraphMergePipeline(config)
    aligned = load_corpus(args.dataset, args.parses)
    report = pipeline.evaluate(checkpoints, aligned, args.split, args.ars, args.predictions)
    _emit(report, args.report, pipeline)
    return EXIT_OK


def cmd_analyze_hops(args, config: Config) -> int:
    pipeline = GraphMergePipeline(config)
    aligned = load_corpus(args.dataset, args.parses)
    report = pipeline.analyze_hops(aligned, args.mode, args.predictions, args.skip_unannotated)
    _emit(report, args.report, pipeline)
    return EXIT_OK


def cmd_synth(args, config: Config) -> int:
    if args.n < 1 or args.parsers < 1:
        raise UsageError("--n and --parsers must be >= 1")
    result = write_corpus(
        args.out,
        n_examples=args.n,
        rewire_prob=args.rewire,
        parsers=args.parsers,
        seed=args.seed,
        length_range=(args.min_len, args.max_len),
        n_distractors=args.distractors,
    )
    print(json.dumps({k: result[k] for k in ('dataset', 'gold', 'parses')}, indent=2))
    return EXIT_OK


COMMANDS = {
    'merge': cmd_merge,
    'train': cmd_train,
    'eval': cmd_eval,
    'analyze-hops': cmd_analyze_hops,
    'synth': cmd_synth,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        config = _load_config(getattr(args, 'config', DEFAULT_CONFIG))
        if args.log_level:
            config.log_level = args.log_level
        setup_logging(config.log_level, config.log_file)
        return COMMANDS[args.command](args, config)

    except (ConfigError, UsageError) as e:
        print(f"❌ Usage error: {e}", file=sys.stderr)
        return EXIT_USAGE

    except (DataError, NonFiniteError, TrainingDivergedError, FileNotFoundError, ValueError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        logger.debug("Failure details", exc_info=True)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
