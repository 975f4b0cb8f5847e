#!/usr/bin/env python3
# scripts/run_noise_experiment.py
"""
Script to compare GraphMerge against single-parse models on synthetic
corpora with noisy parser channels
"""
import argparse
import copy
import json
import sys
import time
from pathlib import Path
from typing import Dict, List

sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from src.config import Config
from src.evaluation.metrics import accuracy
from src.graph.connectivity import corpus_edge_recall
from src.graph.typed_graph import graph_for_mode
from src.ingest.aligner import align_corpus
from src.monitor import TrainingMonitor, setup_logging
from src.synth.generator import corrupt_corpus, gen_dataset
from src.training.trainer import predict, prepare, train
import logging

logger = logging.getLogger(__name__)


def run_seed(config: Config, seed: int, n_train: int, n_test: int, rewire: float, parsers: int) -> Dict:
    """Train every configuration on one seeded corpus; returns test accuracies"""
    examples, golds = gen_dataset(n_train + n_test, seed=np.random.default_rng([seed, 0]))
    channels = corrupt_corpus(golds, rewire, parsers, seed)
    aligned = align_corpus(examples, channels)
    train_set, test_set = aligned[:n_train], aligned[n_train:]

    merged = [graph_for_mode(item.parses, 'merge') for item in aligned]
    result = {
        'seed': seed,
        'union_edge_recall': corpus_edge_recall(merged, golds),
        'test_accuracy': {},
    }

    modes = ['merge'] + [f"single:parser{k}" for k in range(parsers)]
    for mode in modes:
        cfg = copy.deepcopy(config.train)
        cfg.seed = seed
        cfg.graph_mode = mode

        print(f"\n🧮 seed={seed} mode={mode}")
        params, _ = train(cfg, train_set, monitor=TrainingMonitor())
        preds, _ = predict(params, prepare(test_set, params.spec))
        acc = accuracy(preds, [item.example.label for item in test_set])
        result['test_accuracy'][mode] = acc
        print(f"   test accuracy: {acc:.4f}")

    singles = [result['test_accuracy'][m] for m in modes[1:]]
    result['single_mean'] = float(np.mean(singles))
    result['merge_beats_single_mean'] = result['test_accuracy']['merge'] >= result['single_mean']
    return result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument('--config', default="./configs/config.yaml")
    parser.add_argument('--seeds', type=int, nargs='+', default=[0, 1, 2, 3, 4])
    parser.add_argument('--train', type=int, default=1000)
    parser.add_argument('--test', type=int, default=200)
    parser.add_argument('--rewire', type=float, default=0.2)
    parser.add_argument('--parsers', type=int, default=3)
    parser.add_argument('--report', default="./logs/noise_experiment.json")
    parser.add_argument('--override', action='append', default=[])
    args = parser.parse_args()

    config = Config.from_yaml(args.config) if Path(args.config).exists() else Config()
    config.apply_overrides(args.override).validate()
    setup_logging(config.log_level, config.log_file)

    print("\n🔬 PARSER-NOISE EXPERIMENT")
    print("=" * 70)
    start_time = time.time()

    runs: List[Dict] = [
        run_seed(config, seed, args.train, args.test, args.rewire, args.parsers)
        for seed in args.seeds
    ]

    merge_acc = [r['test_accuracy']['merge'] for r in runs]
    report = {
        'rewire_prob': args.rewire,
        'parsers': args.parsers,
        'runs': runs,
        'merge_mean_accuracy': float(np.mean(merge_acc)),
        'merge_wins': sum(r['merge_beats_single_mean'] for r in runs),
        'elapsed_seconds': time.time() - start_time,
    }

    Path(args.report).parent.mkdir(parents=True, exist_ok=True)
    with open(args.report, 'w', encoding='utf-8') as f:
        json.dump(report, f, indent=2)

    print("\n" + "=" * 70)
    print(f"📊 GraphMerge mean test accuracy: {report['merge_mean_accuracy']:.4f}")
    print(f"📊 GraphMerge >= single-parse mean in {report['merge_wins']}/{len(runs)} seeds")
    print(f"💾 Report saved to: {args.report}")
    print("=" * 70)


if __name__ == "__main__":
    main()
