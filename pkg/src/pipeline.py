# src/pipeline.py
"""
Main pipeline for GraphMerge
Integrates all components: ingest, graph ensembling, training, evaluation, analysis
"""

import json
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from tqdm import tqdm

from src.config import Config
from src.graph.connectivity import (
    corpus_edge_recall,
    example_hops,
    graph_stats,
    hop_histogram,
    summarize_stats,
)
from src.graph.dot_export import write_dot
from src.graph.typed_graph import graph_for_mode
from src.ingest.aligner import AlignedParseSet, align_corpus
from src.ingest.conllu_reader import read_conllu_file
from src.errors import DataError
from src.ingest.dataset_loader import NUM_CLASSES, load_dataset
from src.evaluation.metrics import (
    ars_score,
    classification_report,
    group_correctness,
    hop_bucket_accuracy,
    label_ensemble,
)
from src.model.checkpoint import load_checkpoint, save_checkpoint
from src.monitor import TrainingMonitor
from src.training.trainer import predict, prepare, split_indices, train

logger = logging.getLogger(__name__)

SPLITS = ('all', 'train', 'dev')


def load_corpus(dataset_path: str, parse_paths: Sequence[str]) -> List[AlignedParseSet]:
    """Dataset lines paired positionally with the sentences of each parse file"""
    if not parse_paths:
        raise ValueError("at least one parse file is required")

    examples = load_dataset(dataset_path)
    parse_lists = [read_conllu_file(path) for path in parse_paths]

    ids = [parses[0].parser_id for parses in parse_lists if parses]
    if len(set(ids)) != len(ids):
        raise ValueError(f"parser ids must be distinct, got {ids}")

    aligned = align_corpus(examples, parse_lists)
    logger.info(f"📂 Loaded {len(aligned)} examples with parsers {ids}")
    return aligned


def _write_json(path: str, data: Any):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
    logger.info(f"💾 Wrote {path}")


def _json_keys(mapping: Dict) -> Dict[str, Any]:
    return {str(k): v for k, v in mapping.items()}


def _read_predictions(path: str, n_examples: int) -> Tuple[List[int], List[int]]:
    """indices and predicted class ids from an eval predictions file"""
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise DataError(f"{path}: invalid JSON: {e}") from e

    if not isinstance(data, dict) or not isinstance(data.get('predictions'), list):
        raise DataError(f"{path}: expected an object with a 'predictions' list")
    preds = data['predictions']
    indices = data.get('indices', list(range(len(preds))))

    def is_int(value) -> bool:
        return isinstance(value, int) and not isinstance(value, bool)

    if not isinstance(indices, list) or not all(is_int(i) for i in indices):
        raise DataError(f"{path}: 'indices' must be a list of integers")
    if len(indices) != len(preds):
        raise DataError(f"{path}: indices and predictions differ in length")
    if any(not 0 <= i < n_examples for i in indices):
        raise DataError(f"{path}: prediction index outside the dataset")
    if any(not is_int(p) or not 0 <= p < NUM_CLASSES for p in preds):
        raise DataError(f"{path}: predictions must be class ids in [0, {NUM_CLASSES})")
    return indices, preds


class GraphMergePipeline:
    """Complete GraphMerge pipeline"""

    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()
        self.monitor = TrainingMonitor(self.config.output.metrics)

        logger.info("✅ GraphMergePipeline initialized")

    def load(self) -> List[AlignedParseSet]:
        return load_corpus(self.config.data.dataset, self.config.data.parses)

    def merge(
        self,
        aligned: Sequence[AlignedParseSet],
        mode: str = 'merge',
        dot_dir: Optional[str] = None,
        gold_path: Optional[str] = None,
    ) -> Dict[str, Any]:
        """Per-sentence graph statistics, optional DOT files and gold-edge recall"""
        logger.info(f"🧮 Building {mode} graphs for {len(aligned)} sentences")

        graphs = [graph_for_mode(item.parses, mode) for item in aligned]
        sentences = []
        for k, (item, g) in enumerate(zip(aligned, graphs)):
            stats = graph_stats(g)
            stats['index'] = k
            sentences.append(stats)
            if dot_dir:
                write_dot(str(Path(dot_dir) / f"sentence{k:05d}.dot"), g, item.example.tokens, name=f"S{k}")

        report: Dict[str, Any] = {
            'mode': mode,
            'sentences': sentences,
            'summary': summarize_stats(sentences),
        }

        if gold_path:
            golds = read_conllu_file(gold_path)
            if len(golds) != len(aligned):
                raise ValueError(f"{gold_path}: {len(golds)} gold trees for {len(aligned)} examples")

            recall = {mode: corpus_edge_recall(graphs, golds)}
            for parser_id in aligned[0].parser_ids if aligned else []:
                single = f"single:{parser_id}"
                recall[single] = corpus_edge_recall([graph_for_mode(a.parses, single) for a in aligned], golds)
            report['gold_edge_recall'] = recall
            logger.info(f"📊 Gold edge recall: {recall}")

        logger.info(f"📊 Summary: {report['summary']}")
        return report

    def train(self, aligned: Optional[Sequence[AlignedParseSet]] = None):
        """Train from the configuration and write the checkpoint"""
        logger.info("🏗️  TRAINING GRAPHMERGE MODEL")
        logger.info("=" * 70)
        start_time = time.time()

        aligned = aligned if aligned is not None else self.load()
        cfg = self.config.train
        params, history = train(cfg, aligned, self.config.data.embeddings_path, self.monitor)

        summary = self.monitor.summarize()
        metadata = {
            'seed': cfg.seed,
            'dev_fraction': cfg.dev_fraction,
            'dataset': self.config.data.dataset,
            'parser_ids': aligned[0].parser_ids,
            'graph_mode': cfg.graph_mode,
            'best_epoch': summary.get('best_epoch'),
            'best_dev_acc': summary.get('best_dev_acc'),
        }
        save_checkpoint(self.config.output.checkpoint, params, metadata)

        logger.info("=" * 70)
        logger.info(f"✅ TRAINING DONE in {time.time() - start_time:.2f} seconds")
        logger.info(f"📊 Parameters: {params.parameter_count()}")
        logger.info("=" * 70)
        return params, history

    def evaluate(
        self,
        checkpoints: Sequence[str],
        aligned: Sequence[AlignedParseSet],
        split: str = 'all',
        ars: bool = False,
        predictions_path: Optional[str] = None,
    ) -> Dict[str, Any]:
        """Metrics report for one checkpoint, or a majority vote over several"""
        if not checkpoints:
            raise ValueError("at least one checkpoint is required")
        if split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}")

        models = [load_checkpoint(path, self.config.data.embeddings_path) for path in checkpoints]
        indices = self._split_indices(len(aligned), split, models[0][1])
        items = [aligned[i] for i in indices]
        if not items:
            raise ValueError(f"split '{split}' is empty")

        pred_lists, prob_lists = [], []
        for path, (params, _) in zip(checkpoints, models):
            logger.info(f"🔍 Predicting with {path} ({params.spec.architecture}, {params.spec.graph_mode})")
            preds, probs = predict(params, prepare(items, params.spec), self.config.train.show_progress)
            pred_lists.append(preds)
            prob_lists.append(probs)

        if len(models) > 1:
            preds = label_ensemble(pred_lists, prob_lists)
            probs = np.mean(np.asarray(prob_lists), axis=0).tolist()
        else:
            preds, probs = pred_lists[0], prob_lists[0]

        golds = [item.example.label for item in items]
        report = classification_report(preds, golds)
        report['split'] = split
        report['checkpoints'] = list(checkpoints)

        if ars:
            correct = [p == g for p, g in zip(preds, golds)]
            units = group_correctness(
                [item.example.group_id for item in items],
                [item.example.is_source for item in items],
                correct,
            )
            report['ars'] = {'ars': ars_score(units), 'units': len(units)}

        if predictions_path:
            _write_json(predictions_path, {
                'indices': indices,
                'predictions': preds,
                'golds': golds,
                'probabilities': probs,
            })

        logger.info(f"📈 accuracy={report['accuracy']:.4f} macro_f1={report['macro_f1']:.4f} n={report['n']}")
        return report

    @staticmethod
    def _split_indices(n: int, split: str, metadata: Dict[str, Any]) -> List[int]:
        if split == 'all':
            return list(range(n))
        if 'seed' not in metadata or 'dev_fraction' not in metadata:
            raise ValueError("checkpoint metadata lacks seed/dev_fraction; use --split all")
        train_idx, dev_idx = split_indices(n, metadata['dev_fraction'], metadata['seed'])
        return dev_idx if split == 'dev' else train_idx

    def analyze_hops(
        self,
        aligned: Sequence[AlignedParseSet],
        mode: str,
        predictions_path: Optional[str] = None,
        skip_unannotated: bool = False,
    ) -> Dict[str, Any]:
        """Aspect-to-opinion hop histogram, plus per-bucket accuracy given predictions"""
        annotated = [k for k, item in enumerate(aligned) if item.example.opinion_indices]
        if skip_unannotated:
            kept = annotated
            logger.info(f"⏭️  Skipping {len(aligned) - len(kept)} examples without opinion annotations")
        else:
            kept = list(range(len(aligned)))

        graphs = {k: graph_for_mode(aligned[k].parses, mode) for k in tqdm(
            kept, desc="Building graphs", disable=not self.config.train.show_progress
        )}
        pairs = {k: (aligned[k].example, graphs[k]) for k in kept}
        report: Dict[str, Any] = {
            'mode': mode,
            'coverage': {'annotated': len(annotated), 'total': len(aligned)},
            'histogram': _json_keys(hop_histogram([pairs[k] for k in kept])),
        }

        if predictions_path:
            indices, preds = _read_predictions(predictions_path, len(aligned))
            scored = [(i, pred) for i, pred in zip(indices, preds) if i in pairs]
            hops = [example_hops(*pairs[i]) for i, _ in scored]
            correct = [pred == aligned[i].example.label for i, pred in scored]
            report['hop_accuracy'] = _json_keys(hop_bucket_accuracy(hops, correct))

        logger.info(f"📊 Hop histogram ({mode}): {report['histogram']}")
        return report

    def write_report(self, path: str, report: Dict[str, Any]):
        _write_json(path, report)
