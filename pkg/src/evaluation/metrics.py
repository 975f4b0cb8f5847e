# src/evaluation/metrics.py
"""
Classification metrics, label-ensemble voting, aspect robustness and
hop-bucket accuracy
"""
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from sklearn.metrics import accuracy_score, f1_score, precision_recall_fscore_support

from src.ingest.dataset_loader import LABELS, NUM_CLASSES
from src.graph.connectivity import HopKey, hop_key, sort_hop_keys

logger = logging.getLogger(__name__)


def _check_pair(preds: Sequence[int], golds: Sequence[int]):
    if len(preds) != len(golds):
        raise ValueError(f"{len(preds)} predictions for {len(golds)} gold labels")
    if not golds:
        raise ValueError("no examples to score")


def accuracy(preds: Sequence[int], golds: Sequence[int]) -> float:
    _check_pair(preds, golds)
    return float(accuracy_score(list(golds), list(preds)))


def macro_f1(preds: Sequence[int], golds: Sequence[int], num_classes: int = NUM_CLASSES) -> float:
    """Mean F1 over classes seen in golds or preds; unseen classes are skipped"""
    _check_pair(preds, golds)
    present = sorted(c for c in set(golds) | set(preds) if 0 <= c < num_classes)
    return float(f1_score(list(golds), list(preds), labels=present, average='macro', zero_division=0))


def classification_report(preds: Sequence[int], golds: Sequence[int], num_classes: int = NUM_CLASSES) -> Dict[str, object]:
    """Documented report keys: accuracy, macro_f1, per_class, n"""
    _check_pair(preds, golds)
    precision, recall, f1, _ = precision_recall_fscore_support(
        list(golds), list(preds), labels=list(range(num_classes)), zero_division=0
    )
    names = LABELS if num_classes == len(LABELS) else [str(c) for c in range(num_classes)]
    return {
        'accuracy': accuracy(preds, golds),
        'macro_f1': macro_f1(preds, golds, num_classes),
        'per_class': {
            name: {'precision': float(p), 'recall': float(r), 'f1': float(f)}
            for name, p, r, f in zip(names, precision, recall, f1)
        },
        'n': len(golds),
    }


def label_ensemble(pred_lists: Sequence[Sequence[int]], prob_lists: Sequence[Sequence[Sequence[float]]]) -> List[int]:
    """Plurality vote; ties go to the highest summed probability, then the lowest class"""
    if not pred_lists:
        raise ValueError("label_ensemble needs at least one prediction list")
    if len(prob_lists) != len(pred_lists):
        raise ValueError("one probability list per prediction list is required")

    length = len(pred_lists[0])
    if any(len(p) != length for p in pred_lists) or any(len(p) != length for p in prob_lists):
        raise ValueError("prediction and probability lists must have equal lengths")

    votes = np.asarray(pred_lists, dtype=np.int64)            # [M, N]
    probs = np.asarray(prob_lists, dtype=np.float64)          # [M, N, C]
    num_classes = probs.shape[2] if probs.ndim == 3 else int(votes.max()) + 1
    prob_sums = probs.sum(axis=0) if probs.ndim == 3 else np.zeros((length, num_classes))

    ensembled = []
    for i in range(length):
        counts = np.bincount(votes[:, i], minlength=num_classes)
        tied = np.flatnonzero(counts == counts.max())
        # argmax returns the first (lowest) index among equal sums
        best = tied[np.argmax(prob_sums[i, tied])]
        ensembled.append(int(best))
    return ensembled


def ars_score(groups: Sequence[Tuple[bool, Sequence[bool]]]) -> float:
    """Share of units whose source and every variant are correct"""
    if not groups:
        raise ValueError("no groups to score")
    correct = sum(1 for source, variants in groups if source and all(variants))
    return correct / len(groups)


def group_correctness(
    group_ids: Sequence[Optional[str]],
    is_source: Sequence[Optional[bool]],
    correct: Sequence[bool],
) -> List[Tuple[bool, List[bool]]]:
    """Collect (source, variants) units; the first line of an unmarked group is its source"""
    order: List[str] = []
    members: Dict[str, List[int]] = {}
    for i, gid in enumerate(group_ids):
        key = gid if gid is not None else f"__line{i}"
        if key not in members:
            members[key] = []
            order.append(key)
        members[key].append(i)

    units = []
    for key in order:
        indices = members[key]
        marked = [i for i in indices if is_source[i]]
        source = marked[0] if marked else indices[0]
        units.append((bool(correct[source]), [bool(correct[i]) for i in indices if i != source]))
    return units


def hop_bucket_accuracy(hops: Sequence[Optional[int]], correct: Sequence[bool]) -> Dict[HopKey, float]:
    """Accuracy per hop distance; empty buckets are omitted"""
    if len(hops) != len(correct):
        raise ValueError(f"{len(hops)} hop values for {len(correct)} correctness flags")

    totals: Dict[HopKey, int] = {}
    hits: Dict[HopKey, int] = {}
    for h, ok in zip(hops, correct):
        key = hop_key(h)
        totals[key] = totals.get(key, 0) + 1
        hits[key] = hits.get(key, 0) + int(bool(ok))

    return sort_hop_keys({key: hits[key] / totals[key] for key in totals})
