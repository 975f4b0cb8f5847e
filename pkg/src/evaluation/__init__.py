"""
Evaluation metrics module
"""

from .metrics import (
    accuracy,
    macro_f1,
    classification_report,
    label_ensemble,
    ars_score,
    group_correctness,
    hop_bucket_accuracy,
)

__all__ = [
    'accuracy',
    'macro_f1',
    'classification_report',
    'label_ensemble',
    'ars_score',
    'group_correctness',
    'hop_bucket_accuracy',
]
