"""
Parse and dataset ingestion module
"""

from .conllu_reader import DepParse, parse_conllu, read_conllu_file, to_conllu, write_conllu_file, check_tree, head_digraph
from .dataset_loader import LabeledExample, LABELS, NUM_CLASSES, load_dataset, write_dataset, parse_example
from .aligner import AlignedParseSet, align, align_corpus

__all__ = [
    'DepParse',
    'parse_conllu',
    'read_conllu_file',
    'to_conllu',
    'write_conllu_file',
    'check_tree',
    'head_digraph',
    'LabeledExample',
    'LABELS',
    'NUM_CLASSES',
    'load_dataset',
    'write_dataset',
    'parse_example',
    'AlignedParseSet',
    'align',
    'align_corpus',
]
