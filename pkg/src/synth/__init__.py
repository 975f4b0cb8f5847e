"""
Synthetic benchmark module
"""

from .generator import gen_dataset, corrupt_parse, corrupt_corpus, write_corpus, GOLD_PARSER_ID

__all__ = [
    'gen_dataset',
    'corrupt_parse',
    'corrupt_corpus',
    'write_corpus',
    'GOLD_PARSER_ID',
]
