# src/synth/generator.py
"""
Synthetic aspect-sentiment corpora with gold trees and noisy parser copies

Each sentence has one aspect token whose direct dependent is a polarity
token deciding the label, plus distractor polarity tokens of conflicting
classes three hops away, so bag-of-words features cannot separate labels.
"""
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
import logging

import networkx as nx
import numpy as np
from tqdm import tqdm

from src.ingest.conllu_reader import DepParse, check_tree, head_digraph, write_conllu_file
from src.ingest.dataset_loader import LabeledExample, NUM_CLASSES, write_dataset

logger = logging.getLogger(__name__)

POLARITY_PREFIXES = ('pos', 'neu', 'neg')
GOLD_PARSER_ID = 'gold'

Seed = Union[int, np.random.Generator, None]


def _rng(seed: Seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _sentence(
    rng: np.random.Generator,
    length: int,
    n_distractors: int,
    filler_vocab: int,
    aspect_vocab: int,
    polarity_vocab: int,
) -> Tuple[LabeledExample, DepParse]:
    # abstract nodes: 0 aspect (root), 1 polarity, then the distractor chain, then fillers
    label = int(rng.integers(NUM_CLASSES))
    words = [f"asp{rng.integers(aspect_vocab)}", f"{POLARITY_PREFIXES[label]}{rng.integers(polarity_vocab)}"]
    parents = [-1, 0]

    if n_distractors > 0:
        words += [f"w{rng.integers(filler_vocab)}", f"w{rng.integers(filler_vocab)}"]
        parents += [0, 2]
        others = [c for c in range(NUM_CLASSES) if c != label]
        for _ in range(n_distractors):
            cls = others[int(rng.integers(len(others)))]
            words.append(f"{POLARITY_PREFIXES[cls]}{rng.integers(polarity_vocab)}")
            parents.append(3)

    while len(words) < length:
        parents.append(int(rng.integers(len(words))))
        words.append(f"w{rng.integers(filler_vocab)}")

    n = len(words)
    position = rng.permutation(n)
    tokens: List[str] = [''] * n
    heads: List[int] = [0] * n
    for node, (word, parent) in enumerate(zip(words, parents)):
        tokens[position[node]] = word
        heads[position[node]] = int(position[parent]) + 1 if parent >= 0 else 0

    gold = DepParse(GOLD_PARSER_ID, tuple(tokens), tuple(heads))
    example = LabeledExample(
        tokens=tuple(tokens),
        aspect_start=int(position[0]) + 1,
        aspect_len=1,
        label=label,
        opinion_spans=((int(position[1]) + 1,),),
    )
    return example, gold


def gen_dataset(
    n_examples: int,
    length_range: Tuple[int, int] = (6, 12),
    seed: Seed = 0,
    n_distractors: int = 1,
    filler_vocab: int = 50,
    aspect_vocab: int = 10,
    polarity_vocab: int = 5,
) -> Tuple[List[LabeledExample], List[DepParse]]:
    """Examples and their gold trees; the polarity token is always 1 hop from the aspect"""
    lo, hi = length_range
    if lo > hi or lo < 2:
        raise ValueError(f"invalid sentence length range {length_range}")

    rng = _rng(seed)
    minimum = 2 + (2 + n_distractors if n_distractors > 0 else 0)

    examples, golds = [], []
    for _ in range(n_examples):
        length = max(minimum, int(rng.integers(lo, hi + 1)))
        example, gold = _sentence(rng, length, n_distractors, filler_vocab, aspect_vocab, polarity_vocab)
        examples.append(example)
        golds.append(gold)
    return examples, golds


def corrupt_parse(gold: DepParse, rewire_prob: float, seed: Seed = None, parser_id: Optional[str] = None) -> DepParse:
    """Independently move each non-root token to a different head that keeps a tree"""
    if not 0.0 <= rewire_prob <= 1.0:
        raise ValueError(f"rewire_prob must lie in [0, 1], got {rewire_prob}")

    rng = _rng(seed)
    heads = list(gold.heads)

    for token in range(1, gold.n + 1):
        if heads[token - 1] == 0:
            continue
        if rng.random() >= rewire_prob:
            continue
        blocked = nx.descendants(head_digraph(heads), token) | {token, heads[token - 1]}
        candidates = [h for h in range(1, gold.n + 1) if h not in blocked]
        if candidates:
            heads[token - 1] = candidates[int(rng.integers(len(candidates)))]

    check_tree(heads, parser_id=parser_id or gold.parser_id)
    return DepParse(parser_id or gold.parser_id, gold.tokens, tuple(heads))


def corrupt_corpus(golds: Sequence[DepParse], rewire_prob: float, parsers: int, seed: int) -> List[List[DepParse]]:
    """One independently corrupted copy of the corpus per simulated parser"""
    channels = []
    for k in range(parsers):
        rng = np.random.default_rng([seed, k + 1])
        parser_id = f"parser{k}"
        channels.append([corrupt_parse(g, rewire_prob, rng, parser_id) for g in golds])
    return channels


def write_corpus(
    out_dir: str,
    n_examples: int = 1000,
    rewire_prob: float = 0.2,
    parsers: int = 3,
    seed: int = 0,
    length_range: Tuple[int, int] = (6, 12),
    n_distractors: int = 1,
) -> Dict[str, object]:
    """dataset.jsonl, gold.conllu and parser{k}.conllu under out_dir"""
    logger.info(f"🏗️  Generating {n_examples} synthetic examples into: {out_dir}")

    examples, golds = gen_dataset(n_examples, length_range, np.random.default_rng([seed, 0]), n_distractors)
    channels = corrupt_corpus(golds, rewire_prob, parsers, seed)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_dataset(str(out / 'dataset.jsonl'), examples)
    write_conllu_file(str(out / 'gold.conllu'), golds)

    parse_files = []
    for k, channel in enumerate(tqdm(channels, desc="Writing parser files", disable=parsers < 10)):
        path = out / f"parser{k}.conllu"
        write_conllu_file(str(path), channel)
        parse_files.append(str(path))

    logger.info(f"✅ Wrote {n_examples} examples and {parsers} parser files")
    return {
        'dataset': str(out / 'dataset.jsonl'),
        'gold': str(out / 'gold.conllu'),
        'parses': parse_files,
        'examples': examples,
        'golds': golds,
        'channels': channels,
    }
