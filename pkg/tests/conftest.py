# tests/conftest.py
"""
Shared fixtures: the two-parser toy corpus and small model specs
"""
import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.ingest.conllu_reader import DepParse, to_conllu
from src.ingest.dataset_loader import LabeledExample

TOY_TOKENS = ("food", "was", "great")
HEADS_A = (2, 0, 2)
HEADS_B = (2, 3, 0)


@pytest.fixture
def parse_a() -> DepParse:
    return DepParse("A", TOY_TOKENS, HEADS_A)


@pytest.fixture
def parse_b() -> DepParse:
    return DepParse("B", TOY_TOKENS, HEADS_B)


@pytest.fixture
def toy_example() -> LabeledExample:
    return LabeledExample(
        tokens=TOY_TOKENS,
        aspect_start=1,
        aspect_len=1,
        label=0,
        opinion_spans=((3,),),
    )


@pytest.fixture
def toy_corpus(tmp_path, parse_a, parse_b, toy_example):
    """dataset.jsonl plus A.conllu and B.conllu, one sentence each"""
    dataset = tmp_path / "dataset.jsonl"
    dataset.write_text(json.dumps(toy_example.to_json()) + "\n", encoding="utf-8")

    path_a = tmp_path / "A.conllu"
    path_b = tmp_path / "B.conllu"
    path_a.write_text(to_conllu([parse_a]), encoding="utf-8")
    path_b.write_text(to_conllu([parse_b]), encoding="utf-8")

    return {'dataset': str(dataset), 'parses': [str(path_a), str(path_b)], 'dir': tmp_path}


def random_heads(rng: np.random.Generator, n: int) -> tuple:
    """A uniformly shuffled random recursive tree"""
    order = rng.permutation(n)
    heads = [0] * n
    for k in range(1, n):
        parent = order[rng.integers(k)]
        heads[order[k]] = int(parent) + 1
    return tuple(heads)


@pytest.fixture
def tree_factory():
    return random_heads


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: trains full-size models, run with -m slow to select")
