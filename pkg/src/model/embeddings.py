# src/model/embeddings.py
"""
Input features for the graph layers: file-loaded vectors or a trainable
lookup table, plus trainable position embeddings
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence
import logging

import numpy as np
from tqdm import tqdm

from src.errors import DataError, EmbeddingLookupError

logger = logging.getLogger(__name__)

UNK = '<unk>'
EMBEDDING_TABLE = 'embedding.table'
POSITION_TABLE = 'position.table'


def load_embedding_file(path: str) -> Dict[str, np.ndarray]:
    """Read 'count dim' header then 'token v1 ... vdim' lines"""
    logger.info(f"📊 Loading embedding vectors from: {path}")

    vectors: Dict[str, np.ndarray] = {}
    with open(path, 'r', encoding='utf-8') as f:
        header = f.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}:1: expected header 'count dim'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise DataError(f"{path}:1: header values must be integers") from None

        for line_number, line in enumerate(tqdm(f, total=count, desc="Loading vectors", disable=count < 10000), start=2):
            parts = line.split()
            if not line.strip():
                continue
            if len(parts) != dim + 1:
                raise DataError(f"{path}:{line_number}: expected token and {dim} values, got {len(parts) - 1}")
            try:
                vectors[parts[0]] = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError:
                raise DataError(f"{path}:{line_number}: non-numeric vector value") from None

    if len(vectors) != count:
        raise DataError(f"{path}: header announces {count} vectors, found {len(vectors)}")

    logger.info(f"✅ Loaded {len(vectors)} vectors (dimension: {dim})")
    return vectors


@dataclass
class EmbeddingProvider:
    """Resolves tokens to d_B-dimensional rows"""

    mode: str
    dim: int
    vocabulary: List[str] = field(default_factory=list)
    vectors: Dict[str, np.ndarray] = field(default_factory=dict)
    source_path: Optional[str] = None

    def __post_init__(self):
        self._index = {token: i for i, token in enumerate(self.vocabulary)}

    @classmethod
    def trainable(cls, tokens: Iterable[str], dim: int) -> 'EmbeddingProvider':
        """Vocabulary sorted for determinism, row 0 reserved for unknown tokens"""
        vocabulary = [UNK] + sorted(set(tokens) - {UNK})
        return cls(mode='trainable', dim=dim, vocabulary=vocabulary)

    @classmethod
    def from_file(cls, path: str) -> 'EmbeddingProvider':
        vectors = load_embedding_file(path)
        if not vectors:
            raise DataError(f"{path}: no vectors")
        dim = len(next(iter(vectors.values())))
        return cls(mode='file', dim=dim, vectors=vectors, source_path=path)

    @property
    def is_trainable(self) -> bool:
        return self.mode == 'trainable'

    def token_ids(self, tokens: Sequence[str]) -> np.ndarray:
        """Table rows in trainable mode; unknown tokens map to row 0"""
        return np.array([self._index.get(token, 0) for token in tokens], dtype=np.int64)

    def lookup(self, tokens: Sequence[str]) -> np.ndarray:
        """Fixed vectors in file mode; falls back to '<unk>' only if the file has it"""
        rows = []
        for position, token in enumerate(tokens, start=1):
            vector = self.vectors.get(token)
            if vector is None:
                vector = self.vectors.get(UNK)
            if vector is None:
                raise EmbeddingLookupError(f"token {position} '{token}' has no vector in {self.source_path}")
            rows.append(vector)
        return np.stack(rows)

    def init_arrays(self, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        if not self.is_trainable:
            return {}
        limit = np.sqrt(6.0 / (len(self.vocabulary) + self.dim))
        return {EMBEDDING_TABLE: rng.uniform(-limit, limit, size=(len(self.vocabulary), self.dim))}


def init_position_table(rng: np.random.Generator, max_len: int, dim: int) -> Dict[str, np.ndarray]:
    limit = np.sqrt(6.0 / (max_len + dim))
    return {POSITION_TABLE: rng.uniform(-limit, limit, size=(max_len, dim))}
