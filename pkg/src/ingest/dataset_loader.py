# src/ingest/dataset_loader.py
"""
Loads labeled aspect examples from JSONL files
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple
import logging

from src.errors import DatasetError

logger = logging.getLogger(__name__)

LABELS = ('positive', 'neutral', 'negative')
LABEL_TO_INDEX = {label: i for i, label in enumerate(LABELS)}
NUM_CLASSES = len(LABELS)


@dataclass(frozen=True)
class LabeledExample:
    """One (sentence, aspect term) pair; spans are 1-based"""

    tokens: Tuple[str, ...]
    aspect_start: int
    aspect_len: int
    label: int
    opinion_spans: Optional[Tuple[Tuple[int, ...], ...]] = None
    group_id: Optional[str] = None
    is_source: Optional[bool] = None

    @property
    def n(self) -> int:
        return len(self.tokens)

    @property
    def aspect_indices(self) -> List[int]:
        """0-based node indices of the aspect term"""
        return list(range(self.aspect_start - 1, self.aspect_start - 1 + self.aspect_len))

    @property
    def opinion_indices(self) -> Set[int]:
        """0-based union of all opinion spans"""
        if not self.opinion_spans:
            return set()
        return {i - 1 for span in self.opinion_spans for i in span}

    @property
    def label_name(self) -> str:
        return LABELS[self.label]

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'tokens': list(self.tokens),
            'aspect_start': self.aspect_start,
            'aspect_len': self.aspect_len,
            'label': self.label_name,
        }
        if self.opinion_spans is not None:
            data['opinion_spans'] = [list(span) for span in self.opinion_spans]
        if self.group_id is not None:
            data['group_id'] = self.group_id
        if self.is_source is not None:
            data['is_source'] = self.is_source
        return data


def parse_example(data: Any, line_number: int | None = None, source: str | None = None) -> LabeledExample:
    """Validate one decoded JSON object"""

    def fail(message: str):
        raise DatasetError(message, line_number, source)

    if not isinstance(data, dict):
        fail("expected a JSON object")

    tokens = data.get('tokens')
    if not isinstance(tokens, list) or not tokens:
        fail("'tokens' must be a non-empty array")
    if not all(isinstance(t, str) for t in tokens):
        fail("'tokens' must contain only strings")
    n = len(tokens)

    for key in ('aspect_start', 'aspect_len', 'label'):
        if key not in data:
            fail(f"missing key '{key}'")

    start, length = data['aspect_start'], data['aspect_len']
    if not isinstance(start, int) or isinstance(start, bool) or not isinstance(length, int) or isinstance(length, bool):
        fail("'aspect_start' and 'aspect_len' must be integers")
    if start < 1 or length < 1:
        fail(f"aspect span ({start}, {length}) must have start >= 1 and length >= 1")
    if start + length - 1 > n:
        fail(f"aspect span ({start}, {length}) exceeds sentence length {n}")

    label = data['label']
    if label not in LABEL_TO_INDEX:
        fail(f"unknown label '{label}', expected one of {list(LABELS)}")

    spans = data.get('opinion_spans')
    opinion_spans = None
    if spans is not None:
        if not isinstance(spans, list) or not all(isinstance(s, list) for s in spans):
            fail("'opinion_spans' must be an array of arrays of integers")
        for span in spans:
            for i in span:
                if not isinstance(i, int) or isinstance(i, bool) or not 1 <= i <= n:
                    fail(f"opinion index {i} outside [1, {n}]")
        opinion_spans = tuple(tuple(span) for span in spans)

    group_id = data.get('group_id')
    if group_id is not None:
        group_id = str(group_id)

    is_source = data.get('is_source')
    if is_source is not None and not isinstance(is_source, bool):
        fail("'is_source' must be a boolean")

    return LabeledExample(
        tokens=tuple(tokens),
        aspect_start=start,
        aspect_len=length,
        label=LABEL_TO_INDEX[label],
        opinion_spans=opinion_spans,
        group_id=group_id,
        is_source=is_source,
    )


def load_dataset(path: str) -> List[LabeledExample]:
    """Load and validate a JSONL dataset"""
    logger.info(f"📂 Loading dataset from: {path}")

    examples = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"invalid JSON ({e.msg})", line_number, str(path)) from None
            examples.append(parse_example(data, line_number, str(path)))

    if not examples:
        raise DatasetError("dataset is empty", None, str(path))

    counts = {name: 0 for name in LABELS}
    for example in examples:
        counts[example.label_name] += 1
    logger.info(f"✅ Loaded {len(examples)} examples {counts}")

    return examples


def write_dataset(path: str, examples: Sequence[LabeledExample]):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for example in examples:
            f.write(json.dumps(example.to_json(), ensure_ascii=False) + '\n')
