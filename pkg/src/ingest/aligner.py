# src/ingest/aligner.py
"""
Checks that every parser saw the dataset's exact tokenization
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple
import logging

from src.errors import AlignmentError
from src.ingest.conllu_reader import DepParse
from src.ingest.dataset_loader import LabeledExample

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlignedParseSet:
    example: LabeledExample
    parses: Tuple[DepParse, ...]

    @property
    def parser_ids(self) -> List[str]:
        return [parse.parser_id for parse in self.parses]

    def parse_for(self, parser_id: str) -> DepParse:
        for parse in self.parses:
            if parse.parser_id == parser_id:
                return parse
        raise KeyError(parser_id)


def align(example: LabeledExample, parses: Sequence[DepParse]) -> AlignedParseSet:
    """Verify identical tokenization; comparison is exact and case-sensitive"""
    if not parses:
        raise AlignmentError("no parses supplied", parser_id="<none>")

    for parse in parses:
        if parse.n != example.n:
            raise AlignmentError(
                f"token count {parse.n} differs from example token count {example.n}",
                parser_id=parse.parser_id,
            )
        for position, (expected, actual) in enumerate(zip(example.tokens, parse.tokens), start=1):
            if expected != actual:
                raise AlignmentError(
                    f"token {position} is '{actual}', example has '{expected}'",
                    parser_id=parse.parser_id,
                    position=position,
                )

    return AlignedParseSet(example, tuple(parses))


def align_corpus(examples: Sequence[LabeledExample], parse_lists: Sequence[Sequence[DepParse]]) -> List[AlignedParseSet]:
    """Pair the k-th dataset line with the k-th sentence of every parser file"""
    for parses in parse_lists:
        parser_id = parses[0].parser_id if parses else "<empty>"
        if len(parses) != len(examples):
            raise AlignmentError(
                f"{len(parses)} sentences but the dataset has {len(examples)} examples",
                parser_id=parser_id,
            )

    aligned = []
    for k, example in enumerate(examples):
        try:
            aligned.append(align(example, [parses[k] for parses in parse_lists]))
        except AlignmentError as e:
            raise AlignmentError(f"example {k + 1}: {e.detail}", parser_id=e.parser_id, position=e.position) from None

    logger.info(f"✅ Aligned {len(aligned)} examples across {len(parse_lists)} parsers")
    return aligned
