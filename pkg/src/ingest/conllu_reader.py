# src/ingest/conllu_reader.py
"""
Reads and writes one parser's CoNLL-U output
"""
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Set, Tuple
import io
import logging

import conllu
import networkx as nx
from conllu.exceptions import ParseException
from conllu.models import Token, TokenList

from src.errors import ConlluFormatError, TreeStructureError

logger = logging.getLogger(__name__)

MIN_COLUMNS = 8
FIELDS = ('id', 'form', 'lemma', 'upos', 'xpos', 'feats', 'head', 'deprel', 'deps', 'misc')

# Keep every column as raw text; IDs and heads are validated below with line numbers.
FIELD_PARSERS = {field: (lambda line, i: line[i]) for field in FIELDS}


@dataclass(frozen=True)
class DepParse:
    """One parser's head-index tree; tokens and heads are 1-indexed by position + 1"""

    parser_id: str
    tokens: Tuple[str, ...]
    heads: Tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.tokens)

    @property
    def root(self) -> int:
        return self.heads.index(0) + 1

    def head_edges(self) -> Set[Tuple[int, int]]:
        """(head, dependent) pairs, 1-based, root excluded"""
        return {
            (head, dep)
            for dep, head in enumerate(self.heads, start=1)
            if head != 0
        }

    def relabel(self, perm: Sequence[int]) -> 'DepParse':
        """Moves token i (0-based) to position perm[i]"""
        tokens = [''] * self.n
        heads = [0] * self.n
        for i, (token, head) in enumerate(zip(self.tokens, self.heads)):
            tokens[perm[i]] = token
            heads[perm[i]] = perm[head - 1] + 1 if head else 0
        return DepParse(self.parser_id, tuple(tokens), tuple(heads))


def head_digraph(heads: Sequence[int]) -> nx.DiGraph:
    """Directed head -> dependent graph with node 0 as the artificial root"""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(heads) + 1))
    graph.add_edges_from((head, dep) for dep, head in enumerate(heads, start=1))
    return graph


def check_tree(heads: Sequence[int], sentence_index: int | None = None, parser_id: str | None = None):
    """Raises TreeStructureError unless heads form a single rooted tree"""
    n = len(heads)
    if n == 0:
        raise TreeStructureError("empty sentence", sentence_index, parser_id)

    for dep, head in enumerate(heads, start=1):
        if not 0 <= head <= n:
            raise TreeStructureError(f"head {head} of token {dep} out of range [0, {n}]", sentence_index, parser_id)
        if head == dep:
            raise TreeStructureError(f"token {dep} is its own head", sentence_index, parser_id)

    roots = [dep for dep, head in enumerate(heads, start=1) if head == 0]
    if len(roots) != 1:
        raise TreeStructureError(f"expected exactly one root, found {len(roots)}", sentence_index, parser_id)

    graph = head_digraph(heads)
    if not nx.is_arborescence(graph):
        missing = sorted(set(range(1, n + 1)) - nx.descendants(graph, 0))
        raise TreeStructureError(f"cycle: tokens {missing} unreachable from root", sentence_index, parser_id)


def _token_lines(text: str, source: str | None) -> Tuple[str, List[int]]:
    """Normalized text for the conllu parser plus the line number of every token line"""
    lines = text.splitlines()
    token_lines = []
    for line_number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        columns = line.split('\t')
        if len(columns) < MIN_COLUMNS:
            raise ConlluFormatError(
                f"expected at least {MIN_COLUMNS} tab-separated columns, got {len(columns)}",
                line_number, source
            )
        token_lines.append(line_number)
    normalized = '\n'.join(line if line.strip() else '' for line in lines) + '\n'
    return normalized, token_lines


def parse_conllu(text: str, parser_id: str, source: str | None = None) -> List[DepParse]:
    """Parse CoNLL-U text into one DepParse per sentence"""
    normalized, token_lines = _token_lines(text, source)

    located = iter(token_lines)
    parses = []
    sentence_index = 0

    try:
        sentences = list(conllu.parse_incr(io.StringIO(normalized), fields=FIELDS, field_parsers=FIELD_PARSERS))
    except ParseException as e:
        raise ConlluFormatError(str(e), None, source) from None

    for sentence in sentences:
        tokens: List[str] = []
        heads: List[int] = []

        for token in sentence:
            line_number = next(located)
            token_id = token['id']
            # multiword ranges and empty nodes
            if '-' in token_id or '.' in token_id:
                continue

            try:
                index = int(token_id)
            except ValueError:
                raise ConlluFormatError(f"non-integer ID '{token_id}'", line_number, source) from None
            if index != len(tokens) + 1:
                raise ConlluFormatError(f"expected ID {len(tokens) + 1}, got {index}", line_number, source)

            try:
                head = int(token['head'])
            except ValueError:
                raise ConlluFormatError(f"non-integer HEAD '{token['head']}'", line_number, source) from None

            tokens.append(token['form'])
            heads.append(head)

        if not tokens:
            continue

        sentence_index += 1
        check_tree(heads, sentence_index, parser_id)
        parses.append(DepParse(parser_id, tuple(tokens), tuple(heads)))

    return parses


def read_conllu_file(path: str, parser_id: str | None = None) -> List[DepParse]:
    """Read a CoNLL-U file; parser_id defaults to the file stem"""
    parser_id = parser_id or Path(path).stem
    logger.info(f"📂 Reading parses of '{parser_id}' from: {path}")

    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()

    parses = parse_conllu(text, parser_id, source=str(path))
    logger.info(f"✅ Loaded {len(parses)} sentences from '{parser_id}'")
    return parses


def to_token_list(parse: DepParse) -> TokenList:
    """ID, FORM and HEAD filled, '_' elsewhere"""
    tokens = []
    for i, (form, head) in enumerate(zip(parse.tokens, parse.heads), start=1):
        token = Token({field: '_' for field in FIELDS})
        token.update(id=i, form=form, head=head)
        tokens.append(token)
    return TokenList(tokens)


def to_conllu(parses: Sequence[DepParse]) -> str:
    return ''.join(to_token_list(parse).serialize() for parse in parses)


def write_conllu_file(path: str, parses: Sequence[DepParse]):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(to_conllu(parses))
