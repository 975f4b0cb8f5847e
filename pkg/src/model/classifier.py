# src/model/classifier.py
"""
End-to-end aspect sentiment classifier: input features and positions,
RGAT stack, aspect pooling and a two-layer MLP head
"""
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from src.autodiff import tensor as ad
from src.autodiff.tensor import Tape, Tensor, constants
from src.errors import DataError, GraphMismatchError, ShapeError
from src.graph.typed_graph import TypedGraph, build_tree_graph, graph_for_mode
from src.ingest.aligner import AlignedParseSet
from src.ingest.dataset_loader import LabeledExample, NUM_CLASSES
from src.model.embeddings import (
    EMBEDDING_TABLE,
    POSITION_TABLE,
    EmbeddingProvider,
    init_position_table,
)
from src.model.rgat import LayerConfig, RgatLayerParams, init_layer_arrays, stack_forward

logger = logging.getLogger(__name__)

HEAD_W1 = 'head.W1'
HEAD_W2 = 'head.W2'

GraphInput = Union[TypedGraph, Sequence[TypedGraph]]


@dataclass
class ModelSpec:
    """Everything needed to rebuild the parameter layout and graph inputs"""

    embedding_dim: int
    hidden_dim: int = 64
    heads: int = 4
    layers: int = 2
    d_out: Optional[int] = None
    dropout: float = 0.1
    use_edge_types: bool = True
    use_position: bool = True
    attention_activation: str = 'relu'
    leaky_slope: float = 0.2
    shared_attention: bool = True
    architecture: str = 'graphmerge'
    graph_mode: str = 'merge'
    parser_ids: List[str] = field(default_factory=list)
    max_len: int = 100
    num_classes: int = NUM_CLASSES

    @property
    def head_hidden(self) -> int:
        return self.d_out if self.d_out is not None else self.hidden_dim

    @property
    def num_stacks(self) -> int:
        return len(self.parser_ids) if self.architecture == 'feature_ensemble' else 1

    @property
    def pooled_dim(self) -> int:
        width = self.hidden_dim if self.layers > 0 else self.embedding_dim
        return self.num_stacks * width

    def layer_config(self) -> LayerConfig:
        return LayerConfig(
            heads=self.heads,
            out_dim=self.hidden_dim,
            activation=self.attention_activation,
            leaky_slope=self.leaky_slope,
            use_edge_types=self.use_edge_types,
            dropout=self.dropout,
            shared_attention=self.shared_attention,
        )

    def layer_in_dim(self, layer: int) -> int:
        return self.embedding_dim if layer == 0 else self.hidden_dim

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ModelParams:
    spec: ModelSpec
    arrays: Dict[str, np.ndarray]
    provider: EmbeddingProvider

    def bind(self, tape: Optional[Tape] = None) -> Dict[str, Tensor]:
        """Trainable leaves on a tape, or constants when tape is None"""
        return tape.bind(self.arrays) if tape is not None else constants(self.arrays)

    def copy(self) -> 'ModelParams':
        return ModelParams(
            self.spec,
            {name: value.copy() for name, value in self.arrays.items()},
            self.provider,
        )

    def parameter_count(self) -> int:
        return int(sum(value.size for value in self.arrays.values()))

    def stack_layers(self, weights: Dict[str, Tensor], stack: int = 0) -> List[Tuple[RgatLayerParams, LayerConfig]]:
        cfg = self.spec.layer_config()
        return [
            (RgatLayerParams.from_weights(weights, f"stack{stack}.layer{l}", cfg), cfg)
            for l in range(self.spec.layers)
        ]


def init_model(spec: ModelSpec, provider: EmbeddingProvider, seed: int) -> ModelParams:
    """Glorot-uniform initialization in a fixed order from one seed"""
    if provider.dim != spec.embedding_dim:
        raise ShapeError(f"provider dimension {provider.dim} differs from spec {spec.embedding_dim}")

    rng = np.random.default_rng(seed)
    arrays: Dict[str, np.ndarray] = {}
    arrays.update(provider.init_arrays(rng))
    if spec.use_position:
        arrays.update(init_position_table(rng, spec.max_len, spec.embedding_dim))

    cfg = spec.layer_config()
    for stack in range(spec.num_stacks):
        for l in range(spec.layers):
            arrays.update(init_layer_arrays(rng, f"stack{stack}.layer{l}", spec.layer_in_dim(l), cfg))

    d_out = spec.head_hidden
    limit1 = np.sqrt(6.0 / (d_out + spec.pooled_dim))
    limit2 = np.sqrt(6.0 / (spec.num_classes + d_out))
    arrays[HEAD_W1] = rng.uniform(-limit1, limit1, size=(d_out, spec.pooled_dim))
    arrays[HEAD_W2] = rng.uniform(-limit2, limit2, size=(spec.num_classes, d_out))

    params = ModelParams(spec, arrays, provider)
    logger.info(f"🧮 Initialized {spec.architecture} model with {params.parameter_count()} parameters")
    return params


def embed(
    example: LabeledExample,
    provider: EmbeddingProvider,
    weights: Dict[str, Tensor],
    spec: ModelSpec,
    train_flag: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """X'[i] = provider(token_i) + positions[i]"""
    n = example.n
    if n > spec.max_len:
        raise DataError(f"sentence of {n} tokens exceeds max_len {spec.max_len}")

    if provider.is_trainable:
        X = ad.gather_rows(weights[EMBEDDING_TABLE], provider.token_ids(example.tokens))
    else:
        X = ad.constant(provider.lookup(example.tokens))

    if spec.use_position:
        X = ad.add(X, ad.gather_rows(weights[POSITION_TABLE], np.arange(n)))

    return ad.dropout(X, spec.dropout, rng, train_flag)


def aspect_pool(H: Tensor, aspect_start: int, aspect_len: int) -> Tensor:
    """Mean of the aspect rows (1-based span) as a [1, d] row"""
    if aspect_start < 1 or aspect_len < 1 or aspect_start + aspect_len - 1 > H.shape[0]:
        raise ShapeError(f"aspect span ({aspect_start}, {aspect_len}) outside {H.shape[0]} rows")
    rows = np.arange(aspect_start - 1, aspect_start - 1 + aspect_len)
    return ad.segment_mean(ad.gather_rows(H, rows), np.zeros(aspect_len, dtype=np.int64), 1)


def classify(h_t: Tensor, W1: Tensor, W2: Tensor) -> Tensor:
    """softmax(W2 ReLU(W1 h_t)) as a [1, C] row"""
    hidden = ad.relu(ad.matmul(h_t, ad.transpose(W1)))
    return ad.softmax(ad.matmul(hidden, ad.transpose(W2)))


def forward(
    example: LabeledExample,
    graph: GraphInput,
    params: ModelParams,
    train_flag: bool = False,
    weights: Optional[Dict[str, Tensor]] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """embed -> stack_forward -> aspect_pool -> classify"""
    if params.spec.architecture == 'feature_ensemble':
        graphs = [graph] if isinstance(graph, TypedGraph) else list(graph)
        return feature_ensemble_forward(example, graphs, params, train_flag, weights, rng)

    if not isinstance(graph, TypedGraph):
        raise GraphMismatchError("a graphmerge model takes exactly one graph")

    weights = weights if weights is not None else params.bind()
    X = embed(example, params.provider, weights, params.spec, train_flag, rng)
    H = stack_forward(X, graph, params.stack_layers(weights, 0), train_flag, rng)
    h_t = aspect_pool(H, example.aspect_start, example.aspect_len)
    return classify(h_t, weights[HEAD_W1], weights[HEAD_W2])


def feature_ensemble_forward(
    example: LabeledExample,
    graphs: Sequence[TypedGraph],
    params: ModelParams,
    train_flag: bool = False,
    weights: Optional[Dict[str, Tensor]] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """One RGAT stack per parse over shared inputs; pooled features concatenated"""
    if len(graphs) != params.spec.num_stacks:
        raise GraphMismatchError(
            f"{len(graphs)} graphs supplied for {params.spec.num_stacks} RGAT stacks"
        )

    weights = weights if weights is not None else params.bind()
    X = embed(example, params.provider, weights, params.spec, train_flag, rng)

    pooled = []
    for m, g in enumerate(graphs):
        H = stack_forward(X, g, params.stack_layers(weights, m), train_flag, rng)
        pooled.append(aspect_pool(H, example.aspect_start, example.aspect_len))

    h_t = pooled[0] if len(pooled) == 1 else ad.concat(pooled, axis=1)
    return classify(h_t, weights[HEAD_W1], weights[HEAD_W2])


def l2_penalty(weights: Dict[str, Tensor], embedding_rows: Optional[np.ndarray] = None) -> Tensor:
    """Sum of squared entries; only the listed embedding rows count"""
    terms = []
    for name in sorted(weights):
        w = weights[name]
        if name == EMBEDDING_TABLE:
            rows = np.unique(embedding_rows) if embedding_rows is not None else np.arange(w.shape[0])
            w = ad.gather_rows(w, rows)
        terms.append(ad.sum_all(ad.mul(w, w)))

    total = terms[0]
    for term in terms[1:]:
        total = ad.add(total, term)
    return total


def loss(
    probs: Tensor,
    label: int,
    weights: Dict[str, Tensor],
    l2_coeff: float = 0.0,
    embedding_rows: Optional[np.ndarray] = None,
) -> Tensor:
    """Cross entropy plus l2_coeff times the squared-weight penalty"""
    value = ad.cross_entropy(probs, label)
    if l2_coeff > 0 and weights:
        value = ad.add(value, ad.scale(l2_penalty(weights, embedding_rows), l2_coeff))
    return value


def graph_input(aligned: AlignedParseSet, spec: ModelSpec) -> GraphInput:
    """The graph (or per-parse graphs) a model of this spec consumes"""
    if spec.architecture == 'feature_ensemble':
        try:
            return [build_tree_graph(aligned.parse_for(pid)) for pid in spec.parser_ids]
        except KeyError as e:
            raise GraphMismatchError(
                f"model expects parsers {spec.parser_ids}, got {aligned.parser_ids}"
            ) from e
    return graph_for_mode(aligned.parses, spec.graph_mode)


def predict_proba(example: LabeledExample, graph: GraphInput, params: ModelParams) -> np.ndarray:
    """Class distribution with dropout off"""
    return forward(example, graph, params, train_flag=False).data.reshape(-1)
