# src/model/rgat.py
"""
Relational graph attention layer over a TypedGraph, with the plain GAT
variant obtained by switching edge types off
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from src.autodiff import tensor as ad
from src.autodiff.tensor import Tensor
from src.errors import ShapeError
from src.graph.typed_graph import NUM_EDGE_TYPES, TypedGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayerConfig:
    heads: int = 4
    out_dim: int = 64
    activation: str = 'relu'
    leaky_slope: float = 0.2
    use_edge_types: bool = True
    dropout: float = 0.0
    shared_attention: bool = True

    def __post_init__(self):
        if self.heads < 1:
            raise ValueError("heads must be >= 1")
        if self.out_dim % self.heads != 0:
            raise ValueError(f"out_dim {self.out_dim} is not divisible by heads {self.heads}")
        if self.activation not in ('relu', 'leaky_relu'):
            raise ValueError(f"unknown attention activation '{self.activation}'")
        if self.activation == 'leaky_relu' and self.leaky_slope <= 0:
            raise ValueError("leaky slope must be > 0")

    @property
    def head_dim(self) -> int:
        return self.out_dim // self.heads

    @property
    def attention_sets(self) -> int:
        return 1 if self.shared_attention else self.heads


@dataclass
class AttentionParams:
    W: Tensor                       # [2 * d_in, d_att]
    a: Tensor                       # [d_att, 1]
    a_e: Optional[Tensor] = None    # [d_e, 1]
    edge_emb: Optional[Tensor] = None  # [3, d_e]


@dataclass
class RgatLayerParams:
    W: List[Tensor]                 # K transforms, each [d_in, d_head]
    attention: List[AttentionParams]

    @property
    def in_dim(self) -> int:
        return self.W[0].shape[0]

    @classmethod
    def from_weights(cls, weights: Dict[str, Tensor], prefix: str, cfg: LayerConfig) -> 'RgatLayerParams':
        transforms = [weights[f"{prefix}.W.{k}"] for k in range(cfg.heads)]
        attention = []
        for s in range(cfg.attention_sets):
            att = f"{prefix}.att.{s}"
            attention.append(AttentionParams(
                W=weights[f"{att}.W"],
                a=weights[f"{att}.a"],
                a_e=weights.get(f"{att}.a_e") if cfg.use_edge_types else None,
                edge_emb=weights.get(f"{att}.edge_emb") if cfg.use_edge_types else None,
            ))
        return cls(transforms, attention)


def glorot(rng: np.random.Generator, shape: Tuple[int, int]) -> np.ndarray:
    limit = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-limit, limit, size=shape)


def init_layer_arrays(rng: np.random.Generator, prefix: str, in_dim: int, cfg: LayerConfig) -> Dict[str, np.ndarray]:
    """Glorot-uniform matrices; a_e starts at zero so training begins as plain GAT"""
    arrays: Dict[str, np.ndarray] = {}
    for k in range(cfg.heads):
        arrays[f"{prefix}.W.{k}"] = glorot(rng, (in_dim, cfg.head_dim))

    att_dim = edge_dim = in_dim
    for s in range(cfg.attention_sets):
        att = f"{prefix}.att.{s}"
        arrays[f"{att}.W"] = glorot(rng, (2 * in_dim, att_dim))
        arrays[f"{att}.a"] = glorot(rng, (att_dim, 1))
        if cfg.use_edge_types:
            arrays[f"{att}.a_e"] = np.zeros((edge_dim, 1))
            arrays[f"{att}.edge_emb"] = glorot(rng, (NUM_EDGE_TYPES, edge_dim))
    return arrays


def _activate(x: Tensor, cfg: LayerConfig) -> Tensor:
    if cfg.activation == 'leaky_relu':
        return ad.leaky_relu(x, cfg.leaky_slope)
    return ad.relu(x)


def _check_inputs(H: Tensor, g: TypedGraph, p: RgatLayerParams):
    if H.data.ndim != 2 or H.shape[0] != g.n:
        raise ShapeError(f"node features {H.shape} do not match a graph of {g.n} nodes")
    if H.shape[1] != p.in_dim:
        raise ShapeError(f"node features have width {H.shape[1]}, layer expects {p.in_dim}")


def attention_scores(H: Tensor, g: TypedGraph, p: RgatLayerParams, cfg: LayerConfig) -> List[Tensor]:
    """Per-edge weights alpha, one [E, 1] tensor per attention set

    Edges follow g.edge_index order; edge (i, j, t) lets node i attend to j,
    and weights are normalized over each node's outgoing edge list.
    """
    _check_inputs(H, g, p)
    src, dst, etype = g.edge_index
    assert np.all(np.bincount(src, minlength=g.n) > 0), "node with empty neighborhood"

    pair = ad.concat([ad.gather_rows(H, src), ad.gather_rows(H, dst)], axis=1)

    scores = []
    for att in p.attention:
        logits = ad.matmul(ad.matmul(pair, att.W), att.a)
        if cfg.use_edge_types and att.a_e is not None:
            typed = ad.matmul(ad.gather_rows(att.edge_emb, etype), att.a_e)
            logits = ad.add(logits, typed)
        scores.append(ad.segment_softmax(_activate(logits, cfg), src, g.n))
    return scores


def layer_forward(
    H: Tensor,
    g: TypedGraph,
    p: RgatLayerParams,
    cfg: LayerConfig,
    train_flag: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """Concatenation over heads of ReLU(sum_j alpha_ij W^k h_j)"""
    if len(p.W) != cfg.heads:
        raise ShapeError(f"layer has {len(p.W)} head transforms, config expects {cfg.heads}")

    src, dst, _ = g.edge_index
    alphas = [
        ad.dropout(alpha, cfg.dropout, rng, train_flag)
        for alpha in attention_scores(H, g, p, cfg)
    ]

    heads = []
    for k, W in enumerate(p.W):
        alpha = alphas[0] if cfg.shared_attention else alphas[k]
        messages = ad.gather_rows(ad.matmul(H, W), dst)
        aggregated = ad.segment_sum(ad.mul(alpha, messages), src, g.n)
        heads.append(ad.relu(aggregated))

    out = heads[0] if len(heads) == 1 else ad.concat(heads, axis=1)
    return ad.dropout(out, cfg.dropout, rng, train_flag)


def stack_forward(
    H: Tensor,
    g: TypedGraph,
    layers: Sequence[Tuple[RgatLayerParams, LayerConfig]],
    train_flag: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    for params, cfg in layers:
        H = layer_forward(H, g, params, cfg, train_flag, rng)
    return H
