"""
Relational graph attention classifier module
"""

from .rgat import (
    LayerConfig,
    AttentionParams,
    RgatLayerParams,
    init_layer_arrays,
    attention_scores,
    layer_forward,
    stack_forward,
)
from .embeddings import EmbeddingProvider, load_embedding_file, UNK
from .classifier import (
    ModelSpec,
    ModelParams,
    init_model,
    embed,
    aspect_pool,
    classify,
    forward,
    feature_ensemble_forward,
    l2_penalty,
    loss,
    graph_input,
    predict_proba,
)
from .checkpoint import save_checkpoint, load_checkpoint, read_checkpoint

__all__ = [
    'LayerConfig',
    'AttentionParams',
    'RgatLayerParams',
    'init_layer_arrays',
    'attention_scores',
    'layer_forward',
    'stack_forward',
    'EmbeddingProvider',
    'load_embedding_file',
    'UNK',
    'ModelSpec',
    'ModelParams',
    'init_model',
    'embed',
    'aspect_pool',
    'classify',
    'forward',
    'feature_ensemble_forward',
    'l2_penalty',
    'loss',
    'graph_input',
    'predict_proba',
    'save_checkpoint',
    'load_checkpoint',
    'read_checkpoint',
]
