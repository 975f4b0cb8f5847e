# src/training/trainer.py
"""
Mini-batch training with dev-set model selection
"""
from typing import Dict, List, Optional, Sequence, Tuple, TypeVar
import logging

import numpy as np
from tqdm import tqdm

from src.autodiff.tensor import Tape
from src.config import TrainConfig
from src.errors import NonFiniteError, TrainingDivergedError
from src.evaluation.metrics import accuracy, macro_f1
from src.ingest.aligner import AlignedParseSet
from src.ingest.dataset_loader import LabeledExample
from src.model.classifier import (
    GraphInput,
    ModelParams,
    ModelSpec,
    forward,
    graph_input,
    init_model,
    loss,
)
from src.model.embeddings import EmbeddingProvider
from src.monitor import TrainingMonitor
from src.training.optimizer import make_optimizer

logger = logging.getLogger(__name__)

T = TypeVar('T')

Prepared = Tuple[LabeledExample, GraphInput]


def dev_size(n: int, fraction: float) -> int:
    if n == 0 or fraction <= 0:
        return 0
    return min(n, max(1, int(np.floor(fraction * n + 0.5))))


def split_indices(n: int, fraction: float, seed: int) -> Tuple[List[int], List[int]]:
    """Sorted (train, dev) index lists; the same seed gives the same split"""
    k = dev_size(n, fraction)
    perm = np.random.default_rng(seed).permutation(n)
    dev = sorted(int(i) for i in perm[:k])
    dev_set = set(dev)
    return [i for i in range(n) if i not in dev_set], dev


def split_dev(dataset: Sequence[T], fraction: float, seed: int) -> Tuple[List[T], List[T]]:
    """Hold out round(fraction * N) items, at least one when fraction > 0"""
    train_idx, dev_idx = split_indices(len(dataset), fraction, seed)
    return [dataset[i] for i in train_idx], [dataset[i] for i in dev_idx]


def build_spec(config: TrainConfig, embedding_dim: int, parser_ids: List[str], longest: int) -> ModelSpec:
    max_len = config.max_len
    if longest > max_len:
        logger.warning(f"⚠️  max_len {max_len} raised to the longest sentence ({longest})")
        max_len = longest

    return ModelSpec(
        embedding_dim=embedding_dim,
        hidden_dim=config.hidden_dim,
        heads=config.heads,
        layers=config.layers,
        d_out=config.d_out,
        dropout=config.dropout,
        use_edge_types=config.use_edge_types,
        use_position=config.use_position,
        attention_activation=config.attention_activation,
        leaky_slope=config.leaky_slope,
        shared_attention=config.shared_attention,
        architecture=config.architecture,
        graph_mode=config.graph_mode,
        parser_ids=list(parser_ids),
        max_len=max_len,
    )


def build_model(
    config: TrainConfig,
    train_items: Sequence[AlignedParseSet],
    all_items: Sequence[AlignedParseSet],
    embeddings_path: Optional[str] = None,
) -> ModelParams:
    """Provider from the training split, spec from the config, seeded init"""
    if config.embedding_mode == 'file':
        provider = EmbeddingProvider.from_file(embeddings_path)
    else:
        tokens = (token for item in train_items for token in item.example.tokens)
        provider = EmbeddingProvider.trainable(tokens, config.embedding_dim)

    parser_ids = all_items[0].parser_ids if all_items else []
    longest = max((item.example.n for item in all_items), default=1)
    spec = build_spec(config, provider.dim, parser_ids, longest)
    return init_model(spec, provider, config.seed)


def prepare(items: Sequence[AlignedParseSet], spec: ModelSpec) -> List[Prepared]:
    return [(item.example, graph_input(item, spec)) for item in items]


def example_loss_and_grads(
    params: ModelParams,
    example: LabeledExample,
    graph: GraphInput,
    l2: float,
    train_flag: bool = True,
    rng: Optional[np.random.Generator] = None,
    check_finite: bool = False,
) -> Tuple[float, Dict[str, np.ndarray]]:
    tape = Tape(check_finite=check_finite)
    weights = params.bind(tape)
    probs = forward(example, graph, params, train_flag, weights, rng)
    rows = params.provider.token_ids(example.tokens) if params.provider.is_trainable else None
    value = loss(probs, example.label, weights, l2, rows)

    loss_value = value.item()
    if not np.isfinite(loss_value):
        return loss_value, {}

    tape.backward(value)
    return loss_value, tape.gradients()


def batch_loss(params: ModelParams, batch: Sequence[Prepared], l2: float) -> float:
    """Summed loss with dropout off"""
    total = 0.0
    for example, graph in batch:
        weights = params.bind()
        probs = forward(example, graph, params, False, weights)
        rows = params.provider.token_ids(example.tokens) if params.provider.is_trainable else None
        total += loss(probs, example.label, weights, l2, rows).item()
    return total


def first_step_decrease(
    params: ModelParams,
    batch: Sequence[Prepared],
    config: TrainConfig,
) -> Optional[Tuple[float, float, float]]:
    """One optimizer step on a copy of params, dropout off.

    Tries the configured learning rate, then lr/100. Returns
    (learning_rate, loss_before, loss_after) for the first rate that lowers
    the batch loss, or None when neither does.
    """
    before = batch_loss(params, batch, config.l2)
    base = config.resolved_learning_rate()

    for learning_rate in (base, base / 100):
        trial = params.copy()
        accumulated: Dict[str, np.ndarray] = {}
        for example, graph in batch:
            _, grads = example_loss_and_grads(trial, example, graph, config.l2, train_flag=False)
            for name in sorted(grads):
                accumulated[name] = accumulated[name] + grads[name] if name in accumulated else grads[name]

        make_optimizer(config.optimizer, learning_rate).step(trial.arrays, accumulated)
        after = batch_loss(trial, batch, config.l2)
        if after < before:
            return learning_rate, before, after

    return None


def predict(params: ModelParams, prepared: Sequence[Prepared], show_progress: bool = False) -> Tuple[List[int], List[List[float]]]:
    """Argmax predictions and class distributions, in input order"""
    preds, probs = [], []
    for example, graph in tqdm(prepared, desc="Predicting", disable=not show_progress):
        p = forward(example, graph, params, train_flag=False).data.reshape(-1)
        preds.append(int(np.argmax(p)))
        probs.append([float(x) for x in p])
    return preds, probs


def evaluate(params: ModelParams, prepared: Sequence[Prepared]) -> Tuple[float, float]:
    preds, _ = predict(params, prepared)
    golds = [example.label for example, _ in prepared]
    return accuracy(preds, golds), macro_f1(preds, golds)


def train(
    config: TrainConfig,
    dataset: Sequence[AlignedParseSet],
    embeddings_path: Optional[str] = None,
    monitor: Optional[TrainingMonitor] = None,
) -> Tuple[ModelParams, List[Dict]]:
    """Train with per-epoch dev selection; returns (best params, metrics history)"""
    if not dataset:
        raise ValueError("cannot train on an empty dataset")

    monitor = monitor or TrainingMonitor()
    monitor.start_run()

    train_items, dev_items = split_dev(list(dataset), config.dev_fraction, config.seed)
    logger.info(f"📋 {len(train_items)} training / {len(dev_items)} dev examples")

    params = build_model(config, train_items, dataset, embeddings_path)
    if config.epochs == 0:
        logger.info("⚠️  epochs=0, returning the initialization")
        return params, []

    if not train_items:
        raise ValueError("no training examples left after the dev split")

    train_data = prepare(train_items, params.spec)
    dev_data = prepare(dev_items, params.spec)

    learning_rate = config.resolved_learning_rate()
    optimizer = make_optimizer(config.optimizer, learning_rate)
    rng = np.random.default_rng([config.seed, 1])

    best_params, best_acc = params.copy(), None

    if config.debug_numerics:
        first = [train_data[i] for i in range(min(config.batch_size, len(train_data)))]
        outcome = first_step_decrease(params, first, config)
        if outcome is None:
            logger.warning("⚠️  one optimizer step does not lower the first-batch loss, even at lr/100")
        else:
            logger.info(f"🔍 First-batch loss {outcome[1]:.6f} -> {outcome[2]:.6f} at lr={outcome[0]:g}")

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_data))
        batches = [order[i:i + config.batch_size] for i in range(0, len(order), config.batch_size)]

        total_loss = 0.0
        for b, batch in enumerate(tqdm(batches, desc=f"Epoch {epoch}/{config.epochs}", disable=not config.show_progress)):
            accumulated: Dict[str, np.ndarray] = {}

            for idx in batch:
                example, graph = train_data[idx]
                try:
                    value, grads = example_loss_and_grads(
                        params, example, graph, config.l2, True, rng, config.debug_numerics
                    )
                except NonFiniteError as e:
                    raise TrainingDivergedError(
                        f"epoch {epoch} batch {b + 1}: {e}; try a lower learning_rate (now {learning_rate:g})"
                    ) from e

                if not np.isfinite(value):
                    raise TrainingDivergedError(
                        f"loss became non-finite at epoch {epoch} batch {b + 1}; "
                        f"try a lower learning_rate (now {learning_rate:g})"
                    )

                total_loss += value
                for name in sorted(grads):
                    if name in accumulated:
                        accumulated[name] += grads[name]
                    else:
                        accumulated[name] = grads[name]

            optimizer.step(params.arrays, accumulated)

        metrics = {'epoch': epoch, 'train_loss': total_loss / len(train_data), 'dev_acc': None, 'dev_macro_f1': None}

        if dev_data:
            metrics['dev_acc'], metrics['dev_macro_f1'] = evaluate(params, dev_data)
            if best_acc is None or metrics['dev_acc'] > best_acc:
                best_acc = metrics['dev_acc']
                best_params = params.copy()
        else:
            best_params = params.copy()

        monitor.log_epoch(metrics)
        logger.info(
            f"📈 Epoch {epoch}: train_loss={metrics['train_loss']:.4f} "
            f"dev_acc={metrics['dev_acc']} dev_macro_f1={metrics['dev_macro_f1']}"
        )

    summary = monitor.summarize()
    logger.info(f"✅ Training finished, best epoch {summary.get('best_epoch')} (dev_acc={summary.get('best_dev_acc')})")
    return best_params, monitor.history
